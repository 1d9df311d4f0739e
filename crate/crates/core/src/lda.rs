//! Lowest distortion aggregators `u⁻¹(Σ γ_i u(x_i) / Γ)` and the
//! properties they share.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::numerics::{minimize_1d, Tolerance};

/// Inputs `x_i` with positive weights `γ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInputs")]
pub struct WeightedInputs {
    values: Vec<f64>,
    weights: Vec<f64>,
    #[serde(skip_deserializing)]
    gamma_sum: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInputs {
    values: Vec<f64>,
    weights: Vec<f64>,
    #[allow(dead_code)]
    #[serde(default)]
    gamma_sum: Option<f64>,
}

impl TryFrom<RawInputs> for WeightedInputs {
    type Error = Error;

    fn try_from(raw: RawInputs) -> Result<Self> {
        WeightedInputs::new(raw.values, raw.weights)
    }
}

impl WeightedInputs {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("at least one input is required".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                got: weights.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("input {v} is not finite")));
        }
        if let Some(g) = weights.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::InvalidArgument(format!("weight {g} is not positive")));
        }
        let gamma_sum = weights.iter().sum();
        Ok(WeightedInputs {
            values,
            weights,
            gamma_sum,
        })
    }

    /// Unit weights.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let weights = vec![1.0; values.len()];
        WeightedInputs::new(values, weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn gamma_sum(&self) -> f64 {
        self.gamma_sum
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same weights, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        WeightedInputs::new(values, self.weights.clone())
    }

    fn weighted_mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&x, &g)| g * f(x))
            .sum::<f64>()
            / self.gamma_sum
    }
}

/// `u⁻¹(Σ γ_i u(x_i) / Γ)`.
pub fn lda_mean(gen: &Generator, inputs: &WeightedInputs) -> Result<f64> {
    for &x in inputs.values() {
        gen.check_interior(x)?;
    }
    let s = inputs.weighted_mean_of(|x| gen.u(x));
    let mu = gen.try_u_inverse(s)?;
    // rounding can push the mean a few ulps past the extreme inputs
    Ok(mu.clamp(inputs.min(), inputs.max()))
}

/// `Σ γ_i x_i / Γ`.
pub fn arithmetic_lda(inputs: &WeightedInputs) -> f64 {
    inputs.weighted_mean_of(|x| x)
}

/// Aggregator of the Legendre conjugate: `u(Σ γ_i u⁻¹(x_i) / Γ)`.
pub fn dual_lda(gen: &Generator, inputs: &WeightedInputs) -> Result<f64> {
    let dual = gen.legendre_conjugate()?;
    lda_mean(&dual, inputs)
}

fn search_tolerance() -> Tolerance {
    Tolerance::new(1e-11, 1e-13, 1000).expect("static tolerance")
}

/// Numerical minimiser of `y ↦ Σ γ_i D(y‖x_i)` over `[min x, max x]`.
pub fn left_minimizer(gen: &Generator, inputs: &WeightedInputs) -> Result<f64> {
    for &x in inputs.values() {
        gen.check_interior(x)?;
    }
    let (lo, hi) = (inputs.min(), inputs.max());
    if lo == hi {
        return Ok(lo);
    }
    let cost = |y: f64| {
        inputs
            .values()
            .iter()
            .zip(inputs.weights())
            .map(|(&x, &g)| g * gen.divergence_unchecked(y, x))
            .sum::<f64>()
    };
    minimize_1d(cost, lo, hi, search_tolerance())
}

/// Numerical minimiser of `y ↦ Σ γ_i D(x_i‖y)` over `[min x, max x]`.
/// When `prices` are given they replace the weights (`γ_i ∝ p_i`).
pub fn right_minimizer(gen: &Generator, inputs: &WeightedInputs, prices: Option<&[f64]>) -> Result<f64> {
    let inputs = match prices {
        Some(p) => WeightedInputs::new(inputs.values().to_vec(), p.to_vec())?,
        None => inputs.clone(),
    };
    for &x in inputs.values() {
        gen.check_interior(x)?;
    }
    let (lo, hi) = (inputs.min(), inputs.max());
    if lo == hi {
        return Ok(lo);
    }
    let cost = |y: f64| {
        inputs
            .values()
            .iter()
            .zip(inputs.weights())
            .map(|(&x, &g)| g * gen.divergence_unchecked(x, y))
            .sum::<f64>()
    };
    minimize_1d(cost, lo, hi, search_tolerance())
}

/// Outcome of the finite-difference curvature probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Concave,
    Convex,
    Affine,
    Inconclusive,
}

/// Classifies `x ↦ μ_φ(x)` (with the given weights) on the box `[lo, hi]^m`
/// by sampling directional second differences along `e_i` and `e_i ± e_j`.
pub fn curvature_probe(gen: &Generator, weights: &[f64], lo: f64, hi: f64) -> Result<Curvature> {
    let m = weights.len();
    if m == 0 || !(lo < hi) {
        return Err(Error::InvalidArgument("curvature probe needs a non-empty box".into()));
    }
    if !gen.domain().contains(lo) || !gen.domain().contains(hi) {
        return Err(Error::domain(if gen.domain().contains(lo) { hi } else { lo }, gen.domain()));
    }
    let h = 1e-3 * (hi - lo);
    let (a, b) = (lo + 2.0 * h, hi - 2.0 * h);
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        let mut d = vec![0.0; m];
        d[i] = 1.0;
        directions.push(d);
        for j in i + 1..m {
            for s in [1.0, -1.0] {
                let mut d = vec![0.0; m];
                d[i] = 1.0;
                d[j] = s;
                directions.push(d);
            }
        }
    }
    let mean = |x: &[f64]| -> Result<f64> {
        let inputs = WeightedInputs::new(x.to_vec(), weights.to_vec())?;
        lda_mean(gen, &inputs)
    };
    let (mut neg, mut pos) = (false, false);
    const SAMPLES: usize = 24;
    // golden-ratio lattice for deterministic coverage of the box
    let golden = 0.618_033_988_749_894_9;
    for s in 0..SAMPLES {
        let x: Vec<f64> = (0..m)
            .map(|k| {
                let t = ((s as f64 + 0.5) * golden * (k as f64 + 1.0) + 0.37 * k as f64).fract();
                a + t * (b - a)
            })
            .collect();
        let f0 = mean(&x)?;
        let tol = (1e-8 + 64.0 * f64::EPSILON / (h * h)) * f0.abs().max(1.0);
        for d in &directions {
            let plus: Vec<f64> = x.iter().zip(d).map(|(v, e)| v + h * e).collect();
            let minus: Vec<f64> = x.iter().zip(d).map(|(v, e)| v - h * e).collect();
            let d2 = (mean(&plus)? - 2.0 * f0 + mean(&minus)?) / (h * h);
            if d2 > tol {
                pos = true;
            } else if d2 < -tol {
                neg = true;
            }
        }
    }
    Ok(match (neg, pos) {
        (false, false) => Curvature::Affine,
        (true, false) => Curvature::Concave,
        (false, true) => Curvature::Convex,
        (true, true) => Curvature::Inconclusive,
    })
}

/// Per-property outcome of the aggregator lemma checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub mu_phi: f64,
    pub mu: f64,
    pub bounds: bool,
    pub composition: bool,
    pub composition_residual: f64,
    pub shift_invariance: bool,
    pub shift_residual: f64,
    pub duality: bool,
    pub duality_residual: f64,
    pub curvature: Curvature,
    /// `None` when the curvature probe is inconclusive.
    pub arithmetic_ordering: Option<bool>,
}

impl Lemma1Report {
    pub fn all_pass(&self) -> bool {
        self.bounds && self.composition && self.shift_invariance && self.duality && self.arithmetic_ordering != Some(false)
    }
}

const SHIFT_B: f64 = 0.7;
const SHIFT_C: f64 = -1.3;

/// Evaluates bounds, composition, shift invariance, the conjugate
/// duality relation and the ordering against the arithmetic mean.
pub fn check_lemma1(gen: &Generator, inputs: &WeightedInputs) -> Result<Lemma1Report> {
    let mu_phi = lda_mean(gen, inputs)?;
    let mu = arithmetic_lda(inputs);
    let scale = mu_phi.abs().max(1.0);
    let (lo, hi) = (inputs.min(), inputs.max());

    let bounds = lo <= mu_phi && mu_phi <= hi;

    let composition_residual = if inputs.len() < 2 {
        0.0
    } else {
        let split = inputs.len() / 2;
        let part = |r: std::ops::Range<usize>| -> Result<(f64, f64)> {
            let sub = WeightedInputs::new(inputs.values()[r.clone()].to_vec(), inputs.weights()[r].to_vec())?;
            Ok((lda_mean(gen, &sub)?, sub.gamma_sum()))
        };
        let (a, ga) = part(0..split)?;
        let (b, gb) = part(split..inputs.len())?;
        let composed = lda_mean(gen, &WeightedInputs::new(vec![a, b], vec![ga, gb])?)?;
        (composed - mu_phi).abs()
    };
    let composition = composition_residual <= 1e-9 * scale;

    let shifted = gen.shifted(SHIFT_B, SHIFT_C)?;
    let shift_residual = (lda_mean(&shifted, inputs)? - mu_phi).abs();
    let shift_invariance = shift_residual <= 1e-10 * scale;

    let duality_residual = duality_relation_residual(gen, inputs)?;
    let duality = duality_residual <= 1e-8;

    let curvature = if lo < hi {
        curvature_probe(gen, inputs.weights(), lo, hi)?
    } else {
        Curvature::Affine
    };
    let slack = 1e-10 * scale;
    let arithmetic_ordering = match curvature {
        Curvature::Concave => Some(mu_phi <= mu + slack),
        Curvature::Convex => Some(mu_phi >= mu - slack),
        Curvature::Affine => Some((mu_phi - mu).abs() <= slack),
        Curvature::Inconclusive => None,
    };

    Ok(Lemma1Report {
        mu_phi,
        mu,
        bounds,
        composition,
        composition_residual,
        shift_invariance,
        shift_residual,
        duality,
        duality_residual,
        curvature,
        arithmetic_ordering,
    })
}

/// Residual of the relation mapping the concavity inequality of `μ_φ` on
/// the two-column matrix `[x, rot(x)]` onto the convexity inequality of the
/// conjugate aggregator on `u([x, rot(x)])`.  Both sides of each
/// inequality are mapped term by term, so the residual is a rounding level.
fn duality_relation_residual(gen: &Generator, inputs: &WeightedInputs) -> Result<f64> {
    let m = inputs.len();
    let col0: Vec<f64> = inputs.values().to_vec();
    let col1: Vec<f64> = (0..m).map(|i| col0[(i + 1) % m]).collect();
    let columns = [col0, col1];
    let pair = |a: f64, b: f64| WeightedInputs::uniform(vec![a, b]);

    // primal side
    let row_avg: Vec<f64> = (0..m).map(|i| 0.5 * (columns[0][i] + columns[1][i])).collect();
    let p1 = gen.u(lda_mean(gen, &inputs.with_values(row_avg)?)?);
    let col_lda0 = lda_mean(gen, &inputs.with_values(columns[0].clone())?)?;
    let col_lda1 = lda_mean(gen, &inputs.with_values(columns[1].clone())?)?;
    let p2 = gen.u(0.5 * (col_lda0 + col_lda1));

    // conjugate side on x' = u(x)
    let prime: Vec<Vec<f64>> = columns.iter().map(|c| c.iter().map(|&x| gen.u(x)).collect()).collect();
    let row_duals: Vec<f64> = (0..m)
        .map(|i| dual_lda(gen, &pair(prime[0][i], prime[1][i])?))
        .collect::<Result<_>>()?;
    let d1 = arithmetic_lda(&inputs.with_values(row_duals)?);
    let col_means = [
        arithmetic_lda(&inputs.with_values(prime[0].clone())?),
        arithmetic_lda(&inputs.with_values(prime[1].clone())?),
    ];
    let d2 = dual_lda(gen, &pair(col_means[0], col_means[1])?)?;

    let r1 = (p1 - d1).abs() / p1.abs().max(1.0);
    let r2 = (p2 - d2).abs() / p2.abs().max(1.0);
    Ok(r1.max(r2))
}
