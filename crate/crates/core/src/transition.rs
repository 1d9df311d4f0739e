//! Global transition costs, the path-integral matching loss, triangle
//! decompositions and Roy-type identity checks.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Generator, VectorGenerator};
use crate::lda::{arithmetic_lda, lda_mean, WeightedInputs};
use crate::numerics::{find_root, finite_diff5, integrate_adaptive, Tolerance};

/// Default number of Simpson sub-intervals.
pub const DEFAULT_NODES: usize = 256;
const QUADRATURE_TOL: f64 = 1e-10;
const MAX_NODES: usize = 1 << 18;

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("bundles must be non-empty".into()));
    }
    Ok(())
}

fn check_weights(weights: &[f64], m: usize) -> Result<()> {
    if weights.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: weights.len(),
        });
    }
    if let Some(g) = weights.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::InvalidArgument(format!("weights must be positive, got {g}")));
    }
    Ok(())
}

/// `ℱ(x, y) = Σ γ_i D_φ(x_i ‖ y_i)`: the cost of moving from `y` to `x`.
pub fn transition_cost(gen: &Generator, x: &[f64], y: &[f64], weights: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    check_weights(weights, x.len())?;
    x.iter()
        .zip(y)
        .zip(weights)
        .map(|((&a, &b), &g)| Ok(g * gen.divergence(a, b)?))
        .sum()
}

fn separable_integrand<'a>(gen: &'a Generator, x: &'a [f64], y: &'a [f64]) -> Result<impl Fn(f64) -> f64 + 'a> {
    for (&a, &b) in x.iter().zip(y) {
        gen.check_interior(a)?;
        gen.check_interior(b)?;
    }
    let ux: Vec<f64> = x.iter().map(|&a| gen.u(a)).collect();
    Ok(move |lambda: f64| {
        x.iter()
            .zip(y)
            .zip(&ux)
            .map(|((&a, &b), &ua)| (b - a) * (gen.u((1.0 - lambda) * a + lambda * b) - ua))
            .sum()
    })
}

/// `∫₀¹ (y − x)ᵀ (∇φ(z(λ)) − ∇φ(x)) dλ` for a separable generator, starting
/// with `n` Simpson sub-intervals and doubling until converged.
pub fn path_integral(gen: &Generator, x: &[f64], y: &[f64], n: usize) -> Result<f64> {
    check_pair(x, y)?;
    let f = separable_integrand(gen, x, y)?;
    integrate_adaptive(f, 0.0, 1.0, n, QUADRATURE_TOL, MAX_NODES)
}

/// [`path_integral`] for a general vector generator.
pub fn path_integral_vec(gen: &VectorGenerator, x: &[f64], y: &[f64], n: usize) -> Result<f64> {
    check_pair(x, y)?;
    let gx = gen.grad(x)?;
    gen.grad(y)?;
    let f = |lambda: f64| {
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect();
        match gen.grad(&z) {
            Ok(gz) => x.iter().zip(y).zip(gz.iter().zip(&gx)).map(|((a, b), (p, q))| (b - a) * (p - q)).sum(),
            Err(_) => f64::NAN,
        }
    };
    integrate_adaptive(f, 0.0, 1.0, n, QUADRATURE_TOL, MAX_NODES)
}

/// Sampled segment `z(λ) = (1 − λ)x + λy` with its vector field, dual image
/// and running cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTrace {
    pub lambdas: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// `υ_φ(z) = ∇φ(z) − ∇φ(x)`.
    pub field_values: Vec<Vec<f64>>,
    pub dual_points: Vec<Vec<f64>>,
    pub cumulative_cost: Vec<f64>,
}

/// Samples the segment from `x` to `y`.  The running cost up to `λ` is
/// `Σ γ_i D_φ(z_i(λ) ‖ x_i)`, the antiderivative of the path integrand.
pub fn trace_path(gen: &Generator, x: &[f64], y: &[f64], weights: Option<&[f64]>, samples: usize) -> Result<PathTrace> {
    check_pair(x, y)?;
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    let ones = vec![1.0; x.len()];
    let weights = weights.unwrap_or(&ones);
    check_weights(weights, x.len())?;
    for (&a, &b) in x.iter().zip(y) {
        gen.check_interior(a)?;
        gen.check_interior(b)?;
    }
    let ux: Vec<f64> = x.iter().map(|&a| gen.u(a)).collect();
    let mut trace = PathTrace {
        lambdas: Vec::with_capacity(samples),
        points: Vec::with_capacity(samples),
        field_values: Vec::with_capacity(samples),
        dual_points: Vec::with_capacity(samples),
        cumulative_cost: Vec::with_capacity(samples),
    };
    let last = (samples - 1) as f64;
    for k in 0..samples {
        let lambda = k as f64 / last;
        let z: Vec<f64> = if k == 0 {
            x.to_vec()
        } else if k == samples - 1 {
            y.to_vec()
        } else {
            x.iter().zip(y).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect()
        };
        let dual: Vec<f64> = z.iter().map(|&v| gen.u(v)).collect();
        let field: Vec<f64> = dual.iter().zip(&ux).map(|(a, b)| a - b).collect();
        let cost = z
            .iter()
            .zip(x)
            .zip(weights)
            .map(|((&a, &b), &g)| g * gen.divergence_unchecked(a, b))
            .sum();
        trace.lambdas.push(lambda);
        trace.points.push(z);
        trace.field_values.push(field);
        trace.dual_points.push(dual);
        trace.cumulative_cost.push(cost);
    }
    Ok(trace)
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in cells {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

impl PathTrace {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn final_cost(&self) -> f64 {
        self.cumulative_cost.last().copied().unwrap_or(0.0)
    }

    /// Columns `lambda, z_1..z_m, v_1..v_m, u_1..u_m, cumulative_cost`.
    pub fn to_csv(&self) -> String {
        let m = self.dim();
        let mut header = vec!["lambda".to_string()];
        for prefix in ["z", "v", "u"] {
            header.extend((1..=m).map(|i| format!("{prefix}_{i}")));
        }
        header.push("cumulative_cost".into());
        let mut out = header.join(",");
        out.push('\n');
        for k in 0..self.lambdas.len() {
            let row = std::iter::once(self.lambdas[k])
                .chain(self.points[k].iter().copied())
                .chain(self.field_values[k].iter().copied())
                .chain(self.dual_points[k].iter().copied())
                .chain(std::iter::once(self.cumulative_cost[k]));
            push_row(&mut out, row);
        }
        out
    }
}

/// `ℱ(y, x) = ℱ(y, z) + ℱ(z, x) + Δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDecomposition {
    pub total: f64,
    pub via: Vec<f64>,
    pub term1: f64,
    pub term2: f64,
    pub delta: f64,
}

impl TransitionDecomposition {
    pub fn identity_residual(&self) -> f64 {
        (self.total - self.term1 - self.term2 - self.delta).abs()
    }

    pub fn to_csv(&self) -> String {
        let m = self.via.len();
        let mut out = String::from("total,term1,term2,delta");
        for i in 1..=m {
            let _ = write!(out, ",z_{i}");
        }
        out.push('\n');
        push_row(
            &mut out,
            [self.total, self.term1, self.term2, self.delta].into_iter().chain(self.via.iter().copied()),
        );
        out
    }
}

/// Splits `ℱ(y, x)` through `z`, with `Δ = Σ γ_i (y_i − z_i)(u(z_i) − u(x_i))`.
pub fn triangle_decompose(gen: &Generator, x: &[f64], y: &[f64], z: &[f64], weights: &[f64]) -> Result<TransitionDecomposition> {
    check_pair(x, y)?;
    check_pair(x, z)?;
    check_weights(weights, x.len())?;
    for &v in x.iter().chain(z) {
        gen.check_interior(v)?;
    }
    let total = transition_cost(gen, y, x, weights)?;
    let term1 = transition_cost(gen, y, z, weights)?;
    let term2 = transition_cost(gen, z, x, weights)?;
    let delta = (0..x.len())
        .map(|i| weights[i] * (y[i] - z[i]) * (gen.u(z[i]) - gen.u(x[i])))
        .sum();
    Ok(TransitionDecomposition {
        total,
        via: z.to_vec(),
        term1,
        term2,
        delta,
    })
}

/// Which canonical intermediate bundle to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Equal inputs at `μ_φ`: zeroes `Δ` for transitions from a constant bundle.
    Left,
    /// Equal inputs at the weighted arithmetic mean: zeroes `Δ` for transitions
    /// to a constant bundle.
    Right,
}

pub fn bsi_canonical(gen: &Generator, bundle: &[f64], weights: &[f64], side: Side) -> Result<Vec<f64>> {
    let inputs = WeightedInputs::new(bundle.to_vec(), weights.to_vec())?;
    for &v in bundle {
        gen.check_interior(v)?;
    }
    let level = match side {
        Side::Left => lda_mean(gen, &inputs)?,
        Side::Right => arithmetic_lda(&inputs),
    };
    Ok(vec![level; bundle.len()])
}

/// Decomposes the cost of moving from `x` to the constant bundle `c′` into
/// `Γ D_φ(c′ ‖ μ_φ)` (term1) and `Σ γ_i D_φ(μ_φ ‖ x_i)` (term2).
pub fn slutsky_decompose(gen: &Generator, x: &[f64], target: f64, weights: &[f64]) -> Result<TransitionDecomposition> {
    gen.check_interior(target)?;
    let z = bsi_canonical(gen, x, weights, Side::Left)?;
    triangle_decompose(gen, x, &vec![target; x.len()], &z, weights)
}

/// Maps a parameter point `(s, t)` to weighted inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Parameterization {
    /// `x ↦ s·x + t` with fixed weights.
    ScaleShift { values: Vec<f64>, weights: Vec<f64> },
    /// `(p_1, w) ↦ (w/P, …, w/P)` with `γ = p`; the remaining prices are fixed.
    PtcbMarshallian { other_prices: Vec<f64> },
}

impl Parameterization {
    pub fn scale_shift(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        WeightedInputs::new(values.clone(), weights.clone())?;
        Ok(Parameterization::ScaleShift { values, weights })
    }

    pub fn ptcb_marshallian(other_prices: Vec<f64>) -> Result<Self> {
        if let Some(p) = other_prices.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidArgument(format!("prices must be positive, got {p}")));
        }
        Ok(Parameterization::PtcbMarshallian { other_prices })
    }

    pub fn inputs(&self, s: f64, t: f64) -> Result<WeightedInputs> {
        match self {
            Parameterization::ScaleShift { values, weights } => {
                WeightedInputs::new(values.iter().map(|v| s * v + t).collect(), weights.clone())
            }
            Parameterization::PtcbMarshallian { other_prices } => {
                let mut prices = vec![s];
                prices.extend_from_slice(other_prices);
                let level = t / prices.iter().sum::<f64>();
                WeightedInputs::new(vec![level; prices.len()], prices)
            }
        }
    }
}

/// Ratios `∂f/∂s / ∂f/∂t` for `f = D_φ(c‖μ_φ)`, `D_φ(μ_φ‖c)` and `μ_φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoyRatios {
    pub left: f64,
    pub right: f64,
    pub aggregate: f64,
}

impl RoyRatios {
    pub fn residual(&self) -> f64 {
        let v = [self.left, self.right, self.aggregate];
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max((v[i] - v[j]).abs());
            }
        }
        worst
    }
}

pub fn roy_ratios(gen: &Generator, c: f64, param: &Parameterization, at: (f64, f64)) -> Result<RoyRatios> {
    gen.check_interior(c)?;
    let (s, t) = at;
    let mu_at = |s: f64, t: f64| param.inputs(s, t).and_then(|inp| lda_mean(gen, &inp));
    let mu0 = mu_at(s, t)?;
    let scale = mu0.abs().max(c.abs()).max(1.0);
    if (mu0 - c).abs() <= 1e-9 * scale {
        return Err(Error::DegenerateRatio("aggregate equals the reference constant".into()));
    }
    let mu = |s: f64, t: f64| mu_at(s, t).unwrap_or(f64::NAN);
    let hs = 1e-4 * s.abs().max(1.0);
    let ht = 1e-4 * t.abs().max(1.0);
    let ratio = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
        let ds = finite_diff5(|v| f(mu(v, t)), s, hs);
        let dt = finite_diff5(|v| f(mu(s, v)), t, ht);
        if !(ds.is_finite() && dt.is_finite()) {
            return Err(Error::NumericalBreakdown("parameterization left the domain".into()));
        }
        if dt.abs() <= 1e-12 {
            return Err(Error::DegenerateRatio("derivative in t vanishes".into()));
        }
        Ok(ds / dt)
    };
    let aggregate = ratio(&|m| m)?;
    let left = ratio(&|m| gen.divergence_unchecked(c, m))?;
    let right = ratio(&|m| gen.divergence_unchecked(m, c))?;
    Ok(RoyRatios { left, right, aggregate })
}

/// Largest pairwise gap between the three ratios of [`roy_ratios`].
pub fn roy_residual(gen: &Generator, c: f64, param: &Parameterization, at: (f64, f64)) -> Result<f64> {
    Ok(roy_ratios(gen, c, param, at)?.residual())
}

/// Two-input bundles `y` on the divergence level set around `z`:
/// `Σ D_φ(y_i ‖ z_i) = level` (right) or `Σ D_φ(z_i ‖ y_i) = level` (left),
/// sampled by direction angle.
pub fn divergence_level_set(gen: &Generator, z: [f64; 2], level: f64, side: Side, samples: usize) -> Result<Vec<[f64; 2]>> {
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::InvalidArgument(format!("level must be positive, got {level}")));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    gen.check_interior(z[0])?;
    gen.check_interior(z[1])?;
    let domain = gen.domain();
    (0..samples)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / samples as f64;
            let dir = [angle.cos(), angle.sin()];
            let point = |r: f64| [z[0] + r * dir[0], z[1] + r * dir[1]];
            let gap = |r: f64| -> Option<f64> {
                let y = point(r);
                if r < 0.0 || !domain.contains(y[0]) || !domain.contains(y[1]) {
                    return None;
                }
                let d: f64 = match side {
                    Side::Right => (0..2).map(|i| gen.divergence_unchecked(y[i], z[i])).sum(),
                    Side::Left => (0..2).map(|i| gen.divergence_unchecked(z[i], y[i])).sum(),
                };
                Some(d - level).filter(|v| v.is_finite())
            };
            let unreachable = || Error::NoSolution(format!("level {level} not reached along angle {angle}"));
            let (mut lo, mut hi) = (0.0, 1e-3 * z[0].abs().max(z[1].abs()).max(1.0));
            for _ in 0..400 {
                match gap(hi) {
                    Some(v) if v > 0.0 => break,
                    Some(_) => {
                        lo = hi;
                        hi *= 2.0;
                    }
                    None if hi - lo > 1e-14 * hi => hi = (lo + hi) / 2.0,
                    None => return Err(unreachable()),
                }
            }
            if !gap(hi).is_some_and(|v| v > 0.0) {
                return Err(unreachable());
            }
            let r = find_root(|r| gap(r).unwrap_or(f64::NAN), lo, hi, Tolerance::tight())?;
            Ok(point(r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_costs() {
        let se = Generator::squared_euclidean();
        assert_eq!(transition_cost(&se, &[3.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap(), 4.0);
        assert_eq!(transition_cost(&se, &[2.0, 5.0], &[2.0, 5.0], &[1.0, 3.0]).unwrap(), 0.0);
        let kl = Generator::kullback_leibler();
        let v = transition_cost(&kl, &[2.0, 1.0], &[1.0, 1.0], &[2.0, 1.0]).unwrap();
        // weighted sum of x ln(x/y) − x + y
        let oracle = 2.0 * (2.0 * (2.0f64).ln() - 2.0 + 1.0);
        assert!((v - oracle).abs() < 1e-15);
        assert!(matches!(
            transition_cost(&kl, &[1.0], &[1.0, 2.0], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(transition_cost(&kl, &[1.0], &[-1.0], &[1.0]).is_err());
    }

    #[test]
    fn path_integrals() {
        let se = Generator::squared_euclidean();
        assert_eq!(path_integral(&se, &[1.0], &[3.0], DEFAULT_NODES).unwrap(), 4.0);
        assert_eq!(path_integral(&se, &[2.0, 7.0], &[2.0, 7.0], DEFAULT_NODES).unwrap(), 0.0);
        let kl = Generator::kullback_leibler();
        let v = path_integral(&kl, &[0.5, 2.0], &[3.0, 1.0], DEFAULT_NODES).unwrap();
        let d = kl.divergence(3.0, 0.5).unwrap() + kl.divergence(1.0, 2.0).unwrap();
        assert!((v - d).abs() < 1e-10);

        let q = VectorGenerator::quadratic_form(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let v = path_integral_vec(&q, &[0.0, 1.0], &[1.0, 0.0], DEFAULT_NODES).unwrap();
        // (y−x)ᵀA(y−x) with y−x = (1,−1)
        assert!((v - 2.0).abs() < 1e-12);
        assert!((q.divergence_vec(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn traces() {
        let cd = Generator::cobb_douglas();
        let t = trace_path(&cd, &[2.0, 2.0], &[4.0, 1.0], None, 101).unwrap();
        assert_eq!(t.lambdas.len(), 101);
        assert!(t.lambdas.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(t.field_values[0], vec![0.0, 0.0]);
        assert_eq!(t.dual_points[100], vec![cd.u(4.0), cd.u(1.0)]);
        let end = transition_cost(&cd, &[4.0, 1.0], &[2.0, 2.0], &[1.0, 1.0]).unwrap();
        assert!((t.final_cost() - end).abs() < 1e-14);
        // running cost against quadrature of the integrand up to λ
        let mid = 40;
        let lam = t.lambdas[mid];
        let f = separable_integrand(&cd, &[2.0, 2.0], &[4.0, 1.0]).unwrap();
        let q = integrate_adaptive(f, 0.0, lam, 256, 1e-12, 1 << 16).unwrap();
        assert!((q - t.cumulative_cost[mid]).abs() < 1e-10);

        let flat = trace_path(&cd, &[1.5], &[1.5], None, 5).unwrap();
        assert!(flat.cumulative_cost.iter().all(|&c| c == 0.0));
        assert!(flat.points.iter().all(|p| p == &vec![1.5]));

        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "lambda,z_1,z_2,v_1,v_2,u_1,u_2,cumulative_cost");
        assert_eq!(lines.count(), 101);
        assert!(trace_path(&cd, &[1.0], &[2.0], None, 1).is_err());
    }

    #[test]
    fn triangle_examples() {
        let se = Generator::squared_euclidean();
        let d = triangle_decompose(&se, &[0.0, 0.0], &[2.0, 2.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!((d.total, d.term1, d.term2, d.delta), (8.0, 5.0, 1.0, 2.0));
        let kl = Generator::kullback_leibler();
        let (x, y) = ([1.0, 3.0], [2.0, 0.5]);
        let at_x = triangle_decompose(&kl, &x, &y, &x, &[1.0, 2.0]).unwrap();
        assert_eq!((at_x.delta, at_x.term2), (0.0, 0.0));
        assert_eq!(at_x.total, at_x.term1);
        let at_y = triangle_decompose(&kl, &x, &y, &y, &[1.0, 2.0]).unwrap();
        assert_eq!((at_y.delta, at_y.term1), (0.0, 0.0));
        let any = triangle_decompose(&kl, &x, &y, &[0.7, 1.9], &[1.0, 2.0]).unwrap();
        assert!(any.identity_residual() < 1e-14);
    }

    #[test]
    fn canonical_intermediates() {
        let se = Generator::squared_euclidean();
        assert_eq!(bsi_canonical(&se, &[2.0, 4.0], &[1.0, 1.0], Side::Right).unwrap(), vec![3.0, 3.0]);
        // Σ D(x_i‖1) = Σ D(x_i‖3) + 2 D(3‖1) with D(a‖b) = (a − b)²
        let d = triangle_decompose(&se, &[1.0, 1.0], &[2.0, 4.0], &[3.0, 3.0], &[1.0, 1.0]).unwrap();
        assert_eq!((d.total, d.term1, d.term2, d.delta), (10.0, 2.0, 8.0, 0.0));

        let cd = Generator::cobb_douglas();
        let z = bsi_canonical(&cd, &[4.0, 1.0], &[1.0, 1.0], Side::Left).unwrap();
        assert!(z.iter().all(|v| (v - 2.0).abs() < 1e-14));
        for side in [Side::Left, Side::Right] {
            assert_eq!(bsi_canonical(&cd, &[1.3, 1.3], &[2.0, 1.0], side).unwrap(), vec![1.3, 1.3]);
        }
    }

    #[test]
    fn slutsky_examples() {
        let kl = Generator::kullback_leibler();
        let d = slutsky_decompose(&kl, &[1.0, 4.0], 3.0, &[1.0, 1.0]).unwrap();
        // income: 2 D(3‖2); substitution: D(2‖1) + D(2‖4)
        let income = 2.0 * (3.0 * (1.5f64).ln() - 1.0);
        let substitution = (2.0 * (2.0f64).ln() - 1.0) + (2.0 * (0.5f64).ln() + 2.0);
        assert!((d.term1 - income).abs() < 1e-14 && (d.term2 - substitution).abs() < 1e-14);
        assert!(d.term1 > 0.0 && d.term2 > 0.0);
        assert!(d.delta.abs() < 1e-14 && d.identity_residual() < 1e-10);
        let mu = lda_mean(&kl, &WeightedInputs::uniform(vec![1.0, 4.0]).unwrap()).unwrap();
        assert!(slutsky_decompose(&kl, &[1.0, 4.0], mu, &[1.0, 1.0]).unwrap().term1.abs() < 1e-14);
        assert_eq!(slutsky_decompose(&kl, &[2.5, 2.5], 1.0, &[1.0, 3.0]).unwrap().term2, 0.0);
    }

    #[test]
    fn roy_identity() {
        let gem = Generator::gem(1.0).unwrap();
        let p = Parameterization::scale_shift(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let r = roy_ratios(&gem, 2.0, &p, (1.0, 0.0)).unwrap();
        assert!(r.residual() <= 1e-4);
        // for a scale/shift the aggregate ratio is the log-sum-exp derivative in s
        let w = (1.0f64).exp() / (1.0 + (1.0f64).exp());
        assert!((r.aggregate - w).abs() < 1e-8);

        let cd = Generator::cobb_douglas();
        let flat = Parameterization::scale_shift(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let r = roy_ratios(&cd, 3.0, &flat, (1.0, 1.0)).unwrap();
        assert!(r.left.abs() < 1e-12 && r.right.abs() < 1e-12 && r.aggregate.abs() < 1e-12);
        assert!(matches!(roy_ratios(&cd, 1.0, &flat, (1.0, 1.0)), Err(Error::DegenerateRatio(_))));

        let m = Parameterization::ptcb_marshallian(vec![2.0, 1.0]).unwrap();
        let r = roy_ratios(&cd, 0.5, &m, (1.0, 8.0)).unwrap();
        // μ = w/P: ∂μ/∂p_1 ÷ ∂μ/∂w = −w/P
        assert!((r.aggregate + 2.0).abs() < 1e-8);
        assert!(r.residual() <= 1e-4);
    }

    #[test]
    fn level_sets() {
        let kl = Generator::kullback_leibler();
        for side in [Side::Left, Side::Right] {
            let pts = divergence_level_set(&kl, [1.0, 2.0], 0.1, side, 12).unwrap();
            for y in pts {
                let d = match side {
                    Side::Right => kl.divergence(y[0], 1.0).unwrap() + kl.divergence(y[1], 2.0).unwrap(),
                    Side::Left => kl.divergence(1.0, y[0]).unwrap() + kl.divergence(2.0, y[1]).unwrap(),
                };
                assert!((d - 0.1).abs() < 1e-10);
            }
        }
    }
}
