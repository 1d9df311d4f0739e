//! Economic production functions, their generators, and the numerical
//! checks behind the exhaustivity matrix.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::lda::{lda_mean, WeightedInputs};
use crate::numerics::{expand_bracket, finite_diff5, find_root, Tolerance};
use crate::rng::{trial_rng, uniform_in_box};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpfFamily {
    #[serde(alias = "CES")]
    Ces,
    #[serde(alias = "CobbDouglas")]
    CobbDouglas,
    #[serde(alias = "GEM")]
    Gem,
    #[serde(alias = "Leontief")]
    Leontief,
    #[serde(alias = "Translog")]
    Translog,
    #[serde(alias = "MST")]
    Mst,
}

impl EpfFamily {
    pub const ALL: [EpfFamily; 6] = [
        EpfFamily::Ces,
        EpfFamily::CobbDouglas,
        EpfFamily::Gem,
        EpfFamily::Leontief,
        EpfFamily::Translog,
        EpfFamily::Mst,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EpfFamily::Ces => "CES",
            EpfFamily::CobbDouglas => "CobbDouglas",
            EpfFamily::Gem => "GEM",
            EpfFamily::Leontief => "Leontief",
            EpfFamily::Translog => "Translog",
            EpfFamily::Mst => "MST",
        }
    }
}

/// A production function from the catalog with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpfSpec {
    pub family: EpfFamily,
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_matrix: Option<Vec<Vec<f64>>>,
}

/// Sign restriction of an EPF's input domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputDomain {
    Positive,
    Negative,
    Real,
}

impl InputDomain {
    pub fn contains(self, x: f64) -> bool {
        match self {
            InputDomain::Positive => x > 0.0 && x.is_finite(),
            InputDomain::Negative => x < 0.0 && x.is_finite(),
            InputDomain::Real => x.is_finite(),
        }
    }

    fn describe(self) -> &'static str {
        match self {
            InputDomain::Positive => "(0, inf)",
            InputDomain::Negative => "(-inf, 0)",
            InputDomain::Real => "(-inf, inf)",
        }
    }
}

impl EpfSpec {
    fn base(family: EpfFamily, beta: Vec<f64>) -> Self {
        EpfSpec {
            family,
            beta,
            sigma: None,
            theta: None,
            beta0: None,
            beta_matrix: None,
        }
    }

    pub fn ces(sigma: f64, beta: Vec<f64>) -> Result<Self> {
        let s = EpfSpec {
            sigma: Some(sigma),
            ..Self::base(EpfFamily::Ces, beta)
        };
        s.validate().map(|_| s)
    }

    pub fn cobb_douglas(beta: Vec<f64>) -> Result<Self> {
        let s = Self::base(EpfFamily::CobbDouglas, beta);
        s.validate().map(|_| s)
    }

    pub fn gem(theta: f64, beta: Vec<f64>) -> Result<Self> {
        let s = EpfSpec {
            theta: Some(theta),
            ..Self::base(EpfFamily::Gem, beta)
        };
        s.validate().map(|_| s)
    }

    pub fn leontief(beta: Vec<f64>) -> Result<Self> {
        let s = Self::base(EpfFamily::Leontief, beta);
        s.validate().map(|_| s)
    }

    pub fn translog(beta0: f64, beta: Vec<f64>, beta_matrix: Vec<Vec<f64>>) -> Result<Self> {
        let s = EpfSpec {
            beta0: Some(beta0),
            beta_matrix: Some(beta_matrix),
            ..Self::base(EpfFamily::Translog, beta)
        };
        s.validate().map(|_| s)
    }

    pub fn mst(theta: f64, beta: Vec<f64>) -> Result<Self> {
        let s = EpfSpec {
            theta: Some(theta),
            ..Self::base(EpfFamily::Mst, beta)
        };
        s.validate().map(|_| s)
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn domain(&self) -> InputDomain {
        match self.family {
            EpfFamily::Gem => InputDomain::Real,
            EpfFamily::Mst if self.theta == Some(1.0) => InputDomain::Negative,
            _ => InputDomain::Positive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.beta.is_empty() {
            return bad("beta must be non-empty".into());
        }
        if let Some(b) = self.beta.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return bad(format!("beta entries must be positive, got {b}"));
        }
        let unexpected = |name: &str, present: bool| {
            if present {
                Err(Error::InvalidSpec(format!("`{name}` does not apply to {}", self.family.label())))
            } else {
                Ok(())
            }
        };
        let f = self.family;
        unexpected("sigma", self.sigma.is_some() && f != EpfFamily::Ces)?;
        unexpected("theta", self.theta.is_some() && !matches!(f, EpfFamily::Gem | EpfFamily::Mst))?;
        unexpected("beta0", self.beta0.is_some() && f != EpfFamily::Translog)?;
        unexpected("beta_matrix", self.beta_matrix.is_some() && f != EpfFamily::Translog)?;
        match f {
            EpfFamily::Ces => match self.sigma {
                None => bad("CES needs sigma".into()),
                Some(s) if !s.is_finite() || s == 0.0 || s == 1.0 => bad(format!("CES sigma must avoid 0 and 1, got {s}")),
                _ => Ok(()),
            },
            EpfFamily::CobbDouglas => {
                let total: f64 = self.beta.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    bad(format!("Cobb-Douglas needs weights summing to 1, got {total}"))
                } else {
                    Ok(())
                }
            }
            EpfFamily::Gem => match self.theta {
                None => bad("GEM needs theta".into()),
                Some(t) if !t.is_finite() || t == 0.0 => bad(format!("GEM theta must be non-zero, got {t}")),
                _ => Ok(()),
            },
            EpfFamily::Leontief => Ok(()),
            EpfFamily::Translog => {
                let m = self.dim();
                match (&self.beta0, &self.beta_matrix) {
                    (Some(b0), Some(mat)) => {
                        if !b0.is_finite() {
                            return bad("beta0 must be finite".into());
                        }
                        if mat.len() != m || mat.iter().any(|row| row.len() != m) {
                            return bad(format!("beta_matrix must be {m}x{m}"));
                        }
                        if mat.iter().flatten().any(|b| !(b.is_finite() && *b > 0.0)) {
                            return bad("beta_matrix entries must be positive".into());
                        }
                        Ok(())
                    }
                    _ => bad("Translog needs beta0 and beta_matrix".into()),
                }
            }
            EpfFamily::Mst => match self.theta {
                Some(t) if t == 1.0 || t == -1.0 => Ok(()),
                other => bad(format!("MST theta must be -1 or +1, got {other:?}")),
            },
        }
    }

    fn check_inputs(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let d = self.domain();
        match x.iter().find(|v| !d.contains(**v)) {
            Some(&v) => Err(Error::domain(v, d.describe())),
            None => Ok(()),
        }
    }
}

/// `(Σ β_i x_i^r)^(1/r)` with `r = (σ−1)/σ`, scaled to avoid overflow.
fn ces_value(sigma: f64, beta: &[f64], x: &[f64]) -> f64 {
    let r = (sigma - 1.0) / sigma;
    let reference = if r < 0.0 {
        x.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let s: f64 = beta.iter().zip(x).map(|(b, v)| b * (v / reference).powf(r)).sum();
    reference * s.powf(1.0 / r)
}

fn gem_value(theta: f64, beta: &[f64], x: &[f64]) -> f64 {
    let top = x.iter().map(|v| theta * v).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = beta.iter().zip(x).map(|(b, v)| b * (theta * v - top).exp()).sum();
    (top + s.ln()) / theta
}

/// Closed-form value of the production function at `x`.
pub fn epf_eval(spec: &EpfSpec, x: &[f64]) -> Result<f64> {
    spec.validate()?;
    spec.check_inputs(x)?;
    Ok(eval_unchecked(spec, x))
}

fn eval_unchecked(spec: &EpfSpec, x: &[f64]) -> f64 {
    let beta = &spec.beta;
    match spec.family {
        EpfFamily::Ces => ces_value(spec.sigma.unwrap_or(f64::NAN), beta, x),
        EpfFamily::CobbDouglas => beta.iter().zip(x).map(|(b, v)| b * v.ln()).sum::<f64>().exp(),
        EpfFamily::Gem => gem_value(spec.theta.unwrap_or(f64::NAN), beta, x),
        EpfFamily::Leontief => beta.iter().zip(x).map(|(b, v)| b * v).fold(f64::INFINITY, f64::min),
        EpfFamily::Translog => {
            let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
            let mut s = spec.beta0.unwrap_or(0.0) + beta.iter().zip(&logs).map(|(b, l)| b * l).sum::<f64>();
            if let Some(mat) = &spec.beta_matrix {
                for (i, row) in mat.iter().enumerate() {
                    for (j, bij) in row.iter().enumerate() {
                        s += bij * logs[i] * logs[j];
                    }
                }
            }
            s.exp()
        }
        EpfFamily::Mst => {
            let theta = spec.theta.unwrap_or(f64::NAN);
            beta.iter().zip(x).map(|(b, v)| -(theta * b * v).exp_m1()).product()
        }
    }
}

/// Generator and normalised weights of an EPF that is an aggregator.
#[derive(Debug, Clone, PartialEq)]
pub enum EpfLda {
    Lda { generator: Generator, weights: Vec<f64> },
    NotAnLda(String),
}

/// Maps an EPF onto its generator, or explains why there is none.
pub fn epf_to_generator(spec: &EpfSpec) -> Result<EpfLda> {
    spec.validate()?;
    let normalised = || -> Result<Vec<f64>> {
        let total: f64 = spec.beta.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "{} weights must sum to 1 to be an aggregator, got {total}",
                spec.family.label()
            )));
        }
        Ok(spec.beta.clone())
    };
    Ok(match spec.family {
        EpfFamily::Ces => {
            let sigma = spec.sigma.unwrap_or(f64::NAN);
            // σ = 1/2 makes u ∝ -1/x: the Itakura-Saito generator
            let generator = if sigma == 0.5 {
                Generator::itakura_saito()
            } else {
                Generator::ces(sigma)?
            };
            EpfLda::Lda {
                generator,
                weights: normalised()?,
            }
        }
        EpfFamily::CobbDouglas => EpfLda::Lda {
            generator: Generator::cobb_douglas(),
            weights: normalised()?,
        },
        EpfFamily::Gem => EpfLda::Lda {
            generator: Generator::gem(spec.theta.unwrap_or(f64::NAN))?,
            weights: normalised()?,
        },
        EpfFamily::Leontief => EpfLda::NotAnLda("limit of CES aggregators as sigma -> 0+".into()),
        EpfFamily::Translog => EpfLda::NotAnLda("Translog violates the min-max bounds of aggregators".into()),
        EpfFamily::Mst => EpfLda::NotAnLda("MST violates the min-max bounds of aggregators".into()),
    })
}

/// `|CES_σ(β∘x) − min_i β_i x_i|`, the CES taken with uniform weights over
/// the scaled inputs.
pub fn leontief_limit_gap(beta: &[f64], x: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma <= 0.2) {
        return Err(Error::InvalidArgument(format!("sigma must lie in (0, 0.2], got {sigma}")));
    }
    if beta.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: beta.len(),
            got: x.len(),
        });
    }
    if let Some(&v) = x.iter().find(|v| !InputDomain::Positive.contains(**v)) {
        return Err(Error::domain(v, InputDomain::Positive.describe()));
    }
    let y: Vec<f64> = beta.iter().zip(x).map(|(b, v)| b * v).collect();
    let w = vec![1.0 / y.len() as f64; y.len()];
    let leontief = y.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((ces_value(sigma, &w, &y) - leontief).abs())
}

/// A production surface with its domain, shared by the differential checks.
struct Surface<'a> {
    eval: Box<dyn Fn(&[f64]) -> f64 + 'a>,
    domain: InputDomain,
}

impl<'a> Surface<'a> {
    fn from_spec(spec: &'a EpfSpec) -> Self {
        Surface {
            eval: Box::new(move |x| eval_unchecked(spec, x)),
            domain: spec.domain(),
        }
    }

    fn leontief_proxy(beta: &'a [f64], sigma: f64) -> Self {
        let w = vec![1.0 / beta.len() as f64; beta.len()];
        Surface {
            eval: Box::new(move |x| {
                let y: Vec<f64> = beta.iter().zip(x).map(|(b, v)| b * v).collect();
                ces_value(sigma, &w, &y)
            }),
            domain: InputDomain::Positive,
        }
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        if let Some(&v) = x.iter().find(|v| !self.domain.contains(**v)) {
            return Err(Error::domain(v, self.domain.describe()));
        }
        let f = (self.eval)(x);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::NumericalBreakdown(format!("production value is not finite at {x:?}")))
        }
    }

    fn partial(&self, x: &[f64], i: usize) -> Result<f64> {
        self.value(x)?;
        let xi = x[i];
        let h = match self.domain {
            InputDomain::Real => 2e-5 * xi.abs().max(1.0),
            _ => 2e-5 * xi.abs(),
        };
        let d = finite_diff5(
            |t| {
                let mut probe = x.to_vec();
                probe[i] = t;
                (self.eval)(&probe)
            },
            xi,
            h,
        );
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::NumericalBreakdown(format!("derivative in x_{i} is not finite")))
        }
    }

    fn elasticity(&self, x: &[f64], i: usize) -> Result<f64> {
        let f = self.value(x)?;
        if f == 0.0 {
            return Err(Error::domain(f, "non-zero output"));
        }
        if x[i] == 0.0 {
            return Ok(0.0);
        }
        Ok(x[i] / f * self.partial(x, i)?)
    }

    fn mrs(&self, x: &[f64], i: usize, j: usize) -> Result<f64> {
        let dj = self.partial(x, j)?;
        if dj == 0.0 || dj.abs() < 1e-300 {
            return Err(Error::ZeroDenominator);
        }
        Ok(self.partial(x, i)? / dj)
    }

    /// Two-point log-difference along the isoquant through `x`: `x_j` is
    /// moved by `exp(±h/2)` and `x_i` re-solved to keep the output fixed.
    fn substitution_elasticity(&self, x: &[f64], i: usize, j: usize) -> Result<f64> {
        if x[i] * x[j] <= 0.0 {
            return Err(Error::domain(x[j] / x[i], "positive input ratio"));
        }
        let f0 = self.value(x)?;
        const H: f64 = 1e-3;
        let tol = Tolerance::tight();
        let mut points = Vec::with_capacity(2);
        for s in [-0.5, 0.5] {
            let mut y = x.to_vec();
            y[j] = x[j] * (s * H).exp();
            let gap = |t: f64| -> Option<f64> {
                let mut z = y.clone();
                z[i] = t;
                if !self.domain.contains(t) {
                    return None;
                }
                let v = (self.eval)(&z) - f0;
                v.is_finite().then_some(v)
            };
            let positive = self.domain != InputDomain::Real;
            let (lo, hi) = expand_bracket(gap, x[i], positive, 60)
                .ok_or_else(|| Error::NumericalBreakdown("isoquant step left the domain".into()))?;
            let xi = find_root(|t| gap(t).unwrap_or(f64::NAN), lo, hi, tol)
                .map_err(|e| Error::NumericalBreakdown(format!("isoquant solve failed: {e}")))?;
            y[i] = xi;
            let ratio = y[j] / y[i];
            let mrs = self.mrs(&y, i, j)?;
            if ratio <= 0.0 || mrs == 0.0 {
                return Err(Error::NumericalBreakdown("non-positive ratio on the isoquant".into()));
            }
            points.push((ratio.ln(), mrs.abs().ln(), mrs.signum()));
        }
        let d_ratio = points[1].0 - points[0].0;
        let d_mrs = points[1].1 - points[0].1;
        if d_mrs == 0.0 {
            return Err(Error::ZeroDenominator);
        }
        // a sign change of the marginal rate flips the orientation
        let orientation = points[0].2;
        Ok(orientation * d_ratio / d_mrs)
    }
}

fn check_index(spec: &EpfSpec, x: &[f64], idx: &[usize]) -> Result<()> {
    spec.validate()?;
    spec.check_inputs(x)?;
    match idx.iter().find(|&&i| i >= x.len()) {
        Some(&i) => Err(Error::InvalidArgument(format!("index {i} out of range for {} inputs", x.len()))),
        None => Ok(()),
    }
}

/// `(x_i / μ) ∂μ/∂x_i` by finite differences.
pub fn elasticity(spec: &EpfSpec, x: &[f64], i: usize) -> Result<f64> {
    check_index(spec, x, &[i])?;
    Surface::from_spec(spec).elasticity(x, i)
}

/// `(∂μ/∂x_i) / (∂μ/∂x_j)` by finite differences.
pub fn marginal_rate_substitution(spec: &EpfSpec, x: &[f64], i: usize, j: usize) -> Result<f64> {
    check_index(spec, x, &[i, j])?;
    Surface::from_spec(spec).mrs(x, i, j)
}

/// Log-derivative of `x_j / x_i` against the marginal rate of substitution
/// along the isoquant through `x`.
pub fn substitution_elasticity(spec: &EpfSpec, x: &[f64], i: usize, j: usize) -> Result<f64> {
    check_index(spec, x, &[i, j])?;
    if i == j {
        return Err(Error::InvalidArgument("substitution elasticity needs two distinct inputs".into()));
    }
    Surface::from_spec(spec).substitution_elasticity(x, i, j)
}

/// Outcome of a randomized functional-identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub pass: bool,
    pub max_residual: f64,
}

/// Default sampling box for randomized checks on a spec.
pub fn sample_box(spec: &EpfSpec) -> (Vec<f64>, Vec<f64>) {
    let m = spec.dim();
    let (lo, hi) = match spec.domain() {
        InputDomain::Positive => (0.5, 5.0),
        InputDomain::Negative => (-2.0, -0.2),
        InputDomain::Real => (-2.0, 2.0),
    };
    (vec![lo; m], vec![hi; m])
}

fn homogeneity_residual(s: &Surface, lo: &[f64], hi: &[f64], degree: f64, trials: usize, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, "homogeneity", t as u64);
        let x = uniform_in_box(&mut rng, lo, hi);
        let lambda = rng.gen_range(0.5..2.0);
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let f = s.value(&x)?;
        let r = (s.value(&scaled)? - lambda.powf(degree) * f).abs() / f.abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

fn translation_residual(s: &Surface, lo: &[f64], hi: &[f64], trials: usize, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let mut rng = trial_rng(seed, "translation", t as u64);
        let mut done = false;
        for _ in 0..1000 {
            let x = uniform_in_box(&mut rng, lo, hi);
            let lambda = rng.gen_range(-1.0..1.0);
            let shifted: Vec<f64> = x.iter().map(|v| lambda + v).collect();
            if shifted.iter().any(|v| !s.domain.contains(*v)) {
                continue;
            }
            let r = (s.value(&shifted)? - lambda - s.value(&x)?).abs();
            worst = worst.max(r);
            done = true;
            break;
        }
        if !done {
            return Err(Error::NumericalBreakdown("no admissible translation found".into()));
        }
    }
    Ok(worst)
}

/// `max |f(λx) − λ^degree f(x)| / |f(x)|` over random `x` and `λ ∈ [0.5, 2]`.
pub fn check_homogeneity(spec: &EpfSpec, degree: f64, trials: usize, seed: u64) -> Result<PropertyCheck> {
    spec.validate()?;
    let (lo, hi) = sample_box(spec);
    let r = homogeneity_residual(&Surface::from_spec(spec), &lo, &hi, degree, trials, seed)?;
    Ok(PropertyCheck {
        pass: r <= 1e-9,
        max_residual: r,
    })
}

/// `max |f(λ + x) − λ − f(x)|` over random `x` and `λ ∈ [−1, 1]`; draws
/// leaving the domain are redrawn.
pub fn check_translatable(spec: &EpfSpec, trials: usize, seed: u64) -> Result<PropertyCheck> {
    spec.validate()?;
    let (lo, hi) = sample_box(spec);
    let r = translation_residual(&Surface::from_spec(spec), &lo, &hi, trials, seed)?;
    Ok(PropertyCheck {
        pass: r <= 1e-9,
        max_residual: r,
    })
}

/// Residual `|Σ x_i z_i − μ_x μ_z|` of the dual coupling between a CES
/// and its price aggregator, with `z_i = β_i (μ_x / x_i)^(1/σ)`.
pub fn check_dual_coupling(sigma: f64, beta: &[f64], x: &[f64]) -> Result<f64> {
    let spec = EpfSpec::ces(sigma, beta.to_vec())?;
    let mu_x = epf_eval(&spec, x)?;
    let z: Vec<f64> = beta.iter().zip(x).map(|(b, v)| b * (mu_x / v).powf(1.0 / sigma)).collect();
    let s: f64 = beta.iter().zip(&z).map(|(b, zi)| b.powf(sigma) * zi.powf(1.0 - sigma)).sum();
    let mu_z = s.powf(1.0 / (1.0 - sigma));
    let coupling: f64 = x.iter().zip(&z).map(|(a, b)| a * b).sum();
    Ok((coupling - mu_x * mu_z).abs())
}

/// `max_c |f(c, …, c) − c|` over a grid of constant bundles.  Any
/// aggregator is idempotent, so a large value rules one out.
pub fn idempotency_falsification(spec: &EpfSpec) -> Result<f64> {
    spec.validate()?;
    let grid: Vec<f64> = match spec.domain() {
        InputDomain::Positive => vec![0.25, 0.5, 1.0, std::f64::consts::E, 3.0, 5.0],
        InputDomain::Negative => vec![-0.25, -0.5, -1.0, -std::f64::consts::E, -3.0, -5.0],
        InputDomain::Real => vec![-3.0, -1.0, 0.0, 0.5, 1.0, std::f64::consts::E],
    };
    let mut worst: f64 = 0.0;
    for c in grid {
        let x = vec![c; spec.dim()];
        worst = worst.max((epf_eval(spec, &x)? - c).abs());
    }
    Ok(worst)
}

/// Entry of the exhaustivity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mark {
    Y,
    N,
    L,
    #[serde(rename = "?")]
    Inconclusive,
}

impl std::fmt::Display for Mark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mark::Y => "Y",
            Mark::N => "N",
            Mark::L => "L",
            Mark::Inconclusive => "?",
        })
    }
}

pub const COLUMNS: [&str; 7] = ["Optimality", "A", "B", "C", "D", "E", "F"];

/// Expected marks, rows in [`EpfFamily::ALL`] order.
pub const TABLE2: [[Mark; 7]; 6] = {
    use Mark::{L, N, Y};
    [
        [Y, Y, Y, N, Y, Y, N],
        [Y, Y, Y, Y, Y, Y, N],
        [Y, N, N, N, N, N, Y],
        [L, L, L, N, L, L, N],
        [N, N, N, N, N, N, N],
        [N, N, N, N, N, N, N],
    ]
};

pub const PASS_TOL: f64 = 1e-6;
pub const FAIL_TOL: f64 = 1e-3;
pub const LEONTIEF_PROXY_SIGMAS: [f64; 2] = [0.05, 0.01];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub mark: Mark,
    pub expected: Mark,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustivityRow {
    pub family: EpfFamily,
    pub spec: EpfSpec,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustivityMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<ExhaustivityRow>,
    /// Largest Leontief limit gap over the samples at each proxy σ.
    pub leontief_gaps: Vec<(f64, f64)>,
}

impl ExhaustivityMatrix {
    pub fn matches_table(&self) -> bool {
        self.mismatches().is_empty()
    }

    /// `(family, column, observed, expected)` for every disagreeing cell.
    pub fn mismatches(&self) -> Vec<(EpfFamily, &'static str, Mark, Mark)> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (k, cell) in row.cells.iter().enumerate() {
                if cell.mark != cell.expected {
                    out.push((row.family, COLUMNS[k], cell.mark, cell.expected));
                }
            }
        }
        out
    }
}

fn classify(residual: f64) -> Mark {
    if residual <= PASS_TOL {
        Mark::Y
    } else if residual >= FAIL_TOL {
        Mark::N
    } else {
        Mark::Inconclusive
    }
}

/// Instance and sampling box used for each family in the matrix.
pub fn exhaustivity_instances() -> Vec<(EpfSpec, Vec<f64>, Vec<f64>)> {
    vec![
        (EpfSpec::ces(2.0, vec![0.3, 0.7]).unwrap(), vec![0.5; 2], vec![5.0; 2]),
        (EpfSpec::cobb_douglas(vec![0.4, 0.6]).unwrap(), vec![0.5; 2], vec![5.0; 2]),
        (EpfSpec::gem(1.0, vec![0.4, 0.6]).unwrap(), vec![0.5; 2], vec![2.5; 2]),
        // scaled inputs β_i x_i stay within 2% of each other, where the
        // stiff proxy CES is still resolved by finite differences
        (EpfSpec::leontief(vec![2.0, 3.0]).unwrap(), vec![1.5, 1.0], vec![1.53, 1.02]),
        (
            EpfSpec::translog(0.1, vec![0.3, 0.5], vec![vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap(),
            vec![0.5; 2],
            vec![5.0; 2],
        ),
        (EpfSpec::mst(-1.0, vec![1.0, 0.5]).unwrap(), vec![0.2; 2], vec![2.0; 2]),
    ]
}

const MATRIX_SAMPLES: usize = 16;

/// Residuals for columns Optimality..F on one surface.  `lda` is the
/// generator and weights when the surface is an aggregator (in the
/// coordinates `scale ∘ x`).
fn residuals(
    s: &Surface,
    lda: Option<(&Generator, &[f64])>,
    scale: &[f64],
    ces_sigma: Option<f64>,
    optimality_fallback: f64,
    lo: &[f64],
    hi: &[f64],
    seed: u64,
    tag: &str,
) -> Result<[f64; 7]> {
    let m = lo.len();
    let mut out = [0.0f64; 7];
    let mut subst: Vec<Vec<f64>> = vec![Vec::new(); m * m];
    for k in 0..MATRIX_SAMPLES {
        let mut rng = trial_rng(seed, tag, k as u64);
        let x = uniform_in_box(&mut rng, lo, hi);
        let f = s.value(&x)?;

        // optimality and (A)
        if let Some((gen, w)) = lda {
            let y: Vec<f64> = scale.iter().zip(&x).map(|(a, b)| a * b).collect();
            let inputs = WeightedInputs::new(y.clone(), w.to_vec())?;
            let mu = lda_mean(gen, &inputs)?;
            out[0] = out[0].max((mu - f).abs() / f.abs());
            let lhs: f64 = y.iter().zip(w).map(|(v, g)| g * v * gen.phi2(*v)).sum::<f64>() / inputs.gamma_sum();
            let rhs = mu * gen.phi2(mu);
            let mut a = (lhs - rhs).abs() / rhs.abs();
            if let Some(sigma) = ces_sigma {
                a = a.max(check_dual_coupling(sigma, w, &y)? / f.abs());
            }
            out[1] = out[1].max(a);
        } else {
            out[0] = optimality_fallback;
            let euler: f64 = (0..m).map(|i| Ok(x[i] * s.partial(&x, i)?)).sum::<Result<f64>>()?;
            out[1] = out[1].max((euler - f).abs() / f.abs());
        }

        // (B)
        let sum_e: f64 = (0..m).map(|i| s.elasticity(&x, i)).sum::<Result<f64>>()?;
        out[2] = out[2].max((sum_e - 1.0).abs());

        // substitution elasticities for (C) and (D)
        for i in 0..m {
            for j in i + 1..m {
                subst[i * m + j].push(s.substitution_elasticity(&x, i, j)?);
            }
        }
    }
    let (mut c_best, mut d_best) = (f64::INFINITY, f64::INFINITY);
    for i in 0..m {
        for j in i + 1..m {
            let e = &subst[i * m + j];
            let c = e.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
            let (lo_e, hi_e) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let mean = e.iter().sum::<f64>() / e.len() as f64;
            let mut d = (hi_e - lo_e) / mean.abs();
            if lo_e <= 0.0 {
                d = d.max(1.0);
            }
            c_best = c_best.min(c);
            d_best = d_best.min(d);
        }
    }
    out[3] = c_best;
    out[4] = d_best;
    out[5] = homogeneity_residual(s, lo, hi, 1.0, MATRIX_SAMPLES, seed)?;
    out[6] = translation_residual(s, lo, hi, MATRIX_SAMPLES, seed)?;
    Ok(out)
}

/// Evaluates the optimality and exhaustivity properties on one instance
/// of each family and classifies them as Y/N/L.
pub fn exhaustivity_matrix(seed: u64) -> Result<ExhaustivityMatrix> {
    let mut rows = Vec::new();
    let mut leontief_gaps = Vec::new();
    for ((spec, lo, hi), expected) in exhaustivity_instances().into_iter().zip(TABLE2) {
        let tag = format!("exhaustivity/{}", spec.family.label());
        let ones = vec![1.0; spec.dim()];
        let marks: Vec<(Mark, f64)> = match epf_to_generator(&spec)? {
            EpfLda::Lda { generator, weights } => {
                let sigma = (spec.family == EpfFamily::Ces).then(|| spec.sigma.unwrap());
                let r = residuals(
                    &Surface::from_spec(&spec),
                    Some((&generator, &weights)),
                    &ones,
                    sigma,
                    0.0,
                    &lo,
                    &hi,
                    seed,
                    &tag,
                )?;
                r.iter().map(|&v| (classify(v), v)).collect()
            }
            EpfLda::NotAnLda(_) if spec.family == EpfFamily::Leontief => {
                let mut per_sigma = Vec::new();
                let mut gaps = Vec::new();
                for sigma in LEONTIEF_PROXY_SIGMAS {
                    let gen = Generator::ces(sigma)?;
                    let w = vec![1.0 / spec.dim() as f64; spec.dim()];
                    let proxy = Surface::leontief_proxy(&spec.beta, sigma);
                    per_sigma.push(residuals(&proxy, Some((&gen, &w)), &spec.beta, None, 0.0, &lo, &hi, seed, &tag)?);
                    let mut worst: f64 = 0.0;
                    for k in 0..MATRIX_SAMPLES {
                        let x = uniform_in_box(&mut trial_rng(seed, &tag, k as u64), &lo, &hi);
                        worst = worst.max(leontief_limit_gap(&spec.beta, &x, sigma)?);
                    }
                    gaps.push(worst);
                }
                leontief_gaps.push((LEONTIEF_PROXY_SIGMAS[0], gaps[0]));
                leontief_gaps.push((LEONTIEF_PROXY_SIGMAS[1], gaps[1]));
                let shrinking = gaps[1] < gaps[0];
                (0..7)
                    .map(|k| {
                        let worst = per_sigma[0][k].max(per_sigma[1][k]);
                        let best = per_sigma[0][k].min(per_sigma[1][k]);
                        let mark = if worst <= PASS_TOL && shrinking {
                            Mark::L
                        } else if best >= FAIL_TOL {
                            Mark::N
                        } else {
                            Mark::Inconclusive
                        };
                        (mark, worst)
                    })
                    .collect()
            }
            EpfLda::NotAnLda(_) => {
                let violation = idempotency_falsification(&spec)?;
                let r = residuals(&Surface::from_spec(&spec), None, &ones, None, violation, &lo, &hi, seed, &tag)?;
                r.iter().map(|&v| (classify(v), v)).collect()
            }
        };
        rows.push(ExhaustivityRow {
            family: spec.family,
            spec,
            cells: marks
                .into_iter()
                .zip(expected)
                .map(|((mark, residual), expected)| Cell {
                    mark,
                    expected,
                    residual,
                })
                .collect(),
        });
    }
    Ok(ExhaustivityMatrix {
        columns: COLUMNS.iter().map(|c| c.to_string()).collect(),
        rows,
        leontief_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn evaluation_examples() {
        let cd = EpfSpec::cobb_douglas(vec![0.5, 0.5]).unwrap();
        assert!(close(epf_eval(&cd, &[4.0, 1.0]).unwrap(), 2.0, 1e-15));
        let ces = EpfSpec::ces(0.5, vec![0.5, 0.5]).unwrap();
        // harmonic mean: (0.5·1 + 0.5·3)^-1
        assert!(close(epf_eval(&ces, &[1.0, 1.0 / 3.0]).unwrap(), 1.0 / (0.5 * 1.0 + 0.5 * 3.0), 1e-15));
        let leo = EpfSpec::leontief(vec![1.0, 1.0]).unwrap();
        assert_eq!(epf_eval(&leo, &[1.0, 2.0]).unwrap(), 1.0);
        let gem = EpfSpec::gem(1.0, vec![0.5, 0.5]).unwrap();
        assert_eq!(epf_eval(&gem, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(EpfSpec::cobb_douglas(vec![0.5, 0.6]), Err(Error::InvalidSpec(_))));
        assert!(EpfSpec::ces(1.0, vec![1.0]).is_err());
        assert!(EpfSpec::mst(0.5, vec![1.0]).is_err());
        assert!(EpfSpec::translog(0.0, vec![0.5], vec![vec![-0.1]]).is_err());
        let mst = EpfSpec::mst(1.0, vec![1.0, 1.0]).unwrap();
        assert!(matches!(epf_eval(&mst, &[1.0, -1.0]), Err(Error::DomainViolation { .. })));
        let json = r#"{"family":"CES","beta":[0.5,0.5],"sigma":2}"#;
        let spec: EpfSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.family, EpfFamily::Ces);
        let back: EpfSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<EpfSpec>(r#"{"family":"gem","beta":[1],"theta":1,"rho":2}"#).is_err());
    }

    #[test]
    fn generator_correspondence() {
        let cd = EpfSpec::cobb_douglas(vec![0.5, 0.5]).unwrap();
        let EpfLda::Lda { generator, weights } = epf_to_generator(&cd).unwrap() else { panic!() };
        assert_eq!(generator, Generator::cobb_douglas());
        let mu = lda_mean(&generator, &WeightedInputs::new(vec![4.0, 1.0], weights).unwrap()).unwrap();
        assert!(close(mu, 2.0, 1e-14));

        let ces = EpfSpec::ces(2.0, vec![0.5, 0.5]).unwrap();
        assert!(close(epf_eval(&ces, &[1.0, 4.0]).unwrap(), 2.25, 1e-14));
        let EpfLda::Lda { generator, weights } = epf_to_generator(&ces).unwrap() else { panic!() };
        // (½·1 + ½·2)²
        let mu = lda_mean(&generator, &WeightedInputs::new(vec![1.0, 4.0], weights).unwrap()).unwrap();
        assert!(close(mu, 2.25, 1e-14));

        let mst = EpfSpec::mst(-1.0, vec![1.0, 1.0]).unwrap();
        assert!(matches!(epf_to_generator(&mst).unwrap(), EpfLda::NotAnLda(_)));
        let leo = EpfSpec::leontief(vec![1.0, 1.0]).unwrap();
        assert!(matches!(epf_to_generator(&leo).unwrap(), EpfLda::NotAnLda(_)));
        let unnormalised = EpfSpec::ces(2.0, vec![1.0, 1.0]).unwrap();
        assert!(matches!(epf_to_generator(&unnormalised), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn leontief_gap() {
        // CES(σ=0.01) of (1, 2) with weights ½: (½ + ½·2^-99)^(-1/99)
        let gap = leontief_limit_gap(&[1.0, 1.0], &[1.0, 2.0], 0.01).unwrap();
        let oracle = (0.5 + 0.5 * 2f64.powi(-99)).powf(-1.0 / 99.0) - 1.0;
        assert!(close(gap, oracle, 1e-12));
        assert!(gap <= 0.01);
        assert!(leontief_limit_gap(&[1.0, 1.0], &[1.7, 1.7], 0.05).unwrap() < 1e-14);
        assert!(leontief_limit_gap(&[1.0, 1.0], &[1.0, 2.0], 0.3).is_err());
        let x = [0.8, 2.9, 1.4];
        let b = [1.0, 0.4, 2.0];
        assert!(leontief_limit_gap(&b, &x, 0.01).unwrap() < leontief_limit_gap(&b, &x, 0.1).unwrap());
    }

    #[test]
    fn elasticities() {
        let cd = EpfSpec::cobb_douglas(vec![0.5, 0.5]).unwrap();
        for x in [[1.0, 2.0], [3.5, 0.7]] {
            let e0 = elasticity(&cd, &x, 0).unwrap();
            let e1 = elasticity(&cd, &x, 1).unwrap();
            assert!(close(e0, 0.5, 1e-9) && close(e1, 0.5, 1e-9));
        }
        let ces = EpfSpec::ces(2.0, vec![0.5, 0.5]).unwrap();
        assert!(close(elasticity(&ces, &[1.0, 1.0], 0).unwrap(), 0.5, 1e-9));
        let gem = EpfSpec::gem(1.0, vec![0.5, 0.5]).unwrap();
        // μ = ln((1+e)/2); only x_2 contributes: x_2 e/(1+e) / μ
        let sum = elasticity(&gem, &[0.0, 1.0], 0).unwrap() + elasticity(&gem, &[0.0, 1.0], 1).unwrap();
        let e = 1f64.exp();
        let oracle = (e / (1.0 + e)) / ((1.0 + e) / 2.0).ln();
        assert!(close(sum, oracle, 1e-9));
        assert!((sum - 1.0).abs() > 1e-3);
    }

    #[test]
    fn marginal_rates() {
        let ces = EpfSpec::ces(2.0, vec![0.5, 0.5]).unwrap();
        assert!(close(marginal_rate_substitution(&ces, &[1.3, 1.3], 0, 1).unwrap(), 1.0, 1e-10));
        let cd = EpfSpec::cobb_douglas(vec![0.5, 0.5]).unwrap();
        assert!(close(marginal_rate_substitution(&cd, &[1.0, 2.0], 0, 1).unwrap(), 2.0, 1e-9));
        assert!(close(marginal_rate_substitution(&ces, &[1.0, 4.0], 0, 1).unwrap(), 2.0, 1e-9));
        let leo = EpfSpec::leontief(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            marginal_rate_substitution(&leo, &[2.0, 1.0], 1, 0),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn substitution_elasticities() {
        let cd = EpfSpec::cobb_douglas(vec![0.3, 0.7]).unwrap();
        let ces = EpfSpec::ces(3.0, vec![0.4, 0.6]).unwrap();
        for x in [[0.7, 2.2], [4.1, 1.3], [1.0, 1.0]] {
            assert!(close(substitution_elasticity(&cd, &x, 0, 1).unwrap(), 1.0, 1e-4));
            assert!(close(substitution_elasticity(&ces, &x, 0, 1).unwrap(), 3.0, 1e-3));
        }
        let gem = EpfSpec::gem(1.0, vec![0.5, 0.5]).unwrap();
        let a = substitution_elasticity(&gem, &[0.8, 1.9], 0, 1).unwrap();
        let b = substitution_elasticity(&gem, &[2.2, 1.1], 0, 1).unwrap();
        assert!((a - b).abs() > 1e-3);
        // along the isoquant p_1 dx_1 + p_2 dx_2 = 0 with p the softmax shares,
        // so d ln(x_2/x_1) / d ln S = -(p_1/x_2 + p_2/x_1)
        let (x1, x2) = (0.8f64, 1.9f64);
        let (e1, e2) = (0.5 * x1.exp(), 0.5 * x2.exp());
        let (p1, p2) = (e1 / (e1 + e2), e2 / (e1 + e2));
        let oracle = -(p1 / x2 + p2 / x1);
        assert!(close(a, oracle, 1e-4), "{a} vs {oracle}");
    }

    #[test]
    fn homogeneity_and_translation() {
        let ces = EpfSpec::ces(2.0, vec![0.3, 0.7]).unwrap();
        assert!(check_homogeneity(&ces, 1.0, 50, 7).unwrap().pass);
        let gem = EpfSpec::gem(1.0, vec![0.3, 0.7]).unwrap();
        assert!(!check_homogeneity(&gem, 1.0, 50, 7).unwrap().pass);
        let leo = EpfSpec::leontief(vec![2.0, 3.0]).unwrap();
        assert!(check_homogeneity(&leo, 1.0, 50, 7).unwrap().pass);
        assert!(check_translatable(&gem, 50, 7).unwrap().pass);
        let cd = EpfSpec::cobb_douglas(vec![0.3, 0.7]).unwrap();
        assert!(!check_translatable(&cd, 50, 7).unwrap().pass);
    }

    #[test]
    fn dual_coupling() {
        assert!(check_dual_coupling(2.0, &[0.5, 0.5], &[1.0, 1.0]).unwrap() <= 1e-10);
        assert!(check_dual_coupling(2.0, &[0.5, 0.5], &[1.0, 4.0]).unwrap() <= 1e-9);
        assert_eq!(check_dual_coupling(3.0, &[1.0], &[2.5]).unwrap(), 0.0);
    }

    #[test]
    fn idempotency() {
        let mst = EpfSpec::mst(-1.0, vec![1.0, 1.0]).unwrap();
        let at_one = epf_eval(&mst, &[1.0, 1.0]).unwrap();
        assert!(close(at_one, (1.0 - (-1f64).exp()).powi(2), 1e-15));
        assert!(idempotency_falsification(&mst).unwrap() > 0.1);
        let tl = EpfSpec::translog(0.0, vec![0.5, 0.5], vec![vec![0.1; 2]; 2]).unwrap();
        let e = std::f64::consts::E;
        assert!(close(epf_eval(&tl, &[e, e]).unwrap(), (1.4f64).exp(), 1e-14));
        assert!(idempotency_falsification(&tl).unwrap() > 0.1);
        let ces = EpfSpec::ces(2.0, vec![0.5, 0.5]).unwrap();
        assert!(idempotency_falsification(&ces).unwrap() <= 1e-12);
    }

    #[test]
    fn matrix_reproduces_table() {
        let m = exhaustivity_matrix(42).unwrap();
        for row in &m.rows {
            let marks: Vec<String> = row.cells.iter().map(|c| format!("{}({:.1e})", c.mark, c.residual)).collect();
            eprintln!("{:12} {}", row.family.label(), marks.join(" "));
        }
        assert!(m.matches_table(), "{:?}", m.mismatches());
    }
}
