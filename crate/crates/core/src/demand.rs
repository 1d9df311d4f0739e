//! Expansion paths and the Marshallian and Hicksian demand programs of an
//! aggregator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::lda::{curvature_probe, lda_mean, Curvature, WeightedInputs};
use crate::numerics::{expand_bracket, find_root, finite_diff5, Tolerance};

/// Prices, income, output target and unit transition costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEconomy", into = "RawEconomy")]
pub struct Economy {
    output_price: f64,
    input_prices: Vec<f64>,
    price_sum: f64,
    income: Option<f64>,
    target_output: Option<f64>,
    weights: Vec<f64>,
}

/// Wire form `{"p", "prices", "w", "mu_target", "gammas"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEconomy {
    #[serde(default = "unit_price")]
    p: f64,
    prices: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gammas: Option<Vec<f64>>,
}

fn unit_price() -> f64 {
    1.0
}

impl TryFrom<RawEconomy> for Economy {
    type Error = Error;

    fn try_from(raw: RawEconomy) -> Result<Self> {
        let weights = raw.gammas.unwrap_or_else(|| raw.prices.clone());
        Economy::new(raw.p, raw.prices, weights, raw.w, raw.mu_target)
    }
}

impl From<Economy> for RawEconomy {
    fn from(e: Economy) -> Self {
        RawEconomy {
            p: e.output_price,
            prices: e.input_prices,
            w: e.income,
            mu_target: e.target_output,
            gammas: Some(e.weights),
        }
    }
}

impl Economy {
    pub fn new(
        output_price: f64,
        input_prices: Vec<f64>,
        weights: Vec<f64>,
        income: Option<f64>,
        target_output: Option<f64>,
    ) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(output_price) {
            return Err(Error::InvalidArgument(format!("output price must be positive, got {output_price}")));
        }
        if input_prices.is_empty() {
            return Err(Error::InvalidArgument("at least one input price is required".into()));
        }
        if input_prices.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: input_prices.len(),
                got: weights.len(),
            });
        }
        if let Some(p) = input_prices.iter().find(|p| !positive(**p)) {
            return Err(Error::InvalidArgument(format!("input prices must be positive, got {p}")));
        }
        if let Some(g) = weights.iter().find(|g| !positive(**g)) {
            return Err(Error::InvalidArgument(format!("weights must be positive, got {g}")));
        }
        if let Some(w) = income {
            if !positive(w) {
                return Err(Error::InvalidArgument(format!("income must be positive, got {w}")));
            }
        }
        if let Some(t) = target_output {
            if !t.is_finite() {
                return Err(Error::InvalidArgument("target output must be finite".into()));
            }
        }
        let price_sum = input_prices.iter().sum();
        Ok(Economy {
            output_price,
            input_prices,
            price_sum,
            income,
            target_output,
            weights,
        })
    }

    /// Economy whose weights equal the input prices.
    pub fn ptcb(input_prices: Vec<f64>, income: Option<f64>, target_output: Option<f64>) -> Result<Self> {
        let weights = input_prices.clone();
        Economy::new(1.0, input_prices, weights, income, target_output)
    }

    pub fn output_price(&self) -> f64 {
        self.output_price
    }

    pub fn input_prices(&self) -> &[f64] {
        &self.input_prices
    }

    pub fn price_sum(&self) -> f64 {
        self.price_sum
    }

    pub fn income(&self) -> Option<f64> {
        self.income
    }

    pub fn target_output(&self) -> Option<f64> {
        self.target_output
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.input_prices.len()
    }

    /// `(p_i/γ_i) / (p_j/γ_j)`.
    pub fn unit_cost_ratio(&self, i: usize, j: usize) -> f64 {
        (self.input_prices[i] / self.weights[i]) / (self.input_prices[j] / self.weights[j])
    }

    /// Whether `p_i/γ_i` is the same for every input.
    pub fn is_ptcb(&self) -> bool {
        let base = self.input_prices[0] / self.weights[0];
        self.input_prices
            .iter()
            .zip(&self.weights)
            .all(|(p, g)| ((p / g) - base).abs() <= 1e-10 * base)
    }

    fn inputs(&self, bundle: &[f64]) -> Result<WeightedInputs> {
        WeightedInputs::new(bundle.to_vec(), self.weights.clone())
    }

    fn expenditure(&self, bundle: &[f64]) -> f64 {
        self.input_prices.iter().zip(bundle).map(|(p, x)| p * x).sum()
    }
}

/// Which optimisation program a demand solution answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandMode {
    /// Concave aggregator, standard max/min program.
    Concave,
    /// Convex aggregator, program with min/max flipped.
    Convex,
    /// Curvature probe inconclusive; the stationary bundle is returned.
    Unverified,
}

/// Requested program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Program {
    Standard,
    Flipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandSolution {
    pub bundle: Vec<f64>,
    /// Output value `p μ_φ` (Marshallian) or expenditure `Σ p_i x_i` (Hicksian).
    pub objective: f64,
    pub on_expansion_path: bool,
    pub residual: f64,
    pub mode: DemandMode,
}

fn check_bundle(gen: &Generator, x: &[f64], econ: &Economy) -> Result<()> {
    if x.len() != econ.dim() {
        return Err(Error::DimensionMismatch {
            expected: econ.dim(),
            got: x.len(),
        });
    }
    x.iter().try_for_each(|&v| gen.check_interior(v))
}

/// `max_{i,j} |φ''(x_i) − r_ij φ''(x_j)| / φ''(x_j)` with
/// `r_ij = (p_i/γ_i)/(p_j/γ_j)`.
pub fn expansion_residual(gen: &Generator, x: &[f64], econ: &Economy) -> Result<f64> {
    check_bundle(gen, x, econ)?;
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i != j {
                let target = econ.unit_cost_ratio(i, j) * gen.phi2(x[j]);
                worst = worst.max((gen.phi2(x[i]) - target).abs() / gen.phi2(x[j]));
            }
        }
    }
    Ok(worst)
}

/// Bundle on the expansion path whose first input equals `anchor`.
pub fn solve_expansion_path(gen: &Generator, econ: &Economy, anchor: f64) -> Result<Vec<f64>> {
    gen.check_interior(anchor)?;
    let domain = gen.domain();
    let positive = domain.is_positive_half_line();
    let mut bundle = Vec::with_capacity(econ.dim());
    bundle.push(anchor);
    for j in 1..econ.dim() {
        let ratio = econ.unit_cost_ratio(j, 0);
        if (ratio - 1.0).abs() <= 1e-12 {
            bundle.push(anchor);
            continue;
        }
        let log_target = ratio.ln() + gen.phi2(anchor).ln();
        let gap = |t: f64| -> Option<f64> {
            if !domain.contains(t) {
                return None;
            }
            let v = gen.phi2(t).ln() - log_target;
            v.is_finite().then_some(v)
        };
        let (lo, hi) = expand_bracket(gap, anchor, positive, 60).ok_or_else(|| {
            Error::NoSolution(format!("curvature ratio {ratio} is out of reach for input {}", j + 1))
        })?;
        let root = find_root(|t| gap(t).unwrap_or(f64::NAN), lo, hi, Tolerance::tight())?;
        bundle.push(root);
    }
    Ok(bundle)
}

fn probe_mode(gen: &Generator, econ: &Economy, bundle: &[f64], program: Program) -> Result<DemandMode> {
    let lo = bundle.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = bundle.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = if gen.domain().is_positive_half_line() {
        (lo / 2.0, hi * 2.0)
    } else {
        (lo - 1.0, hi + 1.0)
    };
    let curvature = curvature_probe(gen, econ.weights(), a, b)?;
    match (curvature, program) {
        (Curvature::Concave | Curvature::Affine, Program::Standard) => Ok(DemandMode::Concave),
        (Curvature::Convex | Curvature::Affine, Program::Flipped) => Ok(DemandMode::Convex),
        (Curvature::Convex, Program::Standard) => Err(Error::NonConcave),
        (Curvature::Concave, Program::Flipped) => Err(Error::InvalidArgument(
            "aggregator is concave; the flipped program applies to convex aggregators".into(),
        )),
        (Curvature::Inconclusive, _) => Ok(DemandMode::Unverified),
    }
}

fn solve_on_path<F>(gen: &Generator, econ: &Economy, center: f64, constraint: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    // fail early with the path's own error when the path does not exist
    let first = solve_expansion_path(gen, econ, center)?;
    if constraint(&first)? == 0.0 {
        return Ok(first);
    }
    let positive = gen.domain().is_positive_half_line();
    let g = |a: f64| -> Option<f64> {
        let bundle = solve_expansion_path(gen, econ, a).ok()?;
        constraint(&bundle).ok().filter(|v| v.is_finite())
    };
    let (lo, hi) = expand_bracket(g, center, positive, 60)
        .ok_or_else(|| Error::NoSolution("constraint cannot be met on the expansion path".into()))?;
    let anchor = find_root(|a| g(a).unwrap_or(f64::NAN), lo, hi, Tolerance::tight())?;
    solve_expansion_path(gen, econ, anchor)
}

fn finish(gen: &Generator, econ: &Economy, bundle: Vec<f64>, objective: f64, mode: DemandMode) -> Result<DemandSolution> {
    let residual = expansion_residual(gen, &bundle, econ)?;
    Ok(DemandSolution {
        bundle,
        objective,
        on_expansion_path: residual <= 1e-6,
        residual,
        mode,
    })
}

/// Output-maximising bundle under the budget `Σ p_i y_i ≤ w`.
pub fn marshallian_demand(gen: &Generator, econ: &Economy) -> Result<DemandSolution> {
    marshallian_demand_with(gen, econ, Program::Standard)
}

pub fn marshallian_demand_with(gen: &Generator, econ: &Economy, program: Program) -> Result<DemandSolution> {
    let w = econ
        .income()
        .ok_or_else(|| Error::InvalidArgument("Marshallian demand needs an income w".into()))?;
    let level = w / econ.price_sum();
    let bundle = if econ.is_ptcb() {
        gen.check_interior(level)?;
        vec![level; econ.dim()]
    } else {
        solve_on_path(gen, econ, level, |b| Ok(econ.expenditure(b) - w))?
    };
    let mode = probe_mode(gen, econ, &bundle, program)?;
    let objective = econ.output_price() * lda_mean(gen, &econ.inputs(&bundle)?)?;
    finish(gen, econ, bundle, objective, mode)
}

/// Expenditure-minimising bundle under the output floor `μ_φ ≥ μ′`.
pub fn hicksian_demand(gen: &Generator, econ: &Economy) -> Result<DemandSolution> {
    hicksian_demand_with(gen, econ, Program::Standard)
}

pub fn hicksian_demand_with(gen: &Generator, econ: &Economy, program: Program) -> Result<DemandSolution> {
    let target = econ
        .target_output()
        .ok_or_else(|| Error::InvalidArgument("Hicksian demand needs a target output mu_target".into()))?;
    if !gen.domain().contains(target) {
        return Err(Error::InfeasibleTarget(target));
    }
    let bundle = if econ.is_ptcb() {
        vec![target; econ.dim()]
    } else {
        solve_on_path(gen, econ, target, |b| Ok(lda_mean(gen, &econ.inputs(b)?)? - target))?
    };
    let mode = probe_mode(gen, econ, &bundle, program)?;
    let objective = econ.expenditure(&bundle);
    finish(gen, econ, bundle, objective, mode)
}

/// Finite-difference marginal rate of substitution `∂μ_φ/∂x_i / ∂μ_φ/∂x_j`
/// at a bundle on the expansion path.
pub fn mrs_on_path(gen: &Generator, econ: &Economy, bundle: &[f64], i: usize, j: usize) -> Result<f64> {
    let residual = expansion_residual(gen, bundle, econ)?;
    if residual > 1e-6 {
        return Err(Error::NotOnPath(residual));
    }
    if i >= bundle.len() || j >= bundle.len() {
        return Err(Error::InvalidArgument(format!("index out of range for {} inputs", bundle.len())));
    }
    let partial = |k: usize| -> Result<f64> {
        let xk = bundle[k];
        let h = 1e-4 * xk.abs().max(1e-3);
        let eval = |t: f64| {
            let mut y = bundle.to_vec();
            y[k] = t;
            econ.inputs(&y).and_then(|inp| lda_mean(gen, &inp)).unwrap_or(f64::NAN)
        };
        let d = finite_diff5(eval, xk, h);
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::NumericalBreakdown(format!("derivative in x_{} is not finite", k + 1)))
        }
    };
    let dj = partial(j)?;
    if dj == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(partial(i)? / dj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn econ(prices: &[f64], gammas: &[f64], w: Option<f64>, mu: Option<f64>) -> Economy {
        Economy::new(1.0, prices.to_vec(), gammas.to_vec(), w, mu).unwrap()
    }

    #[test]
    fn residual_examples() {
        let cd = Generator::cobb_douglas();
        let e = Economy::ptcb(vec![2.0, 5.0], Some(1.0), None).unwrap();
        assert!(e.is_ptcb());
        assert_eq!(expansion_residual(&cd, &[1.7, 1.7], &e).unwrap(), 0.0);
        // (p_1/γ_1)/(p_2/γ_2) = 2 puts φ''(x_1) = 2 φ''(x_2), i.e. x_2 = 2 x_1
        let ratio2 = econ(&[1.0, 1.0], &[1.0, 2.0], Some(3.0), None);
        assert_eq!(ratio2.unit_cost_ratio(0, 1), 2.0);
        assert!(expansion_residual(&cd, &[1.0, 2.0], &ratio2).unwrap() < 1e-15);
        assert!(expansion_residual(&cd, &[2.0, 1.0], &ratio2).unwrap() > 0.1);
        let se = Generator::squared_euclidean();
        for x in [[0.3, 0.3], [1.0, -2.0]] {
            assert!(expansion_residual(&se, &x, &ratio2).unwrap() > 0.1);
        }
    }

    #[test]
    fn expansion_paths() {
        let kl = Generator::kullback_leibler();
        let e = Economy::ptcb(vec![1.0, 3.0, 2.0], None, None).unwrap();
        assert_eq!(solve_expansion_path(&kl, &e, 1.3).unwrap(), vec![1.3; 3]);
        let cd = Generator::cobb_douglas();
        let e = econ(&[1.0, 2.0, 1.0], &[1.0, 1.0, 3.0], None, None);
        let a = 0.8;
        let path = solve_expansion_path(&cd, &e, a).unwrap();
        for j in 1..3 {
            // φ'' = 1/x: x_j = a (p_1/γ_1)/(p_j/γ_j)
            let closed = a * e.unit_cost_ratio(0, j);
            assert!((path[j] - closed).abs() < 1e-12 * closed);
        }
        assert!(expansion_residual(&cd, &path, &e).unwrap() <= 1e-8);
        let se = Generator::squared_euclidean();
        assert!(matches!(solve_expansion_path(&se, &e, 1.0), Err(Error::NoSolution(_))));
    }

    #[test]
    fn ptcb_closed_forms() {
        let kl = Generator::kullback_leibler();
        let e = Economy::ptcb(vec![1.0, 1.0], Some(4.0), None).unwrap();
        assert_eq!(marshallian_demand(&kl, &e).unwrap().bundle, vec![2.0, 2.0]);
        let e = Economy::ptcb(vec![3.0, 1.0], Some(4.0), None).unwrap();
        let sol = marshallian_demand(&kl, &e).unwrap();
        assert_eq!(sol.bundle, vec![1.0, 1.0]);
        assert_eq!(sol.mode, DemandMode::Concave);

        let cd = Generator::cobb_douglas();
        let reference = lda_mean(&cd, &WeightedInputs::uniform(vec![4.0, 1.0]).unwrap()).unwrap();
        let e = Economy::ptcb(vec![1.0, 1.0], None, Some(reference)).unwrap();
        let sol = hicksian_demand(&cd, &e).unwrap();
        assert!(sol.bundle.iter().all(|v| (v - 2.0).abs() < 1e-14));
        assert_eq!(sol.residual, 0.0);

        let e = Economy::ptcb(vec![1.0, 1.0], None, Some(0.0)).unwrap();
        assert!(matches!(hicksian_demand(&cd, &e), Err(Error::InfeasibleTarget(_))));
    }

    #[test]
    fn general_cobb_douglas_marshallian() {
        let cd = Generator::cobb_douglas();
        let w = 3.0;
        let e = econ(&[1.0, 1.0], &[1.0, 2.0], Some(w), None);
        let sol = marshallian_demand(&cd, &e).unwrap();
        // x_2 = 2 x_1 and x_1 + x_2 = w
        assert!((sol.bundle[0] - 1.0).abs() < 1e-10 && (sol.bundle[1] - 2.0).abs() < 1e-10);
        assert!(sol.on_expansion_path);
        // grid search of the budget line as an independent oracle
        let inputs = |t: f64| WeightedInputs::new(vec![t, w - t], vec![1.0, 2.0]).unwrap();
        let best = (1..30_000)
            .map(|k| k as f64 * w / 30_000.0)
            .max_by(|a, b| {
                let fa = lda_mean(&cd, &inputs(*a)).unwrap();
                let fb = lda_mean(&cd, &inputs(*b)).unwrap();
                fa.partial_cmp(&fb).unwrap()
            })
            .unwrap();
        assert!((best - sol.bundle[0]).abs() < 2e-4);
    }

    #[test]
    fn general_hicksian_binds() {
        let is = Generator::itakura_saito();
        let e = econ(&[2.0, 1.0, 1.5], &[1.0, 1.0, 0.5], None, Some(1.4));
        let sol = hicksian_demand(&is, &e).unwrap();
        let out = lda_mean(&is, &WeightedInputs::new(sol.bundle.clone(), e.weights().to_vec()).unwrap()).unwrap();
        assert!((out - 1.4).abs() < 1e-10);
        assert!(sol.residual <= 1e-8);
    }

    #[test]
    fn convex_aggregator_needs_flip() {
        let gem = Generator::gem(1.0).unwrap();
        let e = Economy::ptcb(vec![1.0, 2.0], Some(3.0), None).unwrap();
        assert!(matches!(marshallian_demand(&gem, &e), Err(Error::NonConcave)));
        let sol = marshallian_demand_with(&gem, &e, Program::Flipped).unwrap();
        assert_eq!(sol.mode, DemandMode::Convex);
    }

    #[test]
    fn marginal_rates_on_path() {
        let cd = Generator::cobb_douglas();
        let e = Economy::ptcb(vec![1.0, 1.0], Some(2.0), None).unwrap();
        assert!((mrs_on_path(&cd, &e, &[1.0, 1.0], 0, 1).unwrap() - 1.0).abs() < 1e-9);
        // equal weights, price ratio 2
        let e = econ(&[2.0, 1.0], &[1.0, 1.0], Some(3.0), None);
        let sol = marshallian_demand(&cd, &e).unwrap();
        let mrs = mrs_on_path(&cd, &e, &sol.bundle, 0, 1).unwrap();
        assert!((mrs - 2.0).abs() < 1e-5);
        assert!(matches!(mrs_on_path(&cd, &e, &[1.0, 1.0], 0, 1), Err(Error::NotOnPath(_))));
    }

    #[test]
    fn economy_json() {
        let e: Economy = serde_json::from_str(r#"{"p":2,"prices":[1,3],"w":4}"#).unwrap();
        assert!(e.is_ptcb());
        assert_eq!(e.price_sum(), 4.0);
        let back: Economy = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<Economy>(r#"{"prices":[1],"budget":3}"#).is_err());
        assert!(serde_json::from_str::<Economy>(r#"{"prices":[1,2],"gammas":[1]}"#).is_err());
    }
}
