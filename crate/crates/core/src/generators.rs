//! Catalog of strictly convex scalar generators, their Bregman divergences
//! and Legendre conjugates, plus a small family of vector generators.
//!
//! Every generator carries an optional affine term `b·x + c`.  The affine
//! part changes `φ` and its gradient but leaves divergences and aggregators
//! untouched, which the property tests exercise directly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real interval with independently open or closed endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const REALS: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_closed: false,
        hi_closed: false,
    };

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn positive() -> Self {
        Interval::open(0.0, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn interior(&self) -> Interval {
        Interval::open(self.lo, self.hi)
    }

    pub fn shifted(&self, by: f64) -> Interval {
        Interval {
            lo: self.lo + by,
            hi: self.hi + by,
            ..*self
        }
    }

    pub fn is_positive_half_line(&self) -> bool {
        self.lo == 0.0 && self.hi == f64::INFINITY
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Generator families.  The affine term `b·x + c` lives on [`Generator`].
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `x²`
    SquaredEuclidean,
    /// `x log x − x`, with `0 log 0 = 0`
    KullbackLeibler,
    /// `−log x`
    ItakuraSaito,
    /// `4/(1−α²) (x − x^((1+α)/2))`, `α ∈ (−1, 1)`
    AmariAlpha { alpha: f64 },
    /// `(−x^α + αx − α + 1) / (α(1−α))`, `α ∈ (0, 1)`
    BregmanCsiszar { alpha: f64 },
    /// `((x^(1/α) + 1)^α − 2^α) / (2(1−α))`, `α ∈ (0, 1)`
    Arimoto { alpha: f64 },
    /// `a x^(2 − 1/σ)`
    Ces { sigma: f64, a: f64 },
    /// `a' x log x`
    CobbDouglas { a: f64 },
    /// `a' exp(θx + d)`
    Gem { a: f64, theta: f64, d: f64 },
    /// Legendre conjugate of the boxed generator.
    Dual(Box<Generator>),
}

/// A strictly convex scalar potential `φ(x) = base(x) + b·x + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    family: Family,
    b: f64,
    c: f64,
}

/// Wire form `{"family": name, "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

pub const CATALOG: [&str; 9] = [
    "squared_euclidean",
    "kullback_leibler",
    "itakura_saito",
    "amari_alpha",
    "bregman_csiszar",
    "arimoto",
    "ces",
    "cobb_douglas",
    "gem",
];

/// Builds a catalog generator from its family name and parameter record.
pub fn catalog_generator(name: &str, params: &BTreeMap<String, f64>) -> Result<Generator> {
    let allowed: &[&str] = match name {
        "squared_euclidean" | "kullback_leibler" | "itakura_saito" => &[],
        "amari_alpha" | "bregman_csiszar" | "arimoto" => &["alpha"],
        "ces" => &["sigma", "a"],
        "cobb_douglas" => &["a"],
        "gem" => &["a", "theta", "d"],
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    for key in params.keys() {
        if key != "b" && key != "c" && !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidParams(format!("`{key}` is not a parameter of {name}")));
        }
    }
    let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    let family = match name {
        "squared_euclidean" => Family::SquaredEuclidean,
        "kullback_leibler" => Family::KullbackLeibler,
        "itakura_saito" => Family::ItakuraSaito,
        "amari_alpha" => Family::AmariAlpha { alpha: get("alpha", 0.0) },
        "bregman_csiszar" => Family::BregmanCsiszar { alpha: get("alpha", 0.5) },
        "arimoto" => Family::Arimoto { alpha: get("alpha", 0.5) },
        "ces" => {
            let sigma = params
                .get("sigma")
                .copied()
                .ok_or_else(|| Error::InvalidParams("ces needs `sigma`".into()))?;
            let a = match params.get("a") {
                Some(&a) => a,
                None => ces_convex_sign(sigma),
            };
            Family::Ces { sigma, a }
        }
        "cobb_douglas" => Family::CobbDouglas { a: get("a", 1.0) },
        "gem" => Family::Gem {
            a: get("a", 1.0),
            theta: get("theta", 1.0),
            d: get("d", 0.0),
        },
        _ => unreachable!(),
    };
    Generator::with_shift(family, get("b", 0.0), get("c", 0.0))
}

/// Sign of `a` that makes `a x^(2−1/σ)` convex on the positive half-line.
pub fn ces_convex_sign(sigma: f64) -> f64 {
    let q = 2.0 - 1.0 / sigma;
    if q * (q - 1.0) > 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl TryFrom<&GeneratorSpec> for Generator {
    type Error = Error;

    fn try_from(spec: &GeneratorSpec) -> Result<Generator> {
        catalog_generator(&spec.family, &spec.params)
    }
}

impl Generator {
    pub fn new(family: Family) -> Result<Self> {
        Self::with_shift(family, 0.0, 0.0)
    }

    /// Generator `φ(x) + b·x + c`.
    pub fn with_shift(family: Family, b: f64, c: f64) -> Result<Self> {
        validate(&family)?;
        if !b.is_finite() || !c.is_finite() {
            return Err(Error::InvalidParams("b and c must be finite".into()));
        }
        Ok(Generator { family, b, c })
    }

    pub fn squared_euclidean() -> Self {
        Generator::new(Family::SquaredEuclidean).unwrap()
    }

    pub fn kullback_leibler() -> Self {
        Generator::new(Family::KullbackLeibler).unwrap()
    }

    pub fn itakura_saito() -> Self {
        Generator::new(Family::ItakuraSaito).unwrap()
    }

    pub fn cobb_douglas() -> Self {
        Generator::new(Family::CobbDouglas { a: 1.0 }).unwrap()
    }

    pub fn gem(theta: f64) -> Result<Self> {
        Generator::new(Family::Gem { a: 1.0, theta, d: 0.0 })
    }

    pub fn ces(sigma: f64) -> Result<Self> {
        Generator::new(Family::Ces {
            sigma,
            a: ces_convex_sign(sigma),
        })
    }

    /// Same generator with an additional affine term.
    pub fn shifted(&self, b: f64, c: f64) -> Result<Self> {
        Generator::with_shift(self.family.clone(), self.b + b, self.c + c)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn linear_term(&self) -> (f64, f64) {
        (self.b, self.c)
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::SquaredEuclidean => "squared_euclidean".into(),
            Family::KullbackLeibler => "kullback_leibler".into(),
            Family::ItakuraSaito => "itakura_saito".into(),
            Family::AmariAlpha { .. } => "amari_alpha".into(),
            Family::BregmanCsiszar { .. } => "bregman_csiszar".into(),
            Family::Arimoto { .. } => "arimoto".into(),
            Family::Ces { .. } => "ces".into(),
            Family::CobbDouglas { .. } => "cobb_douglas".into(),
            Family::Gem { .. } => "gem".into(),
            Family::Dual(g) => format!("dual({})", g.name()),
        }
    }

    /// Serializable description; `None` for conjugates.
    pub fn spec(&self) -> Option<GeneratorSpec> {
        let mut params = BTreeMap::new();
        match &self.family {
            Family::SquaredEuclidean | Family::KullbackLeibler | Family::ItakuraSaito => {}
            Family::AmariAlpha { alpha } | Family::BregmanCsiszar { alpha } | Family::Arimoto { alpha } => {
                params.insert("alpha".into(), *alpha);
            }
            Family::Ces { sigma, a } => {
                params.insert("sigma".into(), *sigma);
                params.insert("a".into(), *a);
            }
            Family::CobbDouglas { a } => {
                params.insert("a".into(), *a);
            }
            Family::Gem { a, theta, d } => {
                params.insert("a".into(), *a);
                params.insert("theta".into(), *theta);
                params.insert("d".into(), *d);
            }
            Family::Dual(_) => return None,
        }
        if self.b != 0.0 {
            params.insert("b".into(), self.b);
        }
        if self.c != 0.0 {
            params.insert("c".into(), self.c);
        }
        Some(GeneratorSpec {
            family: self.name(),
            params,
        })
    }

    /// Set where `φ` is finite.
    pub fn phi_domain(&self) -> Interval {
        match &self.family {
            Family::KullbackLeibler | Family::CobbDouglas { .. } => Interval {
                lo: 0.0,
                hi: f64::INFINITY,
                lo_closed: true,
                hi_closed: false,
            },
            _ => self.domain(),
        }
    }

    /// Open set where `φ` is differentiable (where `u = φ'` is finite).
    pub fn domain(&self) -> Interval {
        match &self.family {
            Family::SquaredEuclidean | Family::Gem { .. } => Interval::REALS,
            Family::KullbackLeibler
            | Family::ItakuraSaito
            | Family::AmariAlpha { .. }
            | Family::BregmanCsiszar { .. }
            | Family::Arimoto { .. }
            | Family::Ces { .. }
            | Family::CobbDouglas { .. } => Interval::positive(),
            Family::Dual(g) => g.gradient_image(),
        }
    }

    /// Image of the domain under `u = φ'` (the conjugate's domain).
    pub fn gradient_image(&self) -> Interval {
        let base = match &self.family {
            Family::SquaredEuclidean | Family::KullbackLeibler | Family::CobbDouglas { .. } => Interval::REALS,
            Family::ItakuraSaito => Interval::open(f64::NEG_INFINITY, 0.0),
            Family::AmariAlpha { alpha } => {
                let k = (1.0 + alpha) / 2.0;
                Interval::open(f64::NEG_INFINITY, 1.0 / (k * (1.0 - k)))
            }
            Family::BregmanCsiszar { alpha } => Interval::open(f64::NEG_INFINITY, 1.0 / (1.0 - alpha)),
            Family::Arimoto { alpha } => Interval::open(0.0, 1.0 / (2.0 * (1.0 - alpha))),
            Family::Ces { sigma, a } => {
                let q = 2.0 - 1.0 / sigma;
                if a * q > 0.0 {
                    Interval::positive()
                } else {
                    Interval::open(f64::NEG_INFINITY, 0.0)
                }
            }
            Family::Gem { theta, .. } => {
                if *theta > 0.0 {
                    Interval::positive()
                } else {
                    Interval::open(f64::NEG_INFINITY, 0.0)
                }
            }
            Family::Dual(g) => g.domain(),
        };
        base.shifted(self.b)
    }

    /// `φ(x)`; NaN or infinite outside [`Generator::phi_domain`].
    pub fn phi(&self, x: f64) -> f64 {
        self.base_phi(x) + self.b * x + self.c
    }

    /// `u(x) = φ'(x)`.
    pub fn u(&self, x: f64) -> f64 {
        self.base_u(x) + self.b
    }

    /// `(φ')⁻¹(y)`; NaN outside [`Generator::gradient_image`].
    pub fn u_inverse(&self, y: f64) -> f64 {
        self.base_u_inverse(y - self.b)
    }

    /// `φ''(x)`.
    pub fn phi2(&self, x: f64) -> f64 {
        match &self.family {
            Family::SquaredEuclidean => 2.0,
            Family::KullbackLeibler => 1.0 / x,
            Family::ItakuraSaito => 1.0 / (x * x),
            Family::AmariAlpha { alpha } => x.powf((1.0 + alpha) / 2.0 - 2.0),
            Family::BregmanCsiszar { alpha } => x.powf(alpha - 2.0),
            Family::Arimoto { alpha } => {
                let s = x.powf(1.0 / alpha);
                (s / (s + 1.0)).powf(-alpha) * x.powf(1.0 / alpha - 1.0) / (2.0 * alpha * (s + 1.0) * (s + 1.0))
            }
            Family::Ces { sigma, a } => {
                let q = 2.0 - 1.0 / sigma;
                a * q * (q - 1.0) * x.powf(q - 2.0)
            }
            Family::CobbDouglas { a } => a / x,
            Family::Gem { a, theta, d } => a * theta * theta * (theta * x + d).exp(),
            Family::Dual(g) => 1.0 / g.phi2(g.u_inverse(x)),
        }
    }

    fn base_phi(&self, x: f64) -> f64 {
        match &self.family {
            Family::SquaredEuclidean => x * x,
            Family::KullbackLeibler => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln() - x
                }
            }
            Family::ItakuraSaito => -x.ln(),
            Family::AmariAlpha { alpha } => {
                let k = (1.0 + alpha) / 2.0;
                4.0 / (1.0 - alpha * alpha) * (x - x.powf(k))
            }
            Family::BregmanCsiszar { alpha } => (-x.powf(*alpha) + alpha * x - alpha + 1.0) / (alpha * (1.0 - alpha)),
            Family::Arimoto { alpha } => {
                ((x.powf(1.0 / alpha) + 1.0).powf(*alpha) - 2f64.powf(*alpha)) / (2.0 * (1.0 - alpha))
            }
            Family::Ces { sigma, a } => a * x.powf(2.0 - 1.0 / sigma),
            Family::CobbDouglas { a } => {
                if x == 0.0 {
                    0.0
                } else {
                    a * x * x.ln()
                }
            }
            Family::Gem { a, theta, d } => a * (theta * x + d).exp(),
            Family::Dual(g) => g.conjugate_phi(x),
        }
    }

    fn base_u(&self, x: f64) -> f64 {
        match &self.family {
            Family::SquaredEuclidean => 2.0 * x,
            Family::KullbackLeibler => x.ln(),
            Family::ItakuraSaito => -1.0 / x,
            Family::AmariAlpha { alpha } => {
                let k = (1.0 + alpha) / 2.0;
                (1.0 - k * x.powf(k - 1.0)) / (k * (1.0 - k))
            }
            Family::BregmanCsiszar { alpha } => (1.0 - x.powf(alpha - 1.0)) / (1.0 - alpha),
            Family::Arimoto { alpha } => {
                let s = x.powf(1.0 / alpha);
                (s / (s + 1.0)).powf(1.0 - alpha) / (2.0 * (1.0 - alpha))
            }
            Family::Ces { sigma, a } => {
                let q = 2.0 - 1.0 / sigma;
                a * q * x.powf(q - 1.0)
            }
            Family::CobbDouglas { a } => a * (x.ln() + 1.0),
            Family::Gem { a, theta, d } => a * theta * (theta * x + d).exp(),
            Family::Dual(g) => g.u_inverse(x),
        }
    }

    fn base_u_inverse(&self, y: f64) -> f64 {
        match &self.family {
            Family::SquaredEuclidean => y / 2.0,
            Family::KullbackLeibler => y.exp(),
            Family::ItakuraSaito => {
                if y < 0.0 {
                    -1.0 / y
                } else {
                    f64::NAN
                }
            }
            Family::AmariAlpha { alpha } => {
                let k = (1.0 + alpha) / 2.0;
                let t = (1.0 - k * (1.0 - k) * y) / k;
                if t > 0.0 {
                    t.powf(1.0 / (k - 1.0))
                } else {
                    f64::NAN
                }
            }
            Family::BregmanCsiszar { alpha } => {
                let t = 1.0 - (1.0 - alpha) * y;
                if t > 0.0 {
                    t.powf(1.0 / (alpha - 1.0))
                } else {
                    f64::NAN
                }
            }
            Family::Arimoto { alpha } => {
                let v = 2.0 * (1.0 - alpha) * y;
                if v > 0.0 && v < 1.0 {
                    let t = v.powf(1.0 / (1.0 - alpha));
                    (t / (1.0 - t)).powf(*alpha)
                } else {
                    f64::NAN
                }
            }
            Family::Ces { sigma, a } => {
                let q = 2.0 - 1.0 / sigma;
                let t = y / (a * q);
                if t > 0.0 {
                    t.powf(1.0 / (q - 1.0))
                } else {
                    f64::NAN
                }
            }
            Family::CobbDouglas { a } => (y / a - 1.0).exp(),
            Family::Gem { a, theta, d } => {
                let t = y / (a * theta);
                if t > 0.0 {
                    (t.ln() - d) / theta
                } else {
                    f64::NAN
                }
            }
            Family::Dual(g) => g.u(y),
        }
    }

    /// Whether [`Generator::legendre_conjugate`] evaluates a closed form.
    pub fn has_closed_conjugate(&self) -> bool {
        match &self.family {
            Family::AmariAlpha { .. } | Family::BregmanCsiszar { .. } | Family::Arimoto { .. } => false,
            Family::Dual(_) => true,
            _ => true,
        }
    }

    /// `φ*(y) = sup_x {xy − φ(x)}` of this generator (not of its dual).
    fn conjugate_phi(&self, y: f64) -> f64 {
        // affine term: (φ + bx + c)*(y) = φ*(y − b) − c
        let t = y - self.b;
        let closed = match &self.family {
            Family::SquaredEuclidean => Some(t * t / 4.0),
            Family::KullbackLeibler => Some(t.exp()),
            Family::ItakuraSaito => Some(if t < 0.0 { -1.0 - (-t).ln() } else { f64::NAN }),
            Family::Ces { sigma, a } => {
                let q = 2.0 - 1.0 / sigma;
                let r = t / (a * q);
                Some(if r > 0.0 {
                    t * r.powf(1.0 / (q - 1.0)) * (1.0 - 1.0 / q)
                } else {
                    f64::NAN
                })
            }
            Family::CobbDouglas { a } => Some(a * (t / a - 1.0).exp()),
            Family::Gem { a, theta, d } => {
                let r = t / (a * theta);
                Some(if r > 0.0 {
                    (t / theta) * (r.ln() - d - 1.0)
                } else {
                    f64::NAN
                })
            }
            Family::Dual(g) => Some(g.phi(y)),
            Family::AmariAlpha { .. } | Family::BregmanCsiszar { .. } | Family::Arimoto { .. } => None,
        };
        match closed {
            Some(v) => v - self.c,
            None => {
                // Legendre transform through the gradient inverse.
                let x = self.u_inverse(y);
                y * x - self.phi(x)
            }
        }
    }

    /// Legendre conjugate `φ*`.  The conjugate's gradient is this
    /// generator's gradient inverse and vice versa.
    pub fn legendre_conjugate(&self) -> Result<Generator> {
        if let Family::Dual(g) = &self.family {
            return Ok((**g).clone());
        }
        let probe = self.gradient_image();
        let y = interior_point(&probe);
        if !self.u_inverse(y).is_finite() {
            return Err(Error::ConjugateUnavailable(format!(
                "gradient of {} cannot be inverted at {y}",
                self.name()
            )));
        }
        Ok(Generator {
            family: Family::Dual(Box::new(self.clone())),
            b: 0.0,
            c: 0.0,
        })
    }

    fn check_phi_domain(&self, x: f64) -> Result<()> {
        if self.phi_domain().contains(x) {
            Ok(())
        } else {
            Err(Error::domain(x, self.phi_domain()))
        }
    }

    pub(crate) fn check_interior(&self, x: f64) -> Result<()> {
        if self.domain().contains(x) {
            Ok(())
        } else {
            Err(Error::domain(x, self.domain()))
        }
    }

    /// Inverse gradient with an explicit error for values outside the image.
    pub fn try_u_inverse(&self, y: f64) -> Result<f64> {
        let x = self.u_inverse(y);
        if x.is_finite() && self.domain().contains(x) {
            Ok(x)
        } else {
            Err(Error::InversionFailure(y))
        }
    }

    /// Bregman divergence `D(x‖y) = φ(x) − φ(y) − (x − y) u(y)`.
    pub fn divergence(&self, x: f64, y: f64) -> Result<f64> {
        self.check_phi_domain(x)?;
        self.check_interior(y)?;
        Ok(self.divergence_unchecked(x, y))
    }

    pub(crate) fn divergence_unchecked(&self, x: f64, y: f64) -> f64 {
        if x == y {
            return 0.0;
        }
        let d = self.phi(x) - self.phi(y) - (x - y) * self.u(y);
        if (-1e-12..0.0).contains(&d) {
            0.0
        } else {
            d
        }
    }

    /// `|D_φ(x‖y) − D_φ*(u(y)‖u(x))|`.
    pub fn duality_gap(&self, x: f64, y: f64) -> Result<f64> {
        self.check_interior(x)?;
        self.check_interior(y)?;
        let dual = self.legendre_conjugate()?;
        let primal = self.divergence(x, y)?;
        let mirrored = dual.divergence(self.u(y), self.u(x))?;
        Ok((primal - mirrored).abs())
    }
}

fn interior_point(iv: &Interval) -> f64 {
    match (iv.lo.is_finite(), iv.hi.is_finite()) {
        (true, true) => 0.5 * (iv.lo + iv.hi),
        (true, false) => iv.lo + 1.0,
        (false, true) => iv.hi - 1.0,
        (false, false) => 0.0,
    }
}

fn validate(family: &Family) -> Result<()> {
    let finite = |v: f64, name: &str| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{name} must be finite")))
        }
    };
    match family {
        Family::SquaredEuclidean | Family::KullbackLeibler | Family::ItakuraSaito | Family::Dual(_) => Ok(()),
        Family::AmariAlpha { alpha } => {
            finite(*alpha, "alpha")?;
            if *alpha > -1.0 && *alpha < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("amari alpha must lie in (-1, 1), got {alpha}")))
            }
        }
        Family::BregmanCsiszar { alpha } | Family::Arimoto { alpha } => {
            finite(*alpha, "alpha")?;
            if *alpha > 0.0 && *alpha < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("alpha must lie in (0, 1), got {alpha}")))
            }
        }
        Family::Ces { sigma, a } => {
            finite(*sigma, "sigma")?;
            finite(*a, "a")?;
            if *sigma == 0.0 || *sigma == 1.0 {
                return Err(Error::InvalidParams(format!("ces sigma must avoid 0 and 1, got {sigma}")));
            }
            let q = 2.0 - 1.0 / sigma;
            if q == 0.0 {
                return Err(Error::InvalidParams(
                    "ces exponent 2 - 1/sigma vanishes (sigma = 1/2); use the logarithmic generator".into(),
                ));
            }
            if a * q * (q - 1.0) > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!(
                    "ces coefficient a={a} does not make a x^{q} convex"
                )))
            }
        }
        Family::CobbDouglas { a } => {
            finite(*a, "a")?;
            if *a > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("cobb_douglas needs a > 0, got {a}")))
            }
        }
        Family::Gem { a, theta, d } => {
            finite(*a, "a")?;
            finite(*theta, "theta")?;
            finite(*d, "d")?;
            if *a <= 0.0 {
                return Err(Error::InvalidParams(format!("gem needs a > 0, got {a}")));
            }
            if *theta == 0.0 {
                return Err(Error::InvalidParams("gem needs theta != 0".into()));
            }
            Ok(())
        }
    }
}

/// Vector generators for the multidimensional divergence and path integral.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorGenerator {
    /// `φ(x) = xᵀ A x`, `A` symmetric positive definite.  Not separable.
    QuadraticForm { matrix: Vec<Vec<f64>>, chol: Vec<Vec<f64>> },
    /// `φ(x) = Σ_k g(x_k)`.
    Separable { generator: Generator, dim: usize },
}

impl VectorGenerator {
    pub fn quadratic_form(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let d = matrix.len();
        if d == 0 {
            return Err(Error::InvalidParams("empty matrix".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            for j in 0..d {
                let (aij, aji) = (row[j], matrix[j][i]);
                if !aij.is_finite() || (aij - aji).abs() > 1e-12 * aij.abs().max(1.0) {
                    return Err(Error::InvalidParams("matrix must be finite and symmetric".into()));
                }
            }
        }
        let chol = cholesky(&matrix)
            .ok_or_else(|| Error::InvalidParams("matrix is not positive definite".into()))?;
        Ok(VectorGenerator::QuadraticForm { matrix, chol })
    }

    pub fn separable(generator: Generator, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be positive".into()));
        }
        Ok(VectorGenerator::Separable { generator, dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorGenerator::QuadraticForm { matrix, .. } => matrix.len(),
            VectorGenerator::Separable { dim, .. } => *dim,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if let VectorGenerator::Separable { generator, .. } = self {
            for &v in x {
                generator.check_interior(v)?;
            }
        }
        Ok(())
    }

    pub fn phi(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            VectorGenerator::QuadraticForm { matrix, .. } => quad(matrix, x, x),
            VectorGenerator::Separable { generator, .. } => x.iter().map(|&v| generator.phi(v)).sum(),
        })
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match self {
            VectorGenerator::QuadraticForm { matrix, .. } => {
                matrix.iter().map(|row| 2.0 * dot(row, x)).collect()
            }
            VectorGenerator::Separable { generator, .. } => x.iter().map(|&v| generator.u(v)).collect(),
        })
    }

    pub fn grad_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        match self {
            VectorGenerator::QuadraticForm { chol, .. } => {
                let half: Vec<f64> = y.iter().map(|v| v / 2.0).collect();
                Ok(cholesky_solve(chol, &half))
            }
            VectorGenerator::Separable { generator, .. } => {
                y.iter().map(|&v| generator.try_u_inverse(v)).collect()
            }
        }
    }

    /// `φ(x) − φ(y) − (x − y)ᵀ ∇φ(y)`.
    pub fn divergence_vec(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let g = self.grad(y)?;
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let d = self.phi(x)? - self.phi(y)? - dot(&diff, &g);
        Ok(if (-1e-12..0.0).contains(&d) { 0.0 } else { d })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad(m: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    m.iter().zip(x).map(|(row, xi)| xi * dot(row, y)).sum()
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = a[i][i] - s;
                if v <= 0.0 {
                    return None;
                }
                l[i][j] = v.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff, minimize_1d, Tolerance};

    fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn all_catalog() -> Vec<(Generator, f64, f64)> {
        vec![
            (Generator::squared_euclidean(), -3.0, 3.0),
            (Generator::kullback_leibler(), 0.3, 5.0),
            (Generator::itakura_saito(), 0.3, 5.0),
            (catalog_generator("amari_alpha", &params(&[("alpha", 0.4)])).unwrap(), 0.3, 5.0),
            (catalog_generator("amari_alpha", &params(&[("alpha", -0.6)])).unwrap(), 0.3, 5.0),
            (catalog_generator("bregman_csiszar", &params(&[("alpha", 0.3)])).unwrap(), 0.3, 5.0),
            (catalog_generator("arimoto", &params(&[("alpha", 0.5)])).unwrap(), 0.3, 5.0),
            (Generator::ces(2.0).unwrap(), 0.3, 5.0),
            (Generator::ces(0.75).unwrap(), 0.3, 5.0),
            (Generator::ces(0.25).unwrap(), 0.3, 5.0),
            (Generator::ces(-1.0).unwrap(), 0.3, 5.0),
            (Generator::cobb_douglas(), 0.3, 5.0),
            (Generator::gem(1.0).unwrap(), -2.0, 2.0),
            (Generator::gem(-0.7).unwrap(), -2.0, 2.0),
        ]
    }

    #[test]
    fn table_rows() {
        let se = Generator::squared_euclidean();
        assert_eq!(se.divergence(3.0, 1.0).unwrap(), 4.0);
        let kl = Generator::kullback_leibler();
        assert_eq!(kl.divergence(1.0, 1.0).unwrap(), 0.0);
        // x log(x/y) - x + y
        let expected = 2.0 * 2f64.ln() - 2.0 + 1.0;
        assert!((kl.divergence(2.0, 1.0).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.386_294).abs() < 1e-6);
        // x/y - log(x/y) - 1
        let is = Generator::itakura_saito();
        let expected = 2.0 - 2f64.ln() - 1.0;
        assert!((is.divergence(2.0, 1.0).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.30685).abs() < 1e-5);
    }

    #[test]
    fn kl_boundary_and_domain_errors() {
        let kl = Generator::kullback_leibler();
        // 0 log 0 = 0: D(0‖y) = y
        assert!((kl.divergence(0.0, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(kl.divergence(1.0, 0.0), Err(Error::DomainViolation { .. })));
        let is = Generator::itakura_saito();
        assert!(matches!(is.divergence(0.0, 1.0), Err(Error::DomainViolation { .. })));
        assert!(matches!(is.divergence(-1.0, 1.0), Err(Error::DomainViolation { .. })));
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(
            catalog_generator("hellinger", &BTreeMap::new()),
            Err(Error::UnknownFamily(_))
        ));
        let bad = |name: &str, kv: &[(&str, f64)]| {
            matches!(catalog_generator(name, &params(kv)), Err(Error::InvalidParams(_)))
        };
        assert!(bad("ces", &[("sigma", 0.5), ("a", 1.0)]));
        assert!(bad("ces", &[("sigma", 1.0)]));
        assert!(bad("ces", &[("sigma", 2.0), ("a", -1.0)]));
        assert!(bad("amari_alpha", &[("alpha", 1.0)]));
        assert!(bad("bregman_csiszar", &[("alpha", 0.0)]));
        assert!(bad("gem", &[("theta", 0.0)]));
        assert!(bad("cobb_douglas", &[("a", -2.0)]));
        assert!(bad("kullback_leibler", &[("alpha", 0.5)]));
    }

    #[test]
    fn ces_shapes() {
        let g = catalog_generator("ces", &params(&[("sigma", 2.0), ("a", 3.0)])).unwrap();
        // u(x) ∝ x^(1 - 1/σ)
        let r = g.u(4.0) / g.u(1.0);
        assert!((r - 4f64.powf(0.5)).abs() < 1e-12);
        let cd = catalog_generator("cobb_douglas", &params(&[("a", 2.0), ("b", 0.5)])).unwrap();
        assert!((cd.u(3.0) - (2.0 * (3f64.ln() + 1.0) + 0.5)).abs() < 1e-12);
        let gem = catalog_generator("gem", &params(&[("a", 2.0), ("theta", 0.5), ("d", 0.1)])).unwrap();
        assert!((gem.u(1.0) - 2.0 * 0.5 * (0.6f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn derivative_consistency() {
        for (g, lo, hi) in all_catalog() {
            for k in 1..10 {
                let x = lo + (hi - lo) * k as f64 / 10.0;
                let h = 1e-5 * x.abs().max(1.0);
                let du = finite_diff(|t| g.phi(t), x, h);
                assert!((du - g.u(x)).abs() <= 1e-5 * g.u(x).abs().max(1.0), "{} u at {x}", g.name());
                let d2 = finite_diff(|t| g.u(t), x, h);
                assert!((d2 - g.phi2(x)).abs() <= 1e-5 * g.phi2(x).abs().max(1.0), "{} phi2 at {x}", g.name());
                assert!(g.phi2(x) > 0.0);
                let back = g.u_inverse(g.u(x));
                assert!((back - x).abs() <= 1e-9 * x.abs().max(1.0), "{} inverse at {x}", g.name());
            }
        }
    }

    #[test]
    fn conjugate_closed_forms() {
        let kl = Generator::kullback_leibler().legendre_conjugate().unwrap();
        for y in [-1.0, 0.0, 0.7, 2.0] {
            assert!((kl.phi(y) - f64::exp(y)).abs() < 1e-12);
        }
        let is = Generator::itakura_saito().legendre_conjugate().unwrap();
        assert!((is.phi(-2.0) - (-1.0 - 2f64.ln())).abs() < 1e-15);
        let se = Generator::squared_euclidean().legendre_conjugate().unwrap();
        assert!((se.phi(3.0) - 9.0 / 4.0).abs() < 1e-15);
        let back = se.legendre_conjugate().unwrap();
        assert_eq!(back, Generator::squared_euclidean());
    }

    #[test]
    fn conjugate_matches_supremum() {
        // numeric sup over a wide bracket as an independent oracle
        let tol = Tolerance::new(1e-12, 1e-14, 400).unwrap();
        for (g, lo, hi) in all_catalog() {
            let dual = g.legendre_conjugate().unwrap();
            for k in 1..5 {
                let x0 = lo + (hi - lo) * k as f64 / 5.0;
                let y = g.u(x0);
                let arg = minimize_1d(|x| g.phi(x) - x * y, lo.min(x0) - 0.0, hi, tol).unwrap();
                let sup = y * arg - g.phi(arg);
                assert!((dual.phi(y) - sup).abs() < 1e-8 * sup.abs().max(1.0), "{} at {y}", g.name());
            }
        }
    }

    #[test]
    fn duality_gap_examples() {
        let se = Generator::squared_euclidean();
        assert!(se.duality_gap(3.0, 1.0).unwrap() <= 1e-12);
        let kl = Generator::kullback_leibler();
        assert!(kl.duality_gap(2.0, 1.0).unwrap() <= 1e-10);
        assert_eq!(kl.duality_gap(1.5, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn amari_endpoint_behaviour() {
        // The generator column's α → ±1 limits: φ'' → x^-2 (Itakura-Saito) and x^-1 (KL).
        let (x, y) = (2.5, 1.2);
        let near_minus = catalog_generator("amari_alpha", &params(&[("alpha", -0.999)])).unwrap();
        let near_plus = catalog_generator("amari_alpha", &params(&[("alpha", 0.999)])).unwrap();
        let is = Generator::itakura_saito().divergence(x, y).unwrap();
        let kl = Generator::kullback_leibler().divergence(x, y).unwrap();
        let a = near_minus.divergence(x, y).unwrap();
        let b = near_plus.divergence(x, y).unwrap();
        assert!((a - is).abs() <= 0.02 * is, "{a} vs {is}");
        assert!((b - kl).abs() <= 0.02 * kl, "{b} vs {kl}");
    }

    #[test]
    fn spec_round_trip() {
        let g = catalog_generator("gem", &params(&[("theta", -0.5), ("b", 1.0)])).unwrap();
        let spec = g.spec().unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: GeneratorSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(Generator::try_from(&back).unwrap(), g);
        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"family":"gem","extra":1}"#).is_err());
    }

    #[test]
    fn vector_divergences() {
        let id = VectorGenerator::quadratic_form(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((id.divergence_vec(&[1.0, 2.0], &[0.0, 0.0]).unwrap() - 5.0).abs() < 1e-15);
        let a = VectorGenerator::quadratic_form(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((a.divergence_vec(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(a.divergence_vec(&[0.3, -0.2], &[0.3, -0.2]).unwrap(), 0.0);
        assert!(matches!(
            a.divergence_vec(&[1.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let x = [0.4, -1.3];
        let back = a.grad_inverse(&a.grad(&x).unwrap()).unwrap();
        assert!(back.iter().zip(x).all(|(p, q)| (p - q).abs() < 1e-8));
        assert!(VectorGenerator::quadratic_form(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
    }
}
