//! Scalar numerical kernels: bracketing root finder, composite Simpson
//! quadrature, finite differences and golden-section search.
//!
//! Everything here is a pure function of its arguments.

use crate::error::{Error, Result};

/// Stopping rule shared by the iterative kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        let ok = |t: f64| t.is_finite() && t > 0.0;
        if !ok(abs_tol) || !ok(rel_tol) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be finite and positive (abs_tol={abs_tol}, rel_tol={rel_tol})"
            )));
        }
        if max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(Tolerance {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    /// Tolerance used where a solve feeds a downstream identity check.
    pub fn tight() -> Self {
        Tolerance {
            abs_tol: 1e-14,
            rel_tol: 1e-15,
            max_iter: 2000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Bisection root finder on a sign-changing bracket.
///
/// Stops when `|f(x)| <= abs_tol`, when the bracket is narrower than
/// `rel_tol * |x|`, or when the bracket can no longer be split in `f64`.
pub fn find_root<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = ordered(lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    check_finite(fa, a)?;
    check_finite(fb, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a, hi: b });
    }
    for _ in 0..tol.max_iter {
        let m = 0.5 * (a + b);
        let fm = f(m);
        check_finite(fm, m)?;
        if fm.abs() <= tol.abs_tol || (b - a) <= tol.rel_tol * m.abs() || m <= a || m >= b {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Err(Error::NoConvergence {
        iterations: tol.max_iter,
    })
}

/// Safeguarded Newton iteration: Newton steps that stay inside the current
/// bracket are accepted, everything else falls back to bisection.
pub fn find_root_newton<F, D>(f: F, df: D, lo: f64, hi: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = ordered(lo, hi);
    let fa = f(a);
    let fb = f(b);
    check_finite(fa, a)?;
    check_finite(fb, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a, hi: b });
    }
    let sign_a = fa.signum();
    let mut x = 0.5 * (a + b);
    for _ in 0..tol.max_iter {
        let fx = f(x);
        check_finite(fx, x)?;
        if fx.abs() <= tol.abs_tol {
            return Ok(x);
        }
        if fx.signum() == sign_a {
            a = x;
        } else {
            b = x;
        }
        if (b - a) <= tol.rel_tol * x.abs() {
            return Ok(x);
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d.is_finite() && d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: tol.max_iter,
    })
}

/// Composite Simpson rule with `n` (even) sub-intervals.
pub fn integrate<F>(f: F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "Simpson rule needs an even positive node count, got {n}"
        )));
    }
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..n {
        let t = a + h * k as f64;
        let v = f(t);
        check_sample(v, t)?;
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let fa = f(a);
    check_sample(fa, a)?;
    let fb = f(b);
    check_sample(fb, b)?;
    Ok(h / 3.0 * (fa + fb + 4.0 * odd + 2.0 * even))
}

/// Simpson quadrature starting at `n0` nodes, doubled until two successive
/// estimates differ by less than `tol` or `max_n` is exceeded.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, n0: usize, tol: f64, max_n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut n = n0.max(2);
    let mut prev = integrate(&f, a, b, n)?;
    while n < max_n {
        n *= 2;
        let next = integrate(&f, a, b, n)?;
        if (next - prev).abs() < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence { iterations: n })
}

/// Default relative step for central differences.
pub fn default_step(x: f64) -> f64 {
    (1e-6 * x.abs()).max(1e-6)
}

/// Central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn finite_diff<F>(f: F, x: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central difference that falls back to a one-sided difference when one
/// of `x ± h` leaves the domain described by `contains`.
pub fn finite_diff_in<F, C>(f: F, x: f64, h: f64, contains: C) -> Result<f64>
where
    F: Fn(f64) -> f64,
    C: Fn(f64) -> bool,
{
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if !contains(x) {
        return Err(Error::domain(x, "finite-difference domain"));
    }
    match (contains(x - h), contains(x + h)) {
        (true, true) => Ok(finite_diff(f, x, h)),
        (false, true) => Ok((f(x + h) - f(x)) / h),
        (true, false) => Ok((f(x) - f(x - h)) / h),
        (false, false) => Err(Error::domain(x, "finite-difference domain (step too large)")),
    }
}

/// Five-point central stencil, fourth-order accurate.
pub fn finite_diff5<F>(f: F, x: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Golden-section search for the minimiser of a unimodal function.
pub fn minimize_1d<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ordered(lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (a + b);
        if (b - a) <= tol.abs_tol.max(tol.rel_tol * mid.abs()) {
            return Ok(mid);
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Err(Error::NoConvergence {
        iterations: tol.max_iter,
    })
}

/// Grows `[center - step, center + step]` (or the multiplicative analogue
/// for positive domains) by doubling until `f` changes sign.  Points where
/// `f` is undefined (`None`) stop growth on that side.
pub(crate) fn expand_bracket<F>(f: F, center: f64, positive: bool, max_doublings: usize) -> Option<(f64, f64)>
where
    F: Fn(f64) -> Option<f64>,
{
    let f0 = f(center)?;
    if f0 == 0.0 {
        return Some((center, center));
    }
    let mut lo_alive = true;
    let mut hi_alive = true;
    for k in 0..=max_doublings {
        let scale = 2f64.powi(k as i32);
        let (lo, hi) = if positive {
            (center / (1.0 + scale), center * (1.0 + scale))
        } else {
            let s = scale * center.abs().max(1.0);
            (center - s, center + s)
        };
        if lo_alive {
            match f(lo) {
                Some(v) if v.signum() != f0.signum() => return Some((lo, center)),
                Some(_) => {}
                None => lo_alive = false,
            }
        }
        if hi_alive {
            match f(hi) {
                Some(v) if v.signum() != f0.signum() => return Some((center, hi)),
                Some(_) => {}
                None => hi_alive = false,
            }
        }
        if !lo_alive && !hi_alive {
            return None;
        }
    }
    None
}

fn ordered(lo: f64, hi: f64) -> (f64, f64) {
    if lo <= hi {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

fn check_finite(v: f64, at: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(at, "function is not finite here"))
    }
}

fn check_sample(v: f64, at: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteSample { at })
    }
}
