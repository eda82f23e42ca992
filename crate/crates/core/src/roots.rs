//! Bracketed root finding for monotone scalar equations.
//!
//! Every equation solved in this crate is strictly monotone on a known
//! bracket, so a Newton iteration safeguarded by bisection always converges.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Stop once the step (or the bracket width) falls below this.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Finds a zero of `f` in `[lo, hi]`.
///
/// `f` returns the value and the derivative. The values at the two endpoints
/// must have opposite signs (a zero at an endpoint is returned directly).
pub fn newton_bisect<F>(what: &'static str, mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let (fhi, _) = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { what, lo, hi });
    }
    // neg / pos: endpoints where f < 0 and f > 0
    let (mut neg, mut pos) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };

    let mut x = 0.5 * (lo + hi);
    let mut step_old = (hi - lo).abs();
    let mut step = step_old;
    let (mut fx, mut dfx) = f(x);

    for _ in 0..opts.max_iter {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };

        let newton = x - fx / dfx;
        let accept_newton =
            newton.is_finite() && newton > a && newton < b && (2.0 * fx).abs() <= (step_old * dfx).abs();
        step_old = step;
        if accept_newton {
            step = (newton - x).abs();
            x = newton;
        } else {
            step = 0.5 * (b - a);
            x = a + step;
        }
        if step <= opts.xtol || b - a <= opts.xtol || x == a || x == b {
            return Ok(x);
        }
        (fx, dfx) = f(x);
    }
    Err(Error::NoConvergence {
        what,
        iterations: opts.max_iter,
    })
}

/// Plain bisection for a function without a usable derivative.
pub fn bisect<F>(what: &'static str, mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    newton_bisect(what, |x| (f(x), f64::NAN), lo, hi, opts)
}
