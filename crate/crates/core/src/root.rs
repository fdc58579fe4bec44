//! Bracketing root finder for monotone increasing scalar functions.

use crate::error::{Error, Result};

/// Iteration cap for [`solve_increasing`].
pub const MAX_ITERATIONS: usize = 200;

/// Finds `x ∈ [lo, hi]` with `|f(x)| ≤ tol` for an increasing `f` with
/// `f(lo) < 0 < f(hi)`.
///
/// Each step tries the secant (false position) point of the bracket; if a
/// step fails to halve the bracket, the next one bisects. When the bracket
/// shrinks to adjacent floats the better end point is returned.
pub fn solve_increasing<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::Precondition(alloc::format!(
            "root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    let mut bisect = false;
    for _ in 0..MAX_ITERATIONS {
        let width = hi - lo;
        let mid = lo + 0.5 * width;
        let x = if bisect {
            mid
        } else {
            let s = lo - f_lo * width / (f_hi - f_lo);
            if s > lo && s < hi {
                s
            } else {
                mid
            }
        };
        if x <= lo || x >= hi {
            // bracket exhausted at floating resolution
            return Ok(if f_lo.abs() < f_hi.abs() { lo } else { hi });
        }
        let fx = f(x)?;
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        bisect = hi - lo > 0.5 * width;
    }
    Err(Error::NoConvergence(alloc::format!(
        "bracket [{lo}, {hi}] after {MAX_ITERATIONS} iterations"
    )))
}

/// Doubles `step` away from `origin` until `f(x)` takes the sign of
/// `direction` (`±1`), returning that `x`.
pub fn expand_bracket<F>(mut f: F, origin: f64, step: f64, direction: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut step = step;
    for _ in 0..MAX_ITERATIONS {
        let x = origin + direction * step;
        if !x.is_finite() {
            break;
        }
        if f(x)? * direction > 0.0 {
            return Ok(x);
        }
        step *= 2.0;
    }
    Err(Error::NoConvergence("could not bracket the root".into()))
}
