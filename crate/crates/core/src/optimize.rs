//! One-dimensional root finding and maximization.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Bisection on a bracket with a sign change. Stops when the bracket is
/// narrower than `xtol`.
pub fn bisect<F: FnMut(f64) -> f64>(
    op: &'static str,
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
) -> Result<f64> {
    let (a0, b0) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoRoot { op, lo: a0, hi: b0 });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of a bracketed maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Each iteration shrinks the bracket by 1/φ and reuses one interior point,
/// so only one new evaluation is needed per step.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
) -> Result<Maximum> {
    if !(lo < hi) || !(xtol > 0.0) {
        return Err(Error::domain(
            "golden_section_max",
            format!("invalid bracket [{lo}, {hi}] or tolerance {xtol}"),
        ));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    while (b - a) > xtol {
        if !(fc.is_finite() && fd.is_finite()) {
            return Err(Error::Numerical {
                op: "golden_section_max",
                msg: "objective is not finite inside the bracket".into(),
                achieved: b - a,
            });
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
        if evaluations > 10_000 {
            return Err(Error::Numerical {
                op: "golden_section_max",
                msg: "iteration limit".into(),
                achieved: b - a,
            });
        }
    }
    let x = 0.5 * (a + b);
    let value = f(x);
    Ok(Maximum {
        x,
        value,
        evaluations: evaluations + 1,
    })
}
