//! Bracketing root search: sign scan on a grid, then Brent refinement.

use serde::{Deserialize, Serialize};

use crate::error::{LezError, Result};

/// `n` points spaced geometrically from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "log_space needs 0 < lo < hi and n >= 2");
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Adjacent sample pairs whose values differ in sign (or hit zero exactly on the left).
pub fn sign_change_brackets(xs: &[f64], fs: &[f64]) -> Vec<(usize, usize)> {
    (0..xs.len().saturating_sub(1))
        .filter(|&i| fs[i] == 0.0 || fs[i].signum() != fs[i + 1].signum() && fs[i + 1] != 0.0)
        .map(|i| (i, i + 1))
        .collect()
}

/// A refined root with the final sign-change bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Root {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Brent's method on `[a, b]` with `f(a)`, `f(b)` of opposite sign.
///
/// Stops once the bracket is narrower than `x_rel_tol·|x|` and `|f(x)| <= f_tol`,
/// or when the bracket can no longer shrink in floating point.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, x_rel_tol: f64, f_tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, lo: a, hi: a });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, lo: b, hi: b });
    }
    if fa.signum() == fb.signum() {
        return Err(LezError::invalid(format!("root not bracketed in [{a}, {b}]")));
    }

    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_rel_tol * b.abs();
        let xm = 0.5 * (c - b);
        let width = (c - b).abs();
        let bracket_done = width <= x_rel_tol * b.abs() || width <= 4.0 * f64::EPSILON * b.abs();
        if fb == 0.0 || (bracket_done && fb.abs() <= f_tol) || width <= 4.0 * f64::EPSILON * b.abs() {
            return Ok(Root { x: b, fx: fb, lo: b.min(c), hi: b.max(c) });
        }
        // Once the bracket is tight but |f| is not, fall back to bisection.
        let tol1 = if bracket_done { 0.0 } else { tol1 };
        if e.abs() >= tol1 && fa.abs() > fb.abs() && !bracket_done {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.max(f64::EPSILON * b.abs()).copysign(xm) };
        fb = f(b)?;
    }
    Ok(Root { x: b, fx: fb, lo: b.min(c), hi: b.max(c) })
}
