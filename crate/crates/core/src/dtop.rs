//! Dynamical topological order parameter: winding of the Pancharatnam
//! geometric phase across the positive half of the chain's momentum grid.
//!
//! The geometric phase of mode `k` is the total phase of its Loschmidt
//! factor, measured from `t = 0`, with the dynamical phase of the
//! post-ramp state removed:
//!
//! `φ^G_k(t) = Arg[G_k(t) G_k(0)*] + t (p₋ E₋ + p₊ E₊)`,
//!
//! where `p∓` are the post-ramp populations of the final eigenstates.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LezError, Result};
use crate::loschmidt::OverlapCoefficients;

const FACTOR_FLOOR: f64 = 1e-14;

/// Wrap an angle into (-π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

pub fn geometric_phase(coeffs: &OverlapCoefficients, t: f64) -> Result<f64> {
    let start = coeffs.a + coeffs.b;
    let now = coeffs.mode_factor(t);
    if now.norm() < FACTOR_FLOOR {
        return Err(LezError::UndefinedAtZero { t_f: t });
    }
    if start.norm() < FACTOR_FLOOR {
        return Err(LezError::UndefinedAtZero { t_f: 0.0 });
    }
    let dynamical = coeffs.pop_minus * coeffs.e_minus + coeffs.pop_plus * coeffs.e_plus;
    Ok(wrap_phase((now * start.conj()).arg() + t * dynamical))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtopTrace {
    pub times: Vec<f64>,
    /// Winding number per sample; NaN where a mode factor vanished.
    pub winding: Vec<f64>,
    /// `phases[i][j]`: geometric phase of mode `j` at sample `i`.
    pub phases: Vec<Vec<f64>>,
}

impl DtopTrace {
    /// Rounded winding per sample (`None` where undefined).
    pub fn rounded(&self) -> Vec<Option<i64>> {
        self.winding
            .iter()
            .map(|w| w.is_finite().then(|| w.round() as i64))
            .collect()
    }
}

/// `ν = (1/2π) Σ_j wrap(φ^G_{j+1} - φ^G_j)` over modes in ascending momentum.
pub fn winding(phases: &[f64]) -> f64 {
    phases.windows(2).map(|w| wrap_phase(w[1] - w[0])).sum::<f64>() / (2.0 * PI)
}

pub fn dtop_trace(coeffs: &[OverlapCoefficients], times: &[f64]) -> Result<DtopTrace> {
    if coeffs.len() < 2 {
        return Err(LezError::invalid("winding needs at least two modes"));
    }
    let rows: Vec<(f64, Vec<f64>)> = times
        .par_iter()
        .map(|&t| {
            let phases: Vec<f64> = coeffs
                .iter()
                .map(|c| geometric_phase(c, t).unwrap_or(f64::NAN))
                .collect();
            (winding(&phases), phases)
        })
        .collect();
    let (winding, phases) = rows.into_iter().unzip();
    Ok(DtopTrace { times: times.to_vec(), winding, phases })
}
