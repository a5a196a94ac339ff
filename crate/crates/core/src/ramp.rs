//! Linear-ramp evolution of single momentum modes.
//!
//! The drive moves linearly from its start to its end value over the ramp
//! duration; each mode obeys `i dψ/dt = K(drive(t), k) ψ`. Integration uses
//! a fourth-order Magnus scheme with two Gauss points and the closed-form
//! SU(2) exponential, so every step is unitary and constant generators are
//! propagated exactly. Step size is controlled by step doubling.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LezError, Result};
use crate::models::{Kernel, KernelFamily, ModeGrid};
use crate::spinor::SpinorState;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Piecewise-linear drive: `p(t) = p_i + (p_f - p_i) t/τ` for `t <= τ`, `p_f` after.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub start: f64,
    pub end: f64,
    pub duration: f64,
}

impl RampSchedule {
    pub fn new(start: f64, end: f64, duration: f64) -> Result<Self> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(LezError::invalid(format!("ramp duration must be finite and >= 0, got {duration}")));
        }
        if !(start.is_finite() && end.is_finite()) {
            return Err(LezError::invalid("ramp end points must be finite"));
        }
        Ok(Self { start, end, duration })
    }

    pub fn drive(&self, t: f64) -> f64 {
        if self.duration == 0.0 || t >= self.duration {
            self.end
        } else {
            self.start + (self.end - self.start) * t / self.duration
        }
    }

    /// `(p_f - p_i)/τ`; infinite for a sudden quench.
    pub fn rate(&self) -> f64 {
        (self.end - self.start) / self.duration
    }

    pub fn is_sudden(&self) -> bool {
        self.duration == 0.0
    }
}

/// Integration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub state: SpinorState,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest `| |u|² + |v|² - 1 |` seen at any accepted step.
    pub max_norm_drift: f64,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `exp(-i (c0 + c·σ)) ψ`.
fn apply_su2(c0: f64, c: [f64; 3], psi: &SpinorState) -> SpinorState {
    let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    let (sin, cos) = norm.sin_cos();
    let s = if norm > 0.0 { sin / norm } else { 1.0 };
    // (c·σ) ψ
    let cs_u = c[2] * psi.u + Complex64::new(c[0], -c[1]) * psi.v;
    let cs_v = Complex64::new(c[0], c[1]) * psi.u - c[2] * psi.v;
    let mi = Complex64::new(0.0, -s);
    let global = Complex64::from_polar(1.0, -c0);
    SpinorState::new(
        global * (cos * psi.u + mi * cs_u),
        global * (cos * psi.v + mi * cs_v),
    )
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6

fn magnus4_step<K: Fn(f64) -> Kernel>(kernel_at: &K, t: f64, h: f64, psi: &SpinorState) -> SpinorState {
    let k1 = kernel_at(t + (0.5 - GAUSS_OFFSET) * h);
    let k2 = kernel_at(t + (0.5 + GAUSS_OFFSET) * h);
    let d1 = [k1.dx, k1.dy, k1.dz];
    let d2 = [k2.dx, k2.dy, k2.dz];
    let comm = cross(d2, d1);
    let w = 3f64.sqrt() * h * h / 6.0;
    let c = [
        0.5 * h * (d1[0] + d2[0]) + w * comm[0],
        0.5 * h * (d1[1] + d2[1]) + w * comm[1],
        0.5 * h * (d1[2] + d2[2]) + w * comm[2],
    ];
    apply_su2(0.5 * h * (k1.d0 + k2.d0), c, psi)
}

/// Propagate `i dψ/dt = K(t) ψ` over `[0, duration]`.
///
/// The per-step error budget is `tolerance · h/duration`, so the accumulated
/// error stays within `tolerance`.
pub fn propagate<K>(kernel_at: K, duration: f64, initial: &SpinorState, tolerance: f64) -> Result<Propagation>
where
    K: Fn(f64) -> Kernel,
{
    if !(tolerance > 0.0) {
        return Err(LezError::invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(LezError::invalid(format!("duration must be finite and >= 0, got {duration}")));
    }
    let mut out = Propagation {
        state: *initial,
        accepted_steps: 0,
        rejected_steps: 0,
        max_norm_drift: (initial.norm_sqr() - 1.0).abs(),
    };
    if duration == 0.0 {
        return Ok(out);
    }

    let scale = kernel_at(0.0).magnitude().max(kernel_at(duration).magnitude()).max(1e-3);
    let mut h = duration.min(0.5 / scale);
    let mut t = 0.0;
    let mut psi = *initial;
    while t < duration {
        let last = t + h >= duration;
        if last {
            h = duration - t;
        }
        let big = magnus4_step(&kernel_at, t, h, &psi);
        let half = magnus4_step(&kernel_at, t, 0.5 * h, &psi);
        let small = magnus4_step(&kernel_at, t + 0.5 * h, 0.5 * h, &half);
        let err = small.max_abs_diff(&big) / 15.0;
        let budget = (tolerance * h / duration).max(1e-15);

        if err <= budget {
            t = if last { duration } else { t + h };
            psi = small;
            out.accepted_steps += 1;
            out.max_norm_drift = out.max_norm_drift.max((psi.norm_sqr() - 1.0).abs());
        } else {
            out.rejected_steps += 1;
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * (budget / err).powf(0.2)).clamp(0.2, 4.0) };
        h *= factor;
        if h < 1e-14 * t.max(1.0) {
            return Err(LezError::StepUnderflow { t, step: h });
        }
    }
    out.state = psi;
    Ok(out)
}

/// Evolve one mode through the ramp, returning the full diagnostics.
pub fn evolve_ramp_traced<F: KernelFamily>(
    family: &F,
    schedule: &RampSchedule,
    k: F::Momentum,
    initial: &SpinorState,
    tolerance: f64,
) -> Result<Propagation> {
    if (initial.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(LezError::invalid("initial spinor must be normalized"));
    }
    propagate(|t| family.kernel(schedule.drive(t), k), schedule.duration, initial, tolerance)
}

/// Evolve one mode through the ramp; returns `(u_τ, v_τ)`.
pub fn evolve_ramp<F: KernelFamily>(
    family: &F,
    schedule: &RampSchedule,
    k: F::Momentum,
    initial: &SpinorState,
    tolerance: f64,
) -> Result<SpinorState> {
    evolve_ramp_traced(family, schedule, k, initial, tolerance).map(|p| p.state)
}

/// Initial ground spinor and post-ramp spinor of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEvolution {
    pub initial: SpinorState,
    pub post_ramp: SpinorState,
}

/// Start every mode in the ground state of the initial kernel and evolve it.
pub fn evolve_mode<F: KernelFamily>(
    family: &F,
    schedule: &RampSchedule,
    k: F::Momentum,
    tolerance: f64,
) -> Result<ModeEvolution> {
    let initial = family.kernel(schedule.start, k).ground_spinor()?;
    let post_ramp = evolve_ramp(family, schedule, k, &initial, tolerance)?;
    Ok(ModeEvolution { initial, post_ramp })
}

/// Evolve every grid mode from its initial ground state. Output order follows the grid.
pub fn evolve_ramp_batch<F: KernelFamily>(
    family: &F,
    schedule: &RampSchedule,
    grid: &ModeGrid<F::Momentum>,
    tolerance: f64,
) -> Result<Vec<SpinorState>> {
    evolve_modes(family, schedule, grid, tolerance).map(|v| v.into_iter().map(|m| m.post_ramp).collect())
}

/// Like [`evolve_ramp_batch`] but keeps the initial spinors.
pub fn evolve_modes<F: KernelFamily>(
    family: &F,
    schedule: &RampSchedule,
    grid: &ModeGrid<F::Momentum>,
    tolerance: f64,
) -> Result<Vec<ModeEvolution>> {
    if grid.is_empty() {
        return Err(LezError::invalid("mode grid is empty"));
    }
    grid.momenta
        .par_iter()
        .enumerate()
        .map(|(i, &k)| evolve_mode(family, schedule, k, tolerance).map_err(|e| e.at_mode(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{chain_grid, Tfim};
    use std::f64::consts::PI;

    #[test]
    fn schedule_profile() {
        let s = RampSchedule::new(0.5, 1.5, 2.0).unwrap();
        assert_eq!(s.drive(0.0), 0.5);
        assert_eq!(s.drive(1.0), 1.0);
        assert_eq!(s.drive(5.0), 1.5);
        assert_eq!(s.rate(), 0.5);
        assert!(RampSchedule::new(0.5, 1.5, -1.0).is_err());
        assert!(RampSchedule::new(0.5, 1.5, 0.0).unwrap().is_sudden());
    }

    #[test]
    fn sudden_quench_returns_input_exactly() {
        let tfim = Tfim::default();
        let s = RampSchedule::new(0.5, 1.5, 0.0).unwrap();
        let g = tfim.kernel(0.5, 0.3).ground_spinor().unwrap();
        assert_eq!(evolve_ramp(&tfim, &s, 0.3, &g, 1e-10).unwrap(), g);
    }

    #[test]
    fn constant_drive_only_rotates_phase() {
        let tfim = Tfim::default();
        let s = RampSchedule::new(0.8, 0.8, 7.3).unwrap();
        let g = tfim.kernel(0.8, 1.2).ground_spinor().unwrap();
        let out = evolve_ramp(&tfim, &s, 1.2, &g, 1e-10).unwrap();
        assert!((out.u.norm() - g.u.norm()).abs() < 1e-12);
        assert!((out.v.norm() - g.v.norm()).abs() < 1e-12);
        assert!((g.inner(&out).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn near_sudden_ramp_barely_moves() {
        let tfim = Tfim::default();
        let s = RampSchedule::new(0.5, 1.5, 1e-6).unwrap();
        let g = tfim.kernel(0.5, 0.7).ground_spinor().unwrap();
        let out = evolve_ramp(&tfim, &s, 0.7, &g, 1e-10).unwrap();
        assert!(out.max_abs_diff(&g) <= 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let tfim = Tfim::default();
        let s = RampSchedule::new(0.5, 1.5, 1.0).unwrap();
        let bad = SpinorState::from_real(1.0, 1.0);
        assert!(evolve_ramp(&tfim, &s, 0.7, &bad, 1e-10).is_err());
        let g = tfim.kernel(0.5, 0.7).ground_spinor().unwrap();
        assert!(evolve_ramp(&tfim, &s, 0.7, &g, 0.0).is_err());
    }

    #[test]
    fn batch_matches_single_calls_in_grid_order() {
        let tfim = Tfim::default();
        let s = RampSchedule::new(0.5, 1.5, 1.0).unwrap();
        let grid = chain_grid(8).unwrap();
        let batch = evolve_ramp_batch(&tfim, &s, &grid, 1e-10).unwrap();
        assert_eq!(batch.len(), 4);
        for (k, out) in grid.momenta.iter().zip(&batch) {
            let g = tfim.kernel(0.5, *k).ground_spinor().unwrap();
            assert_eq!(*out, evolve_ramp(&tfim, &s, *k, &g, 1e-10).unwrap());
        }
    }

    #[test]
    fn adiabatic_ramp_follows_ground_state() {
        let tfim = Tfim::default();
        let s = RampSchedule::new(0.5, 1.5, 500.0).unwrap();
        let m = evolve_mode(&tfim, &s, PI / 2.0, 1e-10).unwrap();
        let gf = tfim.kernel(1.5, PI / 2.0).ground_spinor().unwrap();
        assert!(gf.inner(&m.post_ramp).norm() >= 0.999);
    }
}
