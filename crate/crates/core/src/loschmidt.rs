//! Loschmidt amplitude after the ramp, rate function and critical times.
//!
//! With the initial ground spinor `ψ_i`, the post-ramp spinor `ψ_τ` and the
//! final eigenpairs `(E∓, |∓>)`, every mode contributes the factor
//!
//! `G_k(t) = A e^{-i E₋ t} + B e^{-i E₊ t}`,
//! `A = <ψ_i|−><−|ψ_τ>`, `B = <ψ_i|+><+|ψ_τ>`,
//!
//! and `G(t) = Π_k G_k(t)`. For the chains `E∓ = ∓ε_k` and `A`, `B` are
//! the products `(u_i u_f + v_i v_f)(u_τ u_f + v_τ v_f)` and
//! `(u_i v_f - v_i u_f)(u_τ v_f - v_τ u_f)`. A mode factor vanishes only if
//! `|A| = |B|`, at `t_c = [π(2n+1) - Arg(A/B)]/(E₊ - E₋)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LezError, Result};
use crate::models::{FinalEigenbasis, KernelFamily, ModeGrid};
use crate::ramp::{evolve_modes, ModeEvolution, RampSchedule};
use crate::spinor::SpinorState;

/// Magnitudes below this make `Arg(A/B)` meaningless.
pub const PHASE_FLOOR: f64 = 1e-300;

/// Per-mode data governing the post-ramp Loschmidt factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub e_minus: f64,
    pub e_plus: f64,
    /// Post-ramp populations `|<∓|ψ_τ>|²`.
    pub pop_minus: f64,
    pub pop_plus: f64,
    /// `Arg(A/B)` in (-π, π]; `None` when `|A|` or `|B|` is below [`PHASE_FLOOR`].
    pub phase: Option<f64>,
}

impl OverlapCoefficients {
    pub fn mode_factor(&self, t: f64) -> Complex64 {
        self.a * Complex64::from_polar(1.0, -self.e_minus * t) + self.b * Complex64::from_polar(1.0, -self.e_plus * t)
    }

    /// `|G_k(t)|² = |A|² + |B|² + 2 Re(A B* e^{i(E₊-E₋)t})`.
    pub fn mode_echo(&self, t: f64) -> f64 {
        let cross = self.a * self.b.conj() * Complex64::from_polar(1.0, self.gap() * t);
        (self.a.norm_sqr() + self.b.norm_sqr() + 2.0 * cross.re).max(0.0)
    }

    pub fn gap(&self) -> f64 {
        self.e_plus - self.e_minus
    }

    /// `|A| - |B|`; zero exactly when the mode can host Loschmidt zeros.
    pub fn residual(&self) -> f64 {
        self.a.norm() - self.b.norm()
    }

    /// `||A| - |B|| / max(|A|, |B|)`.
    pub fn relative_mismatch(&self) -> f64 {
        let (na, nb) = (self.a.norm(), self.b.norm());
        let m = na.max(nb);
        if m == 0.0 {
            0.0
        } else {
            (na - nb).abs() / m
        }
    }

    pub fn phase(&self) -> Result<f64> {
        self.phase.ok_or(LezError::PhaseUndefined {
            abs_a: self.a.norm(),
            abs_b: self.b.norm(),
        })
    }

    /// Multiply `A` and `B` by a common unit phase.
    pub fn rephased(&self, angle: f64) -> Self {
        let z = Complex64::from_polar(1.0, angle);
        Self { a: self.a * z, b: self.b * z, ..*self }
    }
}

pub fn overlap_coefficients(
    initial: &SpinorState,
    post_ramp: &SpinorState,
    basis: &FinalEigenbasis,
) -> Result<OverlapCoefficients> {
    for s in [initial, post_ramp] {
        if (s.norm_sqr() - 1.0).abs() > 1e-8 {
            return Err(LezError::invalid("overlap inputs must be normalized"));
        }
    }
    let proj_minus = basis.minus.inner(post_ramp);
    let proj_plus = basis.plus.inner(post_ramp);
    let a = initial.inner(&basis.minus) * proj_minus;
    let b = initial.inner(&basis.plus) * proj_plus;
    let phase = if a.norm() < PHASE_FLOOR || b.norm() < PHASE_FLOOR {
        None
    } else {
        Some((a / b).arg())
    };
    Ok(OverlapCoefficients {
        a,
        b,
        e_minus: basis.e_minus,
        e_plus: basis.e_plus,
        pop_minus: proj_minus.norm_sqr(),
        pop_plus: proj_plus.norm_sqr(),
        phase,
    })
}

/// Coefficients of a single mode for the given ramp, starting from the
/// ground state of the initial kernel.
pub fn mode_coefficients<F: KernelFamily>(
    family: &F,
    schedule: &RampSchedule,
    k: F::Momentum,
    tolerance: f64,
) -> Result<OverlapCoefficients> {
    let ModeEvolution { initial, post_ramp } = crate::ramp::evolve_mode(family, schedule, k, tolerance)?;
    let basis = family.kernel(schedule.end, k).eigenbasis()?;
    overlap_coefficients(&initial, &post_ramp, &basis)
}

/// Coefficients for every grid mode, in grid order.
pub fn grid_coefficients<F: KernelFamily>(
    family: &F,
    schedule: &RampSchedule,
    grid: &ModeGrid<F::Momentum>,
    tolerance: f64,
) -> Result<Vec<OverlapCoefficients>> {
    let evolved = evolve_modes(family, schedule, grid, tolerance)?;
    grid.momenta
        .par_iter()
        .zip(evolved.par_iter())
        .enumerate()
        .map(|(i, (&k, m))| {
            family
                .kernel(schedule.end, k)
                .eigenbasis()
                .and_then(|basis| overlap_coefficients(&m.initial, &m.post_ramp, &basis))
                .map_err(|e| e.at_mode(i))
        })
        .collect()
}

/// `ln |G(t)|²`, summed in mode order. `-∞` iff some factor vanishes.
pub fn log_echo(coeffs: &[OverlapCoefficients], t: f64) -> f64 {
    coeffs.iter().map(|c| c.mode_echo(t).ln()).sum()
}

/// `|G(t)|² = Π_k |G_k(t)|²`.
pub fn loschmidt_amplitude_sq(coeffs: &[OverlapCoefficients], t: f64) -> f64 {
    coeffs.iter().map(|c| c.mode_echo(t)).product::<f64>().clamp(0.0, 1.0)
}

/// Sampled echo and rate function `λ = -(1/N) ln |G|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTrace {
    pub times: Vec<f64>,
    pub echo: Vec<f64>,
    /// `+∞` at exact zeros.
    pub rate: Vec<f64>,
    pub exact_zero: Vec<bool>,
    pub mode_count: usize,
}

impl RateTrace {
    /// Largest finite rate and its time.
    pub fn max_finite_rate(&self) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.rate)
            .filter(|(_, r)| r.is_finite())
            .map(|(&t, &r)| (t, r))
            .max_by(|x, y| x.1.total_cmp(&y.1))
    }
}

/// Evaluate the rate function on a monotone time grid.
///
/// `mode_count` is the normalizer `N` (chain length, or `Lx·Ly`). The rate is
/// computed from the sum of per-mode logarithms, so it stays finite when
/// `|G|²` itself underflows for large lattices; a sample is flagged as an
/// exact zero only when a single mode factor drops below `1e-300`.
pub fn rate_trace(coeffs: &[OverlapCoefficients], mode_count: usize, times: &[f64]) -> Result<RateTrace> {
    if mode_count == 0 {
        return Err(LezError::invalid("mode count must be positive"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LezError::invalid("time grid must be strictly increasing"));
    }
    let n = mode_count as f64;
    let samples: Vec<(f64, f64, bool)> = times
        .par_iter()
        .map(|&t| {
            let zero = coeffs.iter().any(|c| c.mode_echo(t) < PHASE_FLOOR);
            if zero {
                (0.0, f64::INFINITY, true)
            } else {
                let log = log_echo(coeffs, t).min(0.0);
                (log.exp(), -log / n, false)
            }
        })
        .collect();
    Ok(RateTrace {
        times: times.to_vec(),
        echo: samples.iter().map(|s| s.0).collect(),
        rate: samples.iter().map(|s| s.1).collect(),
        exact_zero: samples.iter().map(|s| s.2).collect(),
        mode_count,
    })
}

/// `0, step, 2·step, …` up to and including `t_max` (within rounding).
pub fn time_grid(t_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(LezError::invalid(format!("bad time grid: t_max = {t_max}, step = {step}")));
    }
    let count = (t_max / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| i as f64 * step).collect())
}

/// Loschmidt zeros of a mode tuned to `|A| = |B|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTimeTrain {
    /// First zero (`n = 0`).
    pub base: f64,
    /// `2π/(E₊ - E₋)`, i.e. `π/ε_k` for the chains.
    pub period: f64,
    pub phase: f64,
    pub times: Vec<f64>,
}

/// Mismatch allowed by [`critical_times`].
pub const CRITICAL_MISMATCH_TOL: f64 = 1e-6;

pub fn critical_times(coeffs: &OverlapCoefficients, n_max: usize) -> Result<CriticalTimeTrain> {
    let mismatch = coeffs.relative_mismatch();
    if !(mismatch <= CRITICAL_MISMATCH_TOL) {
        return Err(LezError::NotAtCriticalRate { mismatch });
    }
    let phase = coeffs.phase()?;
    let gap = coeffs.gap();
    let times = (0..=n_max)
        .map(|n| (PI * (2 * n + 1) as f64 - phase) / gap)
        .filter(|&t| t > 0.0)
        .collect();
    Ok(CriticalTimeTrain {
        base: (PI - phase) / gap,
        period: 2.0 * PI / gap,
        phase,
        times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{chain_grid, tfim_spectrum, KernelFamily, Tfim};

    fn sudden(h_i: f64, h_f: f64, n: usize) -> Vec<OverlapCoefficients> {
        let s = RampSchedule::new(h_i, h_f, 0.0).unwrap();
        grid_coefficients(&Tfim::default(), &s, &chain_grid(n).unwrap(), 1e-10).unwrap()
    }

    #[test]
    fn sudden_quench_matches_squared_products() {
        let k = 0.37;
        let c = mode_coefficients(&Tfim::default(), &RampSchedule::new(0.5, 1.5, 0.0).unwrap(), k, 1e-10).unwrap();
        let i = tfim_spectrum(0.5, k).unwrap();
        let f = tfim_spectrum(1.5, k).unwrap();
        let a = (i.u * f.u + i.v * f.v).powi(2);
        let b = (i.u * f.v - i.v * f.u).powi(2);
        assert!((c.a - Complex64::new(a, 0.0)).norm() < 1e-14);
        assert!((c.b - Complex64::new(b, 0.0)).norm() < 1e-14);
        assert_eq!(c.e_plus, -c.e_minus);
        assert!((c.e_plus - f.epsilon).abs() < 1e-14);
    }

    #[test]
    fn equal_fields_give_pure_phase() {
        let coeffs = sudden(0.5, 0.5, 10);
        for c in &coeffs {
            assert!(c.b.norm() < 1e-15);
            assert!((c.a.norm() - 1.0).abs() < 1e-14);
            assert!(c.phase.is_none());
            assert!(matches!(c.phase(), Err(LezError::PhaseUndefined { .. })));
        }
        for t in [0.0, 0.3, 7.0] {
            assert!((loschmidt_amplitude_sq(&coeffs, t) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn echo_starts_at_one_for_sudden_quench() {
        let coeffs = sudden(0.5, 1.5, 50);
        assert!((loschmidt_amplitude_sq(&coeffs, 0.0) - 1.0).abs() < 1e-13);
        let trace = rate_trace(&coeffs, 50, &[0.0, 0.5, 1.0]).unwrap();
        assert!(trace.rate[0].abs() < 1e-14);
    }

    #[test]
    fn mode_echo_matches_factor_modulus() {
        let c = mode_coefficients(&Tfim::default(), &RampSchedule::new(0.5, 1.5, 1.3).unwrap(), 0.9, 1e-10).unwrap();
        for t in [0.0, 0.7, 3.1, 12.0] {
            assert!((c.mode_echo(t) - c.mode_factor(t).norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn critical_times_from_phase_and_gap() {
        // φ = 0, ε = π gives t_c = n + 1/2.
        let c = OverlapCoefficients {
            a: Complex64::new(0.4, 0.0),
            b: Complex64::new(0.4, 0.0),
            e_minus: -PI,
            e_plus: PI,
            pop_minus: 0.5,
            pop_plus: 0.5,
            phase: Some(0.0),
        };
        let train = critical_times(&c, 3).unwrap();
        assert_eq!(train.times, vec![0.5, 1.5, 2.5, 3.5]);
        assert_eq!(train.period, 1.0);
        for t in train.times {
            assert!(c.mode_factor(t).norm() < 1e-15);
        }
        let off = OverlapCoefficients { b: Complex64::new(0.3, 0.0), ..c };
        assert!(matches!(critical_times(&off, 3), Err(LezError::NotAtCriticalRate { .. })));
    }

    #[test]
    fn train_spacing_is_pi_over_epsilon() {
        let k = 7.0 * PI / 50.0;
        let eps = 2.0 * ((1.5 - k.cos()).powi(2) + k.sin().powi(2)).sqrt();
        assert!((PI / eps - 2.1465).abs() < 1e-4);
        let basis = Tfim::default().kernel(1.5, k).eigenbasis().unwrap();
        assert!((2.0 * PI / (basis.e_plus - basis.e_minus) - PI / eps).abs() < 1e-14);
    }

    #[test]
    fn rate_trace_rejects_unsorted_grid() {
        let coeffs = sudden(0.5, 1.5, 4);
        assert!(rate_trace(&coeffs, 4, &[0.0, 0.2, 0.1]).is_err());
        assert!(rate_trace(&coeffs, 0, &[0.0]).is_err());
    }

    #[test]
    fn exact_zero_is_flagged() {
        let c = OverlapCoefficients {
            a: Complex64::new(0.5, 0.0),
            b: Complex64::new(0.5, 0.0),
            e_minus: -1.0,
            e_plus: 1.0,
            pop_minus: 0.5,
            pop_plus: 0.5,
            phase: Some(0.0),
        };
        let t_c = PI / 2.0;
        let trace = rate_trace(&[c], 2, &[0.0, t_c]).unwrap();
        assert!(trace.exact_zero[1]);
        assert!(trace.rate[1].is_infinite());
        assert_eq!(trace.echo[1], 0.0);
        assert!(!trace.exact_zero[0]);
    }

    #[test]
    fn time_grid_includes_end_point() {
        let g = time_grid(1.0, 0.25).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(time_grid(20.0, 1e-3).unwrap().len(), 20001);
        assert!(time_grid(1.0, 0.0).is_err());
    }
}
