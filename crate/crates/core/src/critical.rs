//! Tuning the ramp duration so a discrete mode satisfies `|A| = |B|`.
//!
//! The signed residual `|A| - |B|` of a mode is scanned on a log-spaced
//! grid of ramp durations; every sign change is refined with Brent's
//! method. The smallest mode `π/N` gives the longest critical duration
//! `τ_max`, whose growth with `N` is fitted to a power law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LezError, Result};
use crate::loschmidt::{critical_times, mode_coefficients, CriticalTimeTrain, OverlapCoefficients};
use crate::models::{chain_grid, Haldane, HaldaneConvention, KernelFamily, Xy};
use crate::ramp::RampSchedule;
use crate::roots::{brent, log_space, sign_change_brackets};

/// Log-spaced grid of ramp durations used to bracket roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauScan {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl TauScan {
    pub const DEFAULT_POINTS: usize = 400;

    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
            return Err(LezError::invalid(format!(
                "tau scan needs 0 < lo < hi and >= 2 points, got [{lo}, {hi}] x {points}"
            )));
        }
        Ok(Self { lo, hi, points })
    }

    /// `[1e-3, 10 N²]` with 400 points.
    pub fn for_chain(n: usize) -> Self {
        let n = n.max(2) as f64;
        Self { lo: 1e-3, hi: 10.0 * n * n, points: Self::DEFAULT_POINTS }
    }

    pub fn grid(&self) -> Vec<f64> {
        log_space(self.lo, self.hi, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootChoice {
    Smallest,
    Largest,
}

/// Numerical knobs of the critical-rate search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Integrator tolerance while scanning for sign changes.
    pub scan_tolerance: f64,
    /// Integrator tolerance during root refinement.
    pub refine_tolerance: f64,
    /// Target `| |A| - |B| |` at the root.
    pub residual_tolerance: f64,
    /// Target bracket width relative to the root.
    pub bracket_rel_tolerance: f64,
    /// Number of critical times attached to each result.
    pub n_max: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            scan_tolerance: 1e-7,
            refine_tolerance: 1e-12,
            residual_tolerance: 1e-10,
            bracket_rel_tolerance: 1e-8,
            n_max: 10,
        }
    }
}

/// A ramp duration at which one mode hosts exact Loschmidt zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRateResult<K> {
    pub k: K,
    pub tau_c: f64,
    /// `|A| - |B|` at `tau_c`.
    pub residual: f64,
    pub bracket: [f64; 2],
    pub phase: f64,
    pub coefficients: OverlapCoefficients,
    pub train: CriticalTimeTrain,
}

/// Signed `|A| - |B|` for one mode after a ramp of duration `tau`.
pub fn lez_residual<F: KernelFamily>(
    family: &F,
    start: f64,
    end: f64,
    k: F::Momentum,
    tau: f64,
    tolerance: f64,
) -> Result<f64> {
    let schedule = RampSchedule::new(start, end, tau)?;
    Ok(mode_coefficients(family, &schedule, k, tolerance)?.residual())
}

/// Residual samples of one mode over the scan grid.
pub fn residual_scan<F: KernelFamily>(
    family: &F,
    start: f64,
    end: f64,
    k: F::Momentum,
    scan: &TauScan,
    tolerance: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let taus = scan.grid();
    let values = taus
        .par_iter()
        .map(|&tau| lez_residual(family, start, end, k, tau, tolerance))
        .collect::<Result<Vec<_>>>()?;
    Ok((taus, values))
}

/// Sign-change brackets `[τ_lo, τ_hi]` of the residual in the scan range.
pub fn residual_brackets<F: KernelFamily>(
    family: &F,
    start: f64,
    end: f64,
    k: F::Momentum,
    scan: &TauScan,
    tolerance: f64,
) -> Result<Vec<[f64; 2]>> {
    let (taus, values) = residual_scan(family, start, end, k, scan, tolerance)?;
    Ok(sign_change_brackets(&taus, &values)
        .into_iter()
        .map(|(i, j)| [taus[i], taus[j]])
        .collect())
}

fn refine<F: KernelFamily>(
    family: &F,
    start: f64,
    end: f64,
    k: F::Momentum,
    bracket: [f64; 2],
    opts: &SolveOptions,
) -> Result<CriticalRateResult<F::Momentum>> {
    let f = |tau: f64| lez_residual(family, start, end, k, tau, opts.refine_tolerance);
    let (lo, hi) = (bracket[0], bracket[1]);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        // Scan and refinement tolerances disagree on the sign at an end point.
        return Err(LezError::NoRootInRange { lo, hi });
    }
    let root = brent(f, lo, hi, flo, fhi, opts.bracket_rel_tolerance, opts.residual_tolerance)?;
    let schedule = RampSchedule::new(start, end, root.x)?;
    let coefficients = mode_coefficients(family, &schedule, k, opts.refine_tolerance)?;
    let train = critical_times(&coefficients, opts.n_max)?;
    Ok(CriticalRateResult {
        k,
        tau_c: root.x,
        residual: coefficients.residual(),
        bracket: [root.lo, root.hi],
        phase: train.phase,
        coefficients,
        train,
    })
}

/// Every bracketed root of the residual in the scan range, ascending.
pub fn find_all_tau_c<F: KernelFamily>(
    family: &F,
    start: f64,
    end: f64,
    k: F::Momentum,
    scan: &TauScan,
    opts: &SolveOptions,
) -> Result<Vec<CriticalRateResult<F::Momentum>>> {
    residual_brackets(family, start, end, k, scan, opts.scan_tolerance)?
        .into_iter()
        .map(|b| refine(family, start, end, k, b, opts))
        .collect()
}

/// The smallest (or largest) critical duration of mode `k` in the scan range.
pub fn find_tau_c<F: KernelFamily>(
    family: &F,
    start: f64,
    end: f64,
    k: F::Momentum,
    scan: &TauScan,
    choice: RootChoice,
    opts: &SolveOptions,
) -> Result<CriticalRateResult<F::Momentum>> {
    let brackets = residual_brackets(family, start, end, k, scan, opts.scan_tolerance)?;
    let picked = match choice {
        RootChoice::Smallest => brackets.first(),
        RootChoice::Largest => brackets.last(),
    };
    match picked {
        Some(&b) => refine(family, start, end, k, b, opts),
        None => Err(LezError::NoRootInRange { lo: scan.lo, hi: scan.hi }),
    }
}

/// Momentum at which a sudden quench between fields `h_i` and `h_f` of the
/// Ising chain admits a Loschmidt zero:
/// `k_s = 2 atan(√(-(h_i-1)(h_f-1)) / √((1+h_i)(1+h_f)))`.
pub fn sudden_ks(h_i: f64, h_f: f64) -> Result<f64> {
    if !(h_i > 0.0 && h_f > 0.0) || !h_i.is_finite() || !h_f.is_finite() {
        return Err(LezError::invalid(format!("fields must be positive, got {h_i}, {h_f}")));
    }
    let product = (h_i - 1.0) * (h_f - 1.0);
    if !(product < 0.0) {
        return Err(LezError::NoRealSolution { h_i, h_f });
    }
    Ok(2.0 * ((-product).sqrt() / ((1.0 + h_i) * (1.0 + h_f)).sqrt()).atan())
}

/// Largest critical duration of the smallest chain mode `π/N`.
pub fn tau_max<F: KernelFamily<Momentum = f64>>(
    family: &F,
    h_i: f64,
    h_f: f64,
    n: usize,
    scan: &TauScan,
    opts: &SolveOptions,
) -> Result<CriticalRateResult<f64>> {
    let k = chain_grid(n)?.momenta[0];
    find_tau_c(family, h_i, h_f, k, scan, RootChoice::Largest, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub tau_max: f64,
}

/// `τ_max(N) ≈ prefactor · N^exponent` from a plain least-squares line in log-log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub prefactor: f64,
    pub exponent: f64,
    /// RMS of `ln τ - (ln a + b ln N)`.
    pub rms_log_residual: f64,
    pub points: Vec<ScalingPoint>,
}

pub fn fit_power_law(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 5 {
        return Err(LezError::invalid(format!("power-law fit needs >= 5 sizes, got {}", points.len())));
    }
    if points.iter().any(|p| p.n == 0 || !(p.tau_max > 0.0)) {
        return Err(LezError::invalid("power-law fit needs positive sizes and durations"));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.tau_max.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LezError::invalid("power-law fit needs at least two distinct sizes"));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(ScalingFit {
        prefactor: intercept.exp(),
        exponent,
        rms_log_residual: rms,
        points: points.to_vec(),
    })
}

/// `τ_max` for each chain length, then the log-log fit.
pub fn scaling_fit<F: KernelFamily<Momentum = f64>>(
    family: &F,
    h_i: f64,
    h_f: f64,
    sizes: &[usize],
    opts: &SolveOptions,
) -> Result<ScalingFit> {
    if sizes.len() < 5 {
        return Err(LezError::invalid(format!("scaling needs >= 5 sizes, got {}", sizes.len())));
    }
    if let Some(bad) = sizes.iter().find(|&&n| n < 2 || !n.is_multiple_of(2)) {
        return Err(LezError::invalid(format!("chain sizes must be even, got {bad}")));
    }
    let points = sizes
        .iter()
        .map(|&n| {
            tau_max(family, h_i, h_f, n, &TauScan::for_chain(n), opts).map(|r| ScalingPoint { n, tau_max: r.tau_c })
        })
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(&points)
}

/// A chain mode whose residual changes sign in the scan range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunableMode {
    /// One-based `j` in `k = (2j-1)π/N`.
    pub index: usize,
    pub k: f64,
    pub brackets: Vec<[f64; 2]>,
}

/// All modes of an `N`-site chain that can be tuned to `|A| = |B|`.
pub fn lez_modes<F: KernelFamily<Momentum = f64>>(
    family: &F,
    h_i: f64,
    h_f: f64,
    n: usize,
    scan: &TauScan,
    tolerance: f64,
) -> Result<Vec<TunableMode>> {
    let grid = chain_grid(n)?;
    let mut out = Vec::new();
    for (i, &k) in grid.momenta.iter().enumerate() {
        let brackets = residual_brackets(family, h_i, h_f, k, scan, tolerance).map_err(|e| e.at_mode(i))?;
        if !brackets.is_empty() {
            out.push(TunableMode { index: i + 1, k, brackets });
        }
    }
    Ok(out)
}

pub fn xy_lez_modes(kappa: f64, h_i: f64, h_f: f64, n: usize, scan: &TauScan) -> Result<Vec<TunableMode>> {
    lez_modes(&Xy::new(kappa)?, h_i, h_f, n, scan, SolveOptions::default().scan_tolerance)
}

/// Critical ramp duration of the NNN phase `θ_i → θ_f` at one Haldane momentum.
pub fn haldane_find_tau(
    model: &Haldane,
    theta_i: f64,
    theta_f: f64,
    k: [f64; 2],
    scan: &TauScan,
    opts: &SolveOptions,
) -> Result<CriticalRateResult<[f64; 2]>> {
    find_tau_c(model, theta_i, theta_f, k, scan, RootChoice::Smallest, opts)
}

/// Outcome of trying one lattice convention against a reference `(k, τ)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionTrial {
    pub convention: HaldaneConvention,
    pub on_grid: bool,
    /// Critical durations found in the scan range.
    pub roots: Vec<f64>,
    pub matches_reference: bool,
}

/// Try the candidate conventions in order and keep the first whose critical
/// duration at `k` agrees with `reference_tau` to `rel_tol`.
#[allow(clippy::too_many_arguments)]
pub fn select_haldane_convention(
    t1: f64,
    t2: f64,
    mass: f64,
    theta_i: f64,
    theta_f: f64,
    k: [f64; 2],
    l: (usize, usize),
    reference_tau: f64,
    rel_tol: f64,
    scan: &TauScan,
) -> Result<(HaldaneConvention, Vec<ConventionTrial>)> {
    let opts = SolveOptions::default();
    let mut trials = Vec::new();
    for convention in HaldaneConvention::CANDIDATES {
        let model = Haldane::new(t1, t2, mass, convention)?;
        let on_grid = crate::models::locate_on_grid(&convention, k, l.0, l.1).on_grid;
        let roots: Vec<f64> = find_all_tau_c(&model, theta_i, theta_f, k, scan, &opts)?
            .into_iter()
            .map(|r| r.tau_c)
            .collect();
        let matches_reference = roots.iter().any(|t| (t - reference_tau).abs() <= rel_tol * reference_tau);
        trials.push(ConventionTrial { convention, on_grid, roots, matches_reference });
        if matches_reference {
            return Ok((convention, trials));
        }
    }
    Err(LezError::invalid(format!(
        "no lattice convention reproduces tau = {reference_tau} at k = ({}, {})",
        k[0], k[1]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Tfim;
    use std::f64::consts::PI;

    #[test]
    fn sudden_momentum_values() {
        assert!((sudden_ks(0.5, 1.5).unwrap() - 0.50536).abs() < 1e-5);
        let want = 2.0 * (0.9375f64.sqrt() / 4.0625f64.sqrt()).atan();
        assert!((sudden_ks(0.25, 2.25).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.895665).abs() < 1e-6);
        assert!(matches!(sudden_ks(0.5, 0.9), Err(LezError::NoRealSolution { .. })));
        assert!(matches!(sudden_ks(0.0, 1.5), Err(LezError::InvalidParameter(_))));
        // Symmetric in the two fields.
        assert_eq!(sudden_ks(1.5, 0.5).unwrap(), sudden_ks(0.5, 1.5).unwrap());
    }

    #[test]
    fn residual_changes_sign_across_ks_in_sudden_limit() {
        let ks = sudden_ks(0.5, 1.5).unwrap();
        let tfim = Tfim::default();
        let below = lez_residual(&tfim, 0.5, 1.5, ks - 0.01, 1e-6, 1e-10).unwrap();
        let above = lez_residual(&tfim, 0.5, 1.5, ks + 0.01, 1e-6, 1e-10).unwrap();
        assert!(below < 0.0 && above > 0.0);
        assert!(lez_residual(&tfim, 0.5, 1.5, ks, 0.0, 1e-10).unwrap().abs() < 1e-14);
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let points: Vec<ScalingPoint> = [10, 20, 30, 40, 50, 60]
            .iter()
            .map(|&n| ScalingPoint { n, tau_max: 2.0 * (n as f64).powi(3) })
            .collect();
        let fit = fit_power_law(&points).unwrap();
        assert!((fit.prefactor - 2.0).abs() < 1e-10);
        assert!((fit.exponent - 3.0).abs() < 1e-10);
        assert!(fit.rms_log_residual < 1e-12);
        assert!(fit_power_law(&points[..4]).is_err());
    }

    #[test]
    fn scaling_rejects_odd_or_few_sizes() {
        let tfim = Tfim::default();
        let opts = SolveOptions::default();
        assert!(scaling_fit(&tfim, 0.5, 1.5, &[10, 20, 30], &opts).is_err());
        assert!(scaling_fit(&tfim, 0.5, 1.5, &[10, 20, 31, 40, 50], &opts).is_err());
    }

    #[test]
    fn tau_scan_validation() {
        assert!(TauScan::new(0.0, 1.0, 10).is_err());
        assert!(TauScan::new(1.0, 0.5, 10).is_err());
        let s = TauScan::for_chain(50);
        assert_eq!((s.lo, s.hi, s.points), (1e-3, 25_000.0, 400));
    }

    #[test]
    fn equal_drive_has_no_root() {
        let model = Haldane::new(1.0, 1.0, 4.5, HaldaneConvention::CANDIDATES[3]).unwrap();
        let scan = TauScan::new(1e-2, 1e2, 40).unwrap();
        let k = [4.0 * 3f64.sqrt() * PI / 15.0, 2.0 * PI / 3.0];
        let r = haldane_find_tau(&model, 0.3, 0.3, k, &scan, &SolveOptions::default());
        assert!(matches!(r, Err(LezError::NoRootInRange { .. })));
    }
}
