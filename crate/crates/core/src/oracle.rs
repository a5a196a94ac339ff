//! Dense many-body reference for short periodic chains.
//!
//! Builds `H = -Σ_j [Jx σx_j σx_{j+1} + Jy σy_j σy_{j+1} + h σz_j]` on the
//! `σz` product basis (bit set = spin down), evolves the ground state of
//! `H(h_i)` through the ramp with midpoint-field short-time propagators and
//! then through the hold stage with the exact eigendecomposition of
//! `H(h_f)`. Only `|G|²` is compared against the momentum-space product.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LezError, Result};
use crate::ramp::RampSchedule;

pub const MAX_SITES: usize = 12;
pub const MIN_SITES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    /// `Π σz = +1`, the sector of the ground state.
    EvenParity,
    Full,
}

/// Periodic XY/Ising chain on the dense spin basis.
#[derive(Debug, Clone)]
pub struct DenseSpinSystem {
    pub n: usize,
    pub jx: f64,
    pub jy: f64,
    /// Basis states (bit patterns) of the chosen sector.
    basis: Vec<u32>,
    /// Off-diagonal bond terms `(row, col, value)` in sector indices.
    bonds: Vec<(usize, usize, f64)>,
    /// `-Σ_j σz_j` per basis state; the field term is `h` times this.
    field_diag: Vec<f64>,
}

impl DenseSpinSystem {
    pub fn new(n: usize, jx: f64, jy: f64, sector: Sector) -> Result<Self> {
        if !(MIN_SITES..=MAX_SITES).contains(&n) || !n.is_multiple_of(2) {
            return Err(LezError::invalid(format!(
                "dense chain needs an even N in {MIN_SITES}..={MAX_SITES}, got {n}"
            )));
        }
        let basis: Vec<u32> = (0..1u32 << n)
            .filter(|s| sector == Sector::Full || s.count_ones() % 2 == 0)
            .collect();
        let mut index = vec![usize::MAX; 1 << n];
        for (i, &s) in basis.iter().enumerate() {
            index[s as usize] = i;
        }
        let mut bonds = Vec::new();
        let mut field_diag = Vec::with_capacity(basis.len());
        for (col, &s) in basis.iter().enumerate() {
            let up = n as f64 - 2.0 * s.count_ones() as f64;
            field_diag.push(-up);
            for j in 0..n {
                let j2 = (j + 1) % n;
                let flipped = s ^ (1 << j) ^ (1 << j2);
                let same = ((s >> j) & 1) == ((s >> j2) & 1);
                // σx σx flips both spins with amplitude 1; σy σy gives -1 for
                // parallel pairs and +1 for antiparallel ones.
                let yy = if same { -1.0 } else { 1.0 };
                let value = -(jx + jy * yy);
                if value != 0.0 {
                    bonds.push((index[flipped as usize], col, value));
                }
            }
        }
        Ok(Self { n, jx, jy, basis, bonds, field_diag })
    }

    /// Ising chain with `J = 1`.
    pub fn ising(n: usize, sector: Sector) -> Result<Self> {
        Self::new(n, 1.0, 0.0, sector)
    }

    /// XY chain with anisotropy `κ`: `Jx = (1+κ)/2`, `Jy = (1-κ)/2`.
    pub fn xy(n: usize, kappa: f64, sector: Sector) -> Result<Self> {
        Self::new(n, 0.5 * (1.0 + kappa), 0.5 * (1.0 - kappa), sector)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    pub fn hamiltonian(&self, h: f64) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, f) in self.field_diag.iter().enumerate() {
            m[(i, i)] = h * f;
        }
        for &(r, c, v) in &self.bonds {
            m[(r, c)] += v;
        }
        m
    }

    pub fn apply(&self, h: f64, x: &[Complex64], y: &mut [Complex64]) {
        for (i, (yi, xi)) in y.iter_mut().zip(x).enumerate() {
            *yi = xi * (h * self.field_diag[i]);
        }
        for &(r, c, v) in &self.bonds {
            y[r] += x[c] * v;
        }
    }

    /// Upper bound on the spectral radius of `H(h)`.
    pub fn norm_bound(&self, h: f64) -> f64 {
        self.n as f64 * (self.jx.abs() + self.jy.abs() + h.abs())
    }

    /// `exp(-i H(h) dt) ψ` by a Taylor series, sub-stepped so that `‖H dt‖ <= 1`.
    pub fn propagate(&self, h: f64, dt: f64, psi: &mut [Complex64]) {
        let pieces = (self.norm_bound(h) * dt.abs()).ceil().max(1.0) as usize;
        let dt = dt / pieces as f64;
        let mut term = vec![Complex64::default(); psi.len()];
        let mut next = vec![Complex64::default(); psi.len()];
        for _ in 0..pieces {
            term.copy_from_slice(psi);
            for order in 1..=40 {
                self.apply(h, &term, &mut next);
                let scale = Complex64::new(0.0, -dt / order as f64);
                let mut size = 0.0f64;
                for (t, nx) in term.iter_mut().zip(&next) {
                    *t = nx * scale;
                    size = size.max(t.norm());
                }
                for (p, t) in psi.iter_mut().zip(&term) {
                    *p += t;
                }
                if size < 1e-17 {
                    break;
                }
            }
        }
    }

    /// Expectation of `Π σz` for a normalized state.
    pub fn parity_expectation(&self, psi: &[Complex64]) -> f64 {
        self.basis
            .iter()
            .zip(psi)
            .map(|(s, a)| if s.count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }
}

/// Lowest eigenpair of `H(h)` in the system's sector.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: Vec<f64>,
}

pub fn ground_state(system: &DenseSpinSystem, h: f64) -> GroundState {
    let eig = SymmetricEigen::new(system.hamiltonian(h));
    let (idx, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    GroundState {
        energy,
        state: eig.eigenvectors.column(idx).iter().copied().collect(),
    }
}

/// Even-parity ground state of the Ising chain (`J = 1`).
pub fn exact_ground_state(n: usize, h: f64) -> Result<GroundState> {
    Ok(ground_state(&DenseSpinSystem::ising(n, Sector::EvenParity)?, h))
}

/// Dense-oracle Loschmidt echo samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleTrace {
    pub times: Vec<f64>,
    pub echo: Vec<f64>,
    /// Number of midpoint steps used for the ramp.
    pub ramp_steps: usize,
    /// Largest `| ‖ψ‖² - 1 |` after the ramp.
    pub norm_drift: f64,
    /// Largest `|G|²` change between the last two step counts.
    pub halving_deviation: f64,
}

/// Ramp with `steps` midpoint propagators; returns the post-ramp state.
fn ramp_state(system: &DenseSpinSystem, schedule: &RampSchedule, initial: &[f64], steps: usize) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = initial.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    if schedule.duration == 0.0 {
        return psi;
    }
    let dt = schedule.duration / steps as f64;
    for s in 0..steps {
        let mid = schedule.drive((s as f64 + 0.5) * dt);
        system.propagate(mid, dt, &mut psi);
    }
    psi
}

fn hold_echo(eig: &SymmetricEigen<f64, nalgebra::Dyn>, initial: &[f64], post: &[Complex64], times: &[f64]) -> Vec<f64> {
    let d = initial.len();
    let weights: Vec<(f64, Complex64)> = (0..d)
        .map(|n| {
            let col = eig.eigenvectors.column(n);
            let bra: f64 = col.iter().zip(initial).map(|(a, b)| a * b).sum();
            let ket: Complex64 = col.iter().zip(post).map(|(a, b)| b * *a).sum();
            (eig.eigenvalues[n], ket * bra)
        })
        .collect();
    times
        .iter()
        .map(|&t| {
            weights
                .iter()
                .map(|(e, w)| w * Complex64::from_polar(1.0, -e * t))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect()
}

/// Tolerance of the step-halving check.
pub const HALVING_TOL: f64 = 1e-6;

/// `|<φ_i| e^{-i H_f t} U_ramp |φ_i>|²` on the dense basis.
///
/// `steps` is the initial number of ramp steps (default 2000); it is doubled
/// until two successive counts agree to [`HALVING_TOL`] on every sample, at
/// most six times.
pub fn exact_loschmidt_on(
    system: &DenseSpinSystem,
    schedule: &RampSchedule,
    times: &[f64],
    steps: Option<usize>,
) -> Result<OracleTrace> {
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(LezError::invalid("hold times must be non-negative"));
    }
    let initial = ground_state(system, schedule.start).state;
    let hold = SymmetricEigen::new(system.hamiltonian(schedule.end));

    let mut steps = steps.unwrap_or(2000).max(1);
    let mut post = ramp_state(system, schedule, &initial, steps);
    let mut echo = hold_echo(&hold, &initial, &post, times);
    let mut deviation = 0.0;
    if schedule.duration > 0.0 {
        let mut converged = false;
        for _ in 0..6 {
            steps *= 2;
            let finer = ramp_state(system, schedule, &initial, steps);
            let finer_echo = hold_echo(&hold, &initial, &finer, times);
            deviation = echo
                .iter()
                .zip(&finer_echo)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            post = finer;
            echo = finer_echo;
            if deviation < HALVING_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LezError::StepNotConverged { deviation });
        }
    }
    let norm_drift = (post.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs();
    Ok(OracleTrace {
        times: times.to_vec(),
        echo,
        ramp_steps: steps,
        norm_drift,
        halving_deviation: deviation,
    })
}

/// Ising-chain oracle, `h_i → h_f` over `tau`.
pub fn exact_loschmidt(
    n: usize,
    h_i: f64,
    h_f: f64,
    tau: f64,
    times: &[f64],
    steps: Option<usize>,
) -> Result<OracleTrace> {
    let system = DenseSpinSystem::ising(n, Sector::EvenParity)?;
    exact_loschmidt_on(&system, &RampSchedule::new(h_i, h_f, tau)?, times, steps)
}
