//! Momentum-mode Hamiltonians of the transverse-field Ising chain, the
//! anisotropic XY chain and the Haldane honeycomb model.
//!
//! Each model reduces to an independent 2×2 problem per momentum,
//! `K = d0·1 + dx·σx + dy·σy + dz·σz`, whose coefficients depend on a
//! single scalar drive (the transverse field `h` for the chains, the
//! next-nearest-neighbour phase `θ` for Haldane). For the chains the
//! two-level basis is (no pair, pair) of the `±k` fermion pair, so the
//! many-body ground state corresponds to the lower eigenvector.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LezError, Result};
use crate::spinor::SpinorState;

/// Gaps below this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Pauli decomposition of a 2×2 Hermitian mode Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub d0: f64,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

/// Eigenpairs of a kernel, `e_plus >= e_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalEigenbasis {
    pub e_minus: f64,
    pub e_plus: f64,
    pub minus: SpinorState,
    pub plus: SpinorState,
}

impl Kernel {
    pub fn new(d0: f64, dx: f64, dy: f64, dz: f64) -> Self {
        Self { d0, dx, dy, dz }
    }

    /// |d|, half the gap.
    pub fn magnitude(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }

    pub fn gap(&self) -> f64 {
        2.0 * self.magnitude()
    }

    /// Row-major dense matrix.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let off = Complex64::new(self.dx, -self.dy);
        [
            [Complex64::new(self.d0 + self.dz, 0.0), off],
            [off.conj(), Complex64::new(self.d0 - self.dz, 0.0)],
        ]
    }

    pub fn apply(&self, s: &SpinorState) -> SpinorState {
        let m = self.matrix();
        SpinorState::new(m[0][0] * s.u + m[0][1] * s.v, m[1][0] * s.u + m[1][1] * s.v)
    }

    /// `<s|K|s>` for a normalized spinor.
    pub fn expectation(&self, s: &SpinorState) -> f64 {
        s.inner(&self.apply(s)).re
    }

    pub fn eigenbasis(&self) -> Result<FinalEigenbasis> {
        let r = self.magnitude();
        if 2.0 * r < DEGENERACY_TOL {
            return Err(LezError::DegenerateKernel { gap: 2.0 * r });
        }
        let (dx, dy, dz) = (self.dx, self.dy, self.dz);
        // Pick the branch that avoids cancellation in r ± dz.
        let minus = if dz <= 0.0 {
            SpinorState::new(Complex64::new(r - dz, 0.0), -Complex64::new(dx, dy))
        } else {
            SpinorState::new(-Complex64::new(dx, -dy), Complex64::new(r + dz, 0.0))
        };
        let plus = if dz >= 0.0 {
            SpinorState::new(Complex64::new(r + dz, 0.0), Complex64::new(dx, dy))
        } else {
            SpinorState::new(Complex64::new(dx, -dy), Complex64::new(r - dz, 0.0))
        };
        Ok(FinalEigenbasis {
            e_minus: self.d0 - r,
            e_plus: self.d0 + r,
            minus: minus.normalized().gauge_fixed(),
            plus: plus.normalized().gauge_fixed(),
        })
    }

    /// Lower eigenvector, gauge-fixed so its first component is real and
    /// non-negative.
    pub fn ground_spinor(&self) -> Result<SpinorState> {
        Ok(self.eigenbasis()?.minus)
    }
}

/// A family of mode kernels parameterized by a scalar drive.
pub trait KernelFamily: Sync {
    type Momentum: Copy + Send + Sync + std::fmt::Debug;

    fn kernel(&self, drive: f64, k: Self::Momentum) -> Kernel;
}

/// Transverse-field Ising chain `H = -Σ (J σx σx + h σz)`, drive = h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tfim {
    pub j: f64,
}

impl Default for Tfim {
    fn default() -> Self {
        Self { j: 1.0 }
    }
}

impl Tfim {
    pub fn new(j: f64) -> Result<Self> {
        if !(j > 0.0 && j.is_finite()) {
            return Err(LezError::invalid(format!("coupling J must be positive, got {j}")));
        }
        Ok(Self { j })
    }

    /// The Nambu-basis matrix `2[[h - J cos k, J sin k], [J sin k, J cos k - h]]`
    /// acting on `(c_k, c†_{-k})`. It equals `-σz K σz` for the pair-basis
    /// kernel `K` returned by [`KernelFamily::kernel`].
    pub fn nambu_matrix(&self, h: f64, k: f64) -> [[f64; 2]; 2] {
        let (s, c) = k.sin_cos();
        let j = self.j;
        [[2.0 * (h - j * c), 2.0 * j * s], [2.0 * j * s, 2.0 * (j * c - h)]]
    }
}

impl KernelFamily for Tfim {
    type Momentum = f64;

    fn kernel(&self, h: f64, k: f64) -> Kernel {
        let (s, c) = k.sin_cos();
        Kernel::new(0.0, 2.0 * self.j * s, 0.0, 2.0 * (self.j * c - h))
    }
}

/// Anisotropic XY chain
/// `H = -Σ [(1+κ)/2 σx σx + (1-κ)/2 σy σy + h σz]`, drive = h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Xy {
    pub kappa: f64,
}

impl Xy {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(LezError::invalid(format!("anisotropy must lie in (0, 1], got {kappa}")));
        }
        Ok(Self { kappa })
    }
}

impl KernelFamily for Xy {
    type Momentum = f64;

    fn kernel(&self, h: f64, k: f64) -> Kernel {
        let (s, c) = k.sin_cos();
        // Same expression shape as the Ising kernel so that κ = 1 is bitwise identical.
        Kernel::new(0.0, 2.0 * self.kappa * s, 0.0, 2.0 * (1.0 * c - h))
    }
}

/// Closed-form single-mode spectrum of the Ising chain at `J = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimSpectrum {
    pub epsilon: f64,
    pub u: f64,
    pub v: f64,
}

/// `ε_k = 2√((h - cos k)² + sin² k)` together with the Bogoliubov
/// amplitudes `u_k = (ε/2 + h - cos k)/√(ε(ε/2 + h - cos k))`,
/// `v_k = -sin k/√(ε(ε/2 + h - cos k))`.
pub fn tfim_spectrum(h: f64, k: f64) -> Result<TfimSpectrum> {
    if !(k > 0.0 && k < PI) {
        return Err(LezError::invalid(format!("momentum must lie strictly inside (0, π), got {k}")));
    }
    if !(h >= 0.0 && h.is_finite()) {
        return Err(LezError::invalid(format!("field must be non-negative, got {h}")));
    }
    let (s, c) = k.sin_cos();
    let epsilon = 2.0 * ((h - c).powi(2) + s * s).sqrt();
    let shifted = epsilon / 2.0 + h - c;
    let denom = (epsilon * shifted).sqrt();
    Ok(TfimSpectrum {
        epsilon,
        u: shifted / denom,
        v: -s / denom,
    })
}

/// Which way the honeycomb is laid out in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoneycombOrientation {
    /// Nearest-neighbour vectors (1/2, √3/2), (1/2, -√3/2), (-1, 0).
    BondAlongX,
    /// Nearest-neighbour vectors (0, 1), (√3/2, -1/2), (-√3/2, -1/2).
    BondAlongY,
}

/// Lattice layout and sign of the `sin θ` mass term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaldaneConvention {
    pub orientation: HoneycombOrientation,
    /// +1 or -1 in `dz = M + sign · 2 t2 sin θ Σ sin(k·b_j)`.
    pub mass_sign: f64,
}

impl HaldaneConvention {
    /// Search order used when the convention is fixed against a reference point.
    pub const CANDIDATES: [HaldaneConvention; 4] = [
        HaldaneConvention { orientation: HoneycombOrientation::BondAlongX, mass_sign: 1.0 },
        HaldaneConvention { orientation: HoneycombOrientation::BondAlongX, mass_sign: -1.0 },
        HaldaneConvention { orientation: HoneycombOrientation::BondAlongY, mass_sign: 1.0 },
        HaldaneConvention { orientation: HoneycombOrientation::BondAlongY, mass_sign: -1.0 },
    ];

    pub fn nearest_neighbours(&self) -> [[f64; 2]; 3] {
        let h = 3f64.sqrt() / 2.0;
        match self.orientation {
            HoneycombOrientation::BondAlongX => [[0.5, h], [0.5, -h], [-1.0, 0.0]],
            HoneycombOrientation::BondAlongY => [[0.0, 1.0], [h, -0.5], [-h, -0.5]],
        }
    }

    /// `b1 = δ2 - δ3`, `b2 = δ3 - δ1`, `b3 = δ1 - δ2`.
    pub fn next_nearest_neighbours(&self) -> [[f64; 2]; 3] {
        let d = self.nearest_neighbours();
        let sub = |a: [f64; 2], b: [f64; 2]| [a[0] - b[0], a[1] - b[1]];
        [sub(d[1], d[2]), sub(d[2], d[0]), sub(d[0], d[1])]
    }

    /// Primitive vectors `a1 = δ1 - δ3`, `a2 = δ2 - δ3`.
    pub fn lattice_vectors(&self) -> [[f64; 2]; 2] {
        let d = self.nearest_neighbours();
        [[d[0][0] - d[2][0], d[0][1] - d[2][1]], [d[1][0] - d[2][0], d[1][1] - d[2][1]]]
    }

    /// Reciprocal vectors with `a_i · G_j = 2π δ_ij`.
    pub fn reciprocal_vectors(&self) -> [[f64; 2]; 2] {
        let [a1, a2] = self.lattice_vectors();
        let det = a1[0] * a2[1] - a1[1] * a2[0];
        let s = 2.0 * PI / det;
        [[a2[1] * s, -a2[0] * s], [-a1[1] * s, a1[0] * s]]
    }
}

/// Haldane model on the honeycomb lattice, drive = θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Haldane {
    pub t1: f64,
    pub t2: f64,
    pub mass: f64,
    pub convention: HaldaneConvention,
}

impl Haldane {
    pub fn new(t1: f64, t2: f64, mass: f64, convention: HaldaneConvention) -> Result<Self> {
        if !(t1 > 0.0) {
            return Err(LezError::invalid(format!("t1 must be positive, got {t1}")));
        }
        if !(t2 >= 0.0) {
            return Err(LezError::invalid(format!("t2 must be non-negative, got {t2}")));
        }
        if !mass.is_finite() {
            return Err(LezError::invalid("staggered potential must be finite"));
        }
        Ok(Self { t1, t2, mass, convention })
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl KernelFamily for Haldane {
    type Momentum = [f64; 2];

    fn kernel(&self, theta: f64, k: [f64; 2]) -> Kernel {
        let mut f = Complex64::new(0.0, 0.0);
        for delta in self.convention.nearest_neighbours() {
            f += Complex64::from_polar(1.0, dot(k, delta));
        }
        f *= self.t1;
        let (mut sin_sum, mut cos_sum) = (0.0, 0.0);
        for b in self.convention.next_nearest_neighbours() {
            let (s, c) = dot(k, b).sin_cos();
            sin_sum += s;
            cos_sum += c;
        }
        let (st, ct) = theta.sin_cos();
        Kernel::new(
            2.0 * self.t2 * ct * cos_sum,
            f.re,
            f.im,
            self.mass + self.convention.mass_sign * 2.0 * self.t2 * st * sin_sum,
        )
    }
}

/// Critical NNN phases where the gap closes: `|M| = 3√3 t2 |sin θ|`,
/// θ ∈ [-π, π], sorted ascending. Empty when `|M| > 3√3 t2`.
pub fn haldane_phase_boundary(t2: f64, mass: f64) -> Result<Vec<f64>> {
    if !(t2 > 0.0) {
        return Err(LezError::invalid(format!("t2 must be positive, got {t2}")));
    }
    let ratio = mass.abs() / (3.0 * 3f64.sqrt() * t2);
    if ratio > 1.0 {
        return Ok(Vec::new());
    }
    let base = ratio.asin();
    let mut roots = vec![-PI + base, -base, base, PI - base];
    if base == 0.0 {
        roots = vec![-PI, 0.0, PI];
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    Ok(roots)
}

/// Shape of a momentum grid; `mode_count` normalizes the rate function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSize {
    Chain { n: usize },
    Plane { lx: usize, ly: usize },
}

impl GridSize {
    pub fn mode_count(&self) -> usize {
        match *self {
            GridSize::Chain { n } => n,
            GridSize::Plane { lx, ly } => lx * ly,
        }
    }
}

/// Momenta entering the Loschmidt product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid<K> {
    pub size: GridSize,
    pub momenta: Vec<K>,
}

impl<K> ModeGrid<K> {
    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }
}

/// Positive half of the even-parity pseudo-momenta, `(2j-1)π/N` for `j = 1..=N/2`.
pub fn chain_grid(n: usize) -> Result<ModeGrid<f64>> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(LezError::invalid(format!("chain length must be even and >= 2, got {n}")));
    }
    let momenta = (1..=n / 2)
        .map(|j| (2 * j - 1) as f64 * PI / n as f64)
        .collect();
    Ok(ModeGrid { size: GridSize::Chain { n }, momenta })
}

/// Momentum `(2j-1)π/N` for a one-based mode index `j`.
pub fn chain_momentum(n: usize, j: usize) -> Result<f64> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(LezError::invalid(format!("chain length must be even and >= 2, got {n}")));
    }
    if j == 0 || j > n / 2 {
        return Err(LezError::invalid(format!("mode index must lie in 1..={}, got {j}", n / 2)));
    }
    Ok((2 * j - 1) as f64 * PI / n as f64)
}

/// Full Brillouin-zone grid `k = (m/Lx) G1 + (n/Ly) G2`, `m` slow.
pub fn honeycomb_grid(convention: &HaldaneConvention, lx: usize, ly: usize) -> Result<ModeGrid<[f64; 2]>> {
    if lx == 0 || ly == 0 {
        return Err(LezError::invalid("honeycomb grid dimensions must be positive"));
    }
    let [g1, g2] = convention.reciprocal_vectors();
    let mut momenta = Vec::with_capacity(lx * ly);
    for m in 0..lx {
        for n in 0..ly {
            let (a, b) = (m as f64 / lx as f64, n as f64 / ly as f64);
            momenta.push([a * g1[0] + b * g2[0], a * g1[1] + b * g2[1]]);
        }
    }
    Ok(ModeGrid { size: GridSize::Plane { lx, ly }, momenta })
}

/// Where a momentum sits relative to the `Lx × Ly` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridLocation {
    /// Fractional grid coordinates `(k·a1 Lx/2π, k·a2 Ly/2π)`.
    pub coords: [f64; 2],
    pub nearest_index: [i64; 2],
    pub nearest: [f64; 2],
    pub distance: f64,
    pub on_grid: bool,
}

pub fn locate_on_grid(convention: &HaldaneConvention, k: [f64; 2], lx: usize, ly: usize) -> GridLocation {
    let [a1, a2] = convention.lattice_vectors();
    let [g1, g2] = convention.reciprocal_vectors();
    let coords = [
        dot(k, a1) * lx as f64 / (2.0 * PI),
        dot(k, a2) * ly as f64 / (2.0 * PI),
    ];
    let idx = [coords[0].round(), coords[1].round()];
    let (a, b) = (idx[0] / lx as f64, idx[1] / ly as f64);
    let nearest = [a * g1[0] + b * g2[0], a * g1[1] + b * g2[1]];
    let distance = ((k[0] - nearest[0]).powi(2) + (k[1] - nearest[1]).powi(2)).sqrt();
    GridLocation {
        coords,
        nearest_index: [idx[0] as i64, idx[1] as i64],
        nearest,
        distance,
        on_grid: distance < 1e-9,
    }
}
