use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// State of one momentum mode in its two-dimensional subspace.
///
/// For the spin chains the basis is (no pair, pair), i.e. the mode state
/// `u |0> + v c†_k c†_{-k} |0>`. For two-band lattice models it is the
/// sublattice basis (A, B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorState {
    pub u: Complex64,
    pub v: Complex64,
}

impl SpinorState {
    pub fn new(u: Complex64, v: Complex64) -> Self {
        Self { u, v }
    }

    pub fn from_real(u: f64, v: f64) -> Self {
        Self::new(Complex64::new(u, 0.0), Complex64::new(v, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.u.norm_sqr() + self.v.norm_sqr()
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &SpinorState) -> Complex64 {
        self.u.conj() * other.u + self.v.conj() * other.v
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::new(self.u * z, self.v * z)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self::new(self.u / n, self.v / n)
    }

    /// Fix the global phase so that the first component is real and
    /// non-negative (or the second one, if the first vanishes).
    pub fn gauge_fixed(&self) -> Self {
        let pivot = if self.u.norm() > 1e-300 { self.u } else { self.v };
        let phase = pivot.conj() / pivot.norm();
        self.scale(phase)
    }

    /// Largest componentwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &SpinorState) -> f64 {
        (self.u - other.u).norm().max((self.v - other.v).norm())
    }
}
