use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use lez_core::{HaldaneConvention, HoneycombOrientation, LezError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Tfim,
    Xy,
    Haldane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum ConventionChoice {
    /// Search the candidate layouts against the reference point.
    #[serde(rename = "auto")]
    #[value(name = "auto")]
    Auto,
    #[serde(rename = "x+")]
    #[value(name = "x+")]
    XPlus,
    #[serde(rename = "x-")]
    #[value(name = "x-")]
    XMinus,
    #[serde(rename = "y+")]
    #[value(name = "y+")]
    YPlus,
    #[serde(rename = "y-")]
    #[value(name = "y-")]
    YMinus,
}

impl ConventionChoice {
    pub fn fixed(self) -> Option<HaldaneConvention> {
        let (orientation, mass_sign) = match self {
            ConventionChoice::Auto => return None,
            ConventionChoice::XPlus => (HoneycombOrientation::BondAlongX, 1.0),
            ConventionChoice::XMinus => (HoneycombOrientation::BondAlongX, -1.0),
            ConventionChoice::YPlus => (HoneycombOrientation::BondAlongY, 1.0),
            ConventionChoice::YMinus => (HoneycombOrientation::BondAlongY, -1.0),
        };
        Some(HaldaneConvention { orientation, mass_sign })
    }
}

/// Chain sizes, given as `10..100:10` (inclusive, step) or `10,20,30`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sizes(pub Vec<usize>);

impl FromStr for Sizes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("cannot parse sizes '{s}' (expected 'lo..hi:step' or a comma list)");
        if let Some((range, step)) = s.split_once(':') {
            let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
            let lo: usize = lo.trim().parse().map_err(|_| bad())?;
            let hi: usize = hi.trim().parse().map_err(|_| bad())?;
            let step: usize = step.trim().parse().map_err(|_| bad())?;
            if step == 0 || hi < lo {
                return Err(bad());
            }
            return Ok(Sizes((lo..=hi).step_by(step).collect()));
        }
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()
            .map(Sizes)
    }
}

impl fmt::Display for Sizes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Every run parameter, as read from a config file or the command line.
/// Unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(long, global = true)]
    pub model: Option<ModelKind>,
    /// Initial transverse field.
    #[arg(long, global = true)]
    pub hi: Option<f64>,
    /// Final transverse field.
    #[arg(long, global = true)]
    pub hf: Option<f64>,
    /// XY anisotropy.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub t1: Option<f64>,
    #[arg(long, global = true)]
    pub t2: Option<f64>,
    /// Haldane staggered potential.
    #[arg(long = "M", global = true)]
    #[serde(alias = "M")]
    pub mass: Option<f64>,
    #[arg(long = "theta-i", global = true)]
    pub theta_i: Option<f64>,
    #[arg(long = "theta-f", global = true)]
    pub theta_f: Option<f64>,
    /// Chain length.
    #[arg(long = "N", global = true)]
    #[serde(alias = "N")]
    pub n: Option<usize>,
    #[arg(long = "Lx", global = true)]
    #[serde(alias = "Lx")]
    pub lx: Option<usize>,
    #[arg(long = "Ly", global = true)]
    #[serde(alias = "Ly")]
    pub ly: Option<usize>,
    /// Ramp duration.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// One-based chain mode `j`, `k = (2j-1)π/N`.
    #[arg(long = "k-index", global = true)]
    pub k_index: Option<usize>,
    #[arg(long = "tf-max", global = true)]
    pub tf_max: Option<f64>,
    #[arg(long = "tf-step", global = true)]
    pub tf_step: Option<f64>,
    /// Integrator tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Lower end of the τ scan.
    #[arg(long = "tau-min", global = true)]
    pub tau_min: Option<f64>,
    /// Upper end of the τ scan.
    #[arg(long = "tau-max", global = true)]
    pub tau_max: Option<f64>,
    #[arg(long = "scan-points", global = true)]
    pub scan_points: Option<usize>,
    #[arg(long, global = true)]
    pub sizes: Option<Sizes>,
    /// Haldane momentum, x component.
    #[arg(long, global = true)]
    pub kx: Option<f64>,
    #[arg(long, global = true)]
    pub ky: Option<f64>,
    #[arg(long, global = true)]
    pub convention: Option<ConventionChoice>,
    /// Critical duration the convention search must reproduce.
    #[arg(long = "reference-tau", global = true)]
    pub reference_tau: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long = "emit-gnuplot", global = true)]
    #[serde(default)]
    pub emit_gnuplot: bool,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig {
            $($f: $top.$f.or($base.$f),)*
            emit_gnuplot: $top.emit_gnuplot || $base.emit_gnuplot,
        }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, LezError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LezError::invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| LezError::invalid(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set in `top` win over those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay_fields!(base, top; model, hi, hf, kappa, t1, t2, mass, theta_i, theta_f, n, lx, ly,
            tau, k_index, tf_max, tf_step, tol, tau_min, tau_max, scan_points, sizes, kx, ky,
            convention, reference_tau, out)
    }

    pub fn resolve(self) -> Result<Settings, LezError> {
        let d = Settings::default();
        let s = Settings {
            model: self.model.unwrap_or(d.model),
            hi: self.hi.unwrap_or(d.hi),
            hf: self.hf.unwrap_or(d.hf),
            kappa: self.kappa.unwrap_or(d.kappa),
            t1: self.t1.unwrap_or(d.t1),
            t2: self.t2.unwrap_or(d.t2),
            mass: self.mass.unwrap_or(d.mass),
            theta_i: self.theta_i.unwrap_or(d.theta_i),
            theta_f: self.theta_f.unwrap_or(d.theta_f),
            n: self.n,
            lx: self.lx.unwrap_or(d.lx),
            ly: self.ly.unwrap_or(d.ly),
            tau: self.tau,
            k_index: self.k_index,
            tf_max: self.tf_max.unwrap_or(d.tf_max),
            tf_step: self.tf_step.unwrap_or(d.tf_step),
            tol: self.tol,
            tau_min: self.tau_min,
            tau_max: self.tau_max,
            scan_points: self.scan_points.unwrap_or(d.scan_points),
            sizes: self.sizes.unwrap_or(d.sizes),
            kx: self.kx.unwrap_or(d.kx),
            ky: self.ky.unwrap_or(d.ky),
            convention: self.convention.unwrap_or(d.convention),
            reference_tau: self.reference_tau.unwrap_or(d.reference_tau),
            out: self.out,
            emit_gnuplot: self.emit_gnuplot,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Fully resolved parameters; recorded verbatim in every metadata block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub model: ModelKind,
    pub hi: f64,
    pub hf: f64,
    pub kappa: f64,
    pub t1: f64,
    pub t2: f64,
    pub mass: f64,
    pub theta_i: f64,
    pub theta_f: f64,
    /// Per-command default when unset.
    pub n: Option<usize>,
    pub lx: usize,
    pub ly: usize,
    pub tau: Option<f64>,
    pub k_index: Option<usize>,
    pub tf_max: f64,
    pub tf_step: f64,
    pub tol: Option<f64>,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub scan_points: usize,
    pub sizes: Sizes,
    pub kx: f64,
    pub ky: f64,
    pub convention: ConventionChoice,
    pub reference_tau: f64,
    pub out: Option<PathBuf>,
    pub emit_gnuplot: bool,
}

/// Reference Haldane momentum `(4√3π/15, 2π/3)`.
pub const HALDANE_REFERENCE_K: [f64; 2] = [4.0 * 1.732_050_807_568_877_2 * PI / 15.0, 2.0 * PI / 3.0];
pub const HALDANE_REFERENCE_TAU: f64 = 15.3199;

impl Default for Settings {
    fn default() -> Self {
        Self {
            model: ModelKind::Tfim,
            hi: 0.5,
            hf: 1.5,
            kappa: 0.5,
            t1: 1.0,
            t2: 1.0,
            mass: 4.5,
            theta_i: 0.0,
            theta_f: PI / 2.0,
            n: None,
            lx: 50,
            ly: 50,
            tau: None,
            k_index: None,
            tf_max: 10.0,
            tf_step: 0.01,
            tol: None,
            tau_min: None,
            tau_max: None,
            scan_points: 400,
            sizes: Sizes((1..=10).map(|i| 10 * i).collect()),
            kx: HALDANE_REFERENCE_K[0],
            ky: HALDANE_REFERENCE_K[1],
            convention: ConventionChoice::Auto,
            reference_tau: HALDANE_REFERENCE_TAU,
            out: None,
            emit_gnuplot: false,
        }
    }
}

impl Settings {
    fn validate(&self) -> Result<(), LezError> {
        let finite = [
            ("hi", self.hi),
            ("hf", self.hf),
            ("kappa", self.kappa),
            ("t1", self.t1),
            ("t2", self.t2),
            ("M", self.mass),
            ("theta-i", self.theta_i),
            ("theta-f", self.theta_f),
            ("kx", self.kx),
            ("ky", self.ky),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(LezError::invalid(format!("{name} must be finite, got {v}")));
        }
        if let Some(n) = self.n {
            if n < 2 || n % 2 != 0 {
                return Err(LezError::invalid(format!("N must be even and >= 2, got {n}")));
            }
            if let Some(j) = self.k_index {
                if j == 0 || j > n / 2 {
                    return Err(LezError::invalid(format!("k-index must be in 1..={}, got {j}", n / 2)));
                }
            }
        }
        if self.lx == 0 || self.ly == 0 {
            return Err(LezError::invalid("Lx and Ly must be positive"));
        }
        if let Some(tau) = self.tau {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(LezError::invalid(format!("tau must be finite and >= 0, got {tau}")));
            }
        }
        if !(self.tf_step > 0.0 && self.tf_step.is_finite()) || !(self.tf_max >= 0.0 && self.tf_max.is_finite()) {
            return Err(LezError::invalid("tf-max must be >= 0 and tf-step > 0"));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(LezError::invalid(format!("tol must lie in (0, 1), got {tol}")));
            }
        }
        if self.sizes.0.is_empty() {
            return Err(LezError::invalid("sizes must not be empty"));
        }
        if self.emit_gnuplot && self.out.is_none() {
            return Err(LezError::invalid("--emit-gnuplot needs --out"));
        }
        Ok(())
    }

    /// Chain length with a per-command fallback.
    pub fn chain_len(&self, fallback: usize) -> Result<usize, LezError> {
        let n = self.n.unwrap_or(fallback);
        if let Some(j) = self.k_index {
            if j == 0 || j > n / 2 {
                return Err(LezError::invalid(format!("k-index must be in 1..={}, got {j}", n / 2)));
            }
        }
        Ok(n)
    }
}
