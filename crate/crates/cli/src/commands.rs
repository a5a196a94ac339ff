use lez_core::critical::{
    find_tau_c, haldane_find_tau, lez_modes, scaling_fit, select_haldane_convention, sudden_ks, ConventionTrial,
    RootChoice, SolveOptions, TauScan,
};
use lez_core::dtop::dtop_trace;
use lez_core::loschmidt::{grid_coefficients, loschmidt_amplitude_sq, rate_trace, time_grid, OverlapCoefficients};
use lez_core::models::locate_on_grid;
use lez_core::oracle::{exact_loschmidt_on, DenseSpinSystem, Sector};
use lez_core::ramp::DEFAULT_TOLERANCE;
use lez_core::{
    chain_grid, chain_momentum, haldane_phase_boundary, honeycomb_grid, Haldane, HaldaneConvention, Kernel,
    KernelFamily, LezError, RampSchedule, Result, Tfim, Xy,
};
use serde_json::{json, Value};

use crate::config::{ModelKind, Settings, HALDANE_REFERENCE_K};
use crate::output::{envelope, Cell, Table, UNITS};

/// What a command produces.
pub enum Output {
    Json(Value),
    Trace {
        table: Table,
        metadata: Value,
        title: String,
        ylabel: &'static str,
        column: usize,
    },
}

/// Chain families selectable on the command line.
#[derive(Debug, Clone, Copy)]
pub enum Chain {
    Tfim(Tfim),
    Xy(Xy),
}

impl KernelFamily for Chain {
    type Momentum = f64;

    fn kernel(&self, drive: f64, k: f64) -> Kernel {
        match self {
            Chain::Tfim(m) => m.kernel(drive, k),
            Chain::Xy(m) => m.kernel(drive, k),
        }
    }
}

const CHAIN_DEFAULT_N: usize = 50;
const ORACLE_DEFAULT_N: usize = 8;
const ORACLE_DEFAULT_TAUS: [f64; 3] = [0.01, 1.0, 5.0];
const HALDANE_TAU_RANGE: (f64, f64) = (1e-3, 1e3);
/// Relative agreement required by the convention search.
const CONVENTION_REL_TOL: f64 = 5e-3;

fn chain(s: &Settings) -> Result<Chain> {
    match s.model {
        ModelKind::Tfim => Ok(Chain::Tfim(Tfim::default())),
        ModelKind::Xy => Ok(Chain::Xy(Xy::new(s.kappa)?)),
        ModelKind::Haldane => Err(LezError::invalid("this command needs a chain model (tfim or xy)")),
    }
}

fn integrator_tol(s: &Settings) -> f64 {
    s.tol.unwrap_or(DEFAULT_TOLERANCE)
}

fn solve_options(s: &Settings) -> SolveOptions {
    let mut opts = SolveOptions::default();
    if let Some(tol) = s.tol {
        opts.refine_tolerance = tol;
    }
    opts
}

fn chain_scan(s: &Settings, n: usize) -> Result<TauScan> {
    let d = TauScan::for_chain(n);
    TauScan::new(s.tau_min.unwrap_or(d.lo), s.tau_max.unwrap_or(d.hi), s.scan_points)
}

fn haldane_scan(s: &Settings) -> Result<TauScan> {
    TauScan::new(
        s.tau_min.unwrap_or(HALDANE_TAU_RANGE.0),
        s.tau_max.unwrap_or(HALDANE_TAU_RANGE.1),
        s.scan_points,
    )
}

fn metadata(command: &str, s: &Settings, extra: Value) -> Value {
    let opts = solve_options(s);
    let mut meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "units": UNITS,
        "params": s,
        "tolerances": {
            "integrator": integrator_tol(s),
            "scan": opts.scan_tolerance,
            "refine": opts.refine_tolerance,
            "residual": opts.residual_tolerance,
            "bracket_rel": opts.bracket_rel_tolerance,
        },
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
        m.extend(e);
    }
    meta
}

fn json_output(command: &str, s: &Settings, result: Value, extra: Value) -> Output {
    Output::Json(envelope(result, metadata(command, s, extra)))
}

fn convention_name(c: &HaldaneConvention) -> String {
    let sign = if c.mass_sign > 0.0 { "+" } else { "-" };
    match c.orientation {
        lez_core::HoneycombOrientation::BondAlongX => format!("x{sign}"),
        lez_core::HoneycombOrientation::BondAlongY => format!("y{sign}"),
    }
}

/// Fixed convention, or the first candidate reproducing the reference duration.
fn resolve_convention(s: &Settings) -> Result<(HaldaneConvention, Option<Vec<ConventionTrial>>)> {
    if let Some(c) = s.convention.fixed() {
        return Ok((c, None));
    }
    let (c, trials) = select_haldane_convention(
        s.t1,
        s.t2,
        s.mass,
        s.theta_i,
        s.theta_f,
        HALDANE_REFERENCE_K,
        (s.lx, s.ly),
        s.reference_tau,
        CONVENTION_REL_TOL,
        &haldane_scan(s)?,
    )?;
    Ok((c, Some(trials)))
}

fn convention_json(c: &HaldaneConvention, trials: &Option<Vec<ConventionTrial>>) -> Value {
    json!({
        "name": convention_name(c),
        "convention": c,
        "search": trials.as_ref().map(|t| json!({
            "reference_k": HALDANE_REFERENCE_K,
            "trials": t,
        })),
    })
}

pub fn rate_scan(s: &Settings) -> Result<Output> {
    let tau = s.tau.ok_or_else(|| LezError::invalid("rate-scan needs --tau"))?;
    let times = time_grid(s.tf_max, s.tf_step)?;
    let tol = integrator_tol(s);
    let (trace, extra) = match s.model {
        ModelKind::Haldane => {
            let (conv, trials) = resolve_convention(s)?;
            let model = Haldane::new(s.t1, s.t2, s.mass, conv)?;
            let grid = honeycomb_grid(&conv, s.lx, s.ly)?;
            let schedule = RampSchedule::new(s.theta_i, s.theta_f, tau)?;
            let coeffs = grid_coefficients(&model, &schedule, &grid, tol)?;
            let trace = rate_trace(&coeffs, grid.size.mode_count(), &times)?;
            (trace, json!({ "haldane_convention": convention_json(&conv, &trials) }))
        }
        _ => {
            let n = s.chain_len(CHAIN_DEFAULT_N)?;
            let grid = chain_grid(n)?;
            let schedule = RampSchedule::new(s.hi, s.hf, tau)?;
            let coeffs = grid_coefficients(&chain(s)?, &schedule, &grid, tol)?;
            (rate_trace(&coeffs, n, &times)?, json!({}))
        }
    };
    let rows = trace
        .times
        .iter()
        .zip(&trace.echo)
        .zip(&trace.rate)
        .zip(&trace.exact_zero)
        .map(|(((&t, &e), &r), &z)| vec![Cell::F(t), Cell::F(e), Cell::F(r), Cell::I(z as i64)])
        .collect();
    let peak = trace.max_finite_rate().map(|(t, r)| json!({ "t_f": t, "rate": r }));
    let mut extra = extra;
    extra["mode_count"] = json!(trace.mode_count);
    extra["max_finite_rate"] = json!(peak);
    extra["exact_zero_samples"] = json!(trace.exact_zero.iter().filter(|z| **z).count());
    Ok(Output::Trace {
        table: Table { header: &["t_f", "echo", "rate", "exact_zero"], rows },
        metadata: metadata("rate-scan", s, extra),
        title: format!("rate function, tau = {tau}"),
        ylabel: "lambda",
        column: 3,
    })
}

pub fn find_tau(s: &Settings) -> Result<Output> {
    let family = chain(s)?;
    let n = s.chain_len(CHAIN_DEFAULT_N)?;
    let j = s.k_index.ok_or_else(|| LezError::invalid("find-tau needs --k-index"))?;
    let k = chain_momentum(n, j)?;
    let r = find_tau_c(&family, s.hi, s.hf, k, &chain_scan(s, n)?, RootChoice::Smallest, &solve_options(s))?;
    let mut result = serde_json::to_value(&r).expect("plain data");
    result["k_index"] = json!(j);
    result["N"] = json!(n);
    Ok(json_output("find-tau", s, result, json!({})))
}

pub fn ks(s: &Settings) -> Result<Output> {
    let k = sudden_ks(s.hi, s.hf)?;
    Ok(json_output("ks", s, json!({ "k_s": k, "h_i": s.hi, "h_f": s.hf }), json!({})))
}

pub fn scaling(s: &Settings) -> Result<Output> {
    let fit = scaling_fit(&chain(s)?, s.hi, s.hf, &s.sizes.0, &solve_options(s))?;
    Ok(json_output("scaling", s, serde_json::to_value(&fit).expect("plain data"), json!({})))
}

pub fn dtop(s: &Settings) -> Result<Output> {
    let family = chain(s)?;
    let n = s.chain_len(CHAIN_DEFAULT_N)?;
    let grid = chain_grid(n)?;
    let mut extra = json!({});
    let tau = match (s.tau, s.k_index) {
        (Some(tau), _) => tau,
        (None, Some(j)) => {
            let k = chain_momentum(n, j)?;
            let r = find_tau_c(&family, s.hi, s.hf, k, &chain_scan(s, n)?, RootChoice::Smallest, &solve_options(s))?;
            extra["tuned_mode"] = json!({ "k_index": j, "k": k, "tau_c": r.tau_c, "critical_times": r.train.times });
            r.tau_c
        }
        (None, None) => return Err(LezError::invalid("dtop needs --tau or --k-index")),
    };
    extra["tau"] = json!(tau);
    let schedule = RampSchedule::new(s.hi, s.hf, tau)?;
    let coeffs = grid_coefficients(&family, &schedule, &grid, integrator_tol(s))?;
    let times = time_grid(s.tf_max, s.tf_step)?;
    let trace = dtop_trace(&coeffs, &times)?;
    let rows = trace
        .times
        .iter()
        .zip(&trace.winding)
        .map(|(&t, &w)| {
            let rounded = if w.is_finite() { Cell::I(w.round() as i64) } else { Cell::Empty };
            vec![Cell::F(t), Cell::F(w), rounded]
        })
        .collect();
    Ok(Output::Trace {
        table: Table { header: &["t_f", "winding", "winding_rounded"], rows },
        metadata: metadata("dtop", s, extra),
        title: format!("DTOP, tau = {tau}"),
        ylabel: "nu",
        column: 2,
    })
}

fn product_echo(family: &Chain, n: usize, schedule: &RampSchedule, times: &[f64], tol: f64) -> Result<Vec<f64>> {
    let coeffs: Vec<OverlapCoefficients> = grid_coefficients(family, schedule, &chain_grid(n)?, tol)?;
    Ok(times.iter().map(|&t| loschmidt_amplitude_sq(&coeffs, t)).collect())
}

pub fn oracle_check(s: &Settings) -> Result<Output> {
    let family = chain(s)?;
    let n = s.n.unwrap_or(ORACLE_DEFAULT_N);
    let system = match family {
        Chain::Tfim(_) => DenseSpinSystem::ising(n, Sector::EvenParity)?,
        Chain::Xy(_) => DenseSpinSystem::xy(n, s.kappa, Sector::EvenParity)?,
    };
    let taus = s.tau.map(|t| vec![t]).unwrap_or_else(|| ORACLE_DEFAULT_TAUS.to_vec());
    let times = time_grid(s.tf_max, s.tf_step)?;
    let mut runs = Vec::new();
    let mut worst = 0.0f64;
    for tau in taus {
        let schedule = RampSchedule::new(s.hi, s.hf, tau)?;
        let exact = exact_loschmidt_on(&system, &schedule, &times, None)?;
        let product = product_echo(&family, n, &schedule, &times, integrator_tol(s))?;
        let dev = exact.echo.iter().zip(&product).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
        runs.push(json!({
            "tau": tau,
            "max_abs_dev": dev,
            "ramp_steps": exact.ramp_steps,
            "norm_drift": exact.norm_drift,
            "halving_deviation": exact.halving_deviation,
        }));
    }
    let result = json!({ "N": n, "hilbert_dim": system.dim(), "runs": runs, "max_abs_dev": worst });
    Ok(json_output("oracle-check", s, result, json!({})))
}

pub fn xy_modes(s: &Settings) -> Result<Output> {
    let family = Xy::new(s.kappa)?;
    let n = s.chain_len(CHAIN_DEFAULT_N)?;
    let scan = chain_scan(s, n)?;
    let modes = lez_modes(&family, s.hi, s.hf, n, &scan, solve_options(s).scan_tolerance)?;
    let numerators: Vec<usize> = modes.iter().map(|m| 2 * m.index - 1).collect();
    let result = json!({
        "N": n,
        "kappa": s.kappa,
        "modes": modes,
        "k_numerators": numerators,
        "scan": scan,
    });
    Ok(json_output("xy-modes", s, result, json!({})))
}

pub fn haldane(s: &Settings) -> Result<Output> {
    let (conv, trials) = resolve_convention(s)?;
    let model = Haldane::new(s.t1, s.t2, s.mass, conv)?;
    let k = [s.kx, s.ky];
    let r = haldane_find_tau(&model, s.theta_i, s.theta_f, k, &haldane_scan(s)?, &solve_options(s))?;
    let mut result = serde_json::to_value(&r).expect("plain data");
    result["grid_location"] = json!(locate_on_grid(&conv, k, s.lx, s.ly));
    let extra = json!({ "haldane_convention": convention_json(&conv, &trials) });
    Ok(json_output("haldane", s, result, extra))
}

pub fn phase_boundary(s: &Settings) -> Result<Output> {
    let thetas = haldane_phase_boundary(s.t2, s.mass)?;
    Ok(json_output("phase-boundary", s, json!({ "theta_c": thetas, "t2": s.t2, "M": s.mass }), json!({})))
}
