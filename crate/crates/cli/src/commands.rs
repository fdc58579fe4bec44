//! One function per subcommand. Each validates its section, runs the
//! computation and writes its CSV; summaries go to stderr.

use std::path::{Path, PathBuf};

use thermorisk_core::infoflow::{conditional_entropy_chain, risk_horizon_curve, InfoSchedule};
use thermorisk_core::pathrisk::{mc_oracle, solve, PdeProblem};
use thermorisk_core::quasistatic::{ideal_gas_curve, integrate_entropy, IdealGasSpec};
use thermorisk_core::thermalize::{ThermalizationState, DEFAULT_LEARNING_RATE, DEFAULT_TOLERANCE};
use thermorisk_core::tilt::{linear_grid, sweep, tilt_at, TiltCurve};
use thermorisk_core::StepFunction;

use crate::config::{Command, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{emit, fmt_f64, read_joint, read_losses, Table};

fn need<T>(value: Option<T>, command: &str, key: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Validation(format!("{command}: missing --{key}")))
}

fn section<T: Clone>(section: &Option<T>) -> T {
    section.clone().expect("merged config carries the invoked section")
}

pub fn run(config: &RunConfig, command: &Command) -> Result<()> {
    match command {
        Command::Tilt(_) => cmd_tilt(config),
        Command::Sweep(_) => cmd_sweep(config),
        Command::Quasistatic(_) => cmd_quasistatic(config),
        Command::Idealgas(_) => cmd_idealgas(config),
        Command::Thermalize(_) => cmd_thermalize(config),
        Command::Pde(_) => cmd_pde(config),
        Command::Infoflow(_) => cmd_infoflow(config),
    }
}

fn curve_table(curve: &TiltCurve) -> Table {
    let mut t = Table::new(&["theta", "v_star", "w_star", "eta_star"]);
    for r in curve.rows() {
        t.row([r.theta, r.v_star, r.w_star, r.eta_star].map(fmt_f64));
    }
    t
}

pub fn cmd_tilt(config: &RunConfig) -> Result<()> {
    let a = section(&config.tilt);
    let sample = read_losses(&need(a.losses, "tilt", "losses")?)?;
    let r = tilt_at(&sample, need(a.theta, "tilt", "theta")?)?;
    let mut t = Table::new(&["theta", "v_star", "w_star", "eta_star", "log_partition"]);
    t.row([r.theta, r.v_star, r.w_star, r.eta_star, r.log_partition].map(fmt_f64));
    emit(config.out.as_deref(), &t.into_bytes())
}

pub fn cmd_sweep(config: &RunConfig) -> Result<()> {
    let a = section(&config.sweep);
    let sample = read_losses(&need(a.losses, "sweep", "losses")?)?;
    let grid = linear_grid(a.theta_min.unwrap_or(0.0), need(a.theta_max, "sweep", "theta-max")?, a.points.unwrap_or(101))?;
    let curve = sweep(&sample, &grid)?;
    emit(config.out.as_deref(), &curve_table(&curve).into_bytes())
}

pub fn cmd_quasistatic(config: &RunConfig) -> Result<()> {
    let a = section(&config.quasistatic);
    let sample = read_losses(&need(a.losses, "quasistatic", "losses")?)?;
    let grid = linear_grid(0.0, need(a.theta_max, "quasistatic", "theta-max")?, a.grid.unwrap_or(10_000))?;
    let report = integrate_entropy(&sweep(&sample, &grid)?)?;
    let mut t = Table::new(&["theta", "v_star", "eta_star", "eta_integrated", "rel_error"]);
    for ((r, e), err) in report.curve.rows().iter().zip(&report.eta_integrated).zip(&report.rel_errors) {
        t.row([r.theta, r.v_star, r.eta_star, *e, *err].map(fmt_f64));
    }
    eprintln!("max_rel_error = {:e}", report.max_rel_error);
    emit(config.out.as_deref(), &t.into_bytes())
}

pub fn cmd_idealgas(config: &RunConfig) -> Result<()> {
    let a = section(&config.idealgas);
    let spec = IdealGasSpec {
        dimension: need(a.dimension, "idealgas", "dimension")?,
        l_max: a.l_max.unwrap_or(1.0),
        quadrature_points: a.quadrature_points.unwrap_or(4096),
    };
    let (lo, hi, points) = (a.abs_theta_min.unwrap_or(30.0), a.abs_theta_max.unwrap_or(3000.0), a.points.unwrap_or(60));
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(CliError::Validation("idealgas: need 0 < abs-theta-min < abs-theta-max and points >= 2".into()));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| -(hi.ln() + (lo.ln() - hi.ln()) * i as f64 / (points - 1) as f64).exp())
        .collect();
    let gas = ideal_gas_curve(&spec, &grid)?;
    let mut t = Table::new(&["theta", "v_star", "w_star", "eta_star", "edge_mass", "truncation_clean"]);
    for ((r, m), c) in gas.curve.rows().iter().zip(&gas.edge_mass).zip(&gas.clean) {
        let mut fields: Vec<String> = [r.theta, r.v_star, r.w_star, r.eta_star, *m].map(fmt_f64).into();
        fields.push(c.to_string());
        t.row(fields);
    }
    match gas.budget_slope() {
        Ok((slope, r2)) => eprintln!("budget_slope = {slope:.10} (r2 = {r2:.12}, expected -{})", spec.dimension as f64 / 2.0),
        Err(e) => eprintln!("budget_slope unavailable: {e}"),
    }
    emit(config.out.as_deref(), &t.into_bytes())
}

fn trace_path(explicit: Option<PathBuf>, out: Option<&Path>) -> Option<PathBuf> {
    explicit.or_else(|| {
        out.map(|o| {
            let stem = o.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            o.with_file_name(format!("{stem}.trace.csv"))
        })
    })
}

pub fn cmd_thermalize(config: &RunConfig) -> Result<()> {
    let a = section(&config.thermalize);
    let sample = read_losses(&need(a.losses, "thermalize", "losses")?)?;
    let seed = config.seed.unwrap_or(0);
    let mut state = ThermalizationState::new(&sample, need(a.v_target, "thermalize", "v-target")?, a.levels.unwrap_or(50), seed)?;
    let res = state.run(
        a.learning_rate.unwrap_or(DEFAULT_LEARNING_RATE),
        a.max_iters.unwrap_or(20_000_000),
        a.tolerance.unwrap_or(DEFAULT_TOLERANCE),
    )?;

    let mut result = Table::new(&["beta", "r_squared", "iterations", "converged", "seed"]);
    result.row([fmt_f64(res.beta), fmt_f64(res.r_squared), res.iterations_used.to_string(), res.converged.to_string(), res.seed.to_string()]);
    let mut trace = Table::new(&["iteration", "mean_particle_energy", "total_energy", "particle_number", "kl_to_boltzmann"]);
    for r in &res.trace {
        let mut fields = vec![r.iteration.to_string()];
        fields.extend([r.mean_particle_energy, r.total_energy, r.particle_number, r.kl_to_boltzmann].map(fmt_f64));
        trace.row(fields);
    }
    if let Some(path) = trace_path(a.trace, config.out.as_deref()) {
        emit(Some(&path), &trace.into_bytes())?;
    }
    emit(config.out.as_deref(), &result.into_bytes())?;
    eprintln!(
        "beta = {:.10}, r2 = {:.6}, iterations = {}, energy drift = {:e}",
        res.beta,
        res.r_squared,
        res.iterations_used,
        res.energy_drift()
    );
    if !res.converged {
        return Err(CliError::NotConverged(format!(
            "thermalize: not converged after {} iterations (r2 = {})",
            res.iterations_used, res.r_squared
        )));
    }
    Ok(())
}

pub fn cmd_pde(config: &RunConfig) -> Result<()> {
    let a = section(&config.pde);
    let h = StepFunction::new(need(a.h_knots, "pde", "h-knots")?, need(a.h_values, "pde", "h-values")?)?;
    let problem = PdeProblem {
        sigma: need(a.sigma, "pde", "sigma")?,
        theta: need(a.theta, "pde", "theta")?,
        h,
        payoff: a.payoff.map(Into::into).unwrap_or(thermorisk_core::pathrisk::Payoff::Zero),
        x_min: need(a.x_min, "pde", "x-min")?,
        x_max: need(a.x_max, "pde", "x-max")?,
        nx: a.nx.unwrap_or(401),
        nt: a.nt.unwrap_or(400),
    };
    let sol = solve(&problem)?;
    if sol.peclet_warning() {
        eprintln!("warning: grid Peclet number {:.3} exceeds 2; central convection may oscillate", sol.max_peclet);
    }
    let mut t = Table::new(&["t", "x", "value"]);
    for (k, &time) in sol.times.iter().enumerate() {
        for (&x, &v) in sol.xs.iter().zip(sol.slice(k)) {
            t.row([time, x, v].map(fmt_f64));
        }
    }
    emit(config.out.as_deref(), &t.into_bytes())?;
    if let Some(x0) = a.x0 {
        eprintln!("V(0, {x0}) = {:.12}", sol.value_at(0.0, x0)?);
        if let Some(paths) = a.mc_paths {
            let mc = mc_oracle(&problem, x0, paths, a.mc_steps.unwrap_or(100), config.seed.unwrap_or(0))?;
            eprintln!("monte carlo = {:.12} +/- {:.3e}", mc.estimate, mc.std_error);
        }
    }
    Ok(())
}

pub fn cmd_infoflow(config: &RunConfig) -> Result<()> {
    let a = section(&config.infoflow);
    if a.joint.is_none() && a.losses.is_none() {
        return Err(CliError::Validation("infoflow: give --joint, --losses or both".into()));
    }
    if let Some(path) = &a.joint {
        let chain = conditional_entropy_chain(&read_joint(path)?);
        let mut t = Table::new(&["quantity", "value"]);
        t.row(["h_x".to_owned(), fmt_f64(chain.h_x)]);
        for (i, term) in chain.terms.iter().enumerate() {
            t.row([format!("i_y{}", i + 1), fmt_f64(*term)]);
        }
        t.row(["h_x_given_all".to_owned(), fmt_f64(chain.h_x_given_all)]);
        let bytes = t.into_bytes();
        match &a.chain_out {
            Some(p) => emit(Some(p), &bytes)?,
            None => eprint!("{}", String::from_utf8_lossy(&bytes)),
        }
    }
    if let Some(path) = &a.losses {
        let sample = read_losses(path)?;
        let schedule = InfoSchedule::new(need(a.rate_knots, "infoflow", "rate-knots")?, need(a.rates, "infoflow", "rates")?)?;
        let horizons = match a.horizons {
            Some(h) => h,
            None => linear_grid(0.0, schedule.t_max(), 21)?,
        };
        let rows = risk_horizon_curve(&sample, &schedule, &horizons)?;
        let mut t = Table::new(&["horizon", "eta", "theta", "v_star"]);
        for r in rows {
            t.row([r.horizon, r.eta, r.theta, r.v_star].map(fmt_f64));
        }
        emit(config.out.as_deref(), &t.into_bytes())?;
    }
    Ok(())
}
