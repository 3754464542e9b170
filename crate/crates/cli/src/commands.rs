//! Sweep and simulation runners behind each subcommand.

use std::f64::consts::FRAC_PI_2;

use measheat::bloch::{steady_state_bloch, BlochState, QubitModel};
use measheat::heat::{
    excess_heat, excess_heat_max, heat_current_bounds, heat_current_instant, heat_current_trace,
    steady_state_heat_current, HeatSeries, CONVERGENCE_TOL,
};
use measheat::lambda_model::{lambda_heat_current_sweep, population_inversion_predicted, LambdaParams};
use measheat::lindblad::{
    build_liouvillian, evolve, measurement_channel, projector_onto, steady_state, CMatrix, CVector, Channel,
    DensityMatrix, LindbladModel, HAMILTONIAN_HERMITICITY_TOL,
};
use measheat::rates::{BathSpec, MeasurementSpec};
use measheat::{Complex64, Error};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{theta_grid, Custom, Entry, ExcessSweep, Initial, LambdaSweep, MatrixSpec, SteadySweep, Transient};
use crate::error::CliError;
use crate::output::{Cell, Report};

/// Horizon doublings tried before an excess-heat row is reported unconverged.
const MAX_EXTENSIONS: usize = 3;

fn qubit(delta: f64, gp: f64, gm: f64, gamma: f64, theta: f64, phi: f64) -> Result<QubitModel, CliError> {
    Ok(QubitModel::from_rates(delta, gp, gm, MeasurementSpec::new(gamma, theta, phi)?)?)
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

pub fn run_fig2b(cfg: &SteadySweep) -> Result<Report, CliError> {
    let thetas = theta_grid(cfg.theta_points);
    let rows: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&theta| {
            cfg.gammas
                .iter()
                .map(|&g| {
                    let m = qubit(cfg.delta, cfg.gamma_plus, cfg.gamma_minus, g, theta, cfg.phi)?;
                    Ok(steady_state_heat_current(&m)?)
                })
                .collect::<Result<Vec<f64>, CliError>>()
        })
        .collect::<Result<_, _>>()?;

    let mut columns = vec!["theta".to_string()];
    columns.extend(numbered("J_M_gamma", cfg.gammas.len()));
    let mut report = Report::new(cfg, columns);
    let mut summary = Vec::new();
    for (k, &g) in cfg.gammas.iter().enumerate() {
        let m = qubit(cfg.delta, cfg.gamma_plus, cfg.gamma_minus, g, FRAC_PI_2, cfg.phi)?;
        let peak = rows.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max);
        summary.push(json!({
            "gamma": g,
            "upper_bound": heat_current_bounds(&m).1,
            "J_M_equator": steady_state_heat_current(&m)?,
            "J_M_max": peak,
        }));
    }
    report.summary = Value::Array(summary);
    report.rows = thetas
        .iter()
        .zip(rows)
        .map(|(&t, r)| std::iter::once(t).chain(r).map(Cell::Num).collect())
        .collect();
    Ok(report)
}

fn initial_state(cfg: &Transient) -> BlochState {
    match cfg.initial {
        Initial::SigmaXPlus => BlochState::at_rest(1.0, 0.0, 0.0),
        Initial::MeasurementFree => BlochState::at_rest(0.0, 0.0, -cfg.gamma_minus / cfg.gamma_plus),
    }
}

pub fn run_fig4(cfg: &Transient) -> Result<Report, CliError> {
    let init = initial_state(cfg);
    let series: Vec<HeatSeries> = cfg
        .thetas
        .par_iter()
        .map(|&theta| {
            let m = qubit(cfg.delta, cfg.gamma_plus, cfg.gamma_minus, cfg.gamma, theta, cfg.phi)?;
            Ok(HeatSeries::simulate(&m, init, cfg.t_end, cfg.dt)?)
        })
        .collect::<Result<_, CliError>>()?;

    let mut columns = vec!["t".to_string()];
    columns.extend(numbered("J_M_theta", cfg.thetas.len()));
    let mut report = Report::new(cfg, columns);
    report.summary = Value::Array(
        cfg.thetas
            .iter()
            .zip(&series)
            .map(|(theta, s)| {
                json!({
                    "theta": theta,
                    "J_M_initial": s.values()[0],
                    "J_M_final": s.values().last(),
                    "J_M_steady": s.steady_value(),
                })
            })
            .collect(),
    );
    let times = series[0].times();
    report.rows = times
        .iter()
        .enumerate()
        .map(|(i, &t)| std::iter::once(t).chain(series.iter().map(|s| s.values()[i])).map(Cell::Num).collect())
        .collect();
    Ok(report)
}

/// Time after which `|J(t) - J_ss|` should be three decades inside the
/// convergence tolerance, from the bound `|c| |v0 - v_ss| e^{-rate t}` where
/// `J = c · v`. The margin keeps the exponential tail estimate negligible.
fn relaxation_horizon(model: &QubitModel, init: &BlochState) -> measheat::Result<f64> {
    let ss = steady_state_bloch(model)?;
    let j = |x, y, z| heat_current_instant(&BlochState::at_rest(x, y, z), model.measurement(), model.delta());
    let c = (j(1.0, 0.0, 0.0).powi(2) + j(0.0, 1.0, 0.0).powi(2) + j(0.0, 0.0, 1.0).powi(2)).sqrt();
    let dv = ((init.x - ss.x).powi(2) + (init.y - ss.y).powi(2) + (init.z - ss.z).powi(2)).sqrt();
    let j_ss = heat_current_instant(&ss, model.measurement(), model.delta());
    let tol = 1e-3 * CONVERGENCE_TOL * j_ss.abs().max(model.gamma() * model.delta());
    let amplitude = 2.0 * c * dv;
    if amplitude <= tol {
        return Ok(0.0);
    }
    Ok((amplitude / tol).ln() / model.slowest_decay_rate())
}

/// Excess heat after switching on the measurement in the measurement-free
/// steady state. The horizon is at least `t_end`, stretched to the estimated
/// relaxation time and doubled while the series has still not relaxed.
pub fn excess_heat_row(model: &QubitModel, dt: f64, t_end: f64) -> measheat::Result<f64> {
    let init = BlochState::at_rest(0.0, 0.0, -model.gamma_minus() / model.gamma_plus());
    let mut horizon = t_end.max(relaxation_horizon(model, &init)?);
    let mut attempt = 0;
    loop {
        let series = HeatSeries::simulate(model, init, horizon, dt)?;
        match excess_heat(&series) {
            Ok(q) => return Ok(q.value),
            Err(Error::Unconverged { .. }) if attempt < MAX_EXTENSIONS => {
                log::debug!("extending horizon from {horizon} for theta = {}", model.measurement().theta());
                horizon *= 2.0;
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn run_qex(cfg: &ExcessSweep) -> Result<Report, CliError> {
    let thetas = theta_grid(cfg.theta_points);
    let rows: Vec<Vec<measheat::Result<f64>>> = thetas
        .par_iter()
        .map(|&theta| {
            cfg.gammas
                .iter()
                .map(|&g| {
                    let meas = MeasurementSpec::new(g, theta, cfg.phi)?;
                    let m = QubitModel::from_rates(cfg.delta, cfg.gamma_plus, cfg.gamma_minus, meas)?;
                    excess_heat_row(&m, cfg.dt, cfg.t_end)
                })
                .collect()
        })
        .collect();

    let single = cfg.gammas.len() == 1;
    let mut columns = vec!["theta".to_string()];
    for k in 1..=cfg.gammas.len() {
        if single {
            columns.extend(["Q_ex".to_string(), "status".to_string()]);
        } else {
            columns.extend([format!("Q_ex_gamma{k}"), format!("status_gamma{k}")]);
        }
    }
    let mut report = Report::new(cfg, columns);
    let mut summary = Vec::new();
    for (k, &g) in cfg.gammas.iter().enumerate() {
        let equator = qubit(cfg.delta, cfg.gamma_plus, cfg.gamma_minus, g, FRAC_PI_2, cfg.phi)?;
        let (peak, at) = thetas
            .iter()
            .zip(&rows)
            .filter_map(|(t, r)| r[k].as_ref().ok().map(|q| (*q, *t)))
            .fold((f64::NEG_INFINITY, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
        summary.push(json!({
            "gamma": g,
            "Q_ex_max_closed_form": excess_heat_max(&equator)?,
            "Q_ex_peak": peak,
            "theta_peak": at,
            "failed_rows": rows.iter().filter(|r| r[k].is_err()).count(),
        }));
    }
    report.summary = Value::Array(summary);

    for (theta, r) in thetas.iter().zip(rows) {
        let mut row = vec![Cell::Num(*theta)];
        for (k, q) in r.into_iter().enumerate() {
            match q {
                Ok(v) => row.extend([Cell::Num(v), Cell::Text("ok".into())]),
                Err(e) => {
                    let status = if matches!(e, Error::Unconverged { .. }) { "unconverged" } else { "failed" };
                    report.failures.push(format!("theta = {theta}, gamma = {}: {e}", cfg.gammas[k]));
                    row.extend([Cell::Num(f64::NAN), Cell::Text(status.into())]);
                }
            }
        }
        report.rows.push(row);
    }
    Ok(report)
}

pub fn lambda_params(cfg: &LambdaSweep) -> Result<LambdaParams, CliError> {
    Ok(LambdaParams {
        delta_big: cfg.delta,
        delta_small: cfg.delta_small,
        hot: BathSpec::new(cfg.kappa_hot, cfg.t_hot, cfg.cutoff, "hot")?,
        cold: BathSpec::new(cfg.kappa_cold, cfg.t_cold, cfg.cutoff, "cold")?,
        gamma: 0.0,
        phi: cfg.phi,
    })
}

pub fn run_lambda(cfg: &LambdaSweep) -> Result<Report, CliError> {
    let params = lambda_params(cfg)?;
    params.validate()?;
    let points = lambda_heat_current_sweep(&params, &cfg.gammas)
        .into_iter()
        .collect::<measheat::Result<Vec<_>>>()?;
    let columns = ["gamma", "J_M", "rho00", "rho11", "rho22", "inversion_flag"].map(String::from).to_vec();
    let mut report = Report::new(cfg, columns);
    let currents = points.iter().map(|p| p.heat_current);
    report.summary = json!({
        "inversion_predicted": population_inversion_predicted(&params),
        "all_negative": points.iter().all(|p| p.heat_current < 0.0),
        "J_M_min": currents.clone().fold(f64::INFINITY, f64::min),
        "J_M_max": currents.fold(f64::NEG_INFINITY, f64::max),
    });
    report.rows = points
        .iter()
        .map(|p| {
            let mut row = vec![Cell::Num(p.gamma), Cell::Num(p.heat_current)];
            row.extend(p.populations.iter().map(|&x| Cell::Num(x)));
            row.push(Cell::Int(p.inverted as i64));
            row
        })
        .collect();
    Ok(report)
}

fn matrix(name: &str, spec: &MatrixSpec, n: usize) -> Result<CMatrix, CliError> {
    if spec.len() != n {
        return Err(CliError::Config(format!("{name}: expected {n} rows, found {}", spec.len())));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in spec.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Config(format!(
                "{name}[{i}]: expected {n} entries, found {}",
                row.len()
            )));
        }
        for (j, e) in row.iter().enumerate() {
            let (re, im) = e.parts();
            if !(re.is_finite() && im.is_finite()) {
                return Err(CliError::Config(format!("{name}[{i}][{j}]: entry must be finite")));
            }
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

fn vector(name: &str, spec: &[Entry], n: usize) -> Result<CVector, CliError> {
    if spec.len() != n {
        return Err(CliError::Config(format!("{name}: expected {n} entries, found {}", spec.len())));
    }
    let mut v = CVector::zeros(n);
    for (i, e) in spec.iter().enumerate() {
        let (re, im) = e.parts();
        if !(re.is_finite() && im.is_finite()) {
            return Err(CliError::Config(format!("{name}[{i}]: entry must be finite")));
        }
        v[i] = Complex64::new(re, im);
    }
    Ok(v)
}

fn check_hermitian(name: &str, m: &CMatrix) -> Result<(), CliError> {
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let (a, b) = (m[(i, j)], m[(j, i)].conj());
            if (a - b).norm() > HAMILTONIAN_HERMITICITY_TOL {
                return Err(CliError::Config(format!(
                    "{name}[{i}][{j}]: not Hermitian ({a} vs conjugate of [{j}][{i}] = {b})"
                )));
            }
        }
    }
    Ok(())
}

/// A validated custom model and its measurement channel.
pub fn build_custom(cfg: &Custom) -> Result<(LindbladModel, Option<Channel>), CliError> {
    let spec = &cfg.model;
    let n = spec.dim;
    if n == 0 {
        return Err(CliError::Config("model.dim: must be at least 1".into()));
    }
    let h = matrix("model.hamiltonian", &spec.hamiltonian, n)?;
    check_hermitian("model.hamiltonian", &h)?;
    let mut channels = Vec::with_capacity(spec.channels.len() + 1);
    for (k, c) in spec.channels.iter().enumerate() {
        let name = format!("model.channels[{k}]");
        let jump = matrix(&format!("{name}.jump"), &c.jump, n)?;
        let label = c.label.clone().unwrap_or_else(|| format!("channel {k}"));
        let channel =
            Channel::new(jump, c.rate, label).map_err(|e| CliError::Config(format!("{name}.rate: {e}")))?;
        channels.push(channel);
    }
    let measurement = match &spec.measurement {
        None => None,
        Some(m) => {
            let projector = match (&m.state, &m.projector) {
                (Some(s), None) => projector_onto(&vector("model.measurement.state", s, n)?)
                    .map_err(|e| CliError::Config(format!("model.measurement.state: {e}")))?,
                (None, Some(p)) => matrix("model.measurement.projector", p, n)?,
                _ => {
                    return Err(CliError::Config(
                        "model.measurement: give exactly one of 'state' or 'projector'".into(),
                    ))
                }
            };
            let ch = measurement_channel(&projector, m.gamma)
                .map_err(|e| CliError::Config(format!("model.measurement: {e}")))?;
            channels.push(ch.clone());
            Some(ch)
        }
    };
    let model = LindbladModel::new(h, channels).map_err(|e| CliError::Config(format!("model: {e}")))?;
    Ok((model, measurement))
}

fn uniform_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let ratio = t_end / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio {
        ratio.round()
    } else {
        ratio.ceil()
    }
    .max(1.0) as usize;
    (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect()
}

fn complex_rows(m: &CMatrix) -> Value {
    json!((0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

pub fn run_custom(cfg: &Custom) -> Result<Report, CliError> {
    let (model, measurement) = build_custom(cfg)?;
    let n = model.dim();
    let l = build_liouvillian(&model)?;
    let current = |rho: &DensityMatrix| -> Result<f64, CliError> {
        Ok(match &measurement {
            Some(ch) => heat_current_trace(model.hamiltonian(), ch, rho)?,
            None => 0.0,
        })
    };

    let mut columns = vec!["t".to_string(), "J_M".to_string()];
    columns.extend((0..n).map(|k| format!("rho{k}{k}")));
    columns.extend(["trace_error", "hermiticity_error", "min_eigenvalue"].map(String::from));
    let mut report = Report::new(cfg, columns);
    let row = |t: f64, rho: &DensityMatrix| -> Result<Vec<Cell>, CliError> {
        let d = rho.diagnostics();
        let mut r = vec![Cell::Num(t), Cell::Num(current(rho)?)];
        r.extend(rho.populations().into_iter().map(Cell::Num));
        r.extend([d.trace_error, d.hermiticity_error, d.min_eigenvalue].map(Cell::Num));
        Ok(r)
    };

    let mut summary = json!({
        "dim": n,
        "trace_preservation_residual": l.trace_preservation_residual(),
    });
    if let Some(t_end) = cfg.t_end {
        let spec = cfg.model.initial_state.as_ref().expect("checked during resolution");
        let rho0 = DensityMatrix::new(matrix("model.initial_state", spec, n)?)
            .map_err(|e| CliError::Config(format!("model.initial_state: {e}")))?;
        let grid = uniform_grid(t_end, cfg.dt.unwrap_or(0.01));
        let states = evolve(&l, &rho0, &grid)?;
        let mut worst = (0.0f64, 0.0f64, f64::INFINITY);
        for (&t, rho) in grid.iter().zip(&states) {
            let d = rho.diagnostics();
            worst = (
                worst.0.max(d.trace_error),
                worst.1.max(d.hermiticity_error),
                worst.2.min(d.min_eigenvalue),
            );
            report.rows.push(row(t, rho)?);
        }
        summary["series"] = json!({
            "points": grid.len(),
            "max_trace_error": worst.0,
            "max_hermiticity_error": worst.1,
            "min_eigenvalue": worst.2,
            "J_M_final": current(states.last().expect("grid is non-empty"))?,
        });
    }
    if cfg.model.steady_state {
        let rho = steady_state(&l)?;
        let d = rho.diagnostics();
        summary["steady_state"] = json!({
            "J_M": current(&rho)?,
            "rho": complex_rows(rho.matrix()),
            "trace_error": d.trace_error,
            "hermiticity_error": d.hermiticity_error,
            "min_eigenvalue": d.min_eigenvalue,
        });
        report.rows.push(row(f64::INFINITY, &rho)?);
    }
    report.summary = summary;
    Ok(report)
}
