//! Oracle cross-checks run by `measheat selftest`. Seeds are fixed so the
//! report is reproducible byte for byte.

use std::f64::consts::{FRAC_PI_2, PI};

use measheat::bloch::{
    closed_form_case_i, closed_form_case_ii, integrate, steady_state_bloch, BlochState, QubitModel,
};
use measheat::heat::{
    excess_heat_max, heat_current_bounds, heat_current_general, heat_current_instant, steady_state_heat_current,
    transient_heat_current_equator, HeatSeries,
};
use measheat::lambda_model::{lambda_steady_state, LambdaParams};
use measheat::lindblad::{
    build_liouvillian, evolve, hermitize, max_abs, propagator, CMatrix, Channel, DensityMatrix, LindbladModel,
};
use measheat::rates::{BathSpec, MeasurementSpec};
use measheat::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::commands::excess_heat_row;
use crate::output::{Cell, Report};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn random_qubit(rng: &mut ChaCha8Rng) -> QubitModel {
    let gamma = log_uniform(rng, 1e-4, 1e-1);
    let gp = log_uniform(rng, 1e-4, 1e-1);
    let gm = rng.gen::<f64>() * gp;
    let meas = MeasurementSpec::new(gamma, rng.gen::<f64>() * PI, rng.gen::<f64>() * 2.0 * PI)
        .expect("sampled inside the domain");
    QubitModel::from_rates(1.0, gp, gm, meas).expect("sampled inside the domain")
}

fn defaults(theta: f64, phi: f64) -> QubitModel {
    let meas = MeasurementSpec::new(0.01, theta, phi).expect("valid angles");
    QubitModel::from_rates(1.0, 0.02, 0.01, meas).expect("valid rates")
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Worst error of a check, with failures to evaluate counted as infinite.
fn worst(values: impl IntoIterator<Item = measheat::Result<f64>>) -> f64 {
    values
        .into_iter()
        .map(|v| v.unwrap_or(f64::INFINITY))
        .fold(0.0, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

fn steady_state_paths(models: &[QubitModel]) -> f64 {
    worst(models.iter().map(|m| {
        let closed = steady_state_heat_current(m)?;
        let via_bloch = heat_current_instant(&steady_state_bloch(m)?, m.measurement(), m.delta());
        let lm = m.to_lindblad()?;
        let rho = measheat::lindblad::steady_state(&build_liouvillian(&lm)?)?;
        let via_engine = heat_current_general(&lm.channels()[2], &rho, &[0.5 * m.delta(), -0.5 * m.delta()])?;
        Ok(rel(closed, via_bloch).max(rel(closed, via_engine)).max(rel(via_bloch, via_engine)))
    }))
}

fn bounds(models: &[QubitModel]) -> f64 {
    worst(models.iter().map(|m| {
        let (_, hi) = heat_current_bounds(m);
        let j = steady_state_heat_current(m)?;
        let at = |theta: f64| -> measheat::Result<f64> {
            let meas = MeasurementSpec::new(m.gamma(), theta, m.measurement().phi())?;
            steady_state_heat_current(&m.with_measurement(meas))
        };
        let violation = (-j).max(j - hi).max(0.0);
        Ok(violation.max(at(0.0)?.abs()).max(at(PI)?.abs()).max((at(FRAC_PI_2)? - hi).abs()))
    }))
}

fn transients() -> f64 {
    let init = BlochState::at_rest(0.6, -0.2, 0.3);
    let mut cases = Vec::new();
    for phi in [0.0, PI / 3.0] {
        for theta in [0.0, FRAC_PI_2, PI] {
            cases.push((theta, phi));
        }
    }
    worst(cases.into_iter().map(|(theta, phi)| {
        let m = defaults(theta, phi);
        let traj = integrate(&m, init, 10.0 / m.gamma_plus_tilde(), 0.01)?;
        let mut err = 0.0f64;
        for s in &traj.states {
            let e = if theta == FRAC_PI_2 {
                closed_form_case_ii(s.t, &init, &m)?
            } else {
                closed_form_case_i(s.t, &init, &m)?
            };
            err = err.max((s.x - e.x).abs()).max((s.y - e.y).abs()).max((s.z - e.z).abs());
        }
        Ok(err)
    }))
}

fn equator_current() -> f64 {
    let m = defaults(FRAC_PI_2, 0.0);
    let z0 = -0.5;
    worst([(|| {
        let series = HeatSeries::simulate(&m, BlochState::at_rest(0.0, 0.0, z0), 600.0, 0.01)?;
        let mut err = (series.values()[0] - 1.25e-3).abs();
        for (t, j) in series.times().iter().zip(series.values()) {
            err = err.max((j - transient_heat_current_equator(*t, z0, &m)?).abs());
        }
        Ok(err)
    })()])
}

fn excess_heat() -> f64 {
    let m = defaults(FRAC_PI_2, 0.0);
    worst([(|| Ok(rel(excess_heat_row(&m, 0.01, 600.0)?, excess_heat_max(&m)?)))()])
}

fn lambda_params(t_hot: f64, t_cold: f64, gamma: f64, phi: f64) -> LambdaParams {
    LambdaParams {
        delta_big: 1.0,
        delta_small: 0.5,
        hot: BathSpec::new(0.01, t_hot, 10.0, "hot").expect("valid bath"),
        cold: BathSpec::new(0.01, t_cold, 10.0, "cold").expect("valid bath"),
        gamma,
        phi,
    }
}

/// Zero when every inverted-regime current is negative with `ρ11 > ρ00` and
/// every equal-temperature current is non-negative; otherwise the size of the
/// worst wrong-signed current.
fn lambda_signs() -> f64 {
    let gammas = [1e-4, 1e-3, 1e-2, 1e-1];
    let inverted = gammas.iter().map(|&g| {
        let (_, p) = lambda_steady_state(&lambda_params(5.0, 2.0, g, 0.0))?;
        let wrong = if p.populations[1] > p.populations[0] { 0.0 } else { f64::INFINITY };
        Ok(p.heat_current.max(0.0).max(wrong))
    });
    let equal = gammas.iter().map(|&g| {
        let (_, p) = lambda_steady_state(&lambda_params(2.0, 2.0, g, 0.0))?;
        Ok((-p.heat_current).max(0.0))
    });
    worst(inverted.chain(equal))
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_model(rng: &mut ChaCha8Rng, n: usize) -> measheat::Result<LindbladModel> {
    let channels = (0..rng.gen_range(1..=3))
        .map(|k| Channel::new(random_matrix(rng, n), rng.gen_range(0.01..0.5), format!("c{k}")))
        .collect::<measheat::Result<_>>()?;
    LindbladModel::new(hermitize(&random_matrix(rng, n)), channels)
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> measheat::Result<DensityMatrix> {
    let a = random_matrix(rng, n);
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m.map(|z| z / tr))
}

struct CptpErrors {
    drift: f64,
    negativity: f64,
    semigroup: f64,
}

fn cptp(count: usize) -> CptpErrors {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = CptpErrors {
        drift: 0.0,
        negativity: 0.0,
        semigroup: 0.0,
    };
    for case in 0..count {
        let n = 2 + case % 3;
        let result = (|| {
            let l = build_liouvillian(&random_model(&mut rng, n)?)?;
            let rate = l
                .slowest_decay_rate()
                .ok_or_else(|| measheat::Error::Degenerate("undamped random model".into()))?;
            let horizon = 20.0 / rate;
            let grid: Vec<f64> = (1..=50).map(|i| horizon * i as f64 / 50.0).collect();
            let (mut drift, mut negativity) = (0.0f64, 0.0f64);
            for rho in evolve(&l, &random_state(&mut rng, n)?, &grid)? {
                let d = rho.diagnostics();
                drift = drift.max(d.trace_error).max(d.hermiticity_error);
                negativity = negativity.max(-d.min_eigenvalue);
            }
            let (s, t) = (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0));
            let split = propagator(&l, s) * propagator(&l, t);
            Ok::<_, measheat::Error>((drift, negativity, max_abs(&(split - propagator(&l, s + t)))))
        })();
        let (d, neg, sg) = result.unwrap_or((f64::INFINITY, f64::INFINITY, f64::INFINITY));
        out.drift = worst([Ok(out.drift), Ok(d)]);
        out.negativity = worst([Ok(out.negativity), Ok(neg)]);
        out.semigroup = worst([Ok(out.semigroup), Ok(sg)]);
    }
    out
}

fn phase_invariance() -> f64 {
    let phis = [0.0, PI / 4.0, FRAC_PI_2, PI];
    let qubit = (|| {
        let currents = phis
            .iter()
            .map(|&phi| steady_state_heat_current(&defaults(1.0, phi)))
            .collect::<measheat::Result<Vec<_>>>()?;
        let scale = currents.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        Ok(currents.iter().map(|j| (j - currents[0]).abs() / scale).fold(0.0, f64::max))
    })();
    let lambda = (|| {
        let currents = phis
            .iter()
            .map(|&phi| lambda_steady_state(&lambda_params(5.0, 2.0, 0.01, phi)).map(|(_, p)| p.heat_current))
            .collect::<measheat::Result<Vec<_>>>()?;
        let scale = currents.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        Ok(currents.iter().map(|j| (j - currents[0]).abs() / scale).fold(0.0, f64::max))
    })();
    worst([qubit, lambda])
}

pub fn run_checks() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let models: Vec<QubitModel> = (0..50).map(|_| random_qubit(&mut rng)).collect();
    let cptp = cptp(20);
    vec![
        Check {
            name: "steady_state_three_paths",
            max_error: steady_state_paths(&models),
            tolerance: 1e-9,
        },
        Check {
            name: "heat_current_bounds",
            max_error: bounds(&models),
            tolerance: 1e-12,
        },
        Check {
            name: "rk4_vs_closed_forms",
            max_error: transients(),
            tolerance: 1e-8,
        },
        Check {
            name: "equator_transient_current",
            max_error: equator_current(),
            tolerance: 1e-8,
        },
        Check {
            name: "excess_heat_equator",
            max_error: excess_heat(),
            tolerance: 1e-5,
        },
        Check {
            name: "lambda_current_sign",
            max_error: lambda_signs(),
            tolerance: 0.0,
        },
        Check {
            name: "cptp_trace_hermiticity",
            max_error: cptp.drift,
            tolerance: 1e-9,
        },
        Check {
            name: "cptp_positivity",
            max_error: cptp.negativity,
            tolerance: 1e-8,
        },
        Check {
            name: "semigroup_identity",
            max_error: cptp.semigroup,
            tolerance: 1e-10,
        },
        Check {
            name: "phase_invariance",
            max_error: phase_invariance(),
            tolerance: 1e-12,
        },
    ]
}

pub fn run_selftest() -> Report {
    let checks = run_checks();
    let columns = ["check", "max_error", "tolerance", "status"].map(String::from).to_vec();
    let mut report = Report::new(&json!({"kind": "selftest"}), columns);
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        if !c.passed() {
            report
                .failures
                .push(format!("{}: error {:e} exceeds {:e}", c.name, c.max_error, c.tolerance));
        }
        report.rows.push(vec![
            Cell::Text(c.name.into()),
            Cell::Num(c.max_error),
            Cell::Num(c.tolerance),
            Cell::Text(status.into()),
        ]);
    }
    report.summary = json!({
        "passed": checks.iter().filter(|c| c.passed()).count(),
        "total": checks.len(),
    });
    report
}
