//! Heat current out of the measurement apparatus, `J_M = tr[H D_M[ρ]]`, and
//! the excess heat released while relaxing to a new steady state.
//!
//! Positive currents mean the system absorbs heat from the apparatus.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::bloch::{integrate, steady_denominator, BlochState, QubitModel, COEFF_ZERO_TOL};
use crate::error::{Error, Result};
use crate::lindblad::{dissipator_apply, CMatrix, Channel, DensityMatrix};
use crate::rates::MeasurementSpec;

/// Relative tolerance on `|J(t_end) - J_ss|` before a series counts as
/// relaxed.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// `J = -γΔ|β|² z + αγΔ(β' x - β'' y)`.
pub fn heat_current_instant(state: &BlochState, meas: &MeasurementSpec, delta: f64) -> f64 {
    let g = meas.gamma();
    let b = meas.beta();
    -g * delta * meas.beta_sqr() * state.z + meas.alpha() * g * delta * (b.re * state.x - b.im * state.y)
}

/// `Σ_k E_k ⟨k|D_M[ρ]|k⟩`, with the matrix basis taken to be the energy
/// eigenbasis and `energies` the corresponding eigenvalues.
pub fn heat_current_general(measurement: &Channel, rho: &DensityMatrix, energies: &[f64]) -> Result<f64> {
    let n = rho.dim();
    if measurement.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: measurement.dim(),
            context: "measurement channel vs density matrix".into(),
        });
    }
    if energies.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: energies.len(),
            context: "energy list vs density matrix".into(),
        });
    }
    let d = dissipator_apply(measurement, rho.matrix());
    Ok(energies.iter().enumerate().map(|(k, e)| e * d[(k, k)].re).sum())
}

/// Basis-independent `Re tr[H D_M[ρ]]` for an arbitrary Hamiltonian.
pub fn heat_current_trace(hamiltonian: &CMatrix, measurement: &Channel, rho: &DensityMatrix) -> Result<f64> {
    let n = rho.dim();
    if hamiltonian.nrows() != n || measurement.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: hamiltonian.nrows().max(measurement.dim()),
            context: "Hamiltonian/measurement vs density matrix".into(),
        });
    }
    let d = dissipator_apply(measurement, rho.matrix());
    Ok((hamiltonian * d).trace().re)
}

/// Current for a measurement of `(|i⟩ + e^{iφ}|j⟩)/√2`:
/// `-(γ/4)(E_i - E_j)(ρ_ii - ρ_jj)`.
pub fn superposition_heat_current(gamma: f64, e_i: f64, e_j: f64, rho_ii: f64, rho_jj: f64) -> f64 {
    -0.25 * gamma * (e_i - e_j) * (rho_ii - rho_jj)
}

/// Closed-form steady-state current of the measured qubit.
pub fn steady_state_heat_current(model: &QubitModel) -> Result<f64> {
    let den = steady_denominator(model);
    if !(den > 0.0) {
        return Err(Error::Degenerate(format!(
            "steady-state current denominator vanishes (gamma_plus = {}, gamma = {})",
            model.gamma_plus(),
            model.gamma()
        )));
    }
    let delta = model.delta();
    let gp = model.gamma_plus();
    let g = model.gamma();
    let b2 = model.measurement().beta_sqr();
    let num = b2 * delta * g * model.gamma_minus() * (4.0 * delta * delta + gp * (gp + g));
    Ok(num / den)
}

/// `(0, ΔγΓ-/(4Γ+ + 2γ))`, attained at the poles and on the equator.
pub fn heat_current_bounds(model: &QubitModel) -> (f64, f64) {
    let den = 4.0 * model.gamma_plus() + 2.0 * model.gamma();
    if den > 0.0 {
        (0.0, model.delta() * model.gamma() * model.gamma_minus() / den)
    } else {
        (0.0, 0.0)
    }
}

/// Transient current for an equatorial measurement starting from `⟨σz⟩ = z0`.
pub fn transient_heat_current_equator(t: f64, z0: f64, model: &QubitModel) -> Result<f64> {
    let alpha = model.measurement().alpha();
    if alpha.abs() > COEFF_ZERO_TOL {
        return Err(Error::Contract(format!(
            "equator transient requires theta = pi/2 (alpha = {alpha:e})"
        )));
    }
    let gt = model.gamma_plus_tilde();
    if !(gt > 0.0) {
        return Err(Error::Degenerate("gamma_plus + gamma/2 vanishes".into()));
    }
    let ratio = model.gamma_minus() / gt;
    Ok(0.25 * model.gamma() * model.delta() * (ratio - (z0 + ratio) * (-gt * t).exp()))
}

/// Excess heat at the equator when the measurement is switched on in the
/// measurement-free steady state.
pub fn excess_heat_max(model: &QubitModel) -> Result<f64> {
    let gp = model.gamma_plus();
    if !(gp > 0.0) {
        return Err(Error::Degenerate("excess heat needs gamma_plus > 0".into()));
    }
    let gt = model.gamma_plus_tilde();
    Ok(model.delta() * model.gamma() * model.gamma_minus() * (1.0 / gp - 1.0 / gt) / (4.0 * gt))
}

/// Sampled `J_M(t)` with what is needed to integrate it to `t → ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    steady_value: f64,
    /// Slowest exponential relaxation rate of the underlying dynamics.
    decay_rate: f64,
    /// Natural current scale (`γΔ` for a qubit) used by the convergence test.
    scale: f64,
    /// Window at the end of the series over which the residual envelope is
    /// measured; one oscillation period.
    envelope_window: f64,
    pub label: String,
}

impl HeatSeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        steady_value: f64,
        decay_rate: f64,
        scale: f64,
        envelope_window: f64,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
                context: "heat series values vs times".into(),
            });
        }
        if times.len() < 2 {
            return Err(Error::Precondition("heat series needs at least two samples".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("heat series times must be strictly increasing".into()));
        }
        if !steady_value.is_finite() {
            return Err(Error::Precondition("steady value must be finite".into()));
        }
        if !(decay_rate.is_finite() && decay_rate > 0.0) {
            return Err(Error::Precondition(format!(
                "decay rate must be positive, got {decay_rate}"
            )));
        }
        Ok(HeatSeries {
            times,
            values,
            steady_value,
            decay_rate,
            scale: scale.abs(),
            envelope_window: envelope_window.max(0.0),
            label: String::new(),
        })
    }

    /// Integrates the qubit from `init` and records `J_M(t)`.
    pub fn simulate(model: &QubitModel, init: BlochState, t_end: f64, dt: f64) -> Result<Self> {
        let traj = integrate(model, init, t_end, dt)?;
        let meas = model.measurement();
        let (times, values) = traj
            .states
            .iter()
            .map(|s| (s.t, heat_current_instant(s, meas, model.delta())))
            .unzip();
        let steady = steady_state_heat_current(model)?;
        HeatSeries::new(
            times,
            values,
            steady,
            model.slowest_decay_rate(),
            model.gamma() * model.delta(),
            TAU / model.delta(),
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steady_value(&self) -> f64 {
        self.steady_value
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("validated non-empty")
    }

    fn final_deviation(&self) -> f64 {
        self.values.last().expect("validated non-empty") - self.steady_value
    }

    pub fn convergence_tolerance(&self) -> f64 {
        CONVERGENCE_TOL * self.steady_value.abs().max(self.scale)
    }

    pub fn is_converged(&self) -> bool {
        self.final_deviation().abs() <= self.convergence_tolerance()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessHeat {
    /// Quadrature on the grid plus the exponential tail estimate.
    pub value: f64,
    pub tail: f64,
    /// Bound on the neglected tail from the residual envelope.
    pub tail_bound: f64,
}

/// `∫_0^∞ [J(t) - J_ss] dt`: composite Simpson on the samples plus an
/// exponential tail `[J(t_end) - J_ss]/rate`.
pub fn excess_heat(series: &HeatSeries) -> Result<ExcessHeat> {
    let deviation = series.final_deviation();
    let tolerance = series.convergence_tolerance();
    if deviation.abs() > tolerance {
        return Err(Error::Unconverged {
            deviation: deviation.abs(),
            tolerance,
        });
    }
    let shifted: Vec<f64> = series.values.iter().map(|v| v - series.steady_value).collect();
    let body = simpson(&series.times, &shifted);
    let tail = deviation / series.decay_rate;
    let window_start = series.t_end() - series.envelope_window;
    let envelope = series
        .times
        .iter()
        .zip(&shifted)
        .filter(|(t, _)| **t >= window_start)
        .map(|(_, v)| v.abs())
        .fold(deviation.abs(), f64::max);
    Ok(ExcessHeat {
        value: body + tail,
        tail,
        tail_bound: envelope / series.decay_rate,
    })
}

/// Composite Simpson rule on a possibly non-uniform grid; an odd leftover
/// interval is integrated with the quadratic through the last three points.
pub fn simpson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    match n {
        0 | 1 => return 0.0,
        2 => return 0.5 * (x[1] - x[0]) * (y[0] + y[1]),
        _ => {}
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut total = 0.0;
    for i in (0..paired).step_by(2) {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        total += hs / 6.0
            * ((2.0 - h1 / h0) * y[i] + hs * hs / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
    }
    if intervals % 2 == 1 {
        let h0 = x[n - 2] - x[n - 3];
        let h1 = x[n - 1] - x[n - 2];
        total += y[n - 1] * (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1))
            + y[n - 2] * (h1 * h1 + 3.0 * h1 * h0) / (6.0 * h0)
            - y[n - 3] * h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::steady_state_bloch;
    use crate::lindblad::{build_liouvillian, measurement_channel, steady_state};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn qubit(gp: f64, gm: f64, gamma: f64, theta: f64, phi: f64) -> QubitModel {
        QubitModel::from_rates(1.0, gp, gm, MeasurementSpec::new(gamma, theta, phi).unwrap()).unwrap()
    }

    #[test]
    fn instant_current_values() {
        let s = BlochState::at_rest(0.3, -0.7, 0.2);
        let pole = MeasurementSpec::new(0.05, 0.0, 0.0).unwrap();
        assert_eq!(heat_current_instant(&s, &pole, 1.0), 0.0);
        let off = MeasurementSpec::new(0.0, 1.0, 0.5).unwrap();
        assert_eq!(heat_current_instant(&s, &off, 1.0), 0.0);
        let eq = MeasurementSpec::new(0.01, FRAC_PI_2, 0.0).unwrap();
        let j = heat_current_instant(&BlochState::at_rest(0.0, 0.0, -0.4), &eq, 1.0);
        assert_abs_diff_eq!(j, 1e-3, epsilon = 1e-17);
    }

    #[test]
    fn instant_current_matches_trace_definition() {
        let m = qubit(0.02, 0.01, 0.03, 1.2, 0.9);
        let lm = m.to_lindblad().unwrap();
        let meas = &lm.channels()[2];
        let s = BlochState::at_rest(0.25, 0.4, -0.3);
        let rho = s.to_density().unwrap();
        let by_trace = heat_current_trace(lm.hamiltonian(), meas, &rho).unwrap();
        let by_energy = heat_current_general(meas, &rho, &[0.5, -0.5]).unwrap();
        let by_bloch = heat_current_instant(&s, m.measurement(), 1.0);
        assert_abs_diff_eq!(by_trace, by_bloch, epsilon = 1e-16);
        assert_abs_diff_eq!(by_energy, by_bloch, epsilon = 1e-16);
    }

    #[test]
    fn general_current_cases() {
        let m = qubit(0.02, 0.01, 0.01, 0.9, 0.2);
        let lm = m.to_lindblad().unwrap();
        let rho = steady_state(&build_liouvillian(&lm).unwrap()).unwrap();
        let j = heat_current_general(&lm.channels()[2], &rho, &[0.5, -0.5]).unwrap();
        let closed = heat_current_instant(&steady_state_bloch(&m).unwrap(), m.measurement(), 1.0);
        assert_abs_diff_eq!(j, closed, epsilon = 1e-12);

        // balanced and inverted populations in a three-level system
        let n = 3;
        let energies = [0.0, 0.5, 1.0];
        let v = crate::lindblad::CVector::from_vec(vec![
            crate::Complex64::new(1.0, 0.0),
            crate::Complex64::new(1.0, 0.0),
            crate::Complex64::new(0.0, 0.0),
        ]);
        let p = crate::lindblad::projector_onto(&v).unwrap();
        let ch = measurement_channel(&p, 0.1).unwrap();
        let diag = |a: f64, b: f64, c: f64| {
            DensityMatrix::new(CMatrix::from_diagonal(&crate::lindblad::CVector::from_vec(vec![
                a.into(),
                b.into(),
                c.into(),
            ])))
            .unwrap()
        };
        let balanced = diag(0.4, 0.4, 0.2);
        assert_abs_diff_eq!(heat_current_general(&ch, &balanced, &energies).unwrap(), 0.0, epsilon = 1e-17);
        let inverted = diag(0.3, 0.5, 0.2);
        let j = heat_current_general(&ch, &inverted, &energies).unwrap();
        assert!(j < 0.0);
        assert_abs_diff_eq!(j, superposition_heat_current(0.1, 0.0, 0.5, 0.3, 0.5), epsilon = 1e-16);
        assert!(heat_current_general(&ch, &inverted, &energies[..2]).is_err());
        assert_eq!(n, energies.len());
    }

    #[test]
    fn steady_current_values() {
        assert_eq!(steady_state_heat_current(&qubit(0.02, 0.01, 0.01, 0.0, 0.0)).unwrap(), 0.0);
        let eq = qubit(0.02, 0.01, 0.01, FRAC_PI_2, 0.0);
        assert_relative_eq!(steady_state_heat_current(&eq).unwrap(), 1e-3, max_relative = 1e-12);
        assert_relative_eq!(heat_current_bounds(&eq).1, 1e-3, max_relative = 1e-14);
        let a = steady_state_heat_current(&qubit(0.02, 0.01, 0.01, 0.7, 0.0)).unwrap();
        let b = steady_state_heat_current(&qubit(0.02, 0.01, 0.01, PI - 0.7, 0.0)).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert!(matches!(
            steady_state_heat_current(&qubit(0.0, 0.0, 0.1, 0.0, 0.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn bounds_edge_cases() {
        assert_eq!(heat_current_bounds(&qubit(0.02, 0.01, 0.0, 1.0, 0.0)), (0.0, 0.0));
        assert_eq!(heat_current_bounds(&qubit(0.02, 0.0, 0.01, 1.0, 0.0)), (0.0, 0.0));
        let base = qubit(0.02, 0.01, 0.01, 0.0, 0.0);
        let (lo, hi) = heat_current_bounds(&base);
        for i in 0..100 {
            let theta = (PI * i as f64 / 99.0).min(PI);
            let m = base.with_measurement(MeasurementSpec::new(0.01, theta, 0.0).unwrap());
            let j = steady_state_heat_current(&m).unwrap();
            assert!(j >= lo && j <= hi + 1e-15, "theta {theta}: {j}");
        }
    }

    #[test]
    fn equator_transient() {
        let m = qubit(0.02, 0.01, 0.01, FRAC_PI_2, 0.0);
        let (_, jmax) = heat_current_bounds(&m);
        assert_relative_eq!(transient_heat_current_equator(1e5, 0.0, &m).unwrap(), jmax, max_relative = 1e-12);
        let j0 = transient_heat_current_equator(0.0, -0.5, &m).unwrap();
        assert_relative_eq!(j0, 0.01 * 0.01 / (4.0 * 0.02), max_relative = 1e-12);
        // starting below the measured steady population overshoots
        for t in [0.0, 10.0, 100.0] {
            assert!(transient_heat_current_equator(t, -0.9, &m).unwrap() > jmax);
        }
        let off = qubit(0.02, 0.01, 0.01, 1.0, 0.0);
        assert!(matches!(transient_heat_current_equator(1.0, 0.0, &off), Err(Error::Contract(_))));
    }

    #[test]
    fn excess_heat_max_values() {
        assert_eq!(excess_heat_max(&qubit(0.02, 0.01, 0.0, FRAC_PI_2, 0.0)).unwrap(), 0.0);
        assert_relative_eq!(
            excess_heat_max(&qubit(0.02, 0.01, 0.01, FRAC_PI_2, 0.0)).unwrap(),
            0.01,
            max_relative = 1e-12
        );
        assert!(excess_heat_max(&qubit(0.0, 0.0, 0.01, FRAC_PI_2, 0.0)).is_err());
    }

    #[test]
    fn excess_heat_of_flat_series_is_zero() {
        let times: Vec<f64> = (0..101).map(|i| i as f64 * 0.1).collect();
        let s = HeatSeries::new(times, vec![2e-3; 101], 2e-3, 0.1, 0.01, 1.0).unwrap();
        let q = excess_heat(&s).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.tail_bound, 0.0);
    }

    #[test]
    fn excess_heat_of_pole_is_zero() {
        let m = qubit(0.02, 0.01, 0.01, 0.0, 0.0);
        let s = HeatSeries::simulate(&m, BlochState::at_rest(0.7, 0.1, 0.3), 600.0, 0.05).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
        assert_eq!(excess_heat(&s).unwrap().value, 0.0);
    }

    #[test]
    fn excess_heat_matches_closed_form_on_equator() {
        let m = qubit(0.02, 0.01, 0.01, FRAC_PI_2, 0.0);
        let init = BlochState::at_rest(0.0, 0.0, -0.5);
        let s = HeatSeries::simulate(&m, init, 600.0, 0.01).unwrap();
        let q = excess_heat(&s).unwrap();
        assert_relative_eq!(q.value, 0.01, max_relative = 1e-5);
        assert!(q.tail_bound < 1e-6);
    }

    #[test]
    fn unconverged_series_rejected() {
        let m = qubit(0.02, 0.01, 0.01, FRAC_PI_2, 0.0);
        let s = HeatSeries::simulate(&m, BlochState::at_rest(0.0, 0.0, -0.5), 50.0, 0.01).unwrap();
        assert!(!s.is_converged());
        assert!(matches!(excess_heat(&s), Err(Error::Unconverged { .. })));
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let f = |x: f64| 2.0 * x * x * x - x * x + 3.0;
        let exact = |x: f64| 0.5 * x.powi(4) - x.powi(3) / 3.0 + 3.0 * x;
        // uniform, even number of intervals
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        assert_relative_eq!(simpson(&xs, &ys), exact(3.0), max_relative = 1e-13);
        // non-uniform with an odd leftover interval: quadratics exact
        let q = |x: f64| x * x - 2.0 * x;
        let xs = [0.0, 0.2, 0.5, 0.9, 1.0, 1.6];
        let ys: Vec<f64> = xs.iter().map(|&x| q(x)).collect();
        let exact_q = 1.6f64.powi(3) / 3.0 - 1.6 * 1.6;
        assert_relative_eq!(simpson(&xs, &ys), exact_q, max_relative = 1e-13);
    }

    #[test]
    fn series_validation() {
        assert!(HeatSeries::new(vec![0.0, 1.0], vec![0.0], 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(HeatSeries::new(vec![1.0, 1.0], vec![0.0, 0.0], 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(HeatSeries::new(vec![0.0, 1.0], vec![0.0, 0.0], f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(HeatSeries::new(vec![0.0, 1.0], vec![0.0, 0.0], 0.0, 0.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn steady_current_non_negative_and_bounded(
            theta in 0.0..=PI, phi in 0.0..(2.0 * PI),
            gamma in 0.0..0.2f64, gp in 1e-4..0.2f64, frac in 0.0..=1.0f64,
        ) {
            let m = qubit(gp, frac * gp, gamma, theta, phi);
            let j = steady_state_heat_current(&m).unwrap();
            let (lo, hi) = heat_current_bounds(&m);
            prop_assert!(j >= lo);
            prop_assert!(j <= hi * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn closed_form_matches_bloch_steady_state(
            theta in 0.0..=PI, phi in 0.0..(2.0 * PI),
            gamma in 1e-4..0.1f64, gp in 1e-4..0.1f64, frac in 0.0..=1.0f64,
        ) {
            let m = qubit(gp, frac * gp, gamma, theta, phi);
            let a = steady_state_heat_current(&m).unwrap();
            let b = heat_current_instant(&steady_state_bloch(&m).unwrap(), m.measurement(), 1.0);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-18);
        }

        #[test]
        fn phase_independent(theta in 0.0..=PI, gamma in 1e-4..0.1f64, gp in 1e-4..0.1f64) {
            let reference = steady_state_heat_current(&qubit(gp, gp / 2.0, gamma, theta, 0.0)).unwrap();
            for k in 1..8 {
                let phi = k as f64 * PI / 4.0;
                let j = steady_state_heat_current(&qubit(gp, gp / 2.0, gamma, theta, phi)).unwrap();
                prop_assert!((j - reference).abs() <= 1e-12 * reference.abs().max(1e-300));
            }
        }
    }
}
