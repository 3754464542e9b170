//! Three-level Λ system: a hot bath drives `|0⟩ ↔ |2⟩`, a cold bath drives
//! `|1⟩ ↔ |2⟩`, and the measurement monitors `(|0⟩ + e^{iφ}|1⟩)/√2`.
//!
//! Basis order is `(|0⟩, |1⟩, |2⟩)` with energies `(0, Δ - δ, Δ)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::heat_current_general;
use crate::lindblad::{
    build_liouvillian, ket_bra, measurement_channel, projector_onto, steady_state, CMatrix, CVector, Channel,
    DensityMatrix, LindbladModel,
};
use crate::rates::{bath_rates, BathSpec, RatePair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaParams {
    /// `ε2 - ε0`.
    pub delta_big: f64,
    /// `ε2 - ε1`, with `0 < δ < Δ`.
    pub delta_small: f64,
    pub hot: BathSpec,
    pub cold: BathSpec,
    pub gamma: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRates {
    /// Hot-bath rates at `Δ`.
    pub hot: RatePair,
    /// Cold-bath rates at `δ`.
    pub cold: RatePair,
}

impl LambdaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_big.is_finite() && self.delta_small > 0.0 && self.delta_small < self.delta_big) {
            return Err(Error::Domain {
                what: "delta_small",
                value: self.delta_small,
                reason: "splittings must satisfy 0 < delta_small < delta_big",
            });
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::Domain {
                what: "gamma",
                value: self.gamma,
                reason: "measurement strength must be finite and non-negative",
            });
        }
        if !self.phi.is_finite() {
            return Err(Error::Domain {
                what: "phi",
                value: self.phi,
                reason: "phase must be finite",
            });
        }
        self.hot.validate()?;
        self.cold.validate()?;
        if !(self.hot.temperature > self.cold.temperature) {
            log::warn!(
                "hot bath temperature {} does not exceed cold bath temperature {}",
                self.hot.temperature,
                self.cold.temperature
            );
        }
        Ok(())
    }

    pub fn energies(&self) -> [f64; 3] {
        [0.0, self.delta_big - self.delta_small, self.delta_big]
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        LambdaParams { gamma, ..self.clone() }
    }
}

pub fn lambda_rates(params: &LambdaParams) -> Result<LambdaRates> {
    Ok(LambdaRates {
        hot: bath_rates(params.delta_big, &params.hot)?,
        cold: bath_rates(params.delta_small, &params.cold)?,
    })
}

/// Projector onto `(|0⟩ + e^{iφ}|1⟩)/√2`.
pub fn measured_projector(phi: f64) -> CMatrix {
    let state = CVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, phi),
        Complex64::new(0.0, 0.0),
    ]);
    projector_onto(&state).expect("state is non-zero")
}

/// Four bath channels followed by the measurement channel.
pub fn build_lambda_model(params: &LambdaParams) -> Result<LindbladModel> {
    params.validate()?;
    let rates = lambda_rates(params)?;
    let energies = params.energies();
    let h = CMatrix::from_diagonal(&CVector::from_iterator(
        3,
        energies.iter().map(|&e| Complex64::new(e, 0.0)),
    ));
    let channels = vec![
        Channel::new(ket_bra(3, 0, 2), rates.hot.emit, "hot emission")?,
        Channel::new(ket_bra(3, 2, 0), rates.hot.absorb, "hot absorption")?,
        Channel::new(ket_bra(3, 1, 2), rates.cold.emit, "cold emission")?,
        Channel::new(ket_bra(3, 2, 1), rates.cold.absorb, "cold absorption")?,
        measurement_channel(&measured_projector(params.phi), params.gamma)?,
    ];
    LindbladModel::new(h, channels)
}

/// Inversion between `|0⟩` and `|1⟩` without measurement: `Δ/T_h < δ/T_c`.
///
/// As `T_c → 0` the criterion stays true even though the cold-bath rates
/// (and with them any actual inversion) vanish; it is a rate-ratio statement,
/// not a population guarantee.
pub fn population_inversion_predicted(params: &LambdaParams) -> bool {
    let hot = params.delta_big / params.hot.temperature;
    let cold = params.delta_small / params.cold.temperature;
    hot < cold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub gamma: f64,
    pub heat_current: f64,
    pub populations: [f64; 3],
    /// Actual steady-state inversion `ρ11 > ρ00`.
    pub inverted: bool,
}

pub fn lambda_steady_state(params: &LambdaParams) -> Result<(DensityMatrix, LambdaPoint)> {
    let model = build_lambda_model(params)?;
    let rho = steady_state(&build_liouvillian(&model)?)?;
    let measurement = model.channels().last().expect("measurement channel present");
    let heat_current = heat_current_general(measurement, &rho, &params.energies())?;
    let p = rho.populations();
    let point = LambdaPoint {
        gamma: params.gamma,
        heat_current,
        populations: [p[0], p[1], p[2]],
        inverted: p[1] > p[0],
    };
    Ok((rho, point))
}

/// Steady-state measurement current for each `γ`, in input order.
pub fn lambda_heat_current_sweep(params: &LambdaParams, gammas: &[f64]) -> Vec<Result<LambdaPoint>> {
    gammas
        .par_iter()
        .map(|&g| {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::Domain {
                    what: "gamma",
                    value: g,
                    reason: "measurement strength must be finite and non-negative",
                });
            }
            lambda_steady_state(&params.with_gamma(g)).map(|(_, p)| p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::superposition_heat_current;
    use crate::lindblad::max_abs;
    use approx::assert_abs_diff_eq;

    fn params(t_hot: f64, t_cold: f64, gamma: f64, phi: f64) -> LambdaParams {
        LambdaParams {
            delta_big: 1.0,
            delta_small: 0.5,
            hot: BathSpec::new(0.01, t_hot, 10.0, "hot").unwrap(),
            cold: BathSpec::new(0.01, t_cold, 10.0, "cold").unwrap(),
            gamma,
            phi,
        }
    }

    #[test]
    fn model_structure() {
        let p = params(5.0, 2.0, 0.01, 0.3);
        let m = build_lambda_model(&p).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.channels().len(), 5);
        let proj = &m.channels()[4].jump;
        assert!(max_abs(&(proj * proj - proj)) <= 1e-14);
        assert_eq!(p.energies(), [0.0, 0.5, 1.0]);
    }

    #[test]
    fn equal_temperatures_give_gibbs_state() {
        let t = 2.0;
        let (rho, point) = lambda_steady_state(&params(t, t, 0.0, 0.0)).unwrap();
        let p = point.populations;
        assert_abs_diff_eq!(p[2] / p[0], (-1.0 / t).exp(), epsilon = 1e-10);
        assert_abs_diff_eq!(p[2] / p[1], (-0.5 / t).exp(), epsilon = 1e-10);
        assert!(!point.inverted);
        assert_abs_diff_eq!(point.heat_current, 0.0, epsilon = 1e-18);
        assert!(rho.matrix()[(0, 1)].norm() <= 1e-12);
    }

    #[test]
    fn inversion_predicate() {
        assert!(population_inversion_predicted(&params(5.0, 2.0, 0.0, 0.0)));
        assert!(!population_inversion_predicted(&params(2.0, 2.0, 0.0, 0.0)));
        // boundary Δ/T_h = δ/T_c is not inverted
        assert!(!population_inversion_predicted(&params(4.0, 2.0, 0.0, 0.0)));
        assert!(population_inversion_predicted(&params(5.0, 0.0, 0.0, 0.0)));
    }

    #[test]
    fn negative_current_under_inversion() {
        let p = params(5.0, 2.0, 0.0, 0.0);
        let gammas: Vec<f64> = (0..25).map(|i| 10f64.powf(-4.0 + 3.0 * i as f64 / 24.0)).collect();
        for point in lambda_heat_current_sweep(&p, &gammas) {
            let point = point.unwrap();
            assert!(point.heat_current < 0.0, "gamma {}: {}", point.gamma, point.heat_current);
            assert!(point.inverted);
            let two_level = superposition_heat_current(
                point.gamma,
                0.0,
                0.5,
                point.populations[0],
                point.populations[1],
            );
            assert_abs_diff_eq!(point.heat_current, two_level, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_gamma_and_phase() {
        let zero = lambda_steady_state(&params(5.0, 2.0, 0.0, 0.0)).unwrap().1;
        assert_eq!(zero.heat_current, 0.0);
        let reference = lambda_steady_state(&params(5.0, 2.0, 0.01, 0.0)).unwrap().1.heat_current;
        for phi in [0.5, 1.0, std::f64::consts::PI] {
            let j = lambda_steady_state(&params(5.0, 2.0, 0.01, phi)).unwrap().1.heat_current;
            assert_abs_diff_eq!(j, reference, epsilon = 1e-12 * reference.abs());
        }
    }

    #[test]
    fn invalid_params() {
        let mut p = params(5.0, 2.0, 0.01, 0.0);
        p.delta_small = 1.5;
        assert!(build_lambda_model(&p).is_err());
        let bad = lambda_heat_current_sweep(&params(5.0, 2.0, 0.0, 0.0), &[0.01, -1.0]);
        assert!(bad[0].is_ok());
        assert!(bad[1].is_err());
    }
}
