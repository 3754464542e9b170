//! Scalar inputs of the model: Ohmic baths, thermal occupations, transition
//! rates and the decomposition of the measured projector.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings at or above this value are outside the weak-coupling regime in
/// which the Lindblad description holds.
pub const WEAK_COUPLING_LIMIT: f64 = 0.1;

/// Tolerance for `α² + |β|² = 1/4`.
pub const PROJECTOR_NORM_TOL: f64 = 1e-12;

/// One Ohmic heat bath. Temperature is `k_B T` and the cutoff `ω_c`, both in
/// units of `Δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub kappa: f64,
    pub temperature: f64,
    pub cutoff: f64,
    #[serde(default)]
    pub label: String,
}

impl BathSpec {
    pub fn new(kappa: f64, temperature: f64, cutoff: f64, label: impl Into<String>) -> Result<Self> {
        let bath = BathSpec {
            kappa,
            temperature,
            cutoff,
            label: label.into(),
        };
        bath.validate()?;
        Ok(bath)
    }

    /// Checks the field invariants. A coupling outside the weak-coupling
    /// regime only logs a warning.
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::Domain {
                what: "kappa",
                value: self.kappa,
                reason: "coupling must be finite and non-negative",
            });
        }
        if !(self.temperature >= 0.0) || self.temperature.is_nan() {
            return Err(Error::Domain {
                what: "temperature",
                value: self.temperature,
                reason: "temperature must be non-negative",
            });
        }
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return Err(Error::Domain {
                what: "cutoff",
                value: self.cutoff,
                reason: "cutoff must be finite and positive",
            });
        }
        if !self.is_weak_coupling() {
            log::warn!(
                "bath '{}': kappa = {} is not << 1, Lindblad description may be inaccurate",
                self.label,
                self.kappa
            );
        }
        Ok(())
    }

    pub fn is_weak_coupling(&self) -> bool {
        self.kappa < WEAK_COUPLING_LIMIT
    }
}

/// Continuous measurement of the pure state
/// `|n⟩ ∝ cos(θ/2)|g⟩ + e^{iφ} sin(θ/2)|e⟩` with strength `γ`.
///
/// With this convention `θ = 0` monitors the ground state, `θ = π` the
/// excited state and the equator `θ = π/2` an equal-weight superposition.
/// The projector is `P = I/2 + α σz + β σ+ + β* σ-`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    gamma: f64,
    theta: f64,
    phi: f64,
    alpha: f64,
    beta: Complex64,
}

impl MeasurementSpec {
    pub fn new(gamma: f64, theta: f64, phi: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain {
                what: "theta",
                value: theta,
                reason: "zenith angle must lie in [0, pi]",
            });
        }
        if !phi.is_finite() {
            return Err(Error::Domain {
                what: "phi",
                value: phi,
                reason: "azimuth must be finite",
            });
        }
        let phi = phi.rem_euclid(2.0 * PI);
        let (alpha, beta) = projector_coeffs(theta, phi);
        Ok(MeasurementSpec {
            gamma,
            theta,
            phi,
            alpha,
            beta,
        })
    }

    /// Measurement of `(c_g|g⟩ + c_e|e⟩)/‖·‖` for arbitrary (not necessarily
    /// normalized) complex coefficients.
    pub fn from_coefficients(gamma: f64, c_g: Complex64, c_e: Complex64) -> Result<Self> {
        check_gamma(gamma)?;
        let norm = c_g.norm_sqr() + c_e.norm_sqr();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain {
                what: "|c_g|^2 + |c_e|^2",
                value: norm,
                reason: "state coefficients must not both vanish",
            });
        }
        let alpha = 0.5 * (c_e.norm_sqr() - c_g.norm_sqr()) / norm;
        let beta = c_e * c_g.conj() / norm;
        let theta = (-2.0 * alpha).clamp(-1.0, 1.0).acos();
        let phi = if beta.norm() > 0.0 {
            beta.arg().rem_euclid(2.0 * PI)
        } else {
            0.0
        };
        Ok(MeasurementSpec {
            gamma,
            theta,
            phi,
            alpha,
            beta,
        })
    }

    /// The same measured state at a different strength.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(MeasurementSpec { gamma, ..*self })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn beta_sqr(&self) -> f64 {
        self.beta.norm_sqr()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "gamma",
            value: gamma,
            reason: "measurement strength must be finite and non-negative",
        })
    }
}

/// Absorption and emission rates of one bath at one transition energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub absorb: f64,
    pub emit: f64,
}

/// Bath sums `Γ+ = Σ(Γe + Γa)`, `Γ- = Σ(Γe - Γa)` and `Γ̃+ = Γ+ + γ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateRates {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_plus_tilde: f64,
}

/// Ohmic spectral density `I(ω) = 2 κ ω exp(-ω/ω_c)`.
pub fn ohmic_spectral_density(omega: f64, bath: &BathSpec) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain {
            what: "omega",
            value: omega,
            reason: "spectral density is defined for omega >= 0",
        });
    }
    Ok(2.0 * bath.kappa * omega * (-omega / bath.cutoff).exp())
}

/// Bose-Einstein occupation `1/(exp(ε/T) - 1)`; exactly zero at `T = 0`.
pub fn bose_einstein(energy: f64, temperature: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::Domain {
            what: "energy",
            value: energy,
            reason: "occupation diverges for energy <= 0",
        });
    }
    if !(temperature >= 0.0) {
        return Err(Error::Domain {
            what: "temperature",
            value: temperature,
            reason: "temperature must be non-negative",
        });
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (energy / temperature).exp_m1())
}

/// Single-photon absorption/emission rates of `bath` for a transition of
/// energy `delta`.
pub fn bath_rates(delta: f64, bath: &BathSpec) -> Result<RatePair> {
    let spectral = ohmic_spectral_density(delta, bath)?;
    let n = bose_einstein(delta, bath.temperature)?;
    let prefactor = FRAC_PI_2 * spectral;
    Ok(RatePair {
        absorb: prefactor * n,
        emit: prefactor * (1.0 + n),
    })
}

pub fn aggregate_rates(rates: &[RatePair], gamma: f64) -> AggregateRates {
    let (gamma_plus, gamma_minus) = rates.iter().fold((0.0, 0.0), |(p, m), r| {
        (p + r.emit + r.absorb, m + r.emit - r.absorb)
    });
    AggregateRates {
        gamma_plus,
        gamma_minus,
        gamma_plus_tilde: gamma_plus + 0.5 * gamma,
    }
}

/// `(α, β)` of the projector onto `cos(θ/2)|g⟩ + e^{iφ} sin(θ/2)|e⟩`.
pub fn projector_coeffs(theta: f64, phi: f64) -> (f64, Complex64) {
    let alpha = -0.5 * theta.cos();
    let beta = Complex64::from_polar(0.5 * theta.sin(), phi);
    (alpha, beta)
}
