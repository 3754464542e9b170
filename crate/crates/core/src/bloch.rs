//! Qubit dynamics in Bloch-vector form.
//!
//! With `H = (Δ/2) σz`, thermal baths summarized by `Γ±` and a measurement of
//! `P = I/2 + α σz + β σ+ + β* σ-` (`β = β' + iβ''`), the Lindblad equation
//! reduces to the affine system
//!
//! ```text
//! ż = -Γ-  - (Γ+ + 2|β|²γ) z + 2αβ'γ x - 2αβ''γ y
//! ẋ = -((Γ+ + γ)/2 - 2β'²γ) x - (Δ + 2β'β''γ) y + 2αβ'γ z
//! ẏ = -((Γ+ + γ)/2 - 2β''²γ) y + (Δ - 2β'β''γ) x - 2αβ''γ z
//! ```
//!
//! Density matrices use the basis order `(|e⟩, |g⟩)`, so `σz = diag(1, -1)`
//! and `σ+ = |e⟩⟨g|`.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{ket_bra, measurement_channel, CMatrix, Channel, DensityMatrix, LindbladModel};
use crate::rates::{aggregate_rates, bath_rates, BathSpec, MeasurementSpec};

/// Tolerance used to decide that `α` or `β` vanishes.
pub const COEFF_ZERO_TOL: f64 = 1e-12;
pub const BLOCH_BALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

/// Time derivative of a [`BlochState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochRate {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl BlochRate {
    pub fn max_abs(&self) -> f64 {
        self.dx.abs().max(self.dy.abs()).max(self.dz.abs())
    }
}

impl BlochState {
    pub fn new(x: f64, y: f64, z: f64, t: f64) -> Self {
        BlochState { x, y, z, t }
    }

    pub fn at_rest(x: f64, y: f64, z: f64) -> Self {
        BlochState { x, y, z, t: 0.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn in_bloch_ball(&self) -> bool {
        self.norm_sqr() <= 1.0 + BLOCH_BALL_TOL
    }

    fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    fn from_vector(v: &Vector3<f64>, t: f64) -> Self {
        BlochState { x: v[0], y: v[1], z: v[2], t }
    }

    /// `ρ = (I + x σx + y σy + z σz)/2`.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let half = 0.5;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(half * (1.0 + self.z), 0.0),
                Complex64::new(half * self.x, -half * self.y),
                Complex64::new(half * self.x, half * self.y),
                Complex64::new(half * (1.0 - self.z), 0.0),
            ],
        );
        DensityMatrix::new(m)
    }

    pub fn from_density(rho: &DensityMatrix, t: f64) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: rho.dim(),
                context: "Bloch vector needs a qubit density matrix".into(),
            });
        }
        let m = rho.matrix();
        let off = m[(1, 0)];
        Ok(BlochState {
            x: 2.0 * off.re,
            y: 2.0 * off.im,
            z: (m[(0, 0)] - m[(1, 1)]).re,
            t,
        })
    }
}

/// A qubit of splitting `Δ` coupled to thermal baths (through `Γ±`) and to a
/// continuous measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitModel {
    delta: f64,
    gamma_plus: f64,
    gamma_minus: f64,
    meas: MeasurementSpec,
}

impl QubitModel {
    pub fn from_rates(delta: f64, gamma_plus: f64, gamma_minus: f64, meas: MeasurementSpec) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain {
                what: "delta",
                value: delta,
                reason: "level splitting must be positive",
            });
        }
        if !(gamma_plus.is_finite() && gamma_plus >= 0.0) {
            return Err(Error::Domain {
                what: "gamma_plus",
                value: gamma_plus,
                reason: "must be finite and non-negative",
            });
        }
        if !(gamma_minus.is_finite() && gamma_minus >= 0.0 && gamma_minus <= gamma_plus) {
            return Err(Error::Domain {
                what: "gamma_minus",
                value: gamma_minus,
                reason: "must lie in [0, gamma_plus] for non-negative temperatures",
            });
        }
        Ok(QubitModel {
            delta,
            gamma_plus,
            gamma_minus,
            meas,
        })
    }

    pub fn from_baths(delta: f64, baths: &[BathSpec], meas: MeasurementSpec) -> Result<Self> {
        if baths.is_empty() && meas.gamma() == 0.0 {
            return Err(Error::Degenerate(
                "qubit needs at least one bath or a measurement with gamma > 0".into(),
            ));
        }
        let rates = baths
            .iter()
            .map(|b| {
                b.validate()?;
                bath_rates(delta, b)
            })
            .collect::<Result<Vec<_>>>()?;
        let agg = aggregate_rates(&rates, meas.gamma());
        QubitModel::from_rates(delta, agg.gamma_plus, agg.gamma_minus, meas)
    }

    pub fn with_measurement(&self, meas: MeasurementSpec) -> Self {
        QubitModel { meas, ..*self }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma_plus(&self) -> f64 {
        self.gamma_plus
    }

    pub fn gamma_minus(&self) -> f64 {
        self.gamma_minus
    }

    pub fn gamma(&self) -> f64 {
        self.meas.gamma()
    }

    pub fn gamma_plus_tilde(&self) -> f64 {
        self.gamma_plus + 0.5 * self.meas.gamma()
    }

    pub fn measurement(&self) -> &MeasurementSpec {
        &self.meas
    }

    /// Damping coefficient of `z`: `Γ+ + 2|β|²γ`.
    pub fn damping_z(&self) -> f64 {
        self.gamma_plus + 2.0 * self.meas.beta_sqr() * self.meas.gamma()
    }

    pub fn damping_x(&self) -> f64 {
        let bp = self.meas.beta().re;
        0.5 * (self.gamma_plus + self.gamma()) - 2.0 * bp * bp * self.gamma()
    }

    pub fn damping_y(&self) -> f64 {
        let bpp = self.meas.beta().im;
        0.5 * (self.gamma_plus + self.gamma()) - 2.0 * bpp * bpp * self.gamma()
    }

    /// Linear part `A` and inhomogeneity `b` of `d(x, y, z)/dt = A (x, y, z) + b`.
    pub fn generator(&self) -> (Matrix3<f64>, Vector3<f64>) {
        let g = self.gamma();
        let a = self.meas.alpha();
        let (bp, bpp) = (self.meas.beta().re, self.meas.beta().im);
        let cross = 2.0 * bp * bpp * g;
        let xz = 2.0 * a * bp * g;
        let yz = -2.0 * a * bpp * g;
        #[rustfmt::skip]
        let m = Matrix3::new(
            -self.damping_x(),   -(self.delta + cross), xz,
            self.delta - cross,  -self.damping_y(),     yz,
            xz,                  yz,                    -self.damping_z(),
        );
        (m, Vector3::new(0.0, 0.0, -self.gamma_minus))
    }

    /// Slowest relaxation rate: the smallest `-Re λ` over the eigenvalues of
    /// the linear part of the Bloch equations.
    pub fn slowest_decay_rate(&self) -> f64 {
        let (a, _) = self.generator();
        a.complex_eigenvalues()
            .iter()
            .map(|l| -l.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// The same qubit as a generic [`LindbladModel`] in the `(|e⟩, |g⟩)` basis.
    pub fn to_lindblad(&self) -> Result<LindbladModel> {
        let absorb = 0.5 * (self.gamma_plus - self.gamma_minus);
        let emit = 0.5 * (self.gamma_plus + self.gamma_minus);
        let h = (ket_bra(2, 0, 0) - ket_bra(2, 1, 1)).scale(0.5 * self.delta);
        LindbladModel::new(
            h,
            vec![
                Channel::new(ket_bra(2, 0, 1), absorb, "bath absorption")?,
                Channel::new(ket_bra(2, 1, 0), emit, "bath emission")?,
                measurement_channel(&self.projector(), self.gamma())?,
            ],
        )
    }

    /// `P = I/2 + α σz + β σ+ + β* σ-`.
    pub fn projector(&self) -> CMatrix {
        let a = self.meas.alpha();
        let b = self.meas.beta();
        CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5 + a, 0.0),
                b,
                b.conj(),
                Complex64::new(0.5 - a, 0.0),
            ],
        )
    }
}

pub fn bloch_rhs(state: &BlochState, model: &QubitModel) -> BlochRate {
    let (a, b) = model.generator();
    let d = a * state.vector() + b;
    BlochRate {
        dx: d[0],
        dy: d[1],
        dz: d[2],
    }
}

/// Step size `min(0.01/Δ, 0.1/Γ̃+)`.
pub fn default_step(model: &QubitModel) -> f64 {
    let by_delta = 0.01 / model.delta();
    let gt = model.gamma_plus_tilde();
    if gt > 0.0 {
        by_delta.min(0.1 / gt)
    } else {
        by_delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<BlochState>,
    pub step: f64,
    pub method: &'static str,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }

    pub fn last(&self) -> &BlochState {
        self.states.last().expect("trajectory is never empty")
    }
}

/// Classic fixed-step RK4 on `[0, t_end]`.
///
/// The grid is uniform with `n = ceil(t_end/dt)` steps of `t_end/n`, and
/// `t_i = i · t_end/n`, so the output is independent of accumulated rounding.
pub fn integrate(model: &QubitModel, init: BlochState, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Precondition(format!("t_end must be positive, got {t_end}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Precondition(format!("dt must be positive, got {dt}")));
    }
    let ratio = t_end / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio {
        ratio.round()
    } else {
        ratio.ceil()
    }
    .max(1.0) as usize;
    let h = t_end / steps as f64;
    let (a, b) = model.generator();
    let f = |v: &Vector3<f64>| a * v + b;

    let mut states = Vec::with_capacity(steps + 1);
    let mut v = init.vector();
    states.push(BlochState { t: 0.0, ..init });
    for i in 1..=steps {
        let k1 = f(&v);
        let k2 = f(&(v + k1 * (0.5 * h)));
        let k3 = f(&(v + k2 * (0.5 * h)));
        let k4 = f(&(v + k3 * h));
        v += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        let t = i as f64 * h;
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        states.push(BlochState::from_vector(&v, t));
    }
    Ok(Trajectory {
        states,
        step: h,
        method: "rk4",
    })
}

/// Oscillation frequency of the decoupled `(x, y)` block,
/// `sqrt(c_x c_y - ((a_x - a_y)/2)²)` with `ẋ = -a_x x - c_x y`,
/// `ẏ = c_y x - a_y y`. Returns `None` when the block is overdamped.
///
/// For `β = 0` this is `Δ`; on the equator it is `sqrt(Δ² - γ²/16)`.
pub fn delta_osc(model: &QubitModel) -> Option<f64> {
    let (a, _) = model.generator();
    let d = 0.5 * (a[(1, 1)] - a[(0, 0)]);
    let sq = -a[(0, 1)] * a[(1, 0)] - d * d;
    (sq >= 0.0).then(|| sq.sqrt())
}

/// Exact solution when `β = 0` (an energy eigenstate is monitored).
pub fn closed_form_case_i(t: f64, init: &BlochState, model: &QubitModel) -> Result<BlochState> {
    let beta = model.measurement().beta().norm();
    if beta > COEFF_ZERO_TOL {
        return Err(Error::Contract(format!(
            "eigenstate solution requires beta = 0, got |beta| = {beta:e}"
        )));
    }
    decoupled_solution(t, init, model)
}

/// Exact solution when `α = 0` (an equal-weight superposition is monitored).
pub fn closed_form_case_ii(t: f64, init: &BlochState, model: &QubitModel) -> Result<BlochState> {
    let alpha = model.measurement().alpha();
    if alpha.abs() > COEFF_ZERO_TOL {
        return Err(Error::Contract(format!(
            "superposition solution requires alpha = 0, got alpha = {alpha:e}"
        )));
    }
    if delta_osc(model).is_none() {
        return Err(Error::Precondition(format!(
            "oscillation frequency is imaginary (gamma = {} > 4 delta = {})",
            model.gamma(),
            4.0 * model.delta()
        )));
    }
    decoupled_solution(t, init, model)
}

/// With `αβ = 0`, `z` relaxes on its own and `(x, y)` is a damped rotation.
fn decoupled_solution(t: f64, init: &BlochState, model: &QubitModel) -> Result<BlochState> {
    let (a, _) = model.generator();
    let rate_z = model.damping_z();
    let z = if rate_z > 0.0 {
        let z_inf = -model.gamma_minus() / rate_z;
        z_inf + (init.z - z_inf) * (-rate_z * t).exp()
    } else {
        init.z
    };

    let (ax, ay) = (-a[(0, 0)], -a[(1, 1)]);
    let (cx, cy) = (-a[(0, 1)], a[(1, 0)]);
    let mean = 0.5 * (ax + ay);
    let half_diff = 0.5 * (ax - ay);
    let freq = delta_osc(model).ok_or_else(|| {
        Error::Precondition("overdamped coherence block has no oscillatory solution".into())
    })?;
    let (cos, sinc) = if freq > 0.0 {
        ((freq * t).cos(), (freq * t).sin() / freq)
    } else {
        (1.0, t)
    };
    let env = (-mean * t).exp();
    let x = env * ((cos - half_diff * sinc) * init.x - cx * sinc * init.y);
    let y = env * ((cos + half_diff * sinc) * init.y + cy * sinc * init.x);
    Ok(BlochState { x, y, z, t })
}

/// Closed-form stationary Bloch vector.
pub fn steady_state_bloch(model: &QubitModel) -> Result<BlochState> {
    let delta = model.delta();
    let gp = model.gamma_plus();
    let gm = model.gamma_minus();
    let g = model.gamma();
    let a = model.measurement().alpha();
    let b = model.measurement().beta();
    let b2 = b.norm_sqr();
    let (bp, bpp) = (b.re, b.im);

    let den = steady_denominator(model);
    if !(den > 0.0) {
        return Err(Error::Degenerate(format!(
            "steady-state denominator vanishes (gamma_plus = {gp}, gamma = {g}, |beta|^2 = {b2})"
        )));
    }
    let gpg = gp + g;
    let z = -gm * (4.0 * delta * delta + gpg * (gpg - 4.0 * b2 * g)) / den;
    let x = -4.0 * a * g * gm * (2.0 * delta * bpp + gpg * bp) / den;
    let y = -4.0 * a * g * gm * (2.0 * delta * bp - gpg * bpp) / den;
    Ok(BlochState { x, y, z, t: f64::INFINITY })
}

/// `4Δ²(Γ+ + 2|β|²γ) + Γ+(Γ+ + γ)(Γ+ + γ - 2|β|²γ)`.
pub(crate) fn steady_denominator(model: &QubitModel) -> f64 {
    let delta = model.delta();
    let gp = model.gamma_plus();
    let g = model.gamma();
    let b2 = model.measurement().beta_sqr();
    4.0 * delta * delta * (gp + 2.0 * b2 * g) + gp * (gp + g) * (gp + g - 2.0 * b2 * g)
}
