//! Dense N-level Lindblad engine.
//!
//! The generator
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_k w_k (L_k ρ L_k† - ½{L_k†L_k, ρ})
//! ```
//!
//! is vectorized by stacking the columns of `ρ`, using
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`:
//!
//! ```text
//! 𝓛 = -i(I ⊗ H - Hᵀ ⊗ I) + Σ_k w_k [L_k* ⊗ L_k - ½(I ⊗ L_k†L_k + (L_k†L_k)ᵀ ⊗ I)]
//! ```
//!
//! nalgebra stores matrices column-major, so the column-stacked vector of a
//! matrix is exactly its storage slice.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-12;
pub const DENSITY_HERMITICITY_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-10;
pub const DENSITY_EIGENVALUE_TOL: f64 = -1e-9;
/// Negative eigenvalues above this are accepted as numerical noise in
/// computed states.
pub const NOISE_EIGENVALUE_TOL: f64 = -1e-8;
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Singular values below `KERNEL_TOL * σ_max` count towards the kernel.
pub const KERNEL_TOL: f64 = 1e-10;
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `|i⟩⟨j|` in an `n`-dimensional space.
pub fn ket_bra(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// Projector onto the normalized direction of `state`.
pub fn projector_onto(state: &CVector) -> Result<CMatrix> {
    let norm = state.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Contract("cannot project onto a zero vector".into()));
    }
    let v = state.unscale(norm);
    Ok(&v * v.adjoint())
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Largest entry of `|M - M†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

/// Column-stacked vector of a square matrix.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Largest modulus among the entries.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A density matrix: Hermitian, unit trace, positive semidefinite, all up to
/// numerical tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

/// Deviations of a matrix from being a valid density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
                context: "density matrix must be square".into(),
            });
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Invariant("density matrix has non-finite entries".into()));
        }
        let d = diagnostics(&m);
        if d.hermiticity_error > DENSITY_HERMITICITY_TOL {
            return Err(Error::Invariant(format!(
                "density matrix not Hermitian (max |ρ - ρ†| = {:e})",
                d.hermiticity_error
            )));
        }
        if d.trace_error > DENSITY_TRACE_TOL {
            return Err(Error::Invariant(format!(
                "density matrix trace deviates from 1 by {:e}",
                d.trace_error
            )));
        }
        if d.min_eigenvalue < DENSITY_EIGENVALUE_TOL {
            return Err(Error::Invariant(format!(
                "density matrix has negative eigenvalue {:e}",
                d.min_eigenvalue
            )));
        }
        Ok(DensityMatrix(m))
    }

    /// Wraps a matrix produced by this crate's propagators without checks.
    pub(crate) fn from_raw(m: CMatrix) -> Self {
        DensityMatrix(m)
    }

    pub fn pure(state: &CVector) -> Result<Self> {
        DensityMatrix::new(projector_onto(state)?)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// Real diagonal `ρ_kk`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.0[(k, k)].re).collect()
    }

    pub fn diagnostics(&self) -> Diagnostics {
        diagnostics(&self.0)
    }

    /// `tr(ρ O)`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (&self.0 * op).trace()
    }
}

fn diagnostics(m: &CMatrix) -> Diagnostics {
    Diagnostics {
        trace_error: (m.trace() - ONE).norm(),
        hermiticity_error: hermiticity_error(m),
        min_eigenvalue: min_eigenvalue(&hermitize(m)),
    }
}

fn min_eigenvalue(h: &CMatrix) -> f64 {
    SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// One dissipative channel: jump operator and non-negative rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub jump: CMatrix,
    pub rate: f64,
    pub label: String,
}

impl Channel {
    pub fn new(jump: CMatrix, rate: f64, label: impl Into<String>) -> Result<Self> {
        if !jump.is_square() {
            return Err(Error::DimensionMismatch {
                expected: jump.nrows(),
                found: jump.ncols(),
                context: "jump operator must be square".into(),
            });
        }
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Domain {
                what: "rate",
                value: rate,
                reason: "channel rates must be finite and non-negative",
            });
        }
        Ok(Channel {
            jump,
            rate,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.jump.nrows()
    }
}

/// Continuous measurement of the projector `P` at strength `γ`: a Lindblad
/// channel with jump operator `P`.
pub fn measurement_channel(projector: &CMatrix, gamma: f64) -> Result<Channel> {
    if !projector.is_square() {
        return Err(Error::Contract("projector must be square".into()));
    }
    let idempotency = max_abs(&(projector * projector - projector));
    if idempotency > PROJECTOR_TOL {
        return Err(Error::Contract(format!(
            "measurement operator is not a projector (max |P² - P| = {idempotency:e})"
        )));
    }
    let herm = hermiticity_error(projector);
    if herm > PROJECTOR_TOL {
        return Err(Error::Contract(format!(
            "measurement projector is not Hermitian (max |P - P†| = {herm:e})"
        )));
    }
    Channel::new(projector.clone(), gamma, "measurement")
}

/// `w (L ρ L† - ½{L†L, ρ})`.
pub fn dissipator_apply(channel: &Channel, rho: &CMatrix) -> CMatrix {
    let l = &channel.jump;
    let ld = l.adjoint();
    let ldl = &ld * l;
    let jump = l * rho * &ld;
    let anti = &ldl * rho + rho * &ldl;
    (jump - anti.unscale(2.0)).scale(channel.rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    hamiltonian: CMatrix,
    channels: Vec<Channel>,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMatrix, channels: Vec<Channel>) -> Result<Self> {
        let n = hamiltonian.nrows();
        if hamiltonian.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: hamiltonian.ncols(),
                context: "Hamiltonian must be square".into(),
            });
        }
        let herm = hermiticity_error(&hamiltonian);
        if herm > HAMILTONIAN_HERMITICITY_TOL {
            return Err(Error::Contract(format!(
                "Hamiltonian is not Hermitian (max |H - H†| = {herm:e})"
            )));
        }
        for ch in &channels {
            if ch.jump.nrows() != n || ch.jump.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: ch.jump.nrows(),
                    context: format!("jump operator of channel '{}'", ch.label),
                });
            }
            if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                return Err(Error::Domain {
                    what: "rate",
                    value: ch.rate,
                    reason: "channel rates must be finite and non-negative",
                });
            }
        }
        Ok(LindbladModel {
            hamiltonian,
            channels,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn push_channel(&mut self, channel: Channel) -> Result<()> {
        if channel.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: channel.dim(),
                context: format!("jump operator of channel '{}'", channel.label),
            });
        }
        self.channels.push(channel);
        Ok(())
    }

    /// Matrix-form right-hand side `dρ/dt`.
    pub fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * (-I);
        for ch in &self.channels {
            out += dissipator_apply(ch, rho);
        }
        out
    }
}

/// Superoperator acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: CMatrix,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.nrows(),
                context: "density matrix vs Liouvillian".into(),
            });
        }
        Ok(unvectorize(&(&self.matrix * vectorize(rho)), self.dim))
    }

    /// Largest entry of `⟨⟨I| 𝓛`; zero for a trace-preserving generator.
    pub fn trace_preservation_residual(&self) -> f64 {
        let n = self.dim;
        (0..n * n)
            .map(|col| (0..n).map(|k| self.matrix[(k + k * n, col)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of `𝓛` from its complex Schur form.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let t = self.matrix.clone().schur().unpack().1;
        t.diagonal().iter().copied().collect()
    }

    /// Smallest `-Re λ` over the non-stationary modes, or `None` when every
    /// mode is (numerically) undamped.
    pub fn slowest_decay_rate(&self) -> Option<f64> {
        let scale = max_abs(&self.matrix).max(f64::MIN_POSITIVE);
        let rate = self
            .spectrum()
            .iter()
            .map(|l| -l.re)
            .filter(|r| *r > KERNEL_TOL * scale)
            .fold(f64::INFINITY, f64::min);
        rate.is_finite().then_some(rate)
    }
}

impl std::ops::Add for &Liouvillian {
    type Output = Liouvillian;

    fn add(self, rhs: &Liouvillian) -> Liouvillian {
        assert_eq!(self.dim, rhs.dim, "Liouvillian dimensions differ");
        Liouvillian {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

pub fn build_liouvillian(model: &LindbladModel) -> Result<Liouvillian> {
    let n = model.dim();
    let id = CMatrix::identity(n, n);
    let h = model.hamiltonian();
    let mut matrix = (id.kronecker(h) - h.transpose().kronecker(&id)) * (-I);
    for ch in model.channels() {
        if ch.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: ch.dim(),
                context: format!("jump operator of channel '{}'", ch.label),
            });
        }
        if ch.rate == 0.0 {
            continue;
        }
        let l = &ch.jump;
        let ldl = l.adjoint() * l;
        let jump = l.conjugate().kronecker(l);
        let anti = id.kronecker(&ldl) + ldl.transpose().kronecker(&id);
        matrix += (jump - anti.unscale(2.0)).scale(ch.rate);
    }
    Ok(Liouvillian { dim: n, matrix })
}

/// Unique stationary state from the right singular vector belonging to the
/// smallest singular value of `𝓛`, Hermitized and trace-normalized.
pub fn steady_state(liouvillian: &Liouvillian) -> Result<DensityMatrix> {
    let n = liouvillian.dim();
    let svd = SVD::new(liouvillian.matrix().clone(), false, true);
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    if sigma_max == 0.0 {
        return Err(Error::KernelDimension { dim: n * n });
    }
    let threshold = KERNEL_TOL * sigma_max;
    let kernel_dim = sigma.iter().filter(|&&s| s <= threshold).count();
    if kernel_dim != 1 {
        return Err(Error::KernelDimension { dim: kernel_dim });
    }
    let idx = sigma.imin();
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let null: CVector = v_t.row(idx).adjoint();
    let raw = unvectorize(&null, n);
    let tr = raw.trace();
    if tr.norm() <= f64::EPSILON {
        return Err(Error::Invariant(
            "kernel vector of the Liouvillian is traceless".into(),
        ));
    }
    let rho = hermitize(&raw.map(|z| z / tr));
    let residual = max_abs(&liouvillian.apply(&rho)?);
    let scale = max_abs(liouvillian.matrix()).max(1.0);
    if residual > STEADY_RESIDUAL_TOL * scale {
        return Err(Error::Invariant(format!(
            "steady-state residual {residual:e} exceeds tolerance"
        )));
    }
    let min_eig = min_eigenvalue(&rho);
    if min_eig < NOISE_EIGENVALUE_TOL {
        return Err(Error::Invariant(format!(
            "steady state has negative eigenvalue {min_eig:e}"
        )));
    }
    Ok(DensityMatrix::from_raw(rho))
}

/// `exp(𝓛 t)` by Padé scaling and squaring.
pub fn propagator(liouvillian: &Liouvillian, t: f64) -> CMatrix {
    liouvillian.matrix().scale(t).exp()
}

/// Samples `ρ(t) = exp(𝓛 t) ρ0` on `t_grid` (absolute times, `ρ0` at
/// `t = 0`). Step propagators are reused while the step length is unchanged.
pub fn evolve(
    liouvillian: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let n = liouvillian.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim(),
            context: "initial state vs Liouvillian".into(),
        });
    }
    if let Some(&first) = t_grid.first() {
        if !(first.is_finite() && first >= 0.0) {
            return Err(Error::Precondition(format!(
                "time grid must start at t >= 0, got {first}"
            )));
        }
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::Precondition("time grid must be strictly increasing".into()));
    }

    let mut out = Vec::with_capacity(t_grid.len());
    let mut state = vectorize(rho0.matrix());
    let mut t_prev = 0.0;
    let mut cached: Option<(f64, CMatrix)> = None;
    for &t in t_grid {
        let dt = t - t_prev;
        if dt > 0.0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-14 * dt);
            if !reuse {
                cached = Some((dt, propagator(liouvillian, dt)));
            }
            let (_, prop) = cached.as_ref().expect("propagator cached above");
            state = prop * &state;
            if state.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NonFinite { t });
            }
        }
        out.push(DensityMatrix::from_raw(unvectorize(&state, n)));
        t_prev = t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_density(rng: &mut impl Rng, n: usize) -> DensityMatrix {
        let a = random_matrix(rng, n);
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::new(m.map(|z| z / tr)).unwrap()
    }

    fn random_model(rng: &mut impl Rng, n: usize, channels: usize) -> LindbladModel {
        let h = hermitize(&random_matrix(rng, n));
        let chs = (0..channels)
            .map(|k| Channel::new(random_matrix(rng, n), rng.gen_range(0.0..0.5), format!("c{k}")).unwrap())
            .collect();
        LindbladModel::new(h, chs).unwrap()
    }

    fn sigma_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    // basis order (|e⟩, |g⟩)
    fn sigma_plus() -> CMatrix {
        ket_bra(2, 0, 1)
    }

    fn sigma_minus() -> CMatrix {
        ket_bra(2, 1, 0)
    }

    #[test]
    fn empty_model_gives_zero_liouvillian() {
        let m = LindbladModel::new(CMatrix::zeros(3, 3), vec![]).unwrap();
        let l = build_liouvillian(&m).unwrap();
        assert_eq!(max_abs(l.matrix()), 0.0);
        assert!(matches!(steady_state(&l), Err(Error::KernelDimension { dim: 9 })));
    }

    #[test]
    fn vectorized_action_matches_matrix_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=4 {
            let model = random_model(&mut rng, n, 3);
            let l = build_liouvillian(&model).unwrap();
            let rho = random_density(&mut rng, n);
            let diff = max_abs(&(l.apply(rho.matrix()).unwrap() - model.rhs(rho.matrix())));
            assert!(diff <= 1e-12, "n = {n}: {diff:e}");
            assert!(l.trace_preservation_residual() <= 1e-10);
        }
    }

    #[test]
    fn liouvillian_is_additive_in_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let full = random_model(&mut rng, 3, 3);
        let split_at = 2;
        let bath = LindbladModel::new(full.hamiltonian().clone(), full.channels()[..split_at].to_vec())
            .unwrap();
        let meas = LindbladModel::new(CMatrix::zeros(3, 3), full.channels()[split_at..].to_vec()).unwrap();
        let sum = &build_liouvillian(&bath).unwrap() + &build_liouvillian(&meas).unwrap();
        let whole = build_liouvillian(&full).unwrap();
        assert!(max_abs(&(sum.matrix() - whole.matrix())) <= 1e-15);
    }

    #[test]
    fn identity_projector_has_no_effect() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = measurement_channel(&CMatrix::identity(3, 3), 0.7).unwrap();
        let rho = random_density(&mut rng, 3);
        assert!(max_abs(&dissipator_apply(&ch, rho.matrix())) <= 1e-15);
    }

    #[test]
    fn eigenstate_measurement_is_pure_dephasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gamma = 0.3;
        // measuring |g⟩
        let ch = measurement_channel(&ket_bra(2, 1, 1), gamma).unwrap();
        let sz = sigma_z();
        for _ in 0..5 {
            let rho = random_density(&mut rng, 2);
            let r = rho.matrix();
            let expected = (&sz * r * &sz - r).scale(gamma / 4.0);
            assert!(max_abs(&(dissipator_apply(&ch, r) - expected)) <= 1e-15);
        }
    }

    #[test]
    fn equator_measurement_splits_into_thermal_and_coherent_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let gamma = 0.2;
        for phi in [0.0, 0.4, 2.0] {
            let state = CVector::from_vec(vec![Complex64::from_polar(1.0, phi), c(1.0, 0.0)]);
            let ch = measurement_channel(&projector_onto(&state).unwrap(), gamma).unwrap();
            let (sp, sm) = (sigma_plus(), sigma_minus());
            let rho = random_density(&mut rng, 2);
            let r = rho.matrix();
            let d1 = (-r + &sp * r * &sm + &sm * r * &sp).scale(gamma / 4.0);
            let d2 = (&sp * r * &sp * Complex64::from_polar(1.0, 2.0 * phi)
                + &sm * r * &sm * Complex64::from_polar(1.0, -2.0 * phi))
                .scale(gamma / 4.0);
            assert!(max_abs(&(dissipator_apply(&ch, r) - (&d1 + &d2))) <= 1e-15);
            // the thermal part has equal absorption and emission rates γ/4
            let up = Channel::new(sp.clone(), gamma / 4.0, "a").unwrap();
            let down = Channel::new(sm.clone(), gamma / 4.0, "e").unwrap();
            let thermal = dissipator_apply(&up, r) + dissipator_apply(&down, r);
            let d1_diag = (d1[(0, 0)] - thermal[(0, 0)]).norm() + (d1[(1, 1)] - thermal[(1, 1)]).norm();
            assert!(d1_diag <= 1e-15);
            assert!(d2[(0, 0)].norm() + d2[(1, 1)].norm() <= 1e-15);
        }
    }

    #[test]
    fn dissipator_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let ch = Channel::new(random_matrix(&mut rng, 3), 0.4, "x").unwrap();
            let rho = random_density(&mut rng, 3);
            assert!(dissipator_apply(&ch, rho.matrix()).trace().norm() <= 1e-12);
        }
        let decay = Channel::new(sigma_minus(), 0.05, "emit").unwrap();
        let excited = ket_bra(2, 0, 0);
        let ground = ket_bra(2, 1, 1);
        let out = dissipator_apply(&decay, &excited);
        assert!(max_abs(&(out - (&ground - &excited).scale(0.05))) <= 1e-15);
        // |g⟩⟨g| is the fixed point of pure emission
        assert!(max_abs(&dissipator_apply(&decay, &ground)) <= 1e-12);
    }

    #[test]
    fn non_projector_rejected() {
        let m = CMatrix::identity(2, 2).scale(2.0);
        assert!(matches!(measurement_channel(&m, 1.0), Err(Error::Contract(_))));
        let nonherm = ket_bra(2, 0, 1) + ket_bra(2, 0, 0);
        assert!(matches!(measurement_channel(&nonherm, 1.0), Err(Error::Contract(_))));
    }

    #[test]
    fn model_validation() {
        let h = ket_bra(2, 0, 1);
        assert!(matches!(LindbladModel::new(h, vec![]), Err(Error::Contract(_))));
        let ch = Channel::new(CMatrix::identity(3, 3), 1.0, "big").unwrap();
        assert!(matches!(
            LindbladModel::new(CMatrix::zeros(2, 2), vec![ch]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Channel::new(CMatrix::identity(2, 2), -1.0, "neg").is_err());
    }

    #[test]
    fn thermal_qubit_steady_state() {
        let (gp, gm) = (0.02, 0.01);
        let model = LindbladModel::new(
            sigma_z().scale(0.5),
            vec![
                Channel::new(sigma_plus(), (gp - gm) / 2.0, "a").unwrap(),
                Channel::new(sigma_minus(), (gp + gm) / 2.0, "e").unwrap(),
            ],
        )
        .unwrap();
        let rho = steady_state(&build_liouvillian(&model).unwrap()).unwrap();
        let p = rho.populations();
        assert!((p[0] - (1.0 - gm / gp) / 2.0).abs() <= 1e-12);
        assert!((p[1] - (1.0 + gm / gp) / 2.0).abs() <= 1e-12);
        assert!(rho.matrix()[(0, 1)].norm() <= 1e-12);
    }

    #[test]
    fn degenerate_kernel_reported() {
        // pure dephasing leaves both populations free
        let model = LindbladModel::new(
            sigma_z(),
            vec![Channel::new(sigma_z(), 0.1, "dephase").unwrap()],
        )
        .unwrap();
        assert!(matches!(
            steady_state(&build_liouvillian(&model).unwrap()),
            Err(Error::KernelDimension { dim: 2 })
        ));
    }

    #[test]
    fn evolve_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let model = random_model(&mut rng, 3, 2);
        let l = build_liouvillian(&model).unwrap();
        let rho0 = random_density(&mut rng, 3);
        let out = evolve(&l, &rho0, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(out[0], rho0);

        let (t1, t2) = (0.7, 1.9);
        let two = evolve(&l, &rho0, &[t1, t1 + t2]).unwrap();
        let one = evolve(&l, &rho0, &[t1 + t2]).unwrap();
        assert!(max_abs(&(two[1].matrix() - one[0].matrix())) <= 1e-10);

        assert!(evolve(&l, &rho0, &[1.0, 1.0]).is_err());
        assert!(evolve(&l, &rho0, &[-1.0]).is_err());
        assert!(evolve(&l, &DensityMatrix::maximally_mixed(2), &[1.0]).is_err());
    }

    #[test]
    fn spectrum_of_decaying_qubit() {
        // σ- at rate w: populations relax at w, coherences at w/2 while rotating at ±1
        let w = 0.3;
        let h = (ket_bra(2, 0, 0) - ket_bra(2, 1, 1)).scale(0.5);
        let model = LindbladModel::new(h, vec![Channel::new(ket_bra(2, 1, 0), w, "decay").unwrap()]).unwrap();
        let l = build_liouvillian(&model).unwrap();
        let mut re: Vec<f64> = l.spectrum().iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (got, want) in re.iter().zip([-w, -w / 2.0, -w / 2.0, 0.0]) {
            assert!((got - want).abs() <= 1e-12, "{re:?}");
        }
        assert!((l.slowest_decay_rate().unwrap() - w / 2.0).abs() <= 1e-12);
        let unitary = LindbladModel::new(CMatrix::identity(2, 2), vec![]).unwrap();
        assert_eq!(build_liouvillian(&unitary).unwrap().slowest_decay_rate(), None);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        assert!(DensityMatrix::new(ket_bra(2, 0, 1)).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(neg).is_err());
        let mixed = DensityMatrix::maximally_mixed(4);
        let d = mixed.diagnostics();
        assert!(d.trace_error <= 1e-15 && d.hermiticity_error == 0.0);
        assert!((d.min_eigenvalue - 0.25).abs() <= 1e-15);
    }
}
