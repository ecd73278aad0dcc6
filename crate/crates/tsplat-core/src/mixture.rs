//! Component/mixture/camera data model and the unconstrained↔constrained
//! parameter maps.
//!
//! All learnable parameters are stored raw (unconstrained) and mapped on
//! read: ν through a shifted softplus with a hard upper clamp, opacity
//! through tanh (so components can change sign during training), covariance
//! as Σ = R S SᵀRᵀ with S = diag(exp(log_scale)) and R from a quaternion
//! that is normalized on read and after every optimizer step.

use nalgebra::{Matrix3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard bounds on the tail parameter.
pub const NU_MIN: f64 = 1.0;
pub const NU_MAX: f64 = 10_000.0;

/// Numerically stable softplus: ln(1 + e^x).
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Inverse of softplus: ln(e^y − 1), stable for large y.
fn softplus_inv(y: f64) -> f64 {
    y + (-(-y).exp_m1()).ln()
}

/// Map an unconstrained scalar to ν ∈ [1, 10000].
///
/// Smooth (1 + softplus) near the fat-tailed end where gradients matter,
/// hard-clamped at the top to avoid numerical issues.
pub fn nu_of(raw_nu: f64) -> f64 {
    (NU_MIN + softplus(raw_nu)).min(NU_MAX)
}

/// dν/d(raw_nu); zero where the upper clamp is active.
pub fn nu_of_grad(raw_nu: f64) -> f64 {
    if NU_MIN + softplus(raw_nu) >= NU_MAX {
        0.0
    } else {
        // softplus'(x) = sigmoid(x)
        1.0 / (1.0 + (-raw_nu).exp())
    }
}

/// Inverse of [`nu_of`] for targets strictly inside (1, 10000).
pub fn raw_nu_from(nu: f64) -> f64 {
    softplus_inv(nu - NU_MIN)
}

/// Signed opacity o = tanh(raw) ∈ (−1, 1).
pub fn opacity_of(raw_opacity: f64) -> f64 {
    raw_opacity.tanh()
}

/// do/d(raw) = 1 − o².
pub fn opacity_of_grad(raw_opacity: f64) -> f64 {
    let o = raw_opacity.tanh();
    1.0 - o * o
}

pub fn raw_opacity_from(opacity: f64) -> f64 {
    opacity.atanh()
}

/// Rotation matrix of a quaternion (w, x, y, z), normalized on read.
pub fn rotation_matrix(q: &Vector4<f64>) -> Matrix3<f64> {
    let n = q.norm();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// One signed mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct TComponent {
    /// World-space mean μ.
    pub position: Vector3<f64>,
    /// Log of the per-axis standard deviation; S = diag(exp(log_scale)).
    pub log_scale: Vector3<f64>,
    /// Quaternion (w, x, y, z); stored raw, normalized on read.
    pub rotation: Vector4<f64>,
    /// Unconstrained tail parameter; ν = nu_of(raw_nu).
    pub raw_nu: f64,
    /// Unconstrained opacity; o = tanh(raw_opacity).
    pub raw_opacity: f64,
    /// Spherical-harmonic coefficients, one RGB triple per basis function.
    pub sh_coeffs: Vec<[f64; 3]>,
}

impl TComponent {
    /// Isotropic component with identity rotation and a given SH coefficient
    /// count. ν and o are given in constrained space.
    pub fn new(position: Vector3<f64>, scale: f64, nu: f64, opacity: f64, n_coeffs: usize) -> Self {
        TComponent {
            position,
            log_scale: Vector3::repeat(scale.ln()),
            rotation: Vector4::new(1.0, 0.0, 0.0, 0.0),
            raw_nu: raw_nu_from(nu),
            raw_opacity: raw_opacity_from(opacity),
            sh_coeffs: vec![[0.0; 3]; n_coeffs],
        }
    }

    pub fn nu(&self) -> f64 {
        nu_of(self.raw_nu)
    }

    pub fn opacity(&self) -> f64 {
        opacity_of(self.raw_opacity)
    }

    /// Σ = R S SᵀRᵀ; symmetric positive-definite for finite log_scale.
    pub fn covariance(&self) -> Matrix3<f64> {
        covariance_of(self)
    }

    /// Symmetric square root Σ^(1/2) = R S Rᵀ.
    pub fn covariance_sqrt(&self) -> Matrix3<f64> {
        let r = rotation_matrix(&self.rotation);
        let s = Matrix3::from_diagonal(&self.log_scale.map(f64::exp));
        r * s * r.transpose()
    }

    pub fn normalize_rotation(&mut self) {
        self.rotation /= self.rotation.norm();
    }
}

/// Σ = R S SᵀRᵀ for a component.
pub fn covariance_of(component: &TComponent) -> Matrix3<f64> {
    let r = rotation_matrix(&component.rotation);
    let m = r * Matrix3::from_diagonal(&component.log_scale.map(f64::exp));
    m * m.transpose()
}

/// Eigenvalues of a symmetric 3×3 matrix, descending. Rejects asymmetric
/// input; for covariances built by [`covariance_of`] the result equals
/// exp(2·log_scale) up to permutation.
pub fn eigenvalues_of(sigma: &Matrix3<f64>) -> Result<[f64; 3]> {
    let max_abs = sigma.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-9 * max_abs {
                return Err(Error::NotSymmetric);
            }
        }
    }
    let mut ev: Vec<f64> = sigma.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok([ev[0], ev[1], ev[2]])
}

/// Ordered component collection plus global rendering attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub components: Vec<TComponent>,
    /// Active SH degree, 0..=3; every component stores (degree+1)² RGB coeffs
    /// for the configured maximum degree.
    pub sh_degree: usize,
    /// Background color blended under the residual transmittance.
    pub background: [f64; 3],
}

impl Mixture {
    pub fn empty(background: [f64; 3]) -> Self {
        Mixture {
            components: Vec::new(),
            sh_degree: 0,
            background,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Pinhole camera: world→camera map x ↦ R x + t plus intrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub rotation_wc: Matrix3<f64>,
    pub translation_wc: Vector3<f64>,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub z_near: f64,
}

impl Camera {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rotation_wc: Matrix3<f64>,
        translation_wc: Vector3<f64>,
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        z_near: f64,
    ) -> Result<Self> {
        let rtr = rotation_wc.transpose() * rotation_wc;
        if (rtr - Matrix3::identity()).norm() > 1e-6 {
            return Err(Error::InvalidCamera("rotation is not orthonormal".into()));
        }
        if fx <= 0.0 || fy <= 0.0 {
            return Err(Error::InvalidCamera("focal lengths must be positive".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("image size must be positive".into()));
        }
        if z_near <= 0.0 {
            return Err(Error::InvalidCamera("z_near must be positive".into()));
        }
        Ok(Camera {
            rotation_wc,
            translation_wc,
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            z_near,
        })
    }

    /// Camera center in world coordinates (−Rᵀ t).
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation_wc.transpose() * self.translation_wc)
    }

    /// World point to camera space.
    pub fn to_camera(&self, p_world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation_wc * p_world + self.translation_wc
    }
}

/// How the position gradient noise term is interpreted; the update equation
/// reads 𝒩(0, 2ε^(3/2)C) as a variance by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseConvention {
    Variance,
    StdDev,
}

/// Which ∂T/∂ν form the backward pass uses. `Full` keeps the derivative of
/// the exponent (the −½·ln(1 + h/ν) term) and matches finite differences;
/// `Partial` drops it and is kept for ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NuGradMode {
    Full,
    Partial,
}

/// All training knobs. Defaults follow the conventions of the splatting
/// lineage where the method itself leaves them open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: u64,
    pub seed: u64,

    /// Effective position step coefficient at unit scene extent: the position
    /// update applies ε² · ∂L/∂μ with ε = sqrt(lr_position · extent).
    pub lr_position: f64,
    /// ε decays geometrically to ε/position_lr_decay at `iterations`.
    pub position_lr_decay: f64,
    pub lr_log_scale: f64,
    pub lr_rotation: f64,
    pub lr_sh: f64,
    pub lr_opacity: f64,
    pub lr_nu: f64,
    pub learn_nu: bool,

    /// SGHMC friction constant C.
    pub friction_c: f64,
    /// Gate steepness k in sigmoid(−k(|o| − t)).
    pub gate_k: f64,
    /// Gate threshold t; friction/noise activate for |o| below it.
    pub gate_t: f64,
    /// Burn-in length as a fraction of `iterations`; friction is dropped and
    /// position noise is shaped by the component covariance during burn-in.
    pub burn_in_frac: f64,
    pub noise_convention: NoiseConvention,

    /// D-SSIM weight in the loss.
    pub w_dssim: f64,
    /// Opacity regularizer weight.
    pub w_opacity: f64,
    /// Covariance (√eigenvalue) regularizer weight.
    pub w_sigma: f64,

    /// Iterations between recycling passes; 0 disables recycling.
    pub relocation_interval: u64,
    /// Fraction of the population that may be relocated at once.
    pub relocation_cap: f64,
    /// Fraction of new zero-opacity components added per recycling pass.
    pub add_fraction: f64,
    /// |o| below this counts as dead.
    pub dead_threshold: f64,
    pub max_components: usize,

    pub nu_init: f64,
    pub opacity_init: f64,

    /// Truncation level: a component is evaluated only where its 2D density
    /// is at least τ.
    pub truncation_tau: f64,
    /// Components with a cutoff radius below this many pixels are skipped.
    pub min_footprint_px: f64,
    /// Early-stop threshold on transmittance; 0 renders exhaustively.
    pub transmittance_floor: f64,
    pub tile_size: usize,

    pub sh_degree_max: usize,
    /// The active SH degree is raised by one every this many iterations.
    pub sh_warmup_interval: u64,

    pub nu_grad: NuGradMode,

    /// Checkpoint every N iterations; 0 writes only the final one.
    pub checkpoint_interval: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 30_000,
            seed: 0,
            lr_position: 1.6e-4,
            position_lr_decay: 100.0,
            lr_log_scale: 5e-3,
            lr_rotation: 1e-3,
            lr_sh: 2.5e-3,
            lr_opacity: 5e-2,
            lr_nu: 2e-2,
            learn_nu: true,
            friction_c: 1.0,
            gate_k: 100.0,
            gate_t: 0.005,
            burn_in_frac: 0.5,
            noise_convention: NoiseConvention::Variance,
            w_dssim: 0.2,
            w_opacity: 0.01,
            w_sigma: 0.01,
            relocation_interval: 100,
            relocation_cap: 0.05,
            add_fraction: 0.05,
            dead_threshold: 0.005,
            max_components: 1_000_000,
            nu_init: 50.0,
            opacity_init: 0.1,
            truncation_tau: 1.0 / 255.0,
            min_footprint_px: 0.3,
            transmittance_floor: 1e-4,
            tile_size: 16,
            sh_degree_max: 3,
            sh_warmup_interval: 1000,
            nu_grad: NuGradMode::Full,
            checkpoint_interval: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lr_position", self.lr_position),
            ("lr_log_scale", self.lr_log_scale),
            ("lr_rotation", self.lr_rotation),
            ("lr_sh", self.lr_sh),
            ("lr_opacity", self.lr_opacity),
            ("lr_nu", self.lr_nu),
            ("position_lr_decay", self.position_lr_decay),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.relocation_cap > 0.0 && self.relocation_cap <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "relocation_cap must be in (0, 1], got {}",
                self.relocation_cap
            )));
        }
        if !(self.truncation_tau > 0.0 && self.truncation_tau < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "truncation_tau must be in (0, 1), got {}",
                self.truncation_tau
            )));
        }
        if !(0.0..=1.0).contains(&self.burn_in_frac) {
            return Err(Error::InvalidConfig(format!(
                "burn_in_frac must be in [0, 1], got {}",
                self.burn_in_frac
            )));
        }
        if self.tile_size == 0 {
            return Err(Error::InvalidConfig("tile_size must be > 0".into()));
        }
        if self.sh_degree_max > 3 {
            return Err(Error::InvalidConfig(format!(
                "sh_degree_max must be <= 3, got {}",
                self.sh_degree_max
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_component(rng: &mut StdRng) -> TComponent {
        let mut q = Vector4::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        q /= q.norm();
        TComponent {
            position: Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ),
            log_scale: Vector3::new(
                rng.gen_range(-1.5..1.0),
                rng.gen_range(-1.5..1.0),
                rng.gen_range(-1.5..1.0),
            ),
            rotation: q,
            raw_nu: rng.gen_range(-2.0..20.0),
            raw_opacity: rng.gen_range(-1.5..1.5),
            sh_coeffs: vec![[0.0; 3]],
        }
    }

    #[test]
    fn nu_map_limits() {
        assert_relative_eq!(nu_of(-40.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(nu_of(0.0), 1.0 + std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(nu_of(10_000.0), 10_000.0);
        assert_eq!(nu_of_grad(10_000.0), 0.0);
    }

    #[test]
    fn opacity_map() {
        assert_eq!(opacity_of(0.0), 0.0);
        assert!(1.0 - opacity_of(20.0) < 1e-15);
        assert!(opacity_of(20.0) < 1.0);
    }

    #[test]
    fn covariance_identity() {
        let c = TComponent::new(Vector3::zeros(), 1.0, 50.0, 0.1, 1);
        assert_relative_eq!(covariance_of(&c), Matrix3::identity(), epsilon = 1e-15);
    }

    #[test]
    fn covariance_axis_scaled() {
        let mut c = TComponent::new(Vector3::zeros(), 1.0, 50.0, 0.1, 1);
        c.log_scale = Vector3::new(2.0f64.ln(), 0.0, 0.0);
        let expected = Matrix3::from_diagonal(&Vector3::new(4.0, 1.0, 1.0));
        assert_relative_eq!(covariance_of(&c), expected, epsilon = 1e-14);
    }

    #[test]
    fn covariance_positive_definite_random() {
        // Eigendecomposition as the oracle for symmetry + positive-definiteness.
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let c = random_component(&mut rng);
            let sigma = covariance_of(&c);
            assert_relative_eq!(sigma, sigma.transpose(), epsilon = 1e-14);
            let ev = eigenvalues_of(&sigma).unwrap();
            assert!(ev[2] > 0.0, "min eigenvalue {} not positive", ev[2]);
        }
    }

    #[test]
    fn eigenvalues_examples() {
        assert_eq!(eigenvalues_of(&Matrix3::identity()).unwrap(), [1.0, 1.0, 1.0]);
        let d = Matrix3::from_diagonal(&Vector3::new(4.0, 1.0, 1.0));
        let ev = eigenvalues_of(&d).unwrap();
        assert_relative_eq!(ev[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(ev[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_similarity_invariant() {
        // Rotation-conjugated diagonal has the diagonal's eigenvalues.
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let c = random_component(&mut rng);
            let r = rotation_matrix(&c.rotation);
            let d = Matrix3::from_diagonal(&Vector3::new(3.0, 0.5, 0.02));
            let ev = eigenvalues_of(&(r * d * r.transpose())).unwrap();
            assert_relative_eq!(ev[0], 3.0, epsilon = 1e-10);
            assert_relative_eq!(ev[1], 0.5, epsilon = 1e-10);
            assert_relative_eq!(ev[2], 0.02, epsilon = 1e-10);
        }
    }

    #[test]
    fn eigenvalues_reject_asymmetric() {
        let m = Matrix3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(matches!(eigenvalues_of(&m), Err(Error::NotSymmetric)));
    }

    // Hamilton product, used only to state the equivariance property.
    fn quat_mul(a: &Vector4<f64>, b: &Vector4<f64>) -> Vector4<f64> {
        Vector4::new(
            a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
        )
    }

    #[test]
    fn covariance_rotation_equivariant() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let c = random_component(&mut rng);
            let mut q = Vector4::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            q /= q.norm();
            let mut rotated = c.clone();
            rotated.rotation = quat_mul(&q, &c.rotation);
            let r = rotation_matrix(&q);
            let expected = r * covariance_of(&c) * r.transpose();
            assert_relative_eq!(covariance_of(&rotated), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn camera_rejects_bad_rotation() {
        let m = Matrix3::new(1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0);
        assert!(Camera::new(m, Vector3::zeros(), 1.0, 1.0, 0.0, 0.0, 8, 8, 0.1).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = TrainConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.truncation_tau = 1.5;
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn nu_round_trip(nu in (1.0 + 1e-6)..9999.0) {
            let raw = raw_nu_from(nu);
            prop_assert!((nu_of(raw) - nu).abs() < 1e-9 * nu.max(1.0));
        }

        #[test]
        fn nu_in_bounds(raw in -1e6f64..1e6) {
            let nu = nu_of(raw);
            prop_assert!((NU_MIN..=NU_MAX).contains(&nu));
        }

        #[test]
        fn opacity_odd(raw in -30.0f64..30.0) {
            prop_assert_eq!(opacity_of(-raw), -opacity_of(raw));
            prop_assert!(opacity_of(raw).abs() < 1.0);
        }

        #[test]
        fn eigenvalues_match_scales(
            ls in prop::array::uniform3(-2.0f64..1.5),
            q in prop::array::uniform4(-1.0f64..1.0),
        ) {
            let qn = Vector4::from(q);
            prop_assume!(qn.norm() > 1e-3);
            let c = TComponent {
                position: Vector3::zeros(),
                log_scale: Vector3::from(ls),
                rotation: qn,
                raw_nu: 0.0,
                raw_opacity: 0.0,
                sh_coeffs: vec![[0.0; 3]],
            };
            let ev = eigenvalues_of(&covariance_of(&c)).unwrap();
            let mut expected: Vec<f64> = ls.iter().map(|l| (2.0 * l).exp()).collect();
            expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (got, want) in ev.iter().zip(&expected) {
                prop_assert!((got - want).abs() < 1e-10 * want.max(1.0));
            }
        }
    }
}
