//! Closed-form Student's t math: unnormalized 3D density, projection to the
//! image plane, 2D density, truncation radii, and the squared-mixture
//! reference form.
//!
//! Densities are unnormalized (peak value 1), which makes them exactly
//! invariant under affine changes of variables: the |A| factor of the
//! normalized density cancels against the constant we drop.

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::mixture::{Camera, TComponent};

/// A component after projection onto the image plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected2D {
    /// Projected mean in pixels.
    pub mean2d: Vector2<f64>,
    /// Projected covariance in pixels².
    pub cov2d: Matrix2<f64>,
    /// Camera-space z of the mean.
    pub depth: f64,
    pub nu: f64,
    /// Pixel radius at which the 2D density falls to the truncation level.
    pub cutoff_radius_px: f64,
}

/// Unnormalized 3D density [1 + h/ν]^(−(ν+3)/2) with h = (x−μ)ᵀΣ⁻¹(x−μ).
pub fn density3d(x: &Vector3<f64>, mu: &Vector3<f64>, sigma: &Matrix3<f64>, nu: f64) -> Result<f64> {
    let inv = sigma.try_inverse().ok_or(Error::SingularMatrix)?;
    if !inv.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    let d = x - mu;
    let h = (d.transpose() * inv * d)[0].max(0.0);
    Ok((1.0 + h / nu).powf(-(nu + 3.0) / 2.0))
}

/// Unnormalized 2D density [1 + h/ν]^(−(ν+2)/2); one fewer dimension than 3D.
pub fn density2d(u: &Vector2<f64>, proj: &Projected2D) -> Result<f64> {
    let h = mahalanobis2d(u, proj)?;
    Ok(density2d_from_h(h, proj.nu))
}

/// 2D density as a function of the squared Mahalanobis distance.
pub fn density2d_from_h(h: f64, nu: f64) -> f64 {
    (1.0 + h / nu).powf(-(nu + 2.0) / 2.0)
}

/// h(u) = (u − μ²ᴰ)ᵀ(Σ²ᴰ)⁻¹(u − μ²ᴰ).
pub fn mahalanobis2d(u: &Vector2<f64>, proj: &Projected2D) -> Result<f64> {
    let inv = invert2(&proj.cov2d)?;
    let d = u - proj.mean2d;
    Ok((d.transpose() * inv * d)[0].max(0.0))
}

pub(crate) fn invert2(m: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if det.abs() < 1e-300 || !det.is_finite() {
        return Err(Error::SingularMatrix);
    }
    Ok(Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

/// Jacobian of the pinhole map (x, y, z) ↦ (fx·x/z + cx, fy·y/z + cy):
///
/// J = | fx/z    0    −fx·x/z² |
///     |  0    fy/z   −fy·y/z² |
pub fn perspective_jacobian(p_cam: &Vector3<f64>, fx: f64, fy: f64) -> Matrix2x3<f64> {
    let z_inv = 1.0 / p_cam.z;
    let z_inv2 = z_inv * z_inv;
    Matrix2x3::new(
        fx * z_inv,
        0.0,
        -fx * p_cam.x * z_inv2,
        0.0,
        fy * z_inv,
        -fy * p_cam.y * z_inv2,
    )
}

/// Project a component onto the image plane. Returns `None` when the mean is
/// behind the near plane. `tau` is the truncation level used for the cutoff
/// radius.
pub fn project_component(component: &TComponent, camera: &Camera, tau: f64) -> Option<Projected2D> {
    let p = camera.to_camera(&component.position);
    if p.z <= camera.z_near {
        return None;
    }
    let mean2d = Vector2::new(
        camera.fx * p.x / p.z + camera.cx,
        camera.fy * p.y / p.z + camera.cy,
    );
    let j = perspective_jacobian(&p, camera.fx, camera.fy);
    let sigma_cam = camera.rotation_wc * component.covariance() * camera.rotation_wc.transpose();
    let cov2d = j * sigma_cam * j.transpose();
    let nu = component.nu();
    Some(Projected2D {
        mean2d,
        cov2d,
        depth: p.z,
        nu,
        cutoff_radius_px: cutoff_radius(nu, &cov2d, tau),
    })
}

/// Mahalanobis distance at which the unnormalized 2D density equals τ:
/// d = sqrt(ν·(τ^(−2/(ν+2)) − 1)), so density2d(h = d²) = τ exactly.
pub fn cutoff_mahalanobis(nu: f64, tau: f64) -> f64 {
    (nu * (tau.powf(-2.0 / (nu + 2.0)) - 1.0)).sqrt()
}

/// Pixel-space cutoff: the Mahalanobis cut stretched by the largest
/// covariance eigenvalue, so the disc contains the τ-level set.
pub fn cutoff_radius(nu: f64, cov2d: &Matrix2<f64>, tau: f64) -> f64 {
    cutoff_mahalanobis(nu, tau) * max_eigenvalue2(cov2d).max(0.0).sqrt()
}

/// Largest eigenvalue of a symmetric 2×2 matrix.
pub fn max_eigenvalue2(m: &Matrix2<f64>) -> f64 {
    let a = m[(0, 0)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let c = m[(1, 1)];
    0.5 * ((a + c) + ((a - c) * (a - c) + 4.0 * b * b).sqrt())
}

/// Reference form of the squared non-monotonic mixture: returns
/// ((Σᵢ wᵢdᵢ)², ΣᵢΣⱼ wᵢwⱼdᵢdⱼ). The O(K²) expansion is why the squared
/// model is not used for rendering; both routes must agree.
pub fn squared_mixture_eval(weights: &[f64], densities: &[f64]) -> (f64, f64) {
    assert_eq!(weights.len(), densities.len());
    let direct: f64 = weights
        .iter()
        .zip(densities)
        .map(|(w, d)| w * d)
        .sum::<f64>()
        .powi(2);
    let mut expanded = 0.0;
    for (wi, di) in weights.iter().zip(densities) {
        for (wj, dj) in weights.iter().zip(densities) {
            expanded += wi * di * wj * dj;
        }
    }
    (direct, expanded)
}
