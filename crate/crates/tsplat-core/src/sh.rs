//! Real spherical-harmonic basis up to degree 3 and view-dependent color
//! evaluation.
//!
//! A channel value is max(0, Σⱼ cⱼ·Bⱼ(dir) + 0.5); the 0.5 offset centers
//! the DC term so a zero coefficient renders mid-gray.

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub const SH_C0: f64 = 0.282_094_791_773_878_14;
const SH_C1: f64 = 0.488_602_511_902_919_9;
const SH_C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
const SH_C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_8,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_8,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

pub const fn coeff_count(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// Basis values B₀..B₍D₊₁₎²₋₁ at a unit direction, written into `out`.
pub fn basis(degree: usize, dir: &Vector3<f64>, out: &mut [f64]) {
    let (x, y, z) = (dir.x, dir.y, dir.z);
    out[0] = SH_C0;
    if degree >= 1 {
        out[1] = -SH_C1 * y;
        out[2] = SH_C1 * z;
        out[3] = -SH_C1 * x;
    }
    if degree >= 2 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        out[4] = SH_C2[0] * x * y;
        out[5] = SH_C2[1] * y * z;
        out[6] = SH_C2[2] * (2.0 * zz - xx - yy);
        out[7] = SH_C2[3] * x * z;
        out[8] = SH_C2[4] * (xx - yy);
    }
    if degree >= 3 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        out[9] = SH_C3[0] * y * (3.0 * xx - yy);
        out[10] = SH_C3[1] * x * y * z;
        out[11] = SH_C3[2] * y * (4.0 * zz - xx - yy);
        out[12] = SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
        out[13] = SH_C3[4] * x * (4.0 * zz - xx - yy);
        out[14] = SH_C3[5] * z * (xx - yy);
        out[15] = SH_C3[6] * x * (xx - yy);
    }
}

/// Gradient of each basis value with respect to the (unit) direction.
pub fn basis_grad(degree: usize, dir: &Vector3<f64>, out: &mut [Vector3<f64>]) {
    let (x, y, z) = (dir.x, dir.y, dir.z);
    out[0] = Vector3::zeros();
    if degree >= 1 {
        out[1] = Vector3::new(0.0, -SH_C1, 0.0);
        out[2] = Vector3::new(0.0, 0.0, SH_C1);
        out[3] = Vector3::new(-SH_C1, 0.0, 0.0);
    }
    if degree >= 2 {
        out[4] = SH_C2[0] * Vector3::new(y, x, 0.0);
        out[5] = SH_C2[1] * Vector3::new(0.0, z, y);
        out[6] = SH_C2[2] * Vector3::new(-2.0 * x, -2.0 * y, 4.0 * z);
        out[7] = SH_C2[3] * Vector3::new(z, 0.0, x);
        out[8] = SH_C2[4] * Vector3::new(2.0 * x, -2.0 * y, 0.0);
    }
    if degree >= 3 {
        let (xx, yy, zz) = (x * x, y * y, z * z);
        out[9] = SH_C3[0] * Vector3::new(6.0 * x * y, 3.0 * xx - 3.0 * yy, 0.0);
        out[10] = SH_C3[1] * Vector3::new(y * z, x * z, x * y);
        out[11] = SH_C3[2] * Vector3::new(-2.0 * x * y, 4.0 * zz - xx - 3.0 * yy, 8.0 * y * z);
        out[12] = SH_C3[3] * Vector3::new(-6.0 * x * z, -6.0 * y * z, 6.0 * zz - 3.0 * xx - 3.0 * yy);
        out[13] = SH_C3[4] * Vector3::new(4.0 * zz - 3.0 * xx - yy, -2.0 * x * y, 8.0 * x * z);
        out[14] = SH_C3[5] * Vector3::new(2.0 * x * z, -2.0 * y * z, xx - yy);
        out[15] = SH_C3[6] * Vector3::new(3.0 * xx - yy, -2.0 * x * y, 0.0);
    }
}

/// Evaluate view-dependent RGB. `view_dir` must be unit length; errors if the
/// requested degree needs more coefficients than stored.
pub fn sh_to_color(sh_coeffs: &[[f64; 3]], view_dir: &Vector3<f64>, degree: usize) -> Result<[f64; 3]> {
    let needed = coeff_count(degree);
    if sh_coeffs.len() < needed {
        let stored = (sh_coeffs.len() as f64).sqrt() as usize;
        return Err(Error::ShDegree {
            requested: degree,
            stored: stored.saturating_sub(1),
        });
    }
    let mut b = [0.0; 16];
    basis(degree, view_dir, &mut b[..needed]);
    let mut rgb = [0.0; 3];
    for ch in 0..3 {
        let mut v = 0.5;
        for (c, bj) in sh_coeffs.iter().take(needed).zip(&b) {
            v += c[ch] * bj;
        }
        rgb[ch] = v.max(0.0);
    }
    Ok(rgb)
}
