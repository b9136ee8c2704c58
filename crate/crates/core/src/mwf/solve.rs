use num_complex::Complex64;

use super::stats::Hermitian2;
use crate::error::{Error, Result};

/// Relative determinant threshold under which the filter is muted.
pub const SINGULAR_TOLERANCE: f64 = 1e-15;
/// Absolute floor added to `tr(R)/2` in the singularity test.
pub const TRACE_FLOOR: f64 = 1e-12;

/// `w = (R + δ·tr(R)/2·I)⁻¹ p` by the closed-form 2×2 inverse. Returns the
/// zero vector when the regularized matrix is numerically singular.
pub fn solve_filter(r: &Hermitian2, p: [Complex64; 2], delta: f64) -> Result<[Complex64; 2]> {
    if !r.is_finite() || !p.iter().all(|z| z.re.is_finite() && z.im.is_finite()) || !delta.is_finite() {
        return Err(Error::NonFinite("filter solve input"));
    }
    let half_trace = 0.5 * r.trace();
    let mu = delta * half_trace;
    let a11 = r.a11 + mu;
    let a22 = r.a22 + mu;
    let det = a11 * a22 - r.a12.norm_sqr();
    let scale = half_trace + TRACE_FLOOR;
    if !(det.abs() >= SINGULAR_TOLERANCE * scale * scale) {
        return Ok([Complex64::new(0.0, 0.0); 2]);
    }
    let inv = 1.0 / det;
    Ok([
        (a22 * p[0] - r.a12 * p[1]) * inv,
        (a11 * p[1] - r.a12.conj() * p[0]) * inv,
    ])
}
