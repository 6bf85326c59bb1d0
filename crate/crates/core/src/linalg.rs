//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use crate::{CMatrix, CVector, C64};

/// Relative singular-value threshold below which a matrix counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Ridge added by [`pinv_checked`] for rank-deficient inputs.
pub const PINV_RIDGE: f64 = 1e-8;

/// `a^H b`.
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

pub fn normalized(v: &CVector) -> Option<CVector> {
    let n = v.norm();
    if n > 0.0 && n.is_finite() {
        Some(v.unscale(n))
    } else {
        None
    }
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest singular value and the matching unit-norm right singular vector.
///
/// Returns `None` for an empty or all-zero matrix.
pub fn dominant_right_singular(m: &CMatrix) -> Option<(f64, CVector)> {
    if m.is_empty() || frobenius_sq(m) == 0.0 {
        return None;
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t?;
    let (idx, sigma) = svd.singular_values.iter().copied().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (i, s)| {
            if s > best.1 {
                (i, s)
            } else {
                best
            }
        },
    );
    let v = v_t.row(idx).adjoint();
    Some((sigma, normalized(&v)?))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Numerical rank with relative tolerance [`RANK_TOL`].
pub fn rank(m: &CMatrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s = m.clone().svd(false, false).singular_values;
    let max = s.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > RANK_TOL * max).count()
}

/// Moore-Penrose pseudo-inverse.
///
/// The flag is `true` when the input is rank deficient, in which case the
/// returned matrix is the ridge-regularized inverse
/// `A^H (A A^H + δI)^-1` (wide) or `(A^H A + δI)^-1 A^H` (tall), δ = [`PINV_RIDGE`].
pub fn pinv_checked(a: &CMatrix) -> (CMatrix, bool) {
    let (r, c) = a.shape();
    if rank(a) == r.min(c) {
        if let Ok(p) = a.clone().pseudo_inverse(0.0) {
            if p.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return (p, false);
            }
        }
    }
    let ah = a.adjoint();
    let ridge = C64::new(PINV_RIDGE, 0.0);
    let p = if c >= r {
        let g = a * &ah + CMatrix::identity(r, r) * ridge;
        let inv = g.try_inverse().unwrap_or_else(|| CMatrix::zeros(r, r));
        ah * inv
    } else {
        let g = &ah * a + CMatrix::identity(c, c) * ridge;
        let inv = g.try_inverse().unwrap_or_else(|| CMatrix::zeros(c, c));
        inv * ah
    };
    (p, true)
}
