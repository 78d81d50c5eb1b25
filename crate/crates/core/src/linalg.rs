//! Closed-form 2×2 complex matrix functions.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity() -> Mat2 {
    Mat2::identity()
}

pub fn trace(a: &Mat2) -> C64 {
    a[(0, 0)] + a[(1, 1)]
}

pub fn det(a: &Mat2) -> C64 {
    a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
}

/// Hilbert-Schmidt inner product tr(A†B).
pub fn hs_inner(a: &Mat2, b: &Mat2) -> C64 {
    trace(&(a.adjoint() * b))
}

/// Frobenius norm.
pub fn fro(a: &Mat2) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(a: &Mat2) -> f64 {
    let (vals, _) = herm_eig(&(a.adjoint() * a));
    vals[1].max(0.0).sqrt()
}

/// exp(A) for any 2×2 matrix: A = tI + B with B traceless and B² = δ²I,
/// so exp(A) = e^t (cosh δ I + sinh δ/δ B).
pub fn expm(a: &Mat2) -> Mat2 {
    let t = trace(a) * 0.5;
    let b = a - Mat2::identity() * t;
    let d2 = -det(&b);
    let d = d2.sqrt();
    let (ch, shc) = if d.norm() < 1e-4 {
        // series for cosh and sinh(d)/d
        (
            ONE + d2 / 2.0 + d2 * d2 / 24.0 + d2 * d2 * d2 / 720.0,
            ONE + d2 / 6.0 + d2 * d2 / 120.0 + d2 * d2 * d2 / 5040.0,
        )
    } else {
        (d.cosh(), d.sinh() / d)
    };
    (Mat2::identity() * ch + b * shc) * t.exp()
}

/// Eigen-decomposition of a Hermitian 2×2 matrix. Eigenvalues ascend; the
/// columns of the returned unitary are the matching eigenvectors.
pub fn herm_eig(a: &Mat2) -> ([f64; 2], Mat2) {
    let p = a[(0, 0)].re;
    let r = a[(1, 1)].re;
    let q = (a[(0, 1)] + a[(1, 0)].conj()) * 0.5;
    let m = 0.5 * (p + r);
    let d = 0.5 * (p - r);
    let s = (d * d + q.norm_sqr()).sqrt();
    if s == 0.0 {
        return ([m, m], Mat2::identity());
    }
    // eigenvector of the upper eigenvalue from whichever row is better conditioned
    let (u0, u1) = if d >= 0.0 { (c(s + d), q.conj()) } else { (q, c(s - d)) };
    let n = (u0.norm_sqr() + u1.norm_sqr()).sqrt();
    let (u0, u1) = (u0 / n, u1 / n);
    let vecs = Mat2::new(-u1.conj(), u0, u0.conj(), u1);
    ([m - s, m + s], vecs)
}

/// f(A) for Hermitian A through its spectral decomposition.
pub fn herm_apply(a: &Mat2, f: impl Fn(f64) -> f64) -> Mat2 {
    let (vals, v) = herm_eig(a);
    let d = Mat2::new(c(f(vals[0])), ZERO, ZERO, c(f(vals[1])));
    v * d * v.adjoint()
}

pub fn hermitian_part(a: &Mat2) -> Mat2 {
    (a + a.adjoint()) * c(0.5)
}
