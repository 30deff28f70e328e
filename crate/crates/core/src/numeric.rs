//! Small dense linear-algebra helpers shared by the bound and estimator code.
//!
//! Channel-domain matrices mix radians and seconds, so their diagonals span
//! 20+ orders of magnitude. Every factorization here first applies a
//! symmetric diagonal equilibration `D⁻¹ M D⁻¹` with `D = sqrt(|diag M|)`,
//! factors the well-scaled matrix, and undoes the scaling afterwards.

use nalgebra::{Cholesky, DMatrix, Matrix4, SMatrix, SVector};
use std::f64::consts::PI;

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

pub fn symmetrize<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

fn equilibration<const N: usize>(m: &SMatrix<f64, N, N>) -> Option<SVector<f64, N>> {
    let d = m.diagonal().map(|v| v.abs().sqrt());
    if d.iter().any(|&v| v == 0.0 || !v.is_finite()) {
        return None;
    }
    Some(d)
}

fn scale<const N: usize>(m: &SMatrix<f64, N, N>, d: &SVector<f64, N>) -> SMatrix<f64, N, N> {
    SMatrix::from_fn(|i, j| m[(i, j)] / (d[i] * d[j]))
}

/// Inverse of a symmetric positive-definite matrix, or `None` when the
/// Cholesky factorization of the equilibrated matrix fails.
pub fn spd_inverse<const N: usize>(m: &SMatrix<f64, N, N>) -> Option<SMatrix<f64, N, N>> {
    let d = equilibration(m)?;
    let chol = Cholesky::new(symmetrize(&scale(m, &d)))?;
    let inv = chol.inverse();
    Some(symmetrize(&SMatrix::from_fn(|i, j| inv[(i, j)] / (d[i] * d[j]))))
}

/// Lower-triangular `L` with `L Lᵀ = m` for symmetric positive-definite `m`.
pub fn spd_cholesky_factor<const N: usize>(m: &SMatrix<f64, N, N>) -> Option<SMatrix<f64, N, N>> {
    let d = equilibration(m)?;
    let chol = Cholesky::new(symmetrize(&scale(m, &d)))?;
    let l = chol.l();
    Some(SMatrix::from_fn(|i, j| d[i] * l[(i, j)]))
}

/// Inverse of a general square matrix via LU on the equilibrated matrix.
pub fn scaled_inverse<const N: usize>(m: &SMatrix<f64, N, N>) -> Option<SMatrix<f64, N, N>> {
    let d = equilibration(m)?;
    let scaled = scale(m, &d);
    // Partial-pivot LU; the fixed-size `try_inverse` uses cofactors for N ≤ 4.
    let inv = DMatrix::from_column_slice(N, N, scaled.as_slice()).lu().try_inverse()?;
    let out: SMatrix<f64, N, N> = SMatrix::from_fn(|i, j| inv[(i, j)] / (d[i] * d[j]));
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// `A⁻¹ B A⁻¹` for symmetric `A` and positive semi-definite `B`, evaluated as
/// `(A⁻¹L)(A⁻¹L)ᵀ` with `B = LLᵀ` after equilibrating both by `|diag A|`.
/// Uses a Cholesky solve when `−A` is positive definite, LU otherwise.
pub fn sandwich_inverse<const N: usize>(a: &SMatrix<f64, N, N>, b: &SMatrix<f64, N, N>) -> Option<SMatrix<f64, N, N>> {
    let d = equilibration(a)?;
    let a_s = symmetrize(&scale(a, &d));
    let b_s = symmetrize(&scale(b, &d));
    let out_s = match Cholesky::new(b_s) {
        Some(chol_b) => {
            let l = chol_b.l();
            let y = match Cholesky::new(-a_s) {
                Some(chol_a) => -chol_a.solve(&l),
                None => {
                    let lu = DMatrix::from_column_slice(N, N, a_s.as_slice()).lu();
                    let y = lu.solve(&DMatrix::from_column_slice(N, N, l.as_slice()))?;
                    SMatrix::from_column_slice(y.as_slice())
                }
            };
            y * y.transpose()
        }
        None => {
            let lu = DMatrix::from_column_slice(N, N, a_s.as_slice()).lu();
            let inv = lu.try_inverse()?;
            let inv: SMatrix<f64, N, N> = SMatrix::from_column_slice(inv.as_slice());
            inv * b_s * inv
        }
    };
    let out: SMatrix<f64, N, N> = symmetrize(&SMatrix::from_fn(|i, j| out_s[(i, j)] / (d[i] * d[j])));
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Ratio of extreme eigenvalue magnitudes of a symmetric 4×4 matrix.
pub fn condition_number4(m: &Matrix4<f64>) -> f64 {
    let eig = symmetrize(m).symmetric_eigenvalues();
    let max = eig.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;

    #[test]
    fn sandwich_matches_direct_product() {
        let a = -Matrix2::new(4.0, 1.0, 1.0, 3.0);
        let b = Matrix2::new(2.0, 0.5, 0.5, 1.0);
        let inv = a.try_inverse().unwrap();
        let expect = inv * b * inv;
        assert!((sandwich_inverse(&a, &b).unwrap() - expect).abs().max() < 1e-15);
        // Indefinite A and singular B take the LU branches.
        let a2 = Matrix2::new(1.0, 2.0, 2.0, -1.0);
        let b2 = Matrix2::new(1.0, 1.0, 1.0, 1.0);
        let inv2 = a2.try_inverse().unwrap();
        assert!((sandwich_inverse(&a2, &b2).unwrap() - inv2 * b2 * inv2).abs().max() < 1e-14);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn spd_inverse_badly_scaled() {
        let m = Matrix2::new(1e20, 3e4, 3e4, 1e-10);
        let inv = spd_inverse(&m).unwrap();
        let det = 1e10 - 9e8;
        let exact = Matrix2::new(1e-10 / det, -3e4 / det, -3e4 / det, 1e20 / det);
        for (a, b) in inv.iter().zip(exact.iter()) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn spd_inverse_rejects_indefinite() {
        let m = Matrix2::new(1.0, 2.0, 2.0, 1.0);
        assert!(spd_inverse(&m).is_none());
    }

    #[test]
    fn cholesky_factor_reconstructs() {
        let a = Matrix4::from_fn(|i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let m = a * a.transpose() + Matrix4::identity();
        let l = spd_cholesky_factor(&m).unwrap();
        assert!((l * l.transpose() - m).abs().max() < 1e-12);
    }
}
