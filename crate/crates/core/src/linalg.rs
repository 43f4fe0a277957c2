//! Small dense linear algebra: square matrices, a cyclic Jacobi eigensolver
//! for symmetric matrices, and the `B·diag(w)·Bᵀ·z` kernel used by every
//! Eigen-frame operator.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{check_dim, Error, Result};

/// Off-diagonal Frobenius mass, relative to `‖C‖_F`, at which Jacobi stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
/// Hard cap on Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Asymmetry tolerated by [`symmetric_eigendecompose`], relative to `max(1, ‖C‖_max)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
/// Bound on `‖BᵀB − I‖_max` for a valid orthonormal basis.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-9;

/// A dense `n × n` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data; fails unless `data.len() == n²`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n * n, data.len())?;
        Ok(SquareMatrix { n, data })
    }

    /// Builds a matrix from rows; every row must have as many entries as there are rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            check_dim(n, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        check_dim(self.n, other.n)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `A·x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        Ok((0..self.n).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ·x`.
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        let n = self.n;
        Ok((0..n)
            .map(|j| {
                let mut acc = self.data[j] * x[0];
                for i in 1..n {
                    acc += self.data[i * n + j] * x[i];
                }
                acc
            })
            .collect())
    }

    /// `a·self + b·other`, entrywise.
    pub fn lincomb(&self, a: f64, other: &SquareMatrix, b: f64) -> Result<SquareMatrix> {
        check_dim(self.n, other.n)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(SquareMatrix { n: self.n, data })
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Adds `w·y·yᵀ` in place.
    pub fn add_outer(&mut self, w: f64, y: &[f64]) -> Result<()> {
        check_dim(self.n, y.len())?;
        for i in 0..self.n {
            let wy = w * y[i];
            for j in 0..self.n {
                self.data[i * self.n + j] += wy * y[j];
            }
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = a[0] * b[0];
    for k in 1..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

/// A square matrix whose columns are orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis(SquareMatrix);

impl OrthonormalBasis {
    pub fn identity(n: usize) -> Self {
        OrthonormalBasis(SquareMatrix::identity(n))
    }

    /// Accepts `m` when `‖mᵀm − I‖_max ≤ 1e−9`.
    pub fn try_from_matrix(m: SquareMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::ContractViolation("basis has non-finite entries"));
        }
        if orthonormality_error(&m) > ORTHONORMALITY_TOLERANCE {
            return Err(Error::ContractViolation("columns are not orthonormal"));
        }
        Ok(OrthonormalBasis(m))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, j)]).collect()
    }

    /// `B·x`: Eigen-frame coordinates back to the original frame.
    pub fn to_original(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.mul_vec(x)
    }

    /// `Bᵀ·x`: original-frame coordinates into the Eigen frame.
    pub fn to_eigen(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.transpose_mul_vec(x)
    }

    /// `‖BᵀB − I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }
}

fn orthonormality_error(m: &SquareMatrix) -> f64 {
    let n = m.dim();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in a..n {
            let mut g = 0.0;
            for i in 0..n {
                g += m[(i, a)] * m[(i, b)];
            }
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).abs());
        }
    }
    worst
}

/// Entries of a diagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalWeights(pub Vec<f64>);

impl DiagonalWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `C = B·diag(D²)·Bᵀ`, eigenvalues in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub basis: OrthonormalBasis,
    /// Raw eigenvalues, aligned with the columns of `basis`.
    pub eigenvalues: Vec<f64>,
    /// Square roots of the eigenvalues, negatives floored to zero.
    pub scales: DiagonalWeights,
}

impl EigenDecomposition {
    /// `B·diag(D²)·Bᵀ`.
    pub fn reconstruct(&self) -> SquareMatrix {
        let b = self.basis.matrix();
        let n = b.dim();
        let mut out = SquareMatrix::zeros(n);
        for k in 0..n {
            let lambda = self.scales.0[k] * self.scales.0[k];
            for i in 0..n {
                let bik = lambda * b[(i, k)];
                for j in 0..n {
                    out[(i, j)] += bik * b[(j, k)];
                }
            }
        }
        out
    }
}

/// `(C + Cᵀ) / 2`.
pub fn symmetrize(c: &SquareMatrix) -> SquareMatrix {
    let n = c.dim();
    let mut out = c.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Decomposes a symmetric matrix with cyclic Jacobi rotations.
///
/// Eigenvectors are sign-normalized so that each column's largest-magnitude
/// entry is positive.
pub fn symmetric_eigendecompose(c: &SquareMatrix) -> Result<EigenDecomposition> {
    let n = c.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix"));
    }
    if !c.is_finite() {
        return Err(Error::ContractViolation("matrix has non-finite entries"));
    }
    if c.asymmetry() > SYMMETRY_TOLERANCE * c.max_abs().max(1.0) {
        return Err(Error::ContractViolation("matrix is not symmetric"));
    }

    let mut a = symmetrize(c);
    let mut v = SquareMatrix::identity(n);
    let threshold = JACOBI_TOLERANCE * c.frobenius_norm();

    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NumericFailure("Jacobi iteration did not converge"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));

    let mut basis = SquareMatrix::zeros(n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(a[(src, src)]);
        let mut lead = 0;
        for i in 1..n {
            if v[(i, src)].abs() > v[(lead, src)].abs() {
                lead = i;
            }
        }
        let sign = if v[(lead, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            basis[(i, col)] = sign * v[(i, src)];
        }
    }
    let scales = eigenvalues.iter().map(|&l| libm::sqrt(l.max(0.0))).collect();

    Ok(EigenDecomposition {
        basis: OrthonormalBasis(basis),
        eigenvalues,
        scales: DiagonalWeights(scales),
    })
}

fn off_diagonal_norm(a: &SquareMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    libm::sqrt(s)
}

fn rotate(a: &mut SquareMatrix, v: &mut SquareMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.dim();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `B·(w ∘ (Bᵀ·z))`: scales `z` along the columns of `B`.
///
/// With `B = I` the result equals `w ∘ z` exactly.
pub fn eigen_transform(weights: &[f64], basis: &OrthonormalBasis, z: &[f64]) -> Result<Vec<f64>> {
    check_dim(basis.dim(), weights.len())?;
    let mut y = basis.to_eigen(z)?;
    for (yj, wj) in y.iter_mut().zip(weights) {
        *yj *= *wj;
    }
    basis.to_original(&y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rng() -> crate::RunRng {
        crate::RunRng::seed_from_u64(7)
    }

    fn random_symmetric(n: usize, rng: &mut crate::RunRng) -> SquareMatrix {
        let data = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        symmetrize(&SquareMatrix::from_row_major(n, data).unwrap())
    }

    fn max_diff(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
    }

    #[test]
    fn symmetrize_examples() {
        let cases = [
            ([[1.0, 2.0], [0.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]]),
            ([[2.0, 1.0], [1.0, 2.0]], [[2.0, 1.0], [1.0, 2.0]]),
            ([[0.0, 4.0], [2.0, 0.0]], [[0.0, 3.0], [3.0, 0.0]]),
        ];
        for (input, expected) in cases {
            let got = symmetrize(&SquareMatrix::from_rows(&input).unwrap());
            assert_eq!(got, SquareMatrix::from_rows(&expected).unwrap());
        }
    }

    #[test]
    fn non_square_rows_rejected() {
        let rows: [&[f64]; 2] = [&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]];
        assert!(matches!(
            SquareMatrix::from_rows(&rows),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_decomposes_to_identity() {
        for n in 1..6 {
            let e = symmetric_eigendecompose(&SquareMatrix::identity(n)).unwrap();
            assert_eq!(e.basis, OrthonormalBasis::identity(n));
            assert!(e.eigenvalues.iter().all(|&l| l == 1.0));
        }
    }

    #[test]
    fn two_by_two_hand_solution() {
        let c = SquareMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = symmetric_eigendecompose(&c).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let b0 = e.basis.column(0);
        let b1 = e.basis.column(1);
        assert!((b0[0].abs() - h).abs() < 1e-12 && (b0[0] - b0[1]).abs() < 1e-12);
        assert!((b1[0].abs() - h).abs() < 1e-12 && (b1[0] + b1[1]).abs() < 1e-12);
    }

    #[test]
    fn diagonal_decomposes_to_signed_permutation() {
        let c = SquareMatrix::from_diagonal(&[4.0, 9.0]);
        let e = symmetric_eigendecompose(&c).unwrap();
        assert_eq!(e.eigenvalues, vec![9.0, 4.0]);
        assert_eq!(e.scales.0, vec![3.0, 2.0]);
        let b = e.basis.matrix();
        assert_eq!(b.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        assert!(max_diff(&e.reconstruct(), &c) < 1e-12);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let c = SquareMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            symmetric_eigendecompose(&c),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn negative_round_off_floored() {
        let c = SquareMatrix::from_diagonal(&[1.0, -1e-14]);
        let e = symmetric_eigendecompose(&c).unwrap();
        assert_eq!(e.scales.0[1], 0.0);
        assert!(e.eigenvalues[1] < 0.0);
    }

    #[test]
    fn zero_matrix_decomposes() {
        let e = symmetric_eigendecompose(&SquareMatrix::zeros(3)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l == 0.0));
        assert!(e.basis.orthonormality_error() == 0.0);
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let mut rng = rng();
        for trial in 0..1000 {
            let n = 1 + trial % 12;
            let c = random_symmetric(n, &mut rng);
            let e = symmetric_eigendecompose(&c).unwrap();
            let tol = 1e-8 * (1.0 + c.max_abs());
            // Indefinite inputs: reconstruct with signed eigenvalues.
            let b = e.basis.matrix();
            let mut rec = SquareMatrix::zeros(n);
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        rec[(i, j)] += e.eigenvalues[k] * b[(i, k)] * b[(j, k)];
                    }
                }
            }
            assert!(max_diff(&rec, &c) <= tol);
            assert!(e.basis.orthonormality_error() <= 1e-9);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn psd_reconstruction_uses_scales() {
        let mut rng = rng();
        for n in 1..10 {
            let a = random_symmetric(n, &mut rng);
            let c = a.matmul(&a.transpose()).unwrap();
            let e = symmetric_eigendecompose(&c).unwrap();
            assert!(max_diff(&e.reconstruct(), &c) <= 1e-8 * (1.0 + c.max_abs()));
        }
    }

    #[test]
    fn column_sign_convention() {
        let mut rng = rng();
        let c = random_symmetric(6, &mut rng);
        let e = symmetric_eigendecompose(&c).unwrap();
        for j in 0..6 {
            let col = e.basis.column(j);
            let lead = col
                .iter()
                .fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn eigen_transform_identity_weights() {
        let mut rng = rng();
        let c = random_symmetric(4, &mut rng);
        let b = symmetric_eigendecompose(&c).unwrap().basis;
        let z = [0.3, -1.2, 2.0, 0.5];
        let out = eigen_transform(&[1.0; 4], &b, &z).unwrap();
        for (o, zi) in out.iter().zip(&z) {
            assert!((o - zi).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_transform_identity_basis_is_elementwise() {
        let mut rng = rng();
        let b = OrthonormalBasis::identity(5);
        for _ in 0..200 {
            let w: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            let z: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            let out = eigen_transform(&w, &b, &z).unwrap();
            for j in 0..5 {
                assert_eq!(out[j].to_bits(), (w[j] * z[j]).to_bits());
            }
        }
    }

    #[test]
    fn eigen_transform_rotated_projection() {
        // Columns (0,1) and (−1,0): a 90° rotation.
        let b =
            OrthonormalBasis::try_from_matrix(SquareMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap())
                .unwrap();
        // z = (1,0) is orthogonal to the first column, which is all W keeps.
        assert_eq!(
            eigen_transform(&[1.0, 0.0], &b, &[1.0, 0.0]).unwrap(),
            vec![0.0, 0.0]
        );
        // ...and parallel to the second one.
        assert_eq!(
            eigen_transform(&[0.0, 1.0], &b, &[1.0, 0.0]).unwrap(),
            vec![1.0, 0.0]
        );
        assert_eq!(
            eigen_transform(&[1.0, 0.0], &b, &[0.0, 2.0]).unwrap(),
            vec![0.0, 2.0]
        );
    }

    #[test]
    fn eigen_transform_is_linear() {
        let mut rng = rng();
        for _ in 0..200 {
            let c = random_symmetric(6, &mut rng);
            let b = symmetric_eigendecompose(&c).unwrap().basis;
            let w: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let z1: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let z2: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (a, s) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let mix: Vec<f64> = z1.iter().zip(&z2).map(|(x, y)| a * x + s * y).collect();
            let lhs = eigen_transform(&w, &b, &mix).unwrap();
            let f1 = eigen_transform(&w, &b, &z1).unwrap();
            let f2 = eigen_transform(&w, &b, &z2).unwrap();
            for j in 0..6 {
                assert!((lhs[j] - (a * f1[j] + s * f2[j])).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn eigen_transform_dimension_mismatch() {
        let b = OrthonormalBasis::identity(3);
        assert!(eigen_transform(&[1.0; 2], &b, &[1.0; 3]).is_err());
        assert!(eigen_transform(&[1.0; 3], &b, &[1.0; 2]).is_err());
    }
}
