//! Dense complex matrices and the small set of spectral routines the rest of
//! the crate is built on.
//!
//! `ComplexMatrix` is a thin validated wrapper around `nalgebra::DMatrix` of
//! `Complex<f64>`. Serialization uses a split real/imaginary schema:
//! `{"dim": d, "re": [[..]], "im": [[..]]}` with row-major nested arrays.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Double-precision complex scalar used throughout.
pub type C64 = Complex<f64>;

/// The imaginary unit.
pub const I: C64 = Complex::new(0.0, 1.0);

/// A dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Wraps a matrix after checking every entry is finite.
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_data(data: DMatrix<C64>) -> Self {
        debug_assert!(data.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self { data }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { data: DMatrix::zeros(nrows, ncols) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { data: DMatrix::identity(dim, dim) }
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(
        nrows: usize,
        ncols: usize,
        f: impl FnMut(usize, usize) -> C64,
    ) -> Result<Self> {
        Self::new(DMatrix::from_fn(nrows, ncols, f))
    }

    /// Builds a square matrix from row-major nested slices.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        let ncols = rows[0].len();
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        Self::from_fn(nrows, ncols, |i, j| rows[i][j])
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.data.nrows() == self.data.ncols()
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.data.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[(row, col)] = value;
    }

    /// Borrow of the underlying `nalgebra` storage.
    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<C64> {
        self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self { data: self.data.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { data: self.data.transpose() }
    }

    pub fn conjugate(&self) -> Self {
        Self { data: self.data.conjugate() }
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        self.data.trace()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.norm()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { data: self.data.map(|z| z * factor) }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { data: &self.data + &rhs.data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self { data: &self.data - &rhs.data }
    }

    /// Matrix product with a fixed scalar summation order, so results are
    /// bit-identical across runs and threads. The generic BLAS-style backend
    /// picks SIMD kernels at runtime, which can shift the last bit depending
    /// on buffer alignment; that would break byte-level reproducibility.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols(), rhs.nrows(), "matmul dimension mismatch");
        let (m, k, n) = (self.nrows(), self.ncols(), rhs.ncols());
        let mut out = DMatrix::<C64>::zeros(m, n);
        for j in 0..n {
            for l in 0..k {
                let b = rhs.data[(l, j)];
                for i in 0..m {
                    out[(i, j)] += self.data[(i, l)] * b;
                }
            }
        }
        Self { data: out }
    }

    /// Matrix–vector product with the same fixed summation order as `matmul`.
    pub fn matvec(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(self.ncols(), v.len(), "matvec dimension mismatch");
        let mut out = DVector::<C64>::zeros(self.nrows());
        for l in 0..self.ncols() {
            let b = v[l];
            for i in 0..self.nrows() {
                out[i] += self.data[(i, l)] * b;
            }
        }
        out
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self { data: self.data.kronecker(&rhs.data) }
    }

    /// True when all entries agree within `tol` in magnitude.
    pub fn approx_eq(&self, rhs: &Self, tol: f64) -> bool {
        self.data.shape() == rhs.data.shape() && self.sub(rhs).max_abs() <= tol
    }

    /// Column-stacked vector of a square matrix (column `c` entries are
    /// contiguous, so index `(r, c)` maps to `c * d + r`).
    pub fn vectorize(&self) -> DVector<C64> {
        DVector::from_column_slice(self.data.as_slice())
    }

    /// Inverse of [`vectorize`](Self::vectorize) for a `dim x dim` matrix.
    pub fn unvectorize(v: &DVector<C64>, dim: usize) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: v.len() });
        }
        Ok(Self { data: DMatrix::from_column_slice(dim, dim, v.as_slice()) })
    }

    /// Residual `max|U†U − I|`; zero for an exactly unitary matrix.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.dim();
        self.dagger().matmul(self).sub(&Self::identity(d)).max_abs()
    }

    /// Residual `max|M − M†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.sub(&self.dagger()).max_abs()
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.is_square() {
            return Err(S::Error::custom("only square matrices are serializable"));
        }
        let d = self.dim();
        let row = |f: fn(&C64) -> f64| {
            (0..d)
                .map(|i| (0..d).map(|j| f(&self.data[(i, j)])).collect())
                .collect::<Vec<Vec<f64>>>()
        };
        MatrixJson { dim: d, re: row(|z| z.re), im: row(|z| z.im) }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let d = raw.dim;
        let check = |name: &str, part: &Vec<Vec<f64>>| {
            if part.len() != d || part.iter().any(|r| r.len() != d) {
                Err(D::Error::custom(format!("`{name}` must be a {d}x{d} nested array")))
            } else {
                Ok(())
            }
        };
        check("re", &raw.re)?;
        check("im", &raw.im)?;
        Self::from_fn(d, d, |i, j| C64::new(raw.re[i][j], raw.im[i][j]))
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order together with a matrix whose
/// columns are the matching orthonormal eigenvectors.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let res = m.hermiticity_residual();
    if res > 1e-8 * (1.0 + m.max_abs()) {
        return Err(Error::Numerical(format!("hermitian_eigen: input residual {res:.3e}")));
    }
    let sym = (m.data.clone() + m.data.adjoint()).map(|z| z * C64::new(0.5, 0.0));
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let d = m.dim();
    let vectors = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, ComplexMatrix::from_data(vectors)))
}

/// Eigendecomposition of a real symmetric matrix, ascending eigenvalues.
pub fn real_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()).map(|x| 0.5 * x);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let d = m.nrows();
    let vectors = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), vectors)
}

/// Eigenphases of a unitary matrix, ascending in `(-pi, pi]`.
///
/// A unitary is normal, so `U = A + iB` with commuting Hermitian parts
/// `A = (U + U†)/2`, `B = (U − U†)/2i`. `A` is diagonalized first; inside each
/// (near-)degenerate eigenspace of `A` the compressed `B` is diagonalized,
/// which resolves conjugate phase pairs that share a cosine.
pub fn unitary_eigenphases(u: &ComplexMatrix) -> Result<Vec<f64>> {
    let res = u.unitarity_residual();
    if res > 1e-8 {
        return Err(Error::NotUnitary { residual: res });
    }
    let d = u.dim();
    let a = u.add(&u.dagger()).scale(C64::new(0.5, 0.0));
    let b = u.sub(&u.dagger()).scale(C64::new(0.0, -0.5));
    let (avals, avecs) = hermitian_eigen(&a)?;

    let mut phases = Vec::with_capacity(d);
    let tol = 1e-7;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && avals[end] - avals[end - 1] <= tol {
            end += 1;
        }
        let k = end - start;
        let cols = ComplexMatrix::from_data(avecs.data.columns(start, k).into_owned());
        let b_small = cols.dagger().matmul(&b).matmul(&cols).data.clone();
        let b_small = (b_small.clone() + b_small.adjoint()).map(|z| z * C64::new(0.5, 0.0));
        let beig = b_small.symmetric_eigen();
        let a_mean = avals[start..end].iter().sum::<f64>() / k as f64;
        for j in 0..k {
            phases.push(beig.eigenvalues[j].atan2(a_mean));
        }
        start = end;
    }
    phases.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(phases)
}

/// Orthonormalizes the columns of an invertible matrix by QR, fixing each
/// column's phase so the corresponding diagonal of `R` is real positive.
///
/// With a complex Gaussian input this is the standard recipe for drawing a
/// distribution-exact Haar unitary.
pub fn qr_orthonormalize(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !g.is_square() {
        return Err(Error::NotSquare { rows: g.nrows(), cols: g.ncols() });
    }
    let d = g.dim();
    let qr = g.data.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        if rjj.norm() < 1e-300 {
            return Err(Error::Numerical("qr_orthonormalize: singular input".into()));
        }
        let phase = rjj / rjj.norm();
        for i in 0..d {
            out[(i, j)] *= phase;
        }
    }
    Ok(ComplexMatrix::from_data(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn test_rejects_non_finite_entries() {
        let m = DMatrix::from_fn(2, 2, |i, j| {
            if i == 1 && j == 1 { c(f64::NAN, 0.0) } else { c(1.0, 0.0) }
        });
        assert!(matches!(ComplexMatrix::new(m), Err(Error::NonFinite)));
    }

    #[test]
    fn test_algebra_basics() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(0.0, 2.0)],
            vec![c(3.0, 0.0), c(-1.0, 1.0)],
        ])
        .unwrap();
        let tr = a.trace();
        assert!((tr - c(0.0, 2.0)).norm() < 1e-15);
        let ad = a.dagger();
        assert!((ad.get(0, 1) - c(3.0, 0.0)).norm() < 1e-15);
        assert!((ad.get(1, 0) - c(0.0, -2.0)).norm() < 1e-15);
        // (A†)† = A and ‖A‖_F matches the explicit sum.
        assert!(ad.dagger().approx_eq(&a, 0.0));
        let fro2: f64 = a.data().iter().map(|z| z.norm_sqr()).sum();
        assert!((a.norm_fro() - fro2.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn test_kron_against_direct_indexing() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 1.0)).unwrap();
        let b = ComplexMatrix::from_fn(2, 2, |i, j| c(0.5, (i as f64) - (j as f64))).unwrap();
        let k = a.kron(&b);
        for i in 0..4 {
            for j in 0..4 {
                let want = a.get(i / 2, j / 2) * b.get(i % 2, j % 2);
                assert!((k.get(i, j) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn test_vectorize_column_stacking_convention() {
        // vec(AρB) = (Bᵀ ⊗ A) vec(ρ) under column stacking.
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64)).unwrap();
        let b = ComplexMatrix::from_fn(2, 2, |i, j| c(j as f64 - 1.0, i as f64 * 0.5)).unwrap();
        let rho = ComplexMatrix::from_fn(2, 2, |i, j| c(0.3 * i as f64, 0.7 * j as f64)).unwrap();
        let lhs = a.matmul(&rho).matmul(&b).vectorize();
        let rhs = b.transpose().kron(&a).matvec(&rho.vectorize());
        assert!((lhs - rhs).norm() < 1e-13);
        // Index map: vec position c*d + r holds entry (r, c).
        let v = rho.vectorize();
        assert!((v[1 * 2 + 0] - rho.get(0, 1)).norm() == 0.0);
        let back = ComplexMatrix::unvectorize(&v, 2).unwrap();
        assert!(back.approx_eq(&rho, 0.0));
    }

    #[test]
    fn test_serde_round_trip_and_schema() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, -2.0), c(0.25, 0.0)],
            vec![c(0.0, 1.5), c(-3.0, 4.0)],
        ])
        .unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["dim"], 2);
        assert_eq!(json["re"][0][0], 1.0);
        assert_eq!(json["im"][0][0], -2.0);
        assert_eq!(json["re"][1][1], -3.0);
        let back: ComplexMatrix = serde_json::from_value(json).unwrap();
        assert!(back.approx_eq(&m, 0.0));
    }

    #[test]
    fn test_deserialize_rejects_ragged_input() {
        let bad = serde_json::json!({
            "dim": 2,
            "re": [[1.0, 0.0], [0.0]],
            "im": [[0.0, 0.0], [0.0, 0.0]],
        });
        assert!(serde_json::from_value::<ComplexMatrix>(bad).is_err());
    }

    #[test]
    fn test_hermitian_eigen_reconstructs_input() {
        let g = ComplexMatrix::from_fn(4, 4, |i, j| {
            c((i * j) as f64 * 0.21 - 0.4, (i as f64 - j as f64) * 0.33)
        })
        .unwrap();
        let h = g.add(&g.dagger()).scale(c(0.5, 0.0));
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(vecs.unitarity_residual() < 1e-12);
        let lam = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i == j { c(vals[i], 0.0) } else { c(0.0, 0.0) }
        })
        .unwrap();
        let rebuilt = vecs.matmul(&lam).matmul(&vecs.dagger());
        assert!(rebuilt.approx_eq(&h, 1e-12));
    }

    #[test]
    fn test_unitary_eigenphases_diagonal_case() {
        let angles = [-2.5, -0.3, 0.0, 1.9];
        let u = ComplexMatrix::from_fn(4, 4, |i, j| {
            if i == j { (c(0.0, angles[i])).exp() } else { c(0.0, 0.0) }
        })
        .unwrap();
        let mut want = angles.to_vec();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = unitary_eigenphases(&u).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "got {g}, want {w}");
        }
    }

    #[test]
    fn test_unitary_eigenphases_conjugate_pair_resolved() {
        // RX-style matrix has eigenphases ±θ/2: equal cosines, so the
        // second-stage split on the anti-Hermitian part must separate them.
        let th: f64 = 1.234;
        let u = ComplexMatrix::from_rows(&[
            vec![c((th / 2.0).cos(), 0.0), c(0.0, -(th / 2.0).sin())],
            vec![c(0.0, -(th / 2.0).sin()), c((th / 2.0).cos(), 0.0)],
        ])
        .unwrap();
        let got = unitary_eigenphases(&u).unwrap();
        assert!((got[0] + th / 2.0).abs() < 1e-10);
        assert!((got[1] - th / 2.0).abs() < 1e-10);
    }

    #[test]
    fn test_unitary_eigenphases_degenerate_identity() {
        let u = ComplexMatrix::identity(4).scale((c(0.0, 0.7)).exp());
        let got = unitary_eigenphases(&u).unwrap();
        for g in got {
            assert!((g - 0.7).abs() < 1e-10);
        }
    }

    #[test]
    fn test_unitary_eigenphases_rejects_non_unitary() {
        let m = ComplexMatrix::identity(3).scale(c(2.0, 0.0));
        assert!(matches!(unitary_eigenphases(&m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn test_qr_orthonormalize_phase_convention() {
        // Deterministic non-trivial input; output must be unitary, and the
        // R factor of the *output* decomposition has positive diagonal,
        // which pins the per-column phase freedom.
        let g = ComplexMatrix::from_fn(3, 3, |i, j| {
            c((1 + i + 3 * j) as f64 * 0.37 - 1.0, ((i * j) as f64).sin())
        })
        .unwrap();
        let q = qr_orthonormalize(&g).unwrap();
        assert!(q.unitarity_residual() < 1e-12);
        // Q†G should be upper triangular with real positive diagonal.
        let r = q.dagger().matmul(&g);
        for j in 0..3 {
            let d = r.get(j, j);
            assert!(d.re > 0.0 && d.im.abs() < 1e-12);
            for i in (j + 1)..3 {
                assert!(r.get(i, j).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn test_eigenphase_range_convention() {
        // Phase of -1 reports as +pi, not -pi.
        let u = ComplexMatrix::identity(2).scale(c(-1.0, 0.0));
        let got = unitary_eigenphases(&u).unwrap();
        for g in got {
            assert!((g - PI).abs() < 1e-12);
        }
    }
}
