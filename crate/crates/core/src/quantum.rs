//! Validated quantum objects: unitaries, density matrices and superoperators.
//!
//! Superoperators are stored as `d² x d²` matrices acting on column-stacked
//! density matrices, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)` and channel composition
//! is plain matrix multiplication.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, C64, ComplexMatrix};

/// Default tolerance for unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;

/// Default tolerance for density-matrix and CPTP checks.
pub const CPTP_TOL: f64 = 1e-8;

/// A square matrix verified to be unitary at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Unitary {
    #[serde(deserialize_with = "deserialize_unitary_matrix")]
    m: ComplexMatrix,
}

fn deserialize_unitary_matrix<'de, D>(d: D) -> std::result::Result<ComplexMatrix, D::Error>
where
    D: serde::Deserializer<'de>,
{
    use serde::de::Error as _;
    let m = ComplexMatrix::deserialize(d)?;
    let res = m.unitarity_residual();
    if res > UNITARY_TOL {
        return Err(D::Error::custom(format!("matrix is not unitary (residual {res:.3e})")));
    }
    Ok(m)
}

impl Unitary {
    /// Validates unitarity within [`UNITARY_TOL`].
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tol(m, UNITARY_TOL)
    }

    pub fn with_tol(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let residual = m.unitarity_residual();
        if residual > tol {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { m })
    }

    /// Wraps a product of already-validated unitaries without re-checking.
    pub(crate) fn trusted(m: ComplexMatrix) -> Self {
        debug_assert!(m.unitarity_residual() < 1e-8);
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: ComplexMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn dagger(&self) -> Self {
        Self { m: self.m.dagger() }
    }

    /// Matrix product `self · rhs` (applies `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Self {
        Self { m: self.m.matmul(&rhs.m) }
    }

    /// Tensor product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self { m: self.m.kron(&rhs.m) }
    }

    /// Multiplies by a unit-modulus scalar `e^{i phase}`.
    pub fn phase_mul(&self, phase: f64) -> Self {
        Self { m: self.m.scale(C64::new(0.0, phase).exp()) }
    }

    /// Applies the unitary to a state vector.
    pub fn apply_state(&self, state: &DVector<C64>) -> Result<DVector<C64>> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: state.len() });
        }
        Ok(self.m.matvec(state))
    }
}

/// Phase-insensitive distance `min_φ ‖A − e^{iφ}B‖_F`.
///
/// The minimizing phase is `e^{iφ} = conj(t)/|t|` with `t = tr(A†B)`; the
/// norm is then evaluated entrywise rather than as `√(2d − 2|t|)`, which
/// would lose half the significand to cancellation near zero distance.
pub fn distance_up_to_global_phase(a: &Unitary, b: &Unitary) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let t = a.matrix().dagger().matmul(b.matrix()).trace();
    let phase = if t.norm() > 0.0 { t.conj() / t.norm() } else { C64::new(1.0, 0.0) };
    Ok(a.matrix().sub(&b.matrix().scale(phase)).norm_fro())
}

/// A positive-semidefinite, unit-trace, Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace within [`CPTP_TOL`].
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let herm = m.hermiticity_residual();
        if herm > CPTP_TOL {
            return Err(Error::NotDensity { reason: format!("hermiticity residual {herm:.3e}") });
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > CPTP_TOL || tr.im.abs() > CPTP_TOL {
            return Err(Error::NotDensity { reason: format!("trace {tr}") });
        }
        let (vals, _) = hermitian_eigen(&m)?;
        if let Some(min) = vals.first() {
            if *min < -CPTP_TOL {
                return Err(Error::NotDensity { reason: format!("negative eigenvalue {min:.3e}") });
            }
        }
        Ok(Self { m })
    }

    /// `|ψ⟩⟨ψ|` from a state vector, which must be normalized.
    pub fn from_pure(state: &DVector<C64>) -> Result<Self> {
        let n = state.norm();
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::NotDensity { reason: format!("state norm {n}") });
        }
        let d = state.len();
        let m = ComplexMatrix::from_fn(d, d, |i, j| state[i] * state[j].conj())?;
        Ok(Self { m })
    }

    /// Projector onto the computational basis state `index`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} >= dim {dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m.set(index, index, C64::new(1.0, 0.0));
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    /// `Tr(ρ²)`, equal to 1 exactly when the state is pure.
    pub fn purity(&self) -> f64 {
        self.m.matmul(&self.m).trace().re
    }
}

/// State fidelity `Tr(ρσ)`; requires at least one argument to be pure,
/// where this expression equals `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let pure_tol = 1e-6;
    if (a.purity() - 1.0).abs() > pure_tol && (b.purity() - 1.0).abs() > pure_tol {
        return Err(Error::InvalidParameter(
            "state_fidelity requires at least one pure argument".into(),
        ));
    }
    Ok(a.matrix().matmul(b.matrix()).trace().re.clamp(0.0, 1.0))
}

/// Detailed CPTP diagnostics for a superoperator.
#[derive(Clone, Copy, Debug)]
pub struct CptpReport {
    /// `max|J − J†|` of the Choi matrix.
    pub choi_hermiticity: f64,
    /// Smallest Choi eigenvalue (≥ 0 for a completely positive map).
    pub choi_min_eigenvalue: f64,
    /// `max|vec(I)ᵀS − vec(I)ᵀ|` (0 for a trace-preserving map).
    pub trace_preservation: f64,
}

impl CptpReport {
    pub fn is_cptp(&self, tol: f64) -> bool {
        self.choi_hermiticity <= tol
            && self.choi_min_eigenvalue >= -tol
            && self.trace_preservation <= tol
    }
}

/// A linear map on operators, stored in the column-stacking convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Superoperator {
    hilbert_dim: usize,
    m: ComplexMatrix,
}

impl Superoperator {
    /// Wraps a `d² x d²` matrix as a map on `d x d` operators.
    pub fn new(hilbert_dim: usize, m: ComplexMatrix) -> Result<Self> {
        let want = hilbert_dim * hilbert_dim;
        if !m.is_square() || m.dim() != want {
            return Err(Error::DimensionMismatch { expected: want, got: m.nrows() });
        }
        Ok(Self { hilbert_dim, m })
    }

    pub fn identity(hilbert_dim: usize) -> Self {
        Self { hilbert_dim, m: ComplexMatrix::identity(hilbert_dim * hilbert_dim) }
    }

    /// Conjugation channel `ρ ↦ UρU†`, i.e. `conj(U) ⊗ U`.
    pub fn from_unitary(u: &Unitary) -> Self {
        Self {
            hilbert_dim: u.dim(),
            m: u.matrix().conjugate().kron(u.matrix()),
        }
    }

    /// Kraus-form channel `ρ ↦ Σ_k K_k ρ K_k†`.
    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus list".into()))?;
        if !first.is_square() {
            return Err(Error::NotSquare { rows: first.nrows(), cols: first.ncols() });
        }
        let d = first.dim();
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for k in kraus {
            if !k.is_square() || k.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: k.nrows() });
            }
            m = m.add(&k.conjugate().kron(k));
        }
        Ok(Self { hilbert_dim: d, m })
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    /// Applies the map to an operator (no output validation).
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !x.is_square() || x.dim() != self.hilbert_dim {
            return Err(Error::DimensionMismatch { expected: self.hilbert_dim, got: x.nrows() });
        }
        let v = self.m.matvec(&x.vectorize());
        ComplexMatrix::unvectorize(&v, self.hilbert_dim)
    }

    /// Applies the map to a density matrix, validating the output.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_matrix(rho.matrix())?)
    }

    /// Composition `self ∘ inner` (runs `inner` first).
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.hilbert_dim != inner.hilbert_dim {
            return Err(Error::DimensionMismatch {
                expected: self.hilbert_dim,
                got: inner.hilbert_dim,
            });
        }
        Ok(Self { hilbert_dim: self.hilbert_dim, m: self.m.matmul(&inner.m) })
    }

    /// Tensor product acting on the bipartite space `self ⊗ rhs`.
    ///
    /// Composite row/column indices follow the usual Kronecker layout: basis
    /// state `a ⊗ i` of the product space has index `a·d_B + i`.
    pub fn tensor(&self, rhs: &Self) -> Self {
        let da = self.hilbert_dim;
        let db = rhs.hilbert_dim;
        let dd = da * db;
        let sa = self.m.data();
        let sb = rhs.m.data();
        let mut out = ComplexMatrix::zeros(dd * dd, dd * dd);
        // vec index of entry (r, c) in the product space is c*dd + r with
        // r = a*db + i, c = b*db + j.
        for a in 0..da {
            for b in 0..da {
                for ap in 0..da {
                    for bp in 0..da {
                        let fa = sa[(b * da + a, bp * da + ap)];
                        if fa.norm_sqr() == 0.0 {
                            continue;
                        }
                        for i in 0..db {
                            for j in 0..db {
                                for ip in 0..db {
                                    for jp in 0..db {
                                        let fb = sb[(j * db + i, jp * db + ip)];
                                        if fb.norm_sqr() == 0.0 {
                                            continue;
                                        }
                                        let row = (b * db + j) * dd + (a * db + i);
                                        let col = (bp * db + jp) * dd + (ap * db + ip);
                                        out.set(row, col, out.get(row, col) + fa * fb);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Self { hilbert_dim: dd, m: out }
    }

    /// Entrywise adjoint map (the Hilbert–Schmidt dual has matrix `S†`).
    pub fn adjoint(&self) -> Self {
        Self { hilbert_dim: self.hilbert_dim, m: self.m.dagger() }
    }

    /// Choi matrix `J = Σ_ij E_ij ⊗ S(E_ij)` (unnormalized, trace `d` for a
    /// trace-preserving map).
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.hilbert_dim;
        let mut j = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for jj in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        // Block (i, jj) of J holds S(E_ij) at offset (k, l);
                        // S entry rows/cols use the c*d + r vec layout.
                        let val = self.m.get(l * d + k, jj * d + i);
                        j.set(i * d + k, jj * d + l, val);
                    }
                }
            }
        }
        j
    }

    /// CPTP diagnostics via the Choi spectrum and the trace functional.
    pub fn cptp_report(&self) -> Result<CptpReport> {
        let d = self.hilbert_dim;
        let j = self.choi();
        let choi_hermiticity = j.hermiticity_residual();
        let sym = j.add(&j.dagger()).scale(C64::new(0.5, 0.0));
        let (vals, _) = hermitian_eigen(&sym)?;
        let choi_min_eigenvalue = vals.first().copied().unwrap_or(0.0);
        // Row vector vec(I)ᵀ S compared against vec(I)ᵀ.
        let idv = ComplexMatrix::identity(d).vectorize();
        let mut trace_preservation = 0.0f64;
        for idx in 0..d * d {
            let want = idv[idx];
            let mut got = C64::new(0.0, 0.0);
            for r in 0..d * d {
                got += idv[r] * self.m.get(r, idx);
            }
            trace_preservation = trace_preservation.max((got - want).norm());
        }
        Ok(CptpReport { choi_hermiticity, choi_min_eigenvalue, trace_preservation })
    }

    /// True when the map is CPTP within `tol`.
    pub fn is_cptp(&self, tol: f64) -> Result<bool> {
        Ok(self.cptp_report()?.is_cptp(tol))
    }
}
