//! Exact decomposition of one- and two-qubit unitaries into the parameters
//! consumed by the fixed gate templates.
//!
//! Single-qubit unitaries factor as `U = e^{iγ} RZ(ω) RY(θ) RZ(φ)`.
//! Two-qubit unitaries factor as
//! `U = e^{iγ} (C⊗D) · exp(i(β·XX + δ·YY + α·ZZ)/2) · (A⊗B)`,
//! computed through the magic (Bell) basis, where the interaction core is
//! diagonal and products of single-qubit unitaries become real orthogonal.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real_symmetric_eigen, C64, ComplexMatrix};
use crate::quantum::Unitary;

/// Euler angles and global phase of a single-qubit unitary:
/// `U = e^{i global_phase} · RZ(omega) · RY(theta) · RZ(phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitParams {
    pub phi: f64,
    pub theta: f64,
    pub omega: f64,
    pub global_phase: f64,
}

/// Cartan parameters of a two-qubit unitary: local factors before (`a`, `b`)
/// and after (`c`, `d`) the interaction core
/// `exp(i(beta·XX + delta·YY + alpha·ZZ)/2)`, plus a global phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitParams {
    pub a: SingleQubitParams,
    pub b: SingleQubitParams,
    pub c: SingleQubitParams,
    pub d: SingleQubitParams,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub global_phase: f64,
}

/// The magic-basis change matrix (columns are Bell states up to phases):
/// `Λ = (1/√2) [[1, i, 0, 0], [0, 0, i, 1], [0, 0, i, -1], [1, -i, 0, 0]]`.
pub fn magic_matrix() -> Unitary {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = |re: f64, im: f64| C64::new(re * s, im * s);
    let m = ComplexMatrix::from_rows(&[
        vec![z(1., 0.), z(0., 1.), z(0., 0.), z(0., 0.)],
        vec![z(0., 0.), z(0., 0.), z(0., 1.), z(1., 0.)],
        vec![z(0., 0.), z(0., 0.), z(0., 1.), z(-1., 0.)],
        vec![z(1., 0.), z(0., -1.), z(0., 0.), z(0., 0.)],
    ])
    .expect("finite entries");
    Unitary::trusted(m)
}

/// Extracts Euler angles and global phase from a 2x2 unitary.
///
/// The reconstruction `e^{iγ} RZ(ω) RY(θ) RZ(φ)` reproduces the input to
/// machine precision. Convention: θ ∈ [0, π]; for diagonal or anti-diagonal
/// inputs the Z rotation is carried entirely by φ and ω = 0.
pub fn decompose_1q(u: &Unitary) -> Result<SingleQubitParams> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: u.dim() });
    }
    let m = u.matrix();
    let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
    let global_phase = det.arg() / 2.0;
    let v = m.scale(C64::new(0.0, -global_phase).exp());
    let a = v.get(0, 0);
    let b = v.get(1, 0);
    let theta = 2.0 * b.norm().atan2(a.norm());
    let (phi, omega) = if b.norm() <= 1e-12 {
        // Diagonal: U = e^{iγ} RZ(-2·arg a); put the whole rotation in φ.
        (-2.0 * a.arg(), 0.0)
    } else if a.norm() <= 1e-12 {
        // Anti-diagonal: θ = π and only φ − ω is defined.
        (-2.0 * b.arg(), 0.0)
    } else {
        let s = a.arg();
        let t = b.arg();
        (-(s + t), t - s)
    };
    Ok(SingleQubitParams { phi, theta, omega, global_phase })
}

/// Rebuilds the unitary from Euler angles and global phase.
pub fn reconstruct_1q(p: &SingleQubitParams) -> Unitary {
    let m = crate::gates::single_qubit_unitary(p.phi, p.theta, p.omega)
        .scale(C64::new(0.0, p.global_phase).exp());
    Unitary::trusted(m)
}

/// The interaction core `exp(i(β·XX + δ·YY + α·ZZ)/2)`, built exactly from
/// its magic-basis diagonal `diag(e^{iμ})` with
/// `μ = ((α+β−δ)/2, (α−β+δ)/2, (−α+β+δ)/2, −(α+β+δ)/2)`.
pub fn canonical_interaction(alpha: f64, beta: f64, delta: f64) -> Unitary {
    let mu = [
        0.5 * (alpha + beta - delta),
        0.5 * (alpha - beta + delta),
        0.5 * (-alpha + beta + delta),
        -0.5 * (alpha + beta + delta),
    ];
    let lam = magic_matrix();
    let mut d = ComplexMatrix::zeros(4, 4);
    for (j, m) in mu.iter().enumerate() {
        d.set(j, j, C64::new(0.0, *m).exp());
    }
    Unitary::trusted(lam.matrix().matmul(&d).matmul(&lam.matrix().dagger()))
}

/// Mixing coefficients tried when diagonalizing the symmetric complex matrix
/// `m = u uᵀ`: `Re(m) + c·Im(m)` is real symmetric and, for generic `c`,
/// shares m's eigenvectors. Several values guard against accidental
/// degeneracies of a single mixture.
const EIG_MIX: [f64; 5] = [0.371, -0.2493, 0.8777, 0.0931, 1.6103];

/// Splits a 4x4 unitary known to be a Kronecker product `A ⊗ B` (up to a
/// sign) into SU(2) factors.
fn split_kron(l: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    // Each 2x2 block of l is a_ij · B; read B off the largest block, then
    // project every block back onto it to recover A.
    let block = |i: usize, j: usize| {
        ComplexMatrix::from_fn(2, 2, |r, c| l.get(2 * i + r, 2 * j + c)).expect("finite")
    };
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let n = block(i, j).norm_fro();
            if n > best {
                best = n;
                bi = i;
                bj = j;
            }
        }
    }
    if best < 1e-8 {
        return Err(Error::Numerical("split_kron: vanishing blocks".into()));
    }
    let b0 = block(bi, bj);
    let mut b = b0.scale(C64::new(std::f64::consts::SQRT_2 / best, 0.0));
    let mut a = ComplexMatrix::from_fn(2, 2, |i, j| {
        b.dagger().matmul(&block(i, j)).trace() * C64::new(0.5, 0.0)
    })?;
    // Rotate both factors to determinant one.
    let det_a = a.get(0, 0) * a.get(1, 1) - a.get(0, 1) * a.get(1, 0);
    let det_b = b.get(0, 0) * b.get(1, 1) - b.get(0, 1) * b.get(1, 0);
    a = a.scale(det_a.sqrt().inv());
    b = b.scale(det_b.sqrt().inv());
    // Determinant normalization leaves a joint ± ambiguity.
    let plus = l.sub(&a.kron(&b)).max_abs();
    let minus = l.add(&a.kron(&b)).max_abs();
    if minus < plus {
        a = a.scale(C64::new(-1.0, 0.0));
    }
    let residual = plus.min(minus);
    if residual > 1e-8 {
        return Err(Error::Numerical(format!("split_kron residual {residual:.3e}")));
    }
    Ok((a, b))
}

fn lift_real(m: &DMatrix<f64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
        .expect("finite entries")
}

fn real_det4(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

/// Cartan (KAK) decomposition of a 4x4 unitary.
///
/// Steps: remove the determinant phase; conjugate into the magic basis where
/// local factors are real orthogonal; diagonalize `m = u uᵀ` over the reals;
/// split eigenphases into the interaction angles; peel off the two local
/// layers and factor each into single-qubit terms.
pub fn decompose_2q(u: &Unitary) -> Result<TwoQubitParams> {
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: u.dim() });
    }
    let det = u.matrix().data().clone().lu().determinant();
    let global_phase = det.arg() / 4.0;
    let su = u.matrix().scale(C64::new(0.0, -global_phase).exp());

    let lam = magic_matrix();
    let um = lam.matrix().dagger().matmul(&su).matmul(lam.matrix());
    let mm = um.matmul(&um.transpose());

    // Real eigenbasis of the symmetric complex matrix mm.
    let re = DMatrix::from_fn(4, 4, |i, j| mm.get(i, j).re);
    let im = DMatrix::from_fn(4, 4, |i, j| mm.get(i, j).im);
    let mut found: Option<DMatrix<f64>> = None;
    for c in EIG_MIX {
        let k = &re + &im * c;
        let (_, p) = real_symmetric_eigen(&k);
        let pc = lift_real(&p);
        let d = pc.transpose().matmul(&mm).matmul(&pc);
        let mut off = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    off = off.max(d.get(i, j).norm());
                }
            }
        }
        if off < 1e-9 {
            found = Some(p);
            break;
        }
    }
    let mut p = found.ok_or_else(|| {
        Error::Numerical("decompose_2q: could not diagonalize the interaction form".into())
    })?;

    // Eigenphases of mm, sorted; reorder the basis to match.
    let pc = lift_real(&p);
    let d = pc.transpose().matmul(&mm).matmul(&pc);
    let mut phis: Vec<(f64, usize)> =
        (0..4).map(|j| (d.get(j, j).arg(), j)).collect();
    phis.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let perm: Vec<usize> = phis.iter().map(|&(_, j)| j).collect();
    p = DMatrix::from_fn(4, 4, |i, j| p[(i, perm[j])]);
    if real_det4(&p) < 0.0 {
        for i in 0..4 {
            p[(i, 0)] = -p[(i, 0)];
        }
    }
    let phi: Vec<f64> = phis.iter().map(|&(v, _)| v).collect();

    let alpha = 0.5 * (phi[0] + phi[1]);
    let beta = 0.5 * (phi[0] + phi[2]);
    let delta = 0.5 * (phi[1] + phi[2]);

    // v = magic-basis diagonal of the interaction core, chosen with
    // determinant exactly one so that y = v⁻¹ Pᵀ u is real orthogonal.
    let vdiag = [
        C64::new(0.0, 0.5 * phi[0]).exp(),
        C64::new(0.0, 0.5 * phi[1]).exp(),
        C64::new(0.0, 0.5 * phi[2]).exp(),
        C64::new(0.0, -0.5 * (phi[0] + phi[1] + phi[2])).exp(),
    ];
    let pc = lift_real(&p);
    let pt_u = pc.transpose().matmul(&um);
    let y = ComplexMatrix::from_fn(4, 4, |i, j| vdiag[i].conj() * pt_u.get(i, j))?;
    let im_res = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| y.get(i, j).im.abs())
        .fold(0.0f64, f64::max);
    if im_res > 1e-8 {
        return Err(Error::Numerical(format!(
            "decompose_2q: local factor not real (residual {im_res:.3e})"
        )));
    }

    // Back out of the magic basis; both layers are exact Kronecker products.
    let l_cd = lam.matrix().matmul(&pc).matmul(&lam.matrix().dagger());
    let yc = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(y.get(i, j).re, 0.0))?;
    let l_ab = lam.matrix().matmul(&yc).matmul(&lam.matrix().dagger());
    let (cm, dm) = split_kron(&l_cd)?;
    let (am, bm) = split_kron(&l_ab)?;

    Ok(TwoQubitParams {
        a: decompose_1q(&Unitary::new(am)?)?,
        b: decompose_1q(&Unitary::new(bm)?)?,
        c: decompose_1q(&Unitary::new(cm)?)?,
        d: decompose_1q(&Unitary::new(dm)?)?,
        alpha,
        beta,
        delta,
        global_phase,
    })
}

/// Rebuilds the unitary from Cartan parameters:
/// `e^{iγ} (C⊗D) · exp(i(β·XX + δ·YY + α·ZZ)/2) · (A⊗B)`.
pub fn reconstruct_2q(p: &TwoQubitParams) -> Unitary {
    let pre = reconstruct_1q(&p.a).kron(&reconstruct_1q(&p.b));
    let post = reconstruct_1q(&p.c).kron(&reconstruct_1q(&p.d));
    let v = canonical_interaction(p.alpha, p.beta, p.delta);
    post.compose(&v)
        .compose(&pre)
        .phase_mul(p.global_phase)
}
