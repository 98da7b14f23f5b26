//! Diamond-norm distance between channels.
//!
//! `d(Λa, Λb) = max_ρ ‖(id ⊗ Λa)ρ − (id ⊗ Λb)ρ‖₁`, maximized over states on
//! the doubled space (reference system of the same dimension on the left).
//! The maximum of this convex objective is attained at a pure state, so the
//! search runs projected ascent over pure inputs: at the current state take
//! the trace-norm subgradient `W = sign(M)`, then move to the top
//! eigenvector of the pulled-back operator `T†(W)`. Each step is monotone;
//! random restarts guard against local maxima. The result is a lower bound
//! on the true distance; `restart_spread` is a convergence-quality signal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, C64, ComplexMatrix};
use crate::quantum::Superoperator;
use crate::rng::RandomSource;

/// Knobs for the ascent; the defaults match the documented behaviour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop a restart when the objective improves by less than this.
    pub tolerance: f64,
    /// Seed for the restart starting states; fixed so the bound is a pure
    /// function of its channel arguments.
    pub seed: u64,
}

impl Default for DiamondOptions {
    fn default() -> Self {
        Self { restarts: 32, max_iterations: 300, tolerance: 1e-9, seed: 0x0d1a }
    }
}

/// Outcome of the maximization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondReport {
    /// Best objective value over all restarts (a lower bound).
    pub value: f64,
    /// Spread between the best and worst restart endpoint; large values
    /// mean the landscape has competing local maxima.
    pub restart_spread: f64,
    pub restarts: usize,
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    m.add(&m.dagger()).scale(C64::new(0.5, 0.0))
}

fn random_pure_state(dim: usize, rng: &mut RandomSource) -> Vec<C64> {
    let mut v: Vec<C64> =
        (0..dim).map(|_| C64::new(rng.standard_normal(), rng.standard_normal())).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

fn projector(state: &[C64]) -> ComplexMatrix {
    let d = state.len();
    ComplexMatrix::from_fn(d, d, |i, j| state[i] * state[j].conj())
        .expect("projector entries are finite")
}

/// Trace norm and subgradient `W = Σ sign(λ_k) v_k v_k†` of a Hermitian
/// matrix.
fn trace_norm_subgradient(m: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
    let d = m.dim();
    let (vals, vecs) = hermitian_eigen(m)?;
    let value = vals.iter().map(|v| v.abs()).sum();
    let mut w = ComplexMatrix::zeros(d, d);
    for (k, &lam) in vals.iter().enumerate() {
        let s = if lam >= 0.0 { 1.0 } else { -1.0 };
        for i in 0..d {
            for j in 0..d {
                let add = vecs.get(i, k) * vecs.get(j, k).conj() * s;
                w.set(i, j, w.get(i, j) + add);
            }
        }
    }
    Ok((value, w))
}

/// Diamond-norm distance with explicit options.
pub fn diamond_distance_with(
    a: &Superoperator,
    b: &Superoperator,
    options: &DiamondOptions,
) -> Result<DiamondReport> {
    if a.hilbert_dim() != b.hilbert_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.hilbert_dim(),
            got: b.hilbert_dim(),
        });
    }
    if options.restarts == 0 || options.max_iterations == 0 {
        return Err(Error::InvalidParameter(
            "diamond search needs at least one restart and one iteration".into(),
        ));
    }
    let d = a.hilbert_dim();
    let delta = Superoperator::new(d, a.matrix().sub(b.matrix()))?;
    if delta.matrix().max_abs() < 1e-15 {
        return Ok(DiamondReport { value: 0.0, restart_spread: 0.0, restarts: options.restarts });
    }
    // The objective is real only for Hermiticity-preserving differences,
    // equivalently a Hermitian Choi matrix.
    let choi_res = delta.choi().hermiticity_residual();
    if choi_res > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "channel difference is not Hermiticity-preserving (Choi residual {choi_res:.2e})"
        )));
    }

    let t = Superoperator::identity(d).tensor(&delta);
    let t_adj = t.adjoint();
    let dd = d * d;

    let mut best = 0.0f64;
    let mut worst = f64::INFINITY;
    for r in 0..options.restarts {
        let mut rng = RandomSource::substream(options.seed, r as u64);
        let mut psi = random_pure_state(dd, &mut rng);
        let mut prev = f64::NEG_INFINITY;
        let mut val = 0.0;
        for _ in 0..options.max_iterations {
            let m = hermitize(&t.apply_matrix(&projector(&psi))?);
            let (value, w) = trace_norm_subgradient(&m)?;
            val = value;
            let h = hermitize(&t_adj.apply_matrix(&w)?);
            let (_, hvecs) = hermitian_eigen(&h)?;
            for (i, z) in psi.iter_mut().enumerate() {
                *z = hvecs.get(i, dd - 1);
            }
            if val - prev < options.tolerance * val.max(1.0) {
                break;
            }
            prev = val;
        }
        best = best.max(val);
        worst = worst.min(val);
    }
    Ok(DiamondReport { value: best, restart_spread: best - worst, restarts: options.restarts })
}

/// Diamond-norm distance with default options (32 restarts, tolerance
/// 1e-9). Returns the scalar lower bound.
pub fn diamond_distance(a: &Superoperator, b: &Superoperator) -> Result<f64> {
    Ok(diamond_distance_with(a, b, &DiamondOptions::default())?.value)
}
