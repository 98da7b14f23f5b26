//! Haar-random sampling of one- and two-qubit unitaries in fixed-depth
//! native form, a QR-based reference sampler, and distribution diagnostics
//! (Bloch-sphere uniformity, eigenphase spacings, frame potentials).

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::gates::{single_qubit_template, two_qubit_template, GateSequence};
use crate::linalg::{qr_orthonormalize, unitary_eigenphases, C64, ComplexMatrix};
use crate::quantum::Unitary;
use crate::rng::RandomSource;
use crate::stats;
use crate::synth::{reconstruct_1q, reconstruct_2q, SingleQubitParams, TwoQubitParams};

/// Draws Euler angles whose template unitary is Haar-distributed on U(2)
/// up to global phase: φ, ω uniform on [0, 2π), cos θ uniform on [−1, 1].
pub fn sample_1q_params(rng: &mut RandomSource) -> SingleQubitParams {
    let phi = rng.angle();
    let theta = (1.0 - 2.0 * rng.uniform()).clamp(-1.0, 1.0).acos();
    let omega = rng.angle();
    SingleQubitParams { phi, theta, omega, global_phase: 0.0 }
}

/// Haar-random single-qubit unitary with its five-gate native realization.
pub fn haar_1q(rng: &mut RandomSource) -> (GateSequence, Unitary) {
    let p = sample_1q_params(rng);
    let seq = single_qubit_template(p.phi, p.theta, p.omega);
    (seq, reconstruct_1q(&p))
}

/// Rejection-samples four phases from the squared-Vandermonde joint density
/// `∝ Π_{i<j} |e^{iφ_i} − e^{iφ_j}|²` on `(−π, π]⁴`, returning the draw and
/// the number of attempts. The envelope constant 256 = 4⁴ is the density's
/// maximum, attained at equispaced phases; the acceptance rate is
/// 4!/256 ≈ 9.4%.
pub fn sample_weyl_phases_counted(rng: &mut RandomSource) -> ([f64; 4], u64) {
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        let phis = [
            rng.uniform_range(-PI, PI),
            rng.uniform_range(-PI, PI),
            rng.uniform_range(-PI, PI),
            rng.uniform_range(-PI, PI),
        ];
        let mut w = 1.0f64;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = C64::new(0.0, phis[i]).exp() - C64::new(0.0, phis[j]).exp();
                w *= d.norm_sqr();
            }
        }
        if 256.0 * rng.uniform() < w {
            return (phis, attempts);
        }
    }
}

/// See [`sample_weyl_phases_counted`]; discards the attempt count.
pub fn sample_weyl_phases(rng: &mut RandomSource) -> [f64; 4] {
    sample_weyl_phases_counted(rng).0
}

/// Draws Cartan parameters whose reconstruction is Haar-distributed on U(4)
/// up to global phase: interaction angles from half-sums of eigenphases with
/// the squared-Vandermonde density, local factors Haar on U(2).
///
/// Draw order is fixed (phases, then a, b, c, d) so byte-identical streams
/// give byte-identical parameters.
pub fn sample_2q_params(rng: &mut RandomSource) -> TwoQubitParams {
    let phis = sample_weyl_phases(rng);
    let alpha = 0.5 * (phis[0] + phis[1]);
    let beta = 0.5 * (phis[0] + phis[2]);
    let delta = 0.5 * (phis[1] + phis[2]);
    let a = sample_1q_params(rng);
    let b = sample_1q_params(rng);
    let c = sample_1q_params(rng);
    let d = sample_1q_params(rng);
    TwoQubitParams { a, b, c, d, alpha, beta, delta, global_phase: 0.0 }
}

/// Haar-random two-qubit unitary with its 43-gate, 3-CZ native realization.
pub fn haar_2q(rng: &mut RandomSource) -> (GateSequence, Unitary) {
    let p = sample_2q_params(rng);
    let seq = two_qubit_template(&p).expect("sampled parameters are always finite");
    (seq, reconstruct_2q(&p))
}

/// Reference Haar sampler: complex Ginibre matrix, QR, R-diagonal phase fix.
/// Dimension-generic and independent of the template pipeline.
pub fn qr_haar(dim: usize, rng: &mut RandomSource) -> Result<Unitary> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.standard_normal(), rng.standard_normal())
    })?;
    Unitary::new(qr_orthonormalize(&g)?)
}

/// Bloch vector `(x, y, z)` of `U|0⟩`.
pub fn bloch_vector(u: &Unitary) -> Result<(f64, f64, f64)> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: u.dim() });
    }
    let c0 = u.matrix().get(0, 0);
    let c1 = u.matrix().get(1, 0);
    let cross = c0.conj() * c1;
    Ok((2.0 * cross.re, 2.0 * cross.im, c0.norm_sqr() - c1.norm_sqr()))
}

/// Uniformity diagnostics for points on the Bloch sphere.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlochReport {
    pub n: usize,
    /// KS statistic of z against uniform on [−1, 1], and its critical value.
    pub ks_z: f64,
    pub ks_z_critical: f64,
    /// KS statistic of the azimuth against uniform on (−π, π].
    pub ks_azimuth: f64,
    pub ks_azimuth_critical: f64,
    /// First moments of (x, y, z); all should be ≈ 0.
    pub first_moments: [f64; 3],
    /// Second moments of (x, y, z); all should be ≈ 1/3.
    pub second_moments: [f64; 3],
    /// Allowed deviation `4/√n` for the moment checks.
    pub moment_band: f64,
    pub pass: bool,
}

/// Runs KS and moment tests on explicit Bloch points at significance `alpha`.
pub fn bloch_report(points: &[(f64, f64, f64)], alpha: f64) -> Result<BlochReport> {
    let n = points.len();
    if n < 10 {
        return Err(Error::InvalidParameter("need at least 10 points".into()));
    }
    let zs: Vec<f64> = points.iter().map(|p| p.2).collect();
    let az: Vec<f64> = points.iter().map(|p| p.1.atan2(p.0)).collect();
    let ks_z = stats::ks_statistic(&zs, |z| ((z + 1.0) / 2.0).clamp(0.0, 1.0));
    let ks_azimuth = stats::ks_statistic(&az, |a| ((a + PI) / TAU).clamp(0.0, 1.0));
    let crit = stats::ks_critical(n, alpha);
    let mut first = [0.0f64; 3];
    let mut second = [0.0f64; 3];
    for (x, y, z) in points {
        let c = [*x, *y, *z];
        for k in 0..3 {
            first[k] += c[k];
            second[k] += c[k] * c[k];
        }
    }
    for k in 0..3 {
        first[k] /= n as f64;
        second[k] /= n as f64;
    }
    let moment_band = 4.0 / (n as f64).sqrt();
    let moments_ok = (0..3).all(|k| {
        first[k].abs() <= moment_band && (second[k] - 1.0 / 3.0).abs() <= moment_band
    });
    let pass = ks_z <= crit && ks_azimuth <= crit && moments_ok;
    Ok(BlochReport {
        n,
        ks_z,
        ks_z_critical: crit,
        ks_azimuth,
        ks_azimuth_critical: crit,
        first_moments: first,
        second_moments: second,
        moment_band,
        pass,
    })
}

/// Samples `n` template-based Haar unitaries and tests `U|0⟩` for
/// Bloch-sphere uniformity.
pub fn verify_bloch_uniformity(
    n: usize,
    alpha: f64,
    rng: &mut RandomSource,
) -> Result<BlochReport> {
    let points: Result<Vec<_>> = (0..n).map(|_| bloch_vector(&haar_1q(rng).1)).collect();
    bloch_report(&points?, alpha)
}

/// Consecutive eigenphase gaps of each unitary (including the wrap-around
/// gap), normalized to unit mean by the factor `d/2π`.
pub fn eigenphase_spacings(unitaries: &[Unitary]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for u in unitaries {
        let d = u.dim();
        if d < 2 {
            return Err(Error::InvalidParameter("need dimension at least 2".into()));
        }
        let phases = unitary_eigenphases(u.matrix())?;
        for k in 0..d {
            let gap = if k + 1 < d {
                phases[k + 1] - phases[k]
            } else {
                TAU + phases[0] - phases[d - 1]
            };
            out.push(gap * d as f64 / TAU);
        }
    }
    Ok(out)
}

/// Comparison of a sampler's normalized eigenphase-spacing distribution
/// against a reference sample, via a fixed histogram on [0, 4].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpacingReport {
    /// Probability-mass histogram of the sample spacings (40 bins on [0, 4]).
    pub histogram: Vec<f64>,
    /// Histogram of the reference spacings on the same bins.
    pub reference: Vec<f64>,
    /// Total-variation distance between the two histograms.
    pub tv: f64,
    pub n_spacings: usize,
    /// Number of distinct spacing values (1e-9 rounding); a tiny count
    /// reveals a degenerate (e.g. equispaced-phase) sampler.
    pub distinct_spacings: usize,
}

/// Histogram span and bin count used by [`spacing_report`].
pub const SPACING_BINS: usize = 40;
pub const SPACING_MAX: f64 = 4.0;

impl SpacingReport {
    /// Degeneracy heuristic: many samples but almost no distinct values.
    pub fn is_degenerate(&self) -> bool {
        self.n_spacings >= 100 && self.distinct_spacings < 10
    }
}

/// Builds the spacing comparison between sampled and reference unitaries.
pub fn spacing_report(sample: &[Unitary], reference: &[Unitary]) -> Result<SpacingReport> {
    let s = eigenphase_spacings(sample)?;
    let r = eigenphase_spacings(reference)?;
    if s.is_empty() || r.is_empty() {
        return Err(Error::InvalidParameter("empty spacing sample".into()));
    }
    let hist = stats::histogram(&s, 0.0, SPACING_MAX, SPACING_BINS);
    let href = stats::histogram(&r, 0.0, SPACING_MAX, SPACING_BINS);
    let tv = stats::total_variation(&hist, &href);
    let mut rounded: Vec<i64> = s.iter().map(|x| (x / 1e-9).round() as i64).collect();
    rounded.sort_unstable();
    rounded.dedup();
    Ok(SpacingReport {
        histogram: hist,
        reference: href,
        tv,
        n_spacings: s.len(),
        distinct_spacings: rounded.len(),
    })
}

/// Monte-Carlo frame potential `E|tr(U†V)|^{2t}` over disjoint consecutive
/// pairs of the input list. Returns `(mean, standard error)`.
///
/// For Haar sampling the expected values are 1 at `t = 1` and 2 at `t = 2`
/// (dimension ≥ 2); deviations flag a non-uniform sampler.
pub fn frame_potential(t: u32, unitaries: &[Unitary]) -> Result<(f64, f64)> {
    if unitaries.len() < 2 {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    let dim = unitaries[0].dim();
    let mut vals = Vec::with_capacity(unitaries.len() / 2);
    for pair in unitaries.chunks_exact(2) {
        if pair[0].dim() != dim || pair[1].dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: pair[1].dim() });
        }
        let tr = pair[0].matrix().dagger().matmul(pair[1].matrix()).trace().norm_sqr();
        vals.push(tr.powi(t as i32));
    }
    let (mean, sd) = stats::mean_std(&vals);
    Ok((mean, sd / (vals.len() as f64).sqrt()))
}
