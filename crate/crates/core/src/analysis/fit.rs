//! Weighted least-squares fit of the survival model `F(m) = A + B·p^m`.
//!
//! The decay parameter enters nonlinearly, but at fixed `p` the model is
//! linear in `(A, B)`. The fitter therefore runs an outer one-dimensional
//! search on `p` over `(0, 1)` — a 1000-point bracketing grid followed by
//! golden-section refinement — solving the 2x2 weighted normal equations in
//! closed form at every candidate. This is deterministic and has no
//! starting-point sensitivity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rb::RBResult;

/// One observation: sequence length, mean survival, fit weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub m: f64,
    pub f: f64,
    pub weight: f64,
}

/// Result of fitting `F(m) = A + B·p^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    /// Decay parameter, always inside `(0, 1)`.
    pub p: f64,
    /// Weighted residual sum of squares at the optimum.
    pub rss: f64,
    pub stderr_a: f64,
    pub stderr_b: f64,
    pub stderr_p: f64,
    /// The search for `p` ended at the edge of its domain; the reported
    /// value is a clamp, not an interior optimum.
    pub at_boundary: bool,
    /// A constant model fits as well as the decay model, so `p` carries no
    /// information (e.g. flat data with `B ≈ 0`).
    pub unidentifiable: bool,
    pub n_points: usize,
}

const GRID_POINTS: usize = 1000;
const GOLDEN_TOL: f64 = 1e-12;

/// Weighted linear least squares for `(A, B)` at fixed `p`; returns
/// `(a, b, rss)`. Falls back to the constant model when the design is
/// collinear (e.g. `p^m` numerically constant).
fn solve_at_p(points: &[FitPoint], p: f64) -> (f64, f64, f64) {
    let (mut sw, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for pt in points {
        let x = p.powf(pt.m);
        sw += pt.weight;
        sx += pt.weight * x;
        sxx += pt.weight * x * x;
        sy += pt.weight * pt.f;
        sxy += pt.weight * x * pt.f;
    }
    let det = sw * sxx - sx * sx;
    let (a, b) = if det.abs() > 1e-14 * sw * sxx.max(1e-300) {
        ((sxx * sy - sx * sxy) / det, (sw * sxy - sx * sy) / det)
    } else {
        (sy / sw, 0.0)
    };
    let mut rss = 0.0;
    for pt in points {
        let r = pt.f - a - b * p.powf(pt.m);
        rss += pt.weight * r * r;
    }
    (a, b, rss)
}

fn golden_section(points: &[FitPoint], mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = solve_at_p(points, c).2;
    let mut fd = solve_at_p(points, d).2;
    for _ in 0..200 {
        if hi - lo < GOLDEN_TOL {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = solve_at_p(points, c).2;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = solve_at_p(points, d).2;
        }
    }
    0.5 * (lo + hi)
}

/// Fits `F(m) = A + B·p^m` by weighted least squares.
///
/// Requires at least three distinct `m` values with positive weight.
/// Standard errors come from the linearized covariance
/// `s²(JᵀWJ)⁻¹` with `s² = rss/(n−3)` (1 when `n = 3`).
pub fn fit_exponential(points: &[FitPoint]) -> Result<DecayFit> {
    for pt in points {
        if !pt.m.is_finite() || !pt.f.is_finite() || !pt.weight.is_finite() || pt.weight < 0.0 {
            return Err(Error::InvalidParameter(
                "fit points must be finite with nonnegative weights".into(),
            ));
        }
    }
    let active: Vec<FitPoint> = points.iter().copied().filter(|p| p.weight > 0.0).collect();
    let mut ms: Vec<f64> = active.iter().map(|p| p.m).collect();
    ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ms.dedup();
    if ms.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 distinct sequence lengths with positive weight, got {}",
            ms.len()
        )));
    }

    let mut best_k = 0;
    let mut best_rss = f64::INFINITY;
    for k in 0..GRID_POINTS {
        let p = (k as f64 + 0.5) / GRID_POINTS as f64;
        let (_, _, rss) = solve_at_p(&active, p);
        if rss < best_rss {
            best_rss = rss;
            best_k = k;
        }
    }
    let lo = ((best_k as f64 - 0.5) / GRID_POINTS as f64).max(1e-9);
    let hi = ((best_k as f64 + 1.5) / GRID_POINTS as f64).min(1.0 - 1e-9);
    let p = golden_section(&active, lo, hi);
    let (a, b, rss) = solve_at_p(&active, p);

    let edge = 0.5 / GRID_POINTS as f64;
    let at_boundary = p <= edge + 1e-9 || p >= 1.0 - edge - 1e-9;

    // Compare against the best constant model: if the decay term buys no
    // residual reduction, p is meaningless.
    let sw: f64 = active.iter().map(|pt| pt.weight).sum();
    let ybar: f64 = active.iter().map(|pt| pt.weight * pt.f).sum::<f64>() / sw;
    let rss_flat: f64 = active
        .iter()
        .map(|pt| pt.weight * (pt.f - ybar) * (pt.f - ybar))
        .sum();
    let unidentifiable = rss_flat - rss <= 1e-12 * rss_flat.max(1.0);

    let n = active.len();
    let s2 = if n > 3 { rss / (n - 3) as f64 } else { 1.0 };
    let (stderr_a, stderr_b, stderr_p) = match normal_matrix_inverse(&active, p, b) {
        Some(inv_diag) => (
            (s2 * inv_diag[0]).max(0.0).sqrt(),
            (s2 * inv_diag[1]).max(0.0).sqrt(),
            (s2 * inv_diag[2]).max(0.0).sqrt(),
        ),
        None => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
    };

    Ok(DecayFit {
        a,
        b,
        p,
        rss,
        stderr_a,
        stderr_b,
        stderr_p,
        at_boundary,
        unidentifiable,
        n_points: n,
    })
}

/// Diagonal of `(JᵀWJ)⁻¹` for the Jacobian rows
/// `[∂F/∂A, ∂F/∂B, ∂F/∂p] = [1, p^m, B·m·p^{m−1}]`; `None` when singular.
fn normal_matrix_inverse(points: &[FitPoint], p: f64, b: f64) -> Option<[f64; 3]> {
    let mut g = [[0.0f64; 3]; 3];
    for pt in points {
        let j = [1.0, p.powf(pt.m), b * pt.m * p.powf(pt.m - 1.0)];
        for r in 0..3 {
            for c in 0..3 {
                g[r][c] += pt.weight * j[r] * j[c];
            }
        }
    }
    // Cofactor inversion of the symmetric 3x3 normal matrix.
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    let scale: f64 = (0..3).map(|i| g[i][i].abs()).fold(0.0, f64::max);
    if det.abs() <= 1e-14 * scale.powi(3).max(1e-300) {
        return None;
    }
    let c00 = g[1][1] * g[2][2] - g[1][2] * g[2][1];
    let c11 = g[0][0] * g[2][2] - g[0][2] * g[2][0];
    let c22 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    Some([c00 / det, c11 / det, c22 / det])
}

/// Fits the per-length mean survivals of a benchmarking run.
///
/// Weights are `1/std²` when every length has a positive spread, otherwise
/// uniform (noiseless runs have zero spread at every length).
pub fn fit_rb_result(result: &RBResult) -> Result<DecayFit> {
    let usable = result.per_length.iter().all(|l| l.std > 1e-12);
    let points: Vec<FitPoint> = result
        .per_length
        .iter()
        .map(|l| FitPoint {
            m: l.m as f64,
            f: l.mean,
            weight: if usable { 1.0 / (l.std * l.std) } else { 1.0 },
        })
        .collect();
    fit_exponential(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    fn forward(a: f64, b: f64, p: f64, ms: &[f64]) -> Vec<FitPoint> {
        ms.iter()
            .map(|&m| FitPoint { m, f: a + b * p.powf(m), weight: 1.0 })
            .collect()
    }

    fn default_ms() -> Vec<f64> {
        crate::rb::default_lengths().iter().map(|&m| m as f64).collect()
    }

    #[test]
    fn test_fit_recovers_noiseless_ground_truth() {
        let pts = forward(0.5, 0.45, 0.95, &default_ms());
        let fit = fit_exponential(&pts).unwrap();
        assert!((fit.a - 0.5).abs() < 1e-6, "a = {}", fit.a);
        assert!((fit.b - 0.45).abs() < 1e-6, "b = {}", fit.b);
        assert!((fit.p - 0.95).abs() < 1e-6, "p = {}", fit.p);
        assert!(fit.rss < 1e-12);
        assert!(!fit.at_boundary && !fit.unidentifiable);
    }

    #[test]
    fn test_fit_recovers_reference_curves() {
        // Two fixed fixtures with A well away from 1/d.
        for (a, b, p) in [(0.508, 0.425, 0.987), (0.221, 0.662, 0.917)] {
            let fit = fit_exponential(&forward(a, b, p, &default_ms())).unwrap();
            assert!((fit.a - a).abs() < 1e-6);
            assert!((fit.b - b).abs() < 1e-6);
            assert!((fit.p - p).abs() < 1e-6);
        }
    }

    #[test]
    fn test_fit_random_ground_truths() {
        let mut rng = RandomSource::from_seed(401);
        let ms = default_ms();
        for _ in 0..100 {
            let a = rng.uniform();
            let b = rng.uniform();
            let p = rng.uniform_range(0.8, 0.999);
            let fit = fit_exponential(&forward(a, b, p, &ms)).unwrap();
            assert!((fit.a - a).abs() < 1e-6, "a {a} -> {}", fit.a);
            assert!((fit.b - b).abs() < 1e-6, "b {b} -> {}", fit.b);
            assert!((fit.p - p).abs() < 1e-6, "p {p} -> {}", fit.p);
        }
    }

    #[test]
    fn test_fit_matches_dense_grid_search() {
        // Independent route: brute-force argmin of the same objective on a
        // micro-spaced p grid, on data with real residuals.
        let mut rng = RandomSource::from_seed(402);
        let pts: Vec<FitPoint> = default_ms()
            .iter()
            .map(|&m| FitPoint {
                m,
                f: 0.3 + 0.6 * 0.94f64.powf(m) + 0.01 * (rng.uniform() - 0.5),
                weight: 1.0,
            })
            .collect();
        let fit = fit_exponential(&pts).unwrap();
        let mut best = (0.0, f64::INFINITY);
        for k in 1..1_000_000 {
            let p = k as f64 / 1_000_000.0;
            let (_, _, rss) = solve_at_p(&pts, p);
            if rss < best.1 {
                best = (p, rss);
            }
        }
        assert!((fit.p - best.0).abs() < 2e-6, "{} vs {}", fit.p, best.0);
        assert!(fit.rss <= best.1 + 1e-12);
    }

    #[test]
    fn test_constant_data_flagged_unidentifiable() {
        let pts: Vec<FitPoint> =
            default_ms().iter().map(|&m| FitPoint { m, f: 0.62, weight: 1.0 }).collect();
        let fit = fit_exponential(&pts).unwrap();
        assert!(fit.unidentifiable);
        assert!((fit.a - 0.62).abs() < 1e-6);
        assert!(fit.b.abs() < 1e-6);
    }

    #[test]
    fn test_boundary_flagged() {
        // Ground truth so close to 1 that the optimum sits at the edge of
        // the search bracket.
        let pts = forward(0.25, 0.75, 0.999_999, &default_ms());
        let fit = fit_exponential(&pts).unwrap();
        assert!(fit.at_boundary, "p = {}", fit.p);
        assert!(fit.p < 1.0 && fit.p > 0.0);
    }

    #[test]
    fn test_zero_weight_points_ignored() {
        let mut pts = forward(0.5, 0.45, 0.95, &default_ms());
        pts.push(FitPoint { m: 3.0, f: 123.0, weight: 0.0 });
        let fit = fit_exponential(&pts).unwrap();
        assert!((fit.p - 0.95).abs() < 1e-6);
        assert_eq!(fit.n_points, 10);
    }

    #[test]
    fn test_weights_downweight_noisy_points() {
        // One corrupted observation with a big residual: with a tiny weight
        // the fit should stay near the truth.
        let mut pts = forward(0.5, 0.45, 0.95, &default_ms());
        pts[4].f += 0.3;
        pts[4].weight = 1e-6;
        let fit = fit_exponential(&pts).unwrap();
        assert!((fit.p - 0.95).abs() < 1e-3, "p = {}", fit.p);
        let uniform: Vec<FitPoint> =
            pts.iter().map(|p| FitPoint { weight: 1.0, ..*p }).collect();
        let fit_u = fit_exponential(&uniform).unwrap();
        assert!((fit_u.p - 0.95).abs() > (fit.p - 0.95).abs());
    }

    #[test]
    fn test_fit_rejects_degenerate_design() {
        let pts = vec![
            FitPoint { m: 2.0, f: 0.9, weight: 1.0 },
            FitPoint { m: 2.0, f: 0.8, weight: 1.0 },
            FitPoint { m: 4.0, f: 0.7, weight: 1.0 },
        ];
        assert!(fit_exponential(&pts).is_err());
        assert!(fit_exponential(&[]).is_err());
    }

    #[test]
    fn test_stderr_covers_noise_scale() {
        let mut rng = RandomSource::from_seed(403);
        let sigma = 0.005;
        let pts: Vec<FitPoint> = default_ms()
            .iter()
            .map(|&m| FitPoint {
                m,
                f: 0.25 + 0.71 * 0.95f64.powf(m) + sigma * rng.standard_normal(),
                weight: 1.0 / (sigma * sigma),
            })
            .collect();
        let fit = fit_exponential(&pts).unwrap();
        assert!(fit.stderr_p > 1e-5 && fit.stderr_p < 0.05, "stderr_p {}", fit.stderr_p);
        assert!((fit.p - 0.95).abs() < 4.0 * fit.stderr_p, "p {} ± {}", fit.p, fit.stderr_p);
    }

    #[test]
    fn test_decay_fit_serde_round_trip() {
        let fit = fit_exponential(&forward(0.5, 0.45, 0.95, &default_ms())).unwrap();
        let text = serde_json::to_string(&fit).unwrap();
        let back: DecayFit = serde_json::from_str(&text).unwrap();
        assert_eq!(back, fit);
    }
}
