//! Randomized benchmarking on a built-in noisy density-matrix simulator.
//!
//! Two schemes share one engine: `restricted` draws Haar-random unitaries
//! compiled to the fixed native templates; `clifford` draws uniformly from
//! the full Clifford group (built once by closure over standard generators)
//! and compiles each element with the same templates. Every run appends the
//! exact inverse of the accumulated product, so the noiseless survival
//! probability is 1 at any depth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::channels::{NoiseModel, ResolvedNoise};
use crate::error::{Error, Result};
use crate::gates::{
    cnot_matrix, gate_matrix, hadamard, phase_s, single_qubit_template, two_qubit_template,
    GateSequence,
};
use crate::haar::{sample_1q_params, sample_2q_params};
use crate::linalg::ComplexMatrix;
use crate::quantum::Unitary;
use crate::rng::RandomSource;
use crate::synth::{decompose_1q, decompose_2q, reconstruct_1q, reconstruct_2q};

/// Which ensemble the random layers are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Restricted,
    Clifford,
}

/// Default sequence-length grid.
pub fn default_lengths() -> Vec<usize> {
    vec![1, 2, 4, 6, 10, 16, 26, 42, 68, 110]
}

/// Full description of a benchmarking run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RBConfig {
    pub n_qubits: usize,
    pub scheme: Scheme,
    pub lengths: Vec<usize>,
    /// Random sequences per length.
    pub sequences: usize,
    /// Measurement shots per sequence.
    pub shots: u64,
    #[serde(default)]
    pub noise: NoiseModel,
    pub seed: u64,
}

/// Survival data at one sequence length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthResult {
    pub m: usize,
    /// Mean of the shot estimates.
    pub mean: f64,
    /// Sample standard deviation of the shot estimates.
    pub std: f64,
    /// Shot-estimated survival per sequence.
    pub survivals: Vec<f64>,
    /// Exact (infinite-shot) survival per sequence.
    pub exact: Vec<f64>,
}

/// Output of a benchmarking run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RBResult {
    pub config: RBConfig,
    pub tool_version: String,
    pub per_length: Vec<LengthResult>,
}

/// The n-qubit Clifford group, stored as explicit unitaries with a
/// phase-insensitive index for exact inverse lookup.
pub struct CliffordGroup {
    n_qubits: usize,
    elements: Vec<Unitary>,
    index: HashMap<Vec<i64>, usize>,
}

/// Phase-normalized, grid-rounded fingerprint of a unitary. The first entry
/// with non-negligible magnitude is rotated real-positive, killing the
/// global phase; entries of Clifford unitaries then live on a coarse
/// discrete set, so rounding to 1e-6 absorbs float drift without collisions.
fn canonical_key(m: &ComplexMatrix) -> Vec<i64> {
    let d = m.dim();
    let mut phase = None;
    'outer: for i in 0..d {
        for j in 0..d {
            let z = m.get(i, j);
            if z.norm() > 1e-3 {
                phase = Some(z / z.norm());
                break 'outer;
            }
        }
    }
    let phase = phase.expect("unitary has a nonzero entry").conj();
    let mut key = Vec::with_capacity(2 * d * d);
    for i in 0..d {
        for j in 0..d {
            let z = m.get(i, j) * phase;
            key.push((z.re * 1e6).round() as i64);
            key.push((z.im * 1e6).round() as i64);
        }
    }
    key
}

impl CliffordGroup {
    /// Builds the group by breadth-first closure over `{H, S}` (one qubit)
    /// or `{H, S on each qubit, CNOT both orientations}` (two qubits).
    /// Element order is the deterministic BFS discovery order.
    pub fn new(n_qubits: usize) -> Result<Self> {
        let generators: Vec<ComplexMatrix> = match n_qubits {
            1 => vec![hadamard(), phase_s()],
            2 => {
                let id = ComplexMatrix::identity(2);
                vec![
                    hadamard().kron(&id),
                    id.kron(&hadamard()),
                    phase_s().kron(&id),
                    id.kron(&phase_s()),
                    cnot_matrix(0, 1)?,
                    cnot_matrix(1, 0)?,
                ]
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "Clifford group supported for 1 or 2 qubits, got {n_qubits}"
                )))
            }
        };
        let expected = if n_qubits == 1 { 24 } else { 11520 };
        let dim = 1usize << n_qubits;
        let mut elements = vec![Unitary::identity(dim)];
        let mut index = HashMap::new();
        index.insert(canonical_key(elements[0].matrix()), 0usize);
        let mut cursor = 0;
        while cursor < elements.len() {
            let base = elements[cursor].matrix().clone();
            for g in &generators {
                let prod = g.matmul(&base);
                let key = canonical_key(&prod);
                if !index.contains_key(&key) {
                    index.insert(key, elements.len());
                    elements.push(Unitary::trusted(prod));
                    if elements.len() > 2 * expected {
                        return Err(Error::Numerical(
                            "Clifford closure exceeded the expected group order".into(),
                        ));
                    }
                }
            }
            cursor += 1;
        }
        if elements.len() != expected {
            return Err(Error::Numerical(format!(
                "Clifford closure found {} elements, expected {expected}",
                elements.len()
            )));
        }
        Ok(Self { n_qubits, elements, index })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &Unitary {
        &self.elements[i]
    }

    /// Index of the group element equal to `u` up to global phase.
    pub fn find(&self, u: &Unitary) -> Option<usize> {
        self.index.get(&canonical_key(u.matrix())).copied()
    }

    /// Index of the group inverse of `u` (lookup of `u†`).
    pub fn inverse_of(&self, u: &Unitary) -> Result<usize> {
        self.find(&u.dagger()).ok_or_else(|| {
            Error::InvalidParameter("matrix is not a Clifford group element".into())
        })
    }
}

/// Compiles an arbitrary unitary of the register to its fixed template.
fn compile_unitary(u: &Unitary) -> Result<GateSequence> {
    match u.dim() {
        2 => {
            let p = decompose_1q(u)?;
            Ok(single_qubit_template(p.phi, p.theta, p.omega))
        }
        4 => two_qubit_template(&decompose_2q(u)?),
        d => Err(Error::DimensionMismatch { expected: 4, got: d }),
    }
}

/// Draws `m` random layers plus the compiled exact inverse of their product.
/// Returns the `m + 1` compiled layers and the ideal product including the
/// inverse (identity up to global phase).
pub fn generate_sequence(
    scheme: Scheme,
    n_qubits: usize,
    m: usize,
    group: Option<&CliffordGroup>,
    rng: &mut RandomSource,
) -> Result<Vec<GateSequence>> {
    if m == 0 {
        return Err(Error::InvalidParameter("sequence length must be at least 1".into()));
    }
    let dim = 1usize << n_qubits;
    let mut layers = Vec::with_capacity(m + 1);
    let mut product = Unitary::identity(dim);
    match scheme {
        Scheme::Restricted => {
            for _ in 0..m {
                let (seq, u) = match n_qubits {
                    1 => {
                        let p = sample_1q_params(rng);
                        (single_qubit_template(p.phi, p.theta, p.omega), reconstruct_1q(&p))
                    }
                    2 => {
                        let p = sample_2q_params(rng);
                        (two_qubit_template(&p)?, reconstruct_2q(&p))
                    }
                    n => {
                        return Err(Error::InvalidParameter(format!(
                            "restricted scheme supports 1 or 2 qubits, got {n}"
                        )))
                    }
                };
                product = u.compose(&product);
                layers.push(seq);
            }
            layers.push(compile_unitary(&product.dagger())?);
        }
        Scheme::Clifford => {
            let group = group.ok_or_else(|| {
                Error::InvalidParameter("clifford scheme requires a prebuilt group".into())
            })?;
            if group.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    got: group.n_qubits(),
                });
            }
            use rand::Rng;
            for _ in 0..m {
                let idx = rng.gen_range(0..group.len());
                let u = group.element(idx);
                product = u.compose(&product);
                layers.push(compile_unitary(u)?);
            }
            // Invert with the exact group element, not the float dagger.
            let inv_idx = group.inverse_of(&product)?;
            layers.push(compile_unitary(group.element(inv_idx))?);
        }
    }
    Ok(layers)
}

/// Exact and shot-sampled survival of one compiled sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalOutcome {
    /// Probability of measuring the initial state, from the density matrix.
    pub exact: f64,
    /// Binomial estimate of the same probability from `shots` samples.
    pub estimate: f64,
}

/// Evolves `|0…0⟩⟨0…0|` through the layers under the resolved noise model
/// and measures the survival probability of the initial state.
pub fn simulate_survival(
    layers: &[GateSequence],
    noise: &ResolvedNoise,
    shots: u64,
    rng: &mut RandomSource,
) -> Result<SurvivalOutcome> {
    let n_qubits = layers
        .first()
        .ok_or_else(|| Error::InvalidParameter("no layers to simulate".into()))?
        .n_qubits();
    if noise.n_qubits() != n_qubits {
        return Err(Error::DimensionMismatch { expected: n_qubits, got: noise.n_qubits() });
    }
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let dim = 1usize << n_qubits;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    rho.set(0, 0, crate::linalg::C64::new(1.0, 0.0));
    for layer in layers {
        if layer.n_qubits() != n_qubits {
            return Err(Error::DimensionMismatch { expected: n_qubits, got: layer.n_qubits() });
        }
        for g in layer.gates() {
            let gm = gate_matrix(g, n_qubits)?;
            rho = gm.matrix().matmul(&rho).matmul(&gm.matrix().dagger());
            if let Some(ch) = noise.channel_for(g) {
                rho = ch.apply_matrix(&rho)?;
            }
        }
        if let Some(ch) = noise.layer() {
            rho = ch.apply_matrix(&rho)?;
        }
    }
    if let Some(ch) = noise.spam() {
        rho = ch.apply_matrix(&rho)?;
    }
    let exact = rho.get(0, 0).re;
    if !(-1e-9..=1.0 + 1e-9).contains(&exact) {
        return Err(Error::Numerical(format!("survival probability {exact} out of range")));
    }
    let exact = exact.clamp(0.0, 1.0);
    let estimate = rng.binomial(shots, exact) as f64 / shots as f64;
    Ok(SurvivalOutcome { exact, estimate })
}

/// Runs a full benchmarking experiment.
///
/// Work item `(length index li, sequence index si)` uses the dedicated
/// substream `li·sequences + si + 1` of the config seed for both sequence
/// generation and shot sampling, so results are byte-identical for any
/// worker-thread count.
pub fn run_rb(config: &RBConfig) -> Result<RBResult> {
    if config.lengths.is_empty() {
        return Err(Error::InvalidParameter("no sequence lengths given".into()));
    }
    if config.lengths.iter().any(|&m| m == 0) {
        return Err(Error::InvalidParameter("sequence lengths must be at least 1".into()));
    }
    if config.sequences == 0 {
        return Err(Error::InvalidParameter("need at least one sequence per length".into()));
    }
    let noise = config.noise.resolve(config.n_qubits)?;
    let group = match config.scheme {
        Scheme::Clifford => Some(CliffordGroup::new(config.n_qubits)?),
        Scheme::Restricted => None,
    };

    let tasks: Vec<(usize, usize)> = (0..config.lengths.len())
        .flat_map(|li| (0..config.sequences).map(move |si| (li, si)))
        .collect();
    let outcomes: Result<Vec<SurvivalOutcome>> = tasks
        .par_iter()
        .map(|&(li, si)| {
            let stream = (li * config.sequences + si) as u64 + 1;
            let mut rng = RandomSource::substream(config.seed, stream);
            let layers = generate_sequence(
                config.scheme,
                config.n_qubits,
                config.lengths[li],
                group.as_ref(),
                &mut rng,
            )?;
            simulate_survival(&layers, &noise, config.shots, &mut rng)
        })
        .collect();
    let outcomes = outcomes?;

    let per_length = config
        .lengths
        .iter()
        .enumerate()
        .map(|(li, &m)| {
            let chunk = &outcomes[li * config.sequences..(li + 1) * config.sequences];
            let survivals: Vec<f64> = chunk.iter().map(|o| o.estimate).collect();
            let exact: Vec<f64> = chunk.iter().map(|o| o.exact).collect();
            let (mean, std) = crate::stats::mean_std(&survivals);
            LengthResult { m, mean, std, survivals, exact }
        })
        .collect();

    Ok(RBResult {
        config: config.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        per_length,
    })
}
