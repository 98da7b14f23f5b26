//! Noise channels, per-gate-class noise models, Haar twirling, and
//! effective-noise-channel extraction for compiled sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{gate_matrix, sequence_unitary, GateSequence, NativeGate};
use crate::linalg::{C64, ComplexMatrix};
use crate::quantum::{Superoperator, Unitary, CPTP_TOL};
use crate::rng::RandomSource;

/// Marker for channels replicated independently on every qubit of a
/// multi-qubit register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Each,
}

/// Declarative channel description, JSON-serializable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Identity,
    /// `ρ ↦ λρ + (1−λ)·tr(ρ)·I/d` (with `lambda` read per the model's
    /// convention; see [`LambdaConvention`]).
    Depolarizing {
        lambda: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<Support>,
    },
    /// Single-qubit amplitude damping toward `|0⟩` with decay `epsilon`.
    AmplitudeDamping {
        epsilon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<Support>,
    },
    /// Coherent error: conjugation by a fixed unitary.
    Unitary { matrix: ComplexMatrix },
    /// Sequential composition; `parts[0]` is applied **after** `parts[1]`
    /// and so on (function-composition order).
    Composite { parts: Vec<ChannelSpec> },
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec::Identity
    }
}

/// How the `lambda` field of depolarizing specs is interpreted:
/// `Retention` reads it as the surviving fraction λ itself; `Strength`
/// reads it as `p = 1 − λ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaConvention {
    #[default]
    Retention,
    Strength,
}

/// Noise attached to each native gate class, plus state-preparation/
/// measurement (SPAM) noise and a per-layer channel.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(rename = "RZ", default)]
    pub rz: ChannelSpec,
    #[serde(rename = "RX", default)]
    pub rx: ChannelSpec,
    #[serde(rename = "CZ", default)]
    pub cz: ChannelSpec,
    /// Applied once to the state right before measurement.
    #[serde(rename = "SPAM", default)]
    pub spam: ChannelSpec,
    /// Applied once after every compiled layer (one sampled unitary).
    #[serde(rename = "LAYER", default)]
    pub layer: ChannelSpec,
    #[serde(default)]
    pub lambda_convention: LambdaConvention,
}

/// Depolarizing channel on a `dim`-dimensional system with retention `lambda`:
/// `S = λ·I + ((1−λ)/d)·vec(I)vec(I)ᵀ`.
pub fn depolarizing_superop(dim: usize, lambda: f64) -> Result<Superoperator> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "depolarizing retention {lambda} outside [0, 1]"
        )));
    }
    let d2 = dim * dim;
    let idv = ComplexMatrix::identity(dim).vectorize();
    let mut m = ComplexMatrix::identity(d2).scale(C64::new(lambda, 0.0));
    let w = (1.0 - lambda) / dim as f64;
    for r in 0..d2 {
        for c in 0..d2 {
            let add = idv[r] * idv[c] * C64::new(w, 0.0);
            m.set(r, c, m.get(r, c) + add);
        }
    }
    Superoperator::new(dim, m)
}

/// Single-qubit amplitude damping toward `|0⟩`:
/// Kraus `[[1,0],[0,√(1−ε)]]` and `[[0,√ε],[0,0]]`.
pub fn amplitude_damping_superop(epsilon: f64) -> Result<Superoperator> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "damping strength {epsilon} outside [0, 1]"
        )));
    }
    let z = C64::new(0.0, 0.0);
    let k0 = ComplexMatrix::from_rows(&[
        vec![C64::new(1.0, 0.0), z],
        vec![z, C64::new((1.0 - epsilon).sqrt(), 0.0)],
    ])?;
    let k1 = ComplexMatrix::from_rows(&[
        vec![z, C64::new(epsilon.sqrt(), 0.0)],
        vec![z, z],
    ])?;
    Superoperator::from_kraus(&[k0, k1])
}

/// Best-fit depolarizing retention of a channel: `(tr S − 1)/(d² − 1)`.
/// For the Haar twirl of any channel this is exact, and for a unitary V it
/// equals `(|tr V|² − 1)/(d² − 1)`.
pub fn depolarizing_parameter(s: &Superoperator) -> f64 {
    let d2 = (s.hilbert_dim() * s.hilbert_dim()) as f64;
    (s.matrix().trace().re - 1.0) / (d2 - 1.0)
}

/// Materializes a [`ChannelSpec`] as a superoperator on a `dim`-dimensional
/// register (`dim` ∈ {2, 4}).
pub fn resolve_channel(
    spec: &ChannelSpec,
    dim: usize,
    convention: LambdaConvention,
) -> Result<Superoperator> {
    if dim != 2 && dim != 4 {
        return Err(Error::InvalidParameter(format!("unsupported dimension {dim}")));
    }
    match spec {
        ChannelSpec::Identity => Ok(Superoperator::identity(dim)),
        ChannelSpec::Depolarizing { lambda, q } => {
            let retention = match convention {
                LambdaConvention::Retention => *lambda,
                LambdaConvention::Strength => 1.0 - *lambda,
            };
            match (dim, q) {
                (2, _) => depolarizing_superop(2, retention),
                (4, Some(Support::Each)) => {
                    let one = depolarizing_superop(2, retention)?;
                    Ok(one.tensor(&one))
                }
                (4, None) => depolarizing_superop(4, retention),
                _ => unreachable!("dim validated above"),
            }
        }
        ChannelSpec::AmplitudeDamping { epsilon, q } => match (dim, q) {
            (2, _) => amplitude_damping_superop(*epsilon),
            (4, Some(Support::Each)) => {
                let one = amplitude_damping_superop(*epsilon)?;
                Ok(one.tensor(&one))
            }
            (4, None) => Err(Error::InvalidParameter(
                "amplitude_damping on a two-qubit register requires q = \"each\"".into(),
            )),
            _ => unreachable!("dim validated above"),
        },
        ChannelSpec::Unitary { matrix } => {
            if matrix.nrows() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
            }
            Ok(Superoperator::from_unitary(&Unitary::new(matrix.clone())?))
        }
        ChannelSpec::Composite { parts } => {
            let mut acc = Superoperator::identity(dim);
            // parts[0] ∘ parts[1] ∘ …: matrix product in list order.
            for part in parts {
                acc = acc.compose(&resolve_channel(part, dim, convention)?)?;
            }
            Ok(acc)
        }
    }
}

/// A noise model materialized for a specific register size, with per-gate
/// channels embedded on their target qubits and identity channels elided.
#[derive(Clone, Debug)]
pub struct ResolvedNoise {
    n_qubits: usize,
    rz: Vec<Option<Superoperator>>,
    rx: Vec<Option<Superoperator>>,
    cz: Option<Superoperator>,
    spam: Option<Superoperator>,
    layer: Option<Superoperator>,
}

fn none_if_identity(s: Superoperator) -> Option<Superoperator> {
    let d2 = s.hilbert_dim() * s.hilbert_dim();
    if s.matrix().approx_eq(&ComplexMatrix::identity(d2), 1e-12) {
        None
    } else {
        Some(s)
    }
}

fn check_cptp(name: &str, s: &Superoperator) -> Result<()> {
    let rep = s.cptp_report()?;
    if !rep.is_cptp(CPTP_TOL) {
        return Err(Error::NotCptp {
            reason: format!(
                "{name}: min Choi eigenvalue {:.3e}, TP residual {:.3e}",
                rep.choi_min_eigenvalue, rep.trace_preservation
            ),
        });
    }
    Ok(())
}

/// Embeds a single-qubit channel on `qubit` of an `n_qubits` register.
fn embed_channel_1q(ch: &Superoperator, qubit: usize, n_qubits: usize) -> Superoperator {
    if n_qubits == 1 {
        return ch.clone();
    }
    let id = Superoperator::identity(2);
    if qubit == 0 {
        ch.tensor(&id)
    } else {
        id.tensor(ch)
    }
}

impl NoiseModel {
    /// A model with no noise at all.
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Validates and materializes the model for a register of 1 or 2 qubits.
    /// Every non-identity channel must be CPTP.
    pub fn resolve(&self, n_qubits: usize) -> Result<ResolvedNoise> {
        if n_qubits == 0 || n_qubits > 2 {
            return Err(Error::InvalidParameter(format!(
                "register size {n_qubits} unsupported (expected 1 or 2)"
            )));
        }
        let conv = self.lambda_convention;
        let dim = 1usize << n_qubits;

        let per_gate = |spec: &ChannelSpec, name: &str| -> Result<Vec<Option<Superoperator>>> {
            let base = resolve_channel(spec, 2, conv)?;
            check_cptp(name, &base)?;
            Ok((0..n_qubits)
                .map(|q| none_if_identity(embed_channel_1q(&base, q, n_qubits)))
                .collect())
        };
        let rz = per_gate(&self.rz, "RZ")?;
        let rx = per_gate(&self.rx, "RX")?;

        let cz = if n_qubits == 2 {
            let s = resolve_channel(&self.cz, 4, conv)?;
            check_cptp("CZ", &s)?;
            none_if_identity(s)
        } else {
            None
        };
        let spam = {
            let s = resolve_channel(&self.spam, dim, conv)?;
            check_cptp("SPAM", &s)?;
            none_if_identity(s)
        };
        let layer = {
            let s = resolve_channel(&self.layer, dim, conv)?;
            check_cptp("LAYER", &s)?;
            none_if_identity(s)
        };
        Ok(ResolvedNoise { n_qubits, rz, rx, cz, spam, layer })
    }
}

impl ResolvedNoise {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// The noise channel following one native gate, if any.
    pub fn channel_for(&self, gate: &NativeGate) -> Option<&Superoperator> {
        match gate {
            NativeGate::Rz { q, .. } => self.rz[*q].as_ref(),
            NativeGate::Rx { q, .. } => self.rx[*q].as_ref(),
            NativeGate::Cz { .. } => self.cz.as_ref(),
        }
    }

    pub fn spam(&self) -> Option<&Superoperator> {
        self.spam.as_ref()
    }

    pub fn layer(&self) -> Option<&Superoperator> {
        self.layer.as_ref()
    }
}

/// Total noisy superoperator of one compiled layer: ideal gate conjugations
/// interleaved with their per-class noise, then the LAYER channel.
pub fn noisy_layer_superop(seq: &GateSequence, noise: &ResolvedNoise) -> Result<Superoperator> {
    if noise.n_qubits() != seq.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: noise.n_qubits(),
            got: seq.n_qubits(),
        });
    }
    let dim = 1usize << seq.n_qubits();
    let mut total = Superoperator::identity(dim);
    for g in seq.gates() {
        let su = Superoperator::from_unitary(&gate_matrix(g, seq.n_qubits())?);
        total = su.compose(&total)?;
        if let Some(ch) = noise.channel_for(g) {
            total = ch.compose(&total)?;
        }
    }
    if let Some(layer) = noise.layer() {
        total = layer.compose(&total)?;
    }
    Ok(total)
}

/// The effective noise channel of a compiled sequence:
/// `E = S_noisy ∘ S_ideal†`, i.e. the channel satisfying
/// `S_noisy = E ∘ (ideal conjugation)`. Identity when the model is
/// noiseless; its gate dependence measures how far the hardware noise is
/// from a single gate-independent channel.
pub fn effective_noise_channel(seq: &GateSequence, model: &NoiseModel) -> Result<Superoperator> {
    let noise = model.resolve(seq.n_qubits())?;
    let total = noisy_layer_superop(seq, &noise)?;
    let u = sequence_unitary(seq)?;
    let inverse_ideal = Superoperator::from_unitary(&u.dagger());
    total.compose(&inverse_ideal)
}

/// Monte-Carlo estimate of the Haar twirl `∫ dU U†∘S∘U`.
#[derive(Clone, Debug)]
pub struct TwirlEstimate {
    /// Entrywise mean of the twirled superoperator matrix.
    pub mean: ComplexMatrix,
    /// Largest entrywise standard error.
    pub max_entry_stderr: f64,
    pub samples: usize,
}

/// Averages `S_U† · S · S_U` over `n` Haar-random unitaries.
pub fn haar_twirl_mc(s: &Superoperator, n: usize, rng: &mut RandomSource) -> Result<TwirlEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let d = s.hilbert_dim();
    let d2 = d * d;
    let mut sum = ComplexMatrix::zeros(d2, d2);
    let mut sum_sq = vec![0.0f64; d2 * d2 * 2];
    for _ in 0..n {
        let u = crate::haar::qr_haar(d, rng)?;
        let su = Superoperator::from_unitary(&u);
        let term = su.adjoint().compose(s)?.compose(&su)?;
        for r in 0..d2 {
            for c in 0..d2 {
                let z = term.matrix().get(r, c);
                sum.set(r, c, sum.get(r, c) + z);
                sum_sq[2 * (r * d2 + c)] += z.re * z.re;
                sum_sq[2 * (r * d2 + c) + 1] += z.im * z.im;
            }
        }
    }
    let nf = n as f64;
    let mean = sum.scale(C64::new(1.0 / nf, 0.0));
    let mut max_se = 0.0f64;
    if n > 1 {
        for r in 0..d2 {
            for c in 0..d2 {
                let m = mean.get(r, c);
                let var_re =
                    (sum_sq[2 * (r * d2 + c)] / nf - m.re * m.re).max(0.0) / (nf - 1.0) * nf;
                let var_im =
                    (sum_sq[2 * (r * d2 + c) + 1] / nf - m.im * m.im).max(0.0) / (nf - 1.0) * nf;
                max_se = max_se.max(((var_re + var_im) / nf).sqrt());
            }
        }
    }
    Ok(TwirlEstimate { mean, max_entry_stderr: max_se, samples: n })
}
