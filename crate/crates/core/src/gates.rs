//! Native gate alphabet, gate sequences, and fixed-shape circuit templates.
//!
//! The alphabet is `RZ(θ)` for any angle, `RX` restricted by the templates to
//! `±π/2` and `±π`, and `CZ`. Sequences list gates in application order: the
//! first element acts first, so the sequence unitary is the reversed matrix
//! product.
//!
//! Qubit 0 is the most significant tensor factor: a gate on qubit 0 of a
//! two-qubit register embeds as `M ⊗ I`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix};
use crate::quantum::Unitary;
use crate::synth::{decompose_1q, reconstruct_1q, TwoQubitParams};

/// Number of native gates emitted for one arbitrary single-qubit unitary.
pub const SINGLE_QUBIT_TEMPLATE_LEN: usize = 5;
/// Number of native gates emitted for one arbitrary two-qubit unitary.
pub const TWO_QUBIT_TEMPLATE_LEN: usize = 43;
/// Number of CZ gates in the two-qubit template.
pub const TWO_QUBIT_TEMPLATE_CZ: usize = 3;

/// One native gate with its target(s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NativeGate {
    #[serde(rename = "RZ")]
    Rz { angle: f64, q: usize },
    #[serde(rename = "RX")]
    Rx { angle: f64, q: usize },
    #[serde(rename = "CZ")]
    Cz { q: [usize; 2] },
}

impl NativeGate {
    /// Largest qubit index the gate touches.
    fn max_qubit(&self) -> usize {
        match self {
            NativeGate::Rz { q, .. } | NativeGate::Rx { q, .. } => *q,
            NativeGate::Cz { q } => q[0].max(q[1]),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        match self {
            NativeGate::Rz { angle, q } | NativeGate::Rx { angle, q } => {
                if !angle.is_finite() {
                    return Err(Error::NonFinite);
                }
                if *q >= n_qubits {
                    return Err(Error::InvalidParameter(format!(
                        "gate targets qubit {q} but the register has {n_qubits}"
                    )));
                }
            }
            NativeGate::Cz { q } => {
                if q[0] == q[1] {
                    return Err(Error::InvalidParameter("CZ requires distinct qubits".into()));
                }
                if self.max_qubit() >= n_qubits {
                    return Err(Error::InvalidParameter(format!(
                        "CZ targets {:?} but the register has {n_qubits}",
                        q
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `RZ(θ) = diag(e^{-iθ/2}, e^{iθ/2})`.
pub fn rz_matrix(angle: f64) -> ComplexMatrix {
    let h = 0.5 * angle;
    let mut m = ComplexMatrix::zeros(2, 2);
    m.set(0, 0, C64::new(0.0, -h).exp());
    m.set(1, 1, C64::new(0.0, h).exp());
    m
}

/// `RX(θ) = cos(θ/2) I − i sin(θ/2) X`.
pub fn rx_matrix(angle: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * angle).sin_cos();
    ComplexMatrix::from_rows(&[
        vec![C64::new(c, 0.0), C64::new(0.0, -s)],
        vec![C64::new(0.0, -s), C64::new(c, 0.0)],
    ])
    .expect("finite entries")
}

/// `RY(θ) = cos(θ/2) I − i sin(θ/2) Y`.
pub fn ry_matrix(angle: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * angle).sin_cos();
    ComplexMatrix::from_rows(&[
        vec![C64::new(c, 0.0), C64::new(-s, 0.0)],
        vec![C64::new(s, 0.0), C64::new(c, 0.0)],
    ])
    .expect("finite entries")
}

/// The Hadamard gate.
pub fn hadamard() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_rows(&[
        vec![C64::new(s, 0.0), C64::new(s, 0.0)],
        vec![C64::new(s, 0.0), C64::new(-s, 0.0)],
    ])
    .expect("finite entries")
}

/// The phase gate `S = diag(1, i)`.
pub fn phase_s() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m.set(0, 0, C64::new(1.0, 0.0));
    m.set(1, 1, C64::new(0.0, 1.0));
    m
}

/// CZ on two qubits: `diag(1, 1, 1, -1)`.
pub fn cz_matrix() -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    m.set(3, 3, C64::new(-1.0, 0.0));
    m
}

/// CNOT with `control` and `target` drawn from a two-qubit register.
pub fn cnot_matrix(control: usize, target: usize) -> Result<ComplexMatrix> {
    if control > 1 || target > 1 || control == target {
        return Err(Error::InvalidParameter("cnot_matrix expects qubits {0,1}".into()));
    }
    let mut m = ComplexMatrix::zeros(4, 4);
    for i in 0..4usize {
        let bits = [(i >> 1) & 1, i & 1];
        let mut out = bits;
        if bits[control] == 1 {
            out[target] ^= 1;
        }
        let j = (out[0] << 1) | out[1];
        m.set(j, i, C64::new(1.0, 0.0));
    }
    Ok(m)
}

/// Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [ComplexMatrix; 4] {
    let z = |re: f64, im: f64| C64::new(re, im);
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_rows(&[vec![z(0., 0.), z(1., 0.)], vec![z(1., 0.), z(0., 0.)]])
            .unwrap(),
        ComplexMatrix::from_rows(&[vec![z(0., 0.), z(0., -1.)], vec![z(0., 1.), z(0., 0.)]])
            .unwrap(),
        ComplexMatrix::from_rows(&[vec![z(1., 0.), z(0., 0.)], vec![z(0., 0.), z(-1., 0.)]])
            .unwrap(),
    ]
}

/// Embeds a single-qubit matrix at `qubit` in an `n_qubits` register.
pub fn embed_1q(m: &ComplexMatrix, qubit: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: m.nrows() });
    }
    if qubit >= n_qubits {
        return Err(Error::InvalidParameter(format!("qubit {qubit} >= n_qubits {n_qubits}")));
    }
    let mut out = ComplexMatrix::identity(1);
    for q in 0..n_qubits {
        out = if q == qubit { out.kron(m) } else { out.kron(&ComplexMatrix::identity(2)) };
    }
    Ok(out)
}

/// Full-register unitary of one native gate.
pub fn gate_matrix(gate: &NativeGate, n_qubits: usize) -> Result<Unitary> {
    gate.validate(n_qubits)?;
    let m = match gate {
        NativeGate::Rz { angle, q } => embed_1q(&rz_matrix(*angle), *q, n_qubits)?,
        NativeGate::Rx { angle, q } => embed_1q(&rx_matrix(*angle), *q, n_qubits)?,
        NativeGate::Cz { q } => {
            let dim = 1usize << n_qubits;
            ComplexMatrix::from_fn(dim, dim, |i, j| {
                if i != j {
                    C64::new(0.0, 0.0)
                } else {
                    let b0 = (i >> (n_qubits - 1 - q[0])) & 1;
                    let b1 = (i >> (n_qubits - 1 - q[1])) & 1;
                    C64::new(if b0 == 1 && b1 == 1 { -1.0 } else { 1.0 }, 0.0)
                }
            })?
        }
    };
    Ok(Unitary::trusted(m))
}

/// An ordered list of native gates on a fixed-size register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateSequenceRaw")]
pub struct GateSequence {
    n_qubits: usize,
    gates: Vec<NativeGate>,
}

#[derive(Deserialize)]
struct GateSequenceRaw {
    n_qubits: usize,
    gates: Vec<NativeGate>,
}

impl TryFrom<GateSequenceRaw> for GateSequence {
    type Error = String;
    fn try_from(raw: GateSequenceRaw) -> std::result::Result<Self, String> {
        GateSequence::new(raw.n_qubits, raw.gates).map_err(|e| e.to_string())
    }
}

impl GateSequence {
    /// Validates every gate against the register size.
    pub fn new(n_qubits: usize, gates: Vec<NativeGate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("register must have at least one qubit".into()));
        }
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[NativeGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, NativeGate::Cz { .. })).count()
    }

    pub fn push(&mut self, gate: NativeGate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends another sequence on the same register.
    pub fn extend(&mut self, other: &GateSequence) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: other.n_qubits });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }
}

/// Product unitary of a sequence; the first listed gate is applied first
/// (rightmost factor in the matrix product).
pub fn sequence_unitary(seq: &GateSequence) -> Result<Unitary> {
    let dim = 1usize << seq.n_qubits();
    let mut acc = ComplexMatrix::identity(dim);
    for g in seq.gates() {
        acc = gate_matrix(g, seq.n_qubits())?.into_matrix().matmul(&acc);
    }
    Ok(Unitary::trusted(acc))
}

/// Closed form of `RZ(ω)·RY(θ)·RZ(φ)`, the Euler-angle unitary realized by
/// the single-qubit template.
pub fn single_qubit_unitary(phi: f64, theta: f64, omega: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = |x: f64| C64::new(0.0, x).exp();
    ComplexMatrix::from_rows(&[
        vec![e(-0.5 * (phi + omega)) * c, -e(0.5 * (phi - omega)) * s],
        vec![e(-0.5 * (phi - omega)) * s, e(0.5 * (phi + omega)) * c],
    ])
    .expect("finite entries")
}

/// Appends the five-gate single-qubit block realizing `RZ(ω)RY(θ)RZ(φ)`
/// on `qubit`. `RX(−π/2)·RZ(θ)·RX(π/2) = RY(θ)` exactly, with no leftover
/// phase, so the block reproduces the closed form to machine precision.
fn push_euler_block(seq: &mut GateSequence, qubit: usize, phi: f64, theta: f64, omega: f64) {
    let q = qubit;
    seq.push(NativeGate::Rz { angle: phi, q }).expect("valid qubit");
    seq.push(NativeGate::Rx { angle: FRAC_PI_2, q }).expect("valid qubit");
    seq.push(NativeGate::Rz { angle: theta, q }).expect("valid qubit");
    seq.push(NativeGate::Rx { angle: -FRAC_PI_2, q }).expect("valid qubit");
    seq.push(NativeGate::Rz { angle: omega, q }).expect("valid qubit");
}

/// Fixed five-gate template for an arbitrary single-qubit unitary
/// (up to global phase): `[RZ(φ), RX(π/2), RZ(θ), RX(−π/2), RZ(ω)]`.
pub fn single_qubit_template(phi: f64, theta: f64, omega: f64) -> GateSequence {
    let mut seq = GateSequence::empty(1);
    push_euler_block(&mut seq, 0, phi, theta, omega);
    seq
}

/// Compiles an arbitrary 2x2 unitary block onto `qubit` via its Euler angles.
fn push_compiled_block(seq: &mut GateSequence, qubit: usize, m: &ComplexMatrix) -> Result<()> {
    let p = decompose_1q(&Unitary::new(m.clone())?)?;
    push_euler_block(seq, qubit, p.phi, p.theta, p.omega);
    Ok(())
}

/// Fixed 43-gate, 3-CZ template realizing an arbitrary two-qubit unitary
/// from its Cartan parameters, up to global phase.
///
/// The interaction core `exp(i(β·XX + δ·YY + α·ZZ)/2)` is produced by three
/// CZ gates separated by fixed single-qubit corrections; the outer local
/// unitaries are folded into the first and last single-qubit layers. Every
/// layer compiles each qubit's 2x2 block through the five-gate Euler
/// template, so the gate count is 4·2·5 + 3 = 43 regardless of input.
pub fn two_qubit_template(p: &TwoQubitParams) -> Result<GateSequence> {
    let h = hadamard();
    let a = reconstruct_1q(&p.a).into_matrix();
    let b = reconstruct_1q(&p.b).into_matrix();
    let c = reconstruct_1q(&p.c).into_matrix();
    let d = reconstruct_1q(&p.d).into_matrix();

    // Layers in application order; (q0 block, q1 block) per layer.
    let rz_half = rz_matrix(FRAC_PI_2);
    let layers: [(ComplexMatrix, ComplexMatrix); 4] = [
        (a, rx_matrix(FRAC_PI_2).matmul(&b)),
        (rx_matrix(p.delta).matmul(&rz_half), rz_half.matmul(&h).matmul(&rz_half)),
        (rx_matrix(-p.beta), h.matmul(&rz_matrix(-p.alpha))),
        (c, d.matmul(&h)),
    ];

    let mut seq = GateSequence::empty(2);
    for (i, (m0, m1)) in layers.iter().enumerate() {
        push_compiled_block(&mut seq, 0, m0)?;
        push_compiled_block(&mut seq, 1, m1)?;
        if i + 1 < layers.len() {
            seq.push(NativeGate::Cz { q: [0, 1] })?;
        }
    }
    debug_assert_eq!(seq.len(), TWO_QUBIT_TEMPLATE_LEN);
    debug_assert_eq!(seq.cz_count(), TWO_QUBIT_TEMPLATE_CZ);
    Ok(seq)
}

/// True when `angle` is one of the four RX angles the hardware alphabet
/// admits (`±π/2`, `±π`), within `tol`.
pub fn is_allowed_rx_angle(angle: f64, tol: f64) -> bool {
    [FRAC_PI_2, -FRAC_PI_2, PI, -PI].iter().any(|a| (angle - a).abs() <= tol)
}
