//! Circuit and gate types, the structurally-uniform ensemble generator,
//! and circuit (de)serialization.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::ser::Error as _;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Near-zero angle range for layered rotations drawn with probability `rho`.
pub const SMALL_ANGLE_RANGE: (f64, f64) = (0.001, 0.05);
/// Angle range for every other layered rotation.
pub const LARGE_ANGLE_RANGE: (f64, f64) = (PI / 6.0, PI / 2.0);
/// Angle range for the appended Rz gates.
pub const APPENDED_ANGLE_RANGE: (f64, f64) = (0.001, 0.01);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

impl RotationAxis {
    pub const ALL: [RotationAxis; 3] = [RotationAxis::X, RotationAxis::Y, RotationAxis::Z];

    pub fn as_str(self) -> &'static str {
        match self {
            RotationAxis::X => "x",
            RotationAxis::Y => "y",
            RotationAxis::Z => "z",
        }
    }
}

impl fmt::Display for RotationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a rotation came from in the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Layered,
    Appended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Gate {
    #[serde(rename = "rot")]
    Rotation {
        axis: RotationAxis,
        qubit: usize,
        #[serde(serialize_with = "serialize_angle")]
        theta: f64,
        provenance: Provenance,
        layer: usize,
    },
    #[serde(rename = "cnot")]
    Cnot {
        control: usize,
        target: usize,
        layer: usize,
    },
}

impl Gate {
    pub fn rotation(axis: RotationAxis, qubit: usize, theta: f64) -> Self {
        Gate::Rotation {
            axis,
            qubit,
            theta,
            provenance: Provenance::Layered,
            layer: 0,
        }
    }

    pub fn rx(qubit: usize, theta: f64) -> Self {
        Self::rotation(RotationAxis::X, qubit, theta)
    }

    pub fn ry(qubit: usize, theta: f64) -> Self {
        Self::rotation(RotationAxis::Y, qubit, theta)
    }

    pub fn rz(qubit: usize, theta: f64) -> Self {
        Self::rotation(RotationAxis::Z, qubit, theta)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot {
            control,
            target,
            layer: 0,
        }
    }

    /// Rotation angle, or `None` for a CNOT.
    pub fn theta(&self) -> Option<f64> {
        match *self {
            Gate::Rotation { theta, .. } => Some(theta),
            Gate::Cnot { .. } => None,
        }
    }

    pub fn axis(&self) -> Option<RotationAxis> {
        match *self {
            Gate::Rotation { axis, .. } => Some(axis),
            Gate::Cnot { .. } => None,
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, Gate::Rotation { .. })
    }

    pub fn layer(&self) -> usize {
        match *self {
            Gate::Rotation { layer, .. } | Gate::Cnot { layer, .. } => layer,
        }
    }

    /// Short type tag used in tables: `rx`, `ry`, `rz` or `cx`.
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::Rotation { axis, .. } => match axis {
                RotationAxis::X => "rx",
                RotationAxis::Y => "ry",
                RotationAxis::Z => "rz",
            },
            Gate::Cnot { .. } => "cx",
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<(), String> {
        match *self {
            Gate::Rotation { qubit, theta, .. } => {
                if qubit >= n_qubits {
                    return Err(format!("qubit {qubit} out of range for {n_qubits} qubits"));
                }
                if !theta.is_finite() {
                    return Err(format!("non-finite angle {theta}"));
                }
            }
            Gate::Cnot {
                control, target, ..
            } => {
                if control >= n_qubits || target >= n_qubits {
                    return Err(format!(
                        "cnot ({control}, {target}) out of range for {n_qubits} qubits"
                    ));
                }
                if control == target {
                    return Err(format!("cnot control equals target ({control})"));
                }
            }
        }
        Ok(())
    }
}

fn serialize_angle<S: Serializer>(theta: &f64, s: S) -> Result<S::Ok, S::Error> {
    // 17 significant digits so the text round-trips bit-exactly.
    let raw = serde_json::value::RawValue::from_string(format!("{theta:.16e}"))
        .map_err(S::Error::custom)?;
    raw.serialize(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub n: usize,
    pub alpha: f64,
    pub rho: f64,
    pub seed: u64,
}

impl GenerationParams {
    pub fn new(n: usize, alpha: f64, rho: f64, seed: u64) -> Self {
        Self {
            n,
            alpha,
            rho,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "qubit count must be even and at least 4, got {}",
                self.n
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "depth factor must be positive, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!(
                "redundancy rate must lie in [0, 1], got {}",
                self.rho
            )));
        }
        if self.layers() == 0 {
            return Err(Error::InvalidParameter(format!(
                "n * alpha = {} gives zero layers",
                self.n as f64 * self.alpha
            )));
        }
        Ok(())
    }

    /// Number of layers, `floor(n * alpha)`.
    pub fn layers(&self) -> usize {
        (self.n as f64 * self.alpha).floor() as usize
    }

    /// Number of appended near-zero Rz gates, `floor(n * rho)`.
    pub fn appended(&self) -> usize {
        (self.n as f64 * self.rho).floor() as usize
    }

    /// Closed-form gate count of a generated circuit.
    pub fn gate_count(&self) -> usize {
        let l = self.layers();
        l * self.n + l.saturating_sub(1) * (self.n / 2) + self.appended()
    }
}

/// An ordered gate list on `n_qubits`. Gate order is execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitDoc")]
pub struct Circuit {
    n_qubits: usize,
    params: Option<GenerationParams>,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct CircuitDoc {
    n_qubits: usize,
    params: Option<GenerationParams>,
    gates: Vec<Gate>,
}

impl TryFrom<CircuitDoc> for Circuit {
    type Error = Error;

    fn try_from(doc: CircuitDoc) -> Result<Self> {
        let mut c = Circuit::new(doc.n_qubits, doc.gates)?;
        c.params = doc.params;
        Ok(c)
    }
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Validation("circuit needs at least one qubit".into()));
        }
        for (i, g) in gates.iter().enumerate() {
            g.validate(n_qubits)
                .map_err(|e| Error::Validation(format!("gate {i}: {e}")))?;
        }
        Ok(Self {
            n_qubits,
            params: None,
            gates,
        })
    }

    pub fn empty(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn params(&self) -> Option<&GenerationParams> {
        self.params.as_ref()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Angles of all rotation gates, in gate order.
    pub fn rotation_angles(&self) -> Vec<f64> {
        self.gates.iter().filter_map(Gate::theta).collect()
    }

    /// Greedy-layering depth: each gate lands one level above the highest
    /// level reached so far on any qubit it touches.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n_qubits];
        for gate in &self.gates {
            match *gate {
                Gate::Rotation { qubit, .. } => level[qubit] += 1,
                Gate::Cnot {
                    control, target, ..
                } => {
                    let l = level[control].max(level[target]) + 1;
                    level[control] = l;
                    level[target] = l;
                }
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Returns a copy with the gates at `indices` deleted. Survivors keep
    /// their relative order.
    pub fn remove_gates(&self, indices: &[usize]) -> Result<Circuit> {
        let mut drop = vec![false; self.gates.len()];
        for &i in indices {
            if i >= self.gates.len() {
                return Err(Error::InvalidParameter(format!(
                    "gate index {i} out of range for {} gates",
                    self.gates.len()
                )));
            }
            drop[i] = true;
        }
        let gates = self
            .gates
            .iter()
            .zip(&drop)
            .filter(|(_, &d)| !d)
            .map(|(g, _)| *g)
            .collect();
        Ok(Circuit {
            n_qubits: self.n_qubits,
            params: self.params,
            gates,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("validated circuits always serialize")
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        Circuit::try_from(doc)
    }

    /// OpenQASM 2.0 rendering on a single register `q`.
    pub fn to_qasm(&self) -> String {
        let mut out = String::new();
        out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.n_qubits);
        for gate in &self.gates {
            let _ = match *gate {
                Gate::Rotation { qubit, theta, .. } => {
                    writeln!(out, "{}({theta}) q[{qubit}];", gate.kind())
                }
                Gate::Cnot {
                    control, target, ..
                } => writeln!(out, "cx q[{control}],q[{target}];"),
            };
        }
        out
    }
}

/// Seeded draws in a fixed order. The generator is ChaCha8 seeded through
/// `seed_from_u64`; every draw consumes exactly one 64-bit word.
struct Draws(ChaCha8Rng);

impl Draws {
    fn new(seed: u64) -> Self {
        Draws(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on the closed unit interval from the top 53 bits.
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / ((1u64 << 53) - 1) as f64
    }

    fn uniform(&mut self, (lo, hi): (f64, f64)) -> f64 {
        lo + self.unit() * (hi - lo)
    }

    /// Uniform index in `0..k` by multiply-shift.
    fn index(&mut self, k: usize) -> usize {
        ((self.0.next_u64() as u128 * k as u128) >> 64) as usize
    }
}

/// Builds one circuit of the structurally-uniform ensemble.
///
/// Layer `l` places a rotation with a random axis on every qubit, then
/// (except for the last layer) a ring brick-wall of `n/2` CNOTs: pairs
/// `(2k, 2k+1)` on even layers and `(2k+1, (2k+2) mod n)` on odd layers.
/// Per rotation the stream is read as axis, angle branch, angle. After the
/// layers, `floor(n*rho)` Rz gates draw a qubit (with replacement) then an
/// angle. Appended gates carry `layer = L`.
pub fn generate_uniform(params: &GenerationParams) -> Result<Circuit> {
    params.validate()?;
    let n = params.n;
    let layers = params.layers();
    let mut draws = Draws::new(params.seed);
    let mut gates = Vec::with_capacity(params.gate_count());

    for layer in 0..layers {
        for qubit in 0..n {
            let axis = RotationAxis::ALL[draws.index(3)];
            let small = draws.unit() < params.rho;
            let theta = draws.uniform(if small {
                SMALL_ANGLE_RANGE
            } else {
                LARGE_ANGLE_RANGE
            });
            gates.push(Gate::Rotation {
                axis,
                qubit,
                theta,
                provenance: Provenance::Layered,
                layer,
            });
        }
        if layer + 1 == layers {
            break;
        }
        let offset = layer % 2;
        for k in 0..n / 2 {
            let control = 2 * k + offset;
            gates.push(Gate::Cnot {
                control,
                target: (control + 1) % n,
                layer,
            });
        }
    }

    for _ in 0..params.appended() {
        let qubit = draws.index(n);
        let theta = draws.uniform(APPENDED_ANGLE_RANGE);
        gates.push(Gate::Rotation {
            axis: RotationAxis::Z,
            qubit,
            theta,
            provenance: Provenance::Appended,
            layer: layers,
        });
    }

    Ok(Circuit {
        n_qubits: n,
        params: Some(*params),
        gates,
    })
}
