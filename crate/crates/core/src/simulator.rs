//! Dense statevector simulation.
//!
//! Qubit 0 is the least significant bit of the basis index. Rotations follow
//! `R_a(theta) = exp(-i theta A / 2)`.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, RotationAxis};
use crate::error::{Error, Result};

/// Default largest register the simulator will allocate.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Environment override for [`DEFAULT_QUBIT_CAP`].
pub const QUBIT_CAP_ENV: &str = "QBRITTLE_MAX_QUBITS";

/// The active qubit cap: `QBRITTLE_MAX_QUBITS` when set and parseable,
/// otherwise [`DEFAULT_QUBIT_CAP`].
pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits, subject to [`qubit_cap`].
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::zero_state_capped(n, qubit_cap())
    }

    pub fn zero_state_capped(n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "state needs at least one qubit".into(),
            ));
        }
        if n > cap {
            return Err(Error::ResourceLimit { n, cap });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits: n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply(&mut self, gate: &Gate) {
        match *gate {
            Gate::Rotation {
                axis, qubit, theta, ..
            } => self.rotate(axis, qubit, theta),
            Gate::Cnot {
                control, target, ..
            } => self.cnot(control, target),
        }
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) {
        for g in gates {
            self.apply(g);
        }
    }

    fn rotate(&mut self, axis: RotationAxis, qubit: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        match axis {
            RotationAxis::Z => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                let stride = 1 << qubit;
                for block in self.amps.chunks_exact_mut(2 * stride) {
                    let (a0, a1) = block.split_at_mut(stride);
                    a0.iter_mut().for_each(|a| *a *= lo);
                    a1.iter_mut().for_each(|a| *a *= hi);
                }
            }
            RotationAxis::X => {
                // [[c, -is], [-is, c]]
                self.pairwise(qubit, |a, b| {
                    let (ra, rb) = (*a, *b);
                    *a = Complex64::new(c * ra.re + s * rb.im, c * ra.im - s * rb.re);
                    *b = Complex64::new(c * rb.re + s * ra.im, c * rb.im - s * ra.re);
                });
            }
            RotationAxis::Y => {
                // [[c, -s], [s, c]]
                self.pairwise(qubit, |a, b| {
                    let (ra, rb) = (*a, *b);
                    *a = ra * c - rb * s;
                    *b = ra * s + rb * c;
                });
            }
        }
    }

    #[inline]
    fn pairwise(&mut self, qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let stride = 1 << qubit;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (a0, a1) = block.split_at_mut(stride);
            for (a, b) in a0.iter_mut().zip(a1.iter_mut()) {
                f(a, b);
            }
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let cm = 1usize << control;
        let tm = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// `<self| P |self>` for a single-qubit Pauli `P`.
    pub fn pauli_expectation(&self, axis: RotationAxis, qubit: usize) -> f64 {
        let stride = 1 << qubit;
        let mut acc = 0.0;
        for block in self.amps.chunks_exact(2 * stride) {
            let (a0, a1) = block.split_at(stride);
            for (a, b) in a0.iter().zip(a1) {
                acc += match axis {
                    RotationAxis::X => 2.0 * (a.conj() * b).re,
                    RotationAxis::Y => 2.0 * (a.conj() * b).im,
                    RotationAxis::Z => a.norm_sqr() - b.norm_sqr(),
                };
            }
        }
        acc
    }

    /// `<self| CNOT |self>`, which is real because CNOT is Hermitian.
    pub fn cnot_expectation(&self, control: usize, target: usize) -> f64 {
        let cm = 1usize << control;
        let tm = 1usize << target;
        let mut acc = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if i & cm == 0 {
                acc += a.norm_sqr();
            } else if i & tm == 0 {
                acc += 2.0 * (a.conj() * self.amps[i | tm]).re;
            }
        }
        acc
    }

    /// `|<self| G |self>|^2`: the overlap between this state and the same
    /// state after `gate`.
    pub fn gate_overlap(&self, gate: &Gate) -> f64 {
        match *gate {
            Gate::Rotation {
                axis, qubit, theta, ..
            } => {
                // <R> = cos(t/2) - i sin(t/2) <A>
                let (s, c) = (theta / 2.0).sin_cos();
                let e = self.pauli_expectation(axis, qubit);
                c * c + s * s * e * e
            }
            Gate::Cnot {
                control, target, ..
            } => self.cnot_expectation(control, target).powi(2),
        }
    }

    /// Writes `index,re,im` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(out, "{i},{:.17e},{:.17e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// Runs `circuit` from `|0...0>`.
pub fn run(circuit: &Circuit) -> Result<StateVector> {
    let mut state = StateVector::zero_state(circuit.n_qubits())?;
    state.apply_all(circuit.gates());
    Ok(state)
}

/// `|<a|b>|^2`, clamped into `[0, 1]`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}
