//! Test-only oracles: an explicit 2^n x 2^n matrix simulator and a random
//! circuit source. Nothing here calls the statevector kernels.

#![allow(dead_code)]

use num_complex::Complex64;
use qbrittle::{Circuit, Gate, RotationAxis};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub type Matrix = Vec<Vec<Complex64>>;

const O: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|r| (0..dim).map(|c| if r == c { ONE } else { O }).collect())
        .collect()
}

fn pauli(axis: RotationAxis) -> Matrix {
    match axis {
        RotationAxis::X => vec![vec![O, ONE], vec![ONE, O]],
        RotationAxis::Y => vec![vec![O, -I], vec![I, O]],
        RotationAxis::Z => vec![vec![ONE, O], vec![O, -ONE]],
    }
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![O; ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![O; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == O {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Places single-qubit operators on the full register. Qubit 0 is the
/// rightmost Kronecker factor (least significant bit).
fn lift(n: usize, ops: &[(usize, Matrix)]) -> Matrix {
    let mut full = vec![vec![ONE]];
    for q in (0..n).rev() {
        let factor = ops
            .iter()
            .find(|(qq, _)| *qq == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| identity(2));
        full = kron(&full, &factor);
    }
    full
}

/// `exp(-i theta A / 2) = cos(theta/2) I - i sin(theta/2) A`.
fn rotation_matrix(axis: RotationAxis, theta: f64) -> Matrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    add(
        &identity(2)
            .iter()
            .map(|r| r.iter().map(|x| x * c).collect())
            .collect(),
        &pauli(axis)
            .iter()
            .map(|r| r.iter().map(|x| x * (-I * s)).collect())
            .collect(),
    )
}

pub fn gate_matrix(n: usize, gate: &Gate) -> Matrix {
    match *gate {
        Gate::Rotation {
            axis, qubit, theta, ..
        } => lift(n, &[(qubit, rotation_matrix(axis, theta))]),
        Gate::Cnot {
            control, target, ..
        } => {
            let p0 = vec![vec![ONE, O], vec![O, O]];
            let p1 = vec![vec![O, O], vec![O, ONE]];
            add(
                &lift(n, &[(control, p0)]),
                &lift(n, &[(control, p1), (target, pauli(RotationAxis::X))]),
            )
        }
    }
}

/// Final amplitudes of `circuit` from the explicit unitary product.
pub fn dense_run(circuit: &Circuit) -> Vec<Complex64> {
    let n = circuit.n_qubits();
    let mut u = identity(1 << n);
    for g in circuit.gates() {
        u = matmul(&gate_matrix(n, g), &u);
    }
    u.iter().map(|row| row[0]).collect()
}

pub struct RandomCircuits(ChaCha8Rng);

impl RandomCircuits {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn below(&mut self, k: usize) -> usize {
        (self.0.next_u64() % k as u64) as usize
    }

    pub fn angle(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * std::f64::consts::PI
            - std::f64::consts::PI
    }

    /// Up to `max_gates` gates on `n` qubits; CNOTs only when `n >= 2`.
    pub fn circuit(&mut self, n: usize, max_gates: usize) -> Circuit {
        let len = self.below(max_gates + 1);
        let gates = (0..len)
            .map(|_| {
                if n >= 2 && self.below(4) == 0 {
                    let control = self.below(n);
                    let target = (control + 1 + self.below(n - 1)) % n;
                    Gate::cnot(control, target)
                } else {
                    let axis = RotationAxis::ALL[self.below(3)];
                    let q = self.below(n);
                    let t = self.angle();
                    Gate::rotation(axis, q, t)
                }
            })
            .collect();
        Circuit::new(n, gates).unwrap()
    }
}
