//! Leave-one-out causal importance and deletion-only compression.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::simulator::{fidelity, run, StateVector};
use crate::stats::{self, SMALL_ANGLE_THRESHOLD};

/// Per-gate importance `I_i = 1 - F(C without gate i)` against the intact
/// circuit, plus the intact final state.
#[derive(Debug, Clone)]
pub struct ImportanceProfile {
    scores: Vec<f64>,
    baseline: StateVector,
}

impl ImportanceProfile {
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn baseline(&self) -> &StateVector {
        &self.baseline
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn entropy(&self) -> Result<f64> {
        stats::shannon_entropy(&self.scores)
    }

    pub fn gini(&self) -> Result<f64> {
        stats::gini(&self.scores)
    }

    /// Gate indices ordered by ascending importance, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[a].total_cmp(&self.scores[b]).then(a.cmp(&b)));
        order
    }

    /// CSV with columns `gate_index,gate_type,axis,qubits,theta,importance`.
    /// CNOT qubits are written `control;target`.
    pub fn write_csv<W: std::io::Write>(&self, circuit: &Circuit, out: W) -> Result<()> {
        if circuit.len() != self.scores.len() {
            return Err(Error::InvalidParameter(format!(
                "profile has {} scores but circuit has {} gates",
                self.scores.len(),
                circuit.len()
            )));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "gate_index",
            "gate_type",
            "axis",
            "qubits",
            "theta",
            "importance",
        ])?;
        for (i, (gate, score)) in circuit.gates().iter().zip(&self.scores).enumerate() {
            let (axis, qubits, theta) = match *gate {
                Gate::Rotation {
                    axis, qubit, theta, ..
                } => (axis.to_string(), qubit.to_string(), format!("{theta:.17e}")),
                Gate::Cnot {
                    control, target, ..
                } => (String::new(), format!("{control};{target}"), String::new()),
            };
            w.write_record([
                i.to_string(),
                gate.kind().to_string(),
                axis,
                qubits,
                theta,
                format!("{score:.17e}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Leave-one-out importance of every gate in one forward sweep.
///
/// With `phi_i` the state just before gate `G_i` and `psi` the final state,
/// the circuit without gate `i` overlaps `psi` by `<phi_i|G_i^dag|phi_i>`,
/// because the gates after `i` cancel in the inner product. So
/// `I_i = 1 - |<phi_i|G_i|phi_i>|^2`, read off the prefix state.
pub fn importance_profile(circuit: &Circuit) -> Result<ImportanceProfile> {
    if circuit.is_empty() {
        return Err(Error::InvalidParameter(
            "importance of an empty circuit".into(),
        ));
    }
    let mut state = StateVector::zero_state(circuit.n_qubits())?;
    let mut scores = Vec::with_capacity(circuit.len());
    for gate in circuit.gates() {
        scores.push((1.0 - state.gate_overlap(gate)).clamp(0.0, 1.0));
        state.apply(gate);
    }
    Ok(ImportanceProfile {
        scores,
        baseline: state,
    })
}

/// Leave-one-out importance by literally re-simulating the circuit once per
/// deleted gate. O(N^2) gate applications; parallel over gates when the
/// `parallel` feature is on. Agrees with [`importance_profile`] to rounding.
pub fn importance_profile_exhaustive(circuit: &Circuit) -> Result<ImportanceProfile> {
    if circuit.is_empty() {
        return Err(Error::InvalidParameter(
            "importance of an empty circuit".into(),
        ));
    }
    let baseline = run(circuit)?;
    let score = |i: usize| -> Result<f64> {
        let reduced = circuit.remove_gates(&[i])?;
        Ok((1.0 - fidelity(&baseline, &run(&reduced)?)?).clamp(0.0, 1.0))
    };
    #[cfg(feature = "parallel")]
    let scores = {
        use rayon::prelude::*;
        (0..circuit.len())
            .into_par_iter()
            .map(score)
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let scores = (0..circuit.len()).map(score).collect::<Result<Vec<_>>>()?;
    Ok(ImportanceProfile { scores, baseline })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionResult {
    pub compressed: Circuit,
    /// Removed gate positions in removal (ascending-importance) order.
    pub removed_indices: Vec<usize>,
    pub fidelity: f64,
    pub kappa_effective: f64,
}

/// `floor(kappa * n_gates)`, rejecting ratios that remove nothing.
pub fn removal_count(n_gates: usize, kappa: f64) -> Result<usize> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "compression ratio must lie in (0, 1), got {kappa}"
        )));
    }
    let k = (kappa * n_gates as f64).floor() as usize;
    if k == 0 {
        return Err(Error::InvalidParameter(format!(
            "compression ratio {kappa} removes no gates from {n_gates}"
        )));
    }
    Ok(k)
}

fn compress(
    circuit: &Circuit,
    profile: &ImportanceProfile,
    removed: Vec<usize>,
) -> Result<CompressionResult> {
    let compressed = circuit.remove_gates(&removed)?;
    let fid = fidelity(profile.baseline(), &run(&compressed)?)?;
    Ok(CompressionResult {
        kappa_effective: removed.len() as f64 / circuit.len() as f64,
        compressed,
        removed_indices: removed,
        fidelity: fid,
    })
}

fn check_profile(circuit: &Circuit, profile: &ImportanceProfile) -> Result<()> {
    if profile.len() != circuit.len() {
        return Err(Error::InvalidParameter(format!(
            "profile has {} scores but circuit has {} gates",
            profile.len(),
            circuit.len()
        )));
    }
    Ok(())
}

/// Causal Pruning: delete the `floor(kappa*N)` least important gates.
pub fn causal_prune(circuit: &Circuit, kappa: f64) -> Result<CompressionResult> {
    removal_count(circuit.len(), kappa)?;
    causal_prune_with(circuit, &importance_profile(circuit)?, kappa)
}

/// [`causal_prune`] with a precomputed profile.
pub fn causal_prune_with(
    circuit: &Circuit,
    profile: &ImportanceProfile,
    kappa: f64,
) -> Result<CompressionResult> {
    check_profile(circuit, profile)?;
    let quota = removal_count(circuit.len(), kappa)?;
    let mut order = profile.ranking();
    order.truncate(quota);
    compress(circuit, profile, order)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrittlenessThresholds {
    /// Rotations strictly below this angle are small-angle gates.
    pub small_angle: f64,
    /// Brittle when the angle standard deviation falls below this.
    pub min_std: f64,
    /// Brittle when the small-angle ratio falls below this.
    pub min_small_ratio: f64,
}

impl BrittlenessThresholds {
    /// Midpoints between the robust and fragile class means observed for
    /// 10, 12 and 14 qubits; other sizes take the nearest tabulated one.
    pub fn for_qubits(n: usize) -> Self {
        let (min_std, min_small_ratio) = match n {
            0..=10 => (0.5255, 0.280),
            11..=12 => (0.515, 0.252),
            _ => (0.489, 0.1985),
        };
        Self {
            small_angle: SMALL_ANGLE_THRESHOLD,
            min_std,
            min_small_ratio,
        }
    }
}

impl Default for BrittlenessThresholds {
    fn default() -> Self {
        Self::for_qubits(10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrittlenessReport {
    pub mean_theta: f64,
    pub std_theta: f64,
    pub small_angle_ratio: f64,
    pub brittle: bool,
}

pub fn risk_assess(
    circuit: &Circuit,
    thresholds: &BrittlenessThresholds,
) -> Result<BrittlenessReport> {
    let s = stats::angle_stats(circuit, thresholds.small_angle)?;
    Ok(BrittlenessReport {
        mean_theta: s.mean_theta,
        std_theta: s.std_theta,
        small_angle_ratio: s.small_angle_ratio,
        brittle: s.std_theta < thresholds.min_std
            || s.small_angle_ratio < thresholds.min_small_ratio,
    })
}

/// Statistically-aware pruning. When the circuit is flagged brittle,
/// small-angle rotations are protected and the quota is filled from the
/// remaining gates in ascending importance; if too few remain, all of them
/// go and `kappa_effective` falls short of `kappa`.
pub fn aware_prune(
    circuit: &Circuit,
    kappa: f64,
    thresholds: &BrittlenessThresholds,
) -> Result<CompressionResult> {
    removal_count(circuit.len(), kappa)?;
    aware_prune_with(circuit, &importance_profile(circuit)?, kappa, thresholds)
}

pub fn aware_prune_with(
    circuit: &Circuit,
    profile: &ImportanceProfile,
    kappa: f64,
    thresholds: &BrittlenessThresholds,
) -> Result<CompressionResult> {
    check_profile(circuit, profile)?;
    let quota = removal_count(circuit.len(), kappa)?;
    if !risk_assess(circuit, thresholds)?.brittle {
        return causal_prune_with(circuit, profile, kappa);
    }
    let gates = circuit.gates();
    let removed: Vec<usize> = profile
        .ranking()
        .into_iter()
        .filter(|&i| !matches!(gates[i].theta(), Some(t) if t < thresholds.small_angle))
        .take(quota)
        .collect();
    compress(circuit, profile, removed)
}
