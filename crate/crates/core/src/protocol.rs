//! Ensemble experiments: per-circuit compression records, robust/fragile
//! class comparisons, and the compression-ratio sweep.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{generate_uniform, Circuit, GenerationParams, RotationAxis};
use crate::error::{Error, Result};
use crate::pruning::{self, BrittlenessThresholds};
use crate::stats::{self, AngleStats, ClassLabel, ROBUST_THRESHOLD, SMALL_ANGLE_THRESHOLD};

/// Offset separating sweep probe seeds from ensemble seeds.
pub const PROBE_SEED_OFFSET: u64 = 10_000;
/// Seeds reserved per sweep grid point.
pub const PROBE_SEED_STRIDE: u64 = 100;
pub const DEFAULT_PROBE_COUNT: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruningMode {
    #[default]
    Causal,
    Aware,
}

impl std::str::FromStr for PruningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "causal" => Ok(PruningMode::Causal),
            "aware" => Ok(PruningMode::Aware),
            other => Err(Error::InvalidParameter(format!(
                "unknown pruning mode `{other}` (expected causal or aware)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub alpha: f64,
    pub rho: f64,
    pub kappa: f64,
    pub circuit_count: usize,
    pub base_seed: u64,
    pub classify_threshold: f64,
    pub small_angle_threshold: f64,
    pub pruning_mode: PruningMode,
}

impl EnsembleConfig {
    pub fn new(n: usize, alpha: f64, rho: f64, kappa: f64) -> Self {
        Self {
            n,
            alpha,
            rho,
            kappa,
            circuit_count: 100,
            base_seed: 0,
            classify_threshold: ROBUST_THRESHOLD,
            small_angle_threshold: SMALL_ANGLE_THRESHOLD,
            pruning_mode: PruningMode::Causal,
        }
    }

    /// The three ensembles of the reference study: 10, 12 and 14 qubits.
    pub fn preset(n: usize) -> Option<Self> {
        match n {
            10 => Some(Self::new(10, 2.3, 0.28, 0.11)),
            12 => Some(Self::new(12, 2.5, 0.25, 0.10)),
            14 => Some(Self::new(14, 3.0, 0.2, 0.08)),
            _ => None,
        }
    }

    pub fn params(&self, seed: u64) -> GenerationParams {
        GenerationParams::new(self.n, self.alpha, self.rho, seed)
    }

    pub fn seed(&self, k: usize) -> u64 {
        self.base_seed.wrapping_add(k as u64)
    }

    pub fn thresholds(&self) -> BrittlenessThresholds {
        BrittlenessThresholds {
            small_angle: self.small_angle_threshold,
            ..BrittlenessThresholds::for_qubits(self.n)
        }
    }

    fn validate_circuit_params(&self) -> Result<usize> {
        let p = self.params(self.base_seed);
        p.validate()?;
        if !(0.0..=1.0).contains(&self.classify_threshold) {
            return Err(Error::InvalidParameter(format!(
                "classification threshold must lie in [0, 1], got {}",
                self.classify_threshold
            )));
        }
        Ok(p.gate_count())
    }

    pub fn validate(&self) -> Result<()> {
        let gates = self.validate_circuit_params()?;
        if self.circuit_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "an ensemble needs at least 2 circuits, got {}",
                self.circuit_count
            )));
        }
        pruning::removal_count(gates, self.kappa)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub seed: u64,
    pub gate_count: usize,
    pub depth: usize,
    pub removed: usize,
    pub fidelity: f64,
    pub label: ClassLabel,
    pub angle_stats: AngleStats,
    /// Absent when the angles or scores are constant.
    pub angle_importance_r: Option<f64>,
    pub importance_entropy: Option<f64>,
    pub importance_gini: Option<f64>,
}

/// Generates, profiles, compresses and classifies one circuit.
pub fn analyze_circuit(config: &EnsembleConfig, seed: u64) -> Result<CircuitRecord> {
    let circuit = generate_uniform(&config.params(seed))?;
    analyze(config, seed, &circuit)
}

fn analyze(config: &EnsembleConfig, seed: u64, circuit: &Circuit) -> Result<CircuitRecord> {
    let profile = pruning::importance_profile(circuit)?;
    let result = match config.pruning_mode {
        PruningMode::Causal => pruning::causal_prune_with(circuit, &profile, config.kappa)?,
        PruningMode::Aware => {
            pruning::aware_prune_with(circuit, &profile, config.kappa, &config.thresholds())?
        }
    };
    Ok(CircuitRecord {
        seed,
        gate_count: circuit.len(),
        depth: circuit.depth(),
        removed: result.removed_indices.len(),
        fidelity: result.fidelity,
        label: stats::classify(result.fidelity, config.classify_threshold),
        angle_stats: stats::angle_stats(circuit, config.small_angle_threshold)?,
        angle_importance_r: stats::angle_importance_r(circuit, profile.scores()).ok(),
        importance_entropy: profile.entropy().ok(),
        importance_gini: profile.gini().ok(),
    })
}

fn analyze_seeds(config: &EnsembleConfig, seeds: &[u64]) -> Result<Vec<CircuitRecord>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .map(|&s| analyze_circuit(config, s))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.iter().map(|&s| analyze_circuit(config, s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub count: usize,
    pub fraction: f64,
    pub mean_fidelity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub robust: ClassStats,
    pub fragile: ClassStats,
}

/// Class means of one per-circuit metric with a Welch p-value. Fields are
/// absent when a class is empty (means) or too small/degenerate (p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassComparison {
    pub robust_mean: Option<f64>,
    pub fragile_mean: Option<f64>,
    pub p_value: Option<f64>,
}

impl ClassComparison {
    pub fn of(robust: &[f64], fragile: &[f64]) -> Self {
        Self {
            robust_mean: stats::mean(robust),
            fragile_mean: stats::mean(fragile),
            p_value: stats::welch_t_test(robust, fragile).ok().map(|t| t.p_value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleFingerprint {
    pub mean_theta: ClassComparison,
    pub std_theta: ClassComparison,
    pub small_angle_ratio: ClassComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub config: EnsembleConfig,
    pub records: Vec<CircuitRecord>,
    pub class_summary: ClassSummary,
    pub fidelity_gap: Option<f64>,
    pub cohens_d_fidelity: Option<f64>,
    pub angle_fingerprint: AngleFingerprint,
    /// Per-circuit mean angle of each rotation axis, compared by class.
    pub per_axis: BTreeMap<RotationAxis, ClassComparison>,
    pub correlation_summary: ClassComparison,
    pub importance_entropy: ClassComparison,
    pub importance_gini: ClassComparison,
}

impl EnsembleReport {
    pub fn class_records(&self, label: ClassLabel) -> impl Iterator<Item = &CircuitRecord> {
        self.records.iter().filter(move |r| r.label == label)
    }

    pub fn fidelities(&self, label: ClassLabel) -> Vec<f64> {
        self.class_records(label).map(|r| r.fidelity).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Runs the full ensemble: circuit `k` uses seed `base_seed + k`.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleReport> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.circuit_count).map(|k| config.seed(k)).collect();
    let records = analyze_seeds(config, &seeds)?;
    Ok(aggregate(config.clone(), records))
}

/// Class-level statistics over an ordered record list.
pub fn aggregate(config: EnsembleConfig, records: Vec<CircuitRecord>) -> EnsembleReport {
    let (robust, fragile): (Vec<&CircuitRecord>, Vec<&CircuitRecord>) =
        records.iter().partition(|r| r.label == ClassLabel::Robust);
    let total = records.len().max(1) as f64;
    let metric = |rs: &[&CircuitRecord], f: &dyn Fn(&CircuitRecord) -> Option<f64>| -> Vec<f64> {
        rs.iter().filter_map(|r| f(r)).collect()
    };
    let compare = |f: &dyn Fn(&CircuitRecord) -> Option<f64>| {
        ClassComparison::of(&metric(&robust, f), &metric(&fragile, f))
    };

    let rf = metric(&robust, &|r| Some(r.fidelity));
    let ff = metric(&fragile, &|r| Some(r.fidelity));
    let class_stats = |fids: &[f64]| ClassStats {
        count: fids.len(),
        fraction: fids.len() as f64 / total,
        mean_fidelity: stats::mean(fids),
    };

    let per_axis = RotationAxis::ALL
        .iter()
        .map(|&axis| {
            let cmp = compare(&|r| r.angle_stats.per_axis.get(&axis).map(|a| a.mean));
            (axis, cmp)
        })
        .collect();

    EnsembleReport {
        class_summary: ClassSummary {
            robust: class_stats(&rf),
            fragile: class_stats(&ff),
        },
        fidelity_gap: stats::fidelity_gap(&rf, &ff).ok(),
        cohens_d_fidelity: stats::cohens_d(&rf, &ff).ok(),
        angle_fingerprint: AngleFingerprint {
            mean_theta: compare(&|r| Some(r.angle_stats.mean_theta)),
            std_theta: compare(&|r| Some(r.angle_stats.std_theta)),
            small_angle_ratio: compare(&|r| Some(r.angle_stats.small_angle_ratio)),
        },
        per_axis,
        correlation_summary: compare(&|r| r.angle_importance_r),
        importance_entropy: compare(&|r| r.importance_entropy),
        importance_gini: compare(&|r| r.importance_gini),
        config,
        records,
    }
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.digits$}"))
}

fn p_cell(p: Option<f64>) -> String {
    match p {
        Some(p) if p < 0.001 => "<0.001".to_string(),
        Some(p) => format!("{p:.3}"),
        None => "n/a (class too small)".to_string(),
    }
}

/// Renders the class-comparison tables: class overview, angle fingerprint,
/// per-axis p-values, and angle-importance correlation.
pub fn compare_classes(report: &EnsembleReport) -> String {
    let mut out = String::new();
    let cs = &report.class_summary;
    let c = &report.config;
    let _ = writeln!(
        out,
        "ensemble n={} alpha={} rho={} kappa={} circuits={} mode={:?}",
        c.n,
        c.alpha,
        c.rho,
        c.kappa,
        report.records.len(),
        c.pruning_mode
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<22}{:>12}{:>12}",
        "class overview", "robust", "fragile"
    );
    let _ = writeln!(
        out,
        "{:<22}{:>12}{:>12}",
        "circuits", cs.robust.count, cs.fragile.count
    );
    let _ = writeln!(
        out,
        "{:<22}{:>11.1}%{:>11.1}%",
        "fraction",
        100.0 * cs.robust.fraction,
        100.0 * cs.fragile.fraction
    );
    let _ = writeln!(
        out,
        "{:<22}{:>12}{:>12}",
        "mean fidelity",
        cell(cs.robust.mean_fidelity, 4),
        cell(cs.fragile.mean_fidelity, 4)
    );
    let _ = writeln!(out, "fidelity gap: {}", cell(report.fidelity_gap, 4));
    let _ = writeln!(out, "cohen's d:    {}", cell(report.cohens_d_fidelity, 2));

    let row = |out: &mut String, name: &str, cmp: &ClassComparison| {
        let _ = writeln!(
            out,
            "{:<22}{:>12}{:>12}  {}",
            name,
            cell(cmp.robust_mean, 3),
            cell(cmp.fragile_mean, 3),
            p_cell(cmp.p_value)
        );
    };

    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<22}{:>12}{:>12}  p-value",
        "angle fingerprint", "robust", "fragile"
    );
    let fp = &report.angle_fingerprint;
    row(&mut out, "mean angle", &fp.mean_theta);
    row(&mut out, "angle std. dev.", &fp.std_theta);
    row(&mut out, "small angle ratio", &fp.small_angle_ratio);
    row(&mut out, "importance entropy", &report.importance_entropy);
    row(&mut out, "importance gini", &report.importance_gini);

    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<22}{:>12}{:>12}  p-value",
        "mean angle by type", "robust", "fragile"
    );
    for (axis, cmp) in &report.per_axis {
        row(&mut out, &format!("r{axis}"), cmp);
    }

    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<22}{:>12}{:>12}  p-value",
        "angle-importance r", "robust", "fragile"
    );
    row(&mut out, "mean r", &report.correlation_summary);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub kappa: f64,
    pub gap: Option<f64>,
    pub robust_fraction: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<SweepPoint>,
    pub selected_kappa: f64,
}

/// `0.05, 0.08, ..., 0.38`.
pub fn default_grid() -> Vec<f64> {
    (0..12).map(|i| (5 + 3 * i) as f64 / 100.0).collect()
}

/// Probe seed for circuit `k` at grid point `grid_index`.
pub fn probe_seed(base_seed: u64, grid_index: usize, k: usize) -> u64 {
    base_seed
        .wrapping_add(PROBE_SEED_OFFSET)
        .wrapping_add(grid_index as u64 * PROBE_SEED_STRIDE)
        .wrapping_add(k as u64)
}

/// Evaluates every grid point on its own probe ensemble. `config.kappa` and
/// `config.circuit_count` are ignored.
pub fn sweep_grid(
    config: &EnsembleConfig,
    grid: &[f64],
    probe_count: usize,
) -> Result<Vec<SweepPoint>> {
    let gates = config.validate_circuit_params()?;
    if probe_count == 0 {
        return Err(Error::InvalidParameter(
            "sweep needs at least one probe circuit".into(),
        ));
    }
    for &kappa in grid {
        pruning::removal_count(gates, kappa)?;
    }
    grid.iter()
        .enumerate()
        .map(|(gi, &kappa)| {
            let cfg = EnsembleConfig {
                kappa,
                ..config.clone()
            };
            let seeds: Vec<u64> = (0..probe_count)
                .map(|k| probe_seed(config.base_seed, gi, k))
                .collect();
            let records = analyze_seeds(&cfg, &seeds)?;
            let (rf, ff): (Vec<f64>, Vec<f64>) = {
                let mut rf = Vec::new();
                let mut ff = Vec::new();
                for r in &records {
                    match r.label {
                        ClassLabel::Robust => rf.push(r.fidelity),
                        ClassLabel::Fragile => ff.push(r.fidelity),
                    }
                }
                (rf, ff)
            };
            let gap = stats::fidelity_gap(&rf, &ff).ok();
            Ok(SweepPoint {
                kappa,
                gap,
                robust_fraction: rf.len() as f64 / records.len() as f64,
                valid: gap.is_some(),
            })
        })
        .collect()
}

/// The valid grid point with the largest gap; ties go to the smaller kappa.
pub fn select_kappa(points: &[SweepPoint]) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for p in points {
        if let (true, Some(gap)) = (p.valid, p.gap) {
            let better = match best {
                None => true,
                Some((bk, bg)) => gap > bg || (gap == bg && p.kappa < bk),
            };
            if better {
                best = Some((p.kappa, gap));
            }
        }
    }
    best.map(|(k, _)| k).ok_or(Error::NoTransition)
}

pub fn kappa_sweep(
    config: &EnsembleConfig,
    grid: &[f64],
    probe_count: usize,
) -> Result<SweepResult> {
    let points = sweep_grid(config, grid, probe_count)?;
    let selected_kappa = select_kappa(&points)?;
    Ok(SweepResult {
        grid: points,
        selected_kappa,
    })
}
