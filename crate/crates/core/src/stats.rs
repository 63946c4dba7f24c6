//! Descriptive and inferential statistics over angles, importance scores
//! and ensemble fidelities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, RotationAxis};
use crate::error::{Error, Result};

/// Fidelity at or above which a compressed circuit counts as robust.
pub const ROBUST_THRESHOLD: f64 = 0.9;

/// Angles below this are "small-angle" gates.
pub const SMALL_ANGLE_THRESHOLD: f64 = 0.1;

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Unbiased (n - 1) variance; `None` below two samples.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    Some(xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64)
}

pub fn sample_std(xs: &[f64]) -> Option<f64> {
    sample_variance(xs).map(f64::sqrt)
}

fn small_ratio(xs: &[f64], threshold: f64) -> f64 {
    xs.iter().filter(|&&t| t < threshold).count() as f64 / xs.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisStats {
    pub count: usize,
    pub mean: f64,
    /// `None` for a single gate.
    pub std: Option<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleStats {
    pub mean_theta: f64,
    pub std_theta: f64,
    pub small_angle_ratio: f64,
    /// Axes with no gates are omitted.
    pub per_axis: BTreeMap<RotationAxis, AxisStats>,
}

/// Angle statistics over every rotation gate of `circuit`.
pub fn angle_stats(circuit: &Circuit, small_angle_threshold: f64) -> Result<AngleStats> {
    let mut all = Vec::new();
    let mut by_axis: BTreeMap<RotationAxis, Vec<f64>> = BTreeMap::new();
    for g in circuit.gates() {
        if let Gate::Rotation { axis, theta, .. } = *g {
            all.push(theta);
            by_axis.entry(axis).or_default().push(theta);
        }
    }
    if all.len() < 2 {
        return Err(Error::Undefined(format!(
            "angle statistics need at least 2 rotation gates, found {}",
            all.len()
        )));
    }
    let per_axis = by_axis
        .into_iter()
        .map(|(axis, xs)| {
            let s = AxisStats {
                count: xs.len(),
                mean: mean(&xs).unwrap_or_default(),
                std: sample_std(&xs),
                ratio: small_ratio(&xs, small_angle_threshold),
            };
            (axis, s)
        })
        .collect();
    Ok(AngleStats {
        mean_theta: mean(&all).unwrap_or_default(),
        std_theta: sample_std(&all).unwrap_or_default(),
        small_angle_ratio: small_ratio(&all, small_angle_threshold),
        per_axis,
    })
}

fn normalized(scores: &[f64]) -> Result<(f64, impl Iterator<Item = f64> + '_)> {
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) || scores.iter().any(|&s| s < 0.0) {
        return Err(Error::Undefined(
            "importance scores must be non-negative with a positive sum".into(),
        ));
    }
    Ok((total, scores.iter().map(move |s| s / total)))
}

/// `H = -sum p_i ln p_i` over `p_i = I_i / sum I`, with `0 ln 0 = 0`.
pub fn shannon_entropy(scores: &[f64]) -> Result<f64> {
    let (_, ps) = normalized(scores)?;
    Ok(-ps.filter(|&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>())
}

/// Gini coefficient `sum_ij |x_i - x_j| / (2 N sum x)`, evaluated on the
/// sorted scores in O(N log N).
pub fn gini(scores: &[f64]) -> Result<f64> {
    let (total, _) = normalized(scores)?;
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // sum_ij |x_i - x_j| = 2 sum_i (2i - N + 1) x_(i)
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * i as f64 - n + 1.0) * x)
        .sum();
    Ok((weighted / (n * total)).max(0.0))
}

pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Undefined(format!(
            "correlation needs two equal-length samples of size >= 2, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let mx = mean(xs).unwrap_or_default();
    let my = mean(ys).unwrap_or_default();
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined(
            "correlation of a constant sequence".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson r between rotation angle and importance, rotation gates only.
pub fn angle_importance_r(circuit: &Circuit, importance: &[f64]) -> Result<f64> {
    if importance.len() != circuit.len() {
        return Err(Error::InvalidParameter(format!(
            "{} importance scores for {} gates",
            importance.len(),
            circuit.len()
        )));
    }
    let (thetas, scores): (Vec<f64>, Vec<f64>) = circuit
        .gates()
        .iter()
        .zip(importance)
        .filter_map(|(g, &i)| g.theta().map(|t| (t, i)))
        .unzip();
    pearson_r(&thetas, &scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    match (sample_variance(a), sample_variance(b)) {
        (Some(va), Some(vb)) if va > 0.0 && vb > 0.0 => Ok((va, vb)),
        (Some(_), Some(_)) => Err(Error::Undefined("sample with zero variance".into())),
        _ => Err(Error::Undefined(format!(
            "two-sample comparison needs >= 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        ))),
    }
}

/// Welch's unequal-variance two-sample t-test, two-sided.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let (va, vb) = check_samples(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (qa, qb) = (va / na, vb / nb);
    let diff = mean(a).unwrap_or_default() - mean(b).unwrap_or_default();
    let t = diff / (qa + qb).sqrt();
    let df = (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    Ok(TestResult {
        statistic: t,
        degrees_of_freedom: df,
        p_value: student_t_two_sided_p(t, df),
    })
}

/// Cohen's d with the pooled (n - 1) standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    let (va, vb) = match (sample_variance(a), sample_variance(b)) {
        (Some(va), Some(vb)) => (va, vb),
        _ => {
            return Err(Error::Undefined(
                "effect size needs >= 2 values per sample".into(),
            ))
        }
    };
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0)).sqrt();
    if pooled == 0.0 {
        return Err(Error::Undefined("zero pooled standard deviation".into()));
    }
    Ok((mean(a).unwrap_or_default() - mean(b).unwrap_or_default()) / pooled)
}

/// Two-sided tail probability of Student's t: `I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() || df.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Lanczos approximation (g = 7, 9 terms) of `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=1000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Robust,
    Fragile,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Robust => "robust",
            ClassLabel::Fragile => "fragile",
        }
    }
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Robust iff `fidelity >= threshold` (inclusive).
pub fn classify(fidelity: f64, threshold: f64) -> ClassLabel {
    if fidelity >= threshold {
        ClassLabel::Robust
    } else {
        ClassLabel::Fragile
    }
}

/// Extremal gap `min(robust) - max(fragile)`; negative when classes overlap.
pub fn fidelity_gap(robust: &[f64], fragile: &[f64]) -> Result<f64> {
    let lo = robust.iter().copied().reduce(f64::min);
    let hi = fragile.iter().copied().reduce(f64::max);
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok(lo - hi),
        _ => Err(Error::Undefined(
            "fidelity gap needs both classes non-empty".into(),
        )),
    }
}
