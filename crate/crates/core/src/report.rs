//! Flat-file outputs: per-circuit CSV rows, class histograms and a minimal
//! SVG bar chart of the same bins.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::protocol::{CircuitRecord, SweepPoint};
use crate::stats::ClassLabel;

pub const RECORD_COLUMNS: [&str; 11] = [
    "seed",
    "gate_count",
    "depth",
    "fidelity",
    "label",
    "mean_theta",
    "std_theta",
    "small_angle_ratio",
    "r_angle_importance",
    "entropy",
    "gini",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per circuit; absent statistics are empty cells.
pub fn write_records_csv<W: Write>(records: &[CircuitRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.gate_count.to_string(),
            r.depth.to_string(),
            r.fidelity.to_string(),
            r.label.to_string(),
            r.angle_stats.mean_theta.to_string(),
            r.angle_stats.std_theta.to_string(),
            r.angle_stats.small_angle_ratio.to_string(),
            opt(r.angle_importance_r),
            opt(r.importance_entropy),
            opt(r.importance_gini),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kappa", "gap", "robust_fraction", "valid"])?;
    for p in points {
        w.write_record([
            p.kappa.to_string(),
            opt(p.gap),
            p.robust_fraction.to_string(),
            p.valid.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub robust_count: usize,
    pub fragile_count: usize,
}

/// Equal-width bins over the data range; the top edge is inclusive.
/// Returns no bins for empty input.
pub fn class_histogram(values: &[(f64, ClassLabel)], bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let Some(lo) = values.iter().map(|v| v.0).reduce(f64::min) else {
        return Vec::new();
    };
    let hi = values.iter().map(|v| v.0).fold(lo, f64::max);
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            bin_lo: lo + i as f64 * width,
            bin_hi: if i + 1 == bins && hi > lo {
                hi
            } else {
                lo + (i + 1) as f64 * width
            },
            robust_count: 0,
            fragile_count: 0,
        })
        .collect();
    for &(x, label) in values {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        match label {
            ClassLabel::Robust => out[i].robust_count += 1,
            ClassLabel::Fragile => out[i].fragile_count += 1,
        }
    }
    out
}

pub fn write_histogram_csv<W: Write>(bins: &[HistogramBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for b in bins {
        w.serialize(b)?;
    }
    if bins.is_empty() {
        w.write_record(["bin_lo", "bin_hi", "robust_count", "fragile_count"])?;
    }
    w.flush()?;
    Ok(())
}

/// Side-by-side robust (blue) and fragile (red) bars with axis labels.
pub fn histogram_svg(bins: &[HistogramBin], title: &str, x_label: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const M: f64 = 48.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let plot_w = W - 2.0 * M;
    let plot_h = H - 2.0 * M;
    let _ = writeln!(
        s,
        r#"<path d="M{M} {M} V{y} H{x}" stroke="black" fill="none"/>"#,
        y = H - M,
        x = W - M
    );
    let peak = bins
        .iter()
        .map(|b| b.robust_count.max(b.fragile_count))
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let slot = plot_w / bins.len().max(1) as f64;
    for (i, b) in bins.iter().enumerate() {
        let x0 = M + i as f64 * slot;
        for (j, (count, color)) in [(b.robust_count, "#1f77b4"), (b.fragile_count, "#d62728")]
            .iter()
            .enumerate()
        {
            if *count == 0 {
                continue;
            }
            let h = plot_h * *count as f64 / peak;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.8"/>"#,
                x0 + j as f64 * slot / 2.0,
                H - M - h,
                slot / 2.0,
                h
            );
        }
    }
    if let (Some(first), Some(last)) = (bins.first(), bins.last()) {
        let _ = writeln!(
            s,
            r#"<text x="{M}" y="{}" text-anchor="start">{:.4}</text>"#,
            H - M + 16.0,
            first.bin_lo
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
            W - M,
            H - M + 16.0,
            last.bin_hi
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{M}" text-anchor="end">{}</text>"#,
        M - 6.0,
        peak as usize
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">circuits</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="30" width="10" height="10" fill="#1f77b4"/><text x="{}" y="39">robust</text>"##,
        W - 150.0,
        W - 136.0
    );
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="30" width="10" height="10" fill="#d62728"/><text x="{}" y="39">fragile</text>"##,
        W - 80.0,
        W - 66.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
