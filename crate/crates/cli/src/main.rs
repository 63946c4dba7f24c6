mod manifest;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qbrittle::protocol::{self, EnsembleConfig, EnsembleReport, PruningMode};
use qbrittle::report::{self, class_histogram};
use qbrittle::stats::{self, ClassLabel, ROBUST_THRESHOLD, SMALL_ANGLE_THRESHOLD};
use qbrittle::{pruning, simulator, BrittlenessThresholds, Circuit, Error, GenerationParams};

use manifest::{sidecar, RunManifest};

/// Circuit stability under leave-one-out importance pruning.
#[derive(Debug, Parser)]
#[command(name = "qbrittle", version)]
struct Cli {
    /// Worker threads for ensemble and sweep runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one structurally-uniform circuit as JSON.
    Generate(GenerateArgs),
    /// Compress a circuit by deleting its least important gates.
    Prune(PruneArgs),
    /// Run a full ensemble and write report, records and histograms.
    Ensemble(EnsembleArgs),
    /// Sweep the compression ratio to find the clearest robust/fragile split.
    Sweep(SweepArgs),
    /// Re-render the class tables from an existing report JSON.
    Report(ReportArgs),
}

/// Circuit shape. Alpha and rho default to the preset for 10, 12 or 14 qubits.
#[derive(Debug, Clone, Args)]
struct ShapeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
}

impl ShapeArgs {
    fn resolve(&self) -> Result<(usize, f64, f64), Error> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "qubit count must be even and at least 4, got {}",
                self.n
            )));
        }
        let preset = EnsembleConfig::preset(self.n);
        let pick = |given: Option<f64>, from: fn(&EnsembleConfig) -> f64, name: &str| {
            given.or(preset.as_ref().map(from)).ok_or_else(|| {
                Error::InvalidParameter(format!("--{name} is required for n = {}", self.n))
            })
        };
        let alpha = pick(self.alpha, |c| c.alpha, "alpha")?;
        let rho = pick(self.rho, |c| c.rho, "rho")?;
        Ok((self.n, alpha, rho))
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Circuit JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write OpenQASM 2.0.
    #[arg(long)]
    qasm: Option<PathBuf>,
    /// Also dump the final statevector as `index,re,im` CSV.
    #[arg(long)]
    state_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    /// Rotations below this angle (radians) are small-angle gates.
    #[arg(long, default_value_t = SMALL_ANGLE_THRESHOLD)]
    small_angle: f64,
    /// Brittleness cut on the angle standard deviation.
    #[arg(long)]
    min_std: Option<f64>,
    /// Brittleness cut on the small-angle ratio.
    #[arg(long)]
    min_ratio: Option<f64>,
}

impl ThresholdArgs {
    fn resolve(&self, n: usize) -> BrittlenessThresholds {
        let base = BrittlenessThresholds::for_qubits(n);
        BrittlenessThresholds {
            small_angle: self.small_angle,
            min_std: self.min_std.unwrap_or(base.min_std),
            min_small_ratio: self.min_ratio.unwrap_or(base.min_small_ratio),
        }
    }
}

#[derive(Debug, Args)]
struct PruneArgs {
    /// Circuit JSON to compress.
    #[arg(long = "in")]
    input: PathBuf,
    /// Compression ratio; defaults to the preset for the circuit's size.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value = "causal")]
    mode: PruningMode,
    /// Compressed circuit JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-gate importance CSV path.
    #[arg(long)]
    importance_csv: Option<PathBuf>,
    #[arg(long, default_value_t = ROBUST_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Compression ratio; defaults to the preset for 10, 12 or 14 qubits.
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long, default_value = "causal")]
    mode: PruningMode,
    #[arg(long, default_value_t = ROBUST_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = SMALL_ANGLE_THRESHOLD)]
    small_angle: f64,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Skip the SVG renderings of the histograms.
    #[arg(long)]
    no_svg: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long, default_value_t = protocol::DEFAULT_PROBE_COUNT)]
    probes: usize,
    #[arg(long, default_value = "causal")]
    mode: PruningMode,
    #[arg(long, default_value_t = ROBUST_THRESHOLD)]
    threshold: f64,
    /// Explicit comma-separated grid; overrides start/stop/step.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    grid_start: f64,
    /// Inclusive upper bound.
    #[arg(long, default_value_t = 0.40)]
    grid_stop: f64,
    #[arg(long, default_value_t = 0.03)]
    grid_step: f64,
    /// Sweep table CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Report JSON written by `ensemble`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Also re-emit the per-circuit CSV.
    #[arg(long)]
    records_csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Prune(a) => prune(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => render_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 invalid input, 3 no transition, 4 resource cap, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::NoTransition) => 3,
        Some(Error::ResourceLimit { .. }) => 4,
        Some(Error::Io(_) | Error::Csv(_)) | None => 1,
        Some(_) => 2,
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let (n, alpha, rho) = args.shape.resolve()?;
    let params = GenerationParams::new(n, alpha, rho, args.seed);
    let circuit = qbrittle::generate_uniform(&params)?;
    let json = circuit.to_json() + "\n";

    let mut manifest = RunManifest::new("generate", params)?;
    if let Some(path) = &args.qasm {
        write_file(path, circuit.to_qasm())?;
        manifest.output(path);
    }
    if let Some(path) = &args.state_csv {
        let state = simulator::run(&circuit)?;
        let mut w = create(path)?;
        state.write_csv(&mut w)?;
        w.flush()?;
        manifest.output(path);
    }
    match &args.out {
        Some(path) => {
            write_file(path, json)?;
            manifest.output(path);
            manifest.write(&sidecar(path))?;
            eprintln!(
                "wrote {} ({} gates, depth {})",
                path.display(),
                circuit.len(),
                circuit.depth()
            );
        }
        None => io::stdout().write_all(json.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct PruneConfig<'a> {
    kappa: f64,
    mode: PruningMode,
    threshold: f64,
    thresholds: BrittlenessThresholds,
    circuit_params: Option<&'a GenerationParams>,
}

fn prune(args: PruneArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let circuit = Circuit::from_json(&text)?;
    let kappa = match args.kappa {
        Some(k) => k,
        None => circuit
            .params()
            .and_then(|p| EnsembleConfig::preset(p.n))
            .map(|c| c.kappa)
            .ok_or_else(|| {
                Error::InvalidParameter("--kappa is required for this circuit".into())
            })?,
    };
    pruning::removal_count(circuit.len(), kappa)?;
    let thresholds = args.thresholds.resolve(circuit.n_qubits());
    let profile = pruning::importance_profile(&circuit)?;
    let result = match args.mode {
        PruningMode::Causal => pruning::causal_prune_with(&circuit, &profile, kappa)?,
        PruningMode::Aware => pruning::aware_prune_with(&circuit, &profile, kappa, &thresholds)?,
    };

    let mut manifest = RunManifest::new(
        "prune",
        PruneConfig {
            kappa,
            mode: args.mode,
            threshold: args.threshold,
            thresholds,
            circuit_params: circuit.params(),
        },
    )?
    .input(&args.input);
    if let Some(path) = &args.importance_csv {
        let mut w = create(path)?;
        profile.write_csv(&circuit, &mut w)?;
        w.flush()?;
        manifest.output(path);
    }
    if let Some(path) = &args.out {
        write_file(path, result.compressed.to_json() + "\n")?;
        manifest.output(path);
        manifest.write(&sidecar(path))?;
    }
    println!(
        "removed {} of {} gates (kappa_effective={:.4}), fidelity={:.6}, label={}",
        result.removed_indices.len(),
        circuit.len(),
        result.kappa_effective,
        result.fidelity,
        stats::classify(result.fidelity, args.threshold)
    );
    Ok(())
}

fn ensemble_config(
    shape: &ShapeArgs,
    kappa: Option<f64>,
    base_seed: u64,
    mode: PruningMode,
    threshold: f64,
) -> Result<EnsembleConfig> {
    let (n, alpha, rho) = shape.resolve()?;
    let kappa = kappa
        .or(EnsembleConfig::preset(n).map(|c| c.kappa))
        .ok_or_else(|| Error::InvalidParameter(format!("--kappa is required for n = {n}")))?;
    Ok(EnsembleConfig {
        base_seed,
        pruning_mode: mode,
        classify_threshold: threshold,
        ..EnsembleConfig::new(n, alpha, rho, kappa)
    })
}

fn ensemble(args: EnsembleArgs) -> Result<()> {
    let config = EnsembleConfig {
        circuit_count: args.count,
        small_angle_threshold: args.small_angle,
        ..ensemble_config(
            &args.shape,
            args.kappa,
            args.base_seed,
            args.mode,
            args.threshold,
        )?
    };
    let report = protocol::run_ensemble(&config)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let dir = &args.out_dir;
    let mut manifest = RunManifest::new("ensemble", &config)?;

    let path = dir.join("report.json");
    write_file(&path, report.to_json() + "\n")?;
    manifest.output(&path);

    let path = dir.join("records.csv");
    let mut w = create(&path)?;
    report::write_records_csv(&report.records, &mut w)?;
    w.flush()?;
    manifest.output(&path);

    let fid: Vec<(f64, ClassLabel)> = report
        .records
        .iter()
        .map(|r| (r.fidelity, r.label))
        .collect();
    let corr: Vec<(f64, ClassLabel)> = report
        .records
        .iter()
        .filter_map(|r| r.angle_importance_r.map(|x| (x, r.label)))
        .collect();
    for (stem, values, axis) in [
        ("fidelity_hist", &fid, "fidelity after compression"),
        ("r_hist", &corr, "angle-importance correlation r"),
    ] {
        let bins = class_histogram(values, args.bins);
        let path = dir.join(format!("{stem}.csv"));
        let mut w = create(&path)?;
        report::write_histogram_csv(&bins, &mut w)?;
        w.flush()?;
        manifest.output(&path);
        if !args.no_svg {
            let title = format!(
                "n={} kappa={} ({} circuits)",
                config.n,
                config.kappa,
                report.records.len()
            );
            let path = dir.join(format!("{stem}.svg"));
            write_file(&path, report::histogram_svg(&bins, &title, axis))?;
            manifest.output(&path);
        }
    }
    manifest.write(&dir.join("manifest.json"))?;

    print!("{}", protocol::compare_classes(&report));
    let cs = report.class_summary;
    if cs.robust.count == 0 || cs.fragile.count == 0 {
        eprintln!(
            "warning: only one class present ({} robust, {} fragile); gap and effect size are null",
            cs.robust.count, cs.fragile.count
        );
    }
    Ok(())
}

fn sweep_grid(args: &SweepArgs) -> Result<Vec<f64>> {
    if let Some(grid) = &args.grid {
        return Ok(grid.clone());
    }
    if !(args.grid_step > 0.0) {
        return Err(anyhow!(Error::InvalidParameter(
            "--grid-step must be positive".into()
        )));
    }
    let steps = ((args.grid_stop - args.grid_start) / args.grid_step + 1e-9).floor();
    if steps < 0.0 {
        return Err(anyhow!(Error::InvalidParameter(
            "--grid-stop is below --grid-start".into()
        )));
    }
    Ok((0..=steps as usize)
        .map(|i| {
            let k = args.grid_start + i as f64 * args.grid_step;
            (k * 1e9).round() / 1e9
        })
        .collect())
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    ensemble: &'a EnsembleConfig,
    grid: &'a [f64],
    probes: usize,
}

fn sweep(args: SweepArgs) -> Result<()> {
    let config = ensemble_config(
        &args.shape,
        Some(0.1),
        args.base_seed,
        args.mode,
        args.threshold,
    )?;
    let grid = sweep_grid(&args)?;
    let points = protocol::sweep_grid(&config, &grid, args.probes)?;

    if let Some(path) = &args.out {
        let mut w = create(path)?;
        report::write_sweep_csv(&points, &mut w)?;
        w.flush()?;
        let mut manifest = RunManifest::new(
            "sweep",
            SweepConfig {
                ensemble: &config,
                grid: &grid,
                probes: args.probes,
            },
        )?;
        manifest.output(path);
        manifest.write(&sidecar(path))?;
    }
    for p in &points {
        let gap = p
            .gap
            .map_or_else(|| "none".to_string(), |g| format!("{g:.4}"));
        println!(
            "kappa={:.2} robust_fraction={:.3} gap={gap}",
            p.kappa, p.robust_fraction
        );
    }
    let selected = protocol::select_kappa(&points)?;
    println!("selected_kappa={selected}");
    Ok(())
}

fn render_report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let report = EnsembleReport::from_json(&text)?;
    if let Some(path) = &args.records_csv {
        let mut w = create(path)?;
        report::write_records_csv(&report.records, &mut w)?;
        w.flush()?;
    }
    print!("{}", protocol::compare_classes(&report));
    Ok(())
}
