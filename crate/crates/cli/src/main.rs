//! Command-line front end for the stabsim experiments.
//!
//! Every experiment takes a 64-bit seed and writes two artifacts next
//! to each other under the `--output` base path: `<base>.json` (the
//! resolved configuration) and `<base>.csv` (the data). Runs with the
//! same seed and configuration are byte-identical regardless of the
//! worker count.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 runtime failure.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{pick, require, runtime, validation, CliError, FileConfig};
use num_complex::Complex64;
use output::{write_csv, write_header, write_text, RunHeader};
use serde::Serialize;
use std::path::PathBuf;

use stabsim::budget::{failure_budget, optimal_nc, required_ps, BudgetParams, ExponentForm};
use stabsim::codes::{repetition_code, surface_code, CodeKind, CodeLayout};
use stabsim::coherent::{
    closed_form_check, precision_experiment, silent_drift_experiment, AngleMode, MeasureMode,
    NoiseConfig,
};
use stabsim::frame::{
    run_shots, silent_failure_experiment, threshold_scan, RunConfig, ScanRow, SilentParams,
};

#[derive(Parser)]
#[command(
    name = "stabsim",
    version,
    about = "Stabilizer-code QEC simulation toolkit",
    propagate_version = true
)]
struct Cli {
    /// TOML config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for all randomness [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact base path: writes OUTPUT.csv and OUTPUT.json
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a code layout: coordinates, stabilizers, logicals
    Describe(DescribeArgs),
    /// Compare simulated one-round amplitudes with the closed form
    Eq4Check(Eq4Args),
    /// Coherent precision-scaling experiment
    Precision(PrecisionArgs),
    /// Coherent drift of one silenced stabilizer vs a control run
    SilentDrift(SilentDriftArgs),
    /// Discrete-model Monte Carlo at one parameter point
    Montecarlo(MontecarloArgs),
    /// Logical-failure scan over code sizes and error rates
    Threshold(ThresholdArgs),
    /// Discrete-model comparison with silent-failure injection on/off
    SilentMc(SilentMcArgs),
    /// Global failure-budget evaluation and inversion
    Budget(BudgetArgs),
}

#[derive(Args)]
struct DescribeArgs {
    /// Code family: repetition | surface [default: repetition]
    #[arg(long)]
    code: Option<String>,
    /// N_c for repetition, odd distance d for surface [default: 3]
    #[arg(long)]
    size: Option<usize>,
}

#[derive(Args)]
struct Eq4Args {
    /// Repetition-code size [default: 3]
    #[arg(long)]
    size: Option<usize>,
    /// Angle scale: rotation angles are drawn from U(−eta, eta) [default: 0.1]
    #[arg(long)]
    eta: Option<f64>,
    /// Random (alpha, beta, angles) draws [default: 100]
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct PrecisionArgs {
    /// Code family: repetition | surface [default: repetition]
    #[arg(long)]
    code: Option<String>,
    /// Code size [default: 3]
    #[arg(long)]
    size: Option<usize>,
    /// Precision angle in radians [default: 0.1]
    #[arg(long)]
    eta: Option<f64>,
    /// Angle distribution: fixed | uniform [default: fixed]
    #[arg(long)]
    angle_mode: Option<String>,
    /// QEC cycles per shot [default: 1]
    #[arg(long)]
    cycles: Option<u32>,
    /// Monte Carlo shots [default: 10000]
    #[arg(long)]
    shots: Option<u64>,
    /// Real amplitude of the logical zero [default: 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Real amplitude of the logical one [default: 0]
    #[arg(long)]
    beta: Option<f64>,
    /// Measurement: ideal | circuit [default: ideal]
    #[arg(long)]
    measure_mode: Option<String>,
    /// Rotate the ancilla between circuit-mode gates
    #[arg(long)]
    ancilla_noise: bool,
}

#[derive(Args)]
struct SilentDriftArgs {
    /// Code family: repetition | surface [default: repetition]
    #[arg(long)]
    code: Option<String>,
    /// Code size [default: 5]
    #[arg(long)]
    size: Option<usize>,
    /// Precision angle in radians [default: 0.05]
    #[arg(long)]
    eta: Option<f64>,
    /// Stabilizer to silence [default: the middle one]
    #[arg(long)]
    skip_stab: Option<usize>,
    /// Cycles the stabilizer stays silent [default: 50]
    #[arg(long)]
    skip_cycles: Option<u32>,
    /// Total cycles [default: skip-cycles + 1]
    #[arg(long)]
    cycles: Option<u32>,
}

#[derive(Args)]
struct MontecarloArgs {
    /// Code family: repetition | surface [default: repetition]
    #[arg(long)]
    code: Option<String>,
    /// Code size [default: 3]
    #[arg(long)]
    size: Option<usize>,
    /// Physical flip probability per qubit per cycle [default: 0.01]
    #[arg(long)]
    p: Option<f64>,
    /// Measurement flip probability [default: 0]
    #[arg(long)]
    q: Option<f64>,
    /// Cycles per shot [default: 1]
    #[arg(long)]
    cycles: Option<u32>,
    /// Monte Carlo shots [default: 100000]
    #[arg(long)]
    shots: Option<u64>,
    /// Silent-failure probability per stabilizer per window [default: 0]
    #[arg(long)]
    p_s: Option<f64>,
    /// Cycles per silent-failure window [default: cycles]
    #[arg(long)]
    silent_window: Option<u32>,
    /// Cycles a silent failure lasts [default: cycles]
    #[arg(long)]
    silent_duration: Option<u32>,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Code family: repetition | surface [default: surface]
    #[arg(long)]
    code: Option<String>,
    /// Comma-separated code sizes [default: 3,5,7]
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated physical error rates
    /// [default: 0.02,0.04,0.06,0.08,0.10,0.12]
    #[arg(long, value_delimiter = ',')]
    ps: Option<Vec<f64>>,
    /// Measurement flip probability [default: 0]
    #[arg(long)]
    q: Option<f64>,
    /// Cycles per shot [default: 1]
    #[arg(long)]
    cycles: Option<u32>,
    /// Shots per grid point [default: 100000]
    #[arg(long)]
    shots: Option<u64>,
}

#[derive(Args)]
struct SilentMcArgs {
    /// Code family: repetition | surface [default: repetition]
    #[arg(long)]
    code: Option<String>,
    /// Comma-separated code sizes [default: 9,25,49]
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Physical flip probability [default: 0.01]
    #[arg(long)]
    p: Option<f64>,
    /// Silent-failure probability per stabilizer per window [default: 0.001]
    #[arg(long)]
    p_s: Option<f64>,
    /// Cycles per silent-failure window [default: cycles]
    #[arg(long)]
    silent_window: Option<u32>,
    /// Cycles a silent failure lasts [default: cycles]
    #[arg(long)]
    silent_duration: Option<u32>,
    /// Cycles per shot [default: 4]
    #[arg(long)]
    cycles: Option<u32>,
    /// Shots per size and injection setting [default: 100000]
    #[arg(long)]
    shots: Option<u64>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Number of logical operations in the computation
    #[arg(long)]
    n_ops: Option<f64>,
    /// Number of logical qubits
    #[arg(long)]
    n_logical: Option<f64>,
    /// Physical qubits per logical qubit
    #[arg(long)]
    n_code: Option<f64>,
    /// Physical error probability
    #[arg(long)]
    p: Option<f64>,
    /// Threshold probability
    #[arg(long)]
    p_th: Option<f64>,
    /// Silent-failure probability [default: 0]
    #[arg(long)]
    p_s: Option<f64>,
    /// Invert the budget: report the largest p_s meeting this target
    #[arg(long)]
    target: Option<f64>,
    /// Sweep the code size from this value (needs --nc-max)
    #[arg(long)]
    nc_min: Option<u32>,
    /// Sweep the code size up to this value
    #[arg(long)]
    nc_max: Option<u32>,
    /// Suppression exponent: surface (√N_c/2) | repetition (N_c/2)
    /// [default: surface]
    #[arg(long)]
    form: Option<String>,
}

#[derive(Serialize, Clone)]
struct LayoutSummary {
    code: &'static str,
    size: usize,
    n_data: usize,
    stabilizers: usize,
    logical_pairs: usize,
    distance: usize,
}

fn code_name(kind: CodeKind) -> &'static str {
    match kind {
        CodeKind::Repetition => "repetition",
        CodeKind::Surface => "surface",
    }
}

fn parse_code(name: &str) -> Result<CodeKind, CliError> {
    match name {
        "repetition" => Ok(CodeKind::Repetition),
        "surface" => Ok(CodeKind::Surface),
        other => Err(validation(format!(
            "key 'code' must be 'repetition' or 'surface', got '{other}'"
        ))),
    }
}

fn build_layout(kind: CodeKind, size: usize) -> Result<(CodeLayout, LayoutSummary), CliError> {
    let layout = match kind {
        CodeKind::Repetition => repetition_code(size).map_err(|e| validation(e.to_string()))?,
        CodeKind::Surface => surface_code(size).map_err(|e| validation(e.to_string()))?,
    };
    let summary = LayoutSummary {
        code: code_name(kind),
        size,
        n_data: layout.n_data,
        stabilizers: layout.stabilizers.len(),
        logical_pairs: layout.logicals.len(),
        distance: layout.distance,
    };
    Ok((layout, summary))
}

fn parse_angle_mode(name: &str) -> Result<AngleMode, CliError> {
    match name {
        "fixed" => Ok(AngleMode::Fixed),
        "uniform" => Ok(AngleMode::Uniform),
        other => Err(validation(format!(
            "key 'angle-mode' must be 'fixed' or 'uniform', got '{other}'"
        ))),
    }
}

fn parse_measure_mode(name: &str) -> Result<MeasureMode, CliError> {
    match name {
        "ideal" => Ok(MeasureMode::Ideal),
        "circuit" => Ok(MeasureMode::Circuit),
        other => Err(validation(format!(
            "key 'measure-mode' must be 'ideal' or 'circuit', got '{other}'"
        ))),
    }
}

fn check_probability(name: &str, value: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(validation(format!(
            "key '{name}' must be in [0, 1], got {value}"
        )))
    }
}

fn check_shots(shots: u64) -> Result<u64, CliError> {
    if shots == 0 {
        Err(validation("key 'shots' must be at least 1"))
    } else {
        Ok(shots)
    }
}

fn f(v: f64) -> String {
    // shortest round-trip formatting keeps CSVs byte-stable; switch to
    // scientific notation outside a readable magnitude window
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e6) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_ref())?;
    let seed = pick(cli.seed, file.seed).unwrap_or(0);
    let threads = pick(cli.threads, file.threads);
    let output = pick(cli.output.clone(), file.output.clone());
    if let Some(n) = threads {
        if n == 0 {
            return Err(validation("key 'threads' must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(runtime)?;
    }

    match &cli.command {
        Command::Describe(args) => describe(args, &file, output.as_deref()),
        Command::Eq4Check(args) => eq4_check(args, &file, seed, threads, output.as_deref()),
        Command::Precision(args) => precision(args, &file, seed, threads, output.as_deref()),
        Command::SilentDrift(args) => silent_drift(args, &file, seed, threads, output.as_deref()),
        Command::Montecarlo(args) => montecarlo(args, &file, seed, threads, output.as_deref()),
        Command::Threshold(args) => threshold(args, &file, seed, threads, output.as_deref()),
        Command::SilentMc(args) => silent_mc(args, &file, seed, threads, output.as_deref()),
        Command::Budget(args) => budget(args, &file, seed, threads, output.as_deref()),
    }
}

fn describe(
    args: &DescribeArgs,
    file: &FileConfig,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    file.check_experiment("describe")?;
    let kind = parse_code(
        &pick(args.code.clone(), file.code.clone()).unwrap_or_else(|| "repetition".into()),
    )?;
    let size = pick(args.size, file.size).unwrap_or(3);
    let (layout, summary) = build_layout(kind, size)?;
    let report = layout.validate();
    let text = format!("{}validation: {report}\n", layout.describe());
    print!("{text}");
    if let Some(base) = output {
        write_text(base, &text)?;
        write_header(base, &RunHeader::new("describe", 0, None, summary))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Eq4Config {
    size: usize,
    eta: f64,
    trials: u64,
}

fn eq4_check(
    args: &Eq4Args,
    file: &FileConfig,
    seed: u64,
    threads: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    file.check_experiment("eq4-check")?;
    let size = pick(args.size, file.size).unwrap_or(3);
    if !(2..=12).contains(&size) {
        return Err(validation(format!(
            "key 'size' must be in [2, 12] for eq4-check, got {size}"
        )));
    }
    let eta = pick(args.eta, file.noise.eta).unwrap_or(0.1);
    if eta < 0.0 {
        return Err(validation(format!(
            "key 'eta' must be non-negative, got {eta}"
        )));
    }
    let trials = pick(args.trials, file.trials).unwrap_or(100);
    let report = closed_form_check(size, eta, trials, seed).map_err(runtime)?;
    println!(
        "max amplitude deviation vs closed form over {} trials: {:.3e}",
        report.trials, report.max_deviation
    );
    if let Some(base) = output {
        let rows: Vec<String> = report
            .deviations
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{i},{}", f(*d)))
            .collect();
        write_csv(base, "trial,max_deviation", &rows)?;
        write_header(
            base,
            &RunHeader::new("eq4-check", seed, threads, Eq4Config { size, eta, trials }),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PrecisionConfig {
    layout: LayoutSummary,
    noise: NoiseConfig,
    cycles: u32,
    shots: u64,
    alpha: f64,
    beta: f64,
    measure_mode: MeasureMode,
}

fn precision(
    args: &PrecisionArgs,
    file: &FileConfig,
    seed: u64,
    threads: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    file.check_experiment("precision")?;
    let kind = parse_code(
        &pick(args.code.clone(), file.code.clone()).unwrap_or_else(|| "repetition".into()),
    )?;
    let size = pick(args.size, file.size).unwrap_or(3);
    let measure_mode = parse_measure_mode(
        &pick(args.measure_mode.clone(), file.measure_mode.clone())
            .unwrap_or_else(|| "ideal".into()),
    )?;
    let ancilla_noise = args.ancilla_noise || file.noise.apply_to_ancillas.unwrap_or(false);
    if measure_mode == MeasureMode::Circuit && kind == CodeKind::Surface && size > 3 {
        return Err(validation(
            "invalid combination: 'measure-mode' = circuit supports the repetition code and surface size 3 only",
        ));
    }
    if ancilla_noise && measure_mode != MeasureMode::Circuit {
        return Err(validation(
            "invalid combination: 'ancilla-noise' requires 'measure-mode' = circuit",
        ));
    }
    let (layout, summary) = build_layout(kind, size)?;
    if layout.n_data > stabsim::coherent::MAX_IDEAL_QUBITS {
        return Err(validation(format!(
            "coherent simulation of {} data qubits exceeds the {}-qubit cap",
            layout.n_data,
            stabsim::coherent::MAX_IDEAL_QUBITS
        )));
    }
    let eta = pick(args.eta, file.noise.eta).unwrap_or(0.1);
    let angle_mode = parse_angle_mode(
        &pick(args.angle_mode.clone(), file.noise.angle_mode.clone())
            .unwrap_or_else(|| "fixed".into()),
    )?;
    let cycles = pick(args.cycles, file.cycles).unwrap_or(1);
    let shots = check_shots(pick(args.shots, file.shots).unwrap_or(10_000))?;
    let alpha = pick(args.alpha, file.alpha).unwrap_or(1.0);
    let beta = pick(args.beta, file.beta).unwrap_or(0.0);
    if (alpha * alpha + beta * beta - 1.0).abs() > 1e-9 {
        return Err(validation(format!(
            "keys 'alpha'/'beta' must satisfy alpha² + beta² = 1, got {}",
            alpha * alpha + beta * beta
        )));
    }
    let noise = NoiseConfig {
        eta,
        angle_mode,
        apply_to_ancillas: ancilla_noise,
        ..Default::default()
    };
    noise.validate().map_err(validation)?;

    let stats = precision_experiment(
        &layout,
        &noise,
        cycles,
        shots,
        Complex64::new(alpha, 0.0),
        Complex64::new(beta, 0.0),
        measure_mode,
        seed,
        true,
    )
    .map_err(runtime)?;

    println!(
        "shots: {shots}, mean eta_L: {:.6e} ± {:.1e}",
        stats.mean_eta_l, stats.mean_eta_l_se
    );
    if stats.no_defect_probability.is_finite() {
        println!(
            "no-defect branch probability: {:.12}",
            stats.no_defect_probability
        );
    }
    for (n, b) in &stats.branches {
        println!(
            "n={n}: count {}, frequency {:.6} ± {:.1e}, mean eta_L {:.6e} ± {:.1e}",
            b.count, b.frequency, b.frequency_se, b.mean_eta_l, b.eta_l_se
        );
    }
    if let Some(base) = output {
        let rows: Vec<String> = stats
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{}",
                    r.shot,
                    r.cycle,
                    r.defect_count,
                    r.syndrome_class,
                    f(r.eta_l)
                )
            })
            .collect();
        write_csv(base, "shot,cycle,defect_count,syndrome_class,eta_l", &rows)?;
        write_header(
            base,
            &RunHeader::new(
                "precision",
                seed,
                threads,
                PrecisionConfig {
                    layout: summary,
                    noise,
                    cycles,
                    shots,
                    alpha,
                    beta,
                    measure_mode,
                },
            ),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SilentDriftConfig {
    layout: LayoutSummary,
    noise: NoiseConfig,
    skip_stab: usize,
    skip_cycles: u32,
    cycles: u32,
}

fn silent_drift(
    args: &SilentDriftArgs,
    file: &FileConfig,
    seed: u64,
    threads: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    file.check_experiment("silent-drift")?;
    let kind = parse_code(
        &pick(args.code.clone(), file.code.clone()).unwrap_or_else(|| "repetition".into()),
    )?;
    let size = pick(args.size, file.size).unwrap_or(5);
    let (layout, summary) = build_layout(kind, size)?;
    if layout.n_data > stabsim::coherent::MAX_IDEAL_QUBITS {
        return Err(validation(format!(
            "coherent simulation of {} data qubits exceeds the {}-qubit cap",
            layout.n_data,
            stabsim::coherent::MAX_IDEAL_QUBITS
        )));
    }
    let eta = pick(args.eta, file.noise.eta).unwrap_or(0.05);
    let skip_stab = pick(args.skip_stab, file.skip_stab).unwrap_or(layout.stabilizers.len() / 2);
    if skip_stab >= layout.stabilizers.len() {
        return Err(validation(format!(
            "key 'skip-stab' = {skip_stab} out of range; the layout has {} stabilizers",
            layout.stabilizers.len()
        )));
    }
    let skip_cycles = pick(args.skip_cycles, file.skip_cycles).unwrap_or(50);
    let cycles = pick(args.cycles, file.cycles).unwrap_or(skip_cycles + 1);
    if cycles < skip_cycles {
        return Err(validation(format!(
            "key 'cycles' ({cycles}) must be at least 'skip-cycles' ({skip_cycles})"
        )));
    }
    let noise = NoiseConfig {
        eta,
        ..Default::default()
    };
    noise.validate().map_err(validation)?;

    let curve = silent_drift_experiment(
        &layout,
        &noise,
        skip_stab,
        skip_cycles,
        cycles,
        Complex64::ONE,
        Complex64::ZERO,
        seed,
    )
    .map_err(runtime)?;

    if let Some(last) = curve.points.last() {
        println!(
            "final occupation {:.6e} (control {:.6e})",
            last.occupation, last.control_occupation
        );
    }
    if let Some(outcome) = curve.resumption_outcome {
        println!(
            "resumed measurement outcome {outcome:+} at occupation {:.6e}",
            curve.occupation_at_resumption
        );
    }
    if let Some(base) = output {
        let rows: Vec<String> = curve
            .points
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{}",
                    p.cycle,
                    p.skipped,
                    f(p.occupation),
                    f(p.control_occupation)
                )
            })
            .collect();
        write_csv(base, "cycle,skipped,occupation,control_occupation", &rows)?;
        write_header(
            base,
            &RunHeader::new(
                "silent-drift",
                seed,
                threads,
                SilentDriftConfig {
                    layout: summary,
                    noise,
                    skip_stab,
                    skip_cycles,
                    cycles,
                },
            ),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct MontecarloConfig {
    layout: LayoutSummary,
    p: f64,
    q: f64,
    p_s: f64,
    silent_window: u32,
    silent_duration: u32,
    cycles: u32,
    shots: u64,
}

const FRAME_CSV_HEADER: &str =
    "size,p,q,p_s,cycles,shots,failures,p_l_hat,ci_low,ci_high,silent_events";

fn frame_row(row: &ScanRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        row.size,
        f(row.p),
        f(row.q),
        f(row.p_s),
        row.cycles,
        row.stats.shots,
        row.stats.failures,
        f(row.stats.p_l_hat),
        f(row.stats.ci_low),
        f(row.stats.ci_high),
        row.silent_events
    )
}

fn montecarlo(
    args: &MontecarloArgs,
    file: &FileConfig,
    seed: u64,
    threads: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    file.check_experiment("montecarlo")?;
    let kind = parse_code(
        &pick(args.code.clone(), file.code.clone()).unwrap_or_else(|| "repetition".into()),
    )?;
    let size = pick(args.size, file.size).unwrap_or(3);
    let (layout, summary) = build_layout(kind, size)?;
    let p = check_probability("p", pick(args.p, file.noise.p).unwrap_or(0.01))?;
    let q = check_probability("q", pick(args.q, file.noise.q).unwrap_or(0.0))?;
    let p_s = check_probability("p-s", pick(args.p_s, file.noise.p_s).unwrap_or(0.0))?;
    let cycles = pick(args.cycles, file.cycles).unwrap_or(1).max(1);
    let shots = check_shots(pick(args.shots, file.shots).unwrap_or(100_000))?;
    let silent_window = pick(args.silent_window, file.noise.silent_window).unwrap_or(cycles);
    let silent_duration = pick(args.silent_duration, file.noise.silent_duration).unwrap_or(cycles);

    let mut cfg = RunConfig::new(p, q, cycles, shots, seed);
    if p_s > 0.0 {
        cfg.silent = Some(SilentParams {
            p_s,
            window: silent_window,
            duration: silent_duration,
        });
    }
    let out = run_shots(&layout, &cfg).map_err(runtime)?;
    println!(
        "p_L = {:.6} [{:.6}, {:.6}] over {} shots ({} failures, {} silent events)",
        out.stats.p_l_hat,
        out.stats.ci_low,
        out.stats.ci_high,
        out.stats.shots,
        out.stats.failures,
        out.silent_events
    );
    if let Some(base) = output {
        let row = ScanRow {
            size,
            p,
            q,
            p_s,
            cycles,
            stats: out.stats,
            silent_events: out.silent_events,
        };
        write_csv(base, FRAME_CSV_HEADER, &[frame_row(&row)])?;
        write_header(
            base,
            &RunHeader::new(
                "montecarlo",
                seed,
                threads,
                MontecarloConfig {
                    layout: summary,
                    p,
                    q,
                    p_s,
                    silent_window,
                    silent_duration,
                    cycles,
                    shots,
                },
            ),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ThresholdConfig {
    code: &'static str,
    sizes: Vec<usize>,
    ps: Vec<f64>,
    q: f64,
    cycles: u32,
    shots: u64,
}

fn threshold(
    args: &ThresholdArgs,
    file: &FileConfig,
    seed: u64,
    threads: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    file.check_experiment("threshold")?;
    let kind = parse_code(
        &pick(args.code.clone(), file.code.clone()).unwrap_or_else(|| "surface".into()),
    )?;
    let sizes = pick(args.sizes.clone(), file.sizes.clone()).unwrap_or_else(|| vec![3, 5, 7]);
    let ps = pick(args.ps.clone(), file.ps.clone())
        .unwrap_or_else(|| vec![0.02, 0.04, 0.06, 0.08, 0.10, 0.12]);
    for &p in &ps {
        check_probability("ps", p)?;
    }
    let q = check_probability("q", pick(args.q, file.noise.q).unwrap_or(0.0))?;
    let cycles = pick(args.cycles, file.cycles).unwrap_or(1).max(1);
    let shots = check_shots(pick(args.shots, file.shots).unwrap_or(100_000))?;
    for &size in &sizes {
        build_layout(kind, size)?; // validate sizes up front
    }

    let rows = threshold_scan(kind, &sizes, &ps, q, cycles, shots, seed).map_err(runtime)?;
    for row in &rows {
        println!(
            "size={} p={} p_L={:.6} [{:.6}, {:.6}]",
            row.size, row.p, row.stats.p_l_hat, row.stats.ci_low, row.stats.ci_high
        );
    }
    if let Some((below, above)) = stabsim::frame::crossing_interval(&rows) {
        println!("ordering inverts between p = {below} and p = {above}");
    }
    if let Some(base) = output {
        let lines: Vec<String> = rows.iter().map(frame_row).collect();
        write_csv(base, FRAME_CSV_HEADER, &lines)?;
        write_header(
            base,
            &RunHeader::new(
                "threshold",
                seed,
                threads,
                ThresholdConfig {
                    code: code_name(kind),
                    sizes,
                    ps,
                    q,
                    cycles,
                    shots,
                },
            ),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SilentMcConfig {
    code: &'static str,
    sizes: Vec<usize>,
    p: f64,
    p_s: f64,
    silent_window: u32,
    silent_duration: u32,
    cycles: u32,
    shots: u64,
}

fn silent_mc(
    args: &SilentMcArgs,
    file: &FileConfig,
    seed: u64,
    threads: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    file.check_experiment("silent-mc")?;
    let kind = parse_code(
        &pick(args.code.clone(), file.code.clone()).unwrap_or_else(|| "repetition".into()),
    )?;
    let sizes = pick(args.sizes.clone(), file.sizes.clone()).unwrap_or_else(|| vec![9, 25, 49]);
    let p = check_probability("p", pick(args.p, file.noise.p).unwrap_or(0.01))?;
    let p_s = check_probability("p-s", pick(args.p_s, file.noise.p_s).unwrap_or(1e-3))?;
    let cycles = pick(args.cycles, file.cycles).unwrap_or(4).max(1);
    let shots = check_shots(pick(args.shots, file.shots).unwrap_or(100_000))?;
    let silent_window = pick(args.silent_window, file.noise.silent_window).unwrap_or(cycles);
    let silent_duration = pick(args.silent_duration, file.noise.silent_duration).unwrap_or(cycles);
    for &size in &sizes {
        build_layout(kind, size)?;
    }

    let rows = silent_failure_experiment(
        kind,
        &sizes,
        p,
        p_s,
        silent_window,
        silent_duration,
        cycles,
        shots,
        seed,
    )
    .map_err(runtime)?;
    let mut lines = Vec::new();
    for r in &rows {
        println!(
            "size={}: p_L(on) = {:.6}, p_L(off) = {:.6}, occurrence rate {:.6}",
            r.size, r.stats_on.p_l_hat, r.stats_off.p_l_hat, r.occurrence_rate
        );
        for (injection, stats, events) in [
            ("on", &r.stats_on, r.silent_events),
            ("off", &r.stats_off, 0u64),
        ] {
            lines.push(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.size,
                f(r.p),
                f(0.0),
                f(if injection == "on" { r.p_s } else { 0.0 }),
                r.cycles,
                stats.shots,
                stats.failures,
                f(stats.p_l_hat),
                f(stats.ci_low),
                f(stats.ci_high),
                events,
                injection,
                r.event_shots,
                r.candidate_shots,
                f(r.occurrence_rate)
            ));
        }
    }
    if let Some(base) = output {
        let header =
            format!("{FRAME_CSV_HEADER},injection,event_shots,candidate_shots,occurrence_rate");
        write_csv(base, &header, &lines)?;
        write_header(
            base,
            &RunHeader::new(
                "silent-mc",
                seed,
                threads,
                SilentMcConfig {
                    code: code_name(kind),
                    sizes,
                    p,
                    p_s,
                    silent_window,
                    silent_duration,
                    cycles,
                    shots,
                },
            ),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BudgetConfig {
    params: BudgetParams,
    form: ExponentForm,
    target: Option<f64>,
    nc_range: Option<(u32, u32)>,
}

fn budget(
    args: &BudgetArgs,
    file: &FileConfig,
    seed: u64,
    threads: Option<usize>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    file.check_experiment("budget")?;
    let params = BudgetParams {
        n_ops: require(pick(args.n_ops, file.n_ops), "n-ops")?,
        n_logical: require(pick(args.n_logical, file.n_logical), "n-logical")?,
        n_code: require(pick(args.n_code, file.n_code), "n-code")?,
        p: require(pick(args.p, file.noise.p), "p")?,
        p_th: require(pick(args.p_th, file.p_th), "p-th")?,
        p_s: pick(args.p_s, file.noise.p_s).unwrap_or(0.0),
    };
    params.validate().map_err(|e| validation(e.to_string()))?;
    let form = match pick(args.form.clone(), file.form.clone())
        .unwrap_or_else(|| "surface".into())
        .as_str()
    {
        "surface" => ExponentForm::Surface,
        "repetition" => ExponentForm::Repetition,
        other => {
            return Err(validation(format!(
                "key 'form' must be 'surface' or 'repetition', got '{other}'"
            )))
        }
    };
    let target = pick(args.target, file.target);
    let nc_range = match (pick(args.nc_min, file.nc_min), pick(args.nc_max, file.nc_max)) {
        (Some(lo), Some(hi)) if lo <= hi => Some((lo, hi)),
        (Some(_), Some(_)) => return Err(validation("key 'nc-min' must not exceed 'nc-max'")),
        (None, None) => None,
        _ => {
            return Err(validation(
                "keys 'nc-min' and 'nc-max' must be given together",
            ))
        }
    };

    let req = match target {
        Some(t) => Some(required_ps(&params, t, form).map_err(|e| validation(e.to_string()))?),
        None => None,
    };

    let evaluate = |n_code: f64| -> Result<String, CliError> {
        let point = BudgetParams { n_code, ..params };
        let rep = failure_budget(&point, form).map_err(|e| validation(e.to_string()))?;
        Ok(format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f(point.n_ops),
            f(point.n_logical),
            f(point.n_code),
            f(point.p),
            f(point.p_th),
            f(point.p_s),
            f(rep.qec_term),
            f(rep.silent_term),
            f(rep.log10_qec_term),
            f(rep.p_fail),
            rep.exceeded,
            rep.above_threshold,
            req.map_or(String::new(), |r| f(r.p_s)),
            req.map_or(String::new(), |r| r.feasible.to_string()),
        ))
    };

    let report = failure_budget(&params, form).map_err(|e| validation(e.to_string()))?;
    println!(
        "p_fail = {:.6e} (QEC term {:.6e}, silent term {:.6e}){}",
        report.p_fail,
        report.qec_term,
        report.silent_term,
        if report.exceeded {
            " — budget exceeded"
        } else {
            ""
        }
    );
    if report.above_threshold {
        println!("warning: p exceeds p_th; the QEC term grows with code size");
    }
    if let Some(r) = req {
        println!(
            "required p_s for target {}: {:.6e} ({})",
            target.unwrap_or(f64::NAN),
            r.p_s,
            if r.feasible {
                "feasible"
            } else {
                "infeasible: the QEC term alone exceeds the target"
            }
        );
    }
    let rows = match nc_range {
        Some((lo, hi)) => {
            let opt = optimal_nc(&params, lo..=hi, form).map_err(|e| validation(e.to_string()))?;
            println!(
                "optimal N_c in [{lo}, {hi}]: {} with p_fail {:.6e}",
                opt.best_n_code, opt.best_p_fail
            );
            opt.curve
                .iter()
                .map(|(n_code, _)| evaluate(f64::from(*n_code)))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => vec![evaluate(params.n_code)?],
    };
    if let Some(base) = output {
        write_csv(
            base,
            "n_ops,n_logical,n_code,p,p_th,p_s,qec_term,silent_term,log10_qec_term,p_fail,exceeded,above_threshold,required_ps,feasible",
            &rows,
        )?;
        write_header(
            base,
            &RunHeader::new(
                "budget",
                seed,
                threads,
                BudgetConfig {
                    params,
                    form,
                    target,
                    nc_range,
                },
            ),
        )?;
    }
    Ok(())
}
