//! Command-line harness: generate datasets from known networks, learn
//! structures, score them against ground truth, and drive whole benchmark
//! grids from a manifest.
//!
//! Exit codes: 0 on success (including timeout-flagged partial results),
//! 1 on usage errors, 2 on data errors.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process;
use std::time::{Duration, Instant};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use condag::graph::{read_dag_csv, write_dag_csv};
use condag::metrics::MetricsReport;
use condag::net::Network;
use condag::pipeline::{learn, LearnOptions, LearnOutcome};
use condag::sampler::{forward_sample, GENERATOR_ID};
use condag::{load_dataset, Graph};

#[derive(Parser)]
#[command(name = "condag", version, about = "Structure learning benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample synthetic datasets from a network file.
    Generate {
        /// Ground-truth network (JSON).
        #[arg(long)]
        net: PathBuf,
        /// Sample sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Learn a connected DAG from a dataset.
    Learn {
        /// Training data (CSV with a header row).
        #[arg(long)]
        data: PathBuf,
        /// Output DAG file; timing lands next to it.
        #[arg(long)]
        out: PathBuf,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 21_600)]
        timeout: u64,
        /// Also write one line per orientation/search decision.
        #[arg(long)]
        trace: bool,
    },
    /// Score a learned DAG against ground truth.
    Evaluate {
        /// Learned DAG (CSV).
        #[arg(long)]
        data: PathBuf,
        /// Ground truth: network JSON or DAG CSV.
        #[arg(long)]
        truth: PathBuf,
    },
    /// Generate, learn, and evaluate every cell of a manifest.
    Benchmark {
        /// JSON manifest: {"runs": [{"net": ..., "sizes": [...], "seeds": [...]}]}.
        #[arg(long)]
        manifest: PathBuf,
        /// Results CSV path.
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        /// Wall-clock budget in seconds per cell.
        #[arg(long, default_value_t = 21_600)]
        timeout: u64,
    },
}

enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<condag::Error> for CliError {
    fn from(e: condag::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            process::exit(1);
        }
        Err(CliError::Data(m)) => {
            eprintln!("error: {m}");
            process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { net, n, seed, out } => cmd_generate(&net, &n, seed, &out),
        Command::Learn {
            data,
            out,
            timeout,
            trace,
        } => cmd_learn(&data, &out, timeout, trace),
        Command::Evaluate { data, truth } => cmd_evaluate(&data, &truth),
        Command::Benchmark {
            manifest,
            out,
            timeout,
        } => cmd_benchmark(&manifest, &out, timeout),
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".to_string())
}

#[derive(Serialize)]
struct DatasetMeta<'a> {
    network: String,
    n: usize,
    seed: u64,
    generator: &'a str,
}

fn cmd_generate(net_path: &Path, sizes: &[usize], seed: u64, out_dir: &Path) -> Result<(), CliError> {
    if let Some(&bad) = sizes.iter().find(|&&n| n == 0) {
        return Err(CliError::Usage(format!("--n values must be >= 1, got {bad}")));
    }
    let net = Network::load(net_path)?;
    let stem = file_stem(net_path);
    std::fs::create_dir_all(out_dir)?;
    for &n in sizes {
        let dataset = forward_sample(&net, n, seed)?;
        let csv_path = out_dir.join(format!("{stem}_{n}.csv"));
        dataset.write_csv(BufWriter::new(File::create(&csv_path)?))?;
        let meta = DatasetMeta {
            network: net_path.to_string_lossy().into_owned(),
            n,
            seed,
            generator: GENERATOR_ID,
        };
        let meta_path = out_dir.join(format!("{stem}_{n}.meta.json"));
        let mut f = BufWriter::new(File::create(&meta_path)?);
        writeln!(f, "{}", serde_json::to_string_pretty(&meta)?)?;
        println!("wrote {} ({n} rows)", csv_path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct TimingDoc {
    phase1_s: f64,
    phase2_s: f64,
    phase3_s: f64,
    fractions: [f64; 3],
    total_s: f64,
    partial: bool,
    pair_tests: usize,
    conditional_tests: usize,
    bic: f64,
}

fn timing_doc(outcome: &LearnOutcome) -> TimingDoc {
    TimingDoc {
        phase1_s: outcome.timing.phase1_s,
        phase2_s: outcome.timing.phase2_s,
        phase3_s: outcome.timing.phase3_s,
        fractions: outcome.timing.fractions(),
        total_s: outcome.timing.total_s(),
        partial: outcome.partial,
        pair_tests: outcome.pair_tests,
        conditional_tests: outcome.conditional_tests,
        bic: outcome.bic,
    }
}

fn cmd_learn(data: &Path, out: &Path, timeout: u64, trace: bool) -> Result<(), CliError> {
    if timeout == 0 {
        return Err(CliError::Usage("--timeout must be >= 1 second".to_string()));
    }
    let dataset = load_dataset(File::open(data)?)?;
    let opts = LearnOptions {
        timeout: Some(Duration::from_secs(timeout)),
        trace,
    };
    let outcome = learn(&dataset, &opts)?;

    write_dag_csv(&outcome.graph, BufWriter::new(File::create(out)?))?;
    let timing_path = out.with_extension("timing.json");
    let mut f = BufWriter::new(File::create(&timing_path)?);
    writeln!(f, "{}", serde_json::to_string_pretty(&timing_doc(&outcome))?)?;
    if trace {
        let trace_path = out.with_extension("trace.txt");
        let mut f = BufWriter::new(File::create(&trace_path)?);
        for line in &outcome.trace {
            writeln!(f, "{line}")?;
        }
    }

    let f = outcome.timing.fractions();
    println!(
        "learned {} nodes, {} edges, {} component(s), bic={:.4}, partial={}",
        outcome.graph.n(),
        outcome.graph.n_edges(),
        outcome.graph.weak_components().0,
        outcome.bic,
        outcome.partial
    );
    println!(
        "phase fractions: {:.4} {:.4} {:.4} (total {:.3}s)",
        f[0],
        f[1],
        f[2],
        outcome.timing.total_s()
    );
    Ok(())
}

fn load_truth(path: &Path) -> Result<Graph, CliError> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(Network::load(path)?.graph().clone())
    } else {
        Ok(read_dag_csv(File::open(path)?)?)
    }
}

fn cmd_evaluate(data: &Path, truth: &Path) -> Result<(), CliError> {
    let learned = read_dag_csv(File::open(data)?)?;
    let truth_graph = load_truth(truth)?;
    let report = MetricsReport::from_graphs(
        file_stem(data),
        0,
        &learned,
        &truth_graph,
        [0.0, 0.0, 0.0],
        0.0,
    )?;
    println!("{}", MetricsReport::csv_header());
    println!("{}", report.csv_row());
    Ok(())
}

#[derive(Deserialize)]
struct Manifest {
    runs: Vec<ManifestRun>,
}

#[derive(Deserialize)]
struct ManifestRun {
    net: String,
    sizes: Vec<usize>,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

/// A cell that timed out or failed: metric columns become `n/a`, mirroring
/// incomplete runs in result tables.
fn na_row(case: &str, n: usize, fractions: [f64; 3], runtime_s: f64) -> String {
    format!(
        "{case},{n},n/a,n/a,n/a,n/a,n/a,{:.6},{:.6},{:.6},{:.3}",
        fractions[0], fractions[1], fractions[2], runtime_s
    )
}

fn cmd_benchmark(manifest_path: &Path, out: &Path, timeout: u64) -> Result<(), CliError> {
    if timeout == 0 {
        return Err(CliError::Usage("--timeout must be >= 1 second".to_string()));
    }
    let manifest: Manifest = serde_json::from_reader(File::open(manifest_path)?)
        .map_err(|e| CliError::Data(format!("manifest {}: {e}", manifest_path.display())))?;
    if manifest.runs.is_empty() {
        return Err(CliError::Data("manifest lists no runs".to_string()));
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    // validate everything before the first (possibly long) run
    let mut nets = Vec::new();
    for run in &manifest.runs {
        if run.sizes.is_empty() || run.seeds.is_empty() {
            return Err(CliError::Data(format!(
                "manifest entry '{}' needs at least one size and one seed",
                run.net
            )));
        }
        if run.sizes.contains(&0) {
            return Err(CliError::Data(format!(
                "manifest entry '{}' lists a zero sample size",
                run.net
            )));
        }
        let path = base.join(&run.net);
        nets.push(Network::load(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?);
    }

    let mut writer = BufWriter::new(File::create(out)?);
    writeln!(writer, "{}", MetricsReport::csv_header())?;
    println!("{}", MetricsReport::csv_header());
    let opts = LearnOptions {
        timeout: Some(Duration::from_secs(timeout)),
        trace: false,
    };
    for (run, net) in manifest.runs.iter().zip(&nets) {
        let stem = file_stem(Path::new(&run.net));
        for &n in &run.sizes {
            for &seed in &run.seeds {
                let case = format!("{stem}-s{seed}");
                let started = Instant::now();
                let row = match run_cell(net, n, seed, &opts) {
                    Ok(outcome) if outcome.partial => {
                        na_row(&case, n, outcome.timing.fractions(), timeout as f64)
                    }
                    Ok(outcome) => {
                        let report = MetricsReport::from_graphs(
                            case.clone(),
                            n,
                            &outcome.graph,
                            net.graph(),
                            outcome.timing.fractions(),
                            started.elapsed().as_secs_f64(),
                        )?;
                        report.csv_row()
                    }
                    Err(e) => {
                        eprintln!("cell {case} n={n}: {e}");
                        na_row(&case, n, [0.0, 0.0, 0.0], started.elapsed().as_secs_f64())
                    }
                };
                writeln!(writer, "{row}")?;
                println!("{row}");
            }
        }
    }
    writer.flush()?;
    Ok(())
}

fn run_cell(
    net: &Network,
    n: usize,
    seed: u64,
    opts: &LearnOptions,
) -> Result<LearnOutcome, condag::Error> {
    let dataset = forward_sample(net, n, seed)?;
    // mirror the CSV loader's observed-state rule so a benchmark cell fails
    // exactly when `generate` + `learn` on the same seed would
    for (j, var) in dataset.variables().iter().enumerate() {
        let col = dataset.column(j);
        let degenerate = match col.first() {
            Some(&f) => col.iter().all(|&v| v == f),
            None => true,
        };
        if degenerate {
            return Err(condag::Error::SingleStateColumn(var.name.clone()));
        }
    }
    learn(&dataset, opts)
}
