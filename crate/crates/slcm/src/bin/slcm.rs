//! Command-line driver: scenario runs, constant-density sweeps, the
//! broadcast comparison, and the proof-protocol bench.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slcm::metrics::{
    compare_broadcast, run_scenario, sweep_rows, zkp_bench, ScenarioConfig, CSV_HEADER,
};

/// Environment variable selecting the output directory when `--out` is not
/// given.
const OUT_DIR_ENV: &str = "SLCM_OUT_DIR";

#[derive(Parser)]
#[command(name = "slcm", version, about = "Self-organizing life cycle management simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario config file (flat key = value lines, # comments).
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: writes trace.tsv and summary.csv.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $SLCM_OUT_DIR, then the cwd).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Constant-density sweep over node counts: one CSV row per run.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Node counts as start..end:step, e.g. 10..100:10.
        #[arg(long)]
        nodes: String,
        /// Seeds per node count (seed, seed+1, ...).
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimized vs plain broadcast on identical topologies.
    CompareBroadcast {
        #[command(flatten)]
        config: ConfigArg,
        /// Number of connected topologies to average over.
        #[arg(long, default_value_t = 30)]
        seeds: usize,
    },
    /// Completeness and soundness rates of the proof protocol.
    ZkpBench {
        #[arg(long)]
        rounds: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    ScenarioConfig::parse(&text).map_err(|e| e.to_string())
}

/// Parses `start..end:step` into the inclusive node counts.
fn parse_node_range(spec: &str) -> Result<Vec<usize>, String> {
    let (range, step) = spec
        .split_once(':')
        .ok_or_else(|| format!("expected start..end:step, got {spec:?}"))?;
    let (start, end) = range
        .split_once("..")
        .ok_or_else(|| format!("expected start..end:step, got {spec:?}"))?;
    let start: usize = start.parse().map_err(|_| format!("bad start in {spec:?}"))?;
    let end: usize = end.parse().map_err(|_| format!("bad end in {spec:?}"))?;
    let step: usize = step.parse().map_err(|_| format!("bad step in {spec:?}"))?;
    if step == 0 || end < start {
        return Err(format!("empty range {spec:?}"));
    }
    Ok((start..=end).step_by(step).collect())
}

/// Runs the parsed command. Exit status: 0 on success, 1 on configuration
/// problems, 2 on runtime failure.
pub fn cli_main(argv: Vec<String>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = match load_config(&config.config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("slcm: {e}");
                    return 1;
                }
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let run = match run_scenario(&cfg) {
                Ok(run) => run,
                Err(e) => {
                    eprintln!("slcm: {e}");
                    return 2;
                }
            };
            let dir = out_dir(out);
            let trace_path = dir.join("trace.tsv");
            let csv_path = dir.join("summary.csv");
            let csv = format!("{CSV_HEADER}\n{}\n", run.summary.csv_row());
            if let Err(e) = fs::create_dir_all(&dir)
                .and_then(|_| fs::write(&trace_path, &run.trace))
                .and_then(|_| fs::write(&csv_path, &csv))
            {
                eprintln!("slcm: cannot write outputs: {e}");
                return 2;
            }
            println!(
                "wrote {} ({} lines) and {}",
                trace_path.display(),
                run.trace.lines().count(),
                csv_path.display()
            );
            println!("{CSV_HEADER}");
            println!("{}", run.summary.csv_row());
            0
        }
        Command::Sweep {
            config,
            nodes,
            seeds,
            out,
        } => {
            let cfg = match load_config(&config.config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("slcm: {e}");
                    return 1;
                }
            };
            let counts = match parse_node_range(&nodes) {
                Ok(counts) => counts,
                Err(e) => {
                    eprintln!("slcm: {e}");
                    return 1;
                }
            };
            if seeds == 0 {
                eprintln!("slcm: --seeds must be at least 1");
                return 1;
            }
            let seed_list: Vec<u64> = (0..seeds as u64).map(|i| cfg.seed + i).collect();
            let rows = match sweep_rows(&cfg, &counts, &seed_list) {
                Ok(rows) => rows,
                Err(e) => {
                    eprintln!("slcm: {e}");
                    return 2;
                }
            };
            let dir = out_dir(out);
            let mut csv = String::from(CSV_HEADER);
            csv.push('\n');
            for row in &rows {
                csv.push_str(&row.summary.csv_row());
                csv.push('\n');
            }
            let path = dir.join("sweep.csv");
            if let Err(e) =
                fs::create_dir_all(&dir).and_then(|_| fs::write(&path, csv.as_bytes()))
            {
                eprintln!("slcm: cannot write outputs: {e}");
                return 2;
            }
            println!("wrote {} ({} rows)", path.display(), rows.len());
            0
        }
        Command::CompareBroadcast { config, seeds } => {
            let cfg = match load_config(&config.config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("slcm: {e}");
                    return 1;
                }
            };
            match compare_broadcast(&cfg, seeds) {
                Ok(cmp) => {
                    println!("gri={} flood={} ratio={:.6}", cmp.gri, cmp.flood, cmp.ratio);
                    0
                }
                Err(e) => {
                    eprintln!("slcm: {e}");
                    2
                }
            }
        }
        Command::ZkpBench {
            rounds,
            trials,
            seed,
        } => {
            if rounds == 0 || trials == 0 {
                eprintln!("slcm: --rounds and --trials must be positive");
                return 1;
            }
            let report = zkp_bench(rounds, trials, seed);
            println!(
                "honest accepted: {}/{} (rate {:.6})",
                report.honest_accepted,
                report.trials,
                report.honest_rate()
            );
            println!(
                "cheat accepted: {}/{} (rate {:.6}, expected {:.6})",
                report.cheat_accepted,
                report.trials,
                report.cheat_rate(),
                report.expected_cheat_rate
            );
            0
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(cli_main(std::env::args().collect()))
}
