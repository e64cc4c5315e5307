use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use satforge::cnf::{parse_dimacs_str, CnfFormula};
use satforge::graph::GraphKind;
use satforge::instances::{Difficulty, Family};
use satforge::local_search::{gsat, trace_metrics, LsConfig};
use satforge::pipeline::{
    augment_dataset, export_graphs, generate_dataset, label_dataset, render_stats_json, render_stats_table,
    stats_report, DatasetConfig, PipelineError, Split, Status, DEFAULT_PAIRS,
};
use satforge::solver::{solve, SolveStatus, SolverConfig, SolverError, DEFAULT_AUGMENT_LIMIT};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INDETERMINATE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "satforge", version, about = "Procedural SAT benchmark forge")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "SATFORGE_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a balanced SAT/UNSAT dataset and its manifest.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value = "easy")]
        difficulty: Difficulty,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pairs per requested split; defaults to 2000/200/200.
        #[arg(long)]
        pairs: Option<usize>,
        /// Splits to fill, in order.
        #[arg(long, value_delimiter = ',', default_values_t = Split::ALL)]
        splits: Vec<Split>,
        #[arg(long)]
        out: PathBuf,
        /// Conflict budget per solve; 0 means unlimited.
        #[arg(long, default_value_t = 0)]
        conflicts: u64,
    },
    /// Write verified labels next to every instance of a dataset.
    Label {
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        conflicts: u64,
    },
    /// Write `_aug.cnf` siblings with appended learned clauses.
    Augment {
        dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_AUGMENT_LIMIT)]
        limit: usize,
        #[arg(long, default_value_t = 0)]
        conflicts: u64,
    },
    /// Mean size and graph statistics per family and difficulty.
    Stats {
        dir: PathBuf,
        /// Emit newline-delimited JSON rows instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Serialize every instance as a graph record.
    ExportGraphs {
        dir: PathBuf,
        #[arg(long, default_value = "lcg")]
        kind: GraphKind,
        /// Defaults to `<dir>/graphs_<kind>.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one DIMACS file.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        conflicts: u64,
    },
    /// Run GSAT on one DIMACS file.
    Gsat {
        file: PathBuf,
        #[arg(long, default_value_t = 32)]
        max_flips: usize,
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print every step of the trace.
        #[arg(long)]
        trace: bool,
    },
}

enum Outcome {
    Done,
    Indeterminate(String),
}

fn solver_config(conflicts: u64) -> SolverConfig {
    SolverConfig {
        conflict_budget: conflicts,
        ..SolverConfig::default()
    }
}

fn read_formula(path: &Path) -> anyhow::Result<CnfFormula> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn quarantine(what: &str, paths: &[String]) -> Outcome {
    if paths.is_empty() {
        return Outcome::Done;
    }
    for path in paths {
        eprintln!("quarantined {path}");
    }
    Outcome::Indeterminate(format!("{} instances not {what}: conflict budget exhausted", paths.len()))
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Generate {
            family,
            difficulty,
            seed,
            pairs,
            splits,
            out,
            conflicts,
        } => {
            let pairs = splits
                .into_iter()
                .map(|split| {
                    let default = DEFAULT_PAIRS.iter().find(|(s, _)| *s == split).map(|(_, n)| *n);
                    (split, pairs.or(default).unwrap_or(0))
                })
                .collect();
            let config = DatasetConfig {
                pairs,
                solver: solver_config(conflicts),
                ..DatasetConfig::new(family, difficulty, seed)
            };
            let report = generate_dataset(&config, &out)?;
            let sat = report.records.iter().filter(|r| r.status == Status::Sat).count();
            writeln!(
                stdout,
                "{family} {difficulty}: {} instances ({sat} sat, {} unsat) from {} candidates, {} quarantined, written to {}",
                report.records.len(),
                report.records.len() - sat,
                report.examined,
                report.quarantined,
                out.display()
            )?;
            Ok(Outcome::Done)
        }
        Command::Label { dir, conflicts } => {
            let report = label_dataset(&dir, &solver_config(conflicts))?;
            writeln!(stdout, "labeled {} instances", report.labeled)?;
            Ok(quarantine("labeled", &report.quarantined))
        }
        Command::Augment { dir, limit, conflicts } => {
            let report = augment_dataset(&dir, limit, &solver_config(conflicts))?;
            writeln!(
                stdout,
                "augmented {} instances with {} learned clauses",
                report.written, report.appended_clauses
            )?;
            Ok(quarantine("augmented", &report.quarantined))
        }
        Command::Stats { dir, json } => {
            let rows = stats_report(&dir)?;
            let text = if json {
                render_stats_json(&rows)
            } else {
                render_stats_table(&rows)
            };
            stdout.write_all(text.as_bytes())?;
            Ok(Outcome::Done)
        }
        Command::ExportGraphs { dir, kind, out } => {
            let out = out.unwrap_or_else(|| dir.join(format!("graphs_{kind}.txt")));
            let report = export_graphs(&dir, kind, &out)?;
            for path in &report.missing_labels {
                eprintln!("no label for {path}; exported without label vectors");
            }
            writeln!(stdout, "exported {} {kind} records to {}", report.records, out.display())?;
            Ok(Outcome::Done)
        }
        Command::Solve { file, conflicts } => {
            let formula = read_formula(&file)?;
            let config = SolverConfig {
                record_learned: false,
                ..solver_config(conflicts)
            };
            match solve(&formula, &config) {
                Ok(outcome) => {
                    writeln!(
                        stdout,
                        "c conflicts {} decisions {} propagations {} restarts {}",
                        outcome.stats.conflicts,
                        outcome.stats.decisions,
                        outcome.stats.propagations,
                        outcome.stats.restarts
                    )?;
                    match outcome.status {
                        SolveStatus::Sat(model) => {
                            writeln!(stdout, "s SATISFIABLE")?;
                            let mut line = String::from("v");
                            for (i, &value) in model.values().iter().enumerate() {
                                let var = i as i64 + 1;
                                line.push_str(&format!(" {}", if value { var } else { -var }));
                            }
                            writeln!(stdout, "{line} 0")?;
                        }
                        SolveStatus::Unsat => writeln!(stdout, "s UNSATISFIABLE")?,
                    }
                    Ok(Outcome::Done)
                }
                Err(e @ SolverError::Indeterminate { .. }) => {
                    writeln!(stdout, "s UNKNOWN")?;
                    Ok(Outcome::Indeterminate(e.to_string()))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Gsat {
            file,
            max_flips,
            restarts,
            seed,
            trace,
        } => {
            let formula = read_formula(&file)?;
            let outcome = gsat(
                &formula,
                &LsConfig {
                    max_flips,
                    max_restarts: restarts,
                    seed,
                },
            );
            if trace {
                for step in &outcome.trace.steps {
                    let flipped = step.flipped.map_or_else(|| "-".to_string(), |v| v.to_string());
                    writeln!(stdout, "t {} {} {flipped} {}", step.try_index, step.step, step.unsat)?;
                }
            }
            let metrics = trace_metrics(&outcome.trace);
            writeln!(
                stdout,
                "c flips {} final_unsat {} distinct_assignments {}",
                outcome.trace.num_flips(),
                outcome.trace.final_unsat().unwrap_or(0),
                metrics.distinct_assignments
            )?;
            writeln!(stdout, "s {}", if outcome.solved { "SOLVED" } else { "UNSOLVED" })?;
            Ok(Outcome::Done)
        }
    }
}

fn is_indeterminate(error: &anyhow::Error) -> bool {
    error.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<SolverError>(),
            Some(SolverError::Indeterminate { .. })
        )
    }) || matches!(
        error.downcast_ref::<PipelineError>(),
        Some(PipelineError::Solver {
            source: SolverError::Indeterminate { .. },
            ..
        })
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Indeterminate(message)) => {
            eprintln!("indeterminate: {message}");
            ExitCode::from(EXIT_INDETERMINATE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_indeterminate(&e) {
                EXIT_INDETERMINATE
            } else {
                EXIT_DATA
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indeterminate_errors_are_recognised() {
        let direct = anyhow::Error::new(SolverError::Indeterminate { conflicts: 3 });
        assert!(is_indeterminate(&direct));
        let wrapped = anyhow::Error::new(PipelineError::Solver {
            path: "a.cnf".into(),
            source: SolverError::Indeterminate { conflicts: 3 },
        });
        assert!(is_indeterminate(&wrapped));
        assert!(!is_indeterminate(&anyhow::anyhow!("disk full")));
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from(["satforge", "--jobs", "3", "generate", "--family", "clique", "--out", "d"]).unwrap();
        assert_eq!(cli.jobs, 3);
        match cli.command {
            Command::Generate {
                family,
                difficulty,
                splits,
                pairs,
                ..
            } => {
                assert_eq!(family, Family::KClique);
                assert_eq!(difficulty, Difficulty::Easy);
                assert_eq!(splits, Split::ALL.to_vec());
                assert_eq!(pairs, None);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(Cli::try_parse_from(["satforge", "export-graphs", "d", "--kind", "lcg*"]).is_ok());
        assert!(Cli::try_parse_from(["satforge", "export-graphs", "d", "--kind", "aig"]).is_err());
    }
}
