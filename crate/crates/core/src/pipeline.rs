//! Dataset orchestration over a directory holding `manifest.jsonl`: balanced
//! generation, labelling, learned-clause augmentation, statistics and graph
//! export. All work is spread over the current rayon pool; outputs depend
//! only on the configuration, never on the worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{evaluate, parse_dimacs_str, write_dimacs, write_dimacs_with_provenance, CnfFormula, DimacsError};
use crate::graph::{build_graph, graph_stats, serialize_graph, GraphError, GraphKind, GraphRecord, Labels};
use crate::instances::{
    sample_instance, Difficulty, Family, FamilyParams, GenError, GeneratedInstance, GeneratorConfig, Instance,
};
use crate::solver::{
    augment_with_learned_clauses, extract_unsat_core_with, solve, unsat_core_variable_labels, SolveStatus,
    SolverConfig, SolverError,
};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Candidates generated per parallel batch during rejection sampling.
const BATCH: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown split `{s}` (expected train, valid or test)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Sat,
    Unsat,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
        }
    }

    fn from_bool(sat: bool) -> Status {
        if sat {
            Status::Sat
        } else {
            Status::Unsat
        }
    }
}

/// Default pairs per split for a desk-scale dataset.
pub const DEFAULT_PAIRS: [(Split, usize); 3] = [(Split::Train, 2000), (Split::Valid, 200), (Split::Test, 200)];

#[derive(Clone, Debug)]
pub struct DatasetConfig {
    pub family: Family,
    pub difficulty: Difficulty,
    pub master_seed: u64,
    /// SAT/UNSAT pairs wanted per split, filled in this order.
    pub pairs: Vec<(Split, usize)>,
    pub solver: SolverConfig,
    /// Candidates examined per wanted instance before giving up on a split.
    pub candidate_budget: u64,
}

impl DatasetConfig {
    pub fn new(family: Family, difficulty: Difficulty, master_seed: u64) -> DatasetConfig {
        DatasetConfig {
            family,
            difficulty,
            master_seed,
            pairs: DEFAULT_PAIRS.to_vec(),
            solver: SolverConfig::default(),
            candidate_budget: 200,
        }
    }
}

/// One line of `manifest.jsonl`. SR pair members share their index and
/// differ in `status`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub family: Family,
    pub difficulty: Difficulty,
    pub index: u64,
    pub seed: u64,
    pub params: FamilyParams,
    /// Relative to the dataset directory, `/`-separated.
    pub path: String,
    pub status: Status,
    pub split: Split,
}

impl ManifestRecord {
    pub fn label_path(&self) -> String {
        sibling(&self.path, ".label")
    }

    pub fn augmented_path(&self) -> String {
        sibling(&self.path, "_aug.cnf")
    }
}

fn sibling(path: &str, suffix: &str) -> String {
    format!("{}{suffix}", path.strip_suffix(".cnf").unwrap_or(path))
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Dimacs {
        path: String,
        #[source]
        source: DimacsError,
    },
    #[error("no {MANIFEST_FILE} in {}", .0.display())]
    MissingManifest(PathBuf),
    #[error("{}:{line}: {message}", path.display())]
    Manifest {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error(
        "{family} {difficulty} {split}: bucket starvation after {examined} candidates \
         (sat {sat}/{wanted}, unsat {unsat}/{wanted}, acceptance ratio {ratio:.4})"
    )]
    Starvation {
        family: Family,
        difficulty: Difficulty,
        split: Split,
        examined: u64,
        sat: usize,
        unsat: usize,
        wanted: usize,
        ratio: f64,
    },
    #[error("{path}: {source}")]
    Solver {
        path: String,
        #[source]
        source: SolverError,
    },
    #[error("{path}: {message}")]
    Verification { path: String, message: String },
    #[error("{path}: malformed label file: {message}")]
    Label { path: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_error(parent))?;
    }
    fs::write(path, contents).map_err(io_error(path))
}

/// Removes an output left by an earlier run, so quarantined instances never
/// keep outdated labels.
fn remove_stale(path: &Path) -> Result<(), PipelineError> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(io_error(path)(e)),
        _ => Ok(()),
    }
}

/// Reads and parses a DIMACS file of the dataset.
pub fn read_formula(dir: &Path, relative: &str) -> Result<CnfFormula, PipelineError> {
    let path = dir.join(relative);
    let text = fs::read_to_string(&path).map_err(io_error(&path))?;
    parse_dimacs_str(&text).map_err(|source| PipelineError::Dimacs {
        path: relative.to_string(),
        source,
    })
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestRecord>, PipelineError> {
    let path = dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(PipelineError::MissingManifest(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&path).map_err(io_error(&path))?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| PipelineError::Manifest {
                path: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_manifest(dir: &Path, records: &[ManifestRecord]) -> Result<(), PipelineError> {
    let mut text = String::new();
    for record in records {
        text.push_str(&serde_json::to_string(record).expect("manifest records serialize"));
        text.push('\n');
    }
    write_file(&dir.join(MANIFEST_FILE), &text)
}

#[derive(Clone, Debug)]
pub struct GenerationReport {
    pub records: Vec<ManifestRecord>,
    /// Candidates generated (pairs count once).
    pub examined: u64,
    /// Candidates skipped because the solver hit its budget.
    pub quarantined: u64,
}

struct Candidate {
    generated: GeneratedInstance,
    /// `None` when the solver ran out of budget.
    sat: Option<bool>,
}

fn evaluate_candidate(config: &DatasetConfig, index: u64) -> Result<Candidate, PipelineError> {
    let generator = GeneratorConfig {
        family: config.family,
        difficulty: config.difficulty,
        master_seed: config.master_seed,
    };
    let generated = sample_instance(&generator, index)?;
    let sat = match &generated.instance {
        Instance::Pair { .. } => Some(true),
        Instance::Single(formula) => {
            let solver = SolverConfig {
                record_learned: false,
                ..config.solver.clone()
            };
            match solve(formula, &solver) {
                Ok(outcome) => Some(outcome.is_sat()),
                Err(SolverError::Indeterminate { .. }) => None,
                Err(source) => {
                    return Err(PipelineError::Solver {
                        path: format!("candidate {index}"),
                        source,
                    })
                }
            }
        }
    };
    Ok(Candidate { generated, sat })
}

fn file_name(config: &DatasetConfig, split: Split, index: u64, status: Status) -> String {
    format!(
        "{}/{}_{}_{:06}_{}.cnf",
        split,
        config.family,
        config.difficulty,
        index,
        status.name()
    )
}

/// Generates a balanced dataset into `out_dir` and merges its records into
/// the directory's manifest, replacing earlier records of the same family
/// and difficulty. Candidate indices are consumed in order across splits,
/// so no instance lands in two splits and reruns are byte-identical.
pub fn generate_dataset(config: &DatasetConfig, out_dir: &Path) -> Result<GenerationReport, PipelineError> {
    config
        .solver
        .validate()
        .map_err(|source| PipelineError::Solver {
            path: "solver configuration".into(),
            source,
        })?;
    let mut accepted: Vec<(ManifestRecord, CnfFormula)> = Vec::new();
    let mut next_index = 0u64;
    let mut examined = 0u64;
    let mut quarantined = 0u64;

    for &(split, wanted) in &config.pairs {
        let (mut sat, mut unsat) = (0usize, 0usize);
        let budget = config.candidate_budget.max(1) * 2 * wanted as u64;
        let mut examined_here = 0u64;
        'split: while sat < wanted || unsat < wanted {
            if examined_here >= budget {
                return Err(PipelineError::Starvation {
                    family: config.family,
                    difficulty: config.difficulty,
                    split,
                    examined: examined_here,
                    sat,
                    unsat,
                    wanted,
                    ratio: (sat + unsat) as f64 / examined_here as f64,
                });
            }
            let batch = BATCH.min(budget - examined_here);
            let candidates: Vec<Candidate> = (next_index..next_index + batch)
                .into_par_iter()
                .map(|index| evaluate_candidate(config, index))
                .collect::<Result<_, _>>()?;
            for candidate in candidates {
                next_index += 1;
                examined += 1;
                examined_here += 1;
                let GeneratedInstance {
                    index,
                    seed,
                    params,
                    instance,
                } = candidate.generated;
                let record = |status: Status| ManifestRecord {
                    family: config.family,
                    difficulty: config.difficulty,
                    index,
                    seed,
                    params: params.clone(),
                    path: file_name(config, split, index, status),
                    status,
                    split,
                };
                match (instance, candidate.sat) {
                    (Instance::Pair { sat: s, unsat: u }, _) => {
                        accepted.push((record(Status::Sat), s));
                        accepted.push((record(Status::Unsat), u));
                        sat += 1;
                        unsat += 1;
                    }
                    (Instance::Single(_), None) => quarantined += 1,
                    (Instance::Single(f), Some(true)) if sat < wanted => {
                        accepted.push((record(Status::Sat), f));
                        sat += 1;
                    }
                    (Instance::Single(f), Some(false)) if unsat < wanted => {
                        accepted.push((record(Status::Unsat), f));
                        unsat += 1;
                    }
                    _ => {}
                }
                if sat >= wanted && unsat >= wanted {
                    break 'split;
                }
            }
        }
    }

    accepted
        .par_iter()
        .try_for_each(|(record, formula)| write_file(&out_dir.join(&record.path), &write_dimacs_with_provenance(formula)))?;

    let records: Vec<ManifestRecord> = accepted.into_iter().map(|(r, _)| r).collect();
    let mut manifest = match read_manifest(out_dir) {
        Ok(existing) => existing,
        Err(PipelineError::MissingManifest(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    manifest.retain(|r| !(r.family == config.family && r.difficulty == config.difficulty));
    manifest.extend(records.iter().cloned());
    write_manifest(out_dir, &manifest)?;

    Ok(GenerationReport {
        records,
        examined,
        quarantined,
    })
}

/// Verified ground truth for one formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Sat {
        assignment: Vec<bool>,
    },
    Unsat {
        core: Vec<usize>,
        core_variables: Vec<bool>,
    },
}

impl Label {
    pub fn status(&self) -> Status {
        match self {
            Label::Sat { .. } => Status::Sat,
            Label::Unsat { .. } => Status::Unsat,
        }
    }

    /// Text form stored next to the instance:
    ///
    /// ```text
    /// status sat            status unsat
    /// assignment 0110       core 0 3 7
    ///                       core_vars 0101
    /// ```
    pub fn to_text(&self) -> String {
        let bits = |v: &[bool]| -> String { v.iter().map(|&b| if b { '1' } else { '0' }).collect() };
        match self {
            Label::Sat { assignment } => format!("status sat\nassignment {}\n", bits(assignment)),
            Label::Unsat { core, core_variables } => {
                let mut text = String::from("status unsat\ncore");
                for index in core {
                    write!(text, " {index}").expect("write to String");
                }
                format!("{text}\ncore_vars {}\n", bits(core_variables))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Label, String> {
        let mut status = None;
        let mut assignment = None;
        let mut core = None;
        let mut core_variables = None;
        let bits = |s: &str| -> Result<Vec<bool>, String> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(format!("bad bit `{c}`")),
                })
                .collect()
        };
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "status" => status = Some(value.trim().to_string()),
                "assignment" => assignment = Some(bits(value.trim())?),
                "core_vars" => core_variables = Some(bits(value.trim())?),
                "core" => {
                    core = Some(
                        value
                            .split_whitespace()
                            .map(|t| t.parse().map_err(|_| format!("bad clause index `{t}`")))
                            .collect::<Result<Vec<usize>, String>>()?,
                    )
                }
                other => return Err(format!("unknown key `{other}`")),
            }
        }
        match status.as_deref() {
            Some("sat") => Ok(Label::Sat {
                assignment: assignment.ok_or("missing assignment")?,
            }),
            Some("unsat") => Ok(Label::Unsat {
                core: core.ok_or("missing core")?,
                core_variables: core_variables.ok_or("missing core_vars")?,
            }),
            Some(other) => Err(format!("unknown status `{other}`")),
            None => Err("missing status".into()),
        }
    }
}

/// Solves `formula` and machine-checks the result: models against every
/// clause, cores by re-solving the core sub-formula.
pub fn label_formula(formula: &CnfFormula, config: &SolverConfig) -> Result<Label, LabelError> {
    let config = SolverConfig {
        record_learned: false,
        ..config.clone()
    };
    match solve(formula, &config)?.status {
        SolveStatus::Sat(model) => {
            let check = evaluate(formula, &model).map_err(|e| LabelError::Invalid(e.to_string()))?;
            if !check.satisfied {
                return Err(LabelError::Invalid(format!(
                    "model falsifies clauses {:?}",
                    check.unsat_clauses
                )));
            }
            Ok(Label::Sat {
                assignment: model.values().to_vec(),
            })
        }
        SolveStatus::Unsat => {
            let core = extract_unsat_core_with(formula, &config)?;
            if solve(&formula.subformula(&core.clause_indices), &config)?.is_sat() {
                return Err(LabelError::Invalid("core sub-formula is satisfiable".into()));
            }
            let core_variables = unsat_core_variable_labels(formula, &core);
            Ok(Label::Unsat {
                core: core.clause_indices,
                core_variables,
            })
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LabelError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("label failed verification: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default)]
pub struct LabelReport {
    pub labeled: usize,
    /// Instances left unlabelled because the solver hit its budget.
    pub quarantined: Vec<String>,
}

/// Writes a verified `.label` file next to every manifest instance.
pub fn label_dataset(dir: &Path, config: &SolverConfig) -> Result<LabelReport, PipelineError> {
    let records = read_manifest(dir)?;
    let results: Vec<Option<String>> = records
        .par_iter()
        .map(|record| {
            let formula = read_formula(dir, &record.path)?;
            let label = match label_formula(&formula, config) {
                Ok(label) => label,
                Err(LabelError::Solver(SolverError::Indeterminate { .. })) => {
                    remove_stale(&dir.join(record.label_path()))?;
                    return Ok(Some(record.path.clone()));
                }
                Err(LabelError::Solver(source)) => {
                    return Err(PipelineError::Solver {
                        path: record.path.clone(),
                        source,
                    })
                }
                Err(LabelError::Invalid(message)) => {
                    return Err(PipelineError::Verification {
                        path: record.path.clone(),
                        message,
                    })
                }
            };
            if label.status() != record.status {
                return Err(PipelineError::Verification {
                    path: record.path.clone(),
                    message: format!(
                        "manifest says {} but the solver says {}",
                        record.status.name(),
                        label.status().name()
                    ),
                });
            }
            write_file(&dir.join(record.label_path()), &label.to_text())?;
            Ok(None)
        })
        .collect::<Result<_, PipelineError>>()?;
    let quarantined: Vec<String> = results.into_iter().flatten().collect();
    Ok(LabelReport {
        labeled: records.len() - quarantined.len(),
        quarantined,
    })
}

pub fn read_label(dir: &Path, relative: &str) -> Result<Option<Label>, PipelineError> {
    let path = dir.join(relative);
    if !path.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(io_error(&path))?;
    Label::parse(&text).map(Some).map_err(|message| PipelineError::Label {
        path: relative.to_string(),
        message,
    })
}

#[derive(Clone, Debug, Default)]
pub struct AugmentReport {
    pub written: usize,
    pub appended_clauses: usize,
    pub quarantined: Vec<String>,
}

/// Writes an `_aug.cnf` sibling holding the instance plus at most `limit`
/// learned clauses, after checking that the satisfiability status is
/// unchanged.
pub fn augment_dataset(dir: &Path, limit: usize, config: &SolverConfig) -> Result<AugmentReport, PipelineError> {
    let records = read_manifest(dir)?;
    let check = SolverConfig {
        record_learned: false,
        ..config.clone()
    };
    let results: Vec<Result<usize, String>> = records
        .par_iter()
        .map(|record| {
            let formula = read_formula(dir, &record.path)?;
            let solver_error = |source: SolverError| PipelineError::Solver {
                path: record.path.clone(),
                source,
            };
            let quarantine = || -> Result<Result<usize, String>, PipelineError> {
                remove_stale(&dir.join(record.augmented_path()))?;
                Ok(Err(record.path.clone()))
            };
            let augmented = match augment_with_learned_clauses(&formula, limit, config) {
                Ok(f) => f,
                Err(SolverError::Indeterminate { .. }) => return quarantine(),
                Err(e) => return Err(solver_error(e)),
            };
            let appended = augmented.num_clauses() - formula.num_clauses();
            let status = match solve(&augmented, &check) {
                Ok(outcome) => Status::from_bool(outcome.is_sat()),
                Err(SolverError::Indeterminate { .. }) => return quarantine(),
                Err(e) => return Err(solver_error(e)),
            };
            if appended > limit || status != record.status {
                return Err(PipelineError::Verification {
                    path: record.augmented_path(),
                    message: format!(
                        "{appended} clauses appended (limit {limit}), status {} (expected {})",
                        status.name(),
                        record.status.name()
                    ),
                });
            }
            write_file(&dir.join(record.augmented_path()), &write_dimacs(&augmented))?;
            Ok(Ok(appended))
        })
        .collect::<Result<_, PipelineError>>()?;
    let mut report = AugmentReport::default();
    for result in results {
        match result {
            Ok(appended) => {
                report.written += 1;
                report.appended_clauses += appended;
            }
            Err(path) => report.quarantined.push(path),
        }
    }
    Ok(report)
}

/// Mean statistics of one family/difficulty group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub family: Family,
    pub difficulty: Difficulty,
    pub instances: usize,
    pub mean_vars: f64,
    pub mean_clauses: f64,
    pub clustering_vig: f64,
    pub modularity_vig: f64,
    pub modularity_vcg: f64,
    pub modularity_lcg: f64,
}

/// Per family and difficulty present in the manifest, in family then
/// difficulty order.
pub fn stats_report(dir: &Path) -> Result<Vec<StatsRow>, PipelineError> {
    let records = read_manifest(dir)?;
    let mut rows = Vec::new();
    for family in Family::ALL {
        for difficulty in Difficulty::ALL {
            let group: Vec<&ManifestRecord> = records
                .iter()
                .filter(|r| r.family == family && r.difficulty == difficulty)
                .collect();
            if group.is_empty() {
                continue;
            }
            let per_instance: Vec<[f64; 6]> = group
                .par_iter()
                .map(|record| {
                    let formula = read_formula(dir, &record.path)?;
                    let stats = graph_stats(&formula);
                    Ok([
                        formula.num_vars as f64,
                        formula.num_clauses() as f64,
                        stats.clustering_vig,
                        stats.modularity_vig,
                        stats.modularity_vcg,
                        stats.modularity_lcg,
                    ])
                })
                .collect::<Result<_, PipelineError>>()?;
            let mean = |i: usize| per_instance.iter().map(|row| row[i]).sum::<f64>() / per_instance.len() as f64;
            rows.push(StatsRow {
                family,
                difficulty,
                instances: group.len(),
                mean_vars: mean(0),
                mean_clauses: mean(1),
                clustering_vig: mean(2),
                modularity_vig: mean(3),
                modularity_vcg: mean(4),
                modularity_lcg: mean(5),
            });
        }
    }
    Ok(rows)
}

/// Aligned text table of [`stats_report`] rows.
pub fn render_stats_table(rows: &[StatsRow]) -> String {
    let mut out = format!(
        "{:<10} {:<10} {:>9} {:>10} {:>10} {:>9} {:>9} {:>9} {:>9}\n",
        "family", "difficulty", "instances", "#vars", "#clauses", "CC(VIG)", "Mod(VIG)", "Mod(VCG)", "Mod(LCG)"
    );
    for r in rows {
        writeln!(
            out,
            "{:<10} {:<10} {:>9} {:>10.2} {:>10.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
            r.family.name(),
            r.difficulty.name(),
            r.instances,
            r.mean_vars,
            r.mean_clauses,
            r.clustering_vig,
            r.modularity_vig,
            r.modularity_vcg,
            r.modularity_lcg
        )
        .expect("write to String");
    }
    out
}

/// One JSON object per row, newline-delimited.
pub fn render_stats_json(rows: &[StatsRow]) -> String {
    rows.iter()
        .map(|row| serde_json::to_string(row).expect("stats rows serialize") + "\n")
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct ExportReport {
    pub records: usize,
    /// Instances exported without label vectors.
    pub missing_labels: Vec<String>,
}

/// Writes one graph record per manifest instance to `out`, joining label
/// vectors from the `.label` files when present.
pub fn export_graphs(dir: &Path, kind: GraphKind, out: &Path) -> Result<ExportReport, PipelineError> {
    let records = read_manifest(dir)?;
    let rendered: Vec<(String, bool)> = records
        .par_iter()
        .map(|record| {
            let formula = read_formula(dir, &record.path)?;
            let label = read_label(dir, &record.label_path())?;
            let mut labels = Labels {
                sat: Some(record.status == Status::Sat),
                ..Labels::default()
            };
            match &label {
                Some(Label::Sat { assignment }) => labels.assignment = Some(assignment.clone()),
                Some(Label::Unsat { core_variables, .. }) => labels.core_variables = Some(core_variables.clone()),
                None => {}
            }
            let text = serialize_graph(&GraphRecord {
                family: record.family.name().to_string(),
                difficulty: record.difficulty.name().to_string(),
                index: record.index,
                graph: build_graph(&formula, kind),
                labels,
            })?;
            Ok((text, label.is_none()))
        })
        .collect::<Result<_, PipelineError>>()?;
    let mut text = String::new();
    let mut report = ExportReport::default();
    for ((record_text, missing), record) in rendered.into_iter().zip(&records) {
        text.push_str(&record_text);
        report.records += 1;
        if missing {
            report.missing_labels.push(record.path.clone());
        }
    }
    write_file(out, &text)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph_records;

    fn tiny(family: Family, pairs: usize) -> DatasetConfig {
        DatasetConfig {
            pairs: vec![(Split::Train, pairs)],
            ..DatasetConfig::new(family, Difficulty::Easy, 7)
        }
    }

    #[test]
    fn one_sr_pair_gives_two_files() {
        let dir = tempfile::tempdir().unwrap();
        let report = generate_dataset(&tiny(Family::Sr, 1), dir.path()).unwrap();
        assert_eq!(report.records.len(), 2);
        let statuses: Vec<Status> = report.records.iter().map(|r| r.status).collect();
        assert_eq!(statuses, vec![Status::Sat, Status::Unsat]);
        for r in &report.records {
            assert!(dir.path().join(&r.path).is_file());
        }
        assert_eq!(read_manifest(dir.path()).unwrap(), report.records);
    }

    #[test]
    fn label_text_round_trip() {
        for label in [
            Label::Sat {
                assignment: vec![true, false],
            },
            Label::Unsat {
                core: vec![0, 4],
                core_variables: vec![true, false, true],
            },
            Label::Unsat {
                core: vec![],
                core_variables: vec![],
            },
        ] {
            assert_eq!(Label::parse(&label.to_text()).unwrap(), label);
        }
        assert!(Label::parse("status maybe\n").is_err());
        assert!(Label::parse("status sat\n").is_err());
    }

    #[test]
    fn label_formula_checks_results() {
        let sat = CnfFormula::from_dimacs_clauses(&[&[1, -2], &[1, 3], &[-1, 2, 3]]);
        assert!(matches!(label_formula(&sat, &SolverConfig::default()), Ok(Label::Sat { .. })));
        let unsat = CnfFormula::from_dimacs_clauses(&[&[1], &[-1], &[2]]);
        assert_eq!(
            label_formula(&unsat, &SolverConfig::default()).unwrap(),
            Label::Unsat {
                core: vec![0, 1],
                core_variables: vec![true, false],
            }
        );
    }

    #[test]
    fn empty_manifest_gives_empty_outputs() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(stats_report(dir.path()), Err(PipelineError::MissingManifest(_))));
        write_manifest(dir.path(), &[]).unwrap();
        assert!(stats_report(dir.path()).unwrap().is_empty());
        let out = dir.path().join("graphs.txt");
        assert_eq!(export_graphs(dir.path(), GraphKind::Vig, &out).unwrap().records, 0);
        assert!(parse_graph_records(&fs::read_to_string(out).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn starvation_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let config = DatasetConfig {
            candidate_budget: 1,
            pairs: vec![(Split::Train, 3)],
            ..DatasetConfig::new(Family::Ps, Difficulty::Easy, 1)
        };
        match generate_dataset(&config, dir.path()) {
            Err(PipelineError::Starvation { examined, wanted, .. }) => {
                assert_eq!(wanted, 3);
                assert_eq!(examined, 6);
            }
            other => panic!("expected starvation, got {other:?}"),
        }
    }
}
