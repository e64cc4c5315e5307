use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use satforge::cnf::{evaluate, parse_dimacs_str, write_dimacs, Assignment};
use satforge::graph::{parse_graph_records, GraphKind};
use satforge::instances::{Difficulty, Family};
use satforge::pipeline::{
    augment_dataset, export_graphs, generate_dataset, label_dataset, read_formula, read_label, read_manifest,
    stats_report, DatasetConfig, Label, Split, Status,
};
use satforge::solver::{is_satisfiable, SolverConfig};

fn config(family: Family, pairs: [usize; 3]) -> DatasetConfig {
    DatasetConfig {
        pairs: Split::ALL.into_iter().zip(pairs).collect(),
        ..DatasetConfig::new(family, Difficulty::Easy, 5)
    }
}

#[test]
fn splits_are_balanced_and_disjoint() {
    let dir = tempfile::tempdir().unwrap();
    let report = generate_dataset(&config(Family::ThreeSat, [6, 2, 2]), dir.path()).unwrap();
    let mut per_split: BTreeMap<(Split, &str), usize> = BTreeMap::new();
    for r in &report.records {
        *per_split.entry((r.split, r.status.name())).or_default() += 1;
        assert_eq!(
            is_satisfiable(&read_formula(dir.path(), &r.path).unwrap()).unwrap(),
            r.status == Status::Sat
        );
    }
    for (split, n) in [(Split::Train, 6), (Split::Valid, 2), (Split::Test, 2)] {
        assert_eq!(per_split[&(split, "sat")], n);
        assert_eq!(per_split[&(split, "unsat")], n);
    }
    let keys: BTreeSet<u64> = report.records.iter().map(|r| r.index).collect();
    assert_eq!(keys.len(), report.records.len());
    let ratio = report.records.len() as f64 / report.examined as f64;
    assert!(ratio > 0.5, "acceptance ratio {ratio}");
}

#[test]
fn sr_pairs_differ_in_one_literal() {
    let dir = tempfile::tempdir().unwrap();
    let report = generate_dataset(&config(Family::Sr, [3, 1, 1]), dir.path()).unwrap();
    assert_eq!(report.records.len(), 10);
    for pair in report.records.chunks(2) {
        assert_eq!(pair[0].index, pair[1].index);
        assert_eq!((pair[0].status, pair[1].status), (Status::Sat, Status::Unsat));
        let sat = read_formula(dir.path(), &pair[0].path).unwrap();
        let unsat = read_formula(dir.path(), &pair[1].path).unwrap();
        assert_eq!(sat.num_clauses(), unsat.num_clauses());
        let last = sat.num_clauses() - 1;
        assert_eq!(sat.clauses[..last], unsat.clauses[..last]);
        let differing = sat.clauses[last]
            .iter()
            .zip(unsat.clauses[last].iter())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(differing, 1);
    }
}

#[test]
fn manifest_merges_families_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = generate_dataset(&config(Family::Ca, [2, 1, 1]), dir.path()).unwrap();
    let snapshot = fs::read(dir.path().join(&first.records[0].path)).unwrap();
    generate_dataset(&config(Family::KDomset, [1, 0, 0]), dir.path()).unwrap();
    let again = generate_dataset(&config(Family::Ca, [2, 1, 1]), dir.path()).unwrap();
    assert_eq!(first.records, again.records);
    assert_eq!(fs::read(dir.path().join(&first.records[0].path)).unwrap(), snapshot);
    let manifest = read_manifest(dir.path()).unwrap();
    assert_eq!(manifest.len(), 8 + 2);
    assert_eq!(manifest.iter().filter(|r| r.family == Family::KDomset).count(), 2);
}

#[test]
fn labels_augmentation_and_export_agree() {
    let dir = tempfile::tempdir().unwrap();
    let report = generate_dataset(&config(Family::KVercov, [2, 1, 0]), dir.path()).unwrap();
    let labels = label_dataset(dir.path(), &SolverConfig::default()).unwrap();
    assert_eq!(labels.labeled, report.records.len());
    assert!(labels.quarantined.is_empty());

    for r in &report.records {
        let formula = read_formula(dir.path(), &r.path).unwrap();
        match read_label(dir.path(), &r.label_path()).unwrap().unwrap() {
            Label::Sat { assignment } => {
                assert_eq!(r.status, Status::Sat);
                assert_eq!(assignment.len(), formula.num_vars);
                assert!(evaluate(&formula, &Assignment::new(assignment)).unwrap().satisfied);
            }
            Label::Unsat { core, core_variables } => {
                assert_eq!(r.status, Status::Unsat);
                assert_eq!(core_variables.len(), formula.num_vars);
                assert!(!is_satisfiable(&formula.subformula(&core)).unwrap());
            }
        }
    }

    let copies = augment_dataset(dir.path(), 0, &SolverConfig::default()).unwrap();
    assert_eq!((copies.written, copies.appended_clauses), (report.records.len(), 0));
    for r in &report.records {
        let original = read_formula(dir.path(), &r.path).unwrap();
        let copy = fs::read_to_string(dir.path().join(r.augmented_path())).unwrap();
        assert_eq!(copy, write_dimacs(&original));
    }
    let augmented = augment_dataset(dir.path(), 15, &SolverConfig::default()).unwrap();
    assert!(augmented.appended_clauses <= 15 * report.records.len());
    for r in &report.records {
        let original = read_formula(dir.path(), &r.path).unwrap();
        let aug = parse_dimacs_str(&fs::read_to_string(dir.path().join(r.augmented_path())).unwrap()).unwrap();
        assert_eq!(aug.clauses[..original.num_clauses()], original.clauses[..]);
        assert_eq!(is_satisfiable(&aug).unwrap(), r.status == Status::Sat);
    }

    let out = dir.path().join("graphs.txt");
    let export = export_graphs(dir.path(), GraphKind::VcgStar, &out).unwrap();
    assert!(export.missing_labels.is_empty());
    let records = parse_graph_records(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(records.len(), report.records.len());
    for (record, entry) in records.iter().zip(&report.records) {
        assert_eq!(record.graph.kind, GraphKind::VcgStar);
        assert_eq!(record.index, entry.index);
        assert_eq!(record.labels.sat, Some(entry.status == Status::Sat));
        assert_eq!(record.labels.assignment.is_some(), entry.status == Status::Sat);
        assert_eq!(record.labels.core_variables.is_some(), entry.status == Status::Unsat);
        let formula = read_formula(dir.path(), &entry.path).unwrap();
        assert_eq!(record.graph.to_formula().unwrap(), formula);
    }

    let rows = stats_report(dir.path()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].instances, report.records.len());
}
