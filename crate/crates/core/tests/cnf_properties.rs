mod common;

use proptest::prelude::*;
use satforge::cnf::{count_unsat, evaluate, parse_dimacs_str, write_dimacs, write_dimacs_with_provenance, Provenance};

proptest! {
    #[test]
    fn dimacs_round_trip(f in common::formula(30, 40, 6)) {
        let text = write_dimacs(&f);
        prop_assert_eq!(parse_dimacs_str(&text).unwrap(), f.clone());
        let g = parse_dimacs_str(&text).unwrap();
        prop_assert_eq!(write_dimacs(&g), text);
    }

    #[test]
    fn provenance_comments_are_ignored_by_the_parser(f in common::formula(10, 10, 4), seed in any::<u64>()) {
        let tagged = f.clone().with_provenance(Provenance {
            family: "sr".into(),
            difficulty: "easy".into(),
            index: 3,
            seed,
            params: vec![("n".into(), 10.0)],
        });
        let text = write_dimacs_with_provenance(&tagged);
        prop_assert!(text.starts_with("c family sr\n"));
        prop_assert_eq!(parse_dimacs_str(&text).unwrap(), f);
    }

    #[test]
    fn count_unsat_agrees_with_evaluate((f, a) in common::formula_and_assignment(15, 40, 5)) {
        let e = evaluate(&f, &a).unwrap();
        prop_assert_eq!(count_unsat(&f, &a).unwrap(), e.unsat_clauses.len());
        prop_assert_eq!(e.satisfied, e.unsat_clauses.is_empty());
        for (i, clause) in f.clauses.iter().enumerate() {
            prop_assert_eq!(clause.is_satisfied_by(&a), !e.unsat_clauses.contains(&i));
        }
    }

    #[test]
    fn subformula_never_has_more_falsified_clauses((f, a) in common::formula_and_assignment(10, 20, 4), keep in prop::collection::vec(any::<bool>(), 20)) {
        let indices: Vec<usize> = (0..f.num_clauses()).filter(|&i| keep[i]).collect();
        let sub = f.subformula(&indices);
        prop_assert!(count_unsat(&sub, &a).unwrap() <= count_unsat(&f, &a).unwrap());
    }
}
