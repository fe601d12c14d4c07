//! Mutant counts per operator against counts taken from the source text.

use asrefine_core::fixture::Fixture;
use asrefine_core::model::parse_model;
use asrefine_core::mutation::{apply, enumerate_mutants, Operator};

fn actions_text(src: &str) -> &str {
    &src[src.find("actions").unwrap()..src.find("dood").unwrap()]
}

fn scan(op: Operator, src: &str) -> usize {
    let a = actions_text(src);
    match op {
        Operator::GuardTrue => a.matches("=>").count() - a.matches("(true) =>").count(),
        Operator::CompOpInvert => a.matches("#=").count() + a.matches("#\\=").count(),
        Operator::IntConstIncrement => {
            let b = a.as_bytes();
            (0..b.len())
                .filter(|&i| b[i].is_ascii_digit() && (i == 0 || !(b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_')))
                .count()
        }
    }
}

#[test]
fn counts_match_the_text_on_every_fixture() {
    for f in Fixture::ALL {
        let src = f.source();
        let m = parse_model(&src).unwrap();
        for op in Operator::ALL {
            assert_eq!(enumerate_mutants(&m, &[op]).len(), scan(op, &src), "{f} {op}");
        }
    }
}

#[test]
fn golden_totals() {
    let m = parse_model(&Fixture::Cas1.source()).unwrap();
    let counts: Vec<usize> = Operator::ALL.iter().map(|&op| enumerate_mutants(&m, &[op]).len()).collect();
    assert_eq!(counts, vec![30, 74, 122]);
}

#[test]
fn every_mutant_differs_reparses_and_reapplies() {
    let m = parse_model(&Fixture::Cas1.source()).unwrap();
    for mutant in enumerate_mutants(&m, &Operator::ALL) {
        assert_ne!(mutant.model, m, "{}", mutant.spec);
        let reparsed = parse_model(&mutant.model.to_string()).unwrap();
        assert_eq!(reparsed, mutant.model, "{}", mutant.spec);
        assert_eq!(apply(&m, &mutant.spec).unwrap(), mutant.model);
    }
}
