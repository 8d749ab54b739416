use std::path::PathBuf;

use dxasp_core::eval::{count_terms, evaluate, load_dataset, EvalOptions};
use dxasp_core::explain::render_tree;
use dxasp_core::lang::{check_fragment, parse_atom, parse_program_from, Program};
use dxasp_core::solve::Mode;
use dxasp_core::{diagnose, Config};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> Program {
    let path = fixture(name);
    let text = std::fs::read_to_string(&path).unwrap();
    parse_program_from(&text, Some(name)).unwrap()
}

#[test]
fn knowledge_base_sizes() {
    for (name, size) in [("chickenpox.lp", 66), ("pneumonia.lp", 75), ("common_cold.lp", 44)] {
        let kb = load(name);
        check_fragment(&kb).unwrap();
        assert_eq!(count_terms(&kb), size, "{name}");
    }
}

#[test]
fn chickenpox_tree_matches_golden() {
    let program = load("chickenpox.lp").concat(&load("patient1.lp"));
    let d = diagnose(&program, &Config::default()).unwrap();
    assert_eq!(d.result.optimal_cost, Some(0));
    let tree = d.explain(&parse_atom("diagnosis(chickenpox)").unwrap()).unwrap();
    let golden = std::fs::read_to_string(fixture("chickenpox_explanation.txt")).unwrap();
    assert_eq!(render_tree(&tree), golden);
}

#[test]
fn dataset_accuracy_per_disease() {
    let records = load_dataset(fixture("dataset.csv")).unwrap();
    assert_eq!(records.len(), 60);
    for (disease, expected) in [("chickenpox", 0.95), ("pneumonia", 1.0), ("common_cold", 1.0)] {
        let kb = load(&format!("{disease}.lp"));
        let subset: Vec<_> = records.iter().filter(|r| r.label == disease).cloned().collect();
        assert_eq!(subset.len(), 20);
        let report = evaluate(&kb, &subset, &EvalOptions::default()).unwrap();
        assert!(report.warnings.is_empty());
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].accuracy, expected, "{disease}");
        assert_eq!(report.rows[0].kb_size, count_terms(&kb));
    }
}

#[test]
fn cautious_never_beats_brave_on_fixtures() {
    let records = load_dataset(fixture("dataset.csv")).unwrap();
    let kb = load("chickenpox.lp");
    let brave = evaluate(&kb, &records, &EvalOptions::default()).unwrap();
    let cautious = evaluate(
        &kb,
        &records,
        &EvalOptions { mode: Mode::Cautious, ..Default::default() },
    )
    .unwrap();
    for (b, c) in brave.records.iter().zip(&cautious.records) {
        assert!(!c.correct || b.correct);
    }
}
