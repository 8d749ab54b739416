//! Dataset loading and per-disease accuracy reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lang::{check_fragment, normalize_symbol, Atom, Program, Rule, RuleKind, Term};
use crate::solve::{consequences, ensure_machinery, Mode};
use crate::{diagnose, Config};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatientRecord {
    pub label: String,
    pub symptoms: BTreeSet<String>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("line {line}: {source}")]
    Normalize {
        line: u64,
        source: crate::lang::Error,
    },
    #[error("line {line}: record has no symptoms")]
    EmptyRecord { line: u64 },
    #[error(transparent)]
    Fragment(#[from] crate::lang::FragmentError),
    #[error("record {index}: {source}")]
    Pipeline { index: usize, source: crate::Error },
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<PatientRecord>, EvalError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_dataset(file)
}

/// Reads a wide-format CSV: one label column (the `Disease` header, else
/// the first column) and any number of symptom cells, blanks allowed.
pub fn read_dataset<R: Read>(input: R) -> Result<Vec<PatientRecord>, EvalError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let csv_err = |e: csv::Error| EvalError::Csv {
        line: e.position().map_or(1, |p| p.line()),
        message: e.to_string(),
    };
    let label_col = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .position(|h| h.eq_ignore_ascii_case("disease"))
        .unwrap_or(0);

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line());
        let norm = |s: &str| normalize_symbol(s).map_err(|source| EvalError::Normalize { line, source });
        let label = norm(row.get(label_col).unwrap_or(""))?;
        let symptoms = row
            .iter()
            .enumerate()
            .filter(|&(i, cell)| i != label_col && !cell.is_empty())
            .map(|(_, cell)| norm(cell))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if symptoms.is_empty() {
            return Err(EvalError::EmptyRecord { line });
        }
        out.push(PatientRecord { label, symptoms });
    }
    Ok(out)
}

/// `has(symptom(s)).` for each symptom, sorted.
pub fn patient_facts(r: &PatientRecord) -> Program {
    Program::from_rules(
        r.symptoms
            .iter()
            .map(|s| {
                Rule::fact(Atom::new(
                    "has",
                    vec![Term::Compound {
                        functor: "symptom".into(),
                        args: vec![Term::Constant(s.clone())],
                    }],
                ))
            })
            .collect(),
    )
}

/// Atom occurrences across the program, the KB size metric.
pub fn count_terms(p: &Program) -> usize {
    p.rules
        .iter()
        .map(|r| match &r.kind {
            RuleKind::Fact(_) => 1,
            RuleKind::Normal { body, .. } => 1 + body.len(),
            RuleKind::Choice { .. } => 2,
            RuleKind::Constraint { body } => body.len(),
            RuleKind::Minimize { .. } => 1,
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub mode: Mode,
    /// Count a record correct only when the label is the sole prediction.
    pub exact: bool,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiseaseRow {
    pub disease: String,
    pub kb_size: usize,
    pub n_records: usize,
    pub n_correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordOutcome {
    pub index: usize,
    pub label: String,
    pub predicted: Vec<String>,
    pub cost: Option<u64>,
    pub unsat: bool,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub exact: bool,
    pub rows: Vec<DiseaseRow>,
    pub records: Vec<RecordOutcome>,
    pub warnings: Vec<String>,
}

pub fn evaluate(
    kb: &Program,
    records: &[PatientRecord],
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    check_fragment(kb)?;
    let (kb, added) = ensure_machinery(kb);
    let warnings = added
        .iter()
        .map(|s| format!("knowledge base lacks `{s}`; added it"))
        .collect();
    let kb_size = count_terms(&kb);

    let outcomes = records
        .par_iter()
        .enumerate()
        .map(|(index, record)| {
            let program = kb.concat(&patient_facts(record));
            let d = diagnose(&program, &options.config)
                .map_err(|source| EvalError::Pipeline { index, source })?;
            let predicted: Vec<String> = match consequences(&d.result, options.mode) {
                Ok(atoms) => atoms.iter().map(|a| a.args[0].to_string()).collect(),
                Err(_) => Vec::new(),
            };
            let hit = predicted.iter().any(|p| *p == record.label);
            let correct = hit && (!options.exact || predicted.len() == 1);
            Ok(RecordOutcome {
                index,
                label: record.label.clone(),
                cost: d.result.optimal_cost,
                unsat: d.result.is_unsat(),
                predicted,
                correct,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for o in &outcomes {
        let e = tally.entry(&o.label).or_default();
        e.0 += 1;
        e.1 += o.correct as usize;
    }
    let rows = tally
        .into_iter()
        .map(|(disease, (n_records, n_correct))| DiseaseRow {
            disease: disease.to_owned(),
            kb_size,
            n_records,
            n_correct,
            accuracy: n_correct as f64 / n_records as f64,
        })
        .collect();

    Ok(EvalReport {
        mode: options.mode,
        exact: options.exact,
        rows,
        records: outcomes,
        warnings,
    })
}

/// Disease / Size / Accuracy table over one or more reports.
pub fn render_table(rows: &[(Mode, &DiseaseRow)]) -> String {
    let mut out = String::new();
    let width = rows
        .iter()
        .map(|(_, r)| r.disease.len())
        .max()
        .unwrap_or(0)
        .max("Disease".len());
    let with_mode = rows.iter().map(|(m, _)| m).collect::<BTreeSet<_>>().len() > 1;
    let _ = write!(out, "{:<width$}  {:>5}  {:>8}", "Disease", "Size", "Accuracy");
    if with_mode {
        out.push_str("  Mode");
    }
    out.push('\n');
    for (mode, r) in rows {
        let pct = format!("{:.0}%", r.accuracy * 100.0);
        let _ = write!(out, "{:<width$}  {:>5}  {:>8}", r.disease, r.kb_size, pct);
        if with_mode {
            let _ = write!(out, "  {mode}");
        }
        out.push('\n');
    }
    out
}
