//! `kb/<disease>.lp` plus the raw exchanges that produced it.

use std::io::Write;
use std::path::{Path, PathBuf};

use dxasp_core::lang::{parse_program_from, render_program, Program};
use dxasp_core::solve::ensure_machinery;
use serde::Serialize;
use thiserror::Error;

use crate::merge::merge;
use crate::translate::{Attempt, TranslationJob};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: existing knowledge base does not parse: {source}")]
    Parse {
        path: String,
        source: dxasp_core::lang::Error,
    },
}

#[derive(Debug, Clone)]
pub struct KbStore {
    root: PathBuf,
}

#[derive(Serialize)]
struct ResponseLine<'a> {
    disease: &'a str,
    attempt: usize,
    #[serde(flatten)]
    exchange: &'a Attempt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Saved {
    pub kb_path: PathBuf,
    pub responses_path: PathBuf,
    pub program: Program,
    pub warnings: Vec<String>,
}

impl KbStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        KbStore { root: root.into() }
    }

    pub fn kb_path(&self, disease: &str) -> PathBuf {
        self.root.join(format!("{disease}.lp"))
    }

    pub fn responses_path(&self, disease: &str) -> PathBuf {
        self.root.join(format!("{disease}.responses.jsonl"))
    }

    pub fn load(&self, disease: &str) -> Result<Option<Program>, StoreError> {
        let path = self.kb_path(disease);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
        parse_program_from(&text, Some(&path.display().to_string()))
            .map(Some)
            .map_err(|source| StoreError::Parse {
                path: path.display().to_string(),
                source,
            })
    }

    /// Merges the job's program into the stored KB, adds any missing
    /// machinery, and rewrites the KB and response log.
    pub fn save(&self, job: &TranslationJob) -> Result<Saved, StoreError> {
        std::fs::create_dir_all(&self.root).map_err(|e| io(&self.root, e))?;
        let disease = &job.disease_name;
        let existing = self.load(disease)?.unwrap_or_default();
        let fragment = job.result.clone().unwrap_or_default();
        let merged = merge(&existing, &fragment, disease);
        let (program, added) = ensure_machinery(&merged.program);
        let mut warnings = merged.warnings;
        warnings.extend(added.iter().map(|r| format!("added `{r}`")));

        let kb_path = self.kb_path(disease);
        write_file(&kb_path, render_program(&program).as_bytes())?;

        let responses_path = self.write_log(job)?;

        Ok(Saved {
            kb_path,
            responses_path,
            program,
            warnings,
        })
    }
}

impl KbStore {
    /// Rewrites `<disease>.responses.jsonl` with one line per attempt.
    pub fn write_log(&self, job: &TranslationJob) -> Result<PathBuf, StoreError> {
        std::fs::create_dir_all(&self.root).map_err(|e| io(&self.root, e))?;
        let path = self.responses_path(&job.disease_name);
        let mut log = Vec::new();
        for (i, exchange) in job.attempts.iter().enumerate() {
            let line = ResponseLine {
                disease: &job.disease_name,
                attempt: i + 1,
                exchange,
            };
            serde_json::to_writer(&mut log, &line).expect("attempts serialize");
            log.push(b'\n');
        }
        write_file(&path, &log)?;
        Ok(path)
    }
}

fn io(path: &Path, source: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| io(path, e))
}
