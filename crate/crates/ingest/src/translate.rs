//! Prompt, validate, repair.

use dxasp_core::lang::{check_fragment, normalize_symbol, parse_program, Program, Term};
use serde::Serialize;
use thiserror::Error;

use crate::client::{TranslatorClient, TransportError};
use crate::extract::extract_code_blocks;
use crate::prompt::{build_prompt, PromptError, PromptTemplate};

pub const DEFAULT_MAX_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attempt {
    pub prompt: String,
    pub response: String,
    /// `None` when the response validated.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TranslationJob {
    /// Normalized disease constant.
    pub disease_name: String,
    pub medical_text: String,
    pub template: PromptTemplate,
    pub attempts: Vec<Attempt>,
    pub result: Option<Program>,
}

impl TranslationJob {
    pub fn new(
        disease: &str,
        medical_text: impl Into<String>,
        template: PromptTemplate,
    ) -> Result<Self, dxasp_core::lang::Error> {
        Ok(TranslationJob {
            disease_name: normalize_symbol(disease)?,
            medical_text: medical_text.into(),
            template,
            attempts: Vec::new(),
            result: None,
        })
    }
}

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("translation of {disease} failed after {attempts} attempt(s): {last_error}")]
    Failed {
        disease: String,
        attempts: usize,
        last_error: String,
    },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// Why a response was rejected, with the offending source line if known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub message: String,
    pub line: Option<(usize, String)>,
    pub source: String,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)?;
        if let Some((n, text)) = &self.line {
            write!(f, " [line {n}: `{}`]", text.trim())?;
        }
        Ok(())
    }
}

fn source_line(source: &str, line: usize) -> Option<(usize, String)> {
    line.checked_sub(1)
        .and_then(|i| source.lines().nth(i))
        .map(|l| (line, l.to_owned()))
}

/// Parses the code in `response` and checks it derives `diagnosis(disease)`.
pub fn validate(response: &str, disease: &str) -> Result<Program, Rejection> {
    let source = extract_code_blocks(response).join("\n");
    let reject = |message: String, line: Option<usize>| Rejection {
        message,
        line: line.and_then(|l| source_line(&source, l)),
        source: source.clone(),
    };
    let program = parse_program(&source).map_err(|e| reject(e.to_string(), e.line()))?;
    check_fragment(&program).map_err(|e| reject(e.to_string(), Some(e.loc.line)))?;
    let target = Term::constant(disease);
    let has_target = program.rules.iter().any(|r| {
        r.head().is_some_and(|h| {
            h.predicate == "diagnosis" && h.args.len() == 1 && h.args[0] == target
        }) && !r.body().is_empty()
    });
    if !has_target {
        return Err(reject(
            format!("no rule derives diagnosis({disease}) from a rule body"),
            None,
        ));
    }
    Ok(program)
}

pub fn repair_prompt(disease: &str, rejection: &Rejection) -> String {
    let mut out = format!(
        "The clingo program you wrote for {disease} was rejected.\nError: {}\n",
        rejection.message
    );
    if let Some((n, text)) = &rejection.line {
        out.push_str(&format!("Offending line {n}: {text}\n"));
    }
    out.push_str(&format!(
        "\nProgram:\n```\n{}\n```\n\nReturn the complete corrected program in a single fenced code block. \
         It must contain at least one rule with head diagnosis({disease}).\n",
        rejection.source.trim_end()
    ));
    out
}

/// Runs the job to completion; every exchange is recorded in `job.attempts`.
pub fn translate(
    client: &dyn TranslatorClient,
    job: &mut TranslationJob,
    max_attempts: usize,
) -> Result<Program, TranslateError> {
    let mut prompt = build_prompt(&job.template, &job.disease_name, &job.medical_text)?;
    let mut last_error = String::from("no attempts were made");
    for _ in 0..max_attempts.max(1) {
        let response = client.complete(&prompt)?;
        match validate(&response, &job.disease_name) {
            Ok(program) => {
                job.attempts.push(Attempt {
                    prompt,
                    response,
                    error: None,
                });
                job.result = Some(program.clone());
                return Ok(program);
            }
            Err(rejection) => {
                last_error = rejection.to_string();
                let next = repair_prompt(&job.disease_name, &rejection);
                job.attempts.push(Attempt {
                    prompt: std::mem::replace(&mut prompt, next),
                    response,
                    error: Some(last_error.clone()),
                });
            }
        }
    }
    Err(TranslateError::Failed {
        disease: job.disease_name.clone(),
        attempts: job.attempts.len(),
        last_error,
    })
}

/// Translates independent jobs on separate threads; results keep job order.
pub fn translate_all(
    client: &dyn TranslatorClient,
    jobs: &mut [TranslationJob],
    max_attempts: usize,
) -> Vec<Result<Program, TranslateError>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter_mut()
            .map(|job| s.spawn(move || translate(client, job, max_attempts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("translation thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::FixtureClient;

    const GOOD: &str = "```\nsymptom(cough).\ndiagnosis(flu) :- has(symptom(cough)).\n```";
    const MISSING_DOT: &str = "```\nsymptom(cough)\ndiagnosis(flu) :- has(symptom(cough)).\n```";

    fn job() -> TranslationJob {
        TranslationJob::new("Flu", "Coughing.", PromptTemplate::structured()).unwrap()
    }

    #[test]
    fn first_attempt_success() {
        let client = FixtureClient::new(vec![GOOD.into()]);
        let mut j = job();
        let p = translate(&client, &mut j, 3).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(j.attempts.len(), 1);
        assert!(j.attempts[0].prompt.contains("diagnosis(flu) :- has(symptom(x))"));
        assert_eq!(j.result, Some(p));
    }

    #[test]
    fn repaired_on_second_attempt() {
        let client = FixtureClient::new(vec![MISSING_DOT.into(), GOOD.into()]);
        let mut j = job();
        translate(&client, &mut j, 3).unwrap();
        assert_eq!(j.attempts.len(), 2);
        let err = j.attempts[0].error.as_deref().unwrap();
        assert!(err.contains("line 2"), "{err}");
        let repair = &j.attempts[1].prompt;
        assert!(repair.contains("Offending line 2: diagnosis(flu) :- has(symptom(cough))."), "{repair}");
        assert!(repair.contains("symptom(cough)\n"));
        assert!(j.attempts[1].error.is_none());
    }

    #[test]
    fn prose_exhausts_attempts() {
        let client = FixtureClient::new(vec!["Flu is a viral illness.".into()]);
        let mut j = job();
        match translate(&client, &mut j, 3).unwrap_err() {
            TranslateError::Failed { attempts, .. } => assert_eq!(attempts, 3),
            e => panic!("{e}"),
        }
        assert_eq!(j.attempts.len(), 3);
        assert!(j.result.is_none());
    }

    #[test]
    fn off_target_diagnosis_rejected() {
        let r = validate("diagnosis(cold) :- has(symptom(cough)).", "flu").unwrap_err();
        assert!(r.message.contains("diagnosis(flu)"));
        assert!(validate("diagnosis(flu).", "flu").is_err());
    }

    #[test]
    fn negation_rejected_with_line() {
        let r = validate("a.\ndiagnosis(flu) :- has(symptom(a)), not b.\n", "flu").unwrap_err();
        assert_eq!(r.line.as_ref().map(|l| l.0), Some(2));
    }

    #[test]
    fn transport_errors_surface() {
        struct Down;
        impl TranslatorClient for Down {
            fn complete(&self, _: &str) -> Result<String, TransportError> {
                Err(TransportError("connection refused".into()))
            }
        }
        let mut j = job();
        assert!(matches!(translate(&Down, &mut j, 3), Err(TranslateError::Transport(_))));
    }

    #[test]
    fn concurrent_jobs_keep_order() {
        let client = FixtureClient::new(vec![GOOD.into()]);
        let mut jobs = vec![job(), job(), job()];
        let results = translate_all(&client, &mut jobs, 2);
        assert!(results.iter().all(|r| r.is_ok()));
        assert!(jobs.iter().all(|j| j.attempts.len() == 1));
    }
}
