//! Prompt templates with `{placeholder}` substitution.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Naive,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptTemplate {
    pub name: String,
    pub body: String,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("template `{template}` uses unknown placeholder `{{{name}}}`")]
    MissingPlaceholder { template: String, name: String },
    #[error("unknown template `{0}` (expected naive or structured)")]
    UnknownTemplate(String),
}

pub const SHAPE_LINE: &str = "diagnosis({disease_name}) :- has(symptom(x)), has(symptom(y)) ...";
pub const ALTERNATIVES_LINE: &str =
    "Include alternative diagnoses that share overlapping symptoms with {disease_name}.";

const NAIVE_BODY: &str = "\
{medical_text}

Using the text above, write a clingo program that diagnoses {disease_name}.
";

impl PromptTemplate {
    /// A bare request with no guidance on rule shape.
    pub fn naive() -> Self {
        PromptTemplate {
            name: "naive".into(),
            body: NAIVE_BODY.into(),
            style: Style::Naive,
        }
    }

    /// Asks for one diagnosis rule per symptom cluster, alternatives and
    /// symptom links, using the fixed vocabulary of the knowledge base.
    pub fn structured() -> Self {
        let body = format!(
            "\
{{medical_text}}

The text above describes symptoms of {{disease_name}}.
Write a clingo program that diagnoses {{disease_name}} from these symptoms.
Declare each symptom as a fact `symptom(name).` using lowercase snake_case names.
Write each diagnosis rule in this shape:

{SHAPE_LINE}

Split the symptoms into several smaller rules rather than one large rule.
{ALTERNATIVES_LINE}
State relations between symptoms as `linked_symptom(a, b).` facts together with
has(symptom(B)) :- has(symptom(A)), linked_symptom(A, B).
Use no negation outside integrity constraints.
Return the program in a single fenced code block.
"
        );
        PromptTemplate {
            name: "structured".into(),
            body,
            style: Style::Structured,
        }
    }

    pub fn by_name(name: &str) -> Result<Self, PromptError> {
        match name {
            "naive" => Ok(Self::naive()),
            "structured" => Ok(Self::structured()),
            other => Err(PromptError::UnknownTemplate(other.into())),
        }
    }
}

/// Replaces `{medical_text}` and `{disease_name}`; any other `{ident}` is an error.
pub fn build_prompt(
    template: &PromptTemplate,
    disease_name: &str,
    medical_text: &str,
) -> Result<String, PromptError> {
    let body = &template.body;
    let mut out = String::with_capacity(body.len() + medical_text.len());
    let mut rest = body.as_str();
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let ident_len = after
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(after.len());
        if ident_len > 0 && after[ident_len..].starts_with('}') {
            let name = &after[..ident_len];
            match name {
                "medical_text" => out.push_str(medical_text),
                "disease_name" => out.push_str(disease_name),
                _ => {
                    return Err(PromptError::MissingPlaceholder {
                        template: template.name.clone(),
                        name: name.into(),
                    })
                }
            }
            rest = &after[ident_len + 1..];
        } else {
            out.push('{');
            rest = after;
        }
    }
    out.push_str(rest);
    Ok(out)
}
