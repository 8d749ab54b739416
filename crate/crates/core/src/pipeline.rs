//! Program → ground program → optimal answer sets, with the bridge rule
//! injected in between when enabled.

use std::collections::BTreeSet;

use crate::explain::{
    causal_graph, derive_with_provenance, explanation_tree, CausalGraph, ExplanationTree,
    Provenance,
};
use crate::ground::{ground_with, GroundConfig, GroundProgram};
use crate::lang::{check_fragment, Atom, Program, RuleKind};
use crate::solve::{inject_bridge, solve, AnswerSet, SolveConfig, SolveResult};
use crate::Error;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Config {
    pub ground: GroundConfig,
    pub solve: SolveConfig,
}

/// Everything computed for one program.
#[derive(Debug, Clone)]
pub struct Diagnosis {
    /// The solved program, including any injected bridge rules.
    pub program: Program,
    pub ground: GroundProgram,
    pub result: SolveResult,
}

pub fn diagnose(program: &Program, config: &Config) -> Result<Diagnosis, Error> {
    check_fragment(program)?;
    let program = if config.solve.bridge {
        inject_bridge(program)
    } else {
        program.clone()
    };
    let ground = ground_with(&program, &config.ground)?;
    let result = solve(&ground, &config.solve)?;
    Ok(Diagnosis {
        program,
        ground,
        result,
    })
}

impl Diagnosis {
    /// Derivation records for one of the returned models.
    pub fn provenance(&self, model: &AnswerSet) -> Provenance {
        let choice_atoms: BTreeSet<Atom> = self.ground.choice_atoms().into_iter().collect();
        let chosen: BTreeSet<Atom> = model
            .atoms
            .iter()
            .filter(|a| choice_atoms.contains(*a) && !self.ground.facts.contains(*a))
            .cloned()
            .collect();
        let (_, prov) = derive_with_provenance(&self.ground.definite_rules, &self.ground.facts, &chosen);
        prov
    }

    /// Justification of `goal` in the first optimal model.
    pub fn explain(&self, goal: &Atom) -> Result<ExplanationTree, Error> {
        let model = self.result.models.first().ok_or(Error::Unsatisfiable)?;
        Ok(explanation_tree(&self.provenance(model), goal)?)
    }

    pub fn causal_graph(&self) -> Result<CausalGraph, Error> {
        let model = self.result.models.first().ok_or(Error::Unsatisfiable)?;
        Ok(causal_graph(
            &self.program,
            &self.ground.definite_rules,
            &self.provenance(model),
        ))
    }

    /// Names the constraints that cannot be satisfied, for UNSAT reports.
    pub fn unsat_hint(&self) -> Option<String> {
        if !self.result.is_unsat() {
            return None;
        }
        let culprits: Vec<String> = self
            .result
            .violated_constraints
            .iter()
            .map(|&i| {
                let rule = &self.program.rules[i];
                let what = match &rule.kind {
                    RuleKind::Constraint { body }
                        if body
                            .iter()
                            .any(|l| l.negated && l.atom.predicate == "diagnosis") =>
                    {
                        " (at least one diagnosis is required)"
                    }
                    _ => "",
                };
                format!("`{rule}` at {}{what}", self.program.loc(i))
            })
            .collect();
        Some(if culprits.is_empty() {
            "no combination of assumed atoms satisfies every integrity constraint".to_owned()
        } else {
            format!(
                "integrity constraint {} is violated even after assuming every choosable atom",
                culprits.join(", ")
            )
        })
    }
}
