//! Growing a knowledge base from translated fragments.

use std::collections::{BTreeMap, BTreeSet};

use dxasp_core::lang::{Atom, Literal, Program, Rule, RuleKind, Term, ANONYMOUS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Merged {
    pub program: Program,
    pub warnings: Vec<String>,
}

/// Rule text with the label dropped and variables renamed by first
/// occurrence, so alpha-equivalent rules compare equal.
pub fn canonical_key(rule: &Rule) -> String {
    let mut names = BTreeMap::new();
    let mut kind = rule.kind.clone();
    let mut rename_atom = |a: &mut Atom| {
        for t in &mut a.args {
            rename(t, &mut names);
        }
    };
    match &mut kind {
        RuleKind::Fact(a) => rename_atom(a),
        RuleKind::Normal { head, body } => {
            rename_atom(head);
            body.iter_mut().for_each(|l: &mut Literal| rename_atom(&mut l.atom));
        }
        RuleKind::Choice { element, guard } => {
            rename_atom(element);
            if let Some(g) = guard {
                rename_atom(g);
            }
        }
        RuleKind::Constraint { body } => body.iter_mut().for_each(|l| rename_atom(&mut l.atom)),
        RuleKind::Minimize { terms, condition, .. } => {
            let mut scratch = Atom::new("", std::mem::take(terms));
            rename_atom(&mut scratch);
            *terms = scratch.args;
            rename_atom(condition);
        }
    }
    Rule::new(kind).to_string()
}

fn rename(t: &mut Term, names: &mut BTreeMap<String, String>) {
    match t {
        Term::Variable(v) if v != ANONYMOUS => {
            let next = format!("V{}", names.len());
            *v = names.entry(v.clone()).or_insert(next).clone();
        }
        Term::Compound { args, .. } => args.iter_mut().for_each(|a| rename(a, names)),
        _ => {}
    }
}

/// Appends the rules of `fragment` that `kb` lacks. Only the first choice
/// rule and the first `#minimize` are kept; a fragment label already used in
/// `kb` is renamed with `prefix`.
pub fn merge(kb: &Program, fragment: &Program, prefix: &str) -> Merged {
    let mut out = Program::new();
    let mut warnings = Vec::new();
    let mut seen = BTreeSet::new();
    let mut labels = BTreeSet::new();
    let mut has_choice = false;
    let mut has_minimize = false;

    let sources = kb
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| (r, kb.loc(i), false))
        .chain(
            fragment
                .rules
                .iter()
                .enumerate()
                .map(|(i, r)| (r, fragment.loc(i), true)),
        );
    for (rule, loc, from_fragment) in sources {
        if !seen.insert(canonical_key(rule)) {
            continue;
        }
        if rule.is_choice() {
            if has_choice {
                warnings.push(format!("dropped second choice rule `{rule}` ({loc})"));
                continue;
            }
            has_choice = true;
        }
        if rule.is_minimize() {
            if has_minimize {
                warnings.push(format!("dropped second #minimize `{rule}` ({loc})"));
                continue;
            }
            has_minimize = true;
        }
        let mut rule = rule.clone();
        if let Some(label) = rule.label.clone() {
            if labels.contains(&label) && from_fragment {
                let base = format!("{prefix}_{label}");
                let fresh = std::iter::once(base.clone())
                    .chain((2..).map(|n| format!("{base}_{n}")))
                    .find(|l| !labels.contains(l))
                    .expect("unbounded label supply");
                warnings.push(format!("renamed label @{label} to @{fresh} ({loc})"));
                rule.label = Some(fresh);
            }
            labels.insert(rule.label.clone().unwrap_or_default());
        }
        out.push(rule, loc);
    }
    Merged {
        program: out,
        warnings,
    }
}
