//! Syntax tree for the diagnosis logic fragment.
//!
//! The `Display` impls are the canonical printer: whatever they produce
//! parses back to a structurally identical value.

use std::collections::BTreeSet;
use std::fmt;

/// Name of the anonymous variable. Each occurrence is a distinct variable.
pub const ANONYMOUS: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Constant(String),
    Variable(String),
    Compound { functor: String, args: Vec<Term> },
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Self {
        Term::Compound {
            functor: functor.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Constant(_) => true,
            Term::Variable(_) => false,
            Term::Compound { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    /// Collects named variables. The anonymous variable is skipped.
    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Constant(_) => {}
            Term::Variable(v) if v == ANONYMOUS => {}
            Term::Variable(v) => {
                out.insert(v.as_str());
            }
            Term::Compound { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn has_anonymous(&self) -> bool {
        match self {
            Term::Constant(_) => false,
            Term::Variable(v) => v == ANONYMOUS,
            Term::Compound { args, .. } => args.iter().any(Term::has_anonymous),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(name) | Term::Variable(name) => f.write_str(name),
            Term::Compound { functor, args } => {
                f.write_str(functor)?;
                write_args(f, args)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    f.write_str("(")?;
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{arg}")?;
    }
    f.write_str(")")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn prop(predicate: impl Into<String>) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }

    pub fn has_anonymous(&self) -> bool {
        self.args.iter().any(Term::has_anonymous)
    }

    /// `has(symptom(name))`, the patient observation shape.
    pub fn has_symptom(name: &str) -> Self {
        Atom::new(
            "has",
            vec![Term::compound("symptom", vec![Term::constant(name)])],
        )
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if self.args.is_empty() {
            Ok(())
        } else {
            write_args(f, &self.args)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Fact(Atom),
    Normal {
        head: Atom,
        body: Vec<Literal>,
    },
    /// `{ element : guard }.` The guard may be omitted for a ground element.
    Choice {
        element: Atom,
        guard: Option<Atom>,
    },
    Constraint {
        body: Vec<Literal>,
    },
    /// `#minimize { weight, terms... : condition }.`
    Minimize {
        weight: u64,
        terms: Vec<Term>,
        condition: Atom,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub label: Option<String>,
    pub kind: RuleKind,
}

impl Rule {
    pub fn new(kind: RuleKind) -> Self {
        Rule { label: None, kind }
    }

    pub fn labeled(label: impl Into<String>, kind: RuleKind) -> Self {
        Rule {
            label: Some(label.into()),
            kind,
        }
    }

    pub fn fact(atom: Atom) -> Self {
        Rule::new(RuleKind::Fact(atom))
    }

    pub fn normal(head: Atom, body: Vec<Literal>) -> Self {
        Rule::new(RuleKind::Normal { head, body })
    }

    /// Atoms in rule head position (fact, normal head, or choice element).
    pub fn head(&self) -> Option<&Atom> {
        match &self.kind {
            RuleKind::Fact(a) => Some(a),
            RuleKind::Normal { head, .. } => Some(head),
            RuleKind::Choice { element, .. } => Some(element),
            _ => None,
        }
    }

    pub fn body(&self) -> &[Literal] {
        match &self.kind {
            RuleKind::Normal { body, .. } | RuleKind::Constraint { body } => body,
            _ => &[],
        }
    }

    pub fn is_choice(&self) -> bool {
        matches!(self.kind, RuleKind::Choice { .. })
    }

    pub fn is_minimize(&self) -> bool {
        matches!(self.kind, RuleKind::Minimize { .. })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = &self.label {
            write!(f, "@{label} ")?;
        }
        match &self.kind {
            RuleKind::Fact(atom) => write!(f, "{atom}."),
            RuleKind::Normal { head, body } => {
                write!(f, "{head} :- ")?;
                write_body(f, body)?;
                f.write_str(".")
            }
            RuleKind::Choice { element, guard } => match guard {
                Some(guard) => write!(f, "{{ {element} : {guard} }}."),
                None => write!(f, "{{ {element} }}."),
            },
            RuleKind::Constraint { body } => {
                f.write_str(":- ")?;
                write_body(f, body)?;
                f.write_str(".")
            }
            RuleKind::Minimize {
                weight,
                terms,
                condition,
            } => {
                write!(f, "#minimize {{ {weight}")?;
                for t in terms {
                    write!(f, ", {t}")?;
                }
                write!(f, " : {condition} }}.")
            }
        }
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, body: &[Literal]) -> fmt::Result {
    for (i, lit) in body.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{lit}")?;
    }
    Ok(())
}

/// Where a rule came from. Line 0 marks a synthesized rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceLoc {
    pub file: Option<String>,
    pub line: usize,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.file, self.line) {
            (_, 0) => f.write_str("<generated>"),
            (Some(file), line) => write!(f, "{file}:{line}"),
            (None, line) => write!(f, "line {line}"),
        }
    }
}

/// An ordered list of rules. `source_map[i]` locates `rules[i]`.
///
/// Equality is structural over the rules only; source locations are ignored.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub source_map: Vec<SourceLoc>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Eq for Program {}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rules(rules: Vec<Rule>) -> Self {
        let source_map = vec![SourceLoc::default(); rules.len()];
        Program { rules, source_map }
    }

    pub fn push(&mut self, rule: Rule, loc: SourceLoc) {
        self.rules.push(rule);
        self.source_map.push(loc);
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn loc(&self, index: usize) -> SourceLoc {
        self.source_map.get(index).cloned().unwrap_or_default()
    }

    /// Appends every rule of `other`, keeping its source locations.
    pub fn extend(&mut self, other: &Program) {
        for (i, rule) in other.rules.iter().enumerate() {
            self.push(rule.clone(), other.loc(i));
        }
    }

    pub fn concat(&self, other: &Program) -> Program {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn minimize(&self) -> Option<&Rule> {
        self.rules.iter().find(|r| r.is_minimize())
    }

    /// Label used when the rule is referenced from graphs: its own label or `r<index>`.
    pub fn display_label(&self, index: usize) -> String {
        match self.rules.get(index).and_then(|r| r.label.clone()) {
            Some(label) => label,
            None => format!("r{index}"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}

/// Canonical text of a program: one rule per line, trailing newline.
pub fn render_program(p: &Program) -> String {
    p.to_string()
}
