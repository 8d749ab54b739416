//! Semi-naive bottom-up grounding.
//!
//! Variables range only over atoms that are *possibly* derivable: facts,
//! choice elements whose guard is possible, and heads of rules whose
//! positive body is possible. Each round joins at least one body literal
//! against the atoms first produced in the previous round, so no
//! substitution is enumerated twice.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

use crate::lang::{Atom, Literal, Program, Rule, RuleKind, Term, ANONYMOUS};

pub const DEFAULT_MAX_GROUND_RULES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("grounding produced more than {limit} ground rules")]
    Explosion { limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundConfig {
    pub max_ground_rules: usize,
}

impl Default for GroundConfig {
    fn default() -> Self {
        GroundConfig {
            max_ground_rules: DEFAULT_MAX_GROUND_RULES,
        }
    }
}

/// A variable-free rule. `negative` is empty for every rule the solver accepts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundRule {
    pub head: Atom,
    pub body: Vec<Atom>,
    pub negative: Vec<Atom>,
    pub origin: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundChoice {
    pub atom: Atom,
    pub guard: Option<Atom>,
    pub origin: usize,
}

/// Violated when every positive atom holds and every negated atom is absent.
/// An empty body is always violated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundConstraint {
    pub body: Vec<(Atom, bool)>,
    pub origin: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinimizeElement {
    pub weight: u64,
    pub tuple: Vec<Term>,
    pub condition: Atom,
    pub origin: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub facts: BTreeSet<Atom>,
    pub definite_rules: Vec<GroundRule>,
    pub choices: Vec<GroundChoice>,
    pub constraints: Vec<GroundConstraint>,
    pub minimize: Vec<MinimizeElement>,
}

impl GroundProgram {
    /// Distinct choosable atoms in first-occurrence order.
    pub fn choice_atoms(&self) -> Vec<Atom> {
        let mut seen = IndexSet::new();
        for c in &self.choices {
            seen.insert(c.atom.clone());
        }
        seen.into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
            + self.definite_rules.len()
            + self.choices.len()
            + self.constraints.len()
            + self.minimize.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `.lp`-style dump. Choices print as `{a}.`; a guard that is not a fact is kept.
impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        for c in &self.choices {
            match &c.guard {
                Some(g) if !self.facts.contains(g) => writeln!(f, "{{{} : {g}}}.", c.atom)?,
                _ => writeln!(f, "{{{}}}.", c.atom)?,
            }
        }
        for r in &self.definite_rules {
            let body: Vec<String> = r
                .body
                .iter()
                .map(ToString::to_string)
                .chain(r.negative.iter().map(|a| format!("not {a}")))
                .collect();
            writeln!(f, "{} :- {}.", r.head, body.join(", "))?;
        }
        for c in &self.constraints {
            if c.body.is_empty() {
                writeln!(f, "% rule {} is violated unconditionally", c.origin)?;
                continue;
            }
            let body: Vec<String> = c
                .body
                .iter()
                .map(|(a, neg)| if *neg { format!("not {a}") } else { a.to_string() })
                .collect();
            writeln!(f, ":- {}.", body.join(", "))?;
        }
        for m in &self.minimize {
            write!(f, "#minimize {{ {}", m.weight)?;
            for t in &m.tuple {
                write!(f, ", {t}")?;
            }
            writeln!(f, " : {} }}.", m.condition)?;
        }
        Ok(())
    }
}

// Matching
// --------------------------------------------------

type Bindings = Vec<(String, Term)>;

fn lookup<'b>(b: &'b Bindings, var: &str) -> Option<&'b Term> {
    b.iter().find(|(v, _)| v == var).map(|(_, t)| t)
}

fn match_term(pattern: &Term, ground: &Term, b: &mut Bindings) -> bool {
    match (pattern, ground) {
        (Term::Variable(v), _) if v == ANONYMOUS => true,
        (Term::Variable(v), _) => match lookup(b, v) {
            Some(bound) => bound == ground,
            None => {
                b.push((v.clone(), ground.clone()));
                true
            }
        },
        (Term::Constant(x), Term::Constant(y)) => x == y,
        (
            Term::Compound { functor, args },
            Term::Compound {
                functor: gf,
                args: gargs,
            },
        ) => {
            functor == gf
                && args.len() == gargs.len()
                && args.iter().zip(gargs).all(|(p, g)| match_term(p, g, b))
        }
        _ => false,
    }
}

/// Extends `b` so that `pattern` equals `ground`; restores `b` on failure.
fn match_atom(pattern: &Atom, ground: &Atom, b: &mut Bindings) -> bool {
    if pattern.predicate != ground.predicate || pattern.args.len() != ground.args.len() {
        return false;
    }
    let mark = b.len();
    if pattern
        .args
        .iter()
        .zip(&ground.args)
        .all(|(p, g)| match_term(p, g, b))
    {
        true
    } else {
        b.truncate(mark);
        false
    }
}

fn apply_term(t: &Term, b: &Bindings) -> Term {
    match t {
        Term::Variable(v) => lookup(b, v).cloned().unwrap_or_else(|| t.clone()),
        Term::Constant(_) => t.clone(),
        Term::Compound { functor, args } => Term::Compound {
            functor: functor.clone(),
            args: args.iter().map(|a| apply_term(a, b)).collect(),
        },
    }
}

fn apply_atom(a: &Atom, b: &Bindings) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| apply_term(t, b)).collect(),
    }
}

// Atom store
// --------------------------------------------------

/// Insertion-ordered atom set with a per-predicate index.
#[derive(Default)]
struct AtomStore {
    atoms: IndexSet<Atom>,
    by_pred: HashMap<(String, usize), Vec<usize>>,
}

impl AtomStore {
    fn insert(&mut self, atom: Atom) -> bool {
        let key = (atom.predicate.clone(), atom.arity());
        let (idx, new) = self.atoms.insert_full(atom);
        if new {
            self.by_pred.entry(key).or_default().push(idx);
        }
        new
    }

    fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms with the pattern's signature whose index lies in `range`.
    fn candidates<'s>(
        &'s self,
        pattern: &Atom,
        range: (usize, usize),
    ) -> impl Iterator<Item = &'s Atom> + 's {
        let ids: &[usize] = self
            .by_pred
            .get(&(pattern.predicate.clone(), pattern.arity()))
            .map_or(&[], Vec::as_slice);
        let lo = ids.partition_point(|&i| i < range.0);
        let hi = ids.partition_point(|&i| i < range.1);
        ids[lo..hi].iter().map(move |&i| &self.atoms[i])
    }
}

/// Enumerates bindings satisfying `body`, literal `k` drawn from `ranges(k)`.
fn join<'a>(
    store: &AtomStore,
    body: &[&'a Atom],
    ranges: &dyn Fn(usize) -> (usize, usize),
    k: usize,
    b: &mut Bindings,
    out: &mut Vec<Bindings>,
) {
    if k == body.len() {
        out.push(b.clone());
        return;
    }
    let pattern = body[k];
    for cand in store.candidates(pattern, ranges(k)) {
        let mark = b.len();
        if match_atom(pattern, cand, b) {
            join(store, body, ranges, k + 1, b, out);
            b.truncate(mark);
        }
    }
}

/// Negated atoms for one negated literal under `b`. A pattern containing
/// `_` expands to every stored atom it matches.
fn expand_negated(store: &AtomStore, lit: &Atom, b: &Bindings) -> Vec<Atom> {
    let applied = apply_atom(lit, b);
    if applied.is_ground() {
        return vec![applied];
    }
    let mut hits: BTreeSet<Atom> = BTreeSet::new();
    for cand in store.candidates(&applied, (0, store.len())) {
        let mut scratch = Vec::new();
        if match_atom(&applied, cand, &mut scratch) {
            hits.insert(cand.clone());
        }
    }
    hits.into_iter().collect()
}

/// Gives every `_` in a positive position its own variable so that the
/// instance records the matched constant. Negated `_` is left alone.
fn name_anonymous(rule: &Rule) -> Rule {
    fn term(t: &Term, n: &mut usize) -> Term {
        match t {
            Term::Variable(v) if v == ANONYMOUS => {
                *n += 1;
                Term::Variable(format!("_{n}"))
            }
            Term::Compound { functor, args } => Term::Compound {
                functor: functor.clone(),
                args: args.iter().map(|a| term(a, n)).collect(),
            },
            _ => t.clone(),
        }
    }
    let mut n = 0;
    let mut atom = |a: &Atom| Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| term(t, &mut n)).collect(),
    };
    let mut body = |body: &[Literal]| -> Vec<Literal> {
        body.iter()
            .map(|l| Literal {
                atom: if l.negated { l.atom.clone() } else { atom(&l.atom) },
                negated: l.negated,
            })
            .collect()
    };
    let kind = match &rule.kind {
        RuleKind::Normal { head, body: b } => RuleKind::Normal {
            head: head.clone(),
            body: body(b),
        },
        RuleKind::Constraint { body: b } => RuleKind::Constraint { body: body(b) },
        RuleKind::Choice { element, guard } => RuleKind::Choice {
            element: element.clone(),
            guard: guard.as_ref().map(&mut atom),
        },
        RuleKind::Minimize {
            weight,
            terms,
            condition,
        } => RuleKind::Minimize {
            weight: *weight,
            terms: terms.clone(),
            condition: atom(condition),
        },
        RuleKind::Fact(_) => rule.kind.clone(),
    };
    Rule {
        label: rule.label.clone(),
        kind,
    }
}

fn positive_body(body: &[Literal]) -> Vec<&Atom> {
    body.iter().filter(|l| !l.negated).map(|l| &l.atom).collect()
}

fn negative_body(body: &[Literal]) -> Vec<&Atom> {
    body.iter().filter(|l| l.negated).map(|l| &l.atom).collect()
}

// Grounding
// --------------------------------------------------

/// Instance collector deduplicating by content, keeping the smallest origin.
struct Dedup<K: std::hash::Hash + Eq> {
    items: indexmap::IndexMap<K, usize>,
}

impl<K: std::hash::Hash + Eq> Dedup<K> {
    fn new() -> Self {
        Dedup {
            items: indexmap::IndexMap::new(),
        }
    }

    fn add(&mut self, key: K, origin: usize) {
        let slot = self.items.entry(key).or_insert(origin);
        if origin < *slot {
            *slot = origin;
        }
    }
}

/// A rule that contributes possible atoms: normal rules and choice rules.
struct Producer<'p> {
    index: usize,
    head: &'p Atom,
    positive: Vec<&'p Atom>,
    negative: Vec<&'p Atom>,
    choice: bool,
}

pub fn ground(p: &Program) -> Result<GroundProgram, GroundError> {
    ground_with(p, &GroundConfig::default())
}

pub fn ground_with(p: &Program, config: &GroundConfig) -> Result<GroundProgram, GroundError> {
    let mut store = AtomStore::default();
    let mut facts = BTreeSet::new();
    let mut producers = Vec::new();
    let named: Vec<Rule> = p.rules.iter().map(name_anonymous).collect();

    for (index, rule) in named.iter().enumerate() {
        match &rule.kind {
            RuleKind::Fact(atom) => {
                facts.insert(atom.clone());
                store.insert(atom.clone());
            }
            RuleKind::Normal { head, body } => producers.push(Producer {
                index,
                head,
                positive: positive_body(body),
                negative: negative_body(body),
                choice: false,
            }),
            RuleKind::Choice { element, guard } => producers.push(Producer {
                index,
                head: element,
                positive: guard.iter().collect(),
                negative: Vec::new(),
                choice: true,
            }),
            RuleKind::Constraint { .. } | RuleKind::Minimize { .. } => {}
        }
    }

    let mut rules: Dedup<(Atom, Vec<Atom>, Vec<Atom>)> = Dedup::new();
    let mut choices: Dedup<(Atom, Option<Atom>)> = Dedup::new();
    let mut count = 0usize;
    let limit = config.max_ground_rules;

    let mut emit = |prod: &Producer<'_>,
                    b: &Bindings,
                    store: &AtomStore,
                    pending: &mut Vec<Atom>|
     -> Result<(), GroundError> {
        let head = apply_atom(prod.head, b);
        let body: Vec<Atom> = prod.positive.iter().map(|a| apply_atom(a, b)).collect();
        if prod.choice {
            choices.add((head.clone(), body.into_iter().next()), prod.index);
        } else {
            let negative = prod.negative.iter().map(|a| apply_atom(a, b)).collect();
            rules.add((head.clone(), body, negative), prod.index);
        }
        count += 1;
        if count > limit {
            return Err(GroundError::Explosion { limit });
        }
        if !store.atoms.contains(&head) {
            pending.push(head);
        }
        Ok(())
    };

    // Producers without positive body literals fire once, unconditionally.
    let mut pending = Vec::new();
    for prod in producers.iter().filter(|p| p.positive.is_empty()) {
        emit(prod, &Vec::new(), &store, &mut pending)?;
    }
    let mut old_end = 0;
    for atom in pending.drain(..) {
        store.insert(atom);
    }

    while old_end < store.len() {
        let delta_end = store.len();
        for prod in producers.iter().filter(|p| !p.positive.is_empty()) {
            for j in 0..prod.positive.len() {
                let ranges = |k: usize| {
                    if k < j {
                        (0, old_end)
                    } else if k == j {
                        (old_end, delta_end)
                    } else {
                        (0, delta_end)
                    }
                };
                let mut found = Vec::new();
                join(&store, &prod.positive, &ranges, 0, &mut Vec::new(), &mut found);
                for b in &found {
                    emit(prod, b, &store, &mut pending)?;
                }
            }
        }
        old_end = delta_end;
        for atom in pending.drain(..) {
            store.insert(atom);
        }
    }

    // Constraints and minimize elements see the complete possible-atom set.
    let mut constraints: Dedup<Vec<(Atom, bool)>> = Dedup::new();
    let mut minimize: Dedup<(u64, Vec<Term>, Atom)> = Dedup::new();
    let all = |_: usize| (0, store.len());
    for (index, rule) in named.iter().enumerate() {
        match &rule.kind {
            RuleKind::Constraint { body } => {
                let positive = positive_body(body);
                let mut found = Vec::new();
                join(&store, &positive, &all, 0, &mut Vec::new(), &mut found);
                for b in &found {
                    constraints.add(ground_constraint_body(&store, body, b), index);
                    count += 1;
                }
            }
            RuleKind::Minimize {
                weight,
                terms,
                condition,
            } => {
                let mut found = Vec::new();
                join(&store, &[condition], &all, 0, &mut Vec::new(), &mut found);
                for b in &found {
                    let tuple = terms.iter().map(|t| apply_term(t, b)).collect();
                    minimize.add((*weight, tuple, apply_atom(condition, b)), index);
                    count += 1;
                }
            }
            _ => {}
        }
        if count > limit {
            return Err(GroundError::Explosion { limit });
        }
    }

    Ok(GroundProgram {
        facts,
        definite_rules: rules
            .items
            .into_iter()
            .map(|((head, body, negative), origin)| GroundRule {
                head,
                body,
                negative,
                origin,
            })
            .collect(),
        choices: choices
            .items
            .into_iter()
            .map(|((atom, guard), origin)| GroundChoice {
                atom,
                guard,
                origin,
            })
            .collect(),
        constraints: constraints
            .items
            .into_iter()
            .map(|(body, origin)| GroundConstraint { body, origin })
            .collect(),
        minimize: minimize
            .items
            .into_iter()
            .map(|((weight, tuple, condition), origin)| MinimizeElement {
                weight,
                tuple,
                condition,
                origin,
            })
            .collect(),
    })
}

fn ground_constraint_body(store: &AtomStore, body: &[Literal], b: &Bindings) -> Vec<(Atom, bool)> {
    let mut out = Vec::with_capacity(body.len());
    for lit in body {
        if lit.negated {
            out.extend(
                expand_negated(store, &lit.atom, b)
                    .into_iter()
                    .map(|a| (a, true)),
            );
        } else {
            out.push((apply_atom(&lit.atom, b), false));
        }
    }
    out
}

/// Every instance of `rule` whose positive body matches `candidates`.
///
/// Negated literals containing `_` expand over the matching candidates.
/// Choice rules without a guard and facts are returned unchanged.
pub fn instantiate_rule(rule: &Rule, candidates: &BTreeSet<Atom>) -> Vec<Rule> {
    let rule = &name_anonymous(rule);
    let mut store = AtomStore::default();
    for atom in candidates {
        store.insert(atom.clone());
    }
    let all = |_: usize| (0, store.len());
    let positive: Vec<&Atom> = match &rule.kind {
        RuleKind::Fact(_) => return vec![rule.clone()],
        RuleKind::Normal { body, .. } | RuleKind::Constraint { body } => positive_body(body),
        RuleKind::Choice { guard, .. } => guard.iter().collect(),
        RuleKind::Minimize { condition, .. } => vec![condition],
    };
    let mut found = Vec::new();
    join(&store, &positive, &all, 0, &mut Vec::new(), &mut found);

    let lit = |atom: Atom, negated: bool| Literal { atom, negated };
    let mut out: IndexSet<Rule> = IndexSet::new();
    for b in &found {
        let kind = match &rule.kind {
            RuleKind::Fact(_) => unreachable!(),
            RuleKind::Normal { head, body } => RuleKind::Normal {
                head: apply_atom(head, b),
                body: body
                    .iter()
                    .map(|l| lit(apply_atom(&l.atom, b), l.negated))
                    .collect(),
            },
            RuleKind::Constraint { body } => RuleKind::Constraint {
                body: ground_constraint_body(&store, body, b)
                    .into_iter()
                    .map(|(a, neg)| lit(a, neg))
                    .collect(),
            },
            RuleKind::Choice { element, guard } => RuleKind::Choice {
                element: apply_atom(element, b),
                guard: guard.as_ref().map(|g| apply_atom(g, b)),
            },
            RuleKind::Minimize {
                weight,
                terms,
                condition,
            } => RuleKind::Minimize {
                weight: *weight,
                terms: terms.iter().map(|t| apply_term(t, b)).collect(),
                condition: apply_atom(condition, b),
            },
        };
        out.insert(Rule {
            label: rule.label.clone(),
            kind,
        });
    }
    out.into_iter().collect()
}

/// Ground rules grouped by the head they derive, used for quick lookups.
pub fn rules_by_head(g: &GroundProgram) -> BTreeMap<&Atom, Vec<&GroundRule>> {
    let mut map: BTreeMap<&Atom, Vec<&GroundRule>> = BTreeMap::new();
    for r in &g.definite_rules {
        map.entry(&r.head).or_default().push(r);
    }
    map
}
