//! Cost-optimal answer sets for ground programs of the fragment.
//!
//! Non-determinism comes only from choice atoms. For a chosen subset `A`
//! the candidate model is the least model of the definite rules extended
//! with `a :- guard(a)` for every `a` in `A`; it is an answer set when every
//! chosen atom made it into the model and no constraint is violated.
//!
//! Search is a depth-first branch and bound over the choice atoms under an
//! increasing cost bound. Least models grow monotonically with the chosen
//! set and minimize weights are non-negative, so the cost of the atoms
//! chosen so far is a lower bound for every completion.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::ground::{GroundProgram, GroundRule};
use crate::lang::{parse_program, Atom, Literal, Program, Rule, RuleKind, SourceLoc, Term};

pub const DEFAULT_MAX_MODELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveConfig {
    /// Optimal models kept in the result (all optima still feed brave/cautious).
    pub max_models: usize,
    /// Inject `has(X) :- add(X).` for choice rules over `add/1`.
    pub bridge: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_models: DEFAULT_MAX_MODELS,
            bridge: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("ground rule from rule {origin} uses `not` outside an integrity constraint")]
    Fragment { origin: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no answer set: the program is unsatisfiable")]
pub struct EmptyResult;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerSet {
    pub atoms: BTreeSet<Atom>,
    pub cost: u64,
}

impl AnswerSet {
    /// Atoms as text, sorted by their rendering.
    pub fn rendered(&self) -> Vec<String> {
        let mut out: Vec<String> = self.atoms.iter().map(ToString::to_string).collect();
        out.sort();
        out
    }

    fn key(&self) -> String {
        self.rendered().join(" ")
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub choice_points: u64,
    pub models_enumerated: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    /// `None` when the program has no answer set.
    pub optimal_cost: Option<u64>,
    /// Optimal models in canonical order, at most `max_models` of them.
    pub models: Vec<AnswerSet>,
    /// Atoms true in some optimal model (over all optima, not just `models`).
    pub brave: BTreeSet<Atom>,
    /// Atoms true in every optimal model.
    pub cautious: BTreeSet<Atom>,
    pub truncated: bool,
    /// Origins of constraints violated even when every choice atom is taken.
    pub violated_constraints: Vec<usize>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn is_unsat(&self) -> bool {
        self.optimal_cost.is_none()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Brave,
    Cautious,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brave" => Ok(Mode::Brave),
            "cautious" => Ok(Mode::Cautious),
            other => Err(format!("unknown mode `{other}` (expected brave or cautious)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Brave => "brave",
            Mode::Cautious => "cautious",
        })
    }
}

/// `diagnosis/1` atoms that are brave or cautious consequences.
pub fn consequences(r: &SolveResult, mode: Mode) -> Result<BTreeSet<Atom>, EmptyResult> {
    if r.is_unsat() {
        return Err(EmptyResult);
    }
    let source = match mode {
        Mode::Brave => &r.brave,
        Mode::Cautious => &r.cautious,
    };
    Ok(source
        .iter()
        .filter(|a| a.predicate == "diagnosis" && a.arity() == 1)
        .cloned()
        .collect())
}

/// Least fixpoint of forward chaining from `base` over definite rules.
pub fn least_model<'a>(
    rules: &[GroundRule],
    base: impl IntoIterator<Item = &'a Atom>,
) -> BTreeSet<Atom> {
    let mut model: BTreeSet<Atom> = base.into_iter().cloned().collect();
    let mut watch: HashMap<&Atom, Vec<usize>> = HashMap::new();
    let mut missing: Vec<usize> = Vec::with_capacity(rules.len());
    let mut queue: Vec<Atom> = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        let distinct: BTreeSet<&Atom> = r.body.iter().collect();
        for a in &distinct {
            watch.entry(*a).or_default().push(i);
        }
        missing.push(distinct.iter().filter(|a| !model.contains(**a)).count());
    }
    for (i, r) in rules.iter().enumerate() {
        if missing[i] == 0 && model.insert(r.head.clone()) {
            queue.push(r.head.clone());
        }
    }
    while let Some(atom) = queue.pop() {
        let Some(ids) = watch.get(&atom) else { continue };
        for &i in ids {
            missing[i] -= 1;
            if missing[i] == 0 && model.insert(rules[i].head.clone()) {
                queue.push(rules[i].head.clone());
            }
        }
    }
    model
}

/// Compiled form of a ground program with atoms replaced by dense ids.
struct Compiled {
    atoms: Vec<Atom>,
    facts: Vec<usize>,
    rules: Vec<(usize, Vec<usize>)>,
    /// Choice atom ids in decision order, with their guards (`None` = unguarded).
    decisions: Vec<(usize, Vec<Option<usize>>)>,
    constraints: Vec<(Vec<usize>, Vec<usize>, usize)>,
    /// Distinct (weight, tuple) keys with their condition atoms.
    cost_groups: Vec<(u64, Vec<usize>)>,
    watch: Vec<Vec<usize>>,
}

impl Compiled {
    fn new(g: &GroundProgram) -> Self {
        let mut ids: HashMap<Atom, usize> = HashMap::new();
        let mut atoms = Vec::new();
        let mut id = |a: &Atom| -> usize {
            if let Some(&i) = ids.get(a) {
                return i;
            }
            atoms.push(a.clone());
            ids.insert(a.clone(), atoms.len() - 1);
            atoms.len() - 1
        };

        let facts: Vec<usize> = g.facts.iter().map(&mut id).collect();
        let rules: Vec<(usize, Vec<usize>)> = g
            .definite_rules
            .iter()
            .map(|r| {
                let mut body: Vec<usize> = r.body.iter().map(&mut id).collect();
                body.sort_unstable();
                body.dedup();
                (id(&r.head), body)
            })
            .collect();
        let mut decisions: Vec<(usize, Vec<Option<usize>>)> = Vec::new();
        for c in &g.choices {
            let a = id(&c.atom);
            let guard = c.guard.as_ref().map(&mut id);
            match decisions.iter_mut().find(|(x, _)| *x == a) {
                Some((_, guards)) => guards.push(guard),
                None => decisions.push((a, vec![guard])),
            }
        }
        let constraints = g
            .constraints
            .iter()
            .map(|c| {
                let pos = c.body.iter().filter(|(_, n)| !n).map(|(a, _)| id(a)).collect();
                let neg = c.body.iter().filter(|(_, n)| *n).map(|(a, _)| id(a)).collect();
                (pos, neg, c.origin)
            })
            .collect();
        let mut groups: BTreeMap<(u64, Vec<Term>), Vec<usize>> = BTreeMap::new();
        for m in &g.minimize {
            groups
                .entry((m.weight, m.tuple.clone()))
                .or_default()
                .push(id(&m.condition));
        }
        let cost_groups = groups.into_iter().map(|((w, _), c)| (w, c)).collect();

        let mut watch = vec![Vec::new(); atoms.len()];
        for (i, (_, body)) in rules.iter().enumerate() {
            for &b in body {
                watch[b].push(i);
            }
        }
        Compiled {
            atoms,
            facts,
            rules,
            decisions,
            constraints,
            cost_groups,
            watch,
        }
    }

    /// Least model with the decisions in `chosen` acting as guarded rules.
    fn model(&self, chosen: &[usize]) -> Vec<bool> {
        let n = self.atoms.len();
        let mut holds = vec![false; n];
        let mut queue = Vec::new();
        let set = |a: usize, holds: &mut Vec<bool>, queue: &mut Vec<usize>| {
            if !holds[a] {
                holds[a] = true;
                queue.push(a);
            }
        };
        for &f in &self.facts {
            set(f, &mut holds, &mut queue);
        }
        let mut missing: Vec<usize> = self.rules.iter().map(|(_, b)| b.len()).collect();
        for (head, body) in &self.rules {
            if body.is_empty() {
                set(*head, &mut holds, &mut queue);
            }
        }
        // Guarded choices: atom -> atoms that are waiting on that guard.
        let mut guarded: HashMap<usize, Vec<usize>> = HashMap::new();
        for &d in chosen {
            let (atom, guards) = &self.decisions[d];
            for g in guards {
                match g {
                    None => set(*atom, &mut holds, &mut queue),
                    Some(g) => guarded.entry(*g).or_default().push(*atom),
                }
            }
        }
        while let Some(a) = queue.pop() {
            for &r in &self.watch[a] {
                missing[r] -= 1;
                if missing[r] == 0 {
                    set(self.rules[r].0, &mut holds, &mut queue);
                }
            }
            if let Some(waiting) = guarded.remove(&a) {
                for w in waiting {
                    set(w, &mut holds, &mut queue);
                }
            }
        }
        holds
    }

    fn cost(&self, holds: &[bool]) -> u64 {
        self.cost_groups
            .iter()
            .filter(|(_, conds)| conds.iter().any(|&c| holds[c]))
            .map(|(w, _)| *w)
            .sum()
    }

    fn violates(&self, holds: &[bool]) -> bool {
        self.constraints
            .iter()
            .any(|(pos, neg, _)| pos.iter().all(|&a| holds[a]) && neg.iter().all(|&a| !holds[a]))
    }

    /// A constraint violated in every model between `lower` and `upper`.
    fn surely_violated(&self, lower: &[bool], upper: &[bool]) -> bool {
        self.constraints
            .iter()
            .any(|(pos, neg, _)| pos.iter().all(|&a| lower[a]) && neg.iter().all(|&a| !upper[a]))
    }
}

struct Search<'c> {
    c: &'c Compiled,
    bound: u64,
    next_bound: Option<u64>,
    found: Vec<(Vec<bool>, u64)>,
    choice_points: u64,
}

impl Search<'_> {
    fn dfs(&mut self, depth: usize, chosen: &mut Vec<usize>, lower: Vec<bool>) {
        self.choice_points += 1;
        let lb = self.c.cost(&lower);
        if lb > self.bound {
            self.next_bound = Some(self.next_bound.map_or(lb, |b| b.min(lb)));
            return;
        }
        let n = self.c.decisions.len();
        let upper = if depth == n {
            lower.clone()
        } else {
            let mut all = chosen.clone();
            all.extend(depth..n);
            self.c.model(&all)
        };
        // A chosen atom that cannot be supported makes every completion non-canonical.
        if chosen.iter().any(|&d| !upper[self.c.decisions[d].0]) {
            return;
        }
        if self.c.surely_violated(&lower, &upper) {
            return;
        }
        if depth == n {
            if !self.c.violates(&lower) {
                self.found.push((lower, lb));
            }
            return;
        }
        self.dfs(depth + 1, chosen, lower);
        chosen.push(depth);
        let with = self.c.model(chosen);
        self.dfs(depth + 1, chosen, with);
        chosen.pop();
    }
}

/// All optimal answer sets of `g` (up to `config.max_models`).
pub fn solve(g: &GroundProgram, config: &SolveConfig) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    if let Some(r) = g.definite_rules.iter().find(|r| !r.negative.is_empty()) {
        return Err(SolveError::Fragment { origin: r.origin });
    }
    let c = Compiled::new(g);
    let root = c.model(&[]);
    let mut search = Search {
        c: &c,
        bound: c.cost(&root),
        next_bound: None,
        found: Vec::new(),
        choice_points: 0,
    };
    loop {
        search.next_bound = None;
        search.dfs(0, &mut Vec::new(), root.clone());
        if !search.found.is_empty() {
            break;
        }
        match search.next_bound {
            Some(b) => search.bound = b,
            None => break,
        }
    }

    let all: Vec<usize> = (0..c.decisions.len()).collect();
    let everything = c.model(&all);
    let violated_constraints = c
        .constraints
        .iter()
        .filter(|(pos, neg, _)| {
            pos.iter().all(|&a| everything[a]) && neg.iter().all(|&a| !everything[a])
        })
        .map(|(_, _, origin)| *origin)
        .collect();

    let optimal_cost = search.found.iter().map(|(_, cost)| *cost).min();
    let mut models: BTreeMap<String, AnswerSet> = BTreeMap::new();
    let mut brave = vec![false; c.atoms.len()];
    let mut cautious = vec![true; c.atoms.len()];
    let mut enumerated = 0u64;
    for (holds, cost) in &search.found {
        if Some(*cost) != optimal_cost {
            continue;
        }
        enumerated += 1;
        for (i, &h) in holds.iter().enumerate() {
            brave[i] |= h;
            cautious[i] &= h;
        }
        let set = AnswerSet {
            atoms: c
                .atoms
                .iter()
                .zip(holds)
                .filter(|(_, &h)| h)
                .map(|(a, _)| a.clone())
                .collect(),
            cost: *cost,
        };
        models.insert(set.key(), set);
    }
    let collect = |flags: &[bool]| -> BTreeSet<Atom> {
        if optimal_cost.is_none() {
            return BTreeSet::new();
        }
        c.atoms
            .iter()
            .zip(flags)
            .filter(|(_, &f)| f)
            .map(|(a, _)| a.clone())
            .collect()
    };
    let truncated = models.len() > config.max_models;
    Ok(SolveResult {
        optimal_cost,
        brave: collect(&brave),
        cautious: collect(&cautious),
        models: models.into_values().take(config.max_models).collect(),
        truncated,
        violated_constraints,
        stats: SolveStats {
            choice_points: search.choice_points,
            models_enumerated: enumerated,
            elapsed: start.elapsed(),
        },
    })
}

/// Adds `has(T) :- add(T).` for every choice rule whose element is `add(T)`.
///
/// Diagnosis rules consume `has/1` while the choice rule produces `add/1`;
/// without this link minimization has nothing to trade off.
pub fn inject_bridge(p: &Program) -> Program {
    let mut out = p.clone();
    for rule in &p.rules {
        let RuleKind::Choice { element, .. } = &rule.kind else {
            continue;
        };
        if element.predicate != "add" || element.arity() != 1 {
            continue;
        }
        let bridge = Rule::normal(
            Atom::new("has", element.args.clone()),
            vec![Literal::pos(element.clone())],
        );
        if !out.rules.iter().any(|r| r.kind == bridge.kind) {
            out.push(bridge, SourceLoc::default());
        }
    }
    out
}

/// The choice, constraint and minimize statements every diagnosis KB needs.
pub const MACHINERY: &str = "\
{ add(symptom(S)) : symptom(S) }.
:- not diagnosis(_).
#minimize { 1, S : add(symptom(S)) }.
";

/// Appends whichever parts of [`MACHINERY`] `p` lacks; returns what was added.
pub fn ensure_machinery(p: &Program) -> (Program, Vec<String>) {
    let machinery = parse_program(MACHINERY).expect("built-in machinery parses");
    let mut out = p.clone();
    let mut added = Vec::new();
    for rule in machinery.rules {
        let present = match &rule.kind {
            RuleKind::Choice { .. } => p.rules.iter().any(Rule::is_choice),
            RuleKind::Minimize { .. } => p.minimize().is_some(),
            RuleKind::Constraint { .. } => p.rules.iter().any(|r| {
                matches!(&r.kind, RuleKind::Constraint { body }
                    if body.iter().any(|l| l.negated && l.atom.predicate == "diagnosis"))
            }),
            _ => true,
        };
        if !present {
            added.push(rule.to_string());
            out.push(rule, SourceLoc::default());
        }
    }
    (out, added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::ground;
    use crate::lang::parse_program;

    fn atom(text: &str) -> Atom {
        crate::lang::parse_atom(text).unwrap()
    }

    fn run(text: &str) -> SolveResult {
        let p = inject_bridge(&parse_program(text).unwrap());
        solve(&ground(&p).unwrap(), &SolveConfig::default()).unwrap()
    }

    fn rules(text: &str) -> Vec<GroundRule> {
        ground(&parse_program(text).unwrap()).unwrap().definite_rules
    }

    const PROPAGATION: &str = "has(symptom(S2)) :- has(symptom(S1)), linked_symptom(S1, S2).";

    #[test]
    fn least_model_facts_only() {
        let base = [atom("has(symptom(cough))")];
        assert_eq!(
            least_model(&[], &base),
            base.iter().cloned().collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn least_model_propagates() {
        let text = format!(
            "has(symptom(fatigue)). linked_symptom(fatigue, lethargy).\n{PROPAGATION}"
        );
        let base = [
            atom("has(symptom(fatigue))"),
            atom("linked_symptom(fatigue, lethargy)"),
        ];
        let m = least_model(&rules(&text), &base);
        assert!(m.contains(&atom("has(symptom(lethargy))")));
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn least_model_chains() {
        let text = format!(
            "has(symptom(loss_of_appetite)).\n\
             linked_symptom(loss_of_appetite, mild_fever).\n\
             linked_symptom(mild_fever, high_fever).\n{PROPAGATION}"
        );
        let g = ground(&parse_program(&text).unwrap()).unwrap();
        let m = least_model(&g.definite_rules, &g.facts);
        assert!(m.contains(&atom("has(symptom(mild_fever))")));
        assert!(m.contains(&atom("has(symptom(high_fever))")));
    }

    const PARTIAL_KB: &str = "\
        symptom(a).\n\
        diagnosis(d) :- has(symptom(a)).\n\
        { add(symptom(S)) : symptom(S) }.\n\
        :- not diagnosis(_).\n\
        #minimize { 1, S : add(symptom(S)) }.\n";

    #[test]
    fn observed_patient_costs_nothing() {
        let r = run(&format!("{PARTIAL_KB}has(symptom(a))."));
        assert_eq!(r.optimal_cost, Some(0));
        assert_eq!(r.models.len(), 1);
        assert!(r.models[0].contains(&atom("diagnosis(d)")));
        assert!(r.models[0].atoms.iter().all(|a| a.predicate != "add"));
    }

    #[test]
    fn unobserved_patient_needs_one_assumption() {
        // {} violates the diagnosis constraint; {add(a)} is the only answer set.
        let r = run(PARTIAL_KB);
        assert_eq!(r.optimal_cost, Some(1));
        assert_eq!(r.models.len(), 1);
        for a in ["add(symptom(a))", "has(symptom(a))", "diagnosis(d)"] {
            assert!(r.models[0].contains(&atom(a)), "missing {a}");
        }
    }

    const TWO_WAY: &str = "\
        symptom(a). symptom(b). symptom(c).\n\
        diagnosis(d1) :- has(symptom(a)), has(symptom(b)).\n\
        diagnosis(d2) :- has(symptom(c)).\n\
        { add(symptom(S)) : symptom(S) }.\n\
        :- not diagnosis(_).\n\
        #minimize { 1, S : add(symptom(S)) }.\n\
        has(symptom(a)).\n";

    #[test]
    fn ties_return_every_optimum() {
        // Of the 8 subsets of {a, b, c}, {b} and {c} are the only feasible ones of cost 1.
        let r = run(TWO_WAY);
        assert_eq!(r.optimal_cost, Some(1));
        assert_eq!(r.models.len(), 2);
        let adds: Vec<Vec<String>> = r
            .models
            .iter()
            .map(|m| {
                m.rendered()
                    .into_iter()
                    .filter(|a| a.starts_with("add("))
                    .collect()
            })
            .collect();
        assert_eq!(adds, vec![vec!["add(symptom(b))"], vec!["add(symptom(c))"]]);
        assert!(r.models[0].contains(&atom("diagnosis(d1)")));
        assert!(r.models[1].contains(&atom("diagnosis(d2)")));
    }

    #[test]
    fn brave_and_cautious() {
        let r = run(TWO_WAY);
        let brave: Vec<String> = consequences(&r, Mode::Brave)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(brave, vec!["diagnosis(d1)", "diagnosis(d2)"]);
        assert!(consequences(&r, Mode::Cautious).unwrap().is_empty());

        let single = run(&format!("{PARTIAL_KB}has(symptom(a))."));
        let expected: BTreeSet<Atom> = [atom("diagnosis(d)")].into_iter().collect();
        assert_eq!(consequences(&single, Mode::Brave).unwrap(), expected);
        assert_eq!(consequences(&single, Mode::Cautious).unwrap(), expected);
    }

    #[test]
    fn cautious_is_an_intersection() {
        // Two cost-0 models: {x, d1} and {y, d1, d2}.
        let g = ground(
            &parse_program(
                "{ x }. { y }. diagnosis(d1) :- x. diagnosis(d1) :- y. diagnosis(d2) :- y.\n\
                 :- not x, not y. :- x, y.",
            )
            .unwrap(),
        )
        .unwrap();
        let r = solve(&g, &SolveConfig::default()).unwrap();
        assert_eq!(r.models.len(), 2);
        let cautious: Vec<String> = consequences(&r, Mode::Cautious)
            .unwrap()
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(cautious, vec!["diagnosis(d1)"]);
    }

    #[test]
    fn empty_kb_is_unsat_with_hint() {
        let r = run("symptom(a). { add(symptom(S)) : symptom(S) }. :- not diagnosis(_).");
        assert!(r.is_unsat());
        assert!(r.models.is_empty());
        assert_eq!(r.violated_constraints, vec![2]);
        assert_eq!(consequences(&r, Mode::Brave), Err(EmptyResult));
    }

    #[test]
    fn rejects_negation_in_definite_rules() {
        let g = ground(&parse_program("a. b :- a, not c.").unwrap()).unwrap();
        assert_eq!(
            solve(&g, &SolveConfig::default()).unwrap_err(),
            SolveError::Fragment { origin: 1 }
        );
    }

    #[test]
    fn unsupported_choice_is_not_a_model() {
        // x can only be chosen when its guard g holds, and g depends on x itself.
        let g = ground(&parse_program("{ x : g }. g :- x. :- not x.").unwrap()).unwrap();
        assert!(solve(&g, &SolveConfig::default()).unwrap().is_unsat());
    }

    #[test]
    fn minimize_uses_set_semantics() {
        // Both conditions map to the same tuple (1, t): cost 1, not 2.
        let g = ground(&parse_program("{ x }. { y }. :- not x. :- not y. #minimize { 1, t : p }. p :- x. p :- y.").unwrap())
            .unwrap();
        let g2 = ground(
            &parse_program(
                "{ x }. { y }. :- not x. :- not y. q(x) :- x. q(y) :- y. #minimize { 1, t : q(V) }.",
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(solve(&g, &SolveConfig::default()).unwrap().optimal_cost, Some(1));
        assert_eq!(solve(&g2, &SolveConfig::default()).unwrap().optimal_cost, Some(1));
    }

    #[test]
    fn max_models_truncates_but_keeps_consequences() {
        let r = solve(
            &ground(&inject_bridge(&parse_program(TWO_WAY).unwrap())).unwrap(),
            &SolveConfig {
                max_models: 1,
                bridge: true,
            },
        )
        .unwrap();
        assert_eq!(r.models.len(), 1);
        assert!(r.truncated);
        assert_eq!(consequences(&r, Mode::Brave).unwrap().len(), 2);
    }

    #[test]
    fn bridge_injection() {
        let p = inject_bridge(&parse_program("{ add(symptom(S)) : symptom(S) }.").unwrap());
        assert_eq!(p.rules[1].to_string(), "has(symptom(S)) :- add(symptom(S)).");
        assert_eq!(inject_bridge(&p), p);
        let plain = parse_program("{ x }.").unwrap();
        assert_eq!(inject_bridge(&plain), plain);
    }

    #[test]
    fn machinery_is_added_once() {
        let (p, added) = ensure_machinery(&parse_program("symptom(a).").unwrap());
        assert_eq!(added.len(), 3);
        let (again, added) = ensure_machinery(&p);
        assert!(added.is_empty());
        assert_eq!(again, p);
    }

    #[test]
    fn deterministic_results() {
        let a = run(TWO_WAY);
        let mut b = run(TWO_WAY);
        b.stats.elapsed = a.stats.elapsed;
        assert_eq!(a, b);
    }
}
