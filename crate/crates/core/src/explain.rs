//! Justification trees and causal graphs for answer sets.
//!
//! Provenance keeps one derivation per atom: the first rule whose body
//! became complete during forward chaining. Trees re-expand shared
//! sub-derivations wherever they occur, so an atom used by two rules shows
//! its justification under both.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ground::GroundRule;
use crate::lang::{Atom, Program};

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Fact,
    Choice,
    /// Index of the source rule in the program.
    Rule(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivationRecord {
    pub atom: Atom,
    pub origin: Origin,
    pub body: Vec<Atom>,
}

/// Derivation records keyed by atom, plus the order atoms were derived in.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub records: BTreeMap<Atom, DerivationRecord>,
    pub order: Vec<Atom>,
}

impl Provenance {
    pub fn get(&self, atom: &Atom) -> Option<&DerivationRecord> {
        self.records.get(atom)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.records.keys().cloned().collect()
    }

    fn record(&mut self, atom: Atom, origin: Origin, body: Vec<Atom>) -> bool {
        if self.records.contains_key(&atom) {
            return false;
        }
        self.order.push(atom.clone());
        self.records.insert(atom.clone(), DerivationRecord { atom, origin, body });
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("`{0}` is not part of the answer set")]
    UnknownAtom(Atom),
}

/// Least model of `rules` over `facts` and `chosen`, recording how each atom
/// first became true. The returned atom set equals `solve::least_model`.
pub fn derive_with_provenance(
    rules: &[GroundRule],
    facts: &BTreeSet<Atom>,
    chosen: &BTreeSet<Atom>,
) -> (BTreeSet<Atom>, Provenance) {
    let mut prov = Provenance::default();
    for atom in facts {
        prov.record(atom.clone(), Origin::Fact, Vec::new());
    }
    for atom in chosen {
        prov.record(atom.clone(), Origin::Choice, Vec::new());
    }

    // Counters start out relative to the seeded atoms; only newly derived
    // atoms pass through the queue.
    let mut watch: HashMap<&Atom, Vec<usize>> = HashMap::new();
    let mut missing = Vec::with_capacity(rules.len());
    for (i, r) in rules.iter().enumerate() {
        let distinct: BTreeSet<&Atom> = r.body.iter().collect();
        missing.push(distinct.iter().filter(|a| !prov.records.contains_key(**a)).count());
        for a in distinct {
            watch.entry(a).or_default().push(i);
        }
    }
    let mut queue: VecDeque<Atom> = VecDeque::new();
    let fire = |i: usize, prov: &mut Provenance, queue: &mut VecDeque<Atom>| {
        let r = &rules[i];
        if prov.record(r.head.clone(), Origin::Rule(r.origin), r.body.clone()) {
            queue.push_back(r.head.clone());
        }
    };
    for i in 0..rules.len() {
        if missing[i] == 0 {
            fire(i, &mut prov, &mut queue);
        }
    }
    while let Some(atom) = queue.pop_front() {
        let Some(ids) = watch.get(&atom) else { continue };
        for &i in ids {
            missing[i] -= 1;
            if missing[i] == 0 {
                fire(i, &mut prov, &mut queue);
            }
        }
    }
    (prov.atoms(), prov)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExplanationTree {
    pub atom: Atom,
    pub origin: Origin,
    pub children: Vec<ExplanationTree>,
}

impl ExplanationTree {
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Parent/child atom pairs, parents first.
    pub fn edges(&self) -> Vec<(&Atom, &Atom)> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            for child in &node.children {
                out.push((&node.atom, &child.atom));
                stack.push(child);
            }
        }
        out
    }
}

/// Expands `goal` through its derivation records; children follow rule body order.
pub fn explanation_tree(prov: &Provenance, goal: &Atom) -> Result<ExplanationTree, ExplainError> {
    let record = prov
        .get(goal)
        .ok_or_else(|| ExplainError::UnknownAtom(goal.clone()))?;
    let children = record
        .body
        .iter()
        .map(|a| explanation_tree(prov, a))
        .collect::<Result<_, _>>()?;
    Ok(ExplanationTree {
        atom: goal.clone(),
        origin: record.origin,
        children,
    })
}

/// Text rendering: a `*` root line, then `|__ atom` indented 4 spaces per level.
pub fn render_tree(t: &ExplanationTree) -> String {
    fn walk(t: &ExplanationTree, depth: usize, out: &mut String) {
        let _ = writeln!(out, "{:width$}|__ {}", "", t.atom, width = depth * 4);
        for child in &t.children {
            walk(child, depth + 1, out);
        }
    }
    let mut out = String::from("*\n");
    walk(t, 0, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CausalEdge {
    pub from: Atom,
    pub to: Atom,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CausalGraph {
    pub nodes: BTreeSet<Atom>,
    pub edges: BTreeSet<CausalEdge>,
}

impl CausalGraph {
    /// Nodes with no incoming edge.
    pub fn sources(&self) -> BTreeSet<&Atom> {
        let targets: BTreeSet<&Atom> = self.edges.iter().map(|e| &e.to).collect();
        self.nodes.iter().filter(|n| !targets.contains(n)).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph causal {\n");
        for node in &self.nodes {
            let _ = writeln!(out, "  \"{node}\";");
        }
        for e in &self.edges {
            let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", e.from, e.to, e.label);
        }
        out.push_str("}\n");
        out
    }
}

/// One edge per body atom of every rule that fires in the model, labeled
/// with the rule's label (or `r<index>`).
pub fn causal_graph(p: &Program, rules: &[GroundRule], prov: &Provenance) -> CausalGraph {
    let nodes = prov.atoms();
    let mut edges = BTreeSet::new();
    for r in rules {
        if !nodes.contains(&r.head) || !r.body.iter().all(|a| nodes.contains(a)) {
            continue;
        }
        let label = p.display_label(r.origin);
        for b in &r.body {
            edges.insert(CausalEdge {
                from: b.clone(),
                to: r.head.clone(),
                label: label.clone(),
            });
        }
    }
    CausalGraph { nodes, edges }
}
