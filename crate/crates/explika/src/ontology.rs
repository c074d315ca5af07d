//! Taxonomy machinery: reflexive-transitive IS-A closures, the finite
//! grounding universe, and the augmented ontological relation `=>` over
//! ground atoms.
//!
//! User links relate constants, propositional symbols or predicates. The
//! augmented relation lifts them to ground atoms: a `one` parameter
//! inherits upward (sub-concept atom implies super-concept atom), an
//! `all` parameter inherits downward, `na` parameters never vary, and a
//! predicate link carries argument tuples across unchanged. The lifted
//! relation is closed reflexively and transitively over the universe.

use std::collections::{BTreeSet, HashMap};

use crate::model::{GroundAtom, OntoLink, ParamMode, Theory};

/// Index of an atom inside a [`Universe`]. Universe atoms are sorted by
/// rendered text, so index order is lexicographic order.
pub type AtomIdx = u32;

/// Reflexive-transitive closures of the user IS-A links, one relation
/// per symbol kind.
#[derive(Debug, Clone)]
pub struct IsaClosure {
    consts: Vec<BTreeSet<u32>>,
    props: Vec<BTreeSet<u32>>,
    preds: Vec<BTreeSet<u32>>,
}

fn closure_from_edges(n: usize, edges: &[(u32, u32)]) -> Vec<BTreeSet<u32>> {
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        adj[a as usize].insert(b);
    }
    let mut reach = Vec::with_capacity(n);
    for start in 0..n as u32 {
        let mut seen = BTreeSet::from([start]);
        let mut queue = vec![start];
        while let Some(x) = queue.pop() {
            for &y in &adj[x as usize] {
                if seen.insert(y) {
                    queue.push(y);
                }
            }
        }
        reach.push(seen);
    }
    reach
}

impl IsaClosure {
    /// All constants reachable upward from `c`, including `c` itself.
    pub fn const_reach(&self, c: u32) -> &BTreeSet<u32> {
        &self.consts[c as usize]
    }

    pub fn prop_reach(&self, p: u32) -> &BTreeSet<u32> {
        &self.props[p as usize]
    }

    pub fn pred_reach(&self, p: u32) -> &BTreeSet<u32> {
        &self.preds[p as usize]
    }

    fn inverse(rel: &[BTreeSet<u32>]) -> Vec<BTreeSet<u32>> {
        let mut inv = vec![BTreeSet::new(); rel.len()];
        for (a, set) in rel.iter().enumerate() {
            for &b in set {
                inv[b as usize].insert(a as u32);
            }
        }
        inv
    }
}

/// Computes the smallest reflexive-transitive relations containing the
/// theory's links. Cycles are permitted and handled by plain
/// reachability.
pub fn close_isa(theory: &Theory) -> IsaClosure {
    let n_consts = theory.symbols().consts().count();
    let n_preds = theory.symbols().preds().count();
    let mut const_edges = Vec::new();
    let mut prop_edges = Vec::new();
    let mut pred_edges = Vec::new();
    for link in theory.links() {
        match *link {
            OntoLink::Const(a, b) => const_edges.push((a.0, b.0)),
            OntoLink::Prop(a, b) => prop_edges.push((a.0, b.0)),
            OntoLink::Pred(a, b) => pred_edges.push((a.0, b.0)),
        }
    }
    IsaClosure {
        consts: closure_from_edges(n_consts, &const_edges),
        props: closure_from_edges(n_preds, &prop_edges),
        preds: closure_from_edges(n_preds, &pred_edges),
    }
}

/// The finite set of ground atoms the derivation rules range over,
/// sorted lexicographically by rendered text.
#[derive(Debug, Clone)]
pub struct Universe {
    atoms: Vec<GroundAtom>,
    texts: Vec<String>,
    index: HashMap<GroundAtom, AtomIdx>,
}

impl Universe {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, idx: AtomIdx) -> &GroundAtom {
        &self.atoms[idx as usize]
    }

    pub fn text(&self, idx: AtomIdx) -> &str {
        &self.texts[idx as usize]
    }

    pub fn lookup(&self, atom: &GroundAtom) -> Option<AtomIdx> {
        self.index.get(atom).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AtomIdx, &GroundAtom)> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i as AtomIdx, a))
    }
}

/// Collects the ground atoms occurring in the premises and closes the
/// set under single-argument replacement by taxonomy-related constants
/// (both directions, regardless of parameter mode) and predicate
/// replacement by taxonomy-related predicates (both directions).
///
/// Both directions are needed because the derivation rules look below an
/// effect as well as above: the base rule enumerates atoms under the
/// caused atom even for upward-inheriting predicates. Directionality is
/// enforced on the lifted links, not on universe membership.
pub fn build_universe(theory: &Theory, closure: &IsaClosure) -> Universe {
    let mut seeds: BTreeSet<GroundAtom> = theory.premise_atoms().cloned().collect();
    for link in theory.links() {
        if let OntoLink::Prop(a, b) = *link {
            seeds.insert(GroundAtom {
                pred: a,
                args: vec![],
            });
            seeds.insert(GroundAtom {
                pred: b,
                args: vec![],
            });
        }
    }

    let const_up = &closure.consts;
    let const_down = IsaClosure::inverse(const_up);
    let prop_both: Vec<BTreeSet<u32>> = both_directions(&closure.props);
    let pred_both: Vec<BTreeSet<u32>> = both_directions(&closure.preds);

    let mut atoms: BTreeSet<GroundAtom> = seeds.clone();
    let mut queue: Vec<GroundAtom> = seeds.into_iter().collect();
    while let Some(atom) = queue.pop() {
        let arity = atom.args.len();
        for i in 0..arity {
            let c = atom.args[i].0;
            let related = const_up[c as usize]
                .iter()
                .chain(const_down[c as usize].iter());
            for &c2 in related {
                if c2 == c {
                    continue;
                }
                let mut next = atom.clone();
                next.args[i] = crate::model::ConstId(c2);
                if atoms.insert(next.clone()) {
                    queue.push(next);
                }
            }
        }
        let p = atom.pred.0;
        let related_preds = if arity == 0 {
            &prop_both[p as usize]
        } else {
            &pred_both[p as usize]
        };
        for &p2 in related_preds {
            if p2 == p {
                continue;
            }
            let mut next = atom.clone();
            next.pred = crate::model::PredId(p2);
            if atoms.insert(next.clone()) {
                queue.push(next);
            }
        }
    }

    let mut pairs: Vec<(String, GroundAtom)> = atoms
        .into_iter()
        .map(|a| (theory.atom_text(&a), a))
        .collect();
    pairs.sort();
    let mut universe = Universe {
        atoms: Vec::with_capacity(pairs.len()),
        texts: Vec::with_capacity(pairs.len()),
        index: HashMap::new(),
    };
    for (i, (text, atom)) in pairs.into_iter().enumerate() {
        universe.index.insert(atom.clone(), i as AtomIdx);
        universe.atoms.push(atom);
        universe.texts.push(text);
    }
    universe
}

fn both_directions(rel: &[BTreeSet<u32>]) -> Vec<BTreeSet<u32>> {
    let inv = IsaClosure::inverse(rel);
    rel.iter()
        .zip(inv)
        .map(|(up, down)| up.union(&down).copied().collect())
        .collect()
}

/// The augmented ontological relation `=>`: a reflexive-transitive
/// relation over the universe, every link justified by a chain of
/// single-parameter or predicate-level lifts.
#[derive(Debug, Clone)]
pub struct AugmentedOntology {
    universe: Universe,
    /// `reach[a]` = all `b` with `a => b` (includes `a`).
    reach: Vec<BTreeSet<AtomIdx>>,
    /// `below[b]` = all `a` with `a => b` (includes `b`).
    below: Vec<BTreeSet<AtomIdx>>,
}

impl AugmentedOntology {
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Atoms reachable upward from `a`, including `a` itself.
    pub fn reach(&self, a: AtomIdx) -> &BTreeSet<AtomIdx> {
        &self.reach[a as usize]
    }

    /// Atoms from which `a` is reachable, including `a` itself.
    pub fn below(&self, a: AtomIdx) -> &BTreeSet<AtomIdx> {
        &self.below[a as usize]
    }

    pub fn has_link(&self, a: AtomIdx, b: AtomIdx) -> bool {
        self.reach[a as usize].contains(&b)
    }

    /// Non-reflexive links in lexicographic order.
    pub fn links(&self) -> Vec<(AtomIdx, AtomIdx)> {
        let mut out = Vec::new();
        for (a, set) in self.reach.iter().enumerate() {
            for &b in set {
                if b != a as AtomIdx {
                    out.push((a as AtomIdx, b));
                }
            }
        }
        out
    }
}

/// Lifts the closed IS-A relations to single-step links over the
/// universe, then closes reflexively and transitively.
pub fn augment(theory: &Theory, closure: &IsaClosure, universe: Universe) -> AugmentedOntology {
    let n = universe.len();
    let mut adj: Vec<BTreeSet<AtomIdx>> = vec![BTreeSet::new(); n];
    let add_edge = |adj: &mut Vec<BTreeSet<AtomIdx>>, from: &GroundAtom, to: GroundAtom| {
        if let (Some(f), Some(t)) = (universe.lookup(from), universe.lookup(&to)) {
            if f != t {
                adj[f as usize].insert(t);
            }
        }
    };

    for (idx, atom) in universe.iter() {
        let _ = idx;
        let decl = theory.symbols().pred(atom.pred);
        for (i, mode) in decl.modes.iter().enumerate() {
            let c = atom.args[i].0;
            match mode {
                ParamMode::One => {
                    // upward lift: replacing the argument by a super-concept
                    for &c2 in closure.const_reach(c) {
                        if c2 == c {
                            continue;
                        }
                        let mut next = atom.clone();
                        next.args[i] = crate::model::ConstId(c2);
                        add_edge(&mut adj, atom, next);
                    }
                }
                ParamMode::All => {
                    // downward lift: the super-concept atom implies the sub-concept atom
                    for (c2, reach) in closure.consts.iter().enumerate() {
                        let c2 = c2 as u32;
                        if c2 != c && reach.contains(&c) {
                            let mut next = atom.clone();
                            next.args[i] = crate::model::ConstId(c2);
                            add_edge(&mut adj, atom, next);
                        }
                    }
                }
                ParamMode::Na => {}
            }
        }
        let rel = if atom.args.is_empty() {
            closure.prop_reach(atom.pred.0)
        } else {
            closure.pred_reach(atom.pred.0)
        };
        for &p2 in rel {
            if p2 == atom.pred.0 {
                continue;
            }
            let mut next = atom.clone();
            next.pred = crate::model::PredId(p2);
            add_edge(&mut adj, atom, next);
        }
    }

    let mut reach = Vec::with_capacity(n);
    for start in 0..n as AtomIdx {
        let mut seen = BTreeSet::from([start]);
        let mut queue = vec![start];
        while let Some(x) = queue.pop() {
            for &y in &adj[x as usize] {
                if seen.insert(y) {
                    queue.push(y);
                }
            }
        }
        reach.push(seen);
    }
    let mut below: Vec<BTreeSet<AtomIdx>> = vec![BTreeSet::new(); n];
    for (a, set) in reach.iter().enumerate() {
        for &b in set {
            below[b as usize].insert(a as AtomIdx);
        }
    }
    AugmentedOntology {
        universe,
        reach,
        below,
    }
}

/// One classical implication `sub -> super` per non-reflexive link of
/// the augmented relation. Reflexive links are tautologies and emit
/// nothing.
pub fn implied_implications(onto: &AugmentedOntology) -> Vec<(AtomIdx, AtomIdx)> {
    onto.links()
}

/// Convenience: closure, universe and augmentation in one call.
pub fn build_ontology(theory: &Theory) -> AugmentedOntology {
    let closure = close_isa(theory);
    let universe = build_universe(theory, &closure);
    augment(theory, &closure, universe)
}
