//! The derivation pipeline: saturate the background theory, fire the
//! base rule over active causal atoms, close under transitivity, then
//! simplify and minimize the gathered provisos.
//!
//! Every emitted statement `a explains b because_possible Φ` is
//! defeasible: it holds only while `W` does not refute `⋀Φ`. Transitivity
//! runs on the raw gathered conditions and simplification strictly after
//! closure. A simplified proviso is equivalent to its source modulo `W`,
//! so no consistency gate can answer differently on the raw form.
//!
//! All iteration is over index-sorted structures and the SAT backend is
//! deterministic, so derivations, traces and output ordering are stable
//! across runs.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::model::{
    CausalAtom, CausalLeaf, Derivation, DerivRule, ExplanationAtom, Formula, GroundAtom, Theory,
};
use crate::ontology::{self, AtomIdx, AugmentedOntology, Universe};
use crate::sat::{CnfBuilder, ClauseSet, Lit, PropFormula, VarId, VarOrigin};

/// Provisos up to this size are simplified by exact minimal-subset
/// search; larger ones fall back to greedy single-element removal.
const EXACT_SIMPLIFY_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    /// The saturated background theory is unsatisfiable. With a
    /// contradictory `W` every consistency proviso fails, so instead of
    /// silently deriving nothing the engine refuses to run.
    #[error("background theory is inconsistent; no explanation can be assessed")]
    InconsistentTheory,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown atom `{0}`: not in the grounding universe of this theory")]
    UnknownAtom(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// The background theory in clause form, the active causal atoms, and
/// the augmented ontology: everything the derivation rules consult.
///
/// Immutable once built; queries allocate their own solver state.
#[derive(Debug, Clone)]
pub struct SaturatedContext {
    onto: AugmentedOntology,
    clauses: ClauseSet,
    active: Vec<(AtomIdx, AtomIdx)>,
}

impl SaturatedContext {
    pub fn universe(&self) -> &Universe {
        self.onto.universe()
    }

    pub fn ontology(&self) -> &AugmentedOntology {
        &self.onto
    }

    pub fn clauses(&self) -> &ClauseSet {
        &self.clauses
    }

    /// Causal atoms `(cause, effect)` entailed by the saturated theory,
    /// in lexicographic order.
    pub fn active_causal_atoms(&self) -> &[(AtomIdx, AtomIdx)] {
        &self.active
    }

    fn atom_lit(&self, idx: AtomIdx) -> Lit {
        Lit::pos(VarId(idx))
    }

    /// `W* ⊭ ¬⋀atoms`: the atoms are jointly possible.
    pub fn consistent_with(&self, atoms: &BTreeSet<AtomIdx>) -> bool {
        let lits: Vec<Lit> = atoms.iter().map(|&a| self.atom_lit(a)).collect();
        self.clauses.consistent_with(&lits)
    }

    /// `W* ⊨ ⋀antecedent -> ⋁_i ⋀disjuncts[i]`.
    pub fn entails_impl(&self, antecedent: &BTreeSet<AtomIdx>, disjuncts: &[&BTreeSet<AtomIdx>]) -> bool {
        let assumptions: Vec<Lit> = antecedent.iter().map(|&a| self.atom_lit(a)).collect();
        let extra: Vec<Vec<Lit>> = disjuncts
            .iter()
            .map(|d| d.iter().map(|&a| -self.atom_lit(a)).collect())
            .collect();
        !self.clauses.satisfiable_with(&assumptions, &extra)
    }
}

/// Consistency-gate cache for one pipeline run. Gate answers depend only
/// on the proviso set, and the same sets recur constantly during closure.
struct Gates<'a> {
    ctx: &'a SaturatedContext,
    consistent: HashMap<BTreeSet<AtomIdx>, bool>,
}

impl<'a> Gates<'a> {
    fn new(ctx: &'a SaturatedContext) -> Self {
        Gates {
            ctx,
            consistent: HashMap::new(),
        }
    }

    fn consistent(&mut self, atoms: &BTreeSet<AtomIdx>) -> bool {
        if let Some(&v) = self.consistent.get(atoms) {
            return v;
        }
        let v = self.ctx.consistent_with(atoms);
        self.consistent.insert(atoms.clone(), v);
        v
    }

    fn entails(&self, antecedent: &BTreeSet<AtomIdx>, disjuncts: &[&BTreeSet<AtomIdx>]) -> bool {
        self.ctx.entails_impl(antecedent, disjuncts)
    }
}

/// One derivation step in an [`ExplanationSet`] arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: StepRule,
    pub premises: Vec<u32>,
    pub explanans: AtomIdx,
    pub explanandum: AtomIdx,
    pub proviso: BTreeSet<AtomIdx>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepRule {
    Base {
        cause: AtomIdx,
        effect: AtomIdx,
        lower: AtomIdx,
    },
    Trans,
    Simplify {
        kept: BTreeSet<AtomIdx>,
        dropped: Vec<BTreeSet<AtomIdx>>,
    },
}

/// A proviso together with the arena index of its derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub proviso: BTreeSet<AtomIdx>,
    pub step: u32,
}

/// Derived explanation atoms keyed by `(explanans, explanandum)`, each
/// key holding the set of provisos under which the explanation stands.
#[derive(Debug, Clone, Default)]
pub struct ExplanationSet {
    entries: BTreeMap<(AtomIdx, AtomIdx), Vec<Entry>>,
    steps: Vec<Step>,
    diagnostics: Vec<String>,
}

impl ExplanationSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn key_count(&self) -> usize {
        self.entries.len()
    }

    pub fn atom_count(&self) -> usize {
        self.entries.values().map(|v| v.len()).sum()
    }

    pub fn keys(&self) -> impl Iterator<Item = (AtomIdx, AtomIdx)> + '_ {
        self.entries.keys().copied()
    }

    pub fn provisos(&self, key: (AtomIdx, AtomIdx)) -> &[Entry] {
        self.entries.get(&key).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = ((AtomIdx, AtomIdx), &Entry)> + '_ {
        self.entries
            .iter()
            .flat_map(|(k, v)| v.iter().map(move |e| (*k, e)))
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn contains(&self, key: (AtomIdx, AtomIdx), proviso: &BTreeSet<AtomIdx>) -> bool {
        self.entries
            .get(&key)
            .map(|v| v.iter().any(|e| &e.proviso == proviso))
            .unwrap_or(false)
    }

    fn push_step(&mut self, step: Step) -> u32 {
        self.steps.push(step);
        (self.steps.len() - 1) as u32
    }

    /// Inserts keeping per-key entries sorted by proviso; returns false
    /// on duplicates.
    fn add(&mut self, key: (AtomIdx, AtomIdx), entry: Entry) -> bool {
        let v = self.entries.entry(key).or_default();
        match v.binary_search_by(|e| e.proviso.cmp(&entry.proviso)) {
            Ok(_) => false,
            Err(pos) => {
                v.insert(pos, entry);
                true
            }
        }
    }

    /// Resolves the set into plain [`ExplanationAtom`]s in deterministic
    /// order: explanans, explanandum, then proviso, all lexicographic.
    pub fn to_atoms(&self, universe: &Universe) -> Vec<ExplanationAtom> {
        let mut out = Vec::new();
        for ((ans, dum), entry) in self.iter() {
            out.push(ExplanationAtom {
                explanans: universe.atom(ans).clone(),
                explanandum: universe.atom(dum).clone(),
                proviso: entry
                    .proviso
                    .iter()
                    .map(|&i| universe.atom(i).clone())
                    .collect(),
                trace: self.derivation_of(entry.step, universe),
            });
        }
        out
    }

    /// Owned derivation tree for one arena step.
    pub fn derivation_of(&self, step: u32, universe: &Universe) -> Derivation {
        let s = &self.steps[step as usize];
        let resolve_set = |set: &BTreeSet<AtomIdx>| -> BTreeSet<GroundAtom> {
            set.iter().map(|&i| universe.atom(i).clone()).collect()
        };
        let rule = match &s.rule {
            StepRule::Base {
                cause,
                effect,
                lower,
            } => DerivRule::Base {
                causal: CausalAtom {
                    cause: universe.atom(*cause).clone(),
                    effect: universe.atom(*effect).clone(),
                },
                lower: universe.atom(*lower).clone(),
                target: universe.atom(s.explanandum).clone(),
            },
            StepRule::Trans => DerivRule::Trans,
            StepRule::Simplify { kept, dropped } => DerivRule::Simplify {
                kept: resolve_set(kept),
                dropped: dropped.iter().map(resolve_set).collect(),
            },
        };
        Derivation {
            rule,
            premises: s
                .premises
                .iter()
                .map(|&p| self.derivation_of(p, universe))
                .collect(),
        }
    }

    /// Text-keyed view for comparisons across engines.
    pub fn normalized(&self, universe: &Universe) -> Normalized {
        let mut out = BTreeMap::new();
        for ((ans, dum), entry) in self.iter() {
            let key = (
                universe.text(ans).to_string(),
                universe.text(dum).to_string(),
            );
            let proviso: BTreeSet<String> = entry
                .proviso
                .iter()
                .map(|&i| universe.text(i).to_string())
                .collect();
            out.entry(key)
                .or_insert_with(BTreeSet::new)
                .insert(proviso);
        }
        out
    }
}

/// `(explanans, explanandum) -> set of provisos`, everything by rendered
/// text. The shape engine/oracle diffs work on.
pub type Normalized = BTreeMap<(String, String), BTreeSet<BTreeSet<String>>>;

/// Builds the clause form of the saturated theory `W*`: the classical
/// formulas, the causal formulas over reified causal-atom variables, one
/// bridge clause `c(a,b) -> (a -> b)` per causal atom occurring in `C`,
/// and one implication per non-reflexive augmented link.
///
/// Fails with [`EngineError::InconsistentTheory`] when `W*` has no model.
pub fn saturate(
    theory: &Theory,
    onto: AugmentedOntology,
) -> Result<SaturatedContext, EngineError> {
    let universe = onto.universe();
    let mut builder = CnfBuilder::new();
    for (idx, _) in universe.iter() {
        let v = builder.new_var(VarOrigin::Atom(idx));
        debug_assert_eq!(v.0, idx);
    }

    let mut causal_pairs: BTreeSet<(AtomIdx, AtomIdx)> = BTreeSet::new();
    for c in theory.causal_atoms() {
        let cause = universe.lookup(&c.cause).expect("premise atom in universe");
        let effect = universe.lookup(&c.effect).expect("premise atom in universe");
        causal_pairs.insert((cause, effect));
    }
    let mut causal_vars = BTreeMap::new();
    for &(cause, effect) in &causal_pairs {
        let v = builder.new_var(VarOrigin::Causal(cause, effect));
        causal_vars.insert((cause, effect), v);
    }

    let atom_lit = |a: &GroundAtom| -> PropFormula {
        Formula::Leaf(Lit::pos(VarId(
            universe.lookup(a).expect("premise atom in universe"),
        )))
    };
    for f in theory.classical() {
        let prop = f.map_leaves(&mut |a| atom_lit(a));
        builder.assert_formula(&prop);
    }
    for f in theory.causal() {
        let prop = f.map_leaves(&mut |leaf| match leaf {
            CausalLeaf::Atom(a) => atom_lit(a),
            CausalLeaf::Causal(c) => {
                let cause = universe.lookup(&c.cause).unwrap();
                let effect = universe.lookup(&c.effect).unwrap();
                Formula::Leaf(Lit::pos(causal_vars[&(cause, effect)]))
            }
        });
        builder.assert_formula(&prop);
    }
    for (&(cause, effect), &v) in &causal_vars {
        builder.add_clause(vec![
            Lit::neg(v),
            Lit::neg(VarId(cause)),
            Lit::pos(VarId(effect)),
        ]);
    }
    for (sub, sup) in ontology::implied_implications(&onto) {
        builder.add_clause(vec![Lit::neg(VarId(sub)), Lit::pos(VarId(sup))]);
    }

    let clauses = builder.finish();
    if !clauses.satisfiable(&[]) {
        return Err(EngineError::InconsistentTheory);
    }

    let active: Vec<(AtomIdx, AtomIdx)> = causal_vars
        .iter()
        .filter(|&(_, &v)| !clauses.satisfiable(&[Lit::neg(v)]))
        .map(|(&pair, _)| pair)
        .collect();

    Ok(SaturatedContext {
        onto,
        clauses,
        active,
    })
}

/// Fires the base rule: for every active causal atom `(a, effect)`,
/// every `lower => effect` and every `lower => target`, if `{a, lower}`
/// is possible with `W*`, emit `a explains target because_possible
/// {a, lower}`.
pub fn base_case(ctx: &SaturatedContext) -> ExplanationSet {
    let mut set = ExplanationSet::default();
    let mut gates = Gates::new(ctx);
    for &(cause, effect) in &ctx.active {
        for &lower in ctx.onto.below(effect) {
            let proviso: BTreeSet<AtomIdx> = BTreeSet::from([cause, lower]);
            if !gates.consistent(&proviso) {
                continue;
            }
            for &target in ctx.onto.reach(lower) {
                if set.contains((cause, target), &proviso) {
                    continue;
                }
                let step = set.push_step(Step {
                    rule: StepRule::Base {
                        cause,
                        effect,
                        lower,
                    },
                    premises: vec![],
                    explanans: cause,
                    explanandum: target,
                    proviso: proviso.clone(),
                });
                set.add(
                    (cause, target),
                    Entry {
                        proviso: proviso.clone(),
                        step,
                    },
                );
            }
        }
    }
    set
}

/// Closes the set under composition: from `(a, b, Φ)` and `(b, c, Ψ)`
/// with `Φ ∪ Ψ` possible, derive `(a, c, Φ ∪ Ψ)`. Terminates because
/// provisos range over subsets of the finite universe.
pub fn transitivity_closure(set: &ExplanationSet, ctx: &SaturatedContext) -> ExplanationSet {
    let mut out = set.clone();
    let mut gates = Gates::new(ctx);

    // flat worklist over (explanans, explanandum, proviso, step)
    let mut all: Vec<(AtomIdx, AtomIdx, BTreeSet<AtomIdx>, u32)> = Vec::new();
    let mut by_ans: BTreeMap<AtomIdx, Vec<usize>> = BTreeMap::new();
    let mut by_dum: BTreeMap<AtomIdx, Vec<usize>> = BTreeMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    let register =
        |all: &mut Vec<(AtomIdx, AtomIdx, BTreeSet<AtomIdx>, u32)>,
         by_ans: &mut BTreeMap<AtomIdx, Vec<usize>>,
         by_dum: &mut BTreeMap<AtomIdx, Vec<usize>>,
         queue: &mut VecDeque<usize>,
         item: (AtomIdx, AtomIdx, BTreeSet<AtomIdx>, u32)| {
            let id = all.len();
            by_ans.entry(item.0).or_default().push(id);
            by_dum.entry(item.1).or_default().push(id);
            all.push(item);
            queue.push_back(id);
        };

    for ((ans, dum), entry) in set.iter() {
        register(
            &mut all,
            &mut by_ans,
            &mut by_dum,
            &mut queue,
            (ans, dum, entry.proviso.clone(), entry.step),
        );
    }

    while let Some(id) = queue.pop_front() {
        let (ans, dum, _, _) = all[id].clone();
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        if let Some(rights) = by_ans.get(&dum) {
            candidates.extend(rights.iter().map(|&r| (id, r)));
        }
        if let Some(lefts) = by_dum.get(&ans) {
            candidates.extend(lefts.iter().map(|&l| (l, id)));
        }
        for (l, r) in candidates {
            let (l_ans, _, l_prov, l_step) = all[l].clone();
            let (_, r_dum, r_prov, r_step) = all[r].clone();
            let key = (l_ans, r_dum);
            let union: BTreeSet<AtomIdx> = l_prov.union(&r_prov).copied().collect();
            if out.contains(key, &union) || !gates.consistent(&union) {
                continue;
            }
            let new_step = out.push_step(Step {
                rule: StepRule::Trans,
                premises: vec![l_step, r_step],
                explanans: key.0,
                explanandum: key.1,
                proviso: union.clone(),
            });
            out.add(
                key,
                Entry {
                    proviso: union.clone(),
                    step: new_step,
                },
            );
            register(
                &mut all,
                &mut by_ans,
                &mut by_dum,
                &mut queue,
                (key.0, key.1, union, new_step),
            );
        }
    }
    out
}

/// All minimal proper subsets `Φ ⊆ Ψ` with `W* ⊨ ⋀Φ -> ⋀(Ψ\Φ)`.
/// Passing is upward closed, so the minimal ones form an antichain; when
/// none exists the result is `Ψ` itself. Provisos larger than
/// [`EXACT_SIMPLIFY_LIMIT`] get greedy per-element removal instead.
fn minimal_simplifications(
    gates: &Gates,
    proviso: &BTreeSet<AtomIdx>,
) -> Vec<BTreeSet<AtomIdx>> {
    if proviso.len() <= 1 {
        return vec![proviso.clone()];
    }
    let atoms: Vec<AtomIdx> = proviso.iter().copied().collect();
    let n = atoms.len();
    if n > EXACT_SIMPLIFY_LIMIT {
        let mut current = proviso.clone();
        loop {
            let mut changed = false;
            for &x in &atoms {
                if current.len() > 1 && current.contains(&x) {
                    let mut rest = current.clone();
                    rest.remove(&x);
                    let dropped = BTreeSet::from([x]);
                    if gates.entails(&rest, &[&dropped]) {
                        current = rest;
                        changed = true;
                    }
                }
            }
            if !changed {
                return vec![current];
            }
        }
    }
    let mut subsets: Vec<(usize, Vec<AtomIdx>)> = (1..(1u32 << n) - 1)
        .map(|mask| {
            let sub: Vec<AtomIdx> = (0..n)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| atoms[i])
                .collect();
            (sub.len(), sub)
        })
        .collect();
    subsets.sort();
    let mut minimal: Vec<BTreeSet<AtomIdx>> = Vec::new();
    for (_, sub) in subsets {
        let candidate: BTreeSet<AtomIdx> = sub.into_iter().collect();
        if minimal.iter().any(|m| m.is_subset(&candidate)) {
            continue;
        }
        let rest: BTreeSet<AtomIdx> = proviso.difference(&candidate).copied().collect();
        if gates.entails(&candidate, &[&rest]) {
            minimal.push(candidate);
        }
    }
    if minimal.is_empty() {
        vec![proviso.clone()]
    } else {
        minimal
    }
}

/// Replaces stored provisos by simplified ones.
///
/// Two moves, iterated per key until nothing changes: each proviso is
/// replaced by its minimal entailing subsets, and any intersection of
/// two or more stored provisos whose conjunction entails the disjunction
/// of the stripped-off parts replaces those provisos. Provisos never
/// become empty; a proviso entailed outright by `W*` is kept at
/// singleton size and the condition is recorded as a diagnostic.
pub fn simplify(set: &ExplanationSet, ctx: &SaturatedContext) -> ExplanationSet {
    let gates = Gates::new(ctx);
    let mut out = ExplanationSet {
        entries: BTreeMap::new(),
        steps: set.steps.clone(),
        diagnostics: set.diagnostics.clone(),
    };

    let keys: Vec<(AtomIdx, AtomIdx)> = set.keys().collect();
    for key in keys {
        let mut family: Vec<Entry> = Vec::new();
        let push_family = |family: &mut Vec<Entry>, entry: Entry| {
            match family.binary_search_by(|e| e.proviso.cmp(&entry.proviso)) {
                Ok(_) => {}
                Err(pos) => family.insert(pos, entry),
            }
        };

        for entry in set.provisos(key) {
            if gates.entails(&BTreeSet::new(), &[&entry.proviso]) {
                out.diagnostics.push(format!(
                    "proviso of ({}, {}) is entailed outright by the background theory; \
                     keeping its minimal non-empty forms",
                    ctx.universe().text(key.0),
                    ctx.universe().text(key.1),
                ));
            }
            let minis = minimal_simplifications(&gates, &entry.proviso);
            for m in minis {
                if m == entry.proviso {
                    push_family(&mut family, entry.clone());
                } else {
                    let dropped: BTreeSet<AtomIdx> =
                        entry.proviso.difference(&m).copied().collect();
                    let step = out.push_step(Step {
                        rule: StepRule::Simplify {
                            kept: m.clone(),
                            dropped: vec![dropped],
                        },
                        premises: vec![entry.step],
                        explanans: key.0,
                        explanandum: key.1,
                        proviso: m.clone(),
                    });
                    push_family(&mut family, Entry { proviso: m, step });
                }
            }
        }

        // Disjunctive move over intersections of stored provisos.
        loop {
            let mut candidates: BTreeSet<BTreeSet<AtomIdx>> =
                family.iter().map(|e| e.proviso.clone()).collect();
            loop {
                let mut fresh: Vec<BTreeSet<AtomIdx>> = Vec::new();
                let cand_vec: Vec<&BTreeSet<AtomIdx>> = candidates.iter().collect();
                for i in 0..cand_vec.len() {
                    for j in (i + 1)..cand_vec.len() {
                        let inter: BTreeSet<AtomIdx> =
                            cand_vec[i].intersection(cand_vec[j]).copied().collect();
                        if !inter.is_empty() && !candidates.contains(&inter) {
                            fresh.push(inter);
                        }
                    }
                }
                if fresh.is_empty() {
                    break;
                }
                candidates.extend(fresh);
            }

            let mut ordered: Vec<BTreeSet<AtomIdx>> = candidates.into_iter().collect();
            ordered.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));

            let mut applied = false;
            for candidate in ordered {
                let supersets: Vec<usize> = family
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| candidate.is_subset(&e.proviso) && candidate != e.proviso)
                    .map(|(i, _)| i)
                    .collect();
                if supersets.is_empty() {
                    continue;
                }
                let dropped: Vec<BTreeSet<AtomIdx>> = supersets
                    .iter()
                    .map(|&i| {
                        family[i]
                            .proviso
                            .difference(&candidate)
                            .copied()
                            .collect()
                    })
                    .collect();
                let refs: Vec<&BTreeSet<AtomIdx>> = dropped.iter().collect();
                if !gates.entails(&candidate, &refs) {
                    continue;
                }
                let premises: Vec<u32> = supersets.iter().map(|&i| family[i].step).collect();
                let already_present = family
                    .iter()
                    .any(|e| e.proviso == candidate);
                for &i in supersets.iter().rev() {
                    family.remove(i);
                }
                if !already_present {
                    let step = out.push_step(Step {
                        rule: StepRule::Simplify {
                            kept: candidate.clone(),
                            dropped,
                        },
                        premises,
                        explanans: key.0,
                        explanandum: key.1,
                        proviso: candidate.clone(),
                    });
                    // the fresh candidate may itself be reducible
                    for m in minimal_simplifications(&gates, &candidate) {
                        if m == candidate {
                            push_family(
                                &mut family,
                                Entry {
                                    proviso: candidate.clone(),
                                    step,
                                },
                            );
                        } else {
                            let extra: BTreeSet<AtomIdx> =
                                candidate.difference(&m).copied().collect();
                            let step2 = out.push_step(Step {
                                rule: StepRule::Simplify {
                                    kept: m.clone(),
                                    dropped: vec![extra],
                                },
                                premises: vec![step],
                                explanans: key.0,
                                explanandum: key.1,
                                proviso: m.clone(),
                            });
                            push_family(&mut family, Entry { proviso: m, step: step2 });
                        }
                    }
                }
                applied = true;
                break;
            }
            if !applied {
                break;
            }
        }

        for entry in family {
            out.add(key, entry);
        }
    }
    out
}

/// Keeps only subset-minimal provisos per key, preserving the survivors'
/// derivations.
pub fn minimize(set: &ExplanationSet) -> ExplanationSet {
    let mut out = ExplanationSet {
        entries: BTreeMap::new(),
        steps: set.steps.clone(),
        diagnostics: set.diagnostics.clone(),
    };
    for (key, entries) in &set.entries {
        for e in entries {
            let dominated = entries
                .iter()
                .any(|other| other.proviso != e.proviso && other.proviso.is_subset(&e.proviso));
            if !dominated {
                out.add(*key, e.clone());
            }
        }
    }
    out
}

/// The whole pipeline, minimization included.
pub fn derive_all(theory: &Theory) -> Result<(SaturatedContext, ExplanationSet), EngineError> {
    let (ctx, set) = derive_unminimized(theory)?;
    let set = minimize(&set);
    Ok((ctx, set))
}

/// The pipeline without the final minimal-proviso filter: every derived
/// proviso in simplified form, dominated ones included.
pub fn derive_unminimized(
    theory: &Theory,
) -> Result<(SaturatedContext, ExplanationSet), EngineError> {
    let onto = ontology::build_ontology(theory);
    let ctx = saturate(theory, onto)?;
    let base = base_case(&ctx);
    let closed = transitivity_closure(&base, &ctx);
    let simplified = simplify(&closed, &ctx);
    Ok((ctx, simplified))
}

/// Derives everything and filters by optional explanans/explanandum.
/// Filter atoms must belong to the theory's grounding universe.
pub fn explain_query(
    theory: &Theory,
    from: Option<&GroundAtom>,
    to: Option<&GroundAtom>,
) -> Result<Vec<ExplanationAtom>, QueryError> {
    let (ctx, set) = derive_all(theory)?;
    let universe = ctx.universe();
    let from_idx = match from {
        Some(a) => Some(
            universe
                .lookup(a)
                .ok_or_else(|| QueryError::UnknownAtom(theory.atom_text(a)))?,
        ),
        None => None,
    };
    let to_idx = match to {
        Some(a) => Some(
            universe
                .lookup(a)
                .ok_or_else(|| QueryError::UnknownAtom(theory.atom_text(a)))?,
        ),
        None => None,
    };
    let mut out = Vec::new();
    for ((ans, dum), entry) in set.iter() {
        if from_idx.is_some_and(|f| f != ans) || to_idx.is_some_and(|t| t != dum) {
            continue;
        }
        out.push(ExplanationAtom {
            explanans: universe.atom(ans).clone(),
            explanandum: universe.atom(dum).clone(),
            proviso: entry
                .proviso
                .iter()
                .map(|&i| universe.atom(i).clone())
                .collect(),
            trace: set.derivation_of(entry.step, universe),
        });
    }
    Ok(out)
}

/// Replays every derivation in the set and checks the simplification
/// certificates against `W*`. Returns the first failure description.
pub fn verify_derivations(ctx: &SaturatedContext, set: &ExplanationSet) -> Result<(), String> {
    let universe = ctx.universe();
    for ((ans, dum), entry) in set.iter() {
        let derivation = set.derivation_of(entry.step, universe);
        let (r_ans, r_dum, r_prov) = derivation.replay();
        let expected_prov: BTreeSet<GroundAtom> = entry
            .proviso
            .iter()
            .map(|&i| universe.atom(i).clone())
            .collect();
        if r_ans != *universe.atom(ans) || r_dum != *universe.atom(dum) || r_prov != expected_prov
        {
            return Err(format!(
                "replay mismatch for ({}, {})",
                universe.text(ans),
                universe.text(dum)
            ));
        }
    }
    for step in set.steps() {
        if let StepRule::Simplify { kept, dropped } = &step.rule {
            let refs: Vec<&BTreeSet<AtomIdx>> = dropped.iter().collect();
            if !ctx.entails_impl(kept, &refs) {
                return Err("simplification certificate does not hold".to_string());
            }
            if kept.is_empty() {
                return Err("empty proviso emitted".to_string());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_theory;

    fn idx(ctx: &SaturatedContext, t: &Theory, text: &str) -> AtomIdx {
        let atom = crate::parser::parse_atom(text, t).unwrap();
        ctx.universe().lookup(&atom).unwrap()
    }

    fn proviso_texts(ctx: &SaturatedContext, set: &ExplanationSet, key: (AtomIdx, AtomIdx)) -> Vec<Vec<String>> {
        set.provisos(key)
            .iter()
            .map(|e| {
                e.proviso
                    .iter()
                    .map(|&i| ctx.universe().text(i).to_string())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn saturate_sunshine_theory() {
        let t = parse_theory(
            "pred Sunshine/0. pred I_am_happy/0. pred I_am_singing/0.
             cause Sunshine => I_am_happy.
             cause I_am_happy => I_am_singing.",
        )
        .unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        assert_eq!(ctx.active_causal_atoms().len(), 2);
        // W* entails both induced implications
        let u = ctx.universe();
        let s = u.lookup(&t.resolve_atom("Sunshine", &[]).unwrap()).unwrap();
        let h = u.lookup(&t.resolve_atom("I_am_happy", &[]).unwrap()).unwrap();
        let sing = u
            .lookup(&t.resolve_atom("I_am_singing", &[]).unwrap())
            .unwrap();
        assert!(ctx.entails_impl(&BTreeSet::from([s]), &[&BTreeSet::from([h])]));
        assert!(ctx.entails_impl(&BTreeSet::from([h]), &[&BTreeSet::from([sing])]));
    }

    #[test]
    fn contexts_and_sets_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Theory>();
        assert_send_sync::<SaturatedContext>();
        assert_send_sync::<ExplanationSet>();
    }

    #[test]
    fn saturate_var_origins_are_bijective_for_non_aux() {
        let t = parse_theory(ALARM).unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let mut seen = BTreeSet::new();
        for origin in ctx.clauses().origins() {
            match origin {
                crate::sat::VarOrigin::Aux => {}
                other => assert!(seen.insert(*other), "duplicate origin {other:?}"),
            }
        }
        assert!(seen.len() >= ctx.universe().len());
    }

    #[test]
    fn saturate_empty_theory() {
        let t = parse_theory("").unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        assert!(ctx.active_causal_atoms().is_empty());
    }

    #[test]
    fn saturate_rejects_contradiction() {
        let t = parse_theory("pred A/0. fact A. fact !A.").unwrap();
        let err = saturate(&t, ontology::build_ontology(&t)).unwrap_err();
        assert_eq!(err, EngineError::InconsistentTheory);
    }

    #[test]
    fn base_case_flu_has_raw_two_element_proviso() {
        let t = parse_theory(
            "pred Flu/0. pred Fever_Temperature/0. cause Flu => Fever_Temperature.",
        )
        .unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let base = base_case(&ctx);
        assert_eq!(base.atom_count(), 1);
        let u = ctx.universe();
        let flu = u.lookup(&t.resolve_atom("Flu", &[]).unwrap()).unwrap();
        let fever = u
            .lookup(&t.resolve_atom("Fever_Temperature", &[]).unwrap())
            .unwrap();
        assert!(base.contains((flu, fever), &BTreeSet::from([flu, fever])));
        // simplification later reduces the proviso to the cause alone
        let simplified = simplify(&base, &ctx);
        assert!(simplified.contains((flu, fever), &BTreeSet::from([flu])));
    }

    const BELLS: &str = "
        pred On_alarm/0. pred Heard_bell/0. pred Heard_loud_bell/0. pred Heard_soft_bell/0.
        isa Heard_loud_bell -> Heard_bell.
        isa Heard_soft_bell -> Heard_bell.
        cause On_alarm => Heard_bell.
    ";

    #[test]
    fn base_case_bells_goes_downward() {
        let t = parse_theory(BELLS).unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let base = base_case(&ctx);
        let oa = idx(&ctx, &t, "On_alarm");
        let hlb = idx(&ctx, &t, "Heard_loud_bell");
        let hsb = idx(&ctx, &t, "Heard_soft_bell");
        assert!(base.contains((oa, hlb), &BTreeSet::from([oa, hlb])));
        assert!(base.contains((oa, hsb), &BTreeSet::from([oa, hsb])));
    }

    const ALARM: &str = "
        pred On/1. pred Heard/1(one). pred Wake_up/0.
        const alarm, warning_signal, loud_bell, hooter, loud_noise, red_flashing_light.
        isa loud_bell -> warning_signal.
        isa hooter -> warning_signal.
        isa loud_bell -> loud_noise.
        isa red_flashing_light -> warning_signal.
        cause On(alarm) => Heard(warning_signal).
        cause Heard(loud_noise) => Wake_up.
    ";

    #[test]
    fn base_case_alarm_derives_down_then_up() {
        let t = parse_theory(ALARM).unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let base = base_case(&ctx);
        let on = idx(&ctx, &t, "On(alarm)");
        let loud_noise = idx(&ctx, &t, "Heard(loud_noise)");
        let loud_bell = idx(&ctx, &t, "Heard(loud_bell)");
        // E1: down to Heard(loud_bell), up to Heard(loud_noise)
        assert!(base.contains((on, loud_noise), &BTreeSet::from([on, loud_bell])));
    }

    #[test]
    fn consistency_gate_examples_from_bells() {
        let t = parse_theory(BELLS).unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let pair = BTreeSet::from([idx(&ctx, &t, "On_alarm"), idx(&ctx, &t, "Heard_soft_bell")]);
        assert!(ctx.consistent_with(&pair));
        assert!(ctx.consistent_with(&BTreeSet::new()));

        let blocked = parse_theory(&format!("{BELLS} fact !(Heard_soft_bell & On_alarm).")).unwrap();
        let ctx2 = saturate(&blocked, ontology::build_ontology(&blocked)).unwrap();
        let pair2 = BTreeSet::from([
            idx(&ctx2, &blocked, "On_alarm"),
            idx(&ctx2, &blocked, "Heard_soft_bell"),
        ]);
        assert!(!ctx2.consistent_with(&pair2));
    }

    #[test]
    fn nested_causal_atoms_fire_only_when_entailed() {
        // a disjunction of causal atoms activates neither side
        let t = parse_theory("pred A/0. pred B/0. pred C/0. fact (A => B) | (A => C).").unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        assert!(ctx.active_causal_atoms().is_empty());
        let (_, set) = derive_all(&t).unwrap();
        assert!(set.is_empty());

        // a conjunction entails both, and both fire
        let t = parse_theory("pred A/0. pred B/0. pred C/0. fact (A => B) & (A => C).").unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        assert_eq!(ctx.active_causal_atoms().len(), 2);
        let (ctx, set) = derive_all(&t).unwrap();
        let a = idx(&ctx, &t, "A");
        let b = idx(&ctx, &t, "B");
        assert_eq!(proviso_texts(&ctx, &set, (a, b)), vec![vec!["A".to_string()]]);
    }

    #[test]
    fn asserted_self_cause_explains_itself() {
        let t = parse_theory("pred A/0. cause A => A.").unwrap();
        let (ctx, set) = derive_all(&t).unwrap();
        let a = idx(&ctx, &t, "A");
        assert_eq!(proviso_texts(&ctx, &set, (a, a)), vec![vec!["A".to_string()]]);
    }

    const SUNSHINE: &str = "
        pred Sunshine/0. pred I_am_happy/0. pred I_am_singing/0.
        cause Sunshine => I_am_happy.
        cause I_am_happy => I_am_singing.
    ";

    #[test]
    fn transitivity_gathers_conditions_before_simplification() {
        let t = parse_theory(SUNSHINE).unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let closed = transitivity_closure(&base_case(&ctx), &ctx);
        let s = idx(&ctx, &t, "Sunshine");
        let h = idx(&ctx, &t, "I_am_happy");
        let sing = idx(&ctx, &t, "I_am_singing");
        assert!(closed.contains((s, sing), &BTreeSet::from([s, h, sing])));
        let simplified = simplify(&closed, &ctx);
        assert_eq!(
            proviso_texts(&ctx, &simplified, (s, sing)),
            vec![vec!["Sunshine".to_string()]]
        );
    }

    #[test]
    fn transitivity_of_singleton_set_is_identity() {
        let t = parse_theory(
            "pred Flu/0. pred Fever_Temperature/0. cause Flu => Fever_Temperature.",
        )
        .unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let base = base_case(&ctx);
        let closed = transitivity_closure(&base, &ctx);
        assert_eq!(closed.atom_count(), base.atom_count());
    }

    #[test]
    fn disturbance_theory_simplifies_to_cause_alone() {
        let t = parse_theory(
            "pred On_alarm/0. pred Heard_bell/0. pred Heard_noise/0. pred Disturbance/0.
             isa Heard_bell -> Heard_noise.
             cause On_alarm => Heard_bell.
             cause Heard_noise => Disturbance.",
        )
        .unwrap();
        let (ctx, set) = derive_all(&t).unwrap();
        let oa = idx(&ctx, &t, "On_alarm");
        let d = idx(&ctx, &t, "Disturbance");
        assert_eq!(
            proviso_texts(&ctx, &set, (oa, d)),
            vec![vec!["On_alarm".to_string()]]
        );
    }

    #[test]
    fn simplify_merges_disjunctive_provisos() {
        // stored provisos {A, B1} and {A, B2} with W containing A -> B1 | B2
        // collapse to the single proviso {A}
        let t = parse_theory(
            "pred A/0. pred B1/0. pred B2/0. pred G/0.
             fact A -> B1 | B2.
             cause A => G.",
        )
        .unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let a = idx(&ctx, &t, "A");
        let b1 = idx(&ctx, &t, "B1");
        let b2 = idx(&ctx, &t, "B2");
        let g = idx(&ctx, &t, "G");
        let mut set = ExplanationSet::default();
        for lower in [b1, b2] {
            let proviso = BTreeSet::from([a, lower]);
            let step = set.push_step(Step {
                rule: StepRule::Base {
                    cause: a,
                    effect: g,
                    lower,
                },
                premises: vec![],
                explanans: a,
                explanandum: g,
                proviso: proviso.clone(),
            });
            set.add((a, g), Entry { proviso, step });
        }
        let simplified = simplify(&set, &ctx);
        assert_eq!(
            proviso_texts(&ctx, &simplified, (a, g)),
            vec![vec!["A".to_string()]]
        );
    }

    #[test]
    fn equivalent_atoms_yield_both_minimal_proviso_forms() {
        // A and B are equivalent under W*, so the raw proviso {A, B}
        // has two incomparable minimal forms and both must survive
        let t = parse_theory("pred A/0. pred B/0. cause A => B. fact B -> A.").unwrap();
        let (ctx, set) = derive_all(&t).unwrap();
        let a = idx(&ctx, &t, "A");
        let b = idx(&ctx, &t, "B");
        assert_eq!(
            proviso_texts(&ctx, &set, (a, b)),
            vec![vec!["A".to_string()], vec!["B".to_string()]]
        );
        let report =
            crate::oracle::diff_engine_oracle(&t, &crate::oracle::OracleLimits::default())
                .unwrap();
        assert!(report.identical);
    }

    #[test]
    fn simplify_leaves_contingent_provisos_alone() {
        let t = parse_theory("pred A/0. pred G/0. cause A => G. ").unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let a = idx(&ctx, &t, "A");
        let g = idx(&ctx, &t, "G");
        let set = simplify(&transitivity_closure(&base_case(&ctx), &ctx), &ctx);
        // {A} cannot shrink further: nothing entails A
        assert_eq!(proviso_texts(&ctx, &set, (a, g)), vec![vec!["A".to_string()]]);
    }

    #[test]
    fn minimize_drops_dominated_provisos() {
        // the inert tautology keeps B inside the grounding universe
        let t = parse_theory("pred A/0. pred B/0. pred G/0. cause A => G. fact B | !B.").unwrap();
        let ctx = saturate(&t, ontology::build_ontology(&t)).unwrap();
        let a = idx(&ctx, &t, "A");
        let b = idx(&ctx, &t, "B");
        let g = idx(&ctx, &t, "G");
        let mut set = ExplanationSet::default();
        for proviso in [BTreeSet::from([a]), BTreeSet::from([a, b])] {
            let step = set.push_step(Step {
                rule: StepRule::Base {
                    cause: a,
                    effect: g,
                    lower: g,
                },
                premises: vec![],
                explanans: a,
                explanandum: g,
                proviso: proviso.clone(),
            });
            set.add((a, g), Entry { proviso, step });
        }
        let min = minimize(&set);
        assert_eq!(min.provisos((a, g)).len(), 1);
        assert_eq!(min.provisos((a, g))[0].proviso, BTreeSet::from([a]));

        // incomparable provisos both survive
        let mut set2 = ExplanationSet::default();
        for proviso in [BTreeSet::from([a, b]), BTreeSet::from([a, g])] {
            let step = set2.push_step(Step {
                rule: StepRule::Base {
                    cause: a,
                    effect: g,
                    lower: g,
                },
                premises: vec![],
                explanans: a,
                explanandum: g,
                proviso: proviso.clone(),
            });
            set2.add((a, g), Entry { proviso, step });
        }
        assert_eq!(minimize(&set2).provisos((a, g)).len(), 2);
    }

    #[test]
    fn ruling_out_the_cause_defeats_the_explanation() {
        let with = parse_theory(
            "pred Flu/0. pred Fever_Temperature/0. cause Flu => Fever_Temperature. fact !Flu.",
        )
        .unwrap();
        let (_, set) = derive_all(&with).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn explain_query_rain_does_not_explain_being_alive() {
        let t = parse_theory(
            "pred Rain/0. pred I_growl/0. pred I_am_alive/0.
             cause Rain => I_growl.
             fact I_growl -> I_am_alive.",
        )
        .unwrap();
        let alive = t.resolve_atom("I_am_alive", &[]).unwrap();
        let atoms = explain_query(&t, None, Some(&alive)).unwrap();
        assert!(atoms.is_empty());
        let rain = t.resolve_atom("Rain", &[]).unwrap();
        let growl = t.resolve_atom("I_growl", &[]).unwrap();
        let atoms = explain_query(&t, Some(&rain), Some(&growl)).unwrap();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].proviso.len(), 1);
    }

    #[test]
    fn explain_query_rejects_atoms_outside_the_universe() {
        let t = parse_theory(
            "pred Flu/0. pred Fever_Temperature/0. pred Unrelated/1. const x.
             cause Flu => Fever_Temperature.",
        )
        .unwrap();
        let stray = t.resolve_atom("Unrelated", &["x"]).unwrap();
        let err = explain_query(&t, Some(&stray), None).unwrap_err();
        assert!(matches!(err, QueryError::UnknownAtom(_)));
    }

    #[test]
    fn derivations_replay_and_certificates_hold() {
        let t = parse_theory(ALARM).unwrap();
        let (ctx, set) = derive_all(&t).unwrap();
        verify_derivations(&ctx, &set).unwrap();
        let (ctx2, raw) = derive_unminimized(&t).unwrap();
        verify_derivations(&ctx2, &raw).unwrap();
    }
}
