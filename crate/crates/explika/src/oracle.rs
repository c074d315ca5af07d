//! Brute-force reference implementation for differential testing.
//!
//! Everything here is deliberately naive and shares no machinery with
//! the engine: satisfiability is bitset truth-table enumeration instead
//! of clause-form search, closures are full-rescan fixpoints instead of
//! worklists, the base rule is a triple-nested loop over the universe,
//! and simplification enumerates every subset of every stored proviso
//! and every group of provisos. On theories within [`OracleLimits`] the
//! outcome is ground truth to compare the engine against.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{self, Normalized};
use crate::model::{
    CausalLeaf, Formula, GroundAtom, OntoLink, ParamMode, Theory, TheoryBuilder,
};

#[derive(Debug, Clone)]
pub struct OracleLimits {
    /// Largest grounding universe the oracle will process.
    pub max_universe: usize,
    /// Largest proviso (and per-key proviso family) the exhaustive
    /// simplification will enumerate subsets of.
    pub max_enumeration: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_universe: 12,
            max_enumeration: 16,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle limit exceeded: {0}")]
    LimitExceeded(String),
}

/// Result of a full derivation, by either implementation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// The background theory is unsatisfiable.
    Inconsistent,
    /// Explanations keyed by rendered text.
    Derived(Normalized),
}

// ---------------------------------------------------------------------------
// Truth-table satisfiability over bitset columns
// ---------------------------------------------------------------------------

const MAX_TT_VARS: usize = 20;

#[derive(Debug, Clone)]
struct Table {
    n_vars: usize,
    words: usize,
    top_mask: u64,
}

type Col = Vec<u64>;

impl Table {
    fn new(n_vars: usize) -> Result<Table, OracleError> {
        if n_vars > MAX_TT_VARS {
            return Err(OracleError::LimitExceeded(format!(
                "{n_vars} truth-table variables (max {MAX_TT_VARS})"
            )));
        }
        let rows: u64 = 1 << n_vars;
        let words = rows.div_ceil(64) as usize;
        let top_mask = if rows.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (rows % 64)) - 1
        };
        Ok(Table {
            n_vars,
            words,
            top_mask,
        })
    }

    fn mask(&self, mut col: Col) -> Col {
        if let Some(last) = col.last_mut() {
            *last &= self.top_mask;
        }
        col
    }

    fn var_col(&self, v: usize) -> Col {
        debug_assert!(v < self.n_vars);
        let mut col = vec![0u64; self.words];
        if v < 6 {
            const PATTERNS: [u64; 6] = [
                0xAAAA_AAAA_AAAA_AAAA,
                0xCCCC_CCCC_CCCC_CCCC,
                0xF0F0_F0F0_F0F0_F0F0,
                0xFF00_FF00_FF00_FF00,
                0xFFFF_0000_FFFF_0000,
                0xFFFF_FFFF_0000_0000,
            ];
            col.fill(PATTERNS[v]);
        } else {
            for (w, word) in col.iter_mut().enumerate() {
                if (w >> (v - 6)) & 1 == 1 {
                    *word = u64::MAX;
                }
            }
        }
        self.mask(col)
    }

    fn full(&self) -> Col {
        self.mask(vec![u64::MAX; self.words])
    }

    fn eval(&self, f: &Formula<usize>) -> Col {
        match f {
            Formula::Leaf(v) => self.var_col(*v),
            Formula::Not(a) => {
                let col = self.eval(a);
                self.mask(col.into_iter().map(|w| !w).collect())
            }
            Formula::And(a, b) => zip_with(self.eval(a), self.eval(b), |x, y| x & y),
            Formula::Or(a, b) => zip_with(self.eval(a), self.eval(b), |x, y| x | y),
            Formula::Implies(a, b) => {
                let col = zip_with(self.eval(a), self.eval(b), |x, y| !x | y);
                self.mask(col)
            }
            Formula::Iff(a, b) => {
                let col = zip_with(self.eval(a), self.eval(b), |x, y| !(x ^ y));
                self.mask(col)
            }
        }
    }
}

fn zip_with(a: Col, b: Col, f: impl Fn(u64, u64) -> u64) -> Col {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

fn col_and(a: &Col, b: &Col) -> Col {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn col_nonzero(c: &Col) -> bool {
    c.iter().any(|&w| w != 0)
}

struct TtCtx {
    table: Table,
    premise: Col,
}

impl TtCtx {
    fn satisfiable(&self) -> bool {
        col_nonzero(&self.premise)
    }

    fn consistent(&self, atoms: &BTreeSet<usize>) -> bool {
        let mut col = self.premise.clone();
        for &a in atoms {
            col = col_and(&col, &self.table.var_col(a));
        }
        col_nonzero(&col)
    }

    /// premises ⊨ ⋀antecedent -> ⋁_i ⋀disjuncts[i]
    fn entails_impl(&self, antecedent: &BTreeSet<usize>, disjuncts: &[BTreeSet<usize>]) -> bool {
        let mut col = self.premise.clone();
        for &a in antecedent {
            col = col_and(&col, &self.table.var_col(a));
        }
        // subtract each disjunct's models; rows that survive violate the rhs
        let mut rhs = vec![0u64; self.table.words];
        for d in disjuncts {
            let mut dcol = self.table.full();
            for &a in d {
                dcol = col_and(&dcol, &self.table.var_col(a));
            }
            rhs = zip_with(rhs, dcol, |x, y| x | y);
        }
        let violating = zip_with(col, rhs, |x, y| x & !y);
        !col_nonzero(&self.table.mask(violating))
    }
}

// ---------------------------------------------------------------------------
// Naive grounding: closures, universe, augmented links
// ---------------------------------------------------------------------------

fn naive_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for i in 0..n {
        m[i][i] = true;
    }
    for &(a, b) in edges {
        m[a][b] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if m[i][j] {
                    for k in 0..n {
                        if m[j][k] && !m[i][k] {
                            m[i][k] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return m;
        }
    }
}

struct Ground {
    atoms: Vec<GroundAtom>,
    texts: Vec<String>,
    /// augmented relation, reflexive-transitive
    link: Vec<Vec<bool>>,
}

fn naive_ground(theory: &Theory) -> Ground {
    let n_consts = theory.symbols().consts().count();
    let n_preds = theory.symbols().preds().count();
    let mut const_edges = Vec::new();
    let mut prop_edges = Vec::new();
    let mut pred_edges = Vec::new();
    for link in theory.links() {
        match *link {
            OntoLink::Const(a, b) => const_edges.push((a.0 as usize, b.0 as usize)),
            OntoLink::Prop(a, b) => prop_edges.push((a.0 as usize, b.0 as usize)),
            OntoLink::Pred(a, b) => pred_edges.push((a.0 as usize, b.0 as usize)),
        }
    }
    let consts = naive_closure(n_consts, &const_edges);
    let props = naive_closure(n_preds, &prop_edges);
    let preds = naive_closure(n_preds, &pred_edges);

    let mut atoms: BTreeSet<GroundAtom> = theory.premise_atoms().cloned().collect();
    for link in theory.links() {
        if let OntoLink::Prop(a, b) = *link {
            atoms.insert(GroundAtom { pred: a, args: vec![] });
            atoms.insert(GroundAtom { pred: b, args: vec![] });
        }
    }
    loop {
        let mut fresh: BTreeSet<GroundAtom> = BTreeSet::new();
        for atom in &atoms {
            for i in 0..atom.args.len() {
                let c = atom.args[i].0 as usize;
                for c2 in 0..n_consts {
                    if c2 != c && (consts[c][c2] || consts[c2][c]) {
                        let mut next = atom.clone();
                        next.args[i] = crate::model::ConstId(c2 as u32);
                        fresh.insert(next);
                    }
                }
            }
            let p = atom.pred.0 as usize;
            let rel = if atom.args.is_empty() { &props } else { &preds };
            for p2 in 0..n_preds {
                if p2 != p && (rel[p][p2] || rel[p2][p]) {
                    let arity2 = theory
                        .symbols()
                        .pred(crate::model::PredId(p2 as u32))
                        .arity();
                    if arity2 == atom.args.len() {
                        let mut next = atom.clone();
                        next.pred = crate::model::PredId(p2 as u32);
                        fresh.insert(next);
                    }
                }
            }
        }
        let before = atoms.len();
        atoms.extend(fresh);
        if atoms.len() == before {
            break;
        }
    }

    let mut pairs: Vec<(String, GroundAtom)> = atoms
        .into_iter()
        .map(|a| (theory.atom_text(&a), a))
        .collect();
    pairs.sort();
    let texts: Vec<String> = pairs.iter().map(|(t, _)| t.clone()).collect();
    let atoms: Vec<GroundAtom> = pairs.into_iter().map(|(_, a)| a).collect();

    let n = atoms.len();
    let mut link = vec![vec![false; n]; n];
    for i in 0..n {
        link[i][i] = true;
    }
    loop {
        let mut changed = false;
        for a in 0..n {
            let aa = &atoms[a];
            let decl = theory.symbols().pred(aa.pred);
            for b in 0..n {
                if a == b || link[a][b] {
                    continue;
                }
                let bb = &atoms[b];
                let mut ok = false;
                if aa.args == bb.args && aa.pred != bb.pred {
                    let rel = if aa.args.is_empty() { &props } else { &preds };
                    ok = rel[aa.pred.0 as usize][bb.pred.0 as usize];
                }
                if !ok && aa.pred == bb.pred {
                    let diffs: Vec<usize> = (0..aa.args.len())
                        .filter(|&i| aa.args[i] != bb.args[i])
                        .collect();
                    if diffs.len() == 1 {
                        let i = diffs[0];
                        ok = match decl.modes[i] {
                            ParamMode::One => {
                                consts[aa.args[i].0 as usize][bb.args[i].0 as usize]
                            }
                            ParamMode::All => {
                                consts[bb.args[i].0 as usize][aa.args[i].0 as usize]
                            }
                            ParamMode::Na => false,
                        };
                    }
                }
                if ok {
                    link[a][b] = true;
                    changed = true;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if link[i][j] {
                    for k in 0..n {
                        if link[j][k] && !link[i][k] {
                            link[i][k] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    Ground { atoms, texts, link }
}

// ---------------------------------------------------------------------------
// Exhaustive derivation
// ---------------------------------------------------------------------------

type ProvisoFamily = BTreeSet<BTreeSet<usize>>;
type KeyedSets = BTreeMap<(usize, usize), ProvisoFamily>;

/// Replays the rule system exhaustively on one theory. Ground truth for
/// theories within the limits; unusable beyond them.
pub fn oracle_derive(theory: &Theory, limits: &OracleLimits) -> Result<Outcome, OracleError> {
    let ground = naive_ground(theory);
    let n = ground.atoms.len();
    if n > limits.max_universe {
        return Err(OracleError::LimitExceeded(format!(
            "universe has {n} atoms (max {})",
            limits.max_universe
        )));
    }
    let atom_of = |a: &GroundAtom| -> usize {
        ground.atoms.iter().position(|x| x == a).expect("in universe")
    };

    // Causal pairs: units are active outright; pairs nested in Boolean
    // causal formulas are reified as extra truth-table variables.
    let mut unit_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut nested_pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for f in theory.causal() {
        match f.as_unit_causal() {
            Some(c) => {
                unit_pairs.insert((atom_of(&c.cause), atom_of(&c.effect)));
            }
            None => {
                for leaf in f.leaves() {
                    if let CausalLeaf::Causal(c) = leaf {
                        nested_pairs.insert((atom_of(&c.cause), atom_of(&c.effect)));
                    }
                }
            }
        }
    }
    let reified: Vec<(usize, usize)> = nested_pairs.iter().copied().collect();
    let causal_var = |pair: (usize, usize)| -> Option<usize> {
        reified.iter().position(|&p| p == pair).map(|i| n + i)
    };

    let table = Table::new(n + reified.len())?;
    let mut premises: Vec<Formula<usize>> = Vec::new();
    for f in theory.classical() {
        premises.push(f.map_leaves(&mut |a| Formula::Leaf(atom_of(a))));
    }
    for f in theory.causal() {
        premises.push(f.map_leaves(&mut |leaf| match leaf {
            CausalLeaf::Atom(a) => Formula::Leaf(atom_of(a)),
            CausalLeaf::Causal(c) => {
                let pair = (atom_of(&c.cause), atom_of(&c.effect));
                match causal_var(pair) {
                    Some(v) => Formula::Leaf(v),
                    // unit-only pair: the statement itself asserts the
                    // induced implication
                    None => Formula::implies(Formula::Leaf(pair.0), Formula::Leaf(pair.1)),
                }
            }
        }));
    }
    for &(cause, effect) in &unit_pairs {
        premises.push(Formula::implies(Formula::Leaf(cause), Formula::Leaf(effect)));
        if let Some(v) = causal_var((cause, effect)) {
            premises.push(Formula::Leaf(v));
        }
    }
    for (i, &(cause, effect)) in reified.iter().enumerate() {
        premises.push(Formula::implies(
            Formula::Leaf(n + i),
            Formula::implies(Formula::Leaf(cause), Formula::Leaf(effect)),
        ));
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && ground.link[a][b] {
                premises.push(Formula::implies(Formula::Leaf(a), Formula::Leaf(b)));
            }
        }
    }

    let mut premise_col = table.full();
    for f in &premises {
        premise_col = col_and(&premise_col, &table.eval(f));
    }
    let tt = TtCtx {
        table,
        premise: premise_col,
    };
    if !tt.satisfiable() {
        return Ok(Outcome::Inconsistent);
    }

    let mut active: BTreeSet<(usize, usize)> = unit_pairs.clone();
    for &pair in &nested_pairs {
        let v = causal_var(pair).unwrap();
        if tt.entails_impl(&BTreeSet::new(), &[BTreeSet::from([v])]) {
            active.insert(pair);
        }
    }

    // Base rule by triple-nested enumeration over the universe.
    let mut sets: KeyedSets = BTreeMap::new();
    for &(cause, effect) in &active {
        for lower in 0..n {
            if !ground.link[lower][effect] {
                continue;
            }
            let proviso: BTreeSet<usize> = BTreeSet::from([cause, lower]);
            if !tt.consistent(&proviso) {
                continue;
            }
            for target in 0..n {
                if ground.link[lower][target] {
                    sets.entry((cause, target))
                        .or_default()
                        .insert(proviso.clone());
                }
            }
        }
    }

    // Transitivity to absolute fixpoint.
    loop {
        let snapshot: Vec<((usize, usize), BTreeSet<usize>)> = sets
            .iter()
            .flat_map(|(k, fam)| fam.iter().map(|p| (*k, p.clone())))
            .collect();
        let mut changed = false;
        for ((a, b), phi) in &snapshot {
            for ((b2, c), psi) in &snapshot {
                if b != b2 {
                    continue;
                }
                let union: BTreeSet<usize> = phi.union(psi).copied().collect();
                if sets
                    .get(&(*a, *c))
                    .map(|fam| fam.contains(&union))
                    .unwrap_or(false)
                {
                    continue;
                }
                if tt.consistent(&union) {
                    sets.entry((*a, *c)).or_default().insert(union);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Exhaustive simplification per key, to fixpoint.
    for family in sets.values_mut() {
        simplify_family(&tt, family, limits)?;
    }

    // Minimization: keep subset-minimal provisos only.
    for family in sets.values_mut() {
        let keep: ProvisoFamily = family
            .iter()
            .filter(|p| {
                !family
                    .iter()
                    .any(|q| q != *p && q.is_subset(p))
            })
            .cloned()
            .collect();
        *family = keep;
    }

    let mut out: Normalized = BTreeMap::new();
    for ((a, b), family) in sets {
        let key = (ground.texts[a].clone(), ground.texts[b].clone());
        let rendered: BTreeSet<BTreeSet<String>> = family
            .into_iter()
            .map(|p| p.into_iter().map(|i| ground.texts[i].clone()).collect())
            .collect();
        out.insert(key, rendered);
    }
    Ok(Outcome::Derived(out))
}

fn nonempty_proper_subsets(set: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    let atoms: Vec<usize> = set.iter().copied().collect();
    let n = atoms.len();
    let mut out = Vec::new();
    for mask in 1..((1u32 << n) - 1) {
        let sub: BTreeSet<usize> = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| atoms[i])
            .collect();
        out.push(sub);
    }
    out.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    out
}

fn simplify_family(
    tt: &TtCtx,
    family: &mut ProvisoFamily,
    limits: &OracleLimits,
) -> Result<(), OracleError> {
    loop {
        let mut changed = false;

        // Subset rule: every proviso is replaced by the minimal non-empty
        // subsets whose conjunction entails the rest.
        let snapshot: Vec<BTreeSet<usize>> = family.iter().cloned().collect();
        for psi in snapshot {
            if psi.len() > limits.max_enumeration {
                return Err(OracleError::LimitExceeded(format!(
                    "proviso with {} atoms (max {})",
                    psi.len(),
                    limits.max_enumeration
                )));
            }
            if psi.len() <= 1 {
                continue;
            }
            let mut minimal: Vec<BTreeSet<usize>> = Vec::new();
            for phi in nonempty_proper_subsets(&psi) {
                if minimal.iter().any(|m| m.is_subset(&phi)) {
                    continue;
                }
                let rest: BTreeSet<usize> = psi.difference(&phi).copied().collect();
                if tt.entails_impl(&phi, &[rest]) {
                    minimal.push(phi);
                }
            }
            if !minimal.is_empty() {
                family.remove(&psi);
                for m in minimal {
                    family.insert(m);
                }
                changed = true;
            }
        }

        // Disjunctive rule over every group of at least two provisos and
        // every non-empty subset of the group's intersection.
        let members: Vec<BTreeSet<usize>> = family.iter().cloned().collect();
        if members.len() > limits.max_enumeration {
            return Err(OracleError::LimitExceeded(format!(
                "{} provisos for one key (max {})",
                members.len(),
                limits.max_enumeration
            )));
        }
        'groups: for group_mask in 1u32..(1 << members.len()) {
            if group_mask.count_ones() < 2 {
                continue;
            }
            let group: Vec<&BTreeSet<usize>> = (0..members.len())
                .filter(|&i| group_mask & (1 << i) != 0)
                .map(|i| &members[i])
                .collect();
            let mut inter = group[0].clone();
            for g in &group[1..] {
                inter = inter.intersection(g).copied().collect();
            }
            if inter.is_empty() {
                continue;
            }
            let mut candidates = nonempty_proper_subsets(&inter);
            candidates.push(inter.clone());
            for phi in candidates {
                let strict_supersets: Vec<&BTreeSet<usize>> = group
                    .iter()
                    .copied()
                    .filter(|g| phi.is_subset(g) && phi != **g)
                    .collect();
                if strict_supersets.len() < 2 {
                    continue;
                }
                let dropped: Vec<BTreeSet<usize>> = strict_supersets
                    .iter()
                    .map(|g| g.difference(&phi).copied().collect())
                    .collect();
                if tt.entails_impl(&phi, &dropped) {
                    // replace every strict superset in the whole family
                    let removed: Vec<BTreeSet<usize>> = family
                        .iter()
                        .filter(|f| phi.is_subset(f) && phi != **f)
                        .cloned()
                        .collect();
                    if removed.is_empty() && family.contains(&phi) {
                        continue;
                    }
                    for r in removed {
                        family.remove(&r);
                    }
                    family.insert(phi);
                    changed = true;
                    break 'groups;
                }
            }
        }

        if !changed {
            return Ok(());
        }
    }
}

/// Engine output in the oracle's comparison shape.
pub fn engine_outcome(theory: &Theory) -> Outcome {
    match engine::derive_all(theory) {
        Err(engine::EngineError::InconsistentTheory) => Outcome::Inconsistent,
        Ok((ctx, set)) => Outcome::Derived(set.normalized(ctx.universe())),
    }
}

/// How the engine and the oracle disagree on one theory, if they do.
#[derive(Debug, Clone, Default)]
pub struct DiffReport {
    /// Output sets are exactly equal.
    pub identical: bool,
    /// Oracle-only provisos where the oracle simplified further than the
    /// engine: known incompleteness, not unsoundness.
    pub incompleteness: Vec<String>,
    /// Everything else: engine-only provisos, missing keys, or
    /// consistency disagreements.
    pub failures: Vec<String>,
}

/// Runs both implementations and classifies the differences.
pub fn diff_engine_oracle(
    theory: &Theory,
    limits: &OracleLimits,
) -> Result<DiffReport, OracleError> {
    let oracle = oracle_derive(theory, limits)?;
    let engine = engine_outcome(theory);
    let mut report = DiffReport::default();
    match (engine, oracle) {
        (Outcome::Inconsistent, Outcome::Inconsistent) => {
            report.identical = true;
        }
        (Outcome::Inconsistent, Outcome::Derived(_)) => {
            report
                .failures
                .push("engine reports inconsistency, oracle derived a set".to_string());
        }
        (Outcome::Derived(_), Outcome::Inconsistent) => {
            report
                .failures
                .push("oracle reports inconsistency, engine derived a set".to_string());
        }
        (Outcome::Derived(e), Outcome::Derived(o)) => {
            report.identical = e == o;
            if !report.identical {
                let keys: BTreeSet<&(String, String)> = e.keys().chain(o.keys()).collect();
                for key in keys {
                    let empty = BTreeSet::new();
                    let es = e.get(key).unwrap_or(&empty);
                    let os = o.get(key).unwrap_or(&empty);
                    for extra in es.difference(os) {
                        // an engine-only proviso is tolerable only when the
                        // oracle subsumes it with something strictly smaller
                        if os.iter().any(|op| op.is_subset(extra) && op != extra) {
                            report.incompleteness.push(format!(
                                "({}, {}): engine kept {:?}, oracle has a smaller proviso",
                                key.0, key.1, extra
                            ));
                        } else {
                            report.failures.push(format!(
                                "({}, {}): engine-only proviso {:?}",
                                key.0, key.1, extra
                            ));
                        }
                    }
                    for extra in os.difference(es) {
                        report.incompleteness.push(format!(
                            "({}, {}): oracle-only proviso {:?}",
                            key.0, key.1, extra
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Seeded random theory generation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RandomTheoryParams {
    pub max_atoms: usize,
    pub max_causes: usize,
    pub max_links: usize,
    pub max_facts: usize,
}

impl Default for RandomTheoryParams {
    fn default() -> Self {
        RandomTheoryParams {
            max_atoms: 8,
            max_causes: 5,
            max_links: 6,
            max_facts: 4,
        }
    }
}

/// Deterministic pseudo-random small theory. Always validates, and its
/// grounding universe stays within the default oracle limits.
pub fn random_theory(seed: u64, params: &RandomTheoryParams) -> Theory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if params.max_atoms == 0 {
        return Theory::empty();
    }
    let mut b = TheoryBuilder::new();
    let flavor = rng.gen_range(0..4u8);

    // declared ground atoms the premises may mention
    let mut atom_names: Vec<(String, Vec<String>)> = Vec::new();

    let rand_modes = |rng: &mut ChaCha8Rng, arity: usize| -> Vec<ParamMode> {
        (0..arity)
            .map(|_| match rng.gen_range(0..3u8) {
                0 => ParamMode::One,
                1 => ParamMode::All,
                _ => ParamMode::Na,
            })
            .collect()
    };

    match flavor {
        0 => {
            // propositional: plain symbols plus prop links
            let n = rng.gen_range(2..=params.max_atoms.clamp(2, 8));
            for i in 0..n {
                b.declare_pred(&format!("P{i}"), vec![]).unwrap();
                atom_names.push((format!("P{i}"), vec![]));
            }
            let links = rng.gen_range(0..=params.max_links.min(6));
            for _ in 0..links {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i != j {
                    b.add_isa(&format!("P{i}"), &format!("P{j}")).unwrap();
                }
            }
        }
        1 => {
            // unary predicates over a small constant taxonomy
            let n_preds = rng.gen_range(1..=2);
            let n_consts = rng.gen_range(2..=4);
            for i in 0..n_preds {
                let modes = rand_modes(&mut rng, 1);
                b.declare_pred(&format!("R{i}"), modes).unwrap();
            }
            for i in 0..n_consts {
                b.declare_const(&format!("c{i}")).unwrap();
            }
            let links = rng.gen_range(0..=params.max_links.min(4));
            for _ in 0..links {
                let i = rng.gen_range(0..n_consts);
                let j = rng.gen_range(0..n_consts);
                if i != j {
                    b.add_isa(&format!("c{i}"), &format!("c{j}")).unwrap();
                }
            }
            for i in 0..n_preds {
                for j in 0..n_consts {
                    atom_names.push((format!("R{i}"), vec![format!("c{j}")]));
                }
            }
        }
        2 => {
            // one binary predicate over three constants
            let modes = rand_modes(&mut rng, 2);
            b.declare_pred("S", modes).unwrap();
            for i in 0..3 {
                b.declare_const(&format!("c{i}")).unwrap();
            }
            let links = rng.gen_range(0..=2);
            for _ in 0..links {
                let i = rng.gen_range(0..3);
                let j = rng.gen_range(0..3);
                if i != j {
                    b.add_isa(&format!("c{i}"), &format!("c{j}")).unwrap();
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    atom_names.push(("S".to_string(), vec![format!("c{i}"), format!("c{j}")]));
                }
            }
        }
        _ => {
            // two unary predicates with a predicate-level link, plus props
            for i in 0..2 {
                let modes = rand_modes(&mut rng, 1);
                b.declare_pred(&format!("R{i}"), modes).unwrap();
            }
            for i in 0..3 {
                b.declare_const(&format!("c{i}")).unwrap();
            }
            for i in 0..2 {
                b.declare_pred(&format!("P{i}"), vec![]).unwrap();
                atom_names.push((format!("P{i}"), vec![]));
            }
            if rng.gen_bool(0.6) {
                b.add_isa("R0", "R1").unwrap();
            }
            if rng.gen_bool(0.5) {
                b.add_isa("P0", "P1").unwrap();
            }
            let links = rng.gen_range(0..=2);
            for _ in 0..links {
                let i = rng.gen_range(0..3);
                let j = rng.gen_range(0..3);
                if i != j {
                    b.add_isa(&format!("c{i}"), &format!("c{j}")).unwrap();
                }
            }
            for i in 0..2 {
                for j in 0..3 {
                    atom_names.push((format!("R{i}"), vec![format!("c{j}")]));
                }
            }
        }
    }

    let pick_atom = |rng: &mut ChaCha8Rng, b: &mut TheoryBuilder| -> GroundAtom {
        let (p, args) = &atom_names[rng.gen_range(0..atom_names.len())];
        let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        b.intern_atom(p, &refs).unwrap()
    };

    let n_causes = rng.gen_range(1..=params.max_causes.max(1));
    for _ in 0..n_causes {
        let cause = pick_atom(&mut rng, &mut b);
        let effect = pick_atom(&mut rng, &mut b);
        if cause == effect && !rng.gen_bool(0.1) {
            continue; // self-causes stay rare but legal
        }
        if rng.gen_bool(0.12) {
            // a Boolean causal formula now and then
            let other = pick_atom(&mut rng, &mut b);
            let left = Formula::Leaf(CausalLeaf::Causal(crate::model::CausalAtom {
                cause: cause.clone(),
                effect: effect.clone(),
            }));
            let right = Formula::Leaf(CausalLeaf::Causal(crate::model::CausalAtom {
                cause,
                effect: other,
            }));
            b.add_causal(Formula::or(left, right));
        } else {
            b.add_causal_atom(cause, effect);
        }
    }

    let n_facts = rng.gen_range(0..=params.max_facts);
    for _ in 0..n_facts {
        let a = Formula::Leaf(pick_atom(&mut rng, &mut b));
        let c = Formula::Leaf(pick_atom(&mut rng, &mut b));
        let d = Formula::Leaf(pick_atom(&mut rng, &mut b));
        let f = match rng.gen_range(0..7u8) {
            0 => a,
            1 => Formula::not(a),
            2 => Formula::implies(a, c),
            3 => Formula::not(Formula::and(a, c)),
            4 => Formula::or(a, c),
            5 => Formula::iff(a, c),
            _ => Formula::implies(a, Formula::or(c, d)),
        };
        b.add_classical(f);
    }

    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_theory;

    #[test]
    fn oracle_on_flu_theory() {
        let t = parse_theory(
            "pred Flu/0. pred Fever_Temperature/0. cause Flu => Fever_Temperature.",
        )
        .unwrap();
        let out = oracle_derive(&t, &OracleLimits::default()).unwrap();
        let Outcome::Derived(sets) = out else {
            panic!("consistent theory")
        };
        assert_eq!(sets.len(), 1);
        let key = ("Flu".to_string(), "Fever_Temperature".to_string());
        let family = &sets[&key];
        assert_eq!(family.len(), 1);
        assert!(family.contains(&BTreeSet::from(["Flu".to_string()])));
    }

    #[test]
    fn oracle_rejects_oversized_universe() {
        let t = parse_theory(
            "pred S/2. const a, b, c, d. fact S(a, a).
             isa a -> b. isa b -> c. isa c -> d.",
        )
        .unwrap();
        let limits = OracleLimits {
            max_universe: 4,
            ..Default::default()
        };
        assert!(matches!(
            oracle_derive(&t, &limits),
            Err(OracleError::LimitExceeded(_))
        ));
    }

    #[test]
    fn random_theory_is_deterministic() {
        let p = RandomTheoryParams::default();
        let a = random_theory(42, &p);
        let b = random_theory(42, &p);
        assert_eq!(
            crate::parser::render_theory(&a),
            crate::parser::render_theory(&b)
        );
    }

    #[test]
    fn random_theory_size_zero_is_empty() {
        let p = RandomTheoryParams {
            max_atoms: 0,
            ..Default::default()
        };
        let t = random_theory(0, &p);
        assert!(t.causal().is_empty());
        assert!(t.classical().is_empty());
    }

    #[test]
    fn random_theories_always_validate_and_reparse() {
        let p = RandomTheoryParams::default();
        for seed in 0..200 {
            let t = random_theory(seed, &p);
            let rendered = crate::parser::render_theory(&t);
            let t2 = parse_theory(&rendered).unwrap_or_else(|e| {
                panic!("seed {seed}: rendered theory failed to reparse: {e}\n{rendered}")
            });
            assert_eq!(rendered, crate::parser::render_theory(&t2), "seed {seed}");
        }
    }

    #[test]
    fn engine_matches_oracle_on_a_quick_sample() {
        let p = RandomTheoryParams::default();
        let limits = OracleLimits::default();
        for seed in 0..40 {
            let t = random_theory(seed, &p);
            let report = diff_engine_oracle(&t, &limits).unwrap();
            assert!(
                report.identical,
                "seed {seed}:\n  incompleteness: {:?}\n  failures: {:?}\n  theory:\n{}",
                report.incompleteness,
                report.failures,
                crate::parser::render_theory(&t)
            );
        }
    }

    #[test]
    fn truth_table_columns_are_correct() {
        let table = Table::new(3).unwrap();
        // rows are assignments 0..8; var v is true in row r iff bit v of r
        for v in 0..3 {
            let col = table.var_col(v);
            for r in 0..8u64 {
                let bit = (col[0] >> r) & 1 == 1;
                assert_eq!(bit, (r >> v) & 1 == 1);
            }
        }
        let f: Formula<usize> =
            Formula::implies(Formula::Leaf(0), Formula::Leaf(1));
        let col = table.eval(&f);
        for r in 0..8u64 {
            let expect = (r & 1 == 0) || (r & 2 != 0);
            assert_eq!((col[0] >> r) & 1 == 1, expect);
        }
    }
}
