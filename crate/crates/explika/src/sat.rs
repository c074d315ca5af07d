//! Propositional satisfiability and entailment for the saturated
//! background theory.
//!
//! Every consistency proviso and every simplification step in the
//! derivation rules reduces to a query here: `W ⊭ ¬(...)` becomes a
//! satisfiability check and `W ⊨ ...` an unsatisfiability check. The
//! solver is a plain backtracking search with unit propagation and
//! pure-literal elimination, branching on the lowest-index unassigned
//! variable, which makes every answer reproducible run to run. The
//! theories this engine targets have tens of atoms; predictability
//! matters more than raw speed.

use std::fmt::Write as _;
use std::ops::Neg;

use crate::model::Formula;

/// Index into a [`ClauseSet`]'s variable table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// What a propositional variable stands for. `Atom` and `Causal` carry
/// universe atom indices; `Aux` variables are introduced by the CNF
/// transformation and carry no meaning outside the clause set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarOrigin {
    Atom(u32),
    Causal(u32, u32),
    Aux,
}

/// A literal: a variable with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: VarId,
    negated: bool,
}

impl Lit {
    pub fn pos(var: VarId) -> Lit {
        Lit {
            var,
            negated: false,
        }
    }
    pub fn neg(var: VarId) -> Lit {
        Lit {
            var,
            negated: true,
        }
    }
    pub fn var(self) -> VarId {
        self.var
    }
    pub fn is_negated(self) -> bool {
        self.negated
    }
    /// Truth of this literal under an assignment of its variable.
    fn satisfied_by(self, value: bool) -> bool {
        value != self.negated
    }
}

impl Neg for Lit {
    type Output = Lit;
    fn neg(self) -> Lit {
        Lit {
            var: self.var,
            negated: !self.negated,
        }
    }
}

/// Formula over literals; the bridge between the model's formula trees
/// and clause form.
pub type PropFormula = Formula<Lit>;

/// An immutable CNF clause set plus its variable table. Queries carry
/// their own assignment state, so one set can serve concurrent callers.
#[derive(Debug, Clone, Default)]
pub struct ClauseSet {
    origins: Vec<VarOrigin>,
    clauses: Vec<Vec<Lit>>,
}

/// Incrementally builds a [`ClauseSet`].
///
/// Formulas are converted clause-by-clause where they already have
/// clausal shape (implications and disjunctions of literals); auxiliary
/// variables are introduced only for non-clausal subtrees, keeping debug
/// dumps readable.
#[derive(Debug, Clone, Default)]
pub struct CnfBuilder {
    origins: Vec<VarOrigin>,
    clauses: Vec<Vec<Lit>>,
}

impl CnfBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self, origin: VarOrigin) -> VarId {
        let id = VarId(self.origins.len() as u32);
        self.origins.push(origin);
        id
    }

    pub fn var_count(&self) -> usize {
        self.origins.len()
    }

    pub fn add_clause(&mut self, lits: Vec<Lit>) {
        self.clauses.push(lits);
    }

    /// Asserts `f` as true, extending the clause set equisatisfiably.
    /// Restricting any model of the result to the pre-existing variables
    /// yields a model of `f`, and every model of `f` extends to the new
    /// auxiliaries.
    pub fn assert_formula(&mut self, f: &PropFormula) {
        match f {
            Formula::And(a, b) => {
                self.assert_formula(a);
                self.assert_formula(b);
            }
            Formula::Iff(a, b) => {
                if let (Some(la), Some(lb)) = (as_literal(a), as_literal(b)) {
                    self.add_clause(vec![-la, lb]);
                    self.add_clause(vec![la, -lb]);
                } else {
                    let l = self.tseitin(f);
                    self.add_clause(vec![l]);
                }
            }
            _ => {
                if let Some(lits) = as_clause(f) {
                    self.add_clause(lits);
                } else {
                    let l = self.tseitin(f);
                    self.add_clause(vec![l]);
                }
            }
        }
    }

    /// Definitional transformation: returns a literal equivalent to `f`,
    /// defining fresh variables for internal connectives.
    fn tseitin(&mut self, f: &PropFormula) -> Lit {
        match f {
            Formula::Leaf(l) => *l,
            Formula::Not(a) => -self.tseitin(a),
            Formula::And(a, b) => {
                let (la, lb) = (self.tseitin(a), self.tseitin(b));
                let t = Lit::pos(self.new_var(VarOrigin::Aux));
                self.add_clause(vec![-t, la]);
                self.add_clause(vec![-t, lb]);
                self.add_clause(vec![t, -la, -lb]);
                t
            }
            Formula::Or(a, b) => {
                let (la, lb) = (self.tseitin(a), self.tseitin(b));
                let t = Lit::pos(self.new_var(VarOrigin::Aux));
                self.add_clause(vec![-t, la, lb]);
                self.add_clause(vec![t, -la]);
                self.add_clause(vec![t, -lb]);
                t
            }
            Formula::Implies(a, b) => {
                self.tseitin(&Formula::or(Formula::not((**a).clone()), (**b).clone()))
            }
            Formula::Iff(a, b) => {
                let (la, lb) = (self.tseitin(a), self.tseitin(b));
                let t = Lit::pos(self.new_var(VarOrigin::Aux));
                self.add_clause(vec![-t, -la, lb]);
                self.add_clause(vec![-t, la, -lb]);
                self.add_clause(vec![t, la, lb]);
                self.add_clause(vec![t, -la, -lb]);
                t
            }
        }
    }

    pub fn finish(self) -> ClauseSet {
        ClauseSet {
            origins: self.origins,
            clauses: self.clauses,
        }
    }
}

fn as_literal(f: &PropFormula) -> Option<Lit> {
    match f {
        Formula::Leaf(l) => Some(*l),
        Formula::Not(a) => as_literal(a).map(|l| -l),
        _ => None,
    }
}

/// Literals of `f` when it is already one disjunctive clause
/// (implications over literals count: `a -> b` is `!a | b`).
fn as_clause(f: &PropFormula) -> Option<Vec<Lit>> {
    match f {
        Formula::Or(a, b) => {
            let mut lits = as_clause(a)?;
            lits.extend(as_clause(b)?);
            Some(lits)
        }
        Formula::Implies(a, b) => {
            let la = as_literal(a)?;
            let mut lits = vec![-la];
            lits.extend(as_clause(b)?);
            Some(lits)
        }
        _ => as_literal(f).map(|l| vec![l]),
    }
}

/// Converts a set of formulas into one clause set over the given
/// variable table.
pub fn to_cnf(origins: Vec<VarOrigin>, formulas: &[PropFormula]) -> ClauseSet {
    let mut b = CnfBuilder {
        origins,
        clauses: Vec::new(),
    };
    for f in formulas {
        b.assert_formula(f);
    }
    b.finish()
}

impl ClauseSet {
    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn origins(&self) -> &[VarOrigin] {
        &self.origins
    }

    /// True iff the clauses together with the assumption literals have a
    /// model.
    pub fn satisfiable(&self, assumptions: &[Lit]) -> bool {
        self.satisfiable_with(assumptions, &[])
    }

    /// Satisfiability with assumption literals and extra clauses stacked
    /// on top, without mutating the set.
    pub fn satisfiable_with(&self, assumptions: &[Lit], extra: &[Vec<Lit>]) -> bool {
        let mut solver = Solver {
            assignment: vec![None; self.origins.len()],
            base: &self.clauses,
            extra,
        };
        for &l in assumptions {
            match solver.assignment[l.var().0 as usize] {
                Some(v) if !l.satisfied_by(v) => return false,
                _ => solver.assignment[l.var().0 as usize] = Some(!l.is_negated()),
            }
        }
        solver.solve()
    }

    /// True iff the clause set entails `f`, i.e. clauses ∧ ¬f is
    /// unsatisfiable.
    pub fn entails(&self, f: &PropFormula) -> bool {
        let mut b = CnfBuilder {
            origins: self.origins.clone(),
            clauses: self.clauses.clone(),
        };
        b.assert_formula(&Formula::not(f.clone()));
        !b.finish().satisfiable(&[])
    }

    /// True iff the clause set is consistent with all the given literals
    /// held true together. An empty list degenerates to plain
    /// satisfiability.
    pub fn consistent_with(&self, lits: &[Lit]) -> bool {
        self.satisfiable(lits)
    }

    /// DIMACS-like dump with the variable map appended as comments.
    pub fn to_dimacs(&self, name: impl Fn(VarOrigin) -> Option<String>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.origins.len(), self.clauses.len());
        for clause in &self.clauses {
            let mut line = String::new();
            for l in clause {
                let v = l.var().0 as i64 + 1;
                let _ = write!(line, "{} ", if l.is_negated() { -v } else { v });
            }
            line.push('0');
            out.push_str(&line);
            out.push('\n');
        }
        for (i, &origin) in self.origins.iter().enumerate() {
            let label = match origin {
                VarOrigin::Aux => "aux".to_string(),
                other => name(other).unwrap_or_else(|| format!("{other:?}")),
            };
            let _ = writeln!(out, "c {} = {}", i + 1, label);
        }
        out
    }
}

struct Solver<'a> {
    assignment: Vec<Option<bool>>,
    base: &'a [Vec<Lit>],
    extra: &'a [Vec<Lit>],
}

enum ClauseState {
    Satisfied,
    Conflict,
    Unit(Lit),
    Open,
}

impl<'a> Solver<'a> {
    fn clauses(&self) -> impl Iterator<Item = &'a [Lit]> + '_ {
        self.base
            .iter()
            .map(|c| c.as_slice())
            .chain(self.extra.iter().map(|c| c.as_slice()))
    }

    fn clause_state(&self, clause: &[Lit]) -> ClauseState {
        let mut unassigned = None;
        let mut open = 0usize;
        for &l in clause {
            match self.assignment[l.var().0 as usize] {
                Some(v) if l.satisfied_by(v) => return ClauseState::Satisfied,
                Some(_) => {}
                None => {
                    open += 1;
                    if unassigned.is_none() {
                        unassigned = Some(l);
                    }
                }
            }
        }
        match (open, unassigned) {
            (0, _) => ClauseState::Conflict,
            (1, Some(l)) => ClauseState::Unit(l),
            _ => ClauseState::Open,
        }
    }

    /// Unit propagation to fixpoint. Returns false on conflict, together
    /// with the list of variables assigned along the way.
    fn propagate(&mut self, trail: &mut Vec<VarId>) -> bool {
        let (base, extra) = (self.base, self.extra);
        loop {
            let mut changed = false;
            for clause in base.iter().chain(extra.iter()) {
                match self.clause_state(clause) {
                    ClauseState::Conflict => return false,
                    ClauseState::Unit(l) => {
                        self.assignment[l.var().0 as usize] = Some(!l.is_negated());
                        trail.push(l.var());
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    /// Assigns every variable that occurs with a single polarity among
    /// the not-yet-satisfied clauses. Such assignments only satisfy
    /// clauses, so they never conflict.
    fn assign_pure_literals(&mut self, trail: &mut Vec<VarId>) {
        loop {
            let n = self.assignment.len();
            let mut pos = vec![false; n];
            let mut neg = vec![false; n];
            for clause in self.clauses() {
                if matches!(self.clause_state(clause), ClauseState::Satisfied) {
                    continue;
                }
                for &l in clause {
                    if self.assignment[l.var().0 as usize].is_none() {
                        if l.is_negated() {
                            neg[l.var().0 as usize] = true;
                        } else {
                            pos[l.var().0 as usize] = true;
                        }
                    }
                }
            }
            let mut changed = false;
            for v in 0..n {
                if self.assignment[v].is_none() && (pos[v] ^ neg[v]) {
                    self.assignment[v] = Some(pos[v]);
                    trail.push(VarId(v as u32));
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn all_satisfied(&self) -> bool {
        self.clauses()
            .all(|c| matches!(self.clause_state(c), ClauseState::Satisfied))
    }

    fn lowest_unassigned(&self) -> Option<VarId> {
        self.assignment
            .iter()
            .position(|a| a.is_none())
            .map(|i| VarId(i as u32))
    }

    fn solve(&mut self) -> bool {
        let mut trail = Vec::new();
        let ok = self.propagate(&mut trail);
        let result = ok && {
            self.assign_pure_literals(&mut trail);
            if self.all_satisfied() {
                true
            } else {
                match self.lowest_unassigned() {
                    None => false,
                    Some(v) => self.branch(v, true) || self.branch(v, false),
                }
            }
        };
        if !result {
            for v in trail {
                self.assignment[v.0 as usize] = None;
            }
        }
        result
    }

    fn branch(&mut self, v: VarId, value: bool) -> bool {
        self.assignment[v.0 as usize] = Some(value);
        let result = self.solve();
        if !result {
            self.assignment[v.0 as usize] = None;
        }
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn vars(n: usize) -> Vec<VarOrigin> {
        (0..n).map(|i| VarOrigin::Atom(i as u32)).collect()
    }

    fn lit(i: u32) -> Lit {
        Lit::pos(VarId(i))
    }

    #[test]
    fn implication_converts_to_one_clause_without_aux() {
        let f = Formula::implies(Formula::Leaf(lit(0)), Formula::Leaf(lit(1)));
        let cs = to_cnf(vars(2), &[f]);
        assert_eq!(cs.clauses(), &[vec![-lit(0), lit(1)]]);
        assert_eq!(cs.origins().len(), 2);
    }

    #[test]
    fn empty_set_is_satisfiable() {
        let cs = to_cnf(vars(0), &[]);
        assert!(cs.satisfiable(&[]));
    }

    #[test]
    fn self_contradictory_iff_is_unsat() {
        let f = Formula::iff(
            Formula::Leaf(lit(0)),
            Formula::not(Formula::Leaf(lit(0))),
        );
        let cs = to_cnf(vars(1), &[f]);
        assert!(!cs.satisfiable(&[]));
    }

    #[test]
    fn satisfiable_examples() {
        let ruled_out = to_cnf(vars(1), &[Formula::not(Formula::Leaf(lit(0)))]);
        assert!(!ruled_out.satisfiable(&[lit(0)]));
        assert!(ruled_out.satisfiable(&[]));

        let imp = to_cnf(
            vars(2),
            &[Formula::implies(Formula::Leaf(lit(0)), Formula::Leaf(lit(1)))],
        );
        assert!(!imp.satisfiable(&[lit(0), -lit(1)]));
        assert!(imp.satisfiable(&[lit(0), lit(1)]));
    }

    #[test]
    fn entails_examples() {
        let w = to_cnf(
            vars(2),
            &[Formula::implies(Formula::Leaf(lit(0)), Formula::Leaf(lit(1)))],
        );
        assert!(w.entails(&Formula::implies(
            Formula::Leaf(lit(0)),
            Formula::Leaf(lit(1))
        )));

        let empty = to_cnf(vars(1), &[]);
        assert!(!empty.entails(&Formula::Leaf(lit(0))));

        // alpha -> beta1 | beta2 entails itself back out of clause form
        let w2 = to_cnf(
            vars(3),
            &[Formula::implies(
                Formula::Leaf(lit(0)),
                Formula::or(Formula::Leaf(lit(1)), Formula::Leaf(lit(2))),
            )],
        );
        assert!(w2.entails(&Formula::implies(
            Formula::Leaf(lit(0)),
            Formula::or(Formula::Leaf(lit(1)), Formula::Leaf(lit(2))),
        )));
        assert!(!w2.entails(&Formula::implies(
            Formula::Leaf(lit(0)),
            Formula::Leaf(lit(1)),
        )));
    }

    #[test]
    fn consistent_with_empty_set_degenerates_to_satisfiability() {
        let w = to_cnf(vars(1), &[Formula::Leaf(lit(0))]);
        assert_eq!(w.consistent_with(&[]), w.satisfiable(&[]));
        let bad = to_cnf(
            vars(1),
            &[Formula::and(
                Formula::Leaf(lit(0)),
                Formula::not(Formula::Leaf(lit(0))),
            )],
        );
        assert_eq!(bad.consistent_with(&[]), bad.satisfiable(&[]));
        assert!(!bad.consistent_with(&[]));
    }

    /// Brute-force truth-table evaluation, the independent reference for
    /// the solver.
    fn tt_eval(f: &PropFormula, assignment: &[bool]) -> bool {
        match f {
            Formula::Leaf(l) => l.satisfied_by(assignment[l.var().0 as usize]),
            Formula::Not(a) => !tt_eval(a, assignment),
            Formula::And(a, b) => tt_eval(a, assignment) && tt_eval(b, assignment),
            Formula::Or(a, b) => tt_eval(a, assignment) || tt_eval(b, assignment),
            Formula::Implies(a, b) => !tt_eval(a, assignment) || tt_eval(b, assignment),
            Formula::Iff(a, b) => tt_eval(a, assignment) == tt_eval(b, assignment),
        }
    }

    fn random_formula(rng: &mut impl Rng, n_vars: u32, depth: u32) -> PropFormula {
        if depth == 0 || rng.gen_ratio(1, 3) {
            let l = lit(rng.gen_range(0..n_vars));
            return if rng.gen_bool(0.5) {
                Formula::Leaf(l)
            } else {
                Formula::Leaf(-l)
            };
        }
        match rng.gen_range(0..5) {
            0 => Formula::not(random_formula(rng, n_vars, depth - 1)),
            1 => Formula::and(
                random_formula(rng, n_vars, depth - 1),
                random_formula(rng, n_vars, depth - 1),
            ),
            2 => Formula::or(
                random_formula(rng, n_vars, depth - 1),
                random_formula(rng, n_vars, depth - 1),
            ),
            3 => Formula::implies(
                random_formula(rng, n_vars, depth - 1),
                random_formula(rng, n_vars, depth - 1),
            ),
            _ => Formula::iff(
                random_formula(rng, n_vars, depth - 1),
                random_formula(rng, n_vars, depth - 1),
            ),
        }
    }

    /// The CNF transformation preserves models exactly when projected on
    /// the original variables: for every full assignment of the original
    /// variables, the clause set under those assumptions is satisfiable
    /// iff the formula evaluates to true.
    #[test]
    fn cnf_projection_matches_truth_table() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..150 {
            let n = 4;
            let f = random_formula(&mut rng, n, 4);
            let cs = to_cnf(vars(n as usize), std::slice::from_ref(&f));
            for mask in 0..(1u32 << n) {
                let assignment: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
                let assumptions: Vec<Lit> = (0..n)
                    .map(|i| {
                        if assignment[i as usize] {
                            lit(i)
                        } else {
                            -lit(i)
                        }
                    })
                    .collect();
                assert_eq!(
                    cs.satisfiable(&assumptions),
                    tt_eval(&f, &assignment),
                    "formula {f:?} mask {mask:b}"
                );
            }
        }
    }

    #[test]
    fn entails_satisfiable_duality() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = 5;
            let w: Vec<PropFormula> = (0..rng.gen_range(0..3))
                .map(|_| random_formula(&mut rng, n, 3))
                .collect();
            let f = random_formula(&mut rng, n, 3);
            let cs = to_cnf(vars(n as usize), &w);
            let entailed = cs.entails(&f);
            let mut with_neg = CnfBuilder {
                origins: cs.origins().to_vec(),
                clauses: cs.clauses().to_vec(),
            };
            with_neg.assert_formula(&Formula::not(f.clone()));
            let neg_sat = with_neg.finish().satisfiable(&[]);
            assert!(entailed ^ neg_sat);
        }
    }

    /// Raw random clause sets, not formula conversions: the solver must
    /// agree with row-by-row enumeration.
    #[test]
    fn solver_matches_truth_tables_on_random_clause_sets() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6usize);
            let n_clauses = rng.gen_range(0..=8usize);
            let clauses: Vec<Vec<Lit>> = (0..n_clauses)
                .map(|_| {
                    (0..rng.gen_range(1..=3usize))
                        .map(|_| {
                            let l = lit(rng.gen_range(0..n as u32));
                            if rng.gen_bool(0.5) {
                                l
                            } else {
                                -l
                            }
                        })
                        .collect()
                })
                .collect();
            let cs = ClauseSet {
                origins: vars(n),
                clauses: clauses.clone(),
            };
            let brute = (0..(1u32 << n)).any(|mask| {
                clauses.iter().all(|c| {
                    c.iter()
                        .any(|l| l.satisfied_by(mask & (1 << l.var().0) != 0))
                })
            });
            assert_eq!(cs.satisfiable(&[]), brute);
        }
    }

    #[test]
    fn repeated_queries_are_identical() {
        let w = to_cnf(
            vars(3),
            &[
                Formula::implies(Formula::Leaf(lit(0)), Formula::Leaf(lit(1))),
                Formula::or(Formula::Leaf(lit(1)), Formula::Leaf(lit(2))),
            ],
        );
        let q = [lit(0), -lit(2)];
        let first = w.satisfiable(&q);
        for _ in 0..10 {
            assert_eq!(w.satisfiable(&q), first);
        }
    }

    #[test]
    fn dimacs_dump_lists_clauses_and_variable_map() {
        let cs = to_cnf(
            vars(2),
            &[Formula::implies(Formula::Leaf(lit(0)), Formula::Leaf(lit(1)))],
        );
        let dump = cs.to_dimacs(|o| match o {
            VarOrigin::Atom(i) => Some(format!("atom{i}")),
            _ => None,
        });
        assert!(dump.starts_with("p cnf 2 1"));
        assert!(dump.contains("-1 2 0"));
        assert!(dump.contains("c 1 = atom0"));
    }
}
