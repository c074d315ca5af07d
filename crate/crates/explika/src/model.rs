//! Core data model: symbols, ground atoms, formulas, causal theories.
//!
//! A causal theory has three premise sets:
//!
//! * `W`: classical (Boolean) background knowledge over ground atoms,
//! * `C`: causal formulas, Boolean combinations of causal atoms
//!   `cause => effect` and ground atoms,
//! * `O`: taxonomic links between constants, between propositional
//!   symbols, or between predicates of equal arity.
//!
//! Everything is ground: no variables, no quantifiers, no function
//! symbols. Propositional symbols are predicates of arity 0, so the
//! propositional and predicate fragments share one representation.
//! Explanation statements are *derived*, never premises; the types here
//! cannot even express one inside a theory, which discharges that
//! validation rule by construction.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

/// Index of a declared predicate inside a [`Symbols`] table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub u32);

/// Index of a declared constant inside a [`Symbols`] table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstId(pub u32);

/// Inheritance behaviour of one predicate parameter with respect to the
/// taxonomy.
///
/// `One` parameters inherit upward (an atom about a sub-concept implies
/// the atom about the super-concept), `All` parameters inherit downward,
/// and `Na` parameters do not interact with the taxonomy at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamMode {
    One,
    All,
    Na,
}

impl fmt::Display for ParamMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamMode::One => f.write_str("one"),
            ParamMode::All => f.write_str("all"),
            ParamMode::Na => f.write_str("na"),
        }
    }
}

/// A declared predicate. The arity is the length of `modes`; arity-0
/// predicates are the propositional symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub modes: Vec<ParamMode>,
}

impl PredicateDecl {
    pub fn arity(&self) -> usize {
        self.modes.len()
    }
}

/// A predicate applied to declared constants. Arity 0 means a bare
/// propositional symbol.
///
/// Atoms are plain values; two atoms are the same atom exactly when they
/// compare equal. [`TheoryBuilder::intern_atom`] additionally guarantees a
/// stable index per distinct atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub pred: PredId,
    pub args: Vec<ConstId>,
}

/// `cause => effect` between two ground atoms. `cause == effect` is legal:
/// a self-cause may be asserted explicitly, it is just never assumed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CausalAtom {
    pub cause: GroundAtom,
    pub effect: GroundAtom,
}

/// Formula tree over a leaf type; the connective set is shared between
/// classical and causal formulas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula<L> {
    Leaf(L),
    Not(Box<Formula<L>>),
    And(Box<Formula<L>>, Box<Formula<L>>),
    Or(Box<Formula<L>>, Box<Formula<L>>),
    Implies(Box<Formula<L>>, Box<Formula<L>>),
    Iff(Box<Formula<L>>, Box<Formula<L>>),
}

impl<L> Formula<L> {
    pub fn not(f: Formula<L>) -> Self {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula<L>, b: Formula<L>) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula<L>, b: Formula<L>) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula<L>, b: Formula<L>) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula<L>, b: Formula<L>) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |l| out.push(l));
        out
    }

    fn visit_leaves<'a>(&'a self, f: &mut impl FnMut(&'a L)) {
        match self {
            Formula::Leaf(l) => f(l),
            Formula::Not(a) => a.visit_leaves(f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.visit_leaves(f);
                b.visit_leaves(f);
            }
        }
    }

    pub fn map_leaves<M>(&self, f: &mut impl FnMut(&L) -> Formula<M>) -> Formula<M> {
        match self {
            Formula::Leaf(l) => f(l),
            Formula::Not(a) => Formula::not(a.map_leaves(f)),
            Formula::And(a, b) => Formula::and(a.map_leaves(f), b.map_leaves(f)),
            Formula::Or(a, b) => Formula::or(a.map_leaves(f), b.map_leaves(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_leaves(f), b.map_leaves(f)),
            Formula::Iff(a, b) => Formula::iff(a.map_leaves(f), b.map_leaves(f)),
        }
    }
}

/// Leaf of a causal formula: either a plain ground atom or a causal atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CausalLeaf {
    Atom(GroundAtom),
    Causal(CausalAtom),
}

pub type ClassicalFormula = Formula<GroundAtom>;
pub type CausalFormula = Formula<CausalLeaf>;

impl CausalFormula {
    /// The causal atom when this formula is a single asserted
    /// `cause => effect`, i.e. a unit causal statement.
    pub fn as_unit_causal(&self) -> Option<&CausalAtom> {
        match self {
            Formula::Leaf(CausalLeaf::Causal(c)) => Some(c),
            _ => None,
        }
    }
}

/// A user-supplied taxonomic link. The three kinds live in disjoint
/// namespaces and are told apart by the declarations, not by spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OntoLink {
    /// `a -> b` between constants.
    Const(ConstId, ConstId),
    /// `P0 -> Q0` between propositional symbols (arity-0 predicates).
    Prop(PredId, PredId),
    /// `P -> Q` between predicates of equal arity >= 1.
    Pred(PredId, PredId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("predicate `{pred}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        got: usize,
    },
    #[error("isa link between `{left}` and `{right}`: predicate arities differ ({la} vs {ra})")]
    PredLinkArityMismatch {
        left: String,
        right: String,
        la: usize,
        ra: usize,
    },
    #[error("duplicate declaration of `{0}`")]
    DuplicateDeclaration(String),
    #[error("predicate `{0}`: modes list length does not match arity")]
    ModesLengthMismatch(String),
    #[error("`{0}` is declared both as a predicate and as a constant")]
    NamespaceClash(String),
}

/// Declared predicates and constants of one theory.
#[derive(Debug, Clone, Default)]
pub struct Symbols {
    preds: Vec<PredicateDecl>,
    consts: Vec<String>,
}

impl Symbols {
    pub fn pred(&self, id: PredId) -> &PredicateDecl {
        &self.preds[id.0 as usize]
    }

    pub fn const_name(&self, id: ConstId) -> &str {
        &self.consts[id.0 as usize]
    }

    pub fn preds(&self) -> impl Iterator<Item = (PredId, &PredicateDecl)> {
        self.preds
            .iter()
            .enumerate()
            .map(|(i, d)| (PredId(i as u32), d))
    }

    pub fn consts(&self) -> impl Iterator<Item = (ConstId, &str)> {
        self.consts
            .iter()
            .enumerate()
            .map(|(i, n)| (ConstId(i as u32), n.as_str()))
    }

    pub fn lookup_pred(&self, name: &str) -> Option<PredId> {
        self.preds
            .iter()
            .position(|d| d.name == name)
            .map(|i| PredId(i as u32))
    }

    pub fn lookup_const(&self, name: &str) -> Option<ConstId> {
        self.consts
            .iter()
            .position(|c| c == name)
            .map(|i| ConstId(i as u32))
    }

    /// Renders an atom as `Pred(a, b)`, or just `Pred` for arity 0.
    pub fn atom_text(&self, atom: &GroundAtom) -> String {
        let pred = self.pred(atom.pred);
        if atom.args.is_empty() {
            pred.name.clone()
        } else {
            let args: Vec<&str> = atom.args.iter().map(|&c| self.const_name(c)).collect();
            format!("{}({})", pred.name, args.join(", "))
        }
    }
}

/// A validated, immutable causal theory.
///
/// Construction goes through [`TheoryBuilder`], which interns atoms and
/// rejects undeclared symbols and arity violations, so a `Theory` value
/// always satisfies its structural invariants. All contents are plain
/// data; sharing a theory across threads is safe.
#[derive(Debug, Clone)]
pub struct Theory {
    symbols: Symbols,
    atoms: IndexSet<GroundAtom>,
    w: Vec<ClassicalFormula>,
    c: Vec<CausalFormula>,
    o: Vec<OntoLink>,
}

impl Theory {
    pub fn empty() -> Theory {
        TheoryBuilder::new().build()
    }

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub fn classical(&self) -> &[ClassicalFormula] {
        &self.w
    }

    pub fn causal(&self) -> &[CausalFormula] {
        &self.c
    }

    pub fn links(&self) -> &[OntoLink] {
        &self.o
    }

    /// Atoms occurring in the premises, in first-seen order.
    pub fn premise_atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.atoms.iter()
    }

    /// Stable index of an interned premise atom.
    pub fn atom_index(&self, atom: &GroundAtom) -> Option<usize> {
        self.atoms.get_index_of(atom)
    }

    /// Distinct causal atoms occurring anywhere in `C`, premises order.
    pub fn causal_atoms(&self) -> Vec<&CausalAtom> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in &self.c {
            for leaf in f.leaves() {
                if let CausalLeaf::Causal(c) = leaf {
                    if seen.insert(c.clone()) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// Resolves `pred(args…)` against the declarations without mutating
    /// the theory. Used for query atoms arriving after validation.
    pub fn resolve_atom(&self, pred: &str, args: &[&str]) -> Result<GroundAtom, ModelError> {
        let pid = self
            .symbols
            .lookup_pred(pred)
            .ok_or_else(|| ModelError::UnknownPredicate(pred.to_string()))?;
        let decl = self.symbols.pred(pid);
        if decl.arity() != args.len() {
            return Err(ModelError::ArityMismatch {
                pred: pred.to_string(),
                expected: decl.arity(),
                got: args.len(),
            });
        }
        let mut ids = Vec::with_capacity(args.len());
        for a in args {
            let cid = self
                .symbols
                .lookup_const(a)
                .ok_or_else(|| ModelError::UnknownConstant(a.to_string()))?;
            ids.push(cid);
        }
        Ok(GroundAtom {
            pred: pid,
            args: ids,
        })
    }

    pub fn atom_text(&self, atom: &GroundAtom) -> String {
        self.symbols.atom_text(atom)
    }
}

/// Mutable staging area for a theory. `build` performs the final
/// validation sweep and freezes the result.
#[derive(Debug, Default)]
pub struct TheoryBuilder {
    symbols: Symbols,
    atoms: IndexSet<GroundAtom>,
    w: Vec<ClassicalFormula>,
    c: Vec<CausalFormula>,
    o: Vec<OntoLink>,
}

impl TheoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub fn declare_pred(
        &mut self,
        name: &str,
        modes: Vec<ParamMode>,
    ) -> Result<PredId, ModelError> {
        if self.symbols.lookup_pred(name).is_some() {
            return Err(ModelError::DuplicateDeclaration(name.to_string()));
        }
        if self.symbols.lookup_const(name).is_some() {
            return Err(ModelError::NamespaceClash(name.to_string()));
        }
        let id = PredId(self.symbols.preds.len() as u32);
        self.symbols.preds.push(PredicateDecl {
            name: name.to_string(),
            modes,
        });
        Ok(id)
    }

    pub fn declare_const(&mut self, name: &str) -> Result<ConstId, ModelError> {
        if self.symbols.lookup_const(name).is_some() {
            return Err(ModelError::DuplicateDeclaration(name.to_string()));
        }
        if self.symbols.lookup_pred(name).is_some() {
            return Err(ModelError::NamespaceClash(name.to_string()));
        }
        let id = ConstId(self.symbols.consts.len() as u32);
        self.symbols.consts.push(name.to_string());
        Ok(id)
    }

    /// Interns a ground atom. Equal inputs always yield the same atom and
    /// the same stable index.
    pub fn intern_atom(&mut self, pred: &str, args: &[&str]) -> Result<GroundAtom, ModelError> {
        let pid = self
            .symbols
            .lookup_pred(pred)
            .ok_or_else(|| ModelError::UnknownPredicate(pred.to_string()))?;
        let decl = self.symbols.pred(pid);
        if decl.arity() != args.len() {
            return Err(ModelError::ArityMismatch {
                pred: pred.to_string(),
                expected: decl.arity(),
                got: args.len(),
            });
        }
        let mut ids = Vec::with_capacity(args.len());
        for a in args {
            let cid = self
                .symbols
                .lookup_const(a)
                .ok_or_else(|| ModelError::UnknownConstant(a.to_string()))?;
            ids.push(cid);
        }
        let atom = GroundAtom {
            pred: pid,
            args: ids,
        };
        self.atoms.insert(atom.clone());
        Ok(atom)
    }

    pub fn atom_index(&self, atom: &GroundAtom) -> Option<usize> {
        self.atoms.get_index_of(atom)
    }

    pub fn add_classical(&mut self, f: ClassicalFormula) {
        for leaf in f.leaves() {
            self.atoms.insert(leaf.clone());
        }
        self.w.push(f);
    }

    pub fn add_causal(&mut self, f: CausalFormula) {
        for leaf in f.leaves() {
            match leaf {
                CausalLeaf::Atom(a) => {
                    self.atoms.insert(a.clone());
                }
                CausalLeaf::Causal(c) => {
                    self.atoms.insert(c.cause.clone());
                    self.atoms.insert(c.effect.clone());
                }
            }
        }
        self.c.push(f);
    }

    pub fn add_causal_atom(&mut self, cause: GroundAtom, effect: GroundAtom) {
        self.add_causal(Formula::Leaf(CausalLeaf::Causal(CausalAtom {
            cause,
            effect,
        })));
    }

    /// Adds an IS-A link between two already-declared names, inferring the
    /// link kind from the symbol tables.
    pub fn add_isa(&mut self, left: &str, right: &str) -> Result<(), ModelError> {
        let link = match (
            self.symbols.lookup_const(left),
            self.symbols.lookup_const(right),
        ) {
            (Some(l), Some(r)) => OntoLink::Const(l, r),
            _ => {
                let lp = self
                    .symbols
                    .lookup_pred(left)
                    .ok_or_else(|| ModelError::UndeclaredSymbol(left.to_string()))?;
                let rp = self
                    .symbols
                    .lookup_pred(right)
                    .ok_or_else(|| ModelError::UndeclaredSymbol(right.to_string()))?;
                let (la, ra) = (self.symbols.pred(lp).arity(), self.symbols.pred(rp).arity());
                if la != ra {
                    return Err(ModelError::PredLinkArityMismatch {
                        left: left.to_string(),
                        right: right.to_string(),
                        la,
                        ra,
                    });
                }
                if la == 0 {
                    OntoLink::Prop(lp, rp)
                } else {
                    OntoLink::Pred(lp, rp)
                }
            }
        };
        self.o.push(link);
        Ok(())
    }

    /// Final validation sweep over everything staged so far.
    ///
    /// The builder API already prevents undeclared symbols, but formulas
    /// and links can be assembled by hand from raw ids, so the sweep
    /// re-checks every id and arity before freezing.
    pub fn validate(self) -> Result<Theory, ModelError> {
        let sym = &self.symbols;
        let check_atom = |a: &GroundAtom| -> Result<(), ModelError> {
            let Some(decl) = sym.preds.get(a.pred.0 as usize) else {
                return Err(ModelError::UndeclaredSymbol(format!(
                    "predicate #{}",
                    a.pred.0
                )));
            };
            if decl.arity() != a.args.len() {
                return Err(ModelError::ArityMismatch {
                    pred: decl.name.clone(),
                    expected: decl.arity(),
                    got: a.args.len(),
                });
            }
            for c in &a.args {
                if c.0 as usize >= sym.consts.len() {
                    return Err(ModelError::UndeclaredSymbol(format!("constant #{}", c.0)));
                }
            }
            Ok(())
        };
        for (_, d) in sym.preds() {
            if d.modes.len() != d.arity() {
                return Err(ModelError::ModesLengthMismatch(d.name.clone()));
            }
        }
        for f in &self.w {
            for leaf in f.leaves() {
                check_atom(leaf)?;
            }
        }
        for f in &self.c {
            for leaf in f.leaves() {
                match leaf {
                    CausalLeaf::Atom(a) => check_atom(a)?,
                    CausalLeaf::Causal(c) => {
                        check_atom(&c.cause)?;
                        check_atom(&c.effect)?;
                    }
                }
            }
        }
        for link in &self.o {
            match *link {
                OntoLink::Const(l, r) => {
                    for c in [l, r] {
                        if c.0 as usize >= sym.consts.len() {
                            return Err(ModelError::UndeclaredSymbol(format!("constant #{}", c.0)));
                        }
                    }
                }
                OntoLink::Prop(l, r) | OntoLink::Pred(l, r) => {
                    for p in [l, r] {
                        if p.0 as usize >= sym.preds.len() {
                            return Err(ModelError::UndeclaredSymbol(format!(
                                "predicate #{}",
                                p.0
                            )));
                        }
                    }
                    let (la, ra) = (sym.pred(l).arity(), sym.pred(r).arity());
                    if la != ra {
                        return Err(ModelError::PredLinkArityMismatch {
                            left: sym.pred(l).name.clone(),
                            right: sym.pred(r).name.clone(),
                            la,
                            ra,
                        });
                    }
                    if matches!(link, OntoLink::Prop(..)) && la != 0 {
                        return Err(ModelError::PredLinkArityMismatch {
                            left: sym.pred(l).name.clone(),
                            right: sym.pred(r).name.clone(),
                            la,
                            ra,
                        });
                    }
                }
            }
        }
        Ok(Theory {
            symbols: self.symbols,
            atoms: self.atoms,
            w: self.w,
            c: self.c,
            o: self.o,
        })
    }

    /// `validate` that panics on failure; for theories built in code whose
    /// shape is known to be fine.
    pub fn build(self) -> Theory {
        self.validate().expect("theory built in code must validate")
    }
}

/// One derived statement `explanans explains explanandum
/// because_possible proviso`, together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplanationAtom {
    pub explanans: GroundAtom,
    pub explanandum: GroundAtom,
    pub proviso: BTreeSet<GroundAtom>,
    pub trace: Derivation,
}

/// A derivation tree for one explanation atom. Replaying the root rule
/// over its premises reconstructs the atom exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: DerivRule,
    pub premises: Vec<Derivation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivRule {
    /// Rule application on an active causal atom: `lower` reaches both the
    /// causal effect and `target` in the augmented taxonomy.
    Base {
        causal: CausalAtom,
        lower: GroundAtom,
        target: GroundAtom,
    },
    /// Composition of the two premise atoms, gathering their provisos.
    Trans,
    /// Proviso replacement: the premises' provisos each extend `kept`, and
    /// the background theory entails `kept -> \/_i /\ dropped_i`.
    Simplify {
        kept: BTreeSet<GroundAtom>,
        dropped: Vec<BTreeSet<GroundAtom>>,
    },
}

impl Derivation {
    /// Recomputes `(explanans, explanandum, proviso)` from the rule and
    /// premises alone.
    pub fn replay(&self) -> (GroundAtom, GroundAtom, BTreeSet<GroundAtom>) {
        match &self.rule {
            DerivRule::Base {
                causal,
                lower,
                target,
            } => {
                let mut proviso = BTreeSet::new();
                proviso.insert(causal.cause.clone());
                proviso.insert(lower.clone());
                (causal.cause.clone(), target.clone(), proviso)
            }
            DerivRule::Trans => {
                let (ans, _, left) = self.premises[0].replay();
                let (_, dum, right) = self.premises[1].replay();
                let proviso = left.union(&right).cloned().collect();
                (ans, dum, proviso)
            }
            DerivRule::Simplify { kept, .. } => {
                let (ans, dum, _) = self.premises[0].replay();
                (ans, dum, kept.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flu_builder() -> TheoryBuilder {
        let mut b = TheoryBuilder::new();
        b.declare_pred("Flu", vec![]).unwrap();
        b.declare_pred("Fever_Temperature", vec![]).unwrap();
        b
    }

    #[test]
    fn intern_atom_examples() {
        let mut b = TheoryBuilder::new();
        b.declare_pred("Heard", vec![ParamMode::One]).unwrap();
        b.declare_pred("Own", vec![ParamMode::All, ParamMode::One])
            .unwrap();
        b.declare_pred("Flu", vec![]).unwrap();
        b.declare_const("bell").unwrap();
        b.declare_const("student").unwrap();

        let heard = b.intern_atom("Heard", &["bell"]).unwrap();
        assert_eq!(heard.args.len(), 1);
        let flu = b.intern_atom("Flu", &[]).unwrap();
        assert!(flu.args.is_empty());
        let err = b.intern_atom("Own", &["student"]).unwrap_err();
        assert!(matches!(err, ModelError::ArityMismatch { .. }));
        assert!(matches!(
            b.intern_atom("Nope", &[]),
            Err(ModelError::UnknownPredicate(_))
        ));
        assert!(matches!(
            b.intern_atom("Heard", &["gong"]),
            Err(ModelError::UnknownConstant(_))
        ));
    }

    #[test]
    fn interning_is_idempotent() {
        let mut b = flu_builder();
        let a1 = b.intern_atom("Flu", &[]).unwrap();
        let a2 = b.intern_atom("Flu", &[]).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b.atom_index(&a1), b.atom_index(&a2));
        assert_eq!(b.atom_index(&a1), Some(0));
    }

    #[test]
    fn validate_flu_theory() {
        let mut b = flu_builder();
        let flu = b.intern_atom("Flu", &[]).unwrap();
        let fever = b.intern_atom("Fever_Temperature", &[]).unwrap();
        b.add_causal_atom(flu, fever);
        let t = b.validate().unwrap();
        assert_eq!(t.causal().len(), 1);
        assert_eq!(t.links().len(), 0);
        assert_eq!(t.causal_atoms().len(), 1);
    }

    #[test]
    fn validate_empty_theory() {
        let t = TheoryBuilder::new().validate().unwrap();
        assert!(t.classical().is_empty());
        assert!(t.causal().is_empty());
        assert!(t.links().is_empty());
    }

    #[test]
    fn pred_link_arity_mismatch() {
        let mut b = TheoryBuilder::new();
        b.declare_pred("Heard", vec![ParamMode::One]).unwrap();
        b.declare_pred("Own", vec![ParamMode::All, ParamMode::One])
            .unwrap();
        let err = b.add_isa("Heard", "Own").unwrap_err();
        assert!(matches!(err, ModelError::PredLinkArityMismatch { .. }));
    }

    #[test]
    fn validation_is_deterministic() {
        let make = || {
            let mut b = flu_builder();
            let flu = b.intern_atom("Flu", &[]).unwrap();
            let fever = b.intern_atom("Fever_Temperature", &[]).unwrap();
            b.add_classical(Formula::implies(
                Formula::Leaf(flu.clone()),
                Formula::Leaf(fever.clone()),
            ));
            b.add_causal_atom(flu, fever);
            b.validate().unwrap()
        };
        let (t1, t2) = (make(), make());
        assert_eq!(t1.classical(), t2.classical());
        assert_eq!(t1.causal(), t2.causal());
        assert_eq!(
            t1.premise_atoms().collect::<Vec<_>>(),
            t2.premise_atoms().collect::<Vec<_>>()
        );
    }

    #[test]
    fn derivation_replay_reconstructs_base() {
        let mut b = flu_builder();
        let flu = b.intern_atom("Flu", &[]).unwrap();
        let fever = b.intern_atom("Fever_Temperature", &[]).unwrap();
        let d = Derivation {
            rule: DerivRule::Base {
                causal: CausalAtom {
                    cause: flu.clone(),
                    effect: fever.clone(),
                },
                lower: fever.clone(),
                target: fever.clone(),
            },
            premises: vec![],
        };
        let (ans, dum, prov) = d.replay();
        assert_eq!(ans, flu);
        assert_eq!(dum, fever);
        assert_eq!(prov.len(), 2);
    }
}
