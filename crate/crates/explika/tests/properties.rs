//! Cross-cutting properties: parser totality, coherence between the
//! propositional and predicate encodings, and monotone blocking.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use explika::engine::{self, Normalized};
use explika::model::{ParamMode, Theory};
use explika::oracle::{random_theory, RandomTheoryParams};
use explika::parser::{parse_atom, parse_theory, render_theory};

proptest! {
    /// No input text crashes the parser, and every error points inside
    /// the input.
    #[test]
    fn parser_is_total_on_arbitrary_text(text in ".{0,200}") {
        match parse_theory(&text) {
            Ok(_) => {}
            Err(e) => {
                prop_assert!(e.span.start <= e.span.end);
                prop_assert!(e.span.end <= text.len());
            }
        }
    }

    /// Same for token-shaped garbage, which digs deeper into the grammar.
    #[test]
    fn parser_is_total_on_tokenish_text(
        words in proptest::collection::vec(
            prop_oneof![
                Just("pred".to_string()), Just("const".to_string()),
                Just("isa".to_string()), Just("cause".to_string()),
                Just("fact".to_string()), Just(".".to_string()),
                Just("->".to_string()), Just("=>".to_string()),
                Just("<->".to_string()), Just("(".to_string()),
                Just(")".to_string()), Just("!".to_string()),
                Just("&".to_string()), Just("|".to_string()),
                Just("/".to_string()), Just(",".to_string()),
                Just("0".to_string()), Just("2".to_string()),
                "[A-Za-z_][A-Za-z0-9_]{0,5}",
            ],
            0..40,
        )
    ) {
        let text = words.join(" ");
        match parse_theory(&text) {
            Ok(_) => {}
            Err(e) => {
                prop_assert!(e.span.start <= e.span.end);
                prop_assert!(e.span.end <= text.len());
            }
        }
    }

    #[test]
    fn atom_parser_is_total(text in ".{0,60}") {
        let theory = parse_theory("pred P/1. pred Q/0. const a.").unwrap();
        let _ = parse_atom(&text, &theory);
    }
}

fn normalized(t: &Theory) -> Normalized {
    let (ctx, set) = engine::derive_all(t).unwrap();
    set.normalized(ctx.universe())
}

/// Renames every `(explanans, explanandum, proviso)` text through `map`.
fn rename(sets: &Normalized, map: &BTreeMap<String, String>) -> Normalized {
    let tr = |s: &String| -> String { map.get(s).cloned().unwrap_or_else(|| s.clone()) };
    sets.iter()
        .map(|((a, b), fams)| {
            (
                (tr(a), tr(b)),
                fams.iter()
                    .map(|fam| fam.iter().map(tr).collect::<BTreeSet<_>>())
                    .collect(),
            )
        })
        .collect()
}

/// The bells scenario written with arity-0 symbols and with a unary
/// predicate over a constant taxonomy derives the same explanations.
#[test]
fn propositional_and_predicate_encodings_coincide() {
    let prop = parse_theory(
        "pred On_alarm/0. pred Heard_bell/0. pred Heard_loud_bell/0. pred Heard_soft_bell/0.
         isa Heard_loud_bell -> Heard_bell.
         isa Heard_soft_bell -> Heard_bell.
         cause On_alarm => Heard_bell.",
    )
    .unwrap();
    let pred = parse_theory(
        "pred On/1. pred Heard/1(one). const alarm, bell, loud_bell, soft_bell.
         isa loud_bell -> bell.
         isa soft_bell -> bell.
         cause On(alarm) => Heard(bell).",
    )
    .unwrap();
    let map: BTreeMap<String, String> = [
        ("On(alarm)", "On_alarm"),
        ("Heard(bell)", "Heard_bell"),
        ("Heard(loud_bell)", "Heard_loud_bell"),
        ("Heard(soft_bell)", "Heard_soft_bell"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(rename(&normalized(&pred), &map), normalized(&prop));
}

/// Flattens a theory whose predicates are all unary or propositional
/// into a purely propositional theory: one fresh symbol per ground
/// atom, taxonomy links turned into links between those symbols
/// according to the parameter mode.
fn flatten(t: &Theory) -> Option<(Theory, BTreeMap<String, String>)> {
    let sym = t.symbols();
    if sym.preds().any(|(_, d)| d.arity() > 1) {
        return None;
    }
    let consts: Vec<String> = {
        let mut v: Vec<String> = sym.consts().map(|(_, n)| n.to_string()).collect();
        v.sort();
        v
    };
    let flat_name = |pred: &str, args: &[&str]| -> String {
        if args.is_empty() {
            pred.to_string()
        } else {
            format!("{pred}_{}", args.join("_"))
        }
    };

    let mut src = String::new();
    let mut map = BTreeMap::new();
    for (_, d) in sym.preds() {
        if d.arity() == 0 {
            src.push_str(&format!("pred {}/0.\n", d.name));
            map.insert(d.name.clone(), d.name.clone());
        } else {
            for c in &consts {
                src.push_str(&format!("pred {}/0.\n", flat_name(&d.name, &[c])));
                map.insert(format!("{}({c})", d.name), flat_name(&d.name, &[c]));
            }
        }
    }
    use explika::model::OntoLink;
    for link in t.links() {
        match *link {
            OntoLink::Const(a, b) => {
                let (a, b) = (sym.const_name(a), sym.const_name(b));
                for (_, d) in sym.preds() {
                    if d.arity() == 1 {
                        match d.modes[0] {
                            ParamMode::One => src.push_str(&format!(
                                "isa {} -> {}.\n",
                                flat_name(&d.name, &[a]),
                                flat_name(&d.name, &[b])
                            )),
                            ParamMode::All => src.push_str(&format!(
                                "isa {} -> {}.\n",
                                flat_name(&d.name, &[b]),
                                flat_name(&d.name, &[a])
                            )),
                            ParamMode::Na => {}
                        }
                    }
                }
            }
            OntoLink::Prop(a, b) => {
                src.push_str(&format!(
                    "isa {} -> {}.\n",
                    sym.pred(a).name,
                    sym.pred(b).name
                ));
            }
            OntoLink::Pred(a, b) => {
                for c in &consts {
                    src.push_str(&format!(
                        "isa {} -> {}.\n",
                        flat_name(&sym.pred(a).name, &[c]),
                        flat_name(&sym.pred(b).name, &[c])
                    ));
                }
            }
        }
    }

    // premises: reuse the canonical rendering, then rewrite atom texts
    let rendered = render_theory(t);
    for line in rendered.lines() {
        if line.starts_with("cause ") || line.starts_with("fact ") {
            let mut flat_line = line.to_string();
            // longest-first so nested replacements cannot collide
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_by_key(|k| std::cmp::Reverse(k.len()));
            for k in keys {
                if k.contains('(') {
                    flat_line = flat_line.replace(k.as_str(), &map[k]);
                }
            }
            src.push_str(&flat_line);
            src.push('\n');
        }
    }
    let flat = parse_theory(&src).ok()?;
    Some((flat, map))
}

#[test]
fn unary_theories_flatten_to_equivalent_propositional_theories() {
    let params = RandomTheoryParams::default();
    let mut checked = 0;
    for seed in 0..400u64 {
        let t = random_theory(seed, &params);
        let Some((flat, map)) = flatten(&t) else {
            continue;
        };
        let lhs = match engine::derive_all(&t) {
            Ok((ctx, set)) => Some(set.normalized(ctx.universe())),
            Err(_) => None,
        };
        let rhs = match engine::derive_all(&flat) {
            Ok((ctx, set)) => Some(set.normalized(ctx.universe())),
            Err(_) => None,
        };
        match (lhs, rhs) {
            (None, None) => {}
            (Some(l), Some(r)) => {
                assert_eq!(
                    rename(&l, &map),
                    r,
                    "seed {seed}\npredicate theory:\n{}\nflattened:\n{}",
                    render_theory(&t),
                    render_theory(&flat)
                );
            }
            (l, r) => panic!(
                "seed {seed}: consistency disagreement between encodings ({:?} vs {:?})",
                l.is_some(),
                r.is_some()
            ),
        }
        checked += 1;
    }
    assert!(checked > 100, "flattening coverage too small: {checked}");
}

/// Adding background formulas can only block explanations, never revive
/// a proviso that was already impossible.
#[test]
fn monotone_blocking_under_added_facts() {
    let params = RandomTheoryParams::default();
    for seed in 0..150u64 {
        let t = random_theory(seed, &params);
        let Ok((ctx, _)) = engine::derive_all(&t) else {
            continue;
        };
        let atoms: Vec<String> = t.premise_atoms().map(|a| t.atom_text(a)).collect();
        if atoms.len() < 2 {
            continue;
        }
        let mut src = render_theory(&t);
        src.push_str(&format!("fact {} -> !{}.\n", atoms[0], atoms[1 % atoms.len()]));
        let Ok(stricter) = parse_theory(&src) else {
            continue;
        };
        let Ok((ctx2, set2)) = engine::derive_all(&stricter) else {
            continue; // the added fact made the theory inconsistent
        };
        // symbol ids differ between the two theories; map atoms by text
        let by_text: BTreeMap<&str, u32> = ctx
            .universe()
            .iter()
            .map(|(i, _)| (ctx.universe().text(i), i))
            .collect();
        for (_, entry) in set2.iter() {
            let back: Option<BTreeSet<u32>> = entry
                .proviso
                .iter()
                .map(|&i| by_text.get(ctx2.universe().text(i)).copied())
                .collect();
            let back = back.expect("added fact introduces no new atoms");
            assert!(
                ctx.consistent_with(&back),
                "seed {seed}: stricter theory emitted a proviso the looser one refutes"
            );
        }
    }
}
