//! How explanations travel through the IS-A taxonomy around a caused
//! atom: upward to more general forms, downward to more specific ones,
//! and how background knowledge blocks either direction.
//!
//! Run with: cargo run --example taxonomy_walk

use explika::engine::explain_query;
use explika::model::Theory;
use explika::parser::{parse_theory, render_explanation};

fn load(name: &str) -> Theory {
    let path = format!("{}/theories/{name}.cet", env!("CARGO_MANIFEST_DIR"));
    parse_theory(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn show(title: &str, theory: &Theory) {
    println!("{title}");
    let atoms = explain_query(theory, None, None).unwrap();
    if atoms.is_empty() {
        println!("  (nothing derivable)");
    }
    for atom in atoms {
        println!("  {}", render_explanation(theory.symbols(), &atom));
    }
    println!();
}

fn main() {
    // Upward: hearing a bell is a kind of hearing a noise, so the alarm
    // explains the noise with no extra conditions.
    show("upward (ct.cet):", &load("ct"));

    // A heard fog-horn is incompatible with a heard bell, which rules
    // the alarm out entirely.
    show("upward blocked (ct_prime.cet):", &load("ct_prime"));

    // Downward: the alarm explains each specific bell form, under the
    // proviso that this form is jointly possible with the alarm.
    show("downward (bells.cet):", &load("bells"));

    // Ruling out the soft bell with the alarm removes exactly that form.
    show("downward blocked (bells_blocked.cet):", &load("bells_blocked"));
}
