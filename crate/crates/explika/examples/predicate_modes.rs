//! Predicates over a constant taxonomy. A `one` parameter inherits
//! upward, an `all` parameter inherits downward; the lifted links form
//! the augmented taxonomy the rules run on.
//!
//! Run with: cargo run --example predicate_modes

use explika::engine::explain_query;
use explika::model::Theory;
use explika::ontology::build_ontology;
use explika::parser::{parse_theory, render_explanation};

fn load(name: &str) -> Theory {
    let path = format!("{}/theories/{name}.cet", env!("CARGO_MANIFEST_DIR"));
    parse_theory(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn show_links(title: &str, theory: &Theory) {
    println!("{title}");
    let onto = build_ontology(theory);
    for (a, b) in onto.links() {
        println!("  {} => {}", onto.universe().text(a), onto.universe().text(b));
    }
    println!();
}

fn main() {
    // Heard is existential in its parameter: hearing a loud bell is
    // hearing a warning signal, and also hearing a loud noise.
    let alarm = load("alarm");
    show_links("augmented links of alarm.cet:", &alarm);
    println!("derived explanations:");
    for atom in explain_query(&alarm, None, None).unwrap() {
        println!("  {}", render_explanation(alarm.symbols(), &atom));
    }
    println!();

    // Own(x, y) = "every x owns some y": downward in x, upward in y.
    // Note the composite link obtained by walking both parameters.
    let own = load("own");
    show_links("augmented links of own.cet:", &own);
}
