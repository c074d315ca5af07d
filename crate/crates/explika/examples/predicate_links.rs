//! Taxonomy links between predicates themselves, and defeasibility:
//! knowledge added later can silently withdraw an explanation.
//!
//! Run with: cargo run --example predicate_links

use explika::engine::explain_query;
use explika::model::Theory;
use explika::ontology::build_ontology;
use explika::parser::{parse_theory, render_explanation};

fn load(name: &str) -> Theory {
    let path = format!("{}/theories/{name}.cet", env!("CARGO_MANIFEST_DIR"));
    parse_theory(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn main() {
    // `isa Heard -> Perceived` lifts pointwise over every argument.
    let perceived = load("perceived");
    let onto = build_ontology(&perceived);
    println!("links induced by `isa Heard -> Perceived`:");
    for (a, b) in onto.links() {
        println!("  {} => {}", onto.universe().text(a), onto.universe().text(b));
    }

    // Getting cold explains Mary jogging, because jogging is one way of
    // moving up and getting cold causes her to move up.
    let mary = load("mary");
    println!("\nmary.cet:");
    for atom in explain_query(&mary, None, None).unwrap() {
        println!("  {}", render_explanation(mary.symbols(), &atom));
    }

    // In warm weather Mary cannot get cold; the jogging explanation is
    // withdrawn while the rest still stands.
    let warm = load("mary_warm");
    println!("\nmary_warm.cet:");
    for atom in explain_query(&warm, None, None).unwrap() {
        println!("  {}", render_explanation(warm.symbols(), &atom));
    }
}
