//! A condensed vibration-monitoring model: which signal evolutions can
//! a sliding of the flywheel explain, and what changes when the alarm
//! chain is added to the model.
//!
//! Run with: cargo run --example case_study

use explika::engine::explain_query;
use explika::model::Theory;
use explika::parser::{parse_theory, render_explanation};

fn load(name: &str) -> Theory {
    let path = format!("{}/theories/{name}.cet", env!("CARGO_MANIFEST_DIR"));
    parse_theory(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn show(title: &str, theory: &Theory) {
    println!("{title}");
    for atom in explain_query(theory, None, None).unwrap() {
        println!("  {}", render_explanation(theory.symbols(), &atom));
    }
    println!();
}

fn main() {
    // SOF explains a step, an evolution (a step is one), and a sharp
    // step (possibly), but not a slow increase: that is a different
    // kind of evolution, unrelated to what SOF causes.
    show("base model (sof_base.cet):", &load("sof_base"));

    // With `Evolution causes Alarm`, SOF also explains the alarm, by
    // composing through the evolution. Step still explains nothing:
    // it causes nothing, and only causes can open an explanation.
    show("extended model (sof.cet):", &load("sof"));
}
