//! explika derives tentative explanation statements from causal rules,
//! an IS-A taxonomy and classical background knowledge.
//!
//! Given premises of the form `alpha causes beta`, taxonomy links such
//! as `loud_bell -> bell`, and Boolean background facts, the engine
//! infers every statement `alpha explains beta because_possible Φ`
//! licensed by the rule system: a base rule that walks the taxonomy
//! around a caused atom, transitivity that gathers conditions, proviso
//! simplification against the background theory, and a final
//! minimal-proviso filter. Explanations are defeasible: each one stands
//! only while its proviso remains jointly possible with the background
//! theory.
//!
//! The crate is a library first; see the `examples/` directory for
//! runnable walkthroughs of each capability and `src/main.rs` for the
//! thin command-line front end.
//!
//! ```
//! let theory = explika::parser::parse_theory(
//!     "pred Flu/0. pred Fever/0. cause Flu => Fever.",
//! )
//! .unwrap();
//! let atoms = explika::engine::explain_query(&theory, None, None).unwrap();
//! let rendered: Vec<String> = atoms
//!     .iter()
//!     .map(|a| explika::parser::render_explanation(theory.symbols(), a))
//!     .collect();
//! assert_eq!(rendered, ["Flu explains Fever because_possible {Flu}"]);
//! ```

pub mod cli;
pub mod engine;
pub mod model;
pub mod ontology;
pub mod oracle;
pub mod parser;
pub mod sat;
