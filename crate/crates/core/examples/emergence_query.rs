//! Asks whether a property is emergent: derivable in the whole but not in
//! what the whole shares with a reference system.
//!
//! Run with `cargo run --example emergence_query`.

use semiosa::dsl;
use semiosa::emergence::{analyze, Deducibility, ObserverSpec, Source};

fn main() {
    let ws = dsl::parse(include_str!("../fixtures/toy.ss")).expect("toy fixture parses");
    let toy = ws.system("Toy").unwrap();
    let core = ws.system("ToyCore").unwrap();
    let e = ObserverSpec::identity(toy);

    for text in ["fits(pair(leaf, leaf))", "touches(leaf, leaf)"] {
        let p = dsl::parse_atom(text, toy).unwrap();
        let report = analyze(&p, toy, core, &e, std::slice::from_ref(toy)).unwrap();
        print!("{p}: emergent {}", report.emergent);
        match &report.deducibility {
            Some(Deducibility::Deducible { witness }) => print!(", deducible via {}", witness.name),
            Some(Deducibility::Observational) => print!(", observational"),
            None => {}
        }
        match &report.source {
            Some(Source::Process { witness }) => print!(", source: process (recovered with {witness})"),
            Some(Source::Ontology { witness }) => print!(", source: ontology ({witness})"),
            Some(s) => print!(", source: {s:?}"),
            None => {}
        }
        println!();
    }
}
