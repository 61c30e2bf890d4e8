//! Parses the Toy workspace, validates it and prints the ground closure of
//! each system together with its count of environmental atoms.
//!
//! Run with `cargo run --example check_system`.

use semiosa::{closure, dsl, epsilon};

fn main() {
    let text = include_str!("../fixtures/toy.ss");
    let ws = dsl::parse(text).expect("toy fixture parses");

    for sys in ws.systems.values() {
        let model = closure(sys);
        println!("{} ({} sorts, {} axioms, epsilon = {})", sys.name, sys.sorts.len(), sys.axioms.len(), epsilon(sys));
        for atom in &model.atoms {
            println!("  {atom}");
        }
    }

    // A broken file is reported, not rejected with a panic.
    let broken = include_str!("../fixtures/cycle.ss");
    for d in dsl::parse(broken).unwrap_err() {
        println!("cycle.ss:{d}");
    }
}
