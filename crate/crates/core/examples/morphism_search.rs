//! Verifies a renaming morphism, checks its preservation properties,
//! enumerates all total morphisms between two systems and applies the
//! creativity test.
//!
//! Run with `cargo run --example morphism_search`.

use std::collections::BTreeSet;

use semiosa::emergence::ObserverSpec;
use semiosa::morphism::check_creative;
use semiosa::{check_properties, dsl, find_morphisms, Property};

fn main() {
    let ws = dsl::parse(include_str!("../fixtures/toy.ss")).expect("toy fixture parses");
    let toy = ws.system("Toy").unwrap();
    let toy2 = ws.system("Toy2").unwrap();
    let quiet = ws.system("Toy2Quiet").unwrap();

    let m = ws.morphism("M").unwrap();
    let all: BTreeSet<Property> = [Property::Level, Property::Priority, Property::Axiom, Property::Natural].into();
    let report = check_properties(m, toy, toy2, &all);
    for p in &all {
        println!("M {p}: {}", report.holds(*p));
    }

    let found = find_morphisms(toy, toy2, &BTreeSet::new(), 10);
    println!("total morphisms Toy -> Toy2: {}", found.len());
    for f in &found {
        println!("{f}");
    }

    // Dropping the environmental tag makes the rename natural; it is also
    // the only total morphism, so it counts as creative.
    let pi = ws.morphism("Quiet").unwrap();
    let verdict =
        check_creative(pi, toy, quiet, &ObserverSpec::identity(toy), &ObserverSpec::identity(quiet)).unwrap();
    println!(
        "Quiet: natural {}, unique {}, creative {}",
        verdict.natural, verdict.unique, verdict.creative
    );
}
