//! Runs the telephone invention scenario, prints the trajectory and then
//! replays it to show that every recorded choice becomes certain.
//!
//! Run with `cargo run --example simulate_process [seed]`.

use semiosa::dsl;
use semiosa::dynamics::{ratio_str, replay, run_process};

fn main() {
    let ws = dsl::parse(include_str!("../fixtures/ear_telephone.ss")).expect("fixture parses");
    let mut sc = ws.scenario("Invention").unwrap();
    if let Some(seed) = std::env::args().nth(1) {
        sc.seed = seed.parse().expect("seed is an integer");
    }

    let (trajectory, omega) = match run_process(&sc) {
        Ok(done) => done,
        Err(failure) => {
            eprintln!("run stopped: {}", failure.error);
            std::process::exit(1);
        }
    };
    for (i, step) in trajectory.steps.iter().enumerate() {
        let p: Vec<String> = step.probabilities.iter().map(ratio_str).collect();
        println!("step {i}: {} [{}] epsilon {} -> {}", step.chosen, p.join(", "), step.epsilon_before, step.epsilon);
    }
    println!("T = {} (f {}, mu {})", trajectory.total(), trajectory.total_f(), trajectory.total_mu());
    println!("final: {} with {} ground atoms", omega.phi.name, omega.lambda.len());

    let (again, collapsed) = replay(&trajectory, &sc).unwrap();
    assert_eq!(again, omega.phi);
    for step in &collapsed.steps {
        let p: Vec<String> = step.probabilities.iter().map(ratio_str).collect();
        println!("replayed {}: [{}]", step.chosen, p.join(", "));
    }
}
