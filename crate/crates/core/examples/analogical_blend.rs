//! Runs both blending pipelines of the fixture corpus and prints the
//! fused pairs, the detailing stubs, the reinterpretation verdicts and the
//! resulting blend in the workspace language.
//!
//! Run with `cargo run --example analogical_blend`.

use semiosa::blending::run_pipeline;
use semiosa::dsl;

fn main() {
    let corpus = [
        (include_str!("../fixtures/ear_telephone.ss"), "Telephony"),
        (include_str!("../fixtures/heart_skin.ss"), "SkinTelemetry"),
    ];
    for (text, name) in corpus {
        let ws = dsl::parse(text).expect("fixture parses");
        let input = ws.blend_input(name).unwrap();
        let report = match run_pipeline(&input) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("{e}");
                std::process::exit(1);
            }
        };
        println!("== {name} ({})", report.compatibility);
        for line in &report.matched {
            println!("  {line}");
        }
        for stub in &report.detailing_stubs {
            println!("  stub {} {} for {}", stub.kind, stub.name, stub.for_target);
        }
        for v in &report.reinterpretation {
            println!("  {v}");
        }
        println!("  accepted: {}", report.accepted);
        println!("{}", dsl::print_system(&report.blend));
    }
}
