//! Checking the bundled examples and producing reports.
//!
//! Run with `cargo run --example verify_and_report`.

use tancone::bundled;
use tancone::report::analyze_report;
use tancone::verify::verify_examples;

fn main() {
    println!("{}", verify_examples(4));
    let report = analyze_report(&bundled::four_bar(), 4, true).expect("analysis runs");
    print!("{}", report.to_text());
    let json = report.to_json();
    let back = tancone::report::AnalysisReport::from_json(&json).expect("report parses");
    println!("json round trip: {}", back == report);
}
