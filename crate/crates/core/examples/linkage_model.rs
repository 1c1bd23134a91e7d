//! Parsing a linkage document and inspecting its topology and loop closure.
//!
//! Run with `cargo run --example linkage_model`.

use tancone::bundled;
use tancone::linkage::parse_linkage;

const TRIANGLE: &str = r#"{
  "name": "planar triangle of revolutes",
  "bodies": ["ground", "crank", "rocker"],
  "joints": [
    {"id": "A", "kind": "revolute", "from": "ground", "to": "crank",  "screws": [["0","0","1","0","0","0"]]},
    {"id": "B", "kind": "revolute", "from": "crank",  "to": "rocker", "screws": [["0","0","1","0","-1","0"]]},
    {"id": "C", "kind": "revolute", "from": "rocker", "to": "ground", "screws": [["0","0","1","1","-1","0"]]}
  ]
}"#;

fn main() {
    let tri = parse_linkage(TRIANGLE).expect("valid document");
    println!("{}: {} coordinates, {} cycle(s)", tri.name, tri.n(), tri.gamma());
    for c in tri.fundamental_cycles() {
        let entries: Vec<String> =
            c.entries.iter().map(|e| format!("{}{}", if e.sign > 0 { "+" } else { "-" }, tri.coord_label(e.coord))).collect();
        println!("  cycle: {}", entries.join(" "));
    }
    // three revolutes in a closed planar loop are rigid
    println!("  closure residual at q = (0.1, 0.2, 0.3): {:.3e}", tri.closure_residual(&[0.1, 0.2, 0.3]));

    let six = bundled::six_bar();
    println!("{}: {} coordinates, {} cycles", six.name, six.n(), six.gamma());
    for (l, c) in six.fundamental_cycles().iter().enumerate() {
        let entries: Vec<String> =
            c.entries.iter().map(|e| format!("{}{}", if e.sign > 0 { "+" } else { "-" }, six.coord_label(e.coord))).collect();
        println!("  cycle {}: {}", l + 1, entries.join(" "));
    }

    match parse_linkage(&TRIANGLE.replace("\"1\",\"-1\",\"0\"", "\"1.0\",\"-1\",\"0\"")) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("rejected: {e}"),
    }
}
