//! Parse a field definition, validate it over a box, and extract jets.

use frspace::fields::{self, BoxSampler};
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fields/generic.json");
    let field = fields::load_field(&path).unwrap();
    println!("field '{}': {}", field.name, field.description);
    println!("  dim {}", field.dim);
    println!("  g(x) = {}", field.g);

    // jets carry exact first derivatives of every expression
    let jet = field.jet_at(&[0.3, -0.4]).unwrap();
    println!("\njet at (0.3, -0.4): c = {:.6}, g = {:.6}", jet.c(), jet.g());
    println!("  dg = [{:+.6}, {:+.6}]", jet.dg()[0], jet.dg()[1]);
    println!("  dc = [{:+.6}, {:+.6}]", jet.dc()[0], jet.dc()[1]);

    // full box validation with a low-discrepancy sampler
    let sampler = BoxSampler::new(vec![-3.0, -3.0], vec![3.0, 3.0], 1000).unwrap();
    let report = fields::validate_field(&field, &sampler);
    println!(
        "\nvalidated {} sample points: {} ({} failures)",
        report.total,
        if report.pass { "all valid" } else { "INVALID" },
        report.failures.len()
    );

    // a field that exceeds the unit axis norm on part of the box
    let bad = fields::parse_field(
        r#"{
            "dim": 2,
            "a": [["1", "0"], ["0", "1"]],
            "b": ["0.6 + 0.5*x1", "0"],
            "g": "0.3",
            "name": "overdriven-axis",
            "description": "axis norm crosses 1 for x1 > 0.8"
        }"#,
    )
    .unwrap();
    let sampler = BoxSampler::new(vec![0.0, 0.0], vec![1.0, 1.0], 400).unwrap();
    let report = fields::validate_field(&bad, &sampler);
    println!(
        "\nfield '{}': {} of {} points fail; first failure:",
        bad.name,
        report.failures.len(),
        report.total
    );
    if let Some(f) = report.failures.first() {
        println!("  at x = ({:.4}, {:.4}): {}", f.x[0], f.x[1], f.reason);
    }
}
