//! Classify jets from the three families and show the bdot-based criterion
//! agreeing with the direct definition.

use frspace::jets::{berwald_jet, build_point_jet, landsberg_candidate_jet, random_jet};
use frspace::landsberg::berwald_verdict;
use ndarray::Array1;

fn show(label: &str, report: &frspace::landsberg::BerwaldReport) {
    println!("{label}");
    println!("  verdict:            {}", report.verdict);
    println!("  charge:             {:+.4} (constant: {})", report.charge, report.charge_constant);
    println!("  max |nabla b|:      {:.3e}", report.max_nabla_b);
    println!("  max |bdot|:         {:.3e} over {} tangents", report.max_abs_bdot, report.samples);
    println!("  spray deviation:    {:.3e}", report.max_spray_deviation);
    println!("  bdot criterion:     {}", if report.bdot_criterion_consistent { "consistent" } else { "INCONSISTENT" });
    println!();
}

fn main() {
    let jet = berwald_jet(3, 1).unwrap();
    show("parallel axis, constant nonzero charge:", &berwald_verdict(&jet).unwrap());

    let jet = landsberg_candidate_jet(3, 2, 0.5).unwrap();
    show(
        "proportional covariant derivative (k = 0.5), constant charge:",
        &berwald_verdict(&jet).unwrap(),
    );

    let base = random_jet(3, 3, (0.2, 0.8), (0.0, 0.0)).unwrap();
    let jet = build_point_jet(
        3,
        base.a().clone(),
        base.da().clone(),
        base.b().clone(),
        base.db().clone(),
        0.0,
        Array1::zeros(3),
    )
    .unwrap();
    show("zero charge with zero gradient:", &berwald_verdict(&jet).unwrap());

    let jet = random_jet(3, 4, (0.2, 0.8), (-1.5, 1.5)).unwrap();
    show("fully generic jet:", &berwald_verdict(&jet).unwrap());
}
