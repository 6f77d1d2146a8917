//! Evaluate the metric function and metric tensor at a point, and show the
//! identities that tie the scalar layer together.

use frspace::jets::{random_jet, TangentState};
use frspace::linalg;
use frspace::metric;

fn main() {
    let jet = random_jet(3, 42, (0.2, 0.8), (-1.5, 1.5)).unwrap();
    let y = [0.7, -0.3, 0.5];

    println!("jet: dim 3, c = {:.6}, g = {:.6}", jet.c(), jet.g());

    let (k, j, sc) = metric::metric_k(&jet, &y).unwrap();
    let ts = TangentState::new(&jet, &y).unwrap();
    println!("\ntangent scalars at y = {:?}:", y);
    println!("  b = {:.12}   S = {:.12}   q = {:.12}", ts.b, ts.s, ts.q);
    println!("  B = {:.12}   L = {:.12}", sc.b_form, sc.l);
    println!("  K = {:.12}   J = {:.12}   nu = {:.12}", k, j, sc.nu);

    // the quadratic form splits into L^2 + h^2 b^2
    let split = sc.l * sc.l + sc.h * sc.h * ts.b * ts.b;
    println!(
        "\nquadratic-form split: |L^2 + h^2 b^2 - B| = {:.3e}",
        (split - sc.b_form).abs()
    );

    let ev = metric::metric_tensor(&jet, &y).unwrap();
    println!("\nmetric tensor:");
    for i in 0..3 {
        println!(
            "  [{:+.9} {:+.9} {:+.9}]",
            ev.gmat[(i, 0)],
            ev.gmat[(i, 1)],
            ev.gmat[(i, 2)]
        );
    }
    let (lo, hi) = linalg::spd_bounds(&ev.gmat);
    println!("eigenvalue range: [{:.6}, {:.6}] (positive-definite)", lo, hi);

    // determinant identity against the background metric
    let det_a = linalg::determinant(jet.a());
    let predicted = sc.nu / ts.q * (k * k / sc.b_form).powi(3) * det_a;
    println!(
        "determinant identity: det(g) / [(nu/q)(K^2/B)^N det(a)] - 1 = {:+.3e}",
        ev.det_g / predicted - 1.0
    );

    // the lowered covector is both the closed form and half the K^2 gradient
    let quad = ev.gmat.dot(&ts.y).dot(&ts.y);
    println!("g_ij y^i y^j - K^2 = {:+.3e}", quad - k * k);

    // charge-derivative scalar: differentiated vs closed route
    let mbar_ad = metric::g_derivative_scalar(&jet, &y).unwrap();
    let mbar_closed = metric::g_derivative_scalar_closed(&jet, &y).unwrap();
    println!(
        "\ncharge scalar Mbar = {:.12} (differentiated), residual vs closed form {:.3e}",
        mbar_ad,
        (mbar_ad - mbar_closed).abs()
    );
}
