//! Integrate geodesics on the bundled fields and measure the conservation of
//! the metric function along them.

use frspace::fields;
use std::path::Path;

fn bundled(name: &str) -> fields::FieldSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fields").join(name);
    fields::load_field(&path).unwrap()
}

fn main() {
    // straight rays on constant data
    let flat = bundled("flat.json");
    let traj = fields::integrate_geodesic(&flat, &[0.0, 0.0], &[1.0, 0.4], 1e-2, 400).unwrap();
    let last = traj.points.last().unwrap();
    println!(
        "flat field:    x({:.1}) = ({:+.9}, {:+.9}), K drift {:.3e}",
        last.t, last.x[0], last.x[1], traj.k_drift
    );

    // the parallel-axis field follows its background Riemannian geodesics
    let berwald = bundled("berwald.json");
    let x0 = [0.3, -0.2, 0.1];
    let y0 = [0.5, 0.7, 0.4];
    let full = fields::integrate_geodesic(&berwald, &x0, &y0, 1e-2, 400).unwrap();
    let riem = fields::integrate_riemannian(&berwald, &x0, &y0, 1e-2, 400).unwrap();
    let mut dev = 0.0_f64;
    for (p, q) in full.points.iter().zip(riem.points.iter()) {
        for i in 0..3 {
            dev = dev.max((p.x[i] - q.x[i]).abs());
        }
    }
    println!(
        "berwald field: deviation from the background geodesic {:.3e}, K drift {:.3e}",
        dev, full.k_drift
    );

    // drift scales with the fourth power of the step
    let generic = bundled("generic.json");
    println!("\ngeneric field, fixed horizon t = 8:");
    println!("    dt        steps   K drift       ratio");
    let mut prev: Option<f64> = None;
    for dt in [0.04_f64, 0.02, 0.01, 0.005] {
        let steps = (8.0 / dt).round() as usize;
        let traj = fields::integrate_geodesic(&generic, &[0.1, 0.2], &[0.9, -0.5], dt, steps).unwrap();
        let ratio = prev.map(|p| format!("{:.2}", p / traj.k_drift)).unwrap_or_default();
        println!("    {:<8}  {:<6}  {:.6e}  {}", dt, steps, traj.k_drift, ratio);
        prev = Some(traj.k_drift);
    }
    println!("(a ratio near 16 per halving is the 4th-order signature)");
}
