//! The central equivalence: the closed-form spray coefficients against the
//! Finslerian-Christoffel route computed by differentiating the metric
//! pipeline through the point data.

use frspace::jets::{berwald_jet, random_jet};
use frspace::riemannian;
use frspace::rng::derive_seed;
use frspace::spray;

fn main() {
    println!("closed form vs oracle on fully generic jets (varying metric, axis, charge):\n");
    let mut worst = 0.0_f64;
    for trial in 0..24u64 {
        let dim = 2 + (trial % 4) as usize;
        let jet = random_jet(dim, derive_seed(3, 1, trial), (0.2, 0.9), (-1.8, 1.8)).unwrap();
        let y: Vec<f64> = (0..dim).map(|i| 0.3 + 0.5 * ((i + 1) as f64) * (-1.0_f64).powi(i as i32)).collect();
        let closed = spray::spray(&jet, &y).unwrap().g;
        let oracle = spray::spray_oracle(&jet, &y).unwrap();
        let scale = oracle.iter().fold(1e-30_f64, |m, x| m.max(x.abs()));
        let mut resid = 0.0_f64;
        for i in 0..dim {
            resid = resid.max((closed[i] - oracle[i]).abs() / scale);
        }
        worst = worst.max(resid);
        if trial < 6 {
            println!(
                "  dim {}  c = {:.3}  g = {:+.3}  relative residual {:.3e}",
                dim,
                jet.c(),
                jet.g(),
                resid
            );
        }
    }
    println!("  ... worst over 24 jets: {:.3e}\n", worst);

    // derivative ladder obeys the Euler identities
    let jet = random_jet(3, 5, (0.2, 0.9), (-1.8, 1.8)).unwrap();
    let y = [0.6, -0.2, 0.8];
    let out = spray::spray(&jet, &y).unwrap();
    let (g1, g2, g3) = spray::spray_derivatives(&jet, &y).unwrap();
    let mut euler1 = 0.0_f64;
    let mut euler2 = 0.0_f64;
    let mut euler3 = 0.0_f64;
    for i in 0..3 {
        let c1: f64 = (0..3).map(|k| g1[(i, k)] * y[k]).sum();
        euler1 = euler1.max((c1 - 2.0 * out.g[i]).abs());
        for k in 0..3 {
            let c2: f64 = (0..3).map(|m| g2[(i, k, m)] * y[m]).sum();
            euler2 = euler2.max((c2 - g1[(i, k)]).abs());
            for m in 0..3 {
                let c3: f64 = (0..3).map(|j| g3[(i, k, m, j)] * y[j]).sum();
                euler3 = euler3.max(c3.abs());
            }
        }
    }
    println!("Euler ladder residuals: G1.y - 2G = {euler1:.3e},  G2.y - G1 = {euler2:.3e},  G3.y = {euler3:.3e}");

    // a parallel axis with constant charge collapses the spray to the
    // background Christoffel contraction
    let bjet = berwald_jet(3, 9).unwrap();
    let gamma = riemannian::christoffel(&bjet);
    let g_out = spray::spray(&bjet, &y).unwrap().g;
    let mut resid = 0.0_f64;
    for i in 0..3 {
        let mut quad = 0.0;
        for m in 0..3 {
            for n in 0..3 {
                quad += gamma[(i, m, n)] * y[m] * y[n];
            }
        }
        resid = resid.max((g_out[i] - quad).abs());
    }
    println!("parallel-axis jet: |G - a-quadratic| = {resid:.3e}");

    // the derivative of the axis 1-form along the spray, two routes
    let jet = random_jet(4, 13, (0.2, 0.9), (-1.8, 1.8)).unwrap();
    let y4 = [0.6, -0.2, 0.8, 0.1];
    let b1 = spray::dot_b(&jet, &y4).unwrap();
    let b2 = spray::dot_b_definitional(&jet, &y4).unwrap();
    println!("bdot closed = {b1:.12}, definitional = {b2:.12}, gap = {:.3e}", (b1 - b2).abs());
}
