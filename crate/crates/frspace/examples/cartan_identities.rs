//! Cross-check the differentiated Cartan tensor against its closed forms,
//! and show the two-dimensional main-scalar factorization.

use frspace::cartan::{self, CartanEval};
use frspace::jets::random_jet;
use frspace::metric;

fn max_abs3(t: &ndarray::Array3<f64>) -> f64 {
    t.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn main() {
    let jet = random_jet(4, 7, (0.2, 0.8), (0.3, 1.5)).unwrap();
    let y = [0.4, -0.9, 0.2, 0.6];
    let ce = CartanEval::evaluate(&jet, &y).unwrap();

    println!("dim 4 jet with c = {:.4}, g = {:.4}", jet.c(), jet.g());
    println!("shape scalar X = {:.9} (N X = {:.9} < 1)", ce.x, 4.0 * ce.x);
    println!("squared norm A.A = {:.9}", ce.aa);

    let closed = cartan::cartan_closed_form(&jet, &y).unwrap();
    let scale = max_abs3(&ce.a3);
    let mut worst = 0.0_f64;
    for (idx, v) in ce.a3.indexed_iter() {
        worst = worst.max((v - closed[idx]).abs());
    }
    println!(
        "differentiated tensor vs closed representation: relative residual {:.3e}",
        worst / scale
    );

    // trace against the metric contraction
    let ev = metric::metric_tensor(&jet, &y).unwrap();
    let mut trace_resid = 0.0_f64;
    for i in 0..4 {
        let mut tr = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                tr += ev.ginv[(j, k)] * ce.a3[(i, j, k)];
            }
        }
        trace_resid = trace_resid.max((tr - ce.a1[i]).abs());
    }
    println!("trace vector vs g^(jk) contraction: residual {:.3e}", trace_resid);

    let aa_contract = ev.ginv.dot(&ce.a1).dot(&ce.a1);
    println!(
        "norm closed form vs g^(ij) A_i A_j: relative residual {:.3e}",
        (ce.aa / aa_contract - 1.0).abs()
    );

    // dimension two: the tensor factorizes through one covector
    let jet2 = random_jet(2, 11, (0.3, 0.7), (0.5, 1.2)).unwrap();
    let y2 = [0.8, -0.4];
    let i_scalar = cartan::main_scalar(&jet2, &y2).unwrap();
    let (a1, _) = cartan::cartan_vector(&jet2, &y2).unwrap();
    let aa = cartan::cartan_norm(&jet2, &y2).unwrap();
    let alpha = [a1[0] / aa.sqrt(), a1[1] / aa.sqrt()];
    let a3 = cartan::cartan_tensor(&jet2, &y2).unwrap();
    let mut fact_resid = 0.0_f64;
    for ((i, j, k), v) in a3.indexed_iter() {
        fact_resid = fact_resid.max((v - i_scalar * alpha[i] * alpha[j] * alpha[k]).abs());
    }
    println!(
        "\ndim 2: main scalar I = {:.9}; factorization residual {:.3e} (scale {:.3e})",
        i_scalar,
        fact_resid,
        max_abs3(&a3)
    );
}
