//! Null distribution of random retrieval and the two significance tests.

use rf_lab::eval::{hypergeom_mean, hypergeom_pmf, hypergeom_variance, random_baseline_test, sign_test};

fn main() -> rf_lab::Result<()> {
    let (n, m, q) = (1000, 50, 20);
    println!("N={n} m={m} q={q}: mean {:.3} variance {:.4}", hypergeom_mean(n, m, q), hypergeom_variance(n, m, q));
    for k in 0..=5 {
        println!("  P(k={k}) = {:.6}", hypergeom_pmf(k, n, m, q));
    }
    let hits = [3.0, 1.0, 2.0, 4.0, 0.0, 2.0, 3.0, 1.0, 2.0, 5.0];
    let t = random_baseline_test(&hits, n, m, q, 0.01)?;
    println!("z = {:.3}, p = {:.3e}, significant {}", t.z, t.p_value, t.significant);

    let pairs: Vec<(f64, f64)> = hits.iter().map(|&h| (h, 1.0)).collect();
    let s = sign_test(&pairs, 0.01);
    println!(
        "sign test: {} wins, {} losses, {} ties, p = {:.4}",
        s.first_wins, s.second_wins, s.ties, s.p_value
    );
    Ok(())
}
