//! Fits the latent-topic mixture with EM and prints the fitted topics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rf_lab::latent::{em_fit, latent_distance, EmConfig, Observation};

fn main() -> rf_lab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(0.0, 0.4).unwrap();
    let mut obs = Vec::new();
    for (k, centre) in [[0.0, 0.0], [4.0, 1.0], [1.0, 5.0]].iter().enumerate() {
        for i in 0..15 {
            let words = vec![vec![centre[0] + noise.sample(&mut rng)], vec![centre[1] + noise.sample(&mut rng)]];
            obs.push(Observation::new(format!("t{k}_{i}"), words));
        }
    }
    let fit = em_fit(&obs, &EmConfig { topics: 3, seed: 2, ..Default::default() })?;
    println!(
        "{} iterations, converged {}, final log-likelihood {:.4}",
        fit.iterations,
        fit.converged,
        fit.trace.last().unwrap()
    );
    print!("{}", fit.model.dump());
    for w in [[0.0, 0.0], [2.0, 2.0], [4.0, 1.0]] {
        println!("distance of {w:?}: {:.4}", latent_distance(&w, &fit.model)?);
    }
    Ok(())
}
