//! Fits pass probability against drill grade and prints the binned pass
//! rates next to the fitted curve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tutorweb::analytics::report::{pass_rate_table, summarize_fit};
use tutorweb::analytics::{fit_pass_probability, LogisticFit};

fn main() {
    let truth = LogisticFit { beta0: -5.0, beta1: 1.0, converged: true, iterations: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(2013);
    let points: Vec<(f64, bool)> = (0..2000)
        .map(|_| {
            let g = 10.0 * rng.random::<f64>().sqrt();
            (g, rng.random_bool(truth.probability(g)))
        })
        .collect();

    let fit = fit_pass_probability(&points).unwrap();
    println!("beta0 {:.3}  beta1 {:.3}  midpoint {:.2}  ({} iterations)", fit.beta0, fit.beta1, fit.midpoint().unwrap(), fit.iterations);
    println!("\n grade      n  observed  fitted");
    for b in pass_rate_table(&points, 10) {
        let mid = (b.grade_lo + b.grade_hi) / 2.0;
        let obs = b.rate.map(|r| format!("{r:.2}")).unwrap_or_else(|| "-".into());
        println!("{:>4.0}-{:<3.0} {:>5}  {obs:>8}  {:>6.2}", b.grade_lo, b.grade_hi, b.n, fit.probability(mid));
    }

    // perfectly separated outcomes have no finite maximum-likelihood fit
    let separated: Vec<(f64, bool)> = (0..=20).map(|i| (i as f64 / 2.0, i > 10)).collect();
    let s = summarize_fit(&separated).unwrap();
    println!("\nseparated data: separated={} midpoint {:.2}", s.separated, s.midpoint.unwrap());
}
