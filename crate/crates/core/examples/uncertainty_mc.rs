//! Analytic error propagation next to a seeded Monte Carlo interval.

use carbon_pulse::uncertainty::{combine_mult, combine_sum, monte_carlo_ci, InputDist, UncertaintyLedger};

fn main() -> carbon_pulse::Result<()> {
    // sector means in Mt/day and their uncertainties in percent, read as one sigma
    let mu = [27.0, 15.5, 22.0, 7.5, 2.4, 1.8];
    let u = [1.5, 9.3, 36.0, 40.0, 10.2, 13.0];
    let analytic = combine_sum(&u, &mu)?;
    println!("summed sectors: ±{analytic:.2}%");
    println!("with projection and inventory terms: ±{:.2}%", combine_mult(&[analytic, 0.8, 5.0])?);

    let inputs: Vec<InputDist> = mu.iter().zip(&u).map(|(m, p)| InputDist::normal(*m, m * p / 100.0)).collect();
    let total = |x: &[f64]| Some(x.iter().sum::<f64>());
    for seed in [1, 2] {
        let ci = monte_carlo_ci(total, &inputs, 10_000, seed)?;
        let half = 50.0 * (ci.upper - ci.lower) / ci.nominal;
        println!("seed {seed}: {:.2} Mt/day, 68% interval [{:.2}, {:.2}] = ±{half:.2}%", ci.point, ci.lower, ci.upper);
    }

    let mut ledger = UncertaintyLedger::defaults();
    for (item, m) in ["Power", "GroundTransport", "Industry", "Residential", "Aviation", "InternationalShipping"].iter().zip(mu) {
        ledger.set_mu(item, m)?;
    }
    println!("default ledger overall: ±{:.2}%", ledger.overall()?);
    Ok(())
}
