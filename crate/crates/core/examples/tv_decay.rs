//! Total-variation distance from the all-up start against the reversible-chain
//! bound, with the exact `beta*` and with its closed-form upper bound.
//!
//! cargo run --release --example tv_decay -- [n] [T] [horizon]

use isinggap::bounds::beta_star_bound;
use isinggap::spectral::{fitted_decay_rate, power_rows, tv_distance, verify_tv_decay};
use isinggap::{exact_spectrum, LatticeSize, SpinConfiguration, Temperature, TransitionKernel};

fn main() -> isinggap::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args
        .next()
        .map_or(Ok(2), |s| s.parse())
        .expect("n must be an integer");
    let t: Temperature = args.next().as_deref().unwrap_or("1").parse()?;
    let horizon: usize = args
        .next()
        .map_or(Ok(50), |s| s.parse())
        .expect("horizon must be an integer");

    let size = LatticeSize::new(n)?;
    let kernel = TransitionKernel::build(size, t, 512)?;
    let spectrum = exact_spectrum(&kernel)?;
    let bound = beta_star_bound(size, t).bound;
    let x = SpinConfiguration::all_up(size)?.index() as usize;
    let odds = (1.0 - kernel.pi()[x]) / kernel.pi()[x];

    let rows = power_rows(&kernel, x, horizon)?;
    let tv: Vec<f64> = rows
        .iter()
        .map(|r| tv_distance(r, kernel.pi()))
        .collect::<Result<_, _>>()?;
    println!(
        "beta* = {:.12}, closed-form bound {:.12}",
        spectrum.beta_star, bound
    );
    println!(
        "{:>4} {:>14} {:>14} {:>14}",
        "k", "tv", "exact bound", "closed form"
    );
    for (k, v) in tv.iter().enumerate().step_by(5) {
        let b = |beta: f64| 0.5 * (odds * beta.powi(2 * k as i32)).sqrt();
        println!(
            "{k:>4} {v:>14.6e} {:>14.6e} {:>14.6e}",
            b(spectrum.beta_star),
            b(bound)
        );
    }
    if let Some(rate) = fitted_decay_rate(&tv, 20, horizon) {
        println!("fitted geometric rate over k in [20, {horizon}]: {rate:.8}");
    }

    let report = verify_tv_decay(&kernel, &spectrum, horizon)?;
    println!(
        "all {} (start, k) pairs: {} failures with exact beta*, {} with the closed form",
        report.checks, report.failures_exact, report.failures_closed_form
    );
    Ok(())
}
