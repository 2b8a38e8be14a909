//! Exact spectra: the infinite-temperature binomial pattern, the extreme
//! eigenvalues at n = 3, and Lanczos for the 65536-state n = 4 chain.
//!
//! cargo run --release --example spectrum

use isinggap::bounds::beta_min_bound;
use isinggap::spectral::{extremal_spectrum, CLUSTER_TOLERANCE};
use isinggap::{exact_spectrum, LatticeSize, Temperature, TransitionKernel};

fn main() -> isinggap::Result<()> {
    let two = LatticeSize::new(2)?;
    let hot = exact_spectrum(&TransitionKernel::build(two, Temperature::infinite(), 16)?)?;
    println!("n=2, T=inf: eigenvalue x multiplicity");
    for (v, m) in hot.multiplicities(CLUSTER_TOLERANCE) {
        println!("  {v:>8.5} x {m}");
    }

    let three = LatticeSize::new(3)?;
    println!(
        "\nn=3: {:>5} {:>14} {:>14} {:>14}",
        "T", "beta1", "beta_min", "beta_min bound"
    );
    for t in [0.5, 1.0, 2.0, 5.0] {
        let t = Temperature::new(t)?;
        let s = exact_spectrum(&TransitionKernel::build(three, t, 512)?)?;
        println!(
            "     {:>5} {:>14.10} {:>14.10} {:>14.10}",
            t.to_string(),
            s.beta1,
            s.beta_min,
            beta_min_bound(t)
        );
    }

    let four = LatticeSize::new(4)?;
    let kernel = TransitionKernel::build(four, Temperature::new(2.0)?, 1 << 16)?;
    let ex = extremal_spectrum(&kernel, 160)?;
    println!(
        "\nn=4, T=2 (Lanczos, {} steps): beta1 = {:.12} (residual {:.1e}), beta_min = {:.12}",
        ex.steps, ex.beta1, ex.beta1_residual, ex.beta_min
    );
    Ok(())
}
