//! The eigenvalue sandwich `beta_1 <= 1 - 1/kappa <= 1 - n^-4 e^{-(2/T)(2n+1)}`
//! for every small lattice and a few temperatures.
//!
//! cargo run --release --example kappa

use isinggap::bounds::{
    closed_form_beta1_bound, kappa_beta1_bound, kappa_exact, kappa_upper_bound,
};
use isinggap::paths::accumulate_edge_loads;
use isinggap::{exact_spectrum, LatticeSize, Temperature, TransitionKernel};

fn main() -> isinggap::Result<()> {
    println!(
        "{:>2} {:>5} {:>14} {:>14} {:>12} {:>14} {:>14}",
        "n", "T", "kappa", "n^4e^(..)", "beta1", "1-1/kappa", "closed form"
    );
    for n in 1..=3 {
        let size = LatticeSize::new(n)?;
        for t in ["0.5", "1", "2", "5", "inf"] {
            let t: Temperature = t.parse()?;
            let kernel = TransitionKernel::build(size, t, 512)?;
            let kappa = kappa_exact(&kernel, &accumulate_edge_loads(&kernel)?);
            let spectrum = exact_spectrum(&kernel)?;
            println!(
                "{n:>2} {:>5} {:>14.6e} {:>14.6e} {:>12.9} {:>14.11} {:>14.11}",
                t.to_string(),
                kappa.kappa,
                kappa_upper_bound(size, t),
                spectrum.beta1,
                kappa_beta1_bound(kappa.kappa)?,
                closed_form_beta1_bound(size, t),
            );
        }
    }
    Ok(())
}
