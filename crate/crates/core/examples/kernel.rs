//! Heat-bath kernel on a 2x2 lattice: one row, the closed-form flip
//! probabilities by site class, and the reversibility checks.
//!
//! cargo run --example kernel -- [n] [T]

use isinggap::kernel::closed_form_flip_probability;
use isinggap::{DirectedEdge, LatticeSize, SpinConfiguration, Temperature, TransitionKernel};

fn main() -> isinggap::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args
        .next()
        .map_or(Ok(2), |s| s.parse())
        .expect("n must be an integer");
    let t: Temperature = args.next().as_deref().unwrap_or("1").parse()?;

    let size = LatticeSize::new(n)?;
    let kernel = TransitionKernel::build(size, t, 1 << 16)?;
    let up = SpinConfiguration::all_up(size)?;
    println!(
        "n={n} T={t}: {} states, {} directed edges",
        kernel.num_states(),
        kernel.num_edges()
    );
    println!("Z = {:.6}", kernel.measure().partition_function());
    println!("\nall-up configuration\n{up}");
    println!("row of all-up (state {}):", up.index());
    for (y, p) in kernel.row(up.index() as usize) {
        println!("  -> {y:>4}  {p:.8}");
    }

    println!("\nflip probabilities from all-up, closed form vs kernel:");
    for site in size.site_indices() {
        let e = DirectedEdge::new(up, site)?;
        println!(
            "  ({},{}) {:<14} {:.10}  {:.10}",
            site.p(),
            site.q(),
            site.class().name(),
            closed_form_flip_probability(&e, t),
            kernel.edge_probability(e.index()),
        );
    }

    let (row_err, min_entry) = kernel.row_sum_error();
    println!("\nmax |row sum - 1|      = {row_err:.2e}");
    println!("min entry              = {min_entry:.3e}");
    println!(
        "detailed balance error = {:.2e}",
        kernel.detailed_balance_error()
    );
    println!("irreducible            = {}", kernel.is_irreducible());
    Ok(())
}
