//! Per-site edge-ratio bounds at n = 3: the worst exact ratio
//! `Q(e)^-1 sum |gamma| pi(x) pi(y)` over edges flipping each site against
//! the class's right-hand side. The interior right-hand side does not hold.
//!
//! cargo run --release --example class_bounds -- [T]

use isinggap::bounds::{class_edge_bound_checks, kappa_exact};
use isinggap::identities::bracket_maxima;
use isinggap::paths::accumulate_edge_loads;
use isinggap::{LatticeSize, Temperature, TransitionKernel};

fn main() -> isinggap::Result<()> {
    let t: Temperature = std::env::args().nth(1).as_deref().unwrap_or("1").parse()?;
    let size = LatticeSize::new(3)?;
    let kernel = TransitionKernel::build(size, t, 512)?;
    let kappa = kappa_exact(&kernel, &accumulate_edge_loads(&kernel)?);

    println!("T={t}, kappa = {:.6e}", kappa.kappa);
    println!(
        "{:>7} {:<15} {:<7} {:>14} {:>14} {:>10}",
        "site", "class", "case", "exact max", "bound", "rel margin"
    );
    for c in class_edge_bound_checks(kernel.measure(), &kappa) {
        println!(
            "{:>7} {:<15} {:<7} {:>14.6e} {:>14.6e} {:>10.3e}{}",
            format!("({},{})", c.p, c.q),
            c.class.name(),
            c.case.label(),
            c.max_ratio,
            c.rhs,
            c.relative_margin,
            if c.relative_margin < -1e-9 {
                "  VIOLATED"
            } else {
                ""
            }
        );
    }

    let b = bracket_maxima(size)?;
    println!(
        "\nbracket maxima over all 512 configurations (limit 3n+1 = {}):",
        b.limit
    );
    println!(
        "  single-bond terms: {} and {}",
        b.lower_term_max, b.upper_term_max
    );
    println!(
        "  off-corner {:?}, column {:?}/{:?}, row {:?}/{:?}, interior {:?}",
        b.off_corner, b.column_plus, b.column_minus, b.row_plus, b.row_minus, b.interior
    );
    Ok(())
}
