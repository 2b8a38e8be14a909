//! Comparison with the elevation-based gap: `f(T) >= g(T)` over a grid, the
//! two gaps at a few lattice sizes, and the size where the ordering flips.
//!
//! cargo run --example compare

use isinggap::bounds::{crossover_n, printed_partition_log_bound};
use isinggap::report::{compare_report, parse_grid};
use isinggap::{IsingMeasure, LatticeSize, Temperature};

fn main() -> isinggap::Result<()> {
    let grid = parse_grid("0.5:10:0.5")?;
    let report = compare_report(&grid, &[5, 10, 20])?;
    println!(
        "{:>5} {:>12} {:>12}   log(closed-form gap / elevation gap) at n = 5, 10, 20",
        "T", "f", "g"
    );
    for r in &report.rows {
        let ratios: Vec<String> = r
            .closed_form_log_gap
            .iter()
            .zip(&r.elevation_log_gap)
            .map(|(a, b)| format!("{:>9.3}", a - b))
            .collect();
        println!(
            "{:>5} {:>12.5e} {:>12.5e}   {}",
            r.temperature.to_string(),
            r.f,
            r.g,
            ratios.join(" ")
        );
    }
    println!("f >= g on every row: {}", report.f_dominates_g);

    for t in [0.5, 1.0, 2.0] {
        let t = Temperature::new(t)?;
        println!(
            "T={t}: closed-form gap first exceeds the elevation gap at n = {:?}",
            crossover_n(t, 200)
        );
    }

    println!("\nprinted partition-function bound against exact ln Z:");
    for n in [2, 3] {
        let size = LatticeSize::new(n)?;
        for t in [0.5, 1.0, 2.0, 5.0] {
            let t = Temperature::new(t)?;
            let exact = IsingMeasure::new(size, t, 512)?.log_partition_function();
            let printed = printed_partition_log_bound(size, t);
            println!(
                "  n={n} T={t:<4} ln Z = {exact:>9.4}  printed bound {printed:>7.4}  violated: {}",
                exact > printed
            );
        }
    }
    Ok(())
}
