//! Canonical paths: one path spelled out, then the per-edge loads and
//! traversal counts that feed the geometric constant.
//!
//! cargo run --example paths -- [n] [T]

use isinggap::paths::{accumulate_edge_loads, squared_length_mass};
use isinggap::{canonical_path, LatticeSize, SpinConfiguration, Temperature, TransitionKernel};

fn main() -> isinggap::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u32 = args
        .next()
        .map_or(Ok(2), |s| s.parse())
        .expect("n must be an integer");
    let t: Temperature = args.next().as_deref().unwrap_or("1").parse()?;
    let size = LatticeSize::new(n)?;

    let x = SpinConfiguration::all_up(size)?;
    let y = x.global_flip();
    let path = canonical_path(&x, &y)?;
    println!("path from all-up to all-down, {} steps:", path.len());
    for (i, (v, s)) in path.vertices().iter().zip(path.flipped_sites()).enumerate() {
        println!("step {i}: flip ({},{})\n{v}", s.p(), s.q());
    }
    println!("end\n{}", path.to());

    let kernel = TransitionKernel::build(size, t, 1 << 16)?;
    let loads = accumulate_edge_loads(&kernel)?;
    let counts = loads.counts();
    println!(
        "every directed edge carried by {}..={} paths (2^(n^2-1) = {})",
        counts.iter().min().unwrap(),
        counts.iter().max().unwrap(),
        1u64 << (size.sites() - 1)
    );
    println!("total load {:.12}", loads.total_load());
    println!(
        "sum d(x,y)^2 pi(x) pi(y) = {:.12}",
        squared_length_mass(&kernel)?
    );
    Ok(())
}
