//! Canonical paths and per-edge congestion loads.
//!
//! The path from `x` to `y` flips the differing sites one at a time in
//! increasing scan order. An edge `(e-, site k)` therefore carries exactly
//! the pairs whose `x` agrees with `e-` on sites `>= k` and whose `y`
//! agrees with `e+` on sites `<= k`; the remaining `n^2 - 1` spins are free.

use std::io::Write;

use rayon::prelude::*;

use crate::error::Result;
use crate::kernel::{DirectedEdge, TransitionKernel};
use crate::lattice::{
    hamming_distance, LatticeSize, SiteIndex, SpinConfiguration, DENSE_MAX_STATES,
};
use crate::sum::CompensatedSum;

/// The path `x = v_0 -> v_1 -> ... -> v_m = y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalPath {
    from: SpinConfiguration,
    to: SpinConfiguration,
    flips: Vec<SiteIndex>,
}

impl CanonicalPath {
    pub fn from(&self) -> SpinConfiguration {
        self.from
    }

    pub fn to(&self) -> SpinConfiguration {
        self.to
    }

    /// Number of transitions, `|gamma_xy|`.
    pub fn len(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    /// Sites flipped, in order.
    pub fn flipped_sites(&self) -> &[SiteIndex] {
        &self.flips
    }

    pub fn vertices(&self) -> Vec<SpinConfiguration> {
        let mut out = Vec::with_capacity(self.flips.len() + 1);
        let mut cur = self.from;
        out.push(cur);
        for &s in &self.flips {
            cur = cur.flipped(s);
            out.push(cur);
        }
        out
    }

    pub fn edges(&self) -> Vec<DirectedEdge> {
        let mut cur = self.from;
        self.flips
            .iter()
            .map(|&s| {
                let e = DirectedEdge::new(cur, s).expect("same lattice");
                cur = cur.flipped(s);
                e
            })
            .collect()
    }
}

pub fn canonical_path(x: &SpinConfiguration, y: &SpinConfiguration) -> Result<CanonicalPath> {
    hamming_distance(x, y)?;
    let size = x.size();
    let diff = x.index() ^ y.index();
    let flips = (0..size.sites())
        .filter(|b| diff >> b & 1 == 1)
        .map(|b| SiteIndex::from_linear(size, b + 1))
        .collect();
    Ok(CanonicalPath {
        from: *x,
        to: *y,
        flips,
    })
}

/// Low/high masks around bit `b`: sites before it and sites after it.
fn split_masks(size: LatticeSize, bit: u32) -> (u64, u64) {
    let below = (1u64 << bit) - 1;
    let all = if size.sites() == 64 {
        u64::MAX
    } else {
        (1u64 << size.sites()) - 1
    };
    let above = all & !below & !(1u64 << bit);
    (below, above)
}

/// All ordered pairs `(x, y)` whose canonical path uses `e`, as packed indices.
fn pair_indices(e: &DirectedEdge) -> impl Iterator<Item = (u64, u64)> {
    let size = e.site().size();
    let bit = e.site().bit();
    let (below, above) = split_masks(size, bit);
    let z_minus = e.minus().index();
    let z_plus = e.plus().index();
    let x_fixed = z_minus & !below;
    let y_fixed = z_plus & !above;
    let free_high = size.sites() - bit - 1;
    (0..1u64 << bit).flat_map(move |a| {
        let x = x_fixed | a;
        (0..1u64 << free_high).map(move |b| (x, y_fixed | (b << (bit + 1))))
    })
}

/// Ordered pairs whose canonical path traverses `e`; `2^(n^2 - 1)` of them.
pub fn pairs_through_edge(
    e: &DirectedEdge,
) -> Result<impl Iterator<Item = (SpinConfiguration, SpinConfiguration)>> {
    let size = e.site().size();
    size.check_enumerable(DENSE_MAX_STATES)?;
    Ok(pair_indices(e).map(move |(x, y)| {
        (
            SpinConfiguration::from_bits_unchecked(size, x),
            SpinConfiguration::from_bits_unchecked(size, y),
        )
    }))
}

/// Per directed edge: `sum_{gamma_xy contains e} |gamma_xy| pi(x) pi(y)` and the number of such paths.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLoadTable {
    size: LatticeSize,
    loads: Vec<f64>,
    counts: Vec<u64>,
}

impl EdgeLoadTable {
    pub fn size(&self) -> LatticeSize {
        self.size
    }

    pub fn load(&self, e: &DirectedEdge) -> f64 {
        self.loads[e.index()]
    }

    pub fn count(&self, e: &DirectedEdge) -> u64 {
        self.counts[e.index()]
    }

    /// Loads by dense edge index.
    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_load(&self) -> f64 {
        self.loads
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }

    /// Largest relative difference between two tables' loads, and whether counts agree.
    pub fn compare(&self, other: &EdgeLoadTable) -> (f64, bool) {
        let worst = self
            .loads
            .iter()
            .zip(&other.loads)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        (worst, self.counts == other.counts)
    }

    /// `edge_state,site,load,traversals`, one line per directed edge.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "edge_state,site,load,traversals")?;
        let sites = self.size.sites() as usize;
        for (i, (load, count)) in self.loads.iter().zip(&self.counts).enumerate() {
            writeln!(
                out,
                "{},{},{:.16e},{}",
                i / sites,
                i % sites + 1,
                load,
                count
            )?;
        }
        Ok(())
    }
}

fn check_dense(kernel: &TransitionKernel) -> Result<()> {
    kernel.size().check_enumerable(DENSE_MAX_STATES).map(|_| ())
}

/// Edge loads by enumerating, for each edge, the pairs routed through it.
pub fn accumulate_edge_loads(kernel: &TransitionKernel) -> Result<EdgeLoadTable> {
    check_dense(kernel)?;
    let size = kernel.size();
    let pi = kernel.pi();
    let per_edge: Vec<(f64, u64)> = (0..kernel.num_edges())
        .into_par_iter()
        .map(|i| {
            let e = DirectedEdge::from_index(size, i);
            let mut acc = CompensatedSum::new();
            let mut count = 0u64;
            for (x, y) in pair_indices(&e) {
                let m = (x ^ y).count_ones() as f64;
                acc.add(m * pi[x as usize] * pi[y as usize]);
                count += 1;
            }
            (acc.value(), count)
        })
        .collect();
    let (loads, counts) = per_edge.into_iter().unzip();
    Ok(EdgeLoadTable {
        size,
        loads,
        counts,
    })
}

/// Edge loads by walking every ordered pair's path and charging each edge it uses.
pub fn accumulate_edge_loads_by_walking(kernel: &TransitionKernel) -> Result<EdgeLoadTable> {
    check_dense(kernel)?;
    let size = kernel.size();
    let sites = size.sites() as usize;
    let pi = kernel.pi();
    let states = kernel.num_states();
    let mut sums = vec![CompensatedSum::new(); kernel.num_edges()];
    let mut counts = vec![0u64; kernel.num_edges()];
    for x in 0..states {
        for y in 0..states {
            let x_cfg = SpinConfiguration::from_bits_unchecked(size, x as u64);
            let y_cfg = SpinConfiguration::from_bits_unchecked(size, y as u64);
            let path = canonical_path(&x_cfg, &y_cfg)?;
            let weight = path.len() as f64 * pi[x] * pi[y];
            for e in path.edges() {
                let i = e.index();
                sums[i].add(weight);
                counts[i] += 1;
            }
        }
    }
    debug_assert_eq!(sums.len(), states * sites);
    Ok(EdgeLoadTable {
        size,
        loads: sums.iter().map(CompensatedSum::value).collect(),
        counts,
    })
}

/// `sum_{(x, y)} d(x, y)^2 pi(x) pi(y)`: what the edge loads must total.
pub fn squared_length_mass(kernel: &TransitionKernel) -> Result<f64> {
    check_dense(kernel)?;
    let pi = kernel.pi();
    let mut acc = CompensatedSum::new();
    for (x, px) in pi.iter().enumerate() {
        for (y, py) in pi.iter().enumerate() {
            let m = (x ^ y).count_ones() as f64;
            acc.add(m * m * px * py);
        }
    }
    Ok(acc.value())
}
