//! Exact random-scan Gibbs sampler kernel and its single-flip closed forms.

use std::collections::VecDeque;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{
    conditional_flip_probability, enumeration_ceiling, logistic_flip, IsingMeasure, LatticeSize,
    SiteClass, SiteIndex, SpinConfiguration, Temperature,
};
use crate::sum::CompensatedSum;

/// A transition `e- -> e+` that flips the spin at `site`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedEdge {
    minus: SpinConfiguration,
    site: SiteIndex,
}

impl DirectedEdge {
    pub fn new(minus: SpinConfiguration, site: SiteIndex) -> Result<Self> {
        if minus.size() != site.size() {
            return Err(Error::SizeMismatch {
                left: minus.size().side(),
                right: site.size().side(),
            });
        }
        Ok(Self { minus, site })
    }

    /// Edge with dense index `state * n^2 + bit`.
    pub fn from_index(size: LatticeSize, index: usize) -> Self {
        let sites = size.sites() as usize;
        let minus = SpinConfiguration::from_bits_unchecked(size, (index / sites) as u64);
        let site = SiteIndex::from_linear(size, (index % sites) as u32 + 1);
        Self { minus, site }
    }

    pub fn minus(&self) -> SpinConfiguration {
        self.minus
    }

    pub fn plus(&self) -> SpinConfiguration {
        self.minus.flipped(self.site)
    }

    pub fn site(&self) -> SiteIndex {
        self.site
    }

    /// Dense index `state * n^2 + bit`.
    pub fn index(&self) -> usize {
        self.minus.index() as usize * self.site.size().sites() as usize + self.site.bit() as usize
    }

    pub fn reversed(&self) -> Self {
        Self {
            minus: self.plus(),
            site: self.site,
        }
    }
}

/// The Gibbs sampler `P(x, y)` on the full state space, stored as sparse rows.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    measure: IsingMeasure,
    /// `flips[x * n^2 + bit] = P(x, x with that bit flipped)`.
    flips: Vec<f64>,
    holding: Vec<f64>,
}

impl TransitionKernel {
    pub fn build(size: LatticeSize, t: Temperature, ceiling: u64) -> Result<Self> {
        let measure = IsingMeasure::new(size, t, ceiling)?;
        let sites: Vec<SiteIndex> = size.site_indices().collect();
        let scale = 1.0 / size.sites() as f64;
        let mut flips = Vec::with_capacity(measure.num_states() * sites.len());
        let mut holding = Vec::with_capacity(measure.num_states());
        for x in measure.configurations() {
            let mut out = CompensatedSum::new();
            for &s in &sites {
                let p = scale * conditional_flip_probability(&x, s, t);
                out.add(p);
                flips.push(p);
            }
            holding.push(1.0 - out.value());
        }
        Ok(Self {
            measure,
            flips,
            holding,
        })
    }

    pub fn size(&self) -> LatticeSize {
        self.measure.size()
    }

    pub fn temperature(&self) -> Temperature {
        self.measure.temperature()
    }

    pub fn measure(&self) -> &IsingMeasure {
        &self.measure
    }

    pub fn pi(&self) -> &[f64] {
        self.measure.pi()
    }

    pub fn num_states(&self) -> usize {
        self.holding.len()
    }

    pub fn num_edges(&self) -> usize {
        self.flips.len()
    }

    fn sites(&self) -> usize {
        self.size().sites() as usize
    }

    #[inline]
    pub fn flip_probability(&self, state: usize, bit: u32) -> f64 {
        self.flips[state * self.sites() + bit as usize]
    }

    /// `P(e-, e+)` for an edge given by dense index.
    #[inline]
    pub fn edge_probability(&self, edge_index: usize) -> f64 {
        self.flips[edge_index]
    }

    pub fn holding_probability(&self, state: usize) -> f64 {
        self.holding[state]
    }

    /// `P(x, y)` for packed state indices.
    pub fn entry(&self, x: usize, y: usize) -> f64 {
        let diff = x ^ y;
        match diff.count_ones() {
            0 => self.holding[x],
            1 => self.flip_probability(x, diff.trailing_zeros()),
            _ => 0.0,
        }
    }

    /// Nonzero entries of row `x`, ascending in column.
    pub fn row(&self, x: usize) -> Vec<(usize, f64)> {
        let mut row: Vec<(usize, f64)> = (0..self.sites())
            .map(|b| (x ^ (1 << b), self.flip_probability(x, b as u32)))
            .filter(|&(_, p)| p > 0.0)
            .collect();
        row.push((x, self.holding[x]));
        row.sort_by_key(|&(y, _)| y);
        row
    }

    /// Row vector times kernel: `(v P)(y) = sum_x v(x) P(x, y)`.
    pub fn apply_left(&self, v: &[f64]) -> Vec<f64> {
        let sites = self.sites();
        (0..self.num_states())
            .map(|y| {
                let mut acc = self.holding[y] * v[y];
                for b in 0..sites {
                    let x = y ^ (1 << b);
                    acc += v[x] * self.flips[x * sites + b];
                }
                acc
            })
            .collect()
    }

    /// `Q(e) = pi(e-) P(e-, e+)`.
    pub fn edge_flow(&self, e: &DirectedEdge) -> f64 {
        self.edge_flow_index(e.index())
    }

    pub(crate) fn edge_flow_index(&self, edge_index: usize) -> f64 {
        self.pi()[edge_index / self.sites()] * self.flips[edge_index]
    }

    /// Largest `|1 - sum_y P(x, y)|` and smallest entry over the whole kernel.
    pub fn row_sum_error(&self) -> (f64, f64) {
        let sites = self.sites();
        let mut worst = 0.0f64;
        let mut min_entry = f64::INFINITY;
        for x in 0..self.num_states() {
            let row = &self.flips[x * sites..(x + 1) * sites];
            let mut acc: CompensatedSum = row.iter().copied().collect();
            acc.add(self.holding[x]);
            worst = worst.max((acc.value() - 1.0).abs());
            min_entry = row
                .iter()
                .copied()
                .fold(min_entry, f64::min)
                .min(self.holding[x]);
        }
        (worst, min_entry)
    }

    /// `max |pi(x)P(x,y) - pi(y)P(y,x)| / Q(x,y)` over all single-flip pairs.
    pub fn detailed_balance_error(&self) -> f64 {
        let sites = self.sites();
        let pi = self.pi();
        let mut worst = 0.0f64;
        for x in 0..self.num_states() {
            for b in 0..sites {
                let y = x ^ (1 << b);
                let forward = pi[x] * self.flips[x * sites + b];
                let backward = pi[y] * self.flips[y * sites + b];
                worst = worst.max((forward - backward).abs() / forward);
            }
        }
        worst
    }

    /// Whether every state is reachable from state 0 along positive-probability flips.
    pub fn is_irreducible(&self) -> bool {
        let sites = self.sites();
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for b in 0..sites {
                let y = x ^ (1 << b);
                if !seen[y] && self.flips[x * sites + b] > 0.0 {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn min_holding_probability(&self) -> f64 {
        self.holding.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn trace(&self) -> f64 {
        self.holding.iter().sum()
    }

    /// Header written next to a CSV kernel dump.
    pub fn dump_header(&self) -> KernelHeader {
        KernelHeader {
            schema: 1,
            n: self.size().side(),
            temperature: self.temperature(),
            partition_function: self.measure.partition_function(),
            log_partition_function: self.measure.log_partition_function(),
            states: self.num_states(),
        }
    }

    /// `x,y,probability` for every nonzero entry, rows ascending.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,probability")?;
        for x in 0..self.num_states() {
            for (y, p) in self.row(x) {
                writeln!(out, "{x},{y},{p:.16e}")?;
            }
        }
        Ok(())
    }
}

/// JSON header accompanying a kernel CSV dump.
#[derive(Debug, Clone, Serialize)]
pub struct KernelHeader {
    pub schema: u32,
    pub n: u32,
    #[serde(rename = "T")]
    pub temperature: Temperature,
    #[serde(rename = "Z")]
    pub partition_function: f64,
    pub log_partition_function: f64,
    pub states: usize,
}

/// Builds the kernel under the configured enumeration ceiling.
pub fn build_kernel(size: LatticeSize, t: Temperature) -> Result<TransitionKernel> {
    TransitionKernel::build(size, t, enumeration_ceiling())
}

pub fn edge_flow(kernel: &TransitionKernel, e: &DirectedEdge) -> f64 {
    kernel.edge_flow(e)
}

/// Every directed edge `(x, site)` in dense-index order.
pub fn enumerate_directed_edges(
    size: LatticeSize,
    ceiling: u64,
) -> Result<impl Iterator<Item = DirectedEdge>> {
    let states = size.check_enumerable(ceiling)? as usize;
    let total = states * size.sites() as usize;
    Ok((0..total).map(move |i| DirectedEdge::from_index(size, i)))
}

/// Maps between a site's own coordinates and the canonical representative of its class.
#[derive(Debug, Clone, Copy)]
enum Reflection {
    Identity,
    MirrorP,
    MirrorQ,
    MirrorBoth,
    Transpose,
    /// `(p, q) -> (q, n + 1 - p)`: right column onto the top row.
    TransposeMirror,
}

impl Reflection {
    fn for_class(class: SiteClass) -> Self {
        match class {
            SiteClass::Corner11 | SiteClass::BoundaryRow1 | SiteClass::Interior => Self::Identity,
            SiteClass::CornerN1 => Self::MirrorP,
            SiteClass::Corner1N | SiteClass::BoundaryRowN => Self::MirrorQ,
            SiteClass::CornerNN => Self::MirrorBoth,
            SiteClass::BoundaryCol1 => Self::Transpose,
            SiteClass::BoundaryColN => Self::TransposeMirror,
        }
    }

    fn forward(self, n: i64, (p, q): (i64, i64)) -> (i64, i64) {
        match self {
            Self::Identity => (p, q),
            Self::MirrorP => (n + 1 - p, q),
            Self::MirrorQ => (p, n + 1 - q),
            Self::MirrorBoth => (n + 1 - p, n + 1 - q),
            Self::Transpose => (q, p),
            Self::TransposeMirror => (q, n + 1 - p),
        }
    }

    fn inverse(self, n: i64, (a, b): (i64, i64)) -> (i64, i64) {
        match self {
            Self::TransposeMirror => (n + 1 - b, a),
            other => other.forward(n, (a, b)),
        }
    }
}

/// Neighbour offsets of the representative site of each class: the interior
/// site, the top-row site and the `(1, 1)` corner.
fn representative_offsets(class: SiteClass) -> &'static [(i64, i64)] {
    match class {
        SiteClass::Interior => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
        SiteClass::BoundaryRow1
        | SiteClass::BoundaryRowN
        | SiteClass::BoundaryCol1
        | SiteClass::BoundaryColN => &[(-1, 0), (1, 0), (0, 1)],
        SiteClass::Corner11 | SiteClass::Corner1N | SiteClass::CornerN1 | SiteClass::CornerNN => {
            &[(1, 0), (0, 1)]
        }
    }
}

/// Class-by-class closed form `1 / (n^2 (1 + exp((2/T) sum of bond terms)))`.
///
/// Each class is evaluated through its canonical representative (interior,
/// top row, top-left corner) after reflecting the lattice.
pub fn closed_form_flip_probability(e: &DirectedEdge, t: Temperature) -> f64 {
    let site = e.site();
    let size = site.size();
    let n = size.side() as i64;
    let n2 = size.sites() as f64;
    if n == 1 {
        return logistic_flip(0.0) / n2;
    }
    let z = e.minus();
    let class = site.class();
    let reflection = Reflection::for_class(class);
    let (a0, b0) = reflection.forward(n, (site.p() as i64, site.q() as i64));
    let centre = z.spin(site) as i32;
    let bonds: i32 = representative_offsets(class)
        .iter()
        .map(|&(da, db)| {
            let (p, q) = reflection.inverse(n, (a0 + da, b0 + db));
            let neighbour = SiteIndex::new(size, p as u32, q as u32)
                .expect("representative offsets stay inside the lattice");
            centre * z.spin(neighbour) as i32
        })
        .sum();
    logistic_flip(2.0 * t.beta() * bonds as f64) / n2
}
