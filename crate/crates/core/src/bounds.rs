//! Geometric constant kappa and every closed-form eigenvalue bound.
//!
//! Gap-type quantities are also available in log form: for cold lattices
//! `n^-4 exp(-(2/T)(2n+1))` underflows long before it stops being meaningful.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{DirectedEdge, TransitionKernel};
use crate::lattice::{
    IsingMeasure, LatticeSize, SiteClass, SiteIndex, SpinConfiguration, Temperature,
};
use crate::paths::EdgeLoadTable;
use crate::sum::CompensatedSum;

/// `max_e Q(e)^-1 load(e)` with its argmax and per-class, per-site maxima.
#[derive(Debug, Clone)]
pub struct KappaResult {
    pub kappa: f64,
    pub argmax: DirectedEdge,
    pub per_class: BTreeMap<SiteClass, f64>,
    /// Maximum ratio over edges flipping each site, by bit position.
    pub per_site: Vec<f64>,
}

/// `Q(e)^-1 sum_{gamma_xy contains e} |gamma_xy| pi(x) pi(y)` for one edge.
pub fn edge_ratio(kernel: &TransitionKernel, loads: &EdgeLoadTable, e: &DirectedEdge) -> f64 {
    loads.load(e) / kernel.edge_flow(e)
}

pub fn kappa_exact(kernel: &TransitionKernel, loads: &EdgeLoadTable) -> KappaResult {
    let size = kernel.size();
    let sites = size.sites() as usize;
    let mut per_site = vec![0.0f64; sites];
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &load) in loads.loads().iter().enumerate() {
        let ratio = load / kernel.edge_flow_index(i);
        let bit = i % sites;
        per_site[bit] = per_site[bit].max(ratio);
        if ratio > best.1 {
            best = (i, ratio);
        }
    }
    let mut per_class = BTreeMap::new();
    for (bit, &r) in per_site.iter().enumerate() {
        let class = SiteIndex::from_linear(size, bit as u32 + 1).class();
        let slot = per_class.entry(class).or_insert(f64::NEG_INFINITY);
        *slot = f64::max(*slot, r);
    }
    KappaResult {
        kappa: best.1,
        argmax: DirectedEdge::from_index(size, best.0),
        per_class,
        per_site,
    }
}

/// `beta_1 <= 1 - 1/kappa`.
pub fn kappa_beta1_bound(kappa: f64) -> Result<f64> {
    if kappa.is_nan() || kappa < 1.0 {
        return Err(Error::KappaBelowOne(kappa));
    }
    Ok(1.0 - 1.0 / kappa)
}

fn n_f64(size: LatticeSize) -> f64 {
    size.side() as f64
}

/// `ln(n^-4 exp(-(2/T)(2n+1)))`.
pub fn closed_form_log_gap(size: LatticeSize, t: Temperature) -> f64 {
    let n = n_f64(size);
    -4.0 * n.ln() - 2.0 * t.beta() * (2.0 * n + 1.0)
}

/// `1 - n^-4 exp(-(2/T)(2n+1))`.
pub fn closed_form_beta1_bound(size: LatticeSize, t: Temperature) -> f64 {
    -closed_form_log_gap(size, t).exp_m1()
}

/// `n^4 exp((2/T)(2n+1))`, the closed-form bound on kappa.
pub fn kappa_upper_bound(size: LatticeSize, t: Temperature) -> f64 {
    (-closed_form_log_gap(size, t)).exp()
}

/// `-1 + 2 / (1 + (c - 1) e^{Delta/T})` with `c = 2`, `Delta = 4`.
pub fn beta_min_bound(t: Temperature) -> f64 {
    -1.0 + 2.0 / (1.0 + (4.0 * t.beta()).exp())
}

/// The bound on `beta*` together with the numeric check of the chain
/// `1 - 2/(1+e^{4/T}) < 1 - e^{-4/T} <= 1 - n^-4 e^{-(2/T)(2n+1)}` it rests on.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaStarBound {
    pub bound: f64,
    pub log_gap: f64,
    /// `|beta_min bound|`.
    pub beta_min_magnitude: f64,
    /// `1 - e^{-4/T}`.
    pub intermediate: f64,
    pub chain_holds: bool,
}

pub fn beta_star_bound(size: LatticeSize, t: Temperature) -> BetaStarBound {
    let bound = closed_form_beta1_bound(size, t);
    let log_gap = closed_form_log_gap(size, t);
    let beta_min_magnitude = beta_min_bound(t).abs();
    let intermediate = -(-4.0 * t.beta()).exp_m1();
    // Compare gaps in the log domain: -4/T >= log_gap.
    let chain_holds = beta_min_magnitude <= intermediate && -4.0 * t.beta() >= log_gap;
    BetaStarBound {
        bound,
        log_gap,
        beta_min_magnitude,
        intermediate,
        chain_holds,
    }
}

/// `ln(n^-4 e^{-4/T} ((1 + e^{-1/(2T)})/2)^{n^2 - 1})`.
pub fn elevation_log_gap(size: LatticeSize, t: Temperature) -> f64 {
    let n = n_f64(size);
    let b = t.beta();
    -4.0 * n.ln() - 4.0 * b + (n * n - 1.0) * ((1.0 + (-0.5 * b).exp()) / 2.0).ln()
}

/// `1 - n^-4 e^{-4/T} ((1 + e^{-1/(2T)})/2)^{n^2 - 1}`.
pub fn elevation_beta1_bound(size: LatticeSize, t: Temperature) -> f64 {
    -elevation_log_gap(size, t).exp_m1()
}

/// `f(T) = e^{4/T}`.
pub fn f_curve(t: Temperature) -> f64 {
    (4.0 * t.beta()).exp()
}

/// `g(T) = 2 / (1 + e^{-1/(2T)})`.
pub fn g_curve(t: Temperature) -> f64 {
    2.0 / (1.0 + (-0.5 * t.beta()).exp())
}

/// One row of the `f` versus `g` comparison, with both gaps per lattice size.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    #[serde(rename = "T")]
    pub temperature: Temperature,
    pub f: f64,
    pub g: f64,
    /// `(n, closed-form gap, elevation gap)`.
    pub gaps: Vec<(u32, f64, f64)>,
}

pub fn comparison_curves(
    grid: &[Temperature],
    sizes: &[LatticeSize],
) -> Result<Vec<ComparisonRow>> {
    if grid.is_empty() {
        return Err(Error::Usage("temperature grid is empty".into()));
    }
    Ok(grid
        .iter()
        .map(|&t| ComparisonRow {
            temperature: t,
            f: f_curve(t),
            g: g_curve(t),
            gaps: sizes
                .iter()
                .map(|&s| {
                    (
                        s.side(),
                        closed_form_log_gap(s, t).exp(),
                        elevation_log_gap(s, t).exp(),
                    )
                })
                .collect(),
        })
        .collect())
}

/// Smallest `n <= n_max` where the closed-form gap exceeds the elevation gap, compared in logs.
pub fn crossover_n(t: Temperature, n_max: u32) -> Option<u32> {
    (1..=n_max).find(|&n| {
        let s = LatticeSize::new(n).expect("n >= 1");
        closed_form_log_gap(s, t) > elevation_log_gap(s, t)
    })
}

/// `ln(2 (1 + e^{-1/(2T)})^{n^2 - 1})`, the printed partition-function bound.
pub fn printed_partition_log_bound(size: LatticeSize, t: Temperature) -> f64 {
    let n = n_f64(size);
    std::f64::consts::LN_2 + (n * n - 1.0) * (1.0 + (-0.5 * t.beta()).exp()).ln()
}

/// Which of the four edge-class bounds governs a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EdgeBoundCase {
    /// `(1,1)` and `(n,n)`: closed form.
    #[serde(rename = "corner")]
    Corner,
    /// `(n,1)` and `(1,n)`: single w-sum.
    #[serde(rename = "off-corner")]
    OffCorner,
    /// Boundary, not a corner: two w-sums.
    #[serde(rename = "boundary")]
    Boundary,
    /// Interior: single w-sum.
    #[serde(rename = "interior")]
    Interior,
}

impl EdgeBoundCase {
    pub fn of(class: SiteClass) -> Self {
        match class {
            SiteClass::Corner11 | SiteClass::CornerNN => Self::Corner,
            SiteClass::CornerN1 | SiteClass::Corner1N => Self::OffCorner,
            SiteClass::Interior => Self::Interior,
            _ => Self::Boundary,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Corner => "corner",
            Self::OffCorner => "off-corner",
            Self::Boundary => "boundary",
            Self::Interior => "interior",
        }
    }
}

/// Spin reader over `(column, row)` for the bracket formulas.
struct Spins<'a>(&'a SpinConfiguration);

impl Spins<'_> {
    #[inline]
    fn at(&self, p: u32, q: u32) -> i32 {
        let n = self.0.size().side();
        self.0.spin_bit((q - 1) * n + p - 1) as i32
    }
}

/// `sum_{i=lo}^{hi} (w(i,r) - w(i,r+1) - w(i,r) w(i,r+1))` with `r = top`.
fn lower_bond_terms(w: &Spins<'_>, lo: u32, hi: u32, top: u32) -> i32 {
    (lo..=hi)
        .map(|i| {
            let (a, b) = (w.at(i, top), w.at(i, top + 1));
            a - b - a * b
        })
        .sum()
}

/// `sum_{i=lo}^{hi} (-w(i,q) + w(i,q+1) - w(i,q) w(i,q+1))`.
fn upper_bond_terms(w: &Spins<'_>, lo: u32, hi: u32, q: u32) -> i32 {
    (lo..=hi)
        .map(|i| {
            let (a, b) = (w.at(i, q), w.at(i, q + 1));
            -a + b - a * b
        })
        .sum()
}

/// Bracket for the corner `(n, 1)`: `2(1 - w(n,2)) + sum_{i<n} (w(i,1) - w(i,2) - w(i,1)w(i,2))`.
pub fn bracket_off_corner(w: &SpinConfiguration) -> i32 {
    let s = Spins(w);
    let n = w.size().side();
    2 * (1 - s.at(n, 2)) + lower_bond_terms(&s, 1, n - 1, 1)
}

/// Left-column site `(1, q)`, `w(1,q) = +1` branch:
/// `-2(w(2,q) + w(1,q+1)) + sum_{i>=2} (w(i,q-1) - w(i,q) - w(i,q-1)w(i,q))`.
pub fn bracket_column_plus(w: &SpinConfiguration, q: u32) -> i32 {
    let s = Spins(w);
    let n = w.size().side();
    -2 * (s.at(2, q) + s.at(1, q + 1)) + lower_bond_terms(&s, 2, n, q - 1)
}

/// Left-column site `(1, q)`, `w(1,q) = -1` branch:
/// `2(1 + w(1,q-1)) + sum_{i>=2} (w(i,q-1) - w(i,q) - w(i,q-1)w(i,q))`.
pub fn bracket_column_minus(w: &SpinConfiguration, q: u32) -> i32 {
    let s = Spins(w);
    let n = w.size().side();
    2 * (1 + s.at(1, q - 1)) + lower_bond_terms(&s, 2, n, q - 1)
}

/// Top-row site `(p, 1)`, `+1` branch:
/// `-2(w(p+1,1) + w(p,2)) + sum_{i<n} (w(i,1) - w(i,2) - w(i,1)w(i,2))`.
pub fn bracket_row_plus(w: &SpinConfiguration, p: u32) -> i32 {
    let s = Spins(w);
    let n = w.size().side();
    -2 * (s.at(p + 1, 1) + s.at(p, 2)) + lower_bond_terms(&s, 1, n - 1, 1)
}

/// Top-row site `(p, 1)`, `-1` branch: `2(1 + w(p-1,1)) + sum_{i<n} (...)`.
pub fn bracket_row_minus(w: &SpinConfiguration, p: u32) -> i32 {
    let s = Spins(w);
    let n = w.size().side();
    2 * (1 + s.at(p - 1, 1)) + lower_bond_terms(&s, 1, n - 1, 1)
}

/// Interior site `(p, q)`:
/// `sum_{i<p} (-w(i,q) + w(i,q+1) - w(i,q)w(i,q+1)) - 2(w(p+1,q) + w(p,q+1))
///  + sum_{i>p} (w(i,q-1) - w(i,q) - w(i,q-1)w(i,q))`.
pub fn bracket_interior(w: &SpinConfiguration, p: u32, q: u32) -> i32 {
    let s = Spins(w);
    let n = w.size().side();
    upper_bond_terms(&s, 1, p - 1, q) - 2 * (s.at(p + 1, q) + s.at(p, q + 1))
        + lower_bond_terms(&s, p + 1, n, q - 1)
}

/// `sum_{w : w_site = sign} pi(w) exp((offset + bracket(w)) / T)`.
fn weighted_sum<F>(
    measure: &IsingMeasure,
    site: SiteIndex,
    sign: i8,
    offset: f64,
    bracket: F,
) -> f64
where
    F: Fn(&SpinConfiguration) -> i32,
{
    let beta = measure.temperature().beta();
    let pi = measure.pi();
    let mut acc = CompensatedSum::new();
    for w in measure.configurations() {
        if w.spin(site) == sign {
            acc.add(pi[w.index() as usize] * (beta * (offset + bracket(&w) as f64)).exp());
        }
    }
    acc.value()
}

/// Right-hand side of the edge-class bound for edges flipping `site`.
///
/// Sites without a displayed formula of their own (`(1,n)`, `(n,n)`, the right
/// column and the bottom row) take the value of their 180 degree rotation
/// image: the rotation reverses canonical paths and preserves `pi` and `Q`, so
/// the per-edge ratios of the two sites coincide.
pub fn class_edge_bound(measure: &IsingMeasure, site: SiteIndex) -> f64 {
    let n = site.size().side();
    let nf = n as f64;
    let n4 = nf.powi(4);
    let beta = measure.temperature().beta();
    let class = site.class();
    let rep = match class {
        SiteClass::Corner1N | SiteClass::BoundaryColN | SiteClass::BoundaryRowN => site.rotated(),
        _ => site,
    };
    match EdgeBoundCase::of(class) {
        EdgeBoundCase::Corner => n4 / 2.0 * (1.0 + (4.0 * beta).exp()),
        EdgeBoundCase::OffCorner => {
            2.0 * n4 * weighted_sum(measure, rep, 1, nf - 1.0, bracket_off_corner)
        }
        EdgeBoundCase::Boundary => {
            let (plus, minus) = if rep.class() == SiteClass::BoundaryCol1 {
                let q = rep.q();
                (
                    weighted_sum(measure, rep, 1, nf + 1.0, |w| bracket_column_plus(w, q)),
                    weighted_sum(measure, rep, -1, nf + 1.0, |w| bracket_column_minus(w, q)),
                )
            } else {
                let p = rep.p();
                (
                    weighted_sum(measure, rep, 1, nf + 1.0, |w| bracket_row_plus(w, p)),
                    weighted_sum(measure, rep, -1, nf + 1.0, |w| bracket_row_minus(w, p)),
                )
            };
            n4 * (plus + minus)
        }
        EdgeBoundCase::Interior => {
            let (p, q) = (rep.p(), rep.q());
            2.0 * n4 * weighted_sum(measure, rep, 1, nf - 1.0, |w| bracket_interior(w, p, q))
        }
    }
}

/// Exact worst ratio against the class bound for one site.
#[derive(Debug, Clone, Serialize)]
pub struct ClassBoundCheck {
    pub p: u32,
    pub q: u32,
    pub class: SiteClass,
    pub case: EdgeBoundCase,
    pub rhs: f64,
    pub max_ratio: f64,
    /// `(rhs - max_ratio) / rhs`.
    pub relative_margin: f64,
}

/// Class bound and exact maximum ratio for every site.
pub fn class_edge_bound_checks(
    measure: &IsingMeasure,
    kappa: &KappaResult,
) -> Vec<ClassBoundCheck> {
    measure
        .size()
        .site_indices()
        .map(|site| {
            let rhs = class_edge_bound(measure, site);
            let max_ratio = kappa.per_site[site.bit() as usize];
            ClassBoundCheck {
                p: site.p(),
                q: site.q(),
                class: site.class(),
                case: EdgeBoundCase::of(site.class()),
                rhs,
                max_ratio,
                relative_margin: (rhs - max_ratio) / rhs,
            }
        })
        .collect()
}
