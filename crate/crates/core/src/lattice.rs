//! Lattice geometry, spin configurations and the free-boundary Ising measure.
//!
//! Sites are addressed by `(p, q)` with `p` the column and `q` the row, both
//! 1-based. The scan order used everywhere (state encoding, canonical paths)
//! is row-major in `q`: site `(p, q)` has linear index `k = (q - 1) n + p`
//! and occupies bit `k - 1` of a configuration's state index. A set bit is
//! spin `+1`, a clear bit is spin `-1`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sum::compensated_sum;

/// Default ceiling on `2^(n^2)` for operations that enumerate every state.
pub const DEFAULT_MAX_STATES: u64 = 1 << 16;

/// Ceiling for dense work: exact kappa, dense spectra, path-law checks.
pub const DENSE_MAX_STATES: u64 = 1 << 9;

/// Environment variable overriding [`DEFAULT_MAX_STATES`].
pub const MAX_STATES_ENV: &str = "ISINGGAP_MAX_STATES";

/// Largest side length a bit-packed configuration can hold.
pub const MAX_CONFIG_SIDE: u32 = 8;

/// Enumeration ceiling, honouring [`MAX_STATES_ENV`] when it parses.
pub fn enumeration_ceiling() -> u64 {
    std::env::var(MAX_STATES_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_MAX_STATES)
}

/// Side length `n` of the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct LatticeSize(u32);

impl LatticeSize {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(n));
        }
        Ok(Self(n))
    }

    pub fn side(self) -> u32 {
        self.0
    }

    /// Number of sites, `n^2`.
    pub fn sites(self) -> u32 {
        self.0 * self.0
    }

    /// `2^(n^2)`, or `None` when it does not fit in a `u64`.
    pub fn num_states(self) -> Option<u64> {
        let s = self.sites();
        (s < 64).then(|| 1u64 << s)
    }

    /// Returns the number of states if `2^(n^2) <= ceiling`.
    pub fn check_enumerable(self, ceiling: u64) -> Result<u64> {
        match self.num_states() {
            Some(count) if count <= ceiling && self.0 <= MAX_CONFIG_SIDE => Ok(count),
            _ => Err(Error::LatticeTooLarge {
                n: self.0,
                sites: self.sites(),
                ceiling,
            }),
        }
    }

    pub fn site(self, p: u32, q: u32) -> Result<SiteIndex> {
        SiteIndex::new(self, p, q)
    }

    /// All sites in scan order.
    pub fn site_indices(self) -> impl Iterator<Item = SiteIndex> {
        (1..=self.sites()).map(move |k| SiteIndex::from_linear(self, k))
    }

    /// Every configuration, in state-index order.
    pub fn configurations(self, ceiling: u64) -> Result<impl Iterator<Item = SpinConfiguration>> {
        let count = self.check_enumerable(ceiling)?;
        Ok((0..count).map(move |bits| SpinConfiguration { size: self, bits }))
    }

    /// Bit mask of sites `(p, q)` with `p < n` (left end of a horizontal bond).
    fn horizontal_mask(self) -> u64 {
        let n = self.0;
        let mut mask = 0u64;
        for q in 1..=n {
            for p in 1..n {
                mask |= 1 << ((q - 1) * n + p - 1);
            }
        }
        mask
    }

    /// Bit mask of sites `(p, q)` with `q < n` (top end of a vertical bond).
    fn vertical_mask(self) -> u64 {
        let n = self.0;
        if n == 1 {
            return 0;
        }
        (1u64 << (n * (n - 1))) - 1
    }

    /// Total number of nearest-neighbour bonds, `2 n (n - 1)`.
    pub fn bonds(self) -> u32 {
        2 * self.0 * (self.0 - 1)
    }
}

impl fmt::Display for LatticeSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Temperature, stored as the inverse temperature so that `T = inf` is exact.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature {
    beta: f64,
}

impl Temperature {
    pub fn new(t: f64) -> Result<Self> {
        if t == f64::INFINITY {
            return Ok(Self::infinite());
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidTemperature(t));
        }
        Ok(Self { beta: 1.0 / t })
    }

    pub fn infinite() -> Self {
        Self { beta: 0.0 }
    }

    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidTemperature(1.0 / beta));
        }
        Ok(Self { beta })
    }

    /// Inverse temperature `1/T`; zero at infinite temperature.
    pub fn beta(self) -> f64 {
        self.beta
    }

    /// `T`, or `f64::INFINITY`.
    pub fn value(self) -> f64 {
        if self.beta == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.beta
        }
    }

    pub fn is_infinite(self) -> bool {
        self.beta == 0.0
    }
}

impl FromStr for Temperature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Self::infinite()),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("cannot parse temperature '{s}'")))
                .and_then(Self::new),
        }
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.value())
        }
    }
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.value())
        }
    }
}

/// Position category of a site; decides which single-flip closed form applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SiteClass {
    #[serde(rename = "corner-11")]
    Corner11,
    #[serde(rename = "corner-1n")]
    Corner1N,
    #[serde(rename = "corner-n1")]
    CornerN1,
    #[serde(rename = "corner-nn")]
    CornerNN,
    #[serde(rename = "boundary-row1")]
    BoundaryRow1,
    #[serde(rename = "boundary-rown")]
    BoundaryRowN,
    #[serde(rename = "boundary-col1")]
    BoundaryCol1,
    #[serde(rename = "boundary-coln")]
    BoundaryColN,
    #[serde(rename = "interior")]
    Interior,
}

impl SiteClass {
    pub const ALL: [SiteClass; 9] = [
        SiteClass::Corner11,
        SiteClass::Corner1N,
        SiteClass::CornerN1,
        SiteClass::CornerNN,
        SiteClass::BoundaryRow1,
        SiteClass::BoundaryRowN,
        SiteClass::BoundaryCol1,
        SiteClass::BoundaryColN,
        SiteClass::Interior,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SiteClass::Corner11 => "corner-11",
            SiteClass::Corner1N => "corner-1n",
            SiteClass::CornerN1 => "corner-n1",
            SiteClass::CornerNN => "corner-nn",
            SiteClass::BoundaryRow1 => "boundary-row1",
            SiteClass::BoundaryRowN => "boundary-rown",
            SiteClass::BoundaryCol1 => "boundary-col1",
            SiteClass::BoundaryColN => "boundary-coln",
            SiteClass::Interior => "interior",
        }
    }
}

impl fmt::Display for SiteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A lattice site `(p, q)`: column `p`, row `q`, both in `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteIndex {
    n: u32,
    p: u32,
    q: u32,
}

impl SiteIndex {
    pub fn new(size: LatticeSize, p: u32, q: u32) -> Result<Self> {
        let n = size.side();
        if !(1..=n).contains(&p) || !(1..=n).contains(&q) {
            return Err(Error::SiteOutOfRange { p, q, n });
        }
        Ok(Self { n, p, q })
    }

    /// Site with 1-based linear index `k = (q - 1) n + p`.
    ///
    /// Panics if `k` is outside `1..=n^2`.
    pub fn from_linear(size: LatticeSize, k: u32) -> Self {
        let n = size.side();
        assert!((1..=n * n).contains(&k), "linear index {k} out of range");
        Self {
            n,
            p: (k - 1) % n + 1,
            q: (k - 1) / n + 1,
        }
    }

    pub fn p(self) -> u32 {
        self.p
    }

    pub fn q(self) -> u32 {
        self.q
    }

    pub fn size(self) -> LatticeSize {
        LatticeSize(self.n)
    }

    /// 1-based scan position.
    pub fn linear(self) -> u32 {
        (self.q - 1) * self.n + self.p
    }

    /// Bit position in a packed configuration.
    pub fn bit(self) -> u32 {
        self.linear() - 1
    }

    pub fn class(self) -> SiteClass {
        let (n, p, q) = (self.n, self.p, self.q);
        match (p, q) {
            (1, 1) => SiteClass::Corner11,
            (1, q) if q == n => SiteClass::Corner1N,
            (p, 1) if p == n => SiteClass::CornerN1,
            (p, q) if p == n && q == n => SiteClass::CornerNN,
            (_, 1) => SiteClass::BoundaryRow1,
            (_, q) if q == n => SiteClass::BoundaryRowN,
            (1, _) => SiteClass::BoundaryCol1,
            (p, _) if p == n => SiteClass::BoundaryColN,
            _ => SiteClass::Interior,
        }
    }

    /// Image under the 180 degree rotation; reverses the scan order.
    pub fn rotated(self) -> Self {
        Self {
            n: self.n,
            p: self.n + 1 - self.p,
            q: self.n + 1 - self.q,
        }
    }

    /// In-lattice nearest neighbours (left, right, up, down order, skipping absent ones).
    pub fn neighbors(self) -> impl Iterator<Item = SiteIndex> {
        let Self { n, p, q } = self;
        let candidates = [
            (p > 1).then(|| (p - 1, q)),
            (p < n).then(|| (p + 1, q)),
            (q > 1).then(|| (p, q - 1)),
            (q < n).then(|| (p, q + 1)),
        ];
        candidates
            .into_iter()
            .flatten()
            .map(move |(p, q)| SiteIndex { n, p, q })
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// One assignment of `+1/-1` spins to every site, bit-packed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration {
    size: LatticeSize,
    bits: u64,
}

impl SpinConfiguration {
    /// Configuration whose packed state index is `index`.
    pub fn from_index(size: LatticeSize, index: u64) -> Result<Self> {
        let count = size.check_enumerable(u64::MAX)?;
        if index >= count {
            return Err(Error::Usage(format!(
                "state index {index} out of range for n={size}"
            )));
        }
        Ok(Self { size, bits: index })
    }

    pub(crate) fn from_bits_unchecked(size: LatticeSize, bits: u64) -> Self {
        Self { size, bits }
    }

    /// Spins given row by row (`q` major, `p` minor).
    pub fn from_spins(size: LatticeSize, spins: &[i8]) -> Result<Self> {
        size.check_enumerable(u64::MAX)?;
        if spins.len() != size.sites() as usize {
            return Err(Error::LengthMismatch {
                left: spins.len(),
                right: size.sites() as usize,
            });
        }
        let mut bits = 0u64;
        for (k, &s) in spins.iter().enumerate() {
            match s {
                1 => bits |= 1 << k,
                -1 => {}
                other => return Err(Error::Usage(format!("spin must be +1 or -1, got {other}"))),
            }
        }
        Ok(Self { size, bits })
    }

    pub fn all_up(size: LatticeSize) -> Result<Self> {
        let count = size.check_enumerable(u64::MAX)?;
        Ok(Self {
            size,
            bits: count - 1,
        })
    }

    pub fn all_down(size: LatticeSize) -> Result<Self> {
        size.check_enumerable(u64::MAX)?;
        Ok(Self { size, bits: 0 })
    }

    pub fn size(&self) -> LatticeSize {
        self.size
    }

    /// Packed state index in `0..2^(n^2)`.
    pub fn index(&self) -> u64 {
        self.bits
    }

    pub fn spin(&self, site: SiteIndex) -> i8 {
        self.spin_bit(site.bit())
    }

    #[inline]
    pub(crate) fn spin_bit(&self, bit: u32) -> i8 {
        if self.bits >> bit & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn spin_at(&self, p: u32, q: u32) -> Result<i8> {
        Ok(self.spin(self.size.site(p, q)?))
    }

    /// Copy with the spin at `site` negated.
    pub fn flipped(&self, site: SiteIndex) -> Self {
        Self {
            size: self.size,
            bits: self.bits ^ (1 << site.bit()),
        }
    }

    /// Copy with every spin negated.
    pub fn global_flip(&self) -> Self {
        let mask = self.size.num_states().map_or(u64::MAX, |c| c - 1);
        Self {
            size: self.size,
            bits: !self.bits & mask,
        }
    }

    /// Image under the 180 degree rotation of the lattice.
    pub fn rotated(&self) -> Self {
        let s = self.size.sites();
        let mut bits = 0u64;
        for k in 0..s {
            if self.bits >> k & 1 == 1 {
                bits |= 1 << (s - 1 - k);
            }
        }
        Self {
            size: self.size,
            bits,
        }
    }

    /// Spins in scan order.
    pub fn spins(&self) -> Vec<i8> {
        (0..self.size.sites()).map(|k| self.spin_bit(k)).collect()
    }

    /// Sum of `x_u x_v` over free-boundary nearest-neighbour bonds.
    pub fn energy(&self) -> i32 {
        let n = self.size.side();
        let horizontal =
            ((self.bits ^ (self.bits >> 1)) & self.size.horizontal_mask()).count_ones();
        let vertical = ((self.bits ^ (self.bits >> n)) & self.size.vertical_mask()).count_ones();
        self.size.bonds() as i32 - 2 * (horizontal + vertical) as i32
    }

    /// Sum of the neighbouring spins of `site`.
    pub fn neighbor_sum(&self, site: SiteIndex) -> i32 {
        site.neighbors().map(|u| self.spin(u) as i32).sum()
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.size.side();
        for q in 0..n {
            if q > 0 {
                writeln!(f)?;
            }
            for p in 0..n {
                let c = if self.spin_bit(q * n + p) > 0 {
                    '+'
                } else {
                    '-'
                };
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

/// `H(x)`: sum over bonds of the product of the two spins.
pub fn energy(x: &SpinConfiguration) -> i32 {
    x.energy()
}

/// `Z_T` by exhaustive enumeration. Overflows to infinity for very cold lattices;
/// see [`IsingMeasure::log_partition_function`].
pub fn partition_function(size: LatticeSize, t: Temperature) -> Result<f64> {
    Ok(IsingMeasure::new(size, t, enumeration_ceiling())?.partition_function())
}

/// `pi(x) = exp(H(x)/T) / Z`.
pub fn stationary_probability(x: &SpinConfiguration, t: Temperature, z: f64) -> f64 {
    (t.beta() * x.energy() as f64).exp() / z
}

/// Probability that a heat-bath update at `site` flips its spin, via the local field.
pub fn conditional_flip_probability(x: &SpinConfiguration, site: SiteIndex, t: Temperature) -> f64 {
    let field = x.spin(site) as i32 * x.neighbor_sum(site);
    logistic_flip(2.0 * t.beta() * field as f64)
}

/// Same quantity from the ratio `pi(y) / (pi(y) + pi(x))` with `y` the flipped configuration.
pub fn conditional_flip_probability_ratio(
    x: &SpinConfiguration,
    site: SiteIndex,
    t: Temperature,
) -> f64 {
    let y = x.flipped(site);
    let (hx, hy) = (x.energy(), y.energy());
    let top = hx.max(hy) as f64;
    let wx = (t.beta() * (hx as f64 - top)).exp();
    let wy = (t.beta() * (hy as f64 - top)).exp();
    wy / (wy + wx)
}

/// `1 / (1 + exp(a))`.
#[inline]
pub(crate) fn logistic_flip(a: f64) -> f64 {
    1.0 / (1.0 + a.exp())
}

/// Number of sites at which `x` and `y` differ.
pub fn hamming_distance(x: &SpinConfiguration, y: &SpinConfiguration) -> Result<u32> {
    if x.size != y.size {
        return Err(Error::SizeMismatch {
            left: x.size.side(),
            right: y.size.side(),
        });
    }
    Ok((x.bits ^ y.bits).count_ones())
}

/// The Ising Gibbs measure on a small lattice, fully enumerated.
#[derive(Debug, Clone)]
pub struct IsingMeasure {
    size: LatticeSize,
    temperature: Temperature,
    energies: Vec<i32>,
    pi: Vec<f64>,
    log_z: f64,
}

impl IsingMeasure {
    pub fn new(size: LatticeSize, temperature: Temperature, ceiling: u64) -> Result<Self> {
        let count = size.check_enumerable(ceiling)?;
        let energies: Vec<i32> = (0..count)
            .map(|bits| SpinConfiguration::from_bits_unchecked(size, bits).energy())
            .collect();
        let beta = temperature.beta();
        // Shift by the ground-state energy so weights stay in (0, 1].
        let top = energies.iter().copied().max().unwrap_or(0) as f64;
        let weights: Vec<f64> = energies
            .iter()
            .map(|&h| (beta * (h as f64 - top)).exp())
            .collect();
        let shifted_z = compensated_sum(weights.iter().copied());
        let pi = weights.iter().map(|w| w / shifted_z).collect();
        Ok(Self {
            size,
            temperature,
            energies,
            pi,
            log_z: beta * top + shifted_z.ln(),
        })
    }

    pub fn size(&self) -> LatticeSize {
        self.size
    }

    pub fn temperature(&self) -> Temperature {
        self.temperature
    }

    pub fn num_states(&self) -> usize {
        self.pi.len()
    }

    pub fn partition_function(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_partition_function(&self) -> f64 {
        self.log_z
    }

    /// Stationary vector indexed by packed state index.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn energies(&self) -> &[i32] {
        &self.energies
    }

    pub fn probability(&self, x: &SpinConfiguration) -> f64 {
        self.pi[x.index() as usize]
    }

    pub fn configuration(&self, index: usize) -> SpinConfiguration {
        SpinConfiguration::from_bits_unchecked(self.size, index as u64)
    }

    pub fn configurations(&self) -> impl Iterator<Item = SpinConfiguration> + '_ {
        (0..self.pi.len() as u64).map(move |b| SpinConfiguration::from_bits_unchecked(self.size, b))
    }

    /// `|sum pi - 1|`.
    pub fn normalization_error(&self) -> f64 {
        (compensated_sum(self.pi.iter().copied()) - 1.0).abs()
    }

    /// Largest `|pi(x) - pi(-x)| / pi(x)` together with whether `H(x) = H(-x)` everywhere.
    pub fn flip_symmetry_error(&self) -> (f64, bool) {
        let mut worst = 0.0f64;
        let mut energies_match = true;
        for x in self.configurations() {
            let y = x.global_flip();
            let (i, j) = (x.index() as usize, y.index() as usize);
            energies_match &= self.energies[i] == self.energies[j];
            worst = worst.max((self.pi[i] - self.pi[j]).abs() / self.pi[i]);
        }
        (worst, energies_match)
    }

    /// `sum_{w : w_site = +1} pi(w)`.
    pub fn up_mass(&self, site: SiteIndex) -> f64 {
        compensated_sum(
            self.configurations()
                .filter(|w| w.spin(site) > 0)
                .map(|w| self.pi[w.index() as usize]),
        )
    }
}
