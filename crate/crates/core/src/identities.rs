//! Exact identities and worst-case inequalities used on the way from the
//! per-class sums to the closed-form bound on kappa.

use serde::Serialize;

use crate::bounds::{
    bracket_column_minus, bracket_column_plus, bracket_interior, bracket_off_corner,
    bracket_row_minus, bracket_row_plus,
};
use crate::error::Result;
use crate::lattice::{
    IsingMeasure, LatticeSize, SiteClass, SiteIndex, SpinConfiguration, DENSE_MAX_STATES,
};
use crate::sum::CompensatedSum;

/// Both sides of the up/down symmetry identity at an interior site:
/// `sum_{w_pq=+1} pi(w) e^{-(2/T)(w(p+1,q) + w(p,q+1))}` and
/// `sum_{w_pq=-1} pi(w) e^{(2/T)(w(p-1,q) + w(p,q-1))}`.
pub fn flip_symmetry_sides(measure: &IsingMeasure, site: SiteIndex) -> (f64, f64) {
    let beta = measure.temperature().beta();
    let size = site.size();
    let (p, q) = (site.p(), site.q());
    let at = |w: &SpinConfiguration, p, q| w.spin(size.site(p, q).expect("interior")) as f64;
    let mut plus = CompensatedSum::new();
    let mut minus = CompensatedSum::new();
    for w in measure.configurations() {
        let pw = measure.probability(&w);
        if w.spin(site) > 0 {
            plus.add(pw * (-2.0 * beta * (at(&w, p + 1, q) + at(&w, p, q + 1))).exp());
        } else {
            minus.add(pw * (2.0 * beta * (at(&w, p - 1, q) + at(&w, p, q - 1))).exp());
        }
    }
    (plus.value(), minus.value())
}

/// Largest relative error of `pi(w+) = pi(w-) exp((2/T) * neighbour sum)` over
/// all `w+` with `+1` at `site`, where `w-` is `w+` with that spin flipped.
pub fn spin_flip_pairing_error(measure: &IsingMeasure, site: SiteIndex) -> f64 {
    let beta = measure.temperature().beta();
    measure
        .configurations()
        .filter(|w| w.spin(site) > 0)
        .map(|w_plus| {
            let w_minus = w_plus.flipped(site);
            let lhs = measure.probability(&w_plus);
            let rhs = measure.probability(&w_minus)
                * (2.0 * beta * w_plus.neighbor_sum(site) as f64).exp();
            (lhs - rhs).abs() / lhs
        })
        .fold(0.0, f64::max)
}

/// Largest value of each worst-case bracket over every configuration and applicable site.
#[derive(Debug, Clone, Serialize)]
pub struct BracketMaxima {
    /// `max_{a,b = +-1} (a - b - ab)`.
    pub lower_term_max: i32,
    /// `max_{a,b = +-1} (-a + b - ab)`.
    pub upper_term_max: i32,
    pub off_corner: Option<i32>,
    pub column_plus: Option<i32>,
    pub column_minus: Option<i32>,
    pub row_plus: Option<i32>,
    pub row_minus: Option<i32>,
    pub interior: Option<i32>,
    /// `3n + 1`.
    pub limit: i32,
}

impl BracketMaxima {
    pub fn all_within_limit(&self) -> bool {
        [
            self.off_corner,
            self.column_plus,
            self.column_minus,
            self.row_plus,
            self.row_minus,
            self.interior,
        ]
        .iter()
        .flatten()
        .all(|&m| m <= self.limit)
    }
}

pub fn bracket_maxima(size: LatticeSize) -> Result<BracketMaxima> {
    let spins = [-1i32, 1];
    let pairs = || {
        spins
            .iter()
            .flat_map(|&a| spins.iter().map(move |&b| (a, b)))
    };
    let lower_term_max = pairs().map(|(a, b)| a - b - a * b).max().unwrap_or(0);
    let upper_term_max = pairs().map(|(a, b)| -a + b - a * b).max().unwrap_or(0);

    let n = size.side();
    let mut out = BracketMaxima {
        lower_term_max,
        upper_term_max,
        off_corner: None,
        column_plus: None,
        column_minus: None,
        row_plus: None,
        row_minus: None,
        interior: None,
        limit: 3 * n as i32 + 1,
    };
    let bump = |slot: &mut Option<i32>, v: i32| *slot = Some(slot.map_or(v, |m| m.max(v)));
    let sites: Vec<SiteIndex> = size.site_indices().collect();
    for w in size.configurations(DENSE_MAX_STATES)? {
        if n >= 2 {
            bump(&mut out.off_corner, bracket_off_corner(&w));
        }
        for s in &sites {
            match s.class() {
                SiteClass::BoundaryCol1 => {
                    bump(&mut out.column_plus, bracket_column_plus(&w, s.q()));
                    bump(&mut out.column_minus, bracket_column_minus(&w, s.q()));
                }
                SiteClass::BoundaryRow1 => {
                    bump(&mut out.row_plus, bracket_row_plus(&w, s.p()));
                    bump(&mut out.row_minus, bracket_row_minus(&w, s.p()));
                }
                SiteClass::Interior => bump(&mut out.interior, bracket_interior(&w, s.p(), s.q())),
                _ => {}
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Temperature;

    #[test]
    fn identities_hold_at_the_interior_site() {
        let three = LatticeSize::new(3).unwrap();
        let centre = three.site(2, 2).unwrap();
        for t in [0.5, 1.0, 2.0, 5.0] {
            let m = IsingMeasure::new(three, Temperature::new(t).unwrap(), 512).unwrap();
            let (lhs, rhs) = flip_symmetry_sides(&m, centre);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs);
            assert!(spin_flip_pairing_error(&m, centre) <= 1e-12);
        }
    }

    #[test]
    fn pairing_identity_is_not_vacuous() {
        // the same identity with the wrong sign on the field must fail
        let three = LatticeSize::new(3).unwrap();
        let m = IsingMeasure::new(three, Temperature::new(1.0).unwrap(), 512).unwrap();
        let centre = three.site(2, 2).unwrap();
        let wrong = m
            .configurations()
            .filter(|w| w.spin(centre) > 0)
            .map(|w| {
                let rhs = m.probability(&w.flipped(centre))
                    * (-2.0 * w.neighbor_sum(centre) as f64).exp();
                (m.probability(&w) - rhs).abs() / m.probability(&w)
            })
            .fold(0.0, f64::max);
        assert!(wrong > 0.5);
    }

    #[test]
    fn bracket_maxima_at_n3() {
        let b = bracket_maxima(LatticeSize::new(3).unwrap()).unwrap();
        assert_eq!(b.lower_term_max, 3);
        assert_eq!(b.upper_term_max, 3);
        assert_eq!(b.limit, 10);
        assert!(b.all_within_limit());
        assert_eq!(b.off_corner, Some(10));
        assert!(b.interior.is_some());
    }
}
