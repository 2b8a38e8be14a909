//! Brute-force reference implementations that share no code with the library:
//! energies from explicit neighbour loops, heat-bath probabilities from
//! Boltzmann weight ratios, and canonical-path loads by walking every pair.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

pub const TEMPERATURES: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

pub struct Oracle {
    pub n: u32,
    pub beta: f64,
    pub energy: Vec<i64>,
    pub pi: Vec<f64>,
    /// `flip[x * n^2 + b]`: probability of moving from `x` to `x ^ (1 << b)`.
    pub flip: Vec<f64>,
}

/// Spin at column `p`, row `q` (1-based), packed row-major from bit 0.
pub fn spin(n: u32, x: usize, p: u32, q: u32) -> i64 {
    if (x >> ((q - 1) * n + (p - 1))) & 1 == 1 {
        1
    } else {
        -1
    }
}

pub fn energy(n: u32, x: usize) -> i64 {
    let mut h = 0;
    for q in 1..=n {
        for p in 1..=n {
            if p < n {
                h += spin(n, x, p, q) * spin(n, x, p + 1, q);
            }
            if q < n {
                h += spin(n, x, p, q) * spin(n, x, p, q + 1);
            }
        }
    }
    h
}

impl Oracle {
    /// `beta = 1/T`; `0` is infinite temperature.
    pub fn new(n: u32, beta: f64) -> Self {
        let states = 1usize << (n * n);
        let sites = (n * n) as usize;
        let energy: Vec<i64> = (0..states).map(|x| energy(n, x)).collect();
        let top = *energy.iter().max().unwrap() as f64;
        let weights: Vec<f64> = energy
            .iter()
            .map(|&h| (beta * (h as f64 - top)).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let pi: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let mut flip = vec![0.0; states * sites];
        for x in 0..states {
            for b in 0..sites {
                let y = x ^ (1 << b);
                flip[x * sites + b] = weights[y] / (weights[x] + weights[y]) / sites as f64;
            }
        }
        Self {
            n,
            beta,
            energy,
            pi,
            flip,
        }
    }

    pub fn from_temperature(n: u32, t: f64) -> Self {
        Self::new(n, 1.0 / t)
    }

    pub fn sites(&self) -> usize {
        (self.n * self.n) as usize
    }

    pub fn states(&self) -> usize {
        self.pi.len()
    }

    pub fn holding(&self, x: usize) -> f64 {
        let s = self.sites();
        1.0 - self.flip[x * s..(x + 1) * s].iter().sum::<f64>()
    }

    /// `v P` for a row vector `v`.
    pub fn step(&self, v: &[f64]) -> Vec<f64> {
        let s = self.sites();
        let mut out: Vec<f64> = (0..v.len()).map(|x| v[x] * self.holding(x)).collect();
        for x in 0..v.len() {
            for b in 0..s {
                out[x ^ (1 << b)] += v[x] * self.flip[x * s + b];
            }
        }
        out
    }

    /// Eigenvalues of `Pi^{1/2} P Pi^{-1/2}`, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.states();
        let s = self.sites();
        let mut a = DMatrix::<f64>::zeros(m, m);
        for x in 0..m {
            a[(x, x)] = self.holding(x);
            for b in 0..s {
                let y = x ^ (1 << b);
                a[(x, y)] = (self.pi[x] / self.pi[y]).sqrt() * self.flip[x * s + b];
            }
        }
        let a = (&a + a.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        ev.sort_by(|p, q| q.partial_cmp(p).unwrap());
        ev
    }

    /// Per directed edge `x * n^2 + b`: `(sum |gamma| pi(x) pi(y), number of paths)`,
    /// walking the flip-in-increasing-site-order path of every ordered pair.
    pub fn walked_loads(&self) -> (Vec<f64>, Vec<u64>) {
        let s = self.sites();
        let m = self.states();
        let mut loads = vec![0.0; m * s];
        let mut counts = vec![0u64; m * s];
        for x in 0..m {
            for y in 0..m {
                let diff = x ^ y;
                let w = diff.count_ones() as f64 * self.pi[x] * self.pi[y];
                let mut cur = x;
                for b in 0..s {
                    if diff >> b & 1 == 1 {
                        loads[cur * s + b] += w;
                        counts[cur * s + b] += 1;
                        cur ^= 1 << b;
                    }
                }
                assert_eq!(cur, y);
            }
        }
        (loads, counts)
    }

    /// Largest `load(e) / (pi(e-) P(e))` over edges flipping each site, by bit.
    pub fn per_site_ratio(&self) -> Vec<f64> {
        let s = self.sites();
        let (loads, _) = self.walked_loads();
        let mut best = vec![0.0f64; s];
        for (i, load) in loads.iter().enumerate() {
            let ratio = load / (self.pi[i / s] * self.flip[i]);
            best[i % s] = best[i % s].max(ratio);
        }
        best
    }

    pub fn kappa(&self) -> f64 {
        self.per_site_ratio().into_iter().fold(0.0, f64::max)
    }

    pub fn log_z(&self) -> f64 {
        let top = *self.energy.iter().max().unwrap() as f64;
        let sum: f64 = self
            .energy
            .iter()
            .map(|&h| (self.beta * (h as f64 - top)).exp())
            .sum();
        self.beta * top + sum.ln()
    }
}

/// `1 - n^-4 e^{-(2/T)(2n+1)}`, written out independently of the library.
pub fn main_bound(n: u32, beta: f64) -> f64 {
    let n = n as f64;
    1.0 - (-2.0 * beta * (2.0 * n + 1.0)).exp() / n.powi(4)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}
