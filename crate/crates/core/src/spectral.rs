//! Exact spectra, total-variation decay and the reversible-chain decay inequality.
//!
//! Eigenvalues are computed from `S = Pi^{1/2} P Pi^{-1/2}`, which is symmetric
//! exactly when the kernel is reversible, so a symmetric solver suffices and a
//! residual check catches detailed-balance bugs upstream.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::beta_star_bound;
use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;
use crate::lattice::DENSE_MAX_STATES;
use crate::sum::compensated_sum;

/// Largest tolerated `max |S - S^T|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Gap below which neighbouring eigenvalues are merged when counting multiplicities.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Additive slack on the decay inequality.
pub const DECAY_SLACK: f64 = 1e-10;

/// Full spectrum, sorted descending.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub beta1: f64,
    pub beta_min: f64,
    pub beta_star: f64,
    pub symmetrization_residual: f64,
}

impl Spectrum {
    fn from_sorted(eigenvalues: Vec<f64>, symmetrization_residual: f64) -> Self {
        let beta1 = eigenvalues.get(1).copied().unwrap_or(0.0);
        let beta_min = eigenvalues.last().copied().unwrap_or(0.0);
        Self {
            beta1,
            beta_min,
            beta_star: beta1.max(beta_min.abs()),
            eigenvalues,
            symmetrization_residual,
        }
    }

    pub fn top(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.eigenvalues.iter().copied())
    }

    /// Distinct eigenvalues (cluster means) with their multiplicities, descending.
    pub fn multiplicities(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        let mut cluster: Vec<f64> = Vec::new();
        for &ev in &self.eigenvalues {
            if let Some(&last) = cluster.last() {
                if last - ev > tol {
                    out.push((
                        cluster.iter().sum::<f64>() / cluster.len() as f64,
                        cluster.len(),
                    ));
                    cluster.clear();
                }
            }
            cluster.push(ev);
        }
        if !cluster.is_empty() {
            out.push((
                cluster.iter().sum::<f64>() / cluster.len() as f64,
                cluster.len(),
            ));
        }
        out
    }
}

fn check_dense(kernel: &TransitionKernel) -> Result<()> {
    kernel.size().check_enumerable(DENSE_MAX_STATES).map(|_| ())
}

/// `S = Pi^{1/2} P Pi^{-1/2}` as a dense matrix, plus `max |S - S^T|`.
pub fn symmetrized_kernel(kernel: &TransitionKernel) -> Result<(DMatrix<f64>, f64)> {
    check_dense(kernel)?;
    let m = kernel.num_states();
    let sqrt_pi: Vec<f64> = kernel.pi().iter().map(|p| p.sqrt()).collect();
    let mut s = DMatrix::<f64>::zeros(m, m);
    for x in 0..m {
        for (y, p) in kernel.row(x) {
            s[(x, y)] = sqrt_pi[x] * p / sqrt_pi[y];
        }
    }
    let residual = (0..m)
        .flat_map(|x| (0..x).map(move |y| (x, y)))
        .map(|(x, y)| (s[(x, y)] - s[(y, x)]).abs())
        .fold(0.0, f64::max);
    Ok((s, residual))
}

/// Every eigenvalue of the kernel by dense symmetric decomposition.
pub fn exact_spectrum(kernel: &TransitionKernel) -> Result<Spectrum> {
    let (s, residual) = symmetrized_kernel(kernel)?;
    if residual > SYMMETRY_TOLERANCE {
        return Err(Error::AsymmetricKernel(residual));
    }
    let sym = (&s + s.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(Spectrum::from_sorted(eigenvalues, residual))
}

/// `beta_1` and `beta_min` from a Lanczos run, for lattices too big for a dense solve.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalEigenvalues {
    pub beta1: f64,
    pub beta_min: f64,
    pub beta_star: f64,
    pub steps: usize,
    /// Residual norm estimates `|b_m s_{m,i}|` of the two Ritz pairs.
    pub beta1_residual: f64,
    pub beta_min_residual: f64,
}

/// `S v` without materializing `S`.
fn apply_symmetrized(kernel: &TransitionKernel, sqrt_pi: &[f64], v: &[f64]) -> Vec<f64> {
    let sites = kernel.size().sites();
    (0..v.len())
        .into_par_iter()
        .map(|x| {
            let mut acc = kernel.holding_probability(x) * v[x];
            for b in 0..sites {
                let y = x ^ (1 << b);
                acc += sqrt_pi[x] / sqrt_pi[y] * kernel.flip_probability(x, b) * v[y];
            }
            acc
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lanczos with full reorthogonalization on `S` restricted to the complement
/// of its top eigenvector `sqrt(pi)`; the extreme Ritz values estimate
/// `beta_1` and `beta_min`.
pub fn extremal_spectrum(
    kernel: &TransitionKernel,
    max_steps: usize,
) -> Result<ExtremalEigenvalues> {
    let m = kernel.num_states();
    let sqrt_pi: Vec<f64> = kernel.pi().iter().map(|p| p.sqrt()).collect();
    let steps_cap = max_steps.min(m.saturating_sub(1)).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(0x15_1e_6a_b5);
    let mut q: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let deflate = |v: &mut Vec<f64>| {
        let c = dot(v, &sqrt_pi);
        axpy(-c, &sqrt_pi, v);
    };
    deflate(&mut q);
    let norm = dot(&q, &q).sqrt();
    if norm == 0.0 {
        // single-state complement is empty: only n = 0, unreachable
        return Err(Error::Usage("Lanczos start vector vanished".into()));
    }
    q.iter_mut().for_each(|v| *v /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    loop {
        let j = basis.len() - 1;
        let mut w = apply_symmetrized(kernel, &sqrt_pi, &basis[j]);
        let alpha = dot(&w, &basis[j]);
        alphas.push(alpha);
        axpy(-alpha, &basis[j], &mut w);
        if j > 0 {
            axpy(-betas[j - 1], &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            deflate(&mut w);
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let beta = dot(&w, &w).sqrt();
        if alphas.len() >= steps_cap || beta < 1e-12 {
            betas.push(beta);
            break;
        }
        betas.push(beta);
        w.iter_mut().for_each(|v| *v /= beta);
        basis.push(w);
    }

    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let last_beta = betas[k - 1];
    let (mut hi, mut lo) = (0usize, 0usize);
    for i in 0..k {
        if eig.eigenvalues[i] > eig.eigenvalues[hi] {
            hi = i;
        }
        if eig.eigenvalues[i] < eig.eigenvalues[lo] {
            lo = i;
        }
    }
    let residual = |i: usize| (last_beta * eig.eigenvectors[(k - 1, i)]).abs();
    let beta1 = eig.eigenvalues[hi];
    let beta_min = eig.eigenvalues[lo];
    Ok(ExtremalEigenvalues {
        beta1,
        beta_min,
        beta_star: beta1.max(beta_min.abs()),
        steps: k,
        beta1_residual: residual(hi),
        beta_min_residual: residual(lo),
    })
}

/// Half the L1 distance between two probability vectors.
pub fn tv_distance(row: &[f64], pi: &[f64]) -> Result<f64> {
    if row.len() != pi.len() {
        return Err(Error::LengthMismatch {
            left: row.len(),
            right: pi.len(),
        });
    }
    for v in [row, pi] {
        let total = compensated_sum(v.iter().copied());
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(total));
        }
    }
    Ok(0.5 * compensated_sum(row.iter().zip(pi).map(|(a, b)| (a - b).abs())))
}

/// `P^k(x, .)` for `k = 0..=horizon`.
pub fn power_rows(kernel: &TransitionKernel, x: usize, horizon: usize) -> Result<Vec<Vec<f64>>> {
    check_dense(kernel)?;
    if x >= kernel.num_states() {
        return Err(Error::Usage(format!("start state {x} out of range")));
    }
    let mut rows = Vec::with_capacity(horizon + 1);
    let mut cur = vec![0.0; kernel.num_states()];
    cur[x] = 1.0;
    rows.push(cur);
    for _ in 0..horizon {
        let next = kernel.apply_left(rows.last().expect("non-empty"));
        rows.push(next);
    }
    Ok(rows)
}

/// Geometric rate of `tv[from..=to]`, by least squares on `ln tv` against `k`.
pub fn fitted_decay_rate(tv: &[f64], from: usize, to: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (from..=to.min(tv.len().checked_sub(1)?))
        .map(|k| (k as f64, tv[k]))
        .collect();
    if pts.len() < 2 || pts.iter().any(|&(_, v)| !v.is_normal() || v < 0.0) {
        return None;
    }
    let count = pts.len() as f64;
    let mean_k = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_l = pts.iter().map(|p| p.1.ln()).sum::<f64>() / count;
    let (mut num, mut den) = (0.0, 0.0);
    for &(k, v) in &pts {
        num += (k - mean_k) * (v.ln() - mean_l);
        den += (k - mean_k) * (k - mean_k);
    }
    Some((num / den).exp())
}

/// One start state at one time step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayRow {
    pub k: usize,
    pub x: usize,
    pub tv: f64,
    /// `(1/2) sqrt((1 - pi(x)) / pi(x)) beta*^k` with the exact `beta*`.
    pub bound_exact: f64,
    /// Same, with the closed-form bound on `beta*`.
    pub bound_closed_form: f64,
    pub pass_exact: bool,
    pub pass_closed_form: bool,
}

/// Outcome of `4 tv^2 <= ((1 - pi(x)) / pi(x)) beta*^{2k}` over all starts and times.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub horizon: usize,
    pub beta_star_exact: f64,
    pub beta_star_closed_form: f64,
    pub checks: usize,
    pub failures_exact: usize,
    pub failures_closed_form: usize,
    /// `min (rhs + slack - lhs)` in the squared form.
    pub worst_margin_exact: f64,
    pub worst_margin_closed_form: f64,
    #[serde(skip)]
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.failures_exact == 0 && self.failures_closed_form == 0
    }

    /// `k,x,tv,bound_exact_beta_star,bound_closed_form`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,x,tv,bound_exact_beta_star,bound_closed_form")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e}",
                r.k, r.x, r.tv, r.bound_exact, r.bound_closed_form
            )?;
        }
        Ok(())
    }
}

pub fn verify_tv_decay(
    kernel: &TransitionKernel,
    spectrum: &Spectrum,
    horizon: usize,
) -> Result<DecayReport> {
    check_dense(kernel)?;
    let pi = kernel.pi();
    let exact = spectrum.beta_star;
    let closed_form = beta_star_bound(kernel.size(), kernel.temperature()).bound;
    let per_start: Vec<Vec<(DecayRow, f64, f64)>> = (0..kernel.num_states())
        .into_par_iter()
        .map(|x| -> Result<Vec<(DecayRow, f64, f64)>> {
            let rows = power_rows(kernel, x, horizon)?;
            let odds = (1.0 - pi[x]) / pi[x];
            rows.iter()
                .enumerate()
                .map(|(k, row)| {
                    let tv = tv_distance(row, pi)?;
                    let lhs = 4.0 * tv * tv;
                    let rhs_exact = odds * exact.powi(2 * k as i32);
                    let rhs_cor = odds * closed_form.powi(2 * k as i32);
                    let m_exact = rhs_exact + DECAY_SLACK - lhs;
                    let m_cor = rhs_cor + DECAY_SLACK - lhs;
                    Ok((
                        DecayRow {
                            k,
                            x,
                            tv,
                            bound_exact: 0.5 * rhs_exact.sqrt(),
                            bound_closed_form: 0.5 * rhs_cor.sqrt(),
                            pass_exact: m_exact >= 0.0,
                            pass_closed_form: m_cor >= 0.0,
                        },
                        m_exact,
                        m_cor,
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut report = DecayReport {
        horizon,
        beta_star_exact: exact,
        beta_star_closed_form: closed_form,
        checks: 0,
        failures_exact: 0,
        failures_closed_form: 0,
        worst_margin_exact: f64::INFINITY,
        worst_margin_closed_form: f64::INFINITY,
        rows: Vec::new(),
    };
    // k-major ordering for the CSV
    let mut flat: Vec<(DecayRow, f64, f64)> = per_start.into_iter().flatten().collect();
    flat.sort_by_key(|(r, _, _)| (r.k, r.x));
    for (row, m_exact, m_cor) in flat {
        report.checks += 1;
        report.failures_exact += usize::from(!row.pass_exact);
        report.failures_closed_form += usize::from(!row.pass_closed_form);
        report.worst_margin_exact = report.worst_margin_exact.min(m_exact);
        report.worst_margin_closed_form = report.worst_margin_closed_form.min(m_cor);
        report.rows.push(row);
    }
    Ok(report)
}

/// `max_y |v(y) - pi(y)|`.
pub fn max_norm_distance(v: &[f64], pi: &[f64]) -> f64 {
    v.iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
