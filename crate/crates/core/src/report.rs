//! Reports behind the command-line front end: configuration, named verdicts,
//! JSON/CSV rendering and the exit-code contract.
//!
//! Everything here is deterministic for a fixed [`RunConfig`]: no timings,
//! ordered maps only, and sampled checks draw from a seeded ChaCha stream.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    beta_min_bound, beta_star_bound, class_edge_bound_checks, closed_form_beta1_bound,
    closed_form_log_gap, crossover_n, elevation_beta1_bound, elevation_log_gap, f_curve, g_curve,
    kappa_beta1_bound, kappa_exact, kappa_upper_bound, printed_partition_log_bound, BetaStarBound,
    ClassBoundCheck, KappaResult,
};
use crate::error::{Error, Result};
use crate::identities::{flip_symmetry_sides, spin_flip_pairing_error};
use crate::kernel::{closed_form_flip_probability, DirectedEdge, TransitionKernel};
use crate::lattice::{
    conditional_flip_probability_ratio, LatticeSize, SiteClass, SpinConfiguration, Temperature,
    DENSE_MAX_STATES,
};
use crate::paths::{
    accumulate_edge_loads, accumulate_edge_loads_by_walking, canonical_path, EdgeLoadTable,
};
use crate::spectral::{
    exact_spectrum, extremal_spectrum, verify_tv_decay, DecayReport, Spectrum, CLUSTER_TOLERANCE,
};

pub const SCHEMA: u32 = 1;

/// Largest `n` searched for the gap crossover.
pub const CROSSOVER_N_MAX: u32 = 200;

/// Lanczos steps used for `spectrum --iterative`.
pub const LANCZOS_STEPS: usize = 160;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CEILING: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Bounds,
    Compare,
    Verify,
    Dump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub n: u32,
    pub temperature: Temperature,
    /// Temperature grid for `compare`.
    pub grid: Vec<Temperature>,
    /// Lattice sides for `compare`.
    pub sizes: Vec<u32>,
    pub horizon: usize,
    pub ceiling: u64,
    /// Directory receiving every artifact of the run.
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    /// Sampled pairs for path-length checks on lattices too big to do exhaustively.
    pub samples: usize,
    pub formulas_only: bool,
    pub iterative: bool,
}

impl RunConfig {
    pub fn new(command: Command, n: u32, temperature: Temperature) -> Self {
        Self {
            command,
            n,
            temperature,
            grid: Vec::new(),
            sizes: vec![5, 10, 20],
            horizon: 50,
            ceiling: crate::lattice::enumeration_ceiling(),
            out: None,
            format: Format::Json,
            seed: 1,
            samples: 100_000,
            formulas_only: false,
            iterative: false,
        }
    }

    fn size(&self) -> Result<LatticeSize> {
        LatticeSize::new(self.n)
    }
}

/// A named inequality check. `margin` is signed slack; the check passes when
/// it is at least minus the stated tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl Verdict {
    /// `lhs <= rhs` up to an absolute tolerance.
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= -tol,
        }
    }

    /// `lhs <= rhs` up to a tolerance relative to `|rhs|`.
    pub fn relatively_at_most(name: impl Into<String>, lhs: f64, rhs: f64, rel: f64) -> Self {
        let margin = (rhs - lhs) / rhs.abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= -rel,
        }
    }

    /// `|lhs - rhs| <= tol`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = tol - (lhs - rhs).abs();
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= 0.0,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self {
            name: name.into(),
            lhs: v,
            rhs: 1.0,
            margin: v - 1.0,
            pass: ok,
        }
    }
}

pub fn all_pass(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(|v| v.pass)
}

/// Fixed-width verdict table, one line per check.
pub fn verdict_table(verdicts: &[Verdict]) -> String {
    let width = verdicts.iter().map(|v| v.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for v in verdicts {
        let _ = writeln!(
            out,
            "{}  {:<width$}  lhs={:.10e}  rhs={:.10e}  margin={:.3e}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.lhs,
            v.rhs,
            v.margin,
        );
    }
    out
}

/// What a command produced: text for stdout, named files for `--out`, and the exit code.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    pub exit_code: i32,
}

impl Artifacts {
    pub fn write_files(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::LatticeTooLarge { .. } => EXIT_CEILING,
        Error::Usage(_)
        | Error::InvalidSize(_)
        | Error::InvalidTemperature(_)
        | Error::SiteOutOfRange { .. } => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::LatticeTooLarge { .. } => "lattice-too-large",
        Error::SizeMismatch { .. } => "size-mismatch",
        Error::InvalidSize(_) => "invalid-size",
        Error::InvalidTemperature(_) => "invalid-temperature",
        Error::SiteOutOfRange { .. } => "site-out-of-range",
        Error::KappaBelowOne(_) => "kappa-below-one",
        Error::NotNormalized(_) => "not-normalized",
        Error::LengthMismatch { .. } => "length-mismatch",
        Error::AsymmetricKernel(_) => "asymmetric-kernel",
        Error::Usage(_) => "usage",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Machine-readable error body, `{"schema":1,"error":...,"message":...}`.
pub fn error_json(err: &Error) -> String {
    #[derive(Serialize)]
    struct Body<'a> {
        schema: u32,
        error: &'a str,
        message: String,
    }
    let body = Body {
        schema: SCHEMA,
        error: error_kind(err),
        message: err.to_string(),
    };
    serde_json::to_string_pretty(&body)
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", error_kind(err)))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Runs one command. Errors map to exit codes through [`exit_code_for`].
pub fn run(cfg: &RunConfig) -> Result<Artifacts> {
    match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Bounds => cmd_bounds(cfg),
        Command::Compare => cmd_compare(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Dump => cmd_dump(cfg),
    }
}

/// Parses a temperature grid: either `start:stop:step` or a comma-separated list.
/// An empty string gives an empty grid, which `compare` rejects.
pub fn parse_grid(text: &str) -> Result<Vec<Temperature>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad grid bound {s:?}")))
        };
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        let ordered = step > 0.0 && stop >= start;
        if !ordered {
            return Err(Error::Usage(format!("bad grid range {text:?}")));
        }
        // integer stepping so that 0.5:10:0.5 yields exactly 20 points
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return (0..count)
            .map(|i| Temperature::new(start + i as f64 * step))
            .collect();
    }
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<Temperature>()
                .map_err(|_| Error::Usage(format!("bad temperature {tok:?}")))
        })
        .collect()
}

// ---------------------------------------------------------------- spectrum

#[derive(Debug, Clone, Serialize)]
pub struct Multiplicity {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub schema: u32,
    pub n: u32,
    #[serde(rename = "T")]
    pub temperature: Temperature,
    pub method: &'static str,
    pub beta1: f64,
    pub beta_min: f64,
    pub beta_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetrization_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lanczos_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_estimates: Option<[f64; 2]>,
    pub multiplicities: Vec<Multiplicity>,
    pub eigenvalues: Vec<f64>,
}

impl SpectrumReport {
    pub fn from_dense(size: LatticeSize, t: Temperature, s: &Spectrum) -> Self {
        Self {
            schema: SCHEMA,
            n: size.side(),
            temperature: t,
            method: "dense",
            beta1: s.beta1,
            beta_min: s.beta_min,
            beta_star: s.beta_star,
            symmetrization_residual: Some(s.symmetrization_residual),
            lanczos_steps: None,
            residual_estimates: None,
            multiplicities: s
                .multiplicities(CLUSTER_TOLERANCE)
                .into_iter()
                .map(|(value, multiplicity)| Multiplicity {
                    value,
                    multiplicity,
                })
                .collect(),
            eigenvalues: s.eigenvalues.clone(),
        }
    }

    /// `index,eigenvalue`, descending.
    pub fn eigenvalue_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{i},{v:.16e}");
        }
        out
    }
}

pub fn spectrum_report(cfg: &RunConfig) -> Result<SpectrumReport> {
    let size = cfg.size()?;
    let kernel = TransitionKernel::build(size, cfg.temperature, cfg.ceiling)?;
    if cfg.iterative {
        let ex = extremal_spectrum(&kernel, LANCZOS_STEPS)?;
        return Ok(SpectrumReport {
            schema: SCHEMA,
            n: size.side(),
            temperature: cfg.temperature,
            method: "lanczos",
            beta1: ex.beta1,
            beta_min: ex.beta_min,
            beta_star: ex.beta_star,
            symmetrization_residual: None,
            lanczos_steps: Some(ex.steps),
            residual_estimates: Some([ex.beta1_residual, ex.beta_min_residual]),
            multiplicities: Vec::new(),
            eigenvalues: Vec::new(),
        });
    }
    let s = exact_spectrum(&kernel)?;
    Ok(SpectrumReport::from_dense(size, cfg.temperature, &s))
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Artifacts> {
    let report = spectrum_report(cfg)?;
    let json = to_json(&report)?;
    let csv = report.eigenvalue_csv();
    Ok(Artifacts {
        stdout: match cfg.format {
            Format::Json => json.clone(),
            Format::Csv => csv.clone(),
        },
        files: vec![
            ("spectrum.json".into(), json),
            ("eigenvalues.csv".into(), csv),
        ],
        exit_code: EXIT_PASS,
    })
}

// ------------------------------------------------------------------ bounds

#[derive(Debug, Clone, Serialize)]
pub struct EdgeRef {
    pub state: u64,
    pub p: u32,
    pub q: u32,
}

impl From<&DirectedEdge> for EdgeRef {
    fn from(e: &DirectedEdge) -> Self {
        Self {
            state: e.minus().index(),
            p: e.site().p(),
            q: e.site().q(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactQuantities {
    pub kappa: f64,
    pub kappa_argmax: EdgeRef,
    pub kappa_per_class: BTreeMap<SiteClass, f64>,
    pub kappa_bound: f64,
    pub beta1: f64,
    pub beta_min: f64,
    pub beta_star: f64,
    pub log_partition_function: f64,
    pub class_bounds: Vec<ClassBoundCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossoverEntry {
    #[serde(rename = "T")]
    pub temperature: Temperature,
    pub n: Option<u32>,
}

/// Annotations that are reported but do not affect the exit code.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsFlags {
    /// `1 - 2/(1+e^{4/T}) <= 1 - e^{-4/T} <= closed-form bound`.
    pub beta_star_chain_holds: bool,
    /// `ln` of the printed `Z_T` bound.
    pub printed_partition_log_bound: f64,
    /// Whether the exact `Z_T` exceeds the printed bound (only with enumeration).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_partition_bound_violated: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub schema: u32,
    pub n: u32,
    #[serde(rename = "T")]
    pub temperature: Temperature,
    pub closed_form_beta1_bound: f64,
    pub closed_form_log_gap: f64,
    pub kappa_upper_bound: f64,
    pub beta_min_bound: f64,
    pub beta_star_bound: BetaStarBound,
    pub elevation_beta1_bound: f64,
    pub elevation_log_gap: f64,
    pub f: f64,
    pub g: f64,
    pub crossover_n: Vec<CrossoverEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactQuantities>,
    pub flags: BoundsFlags,
    pub verdicts: Vec<Verdict>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        all_pass(&self.verdicts)
    }
}

/// Temperatures at which the crossover size is always reported.
pub const CROSSOVER_TEMPERATURES: [f64; 3] = [0.5, 1.0, 2.0];

fn crossover_table(t: Temperature) -> Vec<CrossoverEntry> {
    let mut temps: Vec<Temperature> = CROSSOVER_TEMPERATURES
        .iter()
        .map(|&v| Temperature::new(v).expect("positive"))
        .collect();
    if !temps.contains(&t) {
        temps.push(t);
    }
    temps
        .into_iter()
        .map(|t| CrossoverEntry {
            temperature: t,
            n: crossover_n(t, CROSSOVER_N_MAX),
        })
        .collect()
}

/// Verdicts comparing exact quantities against every bound, for one `(n, T)`.
pub fn sandwich_verdicts(
    size: LatticeSize,
    t: Temperature,
    kappa: &KappaResult,
    s: &Spectrum,
) -> Result<Vec<Verdict>> {
    let from_kappa = kappa_beta1_bound(kappa.kappa)?;
    let closed = closed_form_beta1_bound(size, t);
    let star = beta_star_bound(size, t);
    Ok(vec![
        Verdict::at_most("beta1 <= 1 - 1/kappa", s.beta1, from_kappa, 1e-9),
        Verdict::at_most("1 - 1/kappa <= closed-form bound", from_kappa, closed, 1e-9),
        Verdict::relatively_at_most(
            "kappa <= n^4 exp((2/T)(2n+1))",
            kappa.kappa,
            kappa_upper_bound(size, t),
            1e-9,
        ),
        Verdict::at_most(
            "beta_min >= -1 + 2/(1+e^{4/T})",
            beta_min_bound(t),
            s.beta_min,
            1e-9,
        ),
        Verdict::at_most("beta* <= closed-form bound", s.beta_star, star.bound, 1e-9),
    ])
}

pub fn class_bound_verdicts(checks: &[ClassBoundCheck]) -> Vec<Verdict> {
    checks
        .iter()
        .map(|c| {
            Verdict::relatively_at_most(
                format!(
                    "class bound {} at ({},{}) [{}]",
                    c.case.label(),
                    c.p,
                    c.q,
                    c.class.name()
                ),
                c.max_ratio,
                c.rhs,
                1e-9,
            )
        })
        .collect()
}

pub fn bounds_report(cfg: &RunConfig) -> Result<BoundsReport> {
    let size = cfg.size()?;
    let t = cfg.temperature;
    let star = beta_star_bound(size, t);
    let mut report = BoundsReport {
        schema: SCHEMA,
        n: size.side(),
        temperature: t,
        closed_form_beta1_bound: closed_form_beta1_bound(size, t),
        closed_form_log_gap: closed_form_log_gap(size, t),
        kappa_upper_bound: kappa_upper_bound(size, t),
        beta_min_bound: beta_min_bound(t),
        beta_star_bound: star,
        elevation_beta1_bound: elevation_beta1_bound(size, t),
        elevation_log_gap: elevation_log_gap(size, t),
        f: f_curve(t),
        g: g_curve(t),
        crossover_n: crossover_table(t),
        exact: None,
        flags: BoundsFlags {
            beta_star_chain_holds: star.chain_holds,
            printed_partition_log_bound: printed_partition_log_bound(size, t),
            printed_partition_bound_violated: None,
        },
        verdicts: Vec::new(),
    };
    if cfg.formulas_only {
        return Ok(report);
    }

    size.check_enumerable(cfg.ceiling.min(DENSE_MAX_STATES))?;
    let kernel = TransitionKernel::build(size, t, cfg.ceiling)?;
    let loads = accumulate_edge_loads(&kernel)?;
    let kappa = kappa_exact(&kernel, &loads);
    let spectrum = exact_spectrum(&kernel)?;
    let checks = class_edge_bound_checks(kernel.measure(), &kappa);

    let log_z = kernel.measure().log_partition_function();
    report.flags.printed_partition_bound_violated =
        Some(log_z > report.flags.printed_partition_log_bound);
    report.verdicts = sandwich_verdicts(size, t, &kappa, &spectrum)?;
    report.verdicts.extend(class_bound_verdicts(&checks));
    report.exact = Some(ExactQuantities {
        kappa: kappa.kappa,
        kappa_argmax: EdgeRef::from(&kappa.argmax),
        kappa_per_class: kappa.per_class.clone(),
        kappa_bound: kappa_beta1_bound(kappa.kappa)?,
        beta1: spectrum.beta1,
        beta_min: spectrum.beta_min,
        beta_star: spectrum.beta_star,
        log_partition_function: log_z,
        class_bounds: checks,
    });
    Ok(report)
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<Artifacts> {
    let report = bounds_report(cfg)?;
    let json = to_json(&report)?;
    Ok(Artifacts {
        stdout: json.clone(),
        files: vec![("bounds.json".into(), json)],
        exit_code: if report.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        },
    })
}

// ----------------------------------------------------------------- compare

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    #[serde(rename = "T")]
    pub temperature: Temperature,
    pub f: f64,
    pub g: f64,
    pub closed_form_gap: Vec<f64>,
    pub elevation_gap: Vec<f64>,
    pub closed_form_log_gap: Vec<f64>,
    pub elevation_log_gap: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub schema: u32,
    pub sizes: Vec<u32>,
    pub rows: Vec<CompareRow>,
    /// `f >= g` on every row.
    pub f_dominates_g: bool,
}

impl CompareReport {
    /// `T,f,g,closed_form_gap_n..,elevation_gap_n..,closed_form_log_gap_n..,elevation_log_gap_n..`.
    pub fn csv(&self) -> String {
        let mut out = String::from("T,f,g");
        for prefix in [
            "closed_form_gap",
            "elevation_gap",
            "closed_form_log_gap",
            "elevation_log_gap",
        ] {
            for n in &self.sizes {
                let _ = write!(out, ",{prefix}_n{n}");
            }
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{:.16e},{:.16e}", r.temperature, r.f, r.g);
            for col in [
                &r.closed_form_gap,
                &r.elevation_gap,
                &r.closed_form_log_gap,
                &r.elevation_log_gap,
            ] {
                for v in col {
                    let _ = write!(out, ",{v:.16e}");
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn compare_report(grid: &[Temperature], sizes: &[u32]) -> Result<CompareReport> {
    if grid.is_empty() {
        return Err(Error::Usage("temperature grid is empty".into()));
    }
    if sizes.is_empty() {
        return Err(Error::Usage("lattice size list is empty".into()));
    }
    let sizes_checked: Vec<LatticeSize> = sizes
        .iter()
        .map(|&n| LatticeSize::new(n))
        .collect::<Result<_>>()?;
    let rows: Vec<CompareRow> = grid
        .iter()
        .map(|&t| {
            let closed: Vec<f64> = sizes_checked
                .iter()
                .map(|&s| closed_form_log_gap(s, t))
                .collect();
            let ing: Vec<f64> = sizes_checked
                .iter()
                .map(|&s| elevation_log_gap(s, t))
                .collect();
            CompareRow {
                temperature: t,
                f: f_curve(t),
                g: g_curve(t),
                closed_form_gap: closed.iter().map(|v| v.exp()).collect(),
                elevation_gap: ing.iter().map(|v| v.exp()).collect(),
                closed_form_log_gap: closed,
                elevation_log_gap: ing,
            }
        })
        .collect();
    let f_dominates_g = rows.iter().all(|r| r.f >= r.g);
    Ok(CompareReport {
        schema: SCHEMA,
        sizes: sizes.to_vec(),
        rows,
        f_dominates_g,
    })
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<Artifacts> {
    let report = compare_report(&cfg.grid, &cfg.sizes)?;
    let csv = report.csv();
    let json = to_json(&report)?;
    Ok(Artifacts {
        stdout: match cfg.format {
            Format::Csv => csv.clone(),
            Format::Json => json.clone(),
        },
        files: vec![("compare.csv".into(), csv), ("compare.json".into(), json)],
        exit_code: if report.f_dominates_g {
            EXIT_PASS
        } else {
            EXIT_FAIL
        },
    })
}

// ------------------------------------------------------------------ verify

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub n: u32,
    #[serde(rename = "T")]
    pub temperature: Temperature,
    pub horizon: usize,
    pub seed: u64,
    pub samples: usize,
    pub verdicts: Vec<Verdict>,
    pub decay: DecayReport,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        all_pass(&self.verdicts)
    }
}

/// Worst relative gap between the class-wise closed forms and the generic conditional ratio.
pub fn closed_form_flip_error(kernel: &TransitionKernel) -> f64 {
    let size = kernel.size();
    let t = kernel.temperature();
    (0..kernel.num_edges())
        .map(|i| {
            let e = DirectedEdge::from_index(size, i);
            let closed = closed_form_flip_probability(&e, t) * size.sites() as f64;
            let generic = conditional_flip_probability_ratio(&e.minus(), e.site(), t);
            (closed - generic).abs() / generic
        })
        .fold(0.0, f64::max)
}

/// Path lengths against Hamming distance: exhaustive when `2^{2 n^2}` pairs are
/// cheap, otherwise `samples` seeded uniform pairs. Returns `(checked, mismatches)`.
pub fn path_length_check(size: LatticeSize, samples: usize, seed: u64) -> Result<(usize, usize)> {
    let states = size.check_enumerable(DENSE_MAX_STATES)?;
    let check = |x: u64, y: u64| -> Result<bool> {
        let xc = SpinConfiguration::from_index(size, x)?;
        let yc = SpinConfiguration::from_index(size, y)?;
        let path = canonical_path(&xc, &yc)?;
        Ok(path.len() as u32 == (x ^ y).count_ones() && path.to() == yc)
    };
    let (mut checked, mut bad) = (0usize, 0usize);
    if states <= 16 {
        for x in 0..states {
            for y in 0..states {
                checked += 1;
                bad += usize::from(!check(x, y)?);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let (x, y) = (rng.gen_range(0..states), rng.gen_range(0..states));
            checked += 1;
            bad += usize::from(!check(x, y)?);
        }
    }
    Ok((checked, bad))
}

pub fn verify_report(cfg: &RunConfig) -> Result<VerifyReport> {
    let size = cfg.size()?;
    size.check_enumerable(cfg.ceiling.min(DENSE_MAX_STATES))?;
    let t = cfg.temperature;
    let kernel = TransitionKernel::build(size, t, cfg.ceiling)?;
    let measure = kernel.measure();
    let mut v = Vec::new();

    v.push(Verdict::at_most(
        "normalization |sum pi - 1|",
        measure.normalization_error(),
        0.0,
        1e-12,
    ));
    let (row_err, min_entry) = kernel.row_sum_error();
    v.push(Verdict::at_most(
        "row sums |sum_y P(x,y) - 1|",
        row_err,
        0.0,
        1e-12,
    ));
    v.push(Verdict::at_most("entries nonnegative", 0.0, min_entry, 0.0));
    v.push(Verdict::at_most(
        "detailed balance (relative)",
        kernel.detailed_balance_error(),
        0.0,
        1e-12,
    ));
    v.push(Verdict::holds("irreducible", kernel.is_irreducible()));
    v.push(Verdict::at_most(
        "closed-form flip probabilities (relative)",
        closed_form_flip_error(&kernel),
        0.0,
        1e-14,
    ));
    let (flip_err, energies_match) = measure.flip_symmetry_error();
    v.push(Verdict::holds(
        "global flip preserves energy",
        energies_match,
    ));
    v.push(Verdict::at_most(
        "global flip preserves pi (relative)",
        flip_err,
        0.0,
        1e-12,
    ));

    let loads: EdgeLoadTable = accumulate_edge_loads(&kernel)?;
    let expected = 1u64 << (size.sites() - 1);
    let counts_ok = loads.counts().iter().all(|&c| c == expected);
    v.push(Verdict::holds(
        format!("every edge carries 2^{} paths", size.sites() - 1),
        counts_ok,
    ));
    let walked = accumulate_edge_loads_by_walking(&kernel)?;
    let (load_err, counts_equal) = loads.compare(&walked);
    v.push(Verdict::holds(
        "edge traversal counts match path walking",
        counts_equal,
    ));
    v.push(Verdict::at_most(
        "edge loads match path walking (relative)",
        load_err,
        0.0,
        1e-12,
    ));
    let (checked, bad) = path_length_check(size, cfg.samples, cfg.seed)?;
    v.push(Verdict::at_most(
        format!("path length = Hamming distance ({checked} pairs)"),
        bad as f64,
        0.0,
        0.0,
    ));

    for site in size.site_indices() {
        let mass = measure.up_mass(site);
        v.push(Verdict::close(
            format!("half mass at ({},{})", site.p(), site.q()),
            mass,
            0.5,
            1e-12,
        ));
        v.push(Verdict::at_most(
            format!("spin-flip pairing at ({},{})", site.p(), site.q()),
            spin_flip_pairing_error(measure, site),
            0.0,
            1e-12,
        ));
        if site.class() == SiteClass::Interior {
            let (lhs, rhs) = flip_symmetry_sides(measure, site);
            v.push(Verdict::at_most(
                format!("up/down symmetry at ({},{})", site.p(), site.q()),
                (lhs - rhs).abs() / lhs,
                0.0,
                1e-12,
            ));
        }
    }

    let kappa = kappa_exact(&kernel, &loads);
    let spectrum = exact_spectrum(&kernel)?;
    v.extend(sandwich_verdicts(size, t, &kappa, &spectrum)?);

    let decay = verify_tv_decay(&kernel, &spectrum, cfg.horizon)?;
    v.push(Verdict::at_most(
        format!(
            "decay with exact beta* ({} checks, squared form)",
            decay.checks
        ),
        0.0,
        decay.worst_margin_exact,
        0.0,
    ));
    v.push(Verdict::at_most(
        format!(
            "decay with closed-form beta* ({} checks, squared form)",
            decay.checks
        ),
        0.0,
        decay.worst_margin_closed_form,
        0.0,
    ));

    Ok(VerifyReport {
        schema: SCHEMA,
        n: size.side(),
        temperature: t,
        horizon: cfg.horizon,
        seed: cfg.seed,
        samples: cfg.samples,
        verdicts: v,
        decay,
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Artifacts> {
    let report = verify_report(cfg)?;
    let json = to_json(&report)?;
    let table = verdict_table(&report.verdicts);
    let mut tv = Vec::new();
    report.decay.write_csv(&mut tv)?;
    Ok(Artifacts {
        stdout: match cfg.format {
            Format::Json => json.clone(),
            Format::Csv => table.clone(),
        },
        files: vec![
            ("verify.json".into(), json),
            ("verify.txt".into(), table),
            ("tv_decay.csv".into(), String::from_utf8(tv).expect("ascii")),
        ],
        exit_code: if report.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        },
    })
}

// -------------------------------------------------------------------- dump

pub fn cmd_dump(cfg: &RunConfig) -> Result<Artifacts> {
    let size = cfg.size()?;
    let kernel = TransitionKernel::build(size, cfg.temperature, cfg.ceiling)?;
    let header = to_json(&kernel.dump_header())?;
    let mut csv = Vec::new();
    kernel.write_csv(&mut csv)?;
    let csv = String::from_utf8(csv).expect("ascii");
    let mut files = vec![
        ("kernel.json".into(), header.clone()),
        ("kernel.csv".into(), csv),
    ];
    if size.check_enumerable(DENSE_MAX_STATES).is_ok() {
        let mut loads = Vec::new();
        accumulate_edge_loads(&kernel)?.write_csv(&mut loads)?;
        files.push((
            "edge_loads.csv".into(),
            String::from_utf8(loads).expect("ascii"),
        ));
    }
    Ok(Artifacts {
        stdout: header,
        files,
        exit_code: EXIT_PASS,
    })
}
