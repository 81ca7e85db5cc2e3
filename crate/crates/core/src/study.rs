//! Parameter sweeps behind the command line, producing sorted CSV tables.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::expansion::{refined_expansion, taylor1, WeightKind};
use crate::fem::{default_constants, estimate_report, mesh_savings, EllipticProblem, Space};
use crate::field::{BoxDomain, ScalarField};
use crate::interp1d::{compare_bounds, interval_norms, Interval, ERROR_GRID};
use crate::registry::{class_p_field, lookup};
use crate::simplex::{interp_error_bounds, simplex_sup_norms, uniform_mesh, LocalInterpolant, Simplex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Expand,
    Interp1d,
    Simplex,
    Fem,
    Savings,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Expand => "expand",
            Command::Interp1d => "interp1d",
            Command::Simplex => "simplex",
            Command::Fem => "fem",
            Command::Savings => "savings",
        })
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expand" => Ok(Command::Expand),
            "interp1d" => Ok(Command::Interp1d),
            "simplex" => Ok(Command::Simplex),
            "fem" => Ok(Command::Fem),
            "savings" => Ok(Command::Savings),
            _ => Err(invalid(format!("unknown command `{s}`"))),
        }
    }
}

/// Everything a sweep depends on. Two runs with equal configs produce equal
/// tables.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyConfig {
    pub command: Command,
    pub function: String,
    pub m_values: Vec<usize>,
    pub subdivisions: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    /// Random draws per `m` in the expansion study.
    pub draws: usize,
    /// Random sample points per element in the simplex study.
    pub samples: usize,
    pub seed: u64,
    pub weights: WeightKind,
    pub dim: usize,
    pub space: Space,
    pub diffusion: f64,
    pub reaction: f64,
    /// `‖D²u‖∞` for the savings report; defaults to `π²`, the value for the
    /// manufactured sine solution.
    pub d2: Option<f64>,
    pub continuity: Option<f64>,
    pub ellipticity: Option<f64>,
}

impl StudyConfig {
    /// Defaults for `command`; the sweep lists depend on the command.
    pub fn defaults(command: Command) -> Self {
        let subdivisions = match command {
            Command::Fem => vec![8, 16, 32, 64, 128],
            Command::Simplex => vec![1, 2, 4, 8],
            _ => vec![1, 2, 4, 8, 16],
        };
        let function = match command {
            Command::Simplex => "quad2d",
            _ => "exp1d",
        };
        Self {
            command,
            function: function.into(),
            m_values: vec![1, 2, 4, 8],
            subdivisions,
            beta_values: vec![0.6, 0.75, 0.9, 1.0],
            eps_values: vec![1e-4],
            draws: 200,
            samples: 64,
            seed: 0,
            weights: WeightKind::Closed,
            dim: if command == Command::Savings { 3 } else { 1 },
            space: Space::P1,
            diffusion: 1.0,
            reaction: 0.0,
            d2: None,
            continuity: None,
            ellipticity: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = |name: &str, len: usize| if len == 0 { Err(invalid(format!("{name} must not be empty"))) } else { Ok(()) };
        match self.command {
            Command::Expand => {
                nonempty("m values", self.m_values.len())?;
                if self.m_values.contains(&0) {
                    return Err(invalid("m values must be positive"));
                }
                if self.draws == 0 {
                    return Err(invalid("draws must be positive"));
                }
            }
            Command::Interp1d | Command::Simplex | Command::Fem => {
                nonempty("subdivisions", self.subdivisions.len())?;
                if self.subdivisions.contains(&0) {
                    return Err(invalid("subdivisions must be positive"));
                }
                if self.function == "classP" {
                    nonempty("beta values", self.beta_values.len())?;
                }
            }
            Command::Savings => {
                nonempty("eps values", self.eps_values.len())?;
                if self.dim == 0 {
                    return Err(invalid("dimension must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Header plus numeric rows, kept sorted by the leading columns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Sorts rows lexicographically, the sweep variable being the first column.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Comma separated, header first, every number as `{:.11e}` (12
    /// significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.11e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyOutput {
    pub table: ConvergenceTable,
    /// Human-readable description of each bound the measurements exceeded.
    pub violations: Vec<String>,
    /// Derived scalars such as fitted slopes.
    pub summary: BTreeMap<String, f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = pts.iter().map(|(a, _)| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    let mut out = match cfg.command {
        Command::Expand => expand_study(cfg)?,
        Command::Interp1d if cfg.function == "classP" => class_p_study(cfg)?,
        Command::Interp1d => interp1d_study(cfg)?,
        Command::Simplex => simplex_study(cfg)?,
        Command::Fem => fem_study(cfg)?,
        Command::Savings => savings_study(cfg)?,
    };
    out.table.sort();
    if !out.table.all_finite() {
        return Err(Error::Inconsistency("study produced non-finite values".into()));
    }
    Ok(out)
}

fn point_in(domain: &BoxDomain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    domain.lo.iter().zip(&domain.hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect()
}

/// Refined remainder against its band, plus the band-width ratio to the
/// plain Taylor remainder, for random segments inside the function's box.
fn expand_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    let (f, entry) = lookup(&cfg.function)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let segments: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.draws)
        .map(|_| {
            let a = point_in(&entry.domain, &mut rng);
            let b = point_in(&entry.domain, &mut rng);
            let h = b.iter().zip(&a).map(|(x, y)| x - y).collect();
            (a, h)
        })
        .collect();
    let jobs: Vec<(usize, usize)> = cfg.m_values.iter().flat_map(|&m| (0..cfg.draws).map(move |d| (m, d))).collect();
    let results: Vec<Result<(Vec<f64>, Option<String>)>> = jobs
        .par_iter()
        .map(|&(m, d)| {
            let (a, h) = &segments[d];
            let refined = refined_expansion(f.as_ref(), a, h, m, cfg.weights, None)?;
            let plain = taylor1(f.as_ref(), a, h, refined.bounds)?;
            let ratio = if plain.width() > 0.0 { refined.width() / plain.width() } else { 0.0 };
            let tol = 1e-12 * (1.0 + refined.exact.abs() + refined.approx.abs()) / refined.h_norm.max(f64::MIN_POSITIVE);
            let violation = (refined.certified() && !refined.within_bounds(tol)).then(|| {
                format!("m={m} draw={d}: remainder {:e} outside [{:e}, {:e}]", refined.remainder_eps, refined.bound_lo, refined.bound_hi)
            });
            Ok((
                vec![m as f64, d as f64, refined.h_norm, refined.remainder_eps, refined.bound_lo, refined.bound_hi, plain.width(), refined.width(), ratio],
                violation,
            ))
        })
        .collect();
    let mut table = ConvergenceTable::new(&["m", "draw", "h_norm", "remainder", "bound_lo", "bound_hi", "width_classical", "width_refined", "ratio"]);
    let mut violations = Vec::new();
    for r in results {
        let (row, v) = r?;
        table.push(row);
        violations.extend(v);
    }
    Ok(StudyOutput { table, violations, summary: BTreeMap::new() })
}

struct CellErrors {
    measured_pi: f64,
    measured_pi_star: f64,
    classical: f64,
    refined: f64,
    corrected: f64,
}

fn interval_cell(f: &dyn ScalarField, iv: Interval) -> Result<CellErrors> {
    let norms = interval_norms(f, iv);
    let cmp = compare_bounds(f, iv, norms, ERROR_GRID)?;
    let s = Simplex::new(vec![vec![iv.a], vec![iv.b]])?;
    let local = LocalInterpolant::sample(&s, f);
    let measured_pi_star = iv
        .grid(ERROR_GRID)
        .map(|x| {
            let l = s.barycentric(&[x]).lambdas;
            (local.pi_star(&s, &[x], &l) - f.value(&[x])).abs()
        })
        .fold(0.0, f64::max);
    let corrected = norms.d2 * iv.length() * iv.length() / 4.0;
    Ok(CellErrors { measured_pi: cmp.measured_sup_error, measured_pi_star, classical: cmp.classical, refined: cmp.refined, corrected })
}

fn cell_violations(label: &str, c: &CellErrors) -> Vec<String> {
    let slack = |b: f64| b * (1.0 + 1e-12) + 1e-14;
    let mut v = Vec::new();
    if c.measured_pi > slack(c.classical.min(c.refined)) {
        v.push(format!("{label}: |pi - f| = {:e} exceeds min bound {:e}", c.measured_pi, c.classical.min(c.refined)));
    }
    if c.measured_pi_star > slack(c.corrected) {
        v.push(format!("{label}: |pi* - f| = {:e} exceeds corrected bound {:e}", c.measured_pi_star, c.corrected));
    }
    v
}

/// Interpolation errors on `k` equal cells of the function's interval.
fn interp1d_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    let (f, entry) = lookup(&cfg.function)?;
    if entry.dim != 1 {
        return Err(invalid(format!("`{}` is {}D; interp1d needs a 1D function", entry.name, entry.dim)));
    }
    let (a, b) = (entry.domain.lo[0], entry.domain.hi[0]);
    let rows: Vec<Result<(Vec<f64>, Vec<String>)>> = cfg
        .subdivisions
        .par_iter()
        .map(|&k| {
            let width = (b - a) / k as f64;
            let mut agg = CellErrors { measured_pi: 0.0, measured_pi_star: 0.0, classical: 0.0, refined: 0.0, corrected: 0.0 };
            let mut violations = Vec::new();
            for j in 0..k {
                let hi = if j + 1 == k { b } else { a + width * (j + 1) as f64 };
                let c = interval_cell(f.as_ref(), Interval::new(a + width * j as f64, hi)?)?;
                violations.extend(cell_violations(&format!("k={k} cell={j}"), &c));
                agg.measured_pi = agg.measured_pi.max(c.measured_pi);
                agg.measured_pi_star = agg.measured_pi_star.max(c.measured_pi_star);
                agg.classical = agg.classical.max(c.classical);
                agg.refined = agg.refined.max(c.refined);
                agg.corrected = agg.corrected.max(c.corrected);
            }
            let ratio = agg.refined / agg.classical;
            Ok((vec![width, agg.measured_pi, agg.measured_pi_star, agg.classical, agg.refined, agg.corrected, ratio], violations))
        })
        .collect();
    collect_rows(&["h", "measured", "measured_corrected", "bound_classical", "bound_refined", "bound_corrected", "ratio"], rows, BTreeMap::new())
}

/// Class (P) members on `[0, 1]` for each requested `β`; the ratio column
/// must not exceed `β`.
fn class_p_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    let rows: Vec<Result<(Vec<f64>, Vec<String>)>> = cfg
        .beta_values
        .par_iter()
        .map(|&beta| {
            let f = class_p_field(beta)?;
            let c = interval_cell(&f, Interval::new(0.0, 1.0)?)?;
            let ratio = c.refined / c.classical;
            let mut violations = cell_violations(&format!("beta={beta}"), &c);
            if ratio > beta + 1e-12 {
                violations.push(format!("beta={beta}: refined/classical = {ratio} exceeds beta"));
            }
            Ok((vec![beta, c.measured_pi, c.measured_pi_star, c.classical, c.refined, c.corrected, ratio], violations))
        })
        .collect();
    collect_rows(&["beta", "measured", "measured_corrected", "bound_classical", "bound_refined", "bound_corrected", "ratio"], rows, BTreeMap::new())
}

/// Random barycentric points, uniform on the reference simplex.
fn barycentric_samples(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let e: Vec<f64> = (0..=n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            e.iter().map(|x| x / s).collect()
        })
        .collect()
}

/// `π` and `π*` errors on every simplex of a uniform mesh of the function's box.
fn simplex_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    let (f, entry) = lookup(&cfg.function)?;
    let n = entry.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = barycentric_samples(n, cfg.samples, &mut rng);
    samples.push(vec![1.0 / (n + 1) as f64; n + 1]);
    let mut rows = Vec::new();
    for &k in &cfg.subdivisions {
        let mesh = uniform_mesh(&entry.domain, k)?;
        let per_element: Vec<Result<(CellErrors, Vec<String>)>> = mesh
            .simplices()
            .par_iter()
            .enumerate()
            .map(|(e, s)| {
                let bounds = interp_error_bounds(s, simplex_sup_norms(s, f.as_ref()))?;
                let local = LocalInterpolant::sample(s, f.as_ref());
                let (mut pi_err, mut star_err) = (0.0f64, 0.0f64);
                for l in &samples {
                    let p = s.point_at(l);
                    let v = f.value(&p);
                    pi_err = pi_err.max((local.pi(l) - v).abs());
                    star_err = star_err.max((local.pi_star(s, &p, l) - v).abs());
                }
                let c = CellErrors { measured_pi: pi_err, measured_pi_star: star_err, classical: bounds.classical, refined: bounds.refined, corrected: bounds.corrected };
                let v = cell_violations(&format!("k={k} element={e}"), &c);
                Ok((c, v))
            })
            .collect();
        let mut agg = CellErrors { measured_pi: 0.0, measured_pi_star: 0.0, classical: 0.0, refined: 0.0, corrected: 0.0 };
        let mut violations = Vec::new();
        for r in per_element {
            let (c, v) = r?;
            violations.extend(v);
            agg.measured_pi = agg.measured_pi.max(c.measured_pi);
            agg.measured_pi_star = agg.measured_pi_star.max(c.measured_pi_star);
            agg.classical = agg.classical.max(c.classical);
            agg.refined = agg.refined.max(c.refined);
            agg.corrected = agg.corrected.max(c.corrected);
        }
        let ratio = agg.refined / agg.classical;
        rows.push(Ok((vec![mesh.mesh_size(), agg.measured_pi, agg.measured_pi_star, agg.classical, agg.refined, agg.corrected, ratio], violations)));
    }
    collect_rows(&["h", "measured", "measured_corrected", "bound_classical", "bound_refined", "bound_corrected", "ratio"], rows, BTreeMap::new())
}

/// Manufactured sine problem on uniform meshes of the unit box.
fn fem_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    let problem = EllipticProblem::manufactured_sine(cfg.dim, cfg.diffusion, cfg.reaction)?;
    let problem = match (cfg.continuity, cfg.ellipticity) {
        (None, None) => problem,
        (c, a) => {
            let k = problem.constants;
            let constants = crate::fem::FormConstants::new(c.unwrap_or(k.continuity), a.unwrap_or(k.ellipticity))?;
            problem.with_constants(constants)
        }
    };
    let domain = BoxDomain::unit(cfg.dim);
    let rows: Vec<Result<(Vec<f64>, Vec<String>)>> = cfg
        .subdivisions
        .par_iter()
        .map(|&k| {
            let r = estimate_report(&problem, &uniform_mesh(&domain, k)?, cfg.space)?;
            let mut violations = Vec::new();
            if !r.interp_within_bound() {
                violations.push(format!("k={k}: interpolation error {:e} exceeds bound {:e}", r.measured_interp_error, r.interp_bound()));
            }
            let chain = r.c_over_alpha * r.measured_interp_error;
            if r.measured_solution_error > chain {
                violations.push(format!("k={k}: ‖u-u_h‖ = {:e} exceeds (C/α)‖u-π u‖ = {chain:e}", r.measured_solution_error));
            }
            if r.measured_solution_error > r.cea_rhs() {
                violations.push(format!("k={k}: ‖u-u_h‖ = {:e} exceeds the a priori bound {:e}", r.measured_solution_error, r.cea_rhs()));
            }
            let row = vec![
                r.h,
                r.dofs as f64,
                r.measured_solution_error,
                r.measured_interp_error,
                r.h1_semi_error,
                r.cea_rhs_classical,
                r.cea_rhs_refined,
                r.cea_rhs_corrected,
                r.measured_solution_error / r.cea_rhs(),
            ];
            Ok((row, violations))
        })
        .collect();
    let header = ["h", "dofs", "measured", "interp_error", "h1_semi_error", "bound_classical", "bound_refined", "bound_corrected", "ratio"];
    let mut out = collect_rows(&header, rows, BTreeMap::new())?;
    if out.table.rows.len() >= 2 {
        let h = out.table.column("h").unwrap_or_default();
        out.summary.insert("l2_slope".into(), loglog_slope(&h, &out.table.column("measured").unwrap_or_default()));
        out.summary.insert("interp_slope".into(), loglog_slope(&h, &out.table.column("interp_error").unwrap_or_default()));
    }
    out.summary.insert("continuity".into(), problem.constants.continuity);
    out.summary.insert("ellipticity".into(), problem.constants.ellipticity);
    Ok(out)
}

/// Coarsening allowed by the corrected interpolant for each target `ε`.
fn savings_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    let defaults = default_constants(&BoxDomain::unit(cfg.dim), cfg.diffusion, cfg.reaction);
    let c = cfg.continuity.unwrap_or(defaults.continuity);
    let alpha = cfg.ellipticity.unwrap_or(defaults.ellipticity);
    let d2 = cfg.d2.unwrap_or(std::f64::consts::PI * std::f64::consts::PI);
    let mut table = ConvergenceTable::new(&["eps", "dim", "h_classical", "h_corrected", "ratio", "node_factor"]);
    for &eps in &cfg.eps_values {
        let s = mesh_savings(eps, d2, c, alpha, cfg.dim)?;
        table.push(vec![eps, cfg.dim as f64, s.h_classical, s.h_corrected, s.ratio, s.node_factor]);
    }
    let summary = BTreeMap::from([("continuity".to_string(), c), ("ellipticity".to_string(), alpha), ("d2".to_string(), d2)]);
    Ok(StudyOutput { table, violations: Vec::new(), summary })
}

fn collect_rows(header: &[&str], rows: Vec<Result<(Vec<f64>, Vec<String>)>>, summary: BTreeMap<String, f64>) -> Result<StudyOutput> {
    let mut table = ConvergenceTable::new(header);
    let mut violations = Vec::new();
    for r in rows {
        let (row, v) = r?;
        table.push(row);
        violations.extend(v);
    }
    Ok(StudyOutput { table, violations, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format_and_sorting() {
        let mut t = ConvergenceTable::new(&["m", "x"]);
        t.push(vec![2.0, 0.5]);
        t.push(vec![1.0, -1.25e-7]);
        t.sort();
        assert_eq!(t.to_csv(), "m,x\n1.00000000000e0,-1.25000000000e-7\n2.00000000000e0,5.00000000000e-1\n");
        assert!(t.all_finite());
        t.push(vec![f64::NAN, 0.0]);
        assert!(!t.all_finite());
    }

    #[test]
    fn expand_width_scales_as_one_over_m() {
        let mut cfg = StudyConfig::defaults(Command::Expand);
        cfg.draws = 20;
        let out = run_study(&cfg).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        for row in &out.table.rows {
            assert!((row[8] - 1.0 / (2.0 * row[0])).abs() < 1e-14);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut cfg = StudyConfig::defaults(Command::Simplex);
        cfg.subdivisions = vec![1, 2];
        cfg.samples = 16;
        let a = run_study(&cfg).unwrap().table.to_csv();
        let b = run_study(&cfg).unwrap().table.to_csv();
        assert_eq!(a, b);
        cfg.seed = 7;
        assert_ne!(a, run_study(&cfg).unwrap().table.to_csv());
    }

    #[test]
    fn class_p_sweep_respects_beta() {
        let mut cfg = StudyConfig::defaults(Command::Interp1d);
        cfg.function = "classP".into();
        let out = run_study(&cfg).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        assert_eq!(out.table.rows.len(), 4);
    }

    #[test]
    fn savings_default_is_three_dimensional() {
        let out = run_study(&StudyConfig::defaults(Command::Savings)).unwrap();
        let row = &out.table.rows[0];
        assert!((row[5] - 0.5f64.powf(1.5)).abs() < 1e-15);
        assert!((row[4] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_lists_rejected() {
        let mut cfg = StudyConfig::defaults(Command::Expand);
        cfg.m_values.clear();
        assert!(run_study(&cfg).is_err());
        let mut cfg = StudyConfig::defaults(Command::Fem);
        cfg.subdivisions = vec![0];
        assert!(run_study(&cfg).is_err());
    }
}
