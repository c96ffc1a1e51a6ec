//! The five experiments. Each returns its tables and assertions in memory;
//! writing them out is the caller's concern.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use hessiancone::arrowhead::{deflation_sweep, sweep, Bound, DEFLATION_CSV_HEADER, SWEEP_CSV_HEADER};
use hessiancone::cone::suite::{check_ray, gap_distribution, structure_checks, CHECK_CSV_HEADER, GAP_CSV_HEADER};
use hessiancone::cone::{delta_nondegeneracy, Kind, SymmetricFunction};
use hessiancone::solver::{
    continuity_solve, degenerate_sweep, field_csv, manufactured_problem, parse_chi,
    scaled_boundary_problem, strictness, tangential_gap, trivial_problem, write_raw, Expr, GridGeometry,
    HermitianFormField, Problem, ScalarField, SolveConfig, SolveReport, DEGENERATE_CSV_HEADER, REPORT_CSV_HEADER,
};

use crate::config::{BoundaryScalingConfig, ConeCheckConfig, DegenerateConfig, LemmaSweepConfig, SolveSection};
use crate::output::{Outcome, OutputFile};

/// `sup |u|` accepted for the trivial preset.
pub const TRIVIAL_SUP_TOL: f64 = 1e-8;

fn parse_bound(name: &str) -> Result<Bound> {
    Bound::ALL
        .into_iter()
        .find(|b| b.name() == name)
        .ok_or_else(|| anyhow!("unknown bound {name:?} (expected strong, weak or distinct)"))
}

pub fn function(kind: &str, n: usize) -> Result<SymmetricFunction> {
    let kind: Kind = kind.parse()?;
    Ok(SymmetricFunction::new(kind, n)?)
}

/// Parses `kind/n`.
fn function_entry(entry: &str) -> Result<SymmetricFunction> {
    let (kind, n) = entry
        .rsplit_once('/')
        .ok_or_else(|| anyhow!("function entry {entry:?} is not of the form kind/n"))?;
    function(kind, n.parse().with_context(|| format!("dimension in {entry:?}"))?)
}

/// Concentration sweeps for each bound and the deflation check.
pub fn lemma_sweep(cfg: &LemmaSweepConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    for name in &cfg.bounds {
        let bound = parse_bound(name)?;
        let mut rows = Vec::new();
        let (mut violations, mut specs, mut worst) = (0, 0, 0.0f64);
        if cfg.trials > 0 {
            for &n in &cfg.dims {
                for &eps in &cfg.eps {
                    let s = sweep(bound, n, eps, cfg.corner_fraction, cfg.trials, seed)?;
                    violations += s.violations;
                    specs += s.trials;
                    worst = worst.max(s.max_dev);
                    rows.push(s.csv_row());
                }
            }
        }
        out.files
            .push(OutputFile::csv(format!("lemma_sweep_{}.csv", bound.name()), SWEEP_CSV_HEADER, rows));
        if cfg.corner_fraction >= 1.0 {
            out.assert(
                format!("{}_bound", bound.name()),
                violations == 0,
                format!("violations={violations} specs={specs} max_dev={worst:.6e}"),
            );
        }
    }
    let mut rows = Vec::new();
    for &n in &cfg.deflation_dims {
        let (worst, failures) = deflation_sweep(n, cfg.deflation_trials, seed)?;
        rows.push(format!("{n},{},{worst:.6e},{failures}", cfg.deflation_trials));
        out.assert(
            format!("deflation_n{n}"),
            failures == 0,
            format!("failures={failures} max_mismatch={worst:.6e}"),
        );
    }
    out.files.push(OutputFile::csv("deflation.csv", DEFLATION_CSV_HEADER, rows));
    Ok(out)
}

/// Structural checks, the ray property and the gap distribution for every
/// configured function.
pub fn cone_check(cfg: &ConeCheckConfig, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut check_rows = Vec::new();
    let mut gap_rows = Vec::new();
    for entry in &cfg.functions {
        let fun = function_entry(entry)?;
        let mut checks = structure_checks(&fun, cfg.samples, seed)?;
        checks.push(check_ray(&fun, cfg.ray_samples, seed)?);
        for c in &checks {
            check_rows.push(c.csv_row(&fun));
            out.assert(
                format!("{entry}:{}", c.name),
                c.passed(),
                format!("failures={} samples={} worst={:.6e}", c.failures, c.samples, c.worst),
            );
        }
        let gap = gap_distribution(&fun, cfg.gap_samples, seed)?;
        gap_rows.push(gap.csv_row(&fun));
        out.assert(
            format!("{entry}:subsolution_gap"),
            gap.failures == 0,
            format!("failures={} near={} far={} eps_min={:.6e}", gap.failures, gap.near, gap.far, gap.eps_min()),
        );
    }
    out.files.push(OutputFile::csv("cone_checks.csv", CHECK_CSV_HEADER, check_rows));
    out.files.push(OutputFile::csv("cone_gap.csv", GAP_CSV_HEADER, gap_rows));
    Ok(out)
}

pub const SOLVE_REPORT_PREFIX: &str = "preset,kind,resolution";
pub const ERROR_CSV_HEADER: &str = "kind,resolution,h,sup_error,order";

/// One solve of a study.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub kind: String,
    pub resolution: usize,
    pub u: ScalarField,
    pub report: SolveReport,
    /// `sup |u - u*|` when an exact solution is known.
    pub error: Option<f64>,
}

/// Observed orders `log2(e_coarse / e_fine) / log2(N_fine / N_coarse)`
/// between consecutive resolutions of one kind.
pub fn observed_orders(runs: &[SolveRun]) -> Vec<(String, usize, f64)> {
    runs.windows(2)
        .filter(|w| w[0].kind == w[1].kind)
        .filter_map(|w| {
            let (e0, e1) = (w[0].error?, w[1].error?);
            let ratio = w[1].resolution as f64 / w[0].resolution as f64;
            Some((w[1].kind.clone(), w[1].resolution, (e0 / e1).ln() / ratio.ln()))
        })
        .collect()
}

fn geometry_for(sec: &SolveSection, resolution: usize) -> Result<Arc<GridGeometry>> {
    Ok(if sec.preset == "riemannian" {
        GridGeometry::real(sec.real_dim, resolution)?
    } else {
        GridGeometry::complex(sec.n, resolution)?
    })
}

fn custom_problem(sec: &SolveSection, geom: &Arc<GridGeometry>, fun: SymmetricFunction) -> Result<Problem> {
    let chi = HermitianFormField::constant(geom, &parse_chi(&sec.chi, geom.form_dim())?)?;
    Ok(Problem {
        fun,
        chi,
        psi: Expr::parse(&sec.psi, geom)?.sample(geom),
        phi: Expr::parse(&sec.phi, geom)?.sample(geom),
        subsolution: Expr::parse(&sec.subsolution, geom)?.sample(geom),
    })
}

/// Runs the configured preset for every kind and resolution.
pub fn solve_runs(sec: &SolveSection, config: &SolveConfig) -> Result<Vec<SolveRun>> {
    if !matches!(sec.preset.as_str(), "trivial" | "manufactured" | "riemannian" | "custom") {
        bail!("unknown preset {:?} (expected trivial, manufactured, riemannian or custom)", sec.preset);
    }
    let mut runs = Vec::new();
    for kind in &sec.kinds {
        for &res in &sec.resolutions {
            let geom = geometry_for(sec, res)?;
            let fun = function(kind, geom.form_dim())?;
            let (problem, exact) = match sec.preset.as_str() {
                "trivial" => (trivial_problem(&geom, fun)?, None),
                "custom" => (custom_problem(sec, &geom, fun)?, None),
                _ => {
                    let (p, e) = manufactured_problem(&geom, fun, sec.amplitude, sec.bowl)?;
                    (p, Some(e))
                }
            };
            let (u, mut report) = continuity_solve(&problem, config)
                .with_context(|| format!("{} solve, kind {kind}, resolution {res}", sec.preset))?;
            if sec.preset == "riemannian" {
                report.tangential_gap = Some(tangential_gap(&problem, &u)?);
            }
            let error = exact.map(|e| u.max_difference(&e));
            runs.push(SolveRun {
                kind: kind.clone(),
                resolution: res,
                u,
                report,
                error,
            });
        }
    }
    Ok(runs)
}

fn file_tag(kind: &str) -> String {
    kind.replace(':', "-")
}

/// Report and error tables, optional field dumps and the preset's assertions.
pub fn solve(sec: &SolveSection, config: &SolveConfig) -> Result<Outcome> {
    let runs = solve_runs(sec, config)?;
    let mut out = Outcome::default();
    let preset = sec.preset.as_str();
    for run in &runs {
        let tag = format!("{}@{}", run.kind, run.resolution);
        let r = &run.report;
        let h = 1.0 / run.resolution as f64;
        out.assert(
            format!("{tag}:comparison"),
            r.comparison_violations == 0,
            format!("violations={}", r.comparison_violations),
        );
        match preset {
            "trivial" => {
                out.assert(
                    format!("{tag}:residual"),
                    r.final_residual <= config.tolerance,
                    format!("residual={:.3e}", r.final_residual),
                );
                out.assert(
                    format!("{tag}:sup_u"),
                    r.sup_u <= TRIVIAL_SUP_TOL,
                    format!("sup_u={:.3e}", r.sup_u),
                );
            }
            "manufactured" | "riemannian" => {
                let red = r.last_step_reductions();
                let tail = &red[red.len().saturating_sub(2)..];
                out.assert(
                    format!("{tag}:newton_reduction"),
                    tail.iter().all(|&q| q >= sec.newton_reduction),
                    format!(
                        "last_reductions=[{}]",
                        tail.iter().map(|q| format!("{q:.3e}")).collect::<Vec<_>>().join(" ")
                    ),
                );
            }
            _ => {}
        }
        if let Some(gap) = r.tangential_gap {
            let tol = 10.0 * h * h;
            out.assert(
                format!("{tag}:tangential"),
                gap >= -tol,
                format!("gap={gap:.3e} tolerance={tol:.3e}"),
            );
        }
        if sec.dump {
            let name = format!("u_{}_{}", file_tag(&run.kind), run.resolution);
            out.files.push(OutputFile::raw(format!("{name}.raw"), write_raw(&run.u)));
            let text = field_csv(&run.u);
            let (header, body) = text.split_once('\n').unwrap_or((&text, ""));
            out.files.push(OutputFile::csv(
                format!("{name}.csv"),
                header,
                body.lines().map(str::to_string),
            ));
        }
    }
    let orders = observed_orders(&runs);
    for (kind, res, order) in &orders {
        let [lo, hi] = sec.order_range;
        out.assert(
            format!("{kind}@{res}:order"),
            (lo..=hi).contains(order),
            format!("order={order:.4} range=[{lo}, {hi}]"),
        );
    }
    out.files.push(OutputFile::csv(
        "solve_report.csv",
        &format!("{SOLVE_REPORT_PREFIX},{REPORT_CSV_HEADER}"),
        runs.iter()
            .map(|r| format!("{preset},{},{},{}", r.kind, r.resolution, r.report.csv_row())),
    ));
    if runs.iter().any(|r| r.error.is_some()) {
        out.files.push(OutputFile::csv(
            "solve_errors.csv",
            ERROR_CSV_HEADER,
            runs.iter().map(|r| {
                let order = orders
                    .iter()
                    .find(|(k, n, _)| *k == r.kind && *n == r.resolution)
                    .map(|o| format!("{:.6}", o.2))
                    .unwrap_or_default();
                format!(
                    "{},{},{},{:.12e},{order}",
                    r.kind,
                    r.resolution,
                    1.0 / r.resolution as f64,
                    r.error.unwrap_or(f64::NAN)
                )
            }),
        ));
    }
    Ok(out)
}

pub const SCALING_CSV_HEADER: &str = "s,K,sup_grad,hess_boundary,ratio,final_residual,comparison_violations";

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub s: f64,
    pub k: f64,
    pub report: SolveReport,
}

impl ScalingRow {
    pub fn csv_row(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{:.12e},{:.12e},{:.12e},{:.6e},{}",
            self.s,
            self.k,
            r.sup_grad(),
            r.hess_boundary,
            r.boundary_ratio,
            r.final_residual,
            r.comparison_violations
        )
    }
}

pub fn scaling_rows(cfg: &BoundaryScalingConfig, config: &SolveConfig) -> Result<Vec<ScalingRow>> {
    let geom = GridGeometry::complex(cfg.n, cfg.resolution)?;
    let fun = function(&cfg.kind, geom.form_dim())?;
    let phi0 = Expr::parse(&cfg.phi0, &geom)?;
    cfg.scales
        .iter()
        .map(|&s| {
            let (problem, k) = scaled_boundary_problem(&geom, fun, &phi0, cfg.psi, s, cfg.k0)?;
            let (_, report) = continuity_solve(&problem, config).with_context(|| format!("scaling solve s = {s}"))?;
            Ok(ScalingRow { s, k, report })
        })
        .collect()
}

/// Boundary-estimate ratios along `phi = s phi0`.
pub fn boundary_scaling(cfg: &BoundaryScalingConfig, config: &SolveConfig) -> Result<Outcome> {
    let rows = scaling_rows(cfg, config)?;
    let mut out = Outcome::default();
    let ratios: Vec<f64> = rows.iter().filter(|r| r.s > 0.0).map(|r| r.report.boundary_ratio).collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let spread = hi / lo;
    out.assert(
        "ratio_spread",
        !ratios.is_empty() && lo > 0.0 && spread <= cfg.max_ratio_spread,
        format!("min={lo:.6e} max={hi:.6e} spread={spread:.4} bound={}", cfg.max_ratio_spread),
    );
    let mut by_s: Vec<&ScalingRow> = rows.iter().collect();
    by_s.sort_by(|a, b| a.s.total_cmp(&b.s));
    let monotone = by_s.windows(2).all(|w| w[1].report.sup_grad() >= w[0].report.sup_grad());
    out.assert("sup_grad_monotone", monotone, format!("rows={}", rows.len()));
    let violations: usize = rows.iter().map(|r| r.report.comparison_violations).sum();
    out.assert("comparison", violations == 0, format!("violations={violations}"));
    out.files.push(OutputFile::csv(
        "boundary_scaling.csv",
        SCALING_CSV_HEADER,
        rows.iter().map(ScalingRow::csv_row),
    ));
    Ok(out)
}

/// The degenerate problem `f(lambda(I + dd-bar u)) = psi` with
/// `u = phi + bowl:depth` as subsolution.
pub fn degenerate_problem(cfg: &DegenerateConfig) -> Result<Problem> {
    let geom = GridGeometry::complex(cfg.n, cfg.resolution)?;
    let fun = function(&cfg.kind, geom.form_dim())?;
    let phi = Expr::parse(&cfg.phi, &geom)?;
    let sub = phi.plus(&Expr::parse(&format!("bowl:{}", cfg.bowl), &geom)?);
    Ok(Problem {
        fun,
        chi: HermitianFormField::constant(&geom, &parse_chi("identity", geom.form_dim())?)?,
        psi: Expr::parse(&cfg.psi, &geom)?.sample(&geom),
        phi: phi.sample(&geom),
        subsolution: sub.sample(&geom),
    })
}

/// Approximating sweep `psi + eps` of a degenerate problem.
pub fn degenerate(cfg: &DegenerateConfig, config: &SolveConfig) -> Result<Outcome> {
    let problem = degenerate_problem(cfg)?;
    let delta = delta_nondegeneracy(&problem.fun, problem.psi.values());
    let delta0 = strictness(&problem)?;
    let rows = degenerate_sweep(&problem, &cfg.eps, config)?;
    let mut out = Outcome::default();
    out.assert("degenerate_psi", delta.abs() <= 1e-12, format!("delta={delta:.3e}"));
    out.assert(
        "strict_subsolution",
        delta0 >= cfg.min_strictness,
        format!("delta0={delta0:.6} bound={}", cfg.min_strictness),
    );
    let failed: Vec<String> = rows.iter().filter(|r| !r.converged).map(|r| r.eps.to_string()).collect();
    out.assert("all_converged", failed.is_empty(), format!("failed=[{}]", failed.join(" ")));
    let lap: Vec<f64> = rows.iter().filter(|r| r.converged).map(|r| r.sup_laplacian).collect();
    let (lo, hi) = lap.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    out.assert(
        "laplacian_spread",
        !lap.is_empty() && lo > 0.0 && hi / lo <= cfg.max_laplacian_spread,
        format!("min={lo:.6e} max={hi:.6e} bound={}", cfg.max_laplacian_spread),
    );
    out.files.push(OutputFile::csv(
        "degenerate.csv",
        DEGENERATE_CSV_HEADER,
        rows.iter().map(|r| r.csv_row()),
    ));
    Ok(out)
}
