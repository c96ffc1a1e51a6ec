//! Randomized property suite for one symmetric function.
//!
//! Sample `k` of every check draws from its own ChaCha8 stream keyed by the
//! seed, so results do not depend on how samples are split across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    check_concavity, euler_positivity, fi_sum_bound_slack, ray_intersect, sample_cone_point, sample_level_point,
    subsolution_gap, ConeError, GapBranch, Lambda, LevelSetPoint, SubsolutionGapSpec, SymmetricFunction,
    LEMMA_MARGIN,
};

/// Relative tolerance of the Euler identity check.
pub const EULER_TOL: f64 = 1e-9;
/// Step of the central-difference gradient check.
pub const FD_STEP: f64 = 1e-6;
/// Relative tolerance of the central-difference gradient check.
pub const FD_TOL: f64 = 1e-5;
/// Relative residual accepted from `ray_intersect`.
pub const RAY_TOL: f64 = 1e-10;
/// Points of the log-spaced bracket `[t/1000, 1000 t]` scanned for sign changes.
pub const RAY_GRID: usize = 241;

pub const CHECK_CSV_HEADER: &str = "function,n,check,samples,failures,worst";
pub const GAP_CSV_HEADER: &str = "function,n,near,far,failures,eps_min,eps_median,eps_max";

const STREAM_POSITIVITY: u64 = 0;
const STREAM_CONCAVITY: u64 = 1;
const STREAM_EULER: u64 = 2;
const STREAM_FI_SUM: u64 = 3;
const STREAM_FD: u64 = 4;
const STREAM_RAY: u64 = 5;
const STREAM_GAP: u64 = 6;

fn sample_rng(seed: u64, check: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ check.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(sample);
    rng
}

/// Outcome of one check over all samples. `worst` is the sample value
/// closest to failing, in the check's own units.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckTally {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    pub worst: f64,
}

impl CheckTally {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn csv_row(&self, fun: &SymmetricFunction) -> String {
        format!(
            "{},{},{},{},{},{:.6e}",
            fun.kind(),
            fun.dim(),
            self.name,
            self.samples,
            self.failures,
            self.worst
        )
    }
}

/// Per-sample result: the measured value and whether it passes.
type Sample = Result<(f64, bool), ConeError>;

/// `lower_is_worse` chooses whether `worst` is the minimum or maximum.
fn tally<F>(name: &'static str, samples: usize, lower_is_worse: bool, f: F) -> Result<CheckTally, ConeError>
where
    F: Fn(u64) -> Sample + Sync + Send,
{
    let results: Vec<(f64, bool)> = (0..samples as u64).into_par_iter().map(f).collect::<Result<_, _>>()?;
    let init = if lower_is_worse { f64::INFINITY } else { 0.0 };
    let worst = results.iter().fold(init, |acc, &(v, _)| {
        if lower_is_worse {
            acc.min(v)
        } else {
            acc.max(v)
        }
    });
    Ok(CheckTally {
        name,
        samples,
        failures: results.iter().filter(|(_, ok)| !ok).count(),
        worst: if samples == 0 { 0.0 } else { worst },
    })
}

/// Gradient positivity: worst is the smallest `f_i`.
pub fn check_positivity(fun: &SymmetricFunction, samples: usize, seed: u64) -> Result<CheckTally, ConeError> {
    tally("gradient_positive", samples, true, |k| {
        let mut rng = sample_rng(seed, STREAM_POSITIVITY, k);
        let l = sample_cone_point(fun, &mut rng);
        let m = fun.grad(&l)?.min();
        Ok((m, m > 0.0))
    })
}

/// Midpoint and tangent concavity: worst is the smaller of the two gaps.
pub fn check_concavity_samples(fun: &SymmetricFunction, samples: usize, seed: u64) -> Result<CheckTally, ConeError> {
    tally("concavity", samples, true, |k| {
        let mut rng = sample_rng(seed, STREAM_CONCAVITY, k);
        let l = sample_cone_point(fun, &mut rng);
        let m = sample_cone_point(fun, &mut rng);
        let c = check_concavity(fun, &l, &m)?;
        Ok((c.midpoint_gap.min(c.tangent_gap), c.holds()))
    })
}

/// `sum f_i lambda_i = f(lambda) > 0`: worst is the largest relative error.
pub fn check_euler(fun: &SymmetricFunction, samples: usize, seed: u64) -> Result<CheckTally, ConeError> {
    tally("euler_identity", samples, false, |k| {
        let mut rng = sample_rng(seed, STREAM_EULER, k);
        let l = sample_cone_point(fun, &mut rng);
        let e = euler_positivity(fun, &l)?;
        let f = fun.eval(&l)?;
        let rel = (e - f).abs() / f.abs();
        Ok((rel, e > 0.0 && rel <= EULER_TOL))
    })
}

/// Levels `t` at which the sum bound is probed: `0.5, 1, 2` and `1 + c0`
/// with `f(c0 1) = sigma`.
fn fi_sum_levels(fun: &SymmetricFunction, point: &LevelSetPoint<f64>) -> Result<[f64; 4], ConeError> {
    let c0 = ray_intersect(fun, &Lambda::constant(fun.dim(), 1.0), point.sigma)?;
    Ok([0.5, 1.0, 2.0, 1.0 + c0])
}

/// Sum-of-derivatives lower bound on level sets: worst is the smallest slack.
pub fn check_fi_sum(fun: &SymmetricFunction, samples: usize, seed: u64) -> Result<CheckTally, ConeError> {
    tally("fi_sum_bound", samples, true, |k| {
        let mut rng = sample_rng(seed, STREAM_FI_SUM, k);
        let point = sample_level_point(fun, &mut rng);
        let mut worst = f64::INFINITY;
        for t in fi_sum_levels(fun, &point)? {
            worst = worst.min(fi_sum_bound_slack(fun, &point, t)?);
        }
        Ok((worst, worst > -LEMMA_MARGIN))
    })
}

/// Central differences against the analytic gradient: worst is the largest
/// componentwise relative error.
pub fn check_fd_gradient(fun: &SymmetricFunction, samples: usize, seed: u64) -> Result<CheckTally, ConeError> {
    tally("fd_gradient", samples, false, |k| {
        let mut rng = sample_rng(seed, STREAM_FD, k);
        let l = sample_cone_point(fun, &mut rng);
        let g = fun.grad(&l)?;
        let mut worst: f64 = 0.0;
        for i in 0..fun.dim() {
            let mut p = l.values().to_vec();
            let mut m = p.clone();
            p[i] += FD_STEP;
            m[i] -= FD_STEP;
            let fd = (fun.eval(&Lambda::new(p))? - fun.eval(&Lambda::new(m))?) / (2.0 * FD_STEP);
            let gi = g.values()[i];
            worst = worst.max((fd - gi).abs() / gi.abs());
        }
        Ok((worst, worst <= FD_TOL))
    })
}

/// Sign changes of `t -> f(t lambda) - sigma` on `RAY_GRID` log-spaced
/// points of `[t/1000, 1000 t]`.
pub fn ray_sign_changes(fun: &SymmetricFunction, lambda: &Lambda<f64>, sigma: f64, t: f64) -> Result<usize, ConeError> {
    let (lo, hi) = ((t / 1e3).ln(), (t * 1e3).ln());
    let mut prev: Option<bool> = None;
    let mut changes = 0;
    for j in 0..RAY_GRID {
        let s = (lo + (hi - lo) * j as f64 / (RAY_GRID - 1) as f64).exp();
        let above = fun.eval(&lambda.scaled(s))? - sigma >= 0.0;
        if prev.is_some_and(|p| p != above) {
            changes += 1;
        }
        prev = Some(above);
    }
    Ok(changes)
}

/// Ray property for random `(lambda, sigma)`: worst is the largest relative
/// residual; a sample fails on a large residual or a sign-change count
/// other than one.
pub fn check_ray(fun: &SymmetricFunction, samples: usize, seed: u64) -> Result<CheckTally, ConeError> {
    tally("ray_intersect", samples, false, |k| {
        let mut rng = sample_rng(seed, STREAM_RAY, k);
        let point = sample_level_point(fun, &mut rng);
        let l = sample_cone_point(fun, &mut rng);
        let sigma = point.sigma;
        let t = ray_intersect(fun, &l, sigma)?;
        let rel = (fun.eval(&l.scaled(t))? - sigma).abs() / (1.0 + sigma.abs());
        let changes = ray_sign_changes(fun, &l, sigma, t)?;
        Ok((rel, t > 0.0 && rel <= RAY_TOL && changes == 1))
    })
}

/// Distribution of the subsolution gap over random reference points and
/// level-set points, with `beta` at its largest admissible value.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSummary {
    pub near: usize,
    pub far: usize,
    pub failures: usize,
    /// Sorted far-branch gaps.
    pub eps: Vec<f64>,
}

impl GapSummary {
    fn quantile(&self, q: f64) -> f64 {
        if self.eps.is_empty() {
            return f64::NAN;
        }
        let idx = ((self.eps.len() - 1) as f64 * q).round() as usize;
        self.eps[idx]
    }

    pub fn eps_min(&self) -> f64 {
        self.quantile(0.0)
    }

    pub fn eps_median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn eps_max(&self) -> f64 {
        self.quantile(1.0)
    }

    pub fn csv_row(&self, fun: &SymmetricFunction) -> String {
        format!(
            "{},{},{},{},{},{:.6e},{:.6e},{:.6e}",
            fun.kind(),
            fun.dim(),
            self.near,
            self.far,
            self.failures,
            self.eps_min(),
            self.eps_median(),
            self.eps_max()
        )
    }
}

pub fn gap_distribution(fun: &SymmetricFunction, samples: usize, seed: u64) -> Result<GapSummary, ConeError> {
    let outcomes: Vec<(GapBranch, f64, bool)> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, STREAM_GAP, k);
            let reference = sample_cone_point(fun, &mut rng);
            let point = sample_level_point(fun, &mut rng);
            let spec = SubsolutionGapSpec {
                beta: SubsolutionGapSpec::max_beta(fun, &reference)?,
                epsilon: LEMMA_MARGIN,
            };
            let out = subsolution_gap(fun, &reference, &point.lambda, &spec)?;
            Ok((out.branch, out.residual, out.holds()))
        })
        .collect::<Result<_, ConeError>>()?;
    let mut eps: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.0 == GapBranch::NormalFar)
        .map(|o| o.1)
        .collect();
    eps.sort_by(f64::total_cmp);
    Ok(GapSummary {
        near: samples - eps.len(),
        far: eps.len(),
        failures: outcomes.iter().filter(|o| !o.2).count(),
        eps,
    })
}

/// Every structural check of the suite, in a fixed order.
pub fn structure_checks(fun: &SymmetricFunction, samples: usize, seed: u64) -> Result<Vec<CheckTally>, ConeError> {
    Ok(vec![
        check_positivity(fun, samples, seed)?,
        check_concavity_samples(fun, samples, seed)?,
        check_euler(fun, samples, seed)?,
        check_fi_sum(fun, samples, seed)?,
        check_fd_gradient(fun, samples, seed)?,
    ])
}
