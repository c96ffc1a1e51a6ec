//! Randomized sweeps over arrowhead matrices.
//!
//! Sampling distribution (all draws from a ChaCha8 stream keyed by the
//! 64-bit seed, one stream per trial):
//! - diagonal entries uniform on `[-10, 10]`;
//! - border entries `r e^{i theta}` with `r` uniform on `[0, 10]` and
//!   `theta` uniform on `[0, 2 pi)`.
//!
//! Trial `k` always sees the same numbers regardless of how trials are
//! split across workers.

use std::f64::consts::TAU;

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{deflate_repeated, evaluate_bound, threshold, ArrowheadError, ArrowheadSpec, Bound};
use crate::scalar::Scalar;

pub const SWEEP_CSV_HEADER: &str = "n,eps,corner_fraction,max_dev,max_excess,violations";

const ENTRY_RANGE: f64 = 10.0;

/// How diagonal entries are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecSampler {
    Uniform,
    /// Entries pairwise at least `min_gap` apart, still inside `[-10, 10]`.
    Spaced { min_gap: f64 },
    /// One entry copied onto another so at least one pair repeats.
    Repeated,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws an `n x n` spec with `corner = 0` (callers set the corner).
pub fn random_spec<T: Scalar, R: Rng>(rng: &mut R, n: usize, sampler: SpecSampler) -> ArrowheadSpec<T> {
    let m = n - 1;
    let mut d: Vec<f64> = match sampler {
        SpecSampler::Uniform | SpecSampler::Repeated => (0..m)
            .map(|_| rng.random_range(-ENTRY_RANGE..=ENTRY_RANGE))
            .collect(),
        SpecSampler::Spaced { min_gap } => {
            let room = 2.0 * ENTRY_RANGE - min_gap * (m.saturating_sub(1)) as f64;
            assert!(room >= 0.0, "gap {min_gap} does not fit {m} entries");
            let mut base: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..=room)).collect();
            base.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut spaced: Vec<f64> = base
                .iter()
                .enumerate()
                .map(|(i, &b)| -ENTRY_RANGE + b + min_gap * i as f64)
                .collect();
            spaced.shuffle(rng);
            spaced
        }
    };
    if sampler == SpecSampler::Repeated && m >= 2 {
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        d[j] = d[i];
    }
    let a: Vec<Complex<T>> = (0..m)
        .map(|_| {
            let r = rng.random_range(0.0..=ENTRY_RANGE);
            let theta = rng.random_range(0.0..TAU);
            Complex::new(T::lit(r * theta.cos()), T::lit(r * theta.sin()))
        })
        .collect();
    ArrowheadSpec::new(d.into_iter().map(T::lit).collect(), a, T::zero()).expect("consistent lengths")
}

/// Aggregate over one `(n, eps, corner_fraction)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSummary {
    pub bound: Bound,
    pub n: usize,
    pub eps: f64,
    pub corner_fraction: f64,
    pub trials: usize,
    pub max_dev: f64,
    pub max_excess: f64,
    pub violations: usize,
}

impl SweepSummary {
    fn empty(bound: Bound, n: usize, eps: f64, corner_fraction: f64) -> Self {
        Self {
            bound,
            n,
            eps,
            corner_fraction,
            trials: 0,
            max_dev: 0.0,
            max_excess: 0.0,
            violations: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.max_dev = self.max_dev.max(other.max_dev);
        self.max_excess = self.max_excess.max(other.max_excess);
        self.violations += other.violations;
        self
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{}",
            self.n, self.eps, self.corner_fraction, self.max_dev, self.max_excess, self.violations
        )
    }
}

/// Samples `trials` specs, sets `corner = corner_fraction * threshold(bound)`
/// and records the largest deviation, largest corner excess and the number
/// of specs whose bound fails.
pub fn sweep(
    bound: Bound,
    n: usize,
    eps: f64,
    corner_fraction: f64,
    trials: usize,
    seed: u64,
) -> Result<SweepSummary, ArrowheadError> {
    if n < 2 {
        return Err(ArrowheadError::TooSmall);
    }
    if eps <= 0.0 {
        return Err(ArrowheadError::NonPositiveEpsilon);
    }
    let sampler = match bound {
        Bound::Distinct => SpecSampler::Spaced { min_gap: 2.0 * eps },
        _ => SpecSampler::Uniform,
    };
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let spec = random_spec::<f64, _>(&mut rng, n, sampler);
            let th = threshold(bound, spec.diagonal(), spec.border(), eps)?;
            let spec = spec.with_corner(corner_fraction * th);
            let report = evaluate_bound(bound, &spec, eps, th)?;
            Ok(SweepSummary {
                trials: 1,
                max_dev: report.max_deviation(),
                max_excess: report.corner_excess,
                violations: usize::from(!report.passed()),
                ..SweepSummary::empty(bound, n, eps, corner_fraction)
            })
        })
        .try_reduce(|| SweepSummary::empty(bound, n, eps, corner_fraction), |a, b| Ok(a.merge(b)))
}

/// Strong-bound sweep with the corner at a fraction of its threshold; probes
/// how far below the threshold the concentration survives.
pub fn sweep_below_threshold(
    n: usize,
    eps: f64,
    corner_fraction: f64,
    trials: usize,
    seed: u64,
) -> Result<SweepSummary, ArrowheadError> {
    sweep(Bound::Strong, n, eps, corner_fraction, trials, seed)
}

/// Draws one spec per trial with a forced repeated diagonal pair.
pub fn repeated_specs(n: usize, trials: usize, seed: u64) -> Vec<ArrowheadSpec<f64>> {
    (0..trials as u64)
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let spec = random_spec::<f64, _>(&mut rng, n, SpecSampler::Repeated);
            let corner = rng.random_range(-ENTRY_RANGE..=ENTRY_RANGE);
            spec.with_corner(corner)
        })
        .collect()
}

pub const DEFLATION_CSV_HEADER: &str = "n,trials,max_mismatch,failures";

/// Multiset agreement demanded between a spectrum and its deflation.
pub const DEFLATION_TOL: f64 = 1e-9;

/// Largest gap between the sorted spectrum of `spec` and the sorted union of
/// the split-off eigenvalue with the deflated spectrum.
pub fn deflation_mismatch(spec: &ArrowheadSpec<f64>) -> Result<f64, ArrowheadError> {
    let full = spec.eigenvalues()?.values;
    let (ev, reduced) = deflate_repeated(spec)?;
    let mut merged = reduced.eigenvalues()?.values;
    merged.push(ev);
    merged.sort_by(f64::total_cmp);
    Ok(full.iter().zip(&merged).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Deflation check over `repeated_specs(n, trials, seed)`: returns the
/// largest mismatch and the number of specs above `DEFLATION_TOL`.
pub fn deflation_sweep(n: usize, trials: usize, seed: u64) -> Result<(f64, usize), ArrowheadError> {
    if n < 3 {
        return Err(ArrowheadError::TooSmall);
    }
    let gaps: Vec<f64> = repeated_specs(n, trials, seed)
        .par_iter()
        .map(deflation_mismatch)
        .collect::<Result<_, _>>()?;
    Ok((
        gaps.iter().copied().fold(0.0, f64::max),
        gaps.iter().filter(|&&g| g > DEFLATION_TOL).count(),
    ))
}
