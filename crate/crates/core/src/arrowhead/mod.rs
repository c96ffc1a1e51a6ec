//! Hermitian arrowhead matrices and the eigenvalue-concentration bounds that
//! hold once the corner entry grows quadratically in the border.
//!
//! The matrix is diagonal except for its last row and column:
//!
//! ```text
//! [ d_1              a_1     ]
//! [      ...         ...     ]
//! [           d_{n-1} a_{n-1} ]
//! [ a_1* ... a_{n-1}*  corner ]
//! ```
//!
//! Three growth thresholds on `corner` are provided. Above each one the
//! first `n - 1` eigenvalues sit within `eps` of the diagonal entries and
//! the largest one exceeds `corner` by less than `(n - 1) eps`.

mod sweep;
mod text;

use num_complex::Complex;
use num_traits::{Num, Signed};
use thiserror::Error;

use crate::linalg::{EigenError, HermitianMatrix};
use crate::scalar::{ring_count, Scalar};

pub use sweep::{
    deflation_mismatch, deflation_sweep, random_spec, repeated_specs, sweep, sweep_below_threshold, SpecSampler,
    SweepSummary, DEFLATION_CSV_HEADER, DEFLATION_TOL, SWEEP_CSV_HEADER,
};
pub use text::{format_spec, parse_spec, ParseSpecError};

/// Slack used when testing the strict inequalities of the bounds in
/// floating point.
pub const STRICT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArrowheadError {
    #[error("dimension mismatch: {d} diagonal entries but {a} border entries")]
    DimensionMismatch { d: usize, a: usize },
    #[error("arrowhead matrix needs n >= 2")]
    TooSmall,
    #[error("eps must be positive")]
    NonPositiveEpsilon,
    #[error("corner {corner} is below threshold {threshold}")]
    BelowThreshold { corner: f64, threshold: f64 },
    #[error("diagonal entries are not pairwise distinct")]
    RepeatedDiagonal,
    #[error("eps {eps} exceeds half the smallest diagonal gap {half_gap}")]
    EpsilonTooLarge { eps: f64, half_gap: f64 },
    #[error("no repeated diagonal entries to deflate")]
    NoRepeatedDiagonal,
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Which concentration bound a report asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    /// Sorted matching, threshold `(2n-3)/eps sum|a|^2 + (n-1) sum|d| + (n-2) eps/(2n-3)`.
    Strong,
    /// Nearest matching, threshold `sum|a|^2/eps + sum[d + (n-2)|d|] + (n-2) eps`.
    Weak,
    /// Pairwise distinct diagonal, threshold `sum|a|^2/eps + (n-1) sum|d| + (n-2) eps`.
    Distinct,
}

impl Bound {
    pub const ALL: [Bound; 3] = [Bound::Strong, Bound::Weak, Bound::Distinct];

    pub fn name(self) -> &'static str {
        match self {
            Bound::Strong => "strong",
            Bound::Weak => "weak",
            Bound::Distinct => "distinct",
        }
    }
}

/// The bordered-diagonal matrix, parameterized by its `corner` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowheadSpec<T> {
    d: Vec<T>,
    a_off: Vec<Complex<T>>,
    pub corner: T,
}

impl<T: Copy> ArrowheadSpec<T> {
    pub fn new(d: Vec<T>, a_off: Vec<Complex<T>>, corner: T) -> Result<Self, ArrowheadError> {
        if d.len() != a_off.len() {
            return Err(ArrowheadError::DimensionMismatch {
                d: d.len(),
                a: a_off.len(),
            });
        }
        if d.is_empty() {
            return Err(ArrowheadError::TooSmall);
        }
        Ok(Self { d, a_off, corner })
    }

    /// Matrix dimension `n = len(d) + 1`.
    pub fn n(&self) -> usize {
        self.d.len() + 1
    }

    pub fn diagonal(&self) -> &[T] {
        &self.d
    }

    pub fn border(&self) -> &[Complex<T>] {
        &self.a_off
    }

    pub fn with_corner(&self, corner: T) -> Self {
        Self {
            corner,
            ..self.clone()
        }
    }
}

impl<T: Scalar> ArrowheadSpec<T> {
    /// Dense Hermitian matrix with zeros off the arrow pattern.
    pub fn assemble(&self) -> HermitianMatrix<T> {
        let n = self.n();
        let mut m = HermitianMatrix::zeros(n);
        for (i, (&d, &a)) in self.d.iter().zip(&self.a_off).enumerate() {
            m.set_diagonal(i, d);
            m.set(i, n - 1, a);
        }
        m.set_diagonal(n - 1, self.corner);
        m
    }

    /// Ascending spectrum via the dense Hermitian eigensolver.
    pub fn eigenvalues(&self) -> Result<Spectrum<T>, ArrowheadError> {
        Ok(Spectrum {
            values: self.assemble().eigenvalues()?,
        })
    }

    pub fn trace(&self) -> T {
        self.d.iter().copied().sum::<T>() + self.corner
    }

    pub fn has_zero_border(&self) -> bool {
        self.a_off.iter().all(|a| a.re == T::zero() && a.im == T::zero())
    }
}

/// Eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn largest(&self) -> T {
        *self.values.last().expect("nonempty spectrum")
    }

    /// `|sum(values) - trace| <= 1e-10 (1 + |trace|)`.
    pub fn satisfies_trace(&self, trace: T) -> bool {
        let sum: T = self.values.iter().copied().sum();
        (sum - trace).abs() <= T::lit(1e-10) * (T::one() + trace.abs())
    }
}

fn border_mass<T: Num + Copy>(a_off: &[Complex<T>]) -> T {
    a_off.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
}

fn check_eps<T: Num + Copy + PartialOrd>(eps: T) -> Result<(), ArrowheadError> {
    if eps > T::zero() {
        Ok(())
    } else {
        Err(ArrowheadError::NonPositiveEpsilon)
    }
}

/// Threshold of the sorted-matching bound. Exact in any ordered field, so it
/// can be evaluated in rationals as well as floats.
pub fn threshold_strong<T>(d: &[T], a_off: &[Complex<T>], eps: T) -> Result<T, ArrowheadError>
where
    T: Num + Signed + Copy + PartialOrd,
{
    check_eps(eps)?;
    let n = d.len() + 1;
    let k: T = ring_count(2 * n - 3);
    let abs_d = d.iter().fold(T::zero(), |acc, x| acc + x.abs());
    Ok(k / eps * border_mass(a_off)
        + ring_count::<T>(n - 1) * abs_d
        + ring_count::<T>(n - 2) * eps / k)
}

/// Threshold of the nearest-matching bound.
pub fn threshold_weak<T>(d: &[T], a_off: &[Complex<T>], eps: T) -> Result<T, ArrowheadError>
where
    T: Num + Signed + Copy + PartialOrd,
{
    check_eps(eps)?;
    let n = d.len() + 1;
    let m: T = ring_count(n - 2);
    let diag = d.iter().fold(T::zero(), |acc, &x| acc + x + m * x.abs());
    Ok(border_mass(a_off) / eps + diag + m * eps)
}

/// Threshold of the distinct-diagonal bound.
pub fn threshold_distinct<T>(d: &[T], a_off: &[Complex<T>], eps: T) -> Result<T, ArrowheadError>
where
    T: Num + Signed + Copy + PartialOrd,
{
    check_eps(eps)?;
    let n = d.len() + 1;
    let abs_d = d.iter().fold(T::zero(), |acc, x| acc + x.abs());
    Ok(border_mass(a_off) / eps + ring_count::<T>(n - 1) * abs_d + ring_count::<T>(n - 2) * eps)
}

pub fn threshold<T>(bound: Bound, d: &[T], a_off: &[Complex<T>], eps: T) -> Result<T, ArrowheadError>
where
    T: Num + Signed + Copy + PartialOrd,
{
    match bound {
        Bound::Strong => threshold_strong(d, a_off, eps),
        Bound::Weak => threshold_weak(d, a_off, eps),
        Bound::Distinct => threshold_distinct(d, a_off, eps),
    }
}

/// Outcome of checking one concentration bound on one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport<T> {
    pub bound: Bound,
    pub eps: T,
    pub threshold: T,
    /// `|d_{i_alpha} - lambda_alpha|` for `alpha < n`.
    pub deviations: Vec<T>,
    /// Index into the (unsorted) diagonal matched to each `lambda_alpha`.
    pub matched: Vec<usize>,
    /// `lambda_n - corner`.
    pub corner_excess: T,
    /// Upper bound the excess must stay below.
    pub excess_bound: T,
    pub deviations_pass: bool,
    pub excess_pass: bool,
}

impl<T: Scalar> ConcentrationReport<T> {
    pub fn passed(&self) -> bool {
        self.deviations_pass && self.excess_pass
    }

    pub fn max_deviation(&self) -> T {
        self.deviations.iter().copied().fold(T::zero(), T::max)
    }
}

fn sorted_indices<T: Scalar>(d: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap().then(i.cmp(&j)));
    idx
}

/// Nearest diagonal entry to `x`, ties to the smaller index.
fn nearest_index<T: Scalar>(d: &[T], x: T) -> usize {
    let mut best = 0;
    for (i, &di) in d.iter().enumerate().skip(1) {
        if (di - x).abs() < (d[best] - x).abs() {
            best = i;
        }
    }
    best
}

/// Evaluates the conclusion of `bound` without checking the corner against
/// its threshold. Used by the sweeps below threshold.
pub fn evaluate_bound<T: Scalar>(
    bound: Bound,
    spec: &ArrowheadSpec<T>,
    eps: T,
    threshold: T,
) -> Result<ConcentrationReport<T>, ArrowheadError> {
    let spectrum = spec.eigenvalues()?;
    let n = spec.n();
    let d = spec.diagonal();
    let lambda = &spectrum.values;
    let matched: Vec<usize> = match bound {
        Bound::Strong | Bound::Distinct => sorted_indices(d),
        Bound::Weak => lambda[..n - 1].iter().map(|&l| nearest_index(d, l)).collect(),
    };
    let deviations: Vec<T> = matched
        .iter()
        .zip(lambda)
        .map(|(&i, &l)| (d[i] - l).abs())
        .collect();
    let corner_excess = spectrum.largest() - spec.corner;
    let spread = T::from_count(n - 1) * eps;
    let excess_bound = match bound {
        Bound::Strong | Bound::Distinct => spread,
        Bound::Weak => {
            let shift: T = d.iter().copied().sum::<T>() - matched.iter().map(|&i| d[i]).sum::<T>();
            spread + shift.abs()
        }
    };
    let margin = T::lit(STRICT_MARGIN);
    Ok(ConcentrationReport {
        bound,
        eps,
        threshold,
        deviations_pass: deviations.iter().all(|&x| x < eps + margin),
        excess_pass: corner_excess >= -margin && corner_excess < excess_bound + margin,
        deviations,
        matched,
        corner_excess,
        excess_bound,
    })
}

fn require_threshold<T: Scalar>(
    bound: Bound,
    spec: &ArrowheadSpec<T>,
    eps: T,
) -> Result<T, ArrowheadError> {
    let th = threshold(bound, spec.diagonal(), spec.border(), eps)?;
    if spec.corner < th {
        return Err(ArrowheadError::BelowThreshold {
            corner: spec.corner.to_f64_lossy(),
            threshold: th.to_f64_lossy(),
        });
    }
    Ok(th)
}

/// Sorted-matching bound: `|d_(alpha) - lambda_alpha| < eps` and
/// `0 <= lambda_n - corner < (n-1) eps`.
pub fn check_concentration_strong<T: Scalar>(
    spec: &ArrowheadSpec<T>,
    eps: T,
) -> Result<ConcentrationReport<T>, ArrowheadError> {
    let th = require_threshold(Bound::Strong, spec, eps)?;
    evaluate_bound(Bound::Strong, spec, eps, th)
}

/// Each `lambda_alpha` lies within `eps` of some diagonal entry, and the
/// corner excess is bounded using that matching.
pub fn check_concentration_weak<T: Scalar>(
    spec: &ArrowheadSpec<T>,
    eps: T,
) -> Result<ConcentrationReport<T>, ArrowheadError> {
    let th = require_threshold(Bound::Weak, spec, eps)?;
    evaluate_bound(Bound::Weak, spec, eps, th)
}

/// Half the smallest gap between diagonal entries; `None` when there is at
/// most one entry. Errors if two entries coincide.
pub fn half_min_gap<T: Scalar>(d: &[T]) -> Result<Option<T>, ArrowheadError> {
    let mut sorted = d.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(None, |acc: Option<T>, g| {
        Some(acc.map_or(g, |m| m.min(g)))
    });
    match gap {
        Some(g) if g == T::zero() => Err(ArrowheadError::RepeatedDiagonal),
        Some(g) => Ok(Some(g / T::lit(2.0))),
        None => Ok(None),
    }
}

/// Distinct-diagonal bound; needs `0 < eps <= min|d_i - d_j| / 2`.
pub fn check_concentration_distinct<T: Scalar>(
    spec: &ArrowheadSpec<T>,
    eps: T,
) -> Result<ConcentrationReport<T>, ArrowheadError> {
    check_eps(eps)?;
    if let Some(half_gap) = half_min_gap(spec.diagonal())? {
        if eps > half_gap {
            return Err(ArrowheadError::EpsilonTooLarge {
                eps: eps.to_f64_lossy(),
                half_gap: half_gap.to_f64_lossy(),
            });
        }
    }
    let th = require_threshold(Bound::Distinct, spec, eps)?;
    evaluate_bound(Bound::Distinct, spec, eps, th)
}

/// Splits off the eigenvalue carried by a repeated diagonal pair.
///
/// For the first pair `i0 < j0` with `d[i0] == d[j0]`, `d[i0]` is an
/// eigenvalue and the rest of the spectrum belongs to the matrix with row
/// `i0` deleted and border entry `sqrt(|a_i0|^2 + |a_j0|^2)` in row `j0`.
pub fn deflate_repeated<T: Scalar>(
    spec: &ArrowheadSpec<T>,
) -> Result<(T, ArrowheadSpec<T>), ArrowheadError> {
    let d = spec.diagonal();
    let pair = (0..d.len())
        .flat_map(|i| (i + 1..d.len()).map(move |j| (i, j)))
        .find(|&(i, j)| d[i] == d[j]);
    let (i0, j0) = pair.ok_or(ArrowheadError::NoRepeatedDiagonal)?;
    let a = spec.border();
    let merged = (a[i0].norm_sqr() + a[j0].norm_sqr()).sqrt();
    let mut new_d = Vec::with_capacity(d.len() - 1);
    let mut new_a = Vec::with_capacity(d.len() - 1);
    for k in 0..d.len() {
        if k == i0 {
            continue;
        }
        new_d.push(d[k]);
        new_a.push(if k == j0 {
            Complex::new(merged, T::zero())
        } else {
            a[k]
        });
    }
    Ok((d[i0], ArrowheadSpec::new(new_d, new_a, spec.corner)?))
}
