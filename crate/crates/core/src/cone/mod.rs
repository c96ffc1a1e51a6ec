//! Symmetric concave functions `f` on Garding cones, level-set geometry, and
//! the structural inequalities the a priori estimates rest on.

mod function;
mod sample;
pub mod suite;

use thiserror::Error;

use crate::scalar::Scalar;

pub use function::{elementary_symmetric, elementary_symmetric_excluding, Kind, SymmetricFunction, QUOTIENT_FLOOR};
pub use sample::{sample_cone_point, sample_level_point, sample_pair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("unknown function kind {0:?} (expected sigma1, sigmaK:k, ma or quotient:k:l)")]
    UnknownKind(String),
    #[error("invalid parameters for {kind} in dimension {n}")]
    InvalidParameters { kind: Kind, n: usize },
    #[error("expected a point of dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point is outside the cone")]
    OutsideCone,
    #[error("level {sigma} is outside (sup over the cone boundary, sup over the cone) = ({lower}, inf)")]
    LevelOutOfRange { sigma: f64, lower: f64 },
    #[error("could not bracket the level {sigma} along the ray")]
    Bracketing { sigma: f64 },
    #[error("level-set point is inconsistent: {0}")]
    InvalidPoint(&'static str),
    #[error("beta {beta} exceeds half the distance {half_dist} from the reference normal to the boundary of the positive cone")]
    BetaTooLarge { beta: f64, half_dist: f64 },
    #[error("gap parameters must be positive")]
    NonPositiveGap,
}

/// A point of `R^n`, usually an eigenvalue vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambda<T>(Vec<T>);

impl<T: Scalar> Lambda<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn constant(n: usize, c: T) -> Self {
        Self(vec![c; n])
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, t: T) -> Self {
        Self(self.0.iter().map(|&x| x * t).collect())
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn sum(&self) -> T {
        self.0.iter().copied().sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        let half = T::lit(0.5);
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| half * (a + b)).collect())
    }

    pub fn min(&self) -> T {
        self.0.iter().copied().fold(T::infinity(), T::min)
    }
}

impl<T> From<Vec<T>> for Lambda<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// Point on the level surface `{f = sigma}` with its unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetPoint<T> {
    pub lambda: Lambda<T>,
    pub sigma: T,
    pub normal: Lambda<T>,
}

/// Unit normal `Df / |Df|`.
pub fn unit_normal<T: Scalar>(fun: &SymmetricFunction, lambda: &Lambda<T>) -> Result<Lambda<T>, ConeError> {
    let g = fun.grad(lambda)?;
    let norm = g.norm();
    Ok(g.scaled(T::one() / norm))
}

impl<T: Scalar> LevelSetPoint<T> {
    /// Projects `direction` along its ray onto the level `sigma`.
    pub fn on_ray(fun: &SymmetricFunction, direction: &Lambda<T>, sigma: T) -> Result<Self, ConeError> {
        let t = ray_intersect(fun, direction, sigma)?;
        let lambda = direction.scaled(t);
        let normal = unit_normal(fun, &lambda)?;
        Ok(Self { lambda, sigma, normal })
    }

    /// `|f(lambda) - sigma| <= 1e-9 (1 + |sigma|)` and `|normal| = 1`.
    pub fn validate(&self, fun: &SymmetricFunction) -> Result<(), ConeError> {
        let f = fun.eval(&self.lambda)?;
        if (f - self.sigma).abs() > T::lit(1e-9) * (T::one() + self.sigma.abs()) {
            return Err(ConeError::InvalidPoint("f(lambda) differs from sigma"));
        }
        if (self.normal.norm() - T::one()).abs() > T::lit(1e-12) {
            return Err(ConeError::InvalidPoint("normal is not a unit vector"));
        }
        Ok(())
    }
}

/// Slack applied to the lemma inequalities in floating point.
pub const LEMMA_MARGIN: f64 = 1e-10;

/// Midpoint and tangent-plane forms of concavity for one pair of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityCheck<T> {
    /// `f((lambda + mu)/2) - (f(lambda) + f(mu))/2`.
    pub midpoint_gap: T,
    /// `sum f_i(lambda)(mu_i - lambda_i) - (f(mu) - f(lambda))`.
    pub tangent_gap: T,
}

impl<T: Scalar> ConcavityCheck<T> {
    pub fn holds(&self) -> bool {
        let m = -T::lit(LEMMA_MARGIN);
        self.midpoint_gap >= m && self.tangent_gap >= m
    }
}

pub fn check_concavity<T: Scalar>(
    fun: &SymmetricFunction,
    lambda: &Lambda<T>,
    mu: &Lambda<T>,
) -> Result<ConcavityCheck<T>, ConeError> {
    let (fl, gl) = fun.eval_with_grad(lambda)?;
    let fm = fun.eval(mu)?;
    let fmid = fun.eval(&lambda.midpoint(mu))?;
    Ok(ConcavityCheck {
        midpoint_gap: fmid - T::lit(0.5) * (fl + fm),
        tangent_gap: gl.dot(&mu.sub(lambda)) - (fm - fl),
    })
}

/// `sum f_i(lambda) lambda_i`, which equals `f(lambda)` for every shipped
/// kind by Euler's identity and is positive on the cone.
pub fn euler_positivity<T: Scalar>(fun: &SymmetricFunction, lambda: &Lambda<T>) -> Result<T, ConeError> {
    Ok(fun.grad(lambda)?.dot(lambda))
}

/// The unique `t > 0` with `f(t lambda) = sigma`.
///
/// `t -> f(t lambda)` is strictly increasing on the ray, so the root is
/// bracketed by geometric expansion from `t = 1` and refined with Newton
/// steps safeguarded by bisection.
pub fn ray_intersect<T: Scalar>(fun: &SymmetricFunction, lambda: &Lambda<T>, sigma: T) -> Result<T, ConeError> {
    let lower: T = fun.sup_boundary();
    if !(sigma > lower) || !sigma.is_finite() {
        return Err(ConeError::LevelOutOfRange {
            sigma: sigma.to_f64_lossy(),
            lower: lower.to_f64_lossy(),
        });
    }
    fun.eval(lambda)?;
    let residual = |t: T| -> Result<(T, T), ConeError> {
        let (f, g) = fun.eval_with_grad(&lambda.scaled(t))?;
        Ok((f - sigma, g.dot(lambda)))
    };
    let bracket_err = || ConeError::Bracketing {
        sigma: sigma.to_f64_lossy(),
    };
    let two = T::lit(2.0);
    let (mut lo, mut hi) = (T::one(), T::one());
    let (r1, _) = residual(T::one())?;
    if r1 < T::zero() {
        let mut steps = 0;
        while residual(hi)?.0 < T::zero() {
            lo = hi;
            hi = hi * two;
            steps += 1;
            if steps > 2000 || !hi.is_finite() {
                return Err(bracket_err());
            }
        }
    } else {
        let mut steps = 0;
        while residual(lo)?.0 >= T::zero() {
            hi = lo;
            lo = lo / two;
            steps += 1;
            if steps > 2000 || lo == T::zero() {
                return Err(bracket_err());
            }
        }
    }

    let tol = T::lit(16.0) * T::epsilon() * (T::one() + sigma.abs());
    let mut t = T::lit(0.5) * (lo + hi);
    for _ in 0..200 {
        let (r, dr) = residual(t)?;
        if r.abs() <= tol {
            return Ok(t);
        }
        if r < T::zero() {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - r / dr;
        t = if dr > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            T::lit(0.5) * (lo + hi)
        };
        if hi - lo <= T::epsilon() * hi {
            return Ok(t);
        }
    }
    Ok(t)
}

/// `sum f_i(lambda) > (f(t 1) - sigma) / t` on the level surface through
/// `point`. Returns the slack `lhs - rhs`; callers assert it is above
/// `-LEMMA_MARGIN`.
pub fn fi_sum_bound_slack<T: Scalar>(
    fun: &SymmetricFunction,
    point: &LevelSetPoint<T>,
    t: T,
) -> Result<T, ConeError> {
    if !(t > T::zero()) {
        return Err(ConeError::InvalidPoint("t must be positive"));
    }
    point.validate(fun)?;
    let lhs = fun.grad(&point.lambda)?.sum();
    let ones = Lambda::constant(fun.dim(), t);
    let rhs = (fun.eval(&ones)? - point.sigma) / t;
    Ok(lhs - rhs)
}

pub fn check_fi_sum_bound<T: Scalar>(
    fun: &SymmetricFunction,
    point: &LevelSetPoint<T>,
    t: T,
) -> Result<bool, ConeError> {
    Ok(fi_sum_bound_slack(fun, point, t)? > -T::lit(LEMMA_MARGIN))
}

/// Parameters of the subsolution gap dichotomy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsolutionGapSpec<T> {
    /// Normal separation threshold.
    pub beta: T,
    /// Gap the far branch is expected to achieve.
    pub epsilon: T,
}

impl<T: Scalar> SubsolutionGapSpec<T> {
    /// Largest admissible `beta` for a reference point: half the distance of
    /// its normal to the boundary of the positive cone.
    pub fn max_beta(fun: &SymmetricFunction, reference: &Lambda<T>) -> Result<T, ConeError> {
        Ok(T::lit(0.5) * unit_normal(fun, reference)?.min())
    }

    pub fn validate(&self, fun: &SymmetricFunction, reference: &Lambda<T>) -> Result<(), ConeError> {
        if !(self.beta > T::zero()) || !(self.epsilon > T::zero()) {
            return Err(ConeError::NonPositiveGap);
        }
        let half_dist = Self::max_beta(fun, reference)?;
        if self.beta > half_dist {
            return Err(ConeError::BetaTooLarge {
                beta: self.beta.to_f64_lossy(),
                half_dist: half_dist.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapBranch {
    /// `|nu_lambda - nu_ref| < beta`: every `f_i` is a fixed fraction of `sum f_j`.
    NormalNear,
    /// Normals separated by at least `beta`: the tangent inequality gains
    /// `eps (1 + sum f_i)`.
    NormalFar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOutcome<T> {
    pub branch: GapBranch,
    pub normal_distance: T,
    /// Near branch: `min_i f_i - (beta / sqrt n) sum f_j`.
    /// Far branch: largest `eps'` for which the gap inequality holds.
    pub residual: T,
}

impl<T: Scalar> GapOutcome<T> {
    /// The branch's assertion: nonnegative slack (near) or positive gap (far).
    pub fn holds(&self) -> bool {
        match self.branch {
            GapBranch::NormalNear => self.residual >= -T::lit(LEMMA_MARGIN),
            GapBranch::NormalFar => self.residual > T::zero(),
        }
    }
}

/// Decides the branch for `(reference, lambda)` and measures its slack.
///
/// In the far branch the gap `eps'` is found by bisection on the predicate
/// `sum f_i(lambda)(ref_i - lambda_i) >= f(ref) - f(lambda) + eps'(1 + sum f_i(lambda))`.
pub fn subsolution_gap<T: Scalar>(
    fun: &SymmetricFunction,
    reference: &Lambda<T>,
    lambda: &Lambda<T>,
    spec: &SubsolutionGapSpec<T>,
) -> Result<GapOutcome<T>, ConeError> {
    spec.validate(fun, reference)?;
    let nu_ref = unit_normal(fun, reference)?;
    let (f_lambda, grad) = fun.eval_with_grad(lambda)?;
    let nu = grad.scaled(T::one() / grad.norm());
    let normal_distance = nu.sub(&nu_ref).norm();
    let sum_f = grad.sum();
    if normal_distance < spec.beta {
        let share = spec.beta / T::from_count(fun.dim()).sqrt() * sum_f;
        return Ok(GapOutcome {
            branch: GapBranch::NormalNear,
            normal_distance,
            residual: grad.min() - share,
        });
    }
    let tangent = grad.dot(&reference.sub(lambda));
    let drop = fun.eval(reference)? - f_lambda;
    let holds = |eps: T| tangent >= drop + eps * (T::one() + sum_f);
    let residual = if !holds(T::zero()) {
        T::zero()
    } else {
        let mut lo = T::zero();
        let mut hi = T::one();
        while holds(hi) {
            lo = hi;
            hi = hi * T::lit(2.0);
            if !hi.is_finite() {
                break;
            }
        }
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Ok(GapOutcome {
        branch: GapBranch::NormalFar,
        normal_distance,
        residual,
    })
}

/// `min psi - sup_{d Gamma} f`; zero means the equation degenerates.
pub fn delta_nondegeneracy<T: Scalar>(fun: &SymmetricFunction, psi_values: &[T]) -> T {
    let min = psi_values.iter().copied().fold(T::infinity(), T::min);
    min - fun.sup_boundary()
}

/// `kappa = (f((1 + c0) 1) - sup psi) / (1 + c0)` where `f(c0 1) = sup psi`;
/// a lower bound for `sum f_i` along any admissible solution.
pub fn kappa_lower_bound<T: Scalar>(fun: &SymmetricFunction, sup_psi: T) -> Result<T, ConeError> {
    let ones = Lambda::constant(fun.dim(), T::one());
    let c0 = ray_intersect(fun, &ones, sup_psi)?;
    let s = T::one() + c0;
    Ok((fun.eval(&ones.scaled(s))? - sup_psi) / s)
}

/// Header `lambda_1,...,lambda_n,sigma`.
pub fn level_set_csv_header(n: usize) -> String {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("lambda_{i}")).collect();
    cols.push("sigma".into());
    cols.join(",")
}

pub fn level_set_csv_row<T: Scalar>(point: &LevelSetPoint<T>) -> String {
    let mut cols: Vec<String> = point.lambda.values().iter().map(|x| format!("{x:.15e}")).collect();
    cols.push(format!("{:.15e}", point.sigma));
    cols.join(",")
}

/// Parses rows written by [`level_set_csv_row`] (header skipped).
pub fn parse_level_set_csv(text: &str) -> Result<Vec<(Lambda<f64>, f64)>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or("empty level-set file")?;
    let width = header.split(',').count();
    lines
        .map(|line| {
            let vals: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| format!("bad number in {line:?}: {e}"))?;
            if vals.len() != width {
                return Err(format!("expected {width} columns in {line:?}"));
            }
            let (sigma, lambda) = vals.split_last().expect("nonempty");
            Ok((Lambda::new(lambda.to_vec()), *sigma))
        })
        .collect()
}

#[cfg(test)]
mod tests;
