//! Random points of a cone for property checks.
//!
//! A direction `v` is drawn uniformly from `[-1, 1]^n`, shifted along the
//! diagonal until it just enters the cone (bisection on the shift), pushed a
//! further uniform `[0.05, 2]` inside, then scaled by a log-uniform factor
//! in `[0.2, 5]`.

use rand::Rng;

use super::{Lambda, LevelSetPoint, SymmetricFunction};

fn entry_shift(fun: &SymmetricFunction, v: &[f64]) -> f64 {
    let shifted = |t: f64| Lambda::new(v.iter().map(|x| x + t).collect());
    let (mut lo, mut hi) = (-2.0, 2.0);
    debug_assert!(fun.in_cone(&shifted(hi)));
    if fun.in_cone(&shifted(lo)) {
        return lo;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fun.in_cone(&shifted(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn sample_cone_point<R: Rng>(fun: &SymmetricFunction, rng: &mut R) -> Lambda<f64> {
    let v: Vec<f64> = (0..fun.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let t = entry_shift(fun, &v) + rng.random_range(0.05..=2.0);
    let scale = rng.random_range(0.2f64.ln()..=5f64.ln()).exp();
    Lambda::new(v.iter().map(|x| (x + t) * scale).collect())
}

pub fn sample_pair<R: Rng>(fun: &SymmetricFunction, rng: &mut R) -> (Lambda<f64>, Lambda<f64>) {
    (sample_cone_point(fun, rng), sample_cone_point(fun, rng))
}

/// Random cone direction projected to a level drawn log-uniformly from
/// `[0.1, 10]`.
pub fn sample_level_point<R: Rng>(fun: &SymmetricFunction, rng: &mut R) -> LevelSetPoint<f64> {
    let dir = sample_cone_point(fun, rng);
    let sigma = rng.random_range(0.1f64.ln()..=10f64.ln()).exp();
    LevelSetPoint::on_ray(fun, &dir, sigma).expect("sampled direction lies in the cone")
}
