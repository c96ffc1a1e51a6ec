use std::fmt;
use std::str::FromStr;

use super::{ConeError, Lambda};
use crate::scalar::Scalar;

/// Below this `sigma_k` a quotient is treated as outside the numerically
/// safe part of its cone.
pub const QUOTIENT_FLOOR: f64 = 1e-12;

/// The three shipped families. All are symmetric, homogeneous of degree
/// one, concave and positive on their cone, and vanish on its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `sigma_k^{1/k}` on `Gamma_k`.
    SigmaRoot { k: usize },
    /// `sigma_n^{1/n}` on `Gamma_n`.
    MongeAmpere,
    /// `(sigma_l / sigma_k)^{1/(l-k)}` on `Gamma_l`, `0 <= k < l`.
    Quotient { k: usize, l: usize },
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Kind::SigmaRoot { k: 1 } => write!(f, "sigma1"),
            Kind::SigmaRoot { k } => write!(f, "sigmaK:{k}"),
            Kind::MongeAmpere => write!(f, "ma"),
            Kind::Quotient { k, l } => write!(f, "quotient:{k}:{l}"),
        }
    }
}

impl FromStr for Kind {
    type Err = ConeError;

    /// Accepts `sigma1`, `sigmaK:k`, `ma`, `quotient:k:l`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConeError::UnknownKind(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["sigma1"] => Ok(Kind::SigmaRoot { k: 1 }),
            ["sigmaK", k] => Ok(Kind::SigmaRoot { k: num(k)? }),
            ["ma"] => Ok(Kind::MongeAmpere),
            ["quotient", k, l] => Ok(Kind::Quotient { k: num(k)?, l: num(l)? }),
            _ => Err(bad()),
        }
    }
}

/// A concrete `f` in dimension `n` together with its cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymmetricFunction {
    kind: Kind,
    n: usize,
}

/// `[sigma_0, ..., sigma_upto](values)` by the product recursion.
pub fn elementary_symmetric<T: Scalar>(values: &[T], upto: usize) -> Vec<T> {
    let mut e = vec![T::zero(); upto + 1];
    e[0] = T::one();
    for (seen, &x) in values.iter().enumerate() {
        for j in (1..=upto.min(seen + 1)).rev() {
            let prev = e[j - 1];
            e[j] += x * prev;
        }
    }
    e
}

/// `sigma_j(values with entry i removed)` for `j = 0..=upto`.
pub fn elementary_symmetric_excluding<T: Scalar>(values: &[T], skip: usize, upto: usize) -> Vec<T> {
    let mut e = vec![T::zero(); upto + 1];
    e[0] = T::one();
    let mut seen = 0;
    for (i, &x) in values.iter().enumerate() {
        if i == skip {
            continue;
        }
        for j in (1..=upto.min(seen + 1)).rev() {
            let prev = e[j - 1];
            e[j] += x * prev;
        }
        seen += 1;
    }
    e
}

impl SymmetricFunction {
    pub fn new(kind: Kind, n: usize) -> Result<Self, ConeError> {
        let ok = n >= 1
            && match kind {
                Kind::SigmaRoot { k } => (1..=n).contains(&k),
                Kind::MongeAmpere => true,
                Kind::Quotient { k, l } => k < l && l <= n,
            };
        if ok {
            Ok(Self { kind, n })
        } else {
            Err(ConeError::InvalidParameters { kind, n })
        }
    }

    pub fn sigma1(n: usize) -> Self {
        Self::new(Kind::SigmaRoot { k: 1 }, n).expect("n >= 1")
    }

    pub fn monge_ampere(n: usize) -> Self {
        Self::new(Kind::MongeAmpere, n).expect("n >= 1")
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `m` such that the cone is `Gamma_m = {sigma_j > 0, j <= m}`.
    pub fn cone_order(&self) -> usize {
        match self.kind {
            Kind::SigmaRoot { k } => k,
            Kind::MongeAmpere => self.n,
            Kind::Quotient { l, .. } => l,
        }
    }

    /// `sup` of `f` over the boundary of its cone. Each shipped kind is a
    /// root of a `sigma` that vanishes on `d Gamma` while the lower-order
    /// `sigma`s stay nonnegative there, so the supremum is zero.
    pub fn sup_boundary<T: Scalar>(&self) -> T {
        T::zero()
    }

    fn check_dim<T: Scalar>(&self, lambda: &Lambda<T>) -> Result<(), ConeError> {
        if lambda.dim() == self.n {
            Ok(())
        } else {
            Err(ConeError::DimensionMismatch {
                expected: self.n,
                found: lambda.dim(),
            })
        }
    }

    /// Interior membership of the cone.
    pub fn in_cone<T: Scalar>(&self, lambda: &Lambda<T>) -> bool {
        if lambda.dim() != self.n || lambda.values().iter().any(|x| !x.is_finite()) {
            return false;
        }
        let m = self.cone_order();
        elementary_symmetric(lambda.values(), m)[1..].iter().all(|&s| s > T::zero())
    }

    fn admissible<T: Scalar>(&self, lambda: &Lambda<T>) -> Result<Vec<T>, ConeError> {
        self.check_dim(lambda)?;
        let m = self.cone_order();
        let e = elementary_symmetric(lambda.values(), m);
        let inside = lambda.values().iter().all(|x| x.is_finite())
            && e[1..].iter().all(|&s| s > T::zero())
            && match self.kind {
                Kind::Quotient { k, .. } => e[k] >= T::lit(QUOTIENT_FLOOR),
                _ => true,
            };
        if inside {
            Ok(e)
        } else {
            Err(ConeError::OutsideCone)
        }
    }

    fn value_from<T: Scalar>(&self, e: &[T]) -> T {
        match self.kind {
            Kind::SigmaRoot { k } => root(e[k], k),
            Kind::MongeAmpere => root(e[self.n], self.n),
            Kind::Quotient { k, l } => root(e[l] / e[k], l - k),
        }
    }

    pub fn eval<T: Scalar>(&self, lambda: &Lambda<T>) -> Result<T, ConeError> {
        let e = self.admissible(lambda)?;
        Ok(self.value_from(&e))
    }

    /// Value and gradient `f_i = df/d lambda_i`.
    pub fn eval_with_grad<T: Scalar>(&self, lambda: &Lambda<T>) -> Result<(T, Lambda<T>), ConeError> {
        let e = self.admissible(lambda)?;
        let f = self.value_from(&e);
        let v = lambda.values();
        let grad = match self.kind {
            Kind::SigmaRoot { k } => power_root_grad(v, &e, k, f),
            Kind::MongeAmpere => power_root_grad(v, &e, self.n, f),
            Kind::Quotient { k, l } => {
                // d log f = (d log sigma_l - d log sigma_k) / (l - k)
                let inv = T::one() / T::from_count(l - k);
                (0..self.n)
                    .map(|i| {
                        let ex = elementary_symmetric_excluding(v, i, l);
                        let dl = ex[l - 1] / e[l];
                        let dk = if k == 0 { T::zero() } else { ex[k - 1] / e[k] };
                        f * inv * (dl - dk)
                    })
                    .collect()
            }
        };
        Ok((f, Lambda::new(grad)))
    }

    pub fn grad<T: Scalar>(&self, lambda: &Lambda<T>) -> Result<Lambda<T>, ConeError> {
        Ok(self.eval_with_grad(lambda)?.1)
    }
}

fn root<T: Scalar>(x: T, k: usize) -> T {
    match k {
        1 => x,
        2 => x.sqrt(),
        _ => x.powf(T::one() / T::from_count(k)),
    }
}

fn power_root_grad<T: Scalar>(v: &[T], e: &[T], k: usize, f: T) -> Vec<T> {
    let scale = f / (T::from_count(k) * e[k]);
    (0..v.len())
        .map(|i| scale * elementary_symmetric_excluding(v, i, k - 1)[k - 1])
        .collect()
}
