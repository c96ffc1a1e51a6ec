//! Named analytic families used for `u`, `phi`, `psi` and subsolutions.
//!
//! Grammar: terms joined by `+`, each an optional `c*` factor and an atom.
//!
//! | atom            | value                                               |
//! |-----------------|-----------------------------------------------------|
//! | `zero`          | `0`                                                 |
//! | `const:c`       | `c`                                                 |
//! | `bowl:c`        | `-c x (1 - x)` in the Dirichlet coordinate `x`      |
//! | `trig:a`        | `a cos(2 pi x1) cos(2 pi y1) sin(pi x)` (complex), `a cos(2 pi x1) sin(pi x)` (real) |
//! | `cos:axis:a`    | `a cos(2 pi axis)`                                  |
//! | `sin2:axis`     | `sin^2(pi axis)`                                    |
//! | `lin:axis:c`    | `c axis`                                            |
//! | `sq:axis:c`     | `c axis^2`                                          |
//!
//! Axes are named `x1, y1, ..., xn, yn` (complex) or `x1, ..., xd` (real).
//! `lin` and `sq` are not periodic and belong on the Dirichlet axis unless
//! only nodes away from the periodic seams are used.

use std::f64::consts::{PI, TAU};
use std::fmt;

use super::grid::{GridGeometry, ScalarField, MAX_AXES};
use super::stencil::{AxisMatrix, AxisVector};
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Atom {
    Zero,
    Const(f64),
    Bowl(f64),
    Trig(f64),
    Cos(usize, f64),
    Sin2(usize),
    Lin(usize, f64),
    Sq(usize, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coef: f64,
    atom: Atom,
}

/// A sum of preset terms bound to a geometry's axis naming.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    terms: Vec<Term>,
    names: Vec<String>,
    dirichlet: usize,
    /// Second periodic axis used by `trig`, if the model has one.
    trig_second: Option<usize>,
}

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone, Copy)]
pub struct Jet {
    pub value: f64,
    pub grad: AxisVector,
    pub hess: AxisMatrix,
}

impl Jet {
    fn zero() -> Self {
        Self {
            value: 0.0,
            grad: [0.0; MAX_AXES],
            hess: [[0.0; MAX_AXES]; MAX_AXES],
        }
    }
}

impl Expr {
    pub fn zero(geom: &GridGeometry) -> Self {
        Self::from_terms(geom, vec![])
    }

    fn from_terms(geom: &GridGeometry, terms: Vec<Term>) -> Self {
        let names = (0..geom.axes()).map(|a| geom.axis_name(a)).collect();
        let dirichlet = geom.dirichlet_axis();
        let trig_second = match geom.model() {
            super::Model::Complex { .. } => Some(1),
            super::Model::Real { d } if d >= 3 => Some(1),
            super::Model::Real { .. } => None,
        };
        Self {
            terms,
            names,
            dirichlet,
            trig_second,
        }
    }

    pub fn parse(text: &str, geom: &GridGeometry) -> Result<Self, SolverError> {
        let bad = |msg: String| SolverError::Parse(format!("{text:?}: {msg}"));
        let axis = |name: &str| geom.axis_from_name(name).ok_or_else(|| bad(format!("unknown axis {name}")));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("bad number {s:?}")));
        let mut terms = Vec::new();
        for raw in text.split('+') {
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(bad("empty term".into()));
            }
            let (coef, body) = match raw.split_once('*') {
                Some((c, b)) => (num(c)?, b.trim()),
                None => (1.0, raw),
            };
            let parts: Vec<&str> = body.split(':').collect();
            let atom = match parts.as_slice() {
                ["zero"] => Atom::Zero,
                ["const", c] => Atom::Const(num(c)?),
                ["bowl", c] => Atom::Bowl(num(c)?),
                ["trig", a] => Atom::Trig(num(a)?),
                ["cos", ax, a] => Atom::Cos(axis(ax)?, num(a)?),
                ["sin2", ax] => Atom::Sin2(axis(ax)?),
                ["lin", ax, c] => Atom::Lin(axis(ax)?, num(c)?),
                ["sq", ax, c] => Atom::Sq(axis(ax)?, num(c)?),
                _ => return Err(bad(format!("unknown preset {body:?}"))),
            };
            terms.push(Term { coef, atom });
        }
        Ok(Self::from_terms(geom, terms))
    }

    /// `s * self`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef *= s;
        }
        out
    }

    /// `self + other`.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().copied());
        out
    }

    pub fn plus_const(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.terms.push(Term {
            coef: 1.0,
            atom: Atom::Const(c),
        });
        out
    }

    pub fn jet(&self, p: &[f64]) -> Jet {
        let mut jet = Jet::zero();
        for t in &self.terms {
            self.add_atom(&mut jet, t.coef, t.atom, p);
        }
        jet
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        self.jet(p).value
    }

    fn add_atom(&self, jet: &mut Jet, c: f64, atom: Atom, p: &[f64]) {
        let x = self.dirichlet;
        match atom {
            Atom::Zero => {}
            Atom::Const(k) => jet.value += c * k,
            Atom::Bowl(k) => {
                let s = p[x];
                jet.value -= c * k * s * (1.0 - s);
                jet.grad[x] -= c * k * (1.0 - 2.0 * s);
                jet.hess[x][x] += 2.0 * c * k;
            }
            Atom::Trig(a) => {
                let a = c * a;
                let (c1, s1) = ((TAU * p[0]).cos(), (TAU * p[0]).sin());
                let (c2, s2) = match self.trig_second {
                    Some(b) => ((TAU * p[b]).cos(), (TAU * p[b]).sin()),
                    None => (1.0, 0.0),
                };
                let (sn, cn) = ((PI * p[x]).sin(), (PI * p[x]).cos());
                jet.value += a * c1 * c2 * sn;
                jet.grad[0] += -a * TAU * s1 * c2 * sn;
                jet.grad[x] += a * PI * c1 * c2 * cn;
                jet.hess[0][0] += -a * TAU * TAU * c1 * c2 * sn;
                jet.hess[x][x] += -a * PI * PI * c1 * c2 * sn;
                let m0x = -a * TAU * PI * s1 * c2 * cn;
                jet.hess[0][x] += m0x;
                jet.hess[x][0] += m0x;
                if let Some(b) = self.trig_second {
                    jet.grad[b] += -a * TAU * c1 * s2 * sn;
                    jet.hess[b][b] += -a * TAU * TAU * c1 * c2 * sn;
                    let m0b = a * TAU * TAU * s1 * s2 * sn;
                    jet.hess[0][b] += m0b;
                    jet.hess[b][0] += m0b;
                    let mbx = -a * TAU * PI * c1 * s2 * cn;
                    jet.hess[b][x] += mbx;
                    jet.hess[x][b] += mbx;
                }
            }
            Atom::Cos(ax, a) => {
                let a = c * a;
                let th = TAU * p[ax];
                jet.value += a * th.cos();
                jet.grad[ax] -= a * TAU * th.sin();
                jet.hess[ax][ax] -= a * TAU * TAU * th.cos();
            }
            Atom::Sin2(ax) => {
                let th = PI * p[ax];
                jet.value += c * th.sin().powi(2);
                jet.grad[ax] += c * PI * (2.0 * th).sin();
                jet.hess[ax][ax] += c * TAU * PI * (2.0 * th).cos();
            }
            Atom::Lin(ax, k) => {
                jet.value += c * k * p[ax];
                jet.grad[ax] += c * k;
            }
            Atom::Sq(ax, k) => {
                jet.value += c * k * p[ax] * p[ax];
                jet.grad[ax] += 2.0 * c * k * p[ax];
                jet.hess[ax][ax] += 2.0 * c * k;
            }
        }
    }

    pub fn sample(&self, geom: &std::sync::Arc<GridGeometry>) -> ScalarField {
        ScalarField::from_fn(geom, |p| self.value(p))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "zero");
        }
        let n = |a: usize| &self.names[a];
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if t.coef != 1.0 {
                write!(f, "{}*", t.coef)?;
            }
            match t.atom {
                Atom::Zero => write!(f, "zero")?,
                Atom::Const(c) => write!(f, "const:{c}")?,
                Atom::Bowl(c) => write!(f, "bowl:{c}")?,
                Atom::Trig(a) => write!(f, "trig:{a}")?,
                Atom::Cos(ax, a) => write!(f, "cos:{}:{a}", n(ax))?,
                Atom::Sin2(ax) => write!(f, "sin2:{}", n(ax))?,
                Atom::Lin(ax, c) => write!(f, "lin:{}:{c}", n(ax))?,
                Atom::Sq(ax, c) => write!(f, "sq:{}:{c}", n(ax))?,
            }
        }
        Ok(())
    }
}
