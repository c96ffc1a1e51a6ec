//! Finite-difference derivatives at a node: centered in the interior and
//! second-order one-sided across the Dirichlet faces.

use super::grid::{Face, GridGeometry, MAX_AXES};

pub type AxisVector = [f64; MAX_AXES];
pub type AxisMatrix = [[f64; MAX_AXES]; MAX_AXES];

#[inline]
fn at(values: &[f64], idx: usize, delta: isize) -> f64 {
    values[(idx as isize + delta) as usize]
}

/// Inward step along the Dirichlet axis at a boundary node.
fn inward(geom: &GridGeometry, face: Face) -> isize {
    let s = geom.strides()[geom.dirichlet_axis()] as isize;
    match face {
        Face::Lower => s,
        Face::Upper => -s,
        Face::Interior => unreachable!("interior nodes have no inward direction"),
    }
}

/// One-sided `d/dx_normal` times the orientation sign so that it is a
/// derivative in the positive coordinate direction.
fn normal_first(values: &[f64], idx: usize, step: isize, h: f64) -> f64 {
    let sign = step.signum() as f64;
    sign * (-3.0 * values[idx] + 4.0 * at(values, idx, step) - at(values, idx, 2 * step)) / (2.0 * h)
}

pub fn gradient(geom: &GridGeometry, values: &[f64], idx: usize) -> AxisVector {
    let h = geom.h();
    let nb = geom.neighbours(idx);
    let face = geom.face(idx);
    let dir = geom.dirichlet_axis();
    let mut g = [0.0; MAX_AXES];
    for a in 0..geom.axes() {
        g[a] = if a == dir && face != Face::Interior {
            normal_first(values, idx, inward(geom, face), h)
        } else {
            (at(values, idx, nb.plus[a]) - at(values, idx, nb.minus[a])) / (2.0 * h)
        };
    }
    g
}

/// Real Hessian `S_ab` at a node.
pub fn hessian(geom: &GridGeometry, values: &[f64], idx: usize) -> AxisMatrix {
    let h2 = geom.h() * geom.h();
    let nb = geom.neighbours(idx);
    let face = geom.face(idx);
    let dir = geom.dirichlet_axis();
    let dims = geom.axes();
    let u0 = values[idx];
    let mut s = [[0.0; MAX_AXES]; MAX_AXES];
    for a in 0..dims {
        for b in a..dims {
            let v = if face != Face::Interior && (a == dir || b == dir) {
                let step = inward(geom, face);
                if a == b {
                    (2.0 * u0 - 5.0 * at(values, idx, step) + 4.0 * at(values, idx, 2 * step)
                        - at(values, idx, 3 * step))
                        / h2
                } else {
                    let t = if a == dir { b } else { a };
                    let h = geom.h();
                    let up = (idx as isize + nb.plus[t]) as usize;
                    let down = (idx as isize + nb.minus[t]) as usize;
                    (normal_first(values, up, step, h) - normal_first(values, down, step, h)) / (2.0 * h)
                }
            } else if a == b {
                (at(values, idx, nb.plus[a]) - 2.0 * u0 + at(values, idx, nb.minus[a])) / h2
            } else {
                (at(values, idx, nb.plus[a] + nb.plus[b]) - at(values, idx, nb.plus[a] + nb.minus[b])
                    - at(values, idx, nb.minus[a] + nb.plus[b])
                    + at(values, idx, nb.minus[a] + nb.minus[b]))
                    / (4.0 * h2)
            };
            s[a][b] = v;
            s[b][a] = v;
        }
    }
    s
}

/// Real Laplacian at a node.
pub fn laplacian(geom: &GridGeometry, values: &[f64], idx: usize) -> f64 {
    let s = hessian(geom, values, idx);
    (0..geom.axes()).map(|a| s[a][a]).sum()
}
