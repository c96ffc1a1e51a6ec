//! Node layout of the flat model manifolds.
//!
//! Complex model: `2n` real axes ordered `x1, y1, ..., xn, yn`. Every axis is
//! periodic with period one except `xn`, which carries the Dirichlet faces
//! `xn = 0` and `xn = 1`. Real model: `d` axes `x1, ..., xd`, Dirichlet in
//! `xd`. With `N` cells per direction every spacing is `h = 1/N`; periodic
//! axes hold `N` nodes and the Dirichlet axis `N + 1`.

use std::sync::Arc;

use super::SolverError;

/// Largest supported number of real axes.
pub const MAX_AXES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// `g = chi + i dd-bar u` in complex dimension `n`.
    Complex { n: usize },
    /// `g = chi + D^2 u` in real dimension `d`.
    Real { d: usize },
}

impl Model {
    /// Number of real axes.
    pub fn axes(&self) -> usize {
        match *self {
            Model::Complex { n } => 2 * n,
            Model::Real { d } => d,
        }
    }

    /// Size of the form matrices.
    pub fn form_dim(&self) -> usize {
        match *self {
            Model::Complex { n } => n,
            Model::Real { d } => d,
        }
    }

    pub fn dirichlet_axis(&self) -> usize {
        match *self {
            Model::Complex { n } => 2 * n - 2,
            Model::Real { d } => d - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    model: Model,
    resolution: usize,
    sizes: Vec<usize>,
    strides: Vec<usize>,
    h: f64,
}

/// Index deltas to the two neighbours of a node along every axis, with the
/// periodic wrap already folded in.
#[derive(Debug, Clone, Copy)]
pub struct Neighbours {
    pub plus: [isize; MAX_AXES],
    pub minus: [isize; MAX_AXES],
}

/// Which Dirichlet face a node lies on, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Interior,
    /// `x = 0`; the inward direction is `+`.
    Lower,
    /// `x = 1`; the inward direction is `-`.
    Upper,
}

impl GridGeometry {
    /// Complex model in dimension `2 <= n <= 3` with `resolution` cells per direction.
    pub fn complex(n: usize, resolution: usize) -> Result<Arc<Self>, SolverError> {
        if !(2..=MAX_AXES / 2).contains(&n) {
            return Err(SolverError::Geometry(format!(
                "complex dimension must be 2 or 3, got {n}"
            )));
        }
        Self::build(Model::Complex { n }, resolution)
    }

    /// Real model in dimension `1 <= d <= 6`.
    pub fn real(d: usize, resolution: usize) -> Result<Arc<Self>, SolverError> {
        if !(1..=MAX_AXES).contains(&d) {
            return Err(SolverError::Geometry(format!(
                "real dimension must be between 1 and {MAX_AXES}, got {d}"
            )));
        }
        Self::build(Model::Real { d }, resolution)
    }

    pub fn new(model: Model, resolution: usize) -> Result<Arc<Self>, SolverError> {
        match model {
            Model::Complex { n } => Self::complex(n, resolution),
            Model::Real { d } => Self::real(d, resolution),
        }
    }

    fn build(model: Model, resolution: usize) -> Result<Arc<Self>, SolverError> {
        if resolution < 3 {
            return Err(SolverError::Geometry(format!(
                "resolution must be at least 3 cells per direction, got {resolution}"
            )));
        }
        let dims = model.axes();
        let sizes: Vec<usize> = (0..dims)
            .map(|a| if a == model.dirichlet_axis() { resolution + 1 } else { resolution })
            .collect();
        let mut strides = vec![1; dims];
        for a in (0..dims.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * sizes[a + 1];
        }
        Ok(Arc::new(Self {
            model,
            resolution,
            sizes,
            strides,
            h: 1.0 / resolution as f64,
        }))
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn axes(&self) -> usize {
        self.sizes.len()
    }

    pub fn form_dim(&self) -> usize {
        self.model.form_dim()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn dirichlet_axis(&self) -> usize {
        self.model.dirichlet_axis()
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, idx: usize) -> [usize; MAX_AXES] {
        let mut c = [0; MAX_AXES];
        let mut rest = idx;
        for a in 0..self.axes() {
            c[a] = rest / self.strides[a];
            rest %= self.strides[a];
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    /// Physical coordinates of a node.
    pub fn position(&self, idx: usize) -> [f64; MAX_AXES] {
        let c = self.coords(idx);
        let mut p = [0.0; MAX_AXES];
        for a in 0..self.axes() {
            p[a] = c[a] as f64 * self.h;
        }
        p
    }

    pub fn face(&self, idx: usize) -> Face {
        let k = (idx / self.strides[self.dirichlet_axis()]) % self.sizes[self.dirichlet_axis()];
        if k == 0 {
            Face::Lower
        } else if k == self.resolution {
            Face::Upper
        } else {
            Face::Interior
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.face(idx) != Face::Interior
    }

    /// Neighbour deltas of an interior node (boundary nodes get the same
    /// tangential deltas; their normal deltas point outside and must not be
    /// used).
    pub fn neighbours(&self, idx: usize) -> Neighbours {
        let c = self.coords(idx);
        let mut nb = Neighbours {
            plus: [0; MAX_AXES],
            minus: [0; MAX_AXES],
        };
        let dir = self.dirichlet_axis();
        for a in 0..self.axes() {
            let s = self.strides[a] as isize;
            let wrap = (self.sizes[a] as isize - 1) * s;
            if a != dir && c[a] + 1 == self.sizes[a] {
                nb.plus[a] = -wrap;
            } else {
                nb.plus[a] = s;
            }
            if a != dir && c[a] == 0 {
                nb.minus[a] = wrap;
            } else {
                nb.minus[a] = -s;
            }
        }
        nb
    }

    /// Distance to the boundary, `min(x, 1 - x)` in the Dirichlet coordinate.
    pub fn boundary_distance(&self, idx: usize) -> f64 {
        let x = self.position(idx)[self.dirichlet_axis()];
        x.min(1.0 - x)
    }

    /// Flat distance between two nodes, measured on the torus in periodic directions.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (self.position(a), self.position(b));
        let mut s = 0.0;
        for ax in 0..self.axes() {
            let mut d = (pa[ax] - pb[ax]).abs();
            if ax != self.dirichlet_axis() {
                d = d.min(1.0 - d);
            }
            s += d * d;
        }
        s.sqrt()
    }

    pub fn axis_name(&self, axis: usize) -> String {
        match self.model {
            Model::Complex { .. } => {
                let letter = if axis % 2 == 0 { 'x' } else { 'y' };
                format!("{letter}{}", axis / 2 + 1)
            }
            Model::Real { .. } => format!("x{}", axis + 1),
        }
    }

    pub fn axis_from_name(&self, name: &str) -> Option<usize> {
        (0..self.axes()).find(|&a| self.axis_name(a) == name)
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| !self.is_boundary(i))
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.is_boundary(i))
    }
}

/// Node values on a geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    geometry: Arc<GridGeometry>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(geometry: &Arc<GridGeometry>) -> Self {
        Self {
            geometry: Arc::clone(geometry),
            values: vec![0.0; geometry.len()],
        }
    }

    pub fn from_values(geometry: &Arc<GridGeometry>, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != geometry.len() {
            return Err(SolverError::Geometry(format!(
                "field has {} values, geometry has {} nodes",
                values.len(),
                geometry.len()
            )));
        }
        Ok(Self {
            geometry: Arc::clone(geometry),
            values,
        })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(geometry: &Arc<GridGeometry>, f: F) -> Self {
        let d = geometry.axes();
        let values = (0..geometry.len()).map(|i| f(&geometry.position(i)[..d])).collect();
        Self {
            geometry: Arc::clone(geometry),
            values,
        }
    }

    pub fn geometry(&self) -> &Arc<GridGeometry> {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self - other|` over all nodes.
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `max |self - other|` over the boundary faces.
    pub fn boundary_difference(&self, other: &Self) -> f64 {
        self.geometry
            .boundary_nodes()
            .fold(0.0, |m, i| m.max((self.values[i] - other.values[i]).abs()))
    }

    /// Copies the boundary values of `other` into `self`.
    pub fn set_boundary_from(&mut self, other: &Self) {
        for i in self.geometry.boundary_nodes() {
            self.values[i] = other.values[i];
        }
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Self {
            geometry: Arc::clone(&self.geometry),
            values,
        }
    }
}
