//! Uniform centered grids and the sampled objects that live on them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A centered uniform grid on `R^d`: nodes `x_j = (j - n/2) h` along each axis.
///
/// The induced frequency grid has spacing `2 pi / (n h)` and the same node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, h: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Argument(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Argument(format!("points per axis must be even and >= 4, got {n}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Argument(format!("spacing must be positive, got {h}")));
        }
        Ok(Self { dim, n, h })
    }

    /// Grid with `n` points per axis covering `[-t, t)`.
    pub fn with_extent(dim: usize, n: usize, t: f64) -> Result<Self> {
        Self::new(dim, n, 2.0 * t / n as f64)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Half extent `T = n h / 2`.
    pub fn extent(&self) -> f64 {
        0.5 * self.n as f64 * self.h
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency spacing `2 pi / (n h)`.
    pub fn delta_xi(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.h)
    }

    /// The frequency grid: same `n`, spacing `delta_xi`.
    pub fn dual(&self) -> Grid {
        Grid { dim: self.dim, n: self.n, h: self.delta_xi() }
    }

    /// Quadrature weight of one signal node, `h^d`.
    pub fn cell(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Quadrature weight of one phase-space node, `(h delta_xi)^d = (2 pi / n)^d`.
    pub fn phase_cell(&self) -> f64 {
        (2.0 * PI / self.n as f64).powi(self.dim as i32)
    }

    /// Coordinate of axis index `i`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.h
    }

    /// Axis indices of a flat node index (row-major; unused axes are zero).
    #[inline]
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    #[inline]
    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.n + idx[1]
        }
    }

    /// Coordinates of a flat node index, written into `out[..dim]`.
    #[inline]
    pub fn coords_into(&self, flat: usize, out: &mut [f64]) {
        let idx = self.multi_index(flat);
        for a in 0..self.dim {
            out[a] = self.node(idx[a]);
        }
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        self.coords_into(flat, &mut c);
        c
    }

    /// Flat index of `flat + shift` on each axis, wrapping circularly.
    #[inline]
    pub fn wrap_offset(&self, flat: usize, shift: [i64; 2]) -> usize {
        let idx = self.multi_index(flat);
        let n = self.n as i64;
        let mut out = [0usize; 2];
        for a in 0..self.dim {
            out[a] = (idx[a] as i64 + shift[a]).rem_euclid(n) as usize;
        }
        self.flat_index(out)
    }

    pub(crate) fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::Structure(format!(
                "{what}: grids differ ({self:?} vs {other:?})"
            )));
        }
        Ok(())
    }
}

/// A complex function sampled on a [`Grid`], with `L^2` quadrature semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structure(format!(
                "signal has {} values, grid expects {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples `f` at every node; `f` receives the node coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut c = [0.0; 2];
        let values = (0..grid.len())
            .map(|k| {
                grid.coords_into(k, &mut c);
                f(&c[..grid.dim()])
            })
            .collect();
        Self { grid, values }
    }

    /// `<f, g> = h^d sum f conj(g)`.
    pub fn inner(&self, other: &SampledSignal) -> Result<Complex64> {
        self.grid.check_same(&other.grid, "inner product")?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.cell())
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell()).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> SampledSignal {
        SampledSignal { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.grid.check_same(&other.grid, "signal sum")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SampledSignal { grid: self.grid, values })
    }

    pub fn sub(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Translation by an on-grid shift with zero extension: `(T_u f)(x) = f(x - u)`.
    pub fn translate_nodes(&self, shift: [i64; 2]) -> SampledSignal {
        let g = self.grid;
        let n = g.n() as i64;
        let mut out = SampledSignal::zeros(g);
        for k in 0..g.len() {
            let idx = g.multi_index(k);
            let mut src = [0usize; 2];
            let mut inside = true;
            for a in 0..g.dim() {
                let s = idx[a] as i64 - shift[a];
                if s < 0 || s >= n {
                    inside = false;
                    break;
                }
                src[a] = s as usize;
            }
            if inside {
                out.values[k] = self.values[g.flat_index(src)];
            }
        }
        out
    }
}

/// A complex function on phase space `R^d x R^d`, sampled on `grid x grid.dual()`.
///
/// Values are stored x-major: `values[x_flat * N + xi_flat]` with `N = n^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl PhaseSpaceFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() * grid.len() {
            return Err(Error::Structure(format!(
                "phase-space function has {} values, grid expects {}",
                values.len(),
                grid.len() * grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len() * grid.len()] }
    }

    pub fn xigrid(&self) -> Grid {
        self.grid.dual()
    }

    /// Samples `f(x, xi)` at every phase-space node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64], &[f64]) -> Complex64) -> Self {
        let dual = grid.dual();
        let nn = grid.len();
        let d = grid.dim();
        let mut values = Vec::with_capacity(nn * nn);
        let (mut x, mut xi) = ([0.0; 2], [0.0; 2]);
        for p in 0..nn {
            grid.coords_into(p, &mut x);
            for q in 0..nn {
                dual.coords_into(q, &mut xi);
                values.push(f(&x[..d], &xi[..d]));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn at(&self, x_flat: usize, xi_flat: usize) -> Complex64 {
        self.values[x_flat * self.grid.len() + xi_flat]
    }

    /// Row of values at a fixed position node.
    pub fn row(&self, x_flat: usize) -> &[Complex64] {
        let nn = self.grid.len();
        &self.values[x_flat * nn..(x_flat + 1) * nn]
    }

    /// `<F, G> = (h delta_xi)^d sum F conj(G)`.
    pub fn inner(&self, other: &PhaseSpaceFunction) -> Result<Complex64> {
        self.grid.check_same(&other.grid, "phase-space inner product")?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.phase_cell())
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.phase_cell()).sqrt()
    }

    pub fn scale(&self, c: Complex64) -> PhaseSpaceFunction {
        PhaseSpaceFunction { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
        self.grid.check_same(&other.grid, "phase-space sum")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(PhaseSpaceFunction { grid: self.grid, values })
    }

    /// Node-wise product `a . F`.
    pub fn multiply(&self, other: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
        self.grid.check_same(&other.grid, "phase-space product")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(PhaseSpaceFunction { grid: self.grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}
