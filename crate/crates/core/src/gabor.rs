//! Gabor systems `{M_{beta0 l} T_{alpha0 j} phi}` on the signal grid, frame-operator tightness,
//! Gabor expansion of operator kernels and the resulting nuclear-norm bound.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledSignal};
use crate::locop::{singular_values, LocOpMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Undersampled,
    Critical,
    Oversampled,
}

#[derive(Debug, Clone)]
pub struct GaborSystem {
    pub phi: SampledSignal,
    pub alpha0: f64,
    pub beta0: f64,
    /// Time step in grid nodes.
    pub a: usize,
    /// Frequency step in dual-grid nodes.
    pub b: usize,
    /// Inclusive range of translation indices `j`.
    pub jrange: (i64, i64),
    /// Inclusive range of modulation indices `l`; one full frequency period.
    pub lrange: (i64, i64),
    pub redundancy: f64,
    pub sampling: Sampling,
    atoms: Vec<(i64, i64)>,
}

const MASS_THRESHOLD: f64 = 1e-14;

fn commensurate(step: f64, unit: f64, what: &str) -> Result<usize> {
    if !(step > 0.0) {
        return Err(Error::Argument(format!("{what} must be positive, got {step}")));
    }
    let k = (step / unit).round();
    if k < 1.0 || (step / unit - k).abs() > 1e-9 * k {
        return Err(Error::Argument(format!("{what} = {step} is not a multiple of the grid spacing {unit}")));
    }
    Ok(k as usize)
}

/// Builds the system for steps `alpha0` (multiple of `h`) and `beta0` (multiple of `delta_xi`,
/// dividing the frequency period). Translations cover every atom with mass above `1e-14` of the
/// peak on the grid, including atoms centered off the grid.
pub fn build_gabor_system(phi: &SampledSignal, alpha0: f64, beta0: f64) -> Result<GaborSystem> {
    let grid = phi.grid;
    if grid.dim() != 1 {
        return Err(Error::Structure("Gabor systems are implemented for d = 1".into()));
    }
    if phi.is_zero() {
        return Err(Error::Argument("Gabor atom is identically zero".into()));
    }
    let a = commensurate(alpha0, grid.h(), "alpha0")?;
    let b = commensurate(beta0, grid.delta_xi(), "beta0")?;
    let n = grid.n();
    if n % b != 0 {
        return Err(Error::Argument(format!("beta0 / delta_xi = {b} must divide n = {n}")));
    }
    let peak = phi.max_abs();
    let reach = (n / a + 2) as i64;
    let kept: Vec<i64> = (-reach..=reach)
        .filter(|&j| phi.translate_nodes([j * a as i64, 0]).max_abs() > MASS_THRESHOLD * peak)
        .collect();
    let jrange = (*kept.first().unwrap(), *kept.last().unwrap());
    GaborSystem::with_ranges(phi, a, b, jrange)
}

impl GaborSystem {
    /// A system with an explicit translation range.
    pub fn with_ranges(phi: &SampledSignal, a: usize, b: usize, jrange: (i64, i64)) -> Result<GaborSystem> {
        let grid = phi.grid;
        let n = grid.n();
        if a == 0 || b == 0 || n % b != 0 {
            return Err(Error::Argument(format!("invalid lattice steps a = {a}, b = {b} for n = {n}")));
        }
        if jrange.0 > jrange.1 {
            return Err(Error::Argument("empty translation range".into()));
        }
        let period = (n / b) as i64;
        let lrange = (-(period / 2), period - period / 2 - 1);
        let atoms = (jrange.0..=jrange.1)
            .flat_map(|j| (lrange.0..=lrange.1).map(move |l| (j, l)))
            .collect();
        let redundancy = n as f64 / (a * b) as f64;
        let sampling = if (redundancy - 1.0).abs() < 1e-12 {
            Sampling::Critical
        } else if redundancy > 1.0 {
            Sampling::Oversampled
        } else {
            Sampling::Undersampled
        };
        Ok(GaborSystem {
            phi: phi.clone(),
            alpha0: a as f64 * grid.h(),
            beta0: b as f64 * grid.delta_xi(),
            a,
            b,
            jrange,
            lrange,
            redundancy,
            sampling,
            atoms,
        })
    }

    pub fn grid(&self) -> Grid {
        self.phi.grid
    }

    /// Lattice indices `(j, l)` in column order of [`GaborSystem::synthesis_matrix`].
    pub fn atoms(&self) -> &[(i64, i64)] {
        &self.atoms
    }

    /// `M_{beta0 l} T_{alpha0 j} phi (y) = exp(i beta0 l y) phi(y - alpha0 j)`, zero-extended.
    pub fn atom(&self, j: i64, l: i64) -> SampledSignal {
        let grid = self.grid();
        let mut t = self.phi.translate_nodes([j * self.a as i64, 0]);
        let omega = self.beta0 * l as f64;
        for (k, v) in t.values.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, omega * grid.node(k));
        }
        t
    }

    /// Matrix whose columns are the atoms.
    pub fn synthesis_matrix(&self) -> DMatrix<Complex64> {
        let n = self.grid().n();
        let cols: Vec<SampledSignal> = self.atoms.par_iter().map(|&(j, l)| self.atom(j, l)).collect();
        DMatrix::from_fn(n, cols.len(), |r, c| cols[c].values[r])
    }

    /// Frame operator `S = sum <., phi_jl> phi_jl` as a matrix on grid samples.
    pub fn frame_operator(&self) -> DMatrix<Complex64> {
        let phi = self.synthesis_matrix();
        &phi * phi.adjoint() * Complex64::new(self.grid().h(), 0.0)
    }

    /// Analysis coefficients `<f, phi_jl>` in atom order.
    pub fn analysis(&self, f: &SampledSignal) -> Result<Vec<Complex64>> {
        self.grid().check_same(&f.grid, "Gabor analysis")?;
        self.atoms.par_iter().map(|&(j, l)| f.inner(&self.atom(j, l))).collect()
    }

    /// Synthesis `sum c_jl phi_jl`.
    pub fn synthesis(&self, c: &[Complex64]) -> Result<SampledSignal> {
        if c.len() != self.atoms.len() {
            return Err(Error::Structure(format!("{} coefficients for {} atoms", c.len(), self.atoms.len())));
        }
        let mut out = SampledSignal::zeros(self.grid());
        for (&(j, l), &cv) in self.atoms.iter().zip(c) {
            if cv != Complex64::new(0.0, 0.0) {
                out = out.add(&self.atom(j, l).scale(cv))?;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tightness {
    /// Mean diagonal of `S` over the central half of the grid.
    pub frame_constant: f64,
    /// `|| S - A I ||_2 / A`.
    pub defect: f64,
    /// `|| S - S^H ||_F / || S ||_F`.
    pub asymmetry: f64,
}

pub fn tightness_defect(sys: &GaborSystem) -> Tightness {
    let s = sys.frame_operator();
    let n = s.nrows();
    let central = n / 4..3 * n / 4;
    let a = central.clone().map(|i| s[(i, i)].re).sum::<f64>() / central.len() as f64;
    let asymmetry = (&s - s.adjoint()).norm() / s.norm();
    let herm = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigenvalues();
    let dev = eig.iter().map(|e| (e - a).abs()).fold(0.0, f64::max);
    Tightness { frame_constant: a, defect: dev / a, asymmetry }
}

/// Coefficients `c[alpha, beta] = <k, phi_alpha (x) phi_beta>` of a kernel `k(x, y)` against the
/// tensor Gabor system, with `alpha` in `x` and `beta` in `y`.
#[derive(Debug, Clone)]
pub struct GaborCoefficients {
    pub values: DMatrix<Complex64>,
    pub atoms: Vec<(i64, i64)>,
    pub alpha0: f64,
    pub beta0: f64,
    /// Fingerprint of the operator the kernel came from, if any.
    pub source: Option<u64>,
}

/// Coefficients of a kernel given as a matrix `K[(i, j)] = k(x_i, y_j)`:
/// `c = h^2 Phi^H K conj(Phi)`.
pub fn kernel_gabor_coefficients(kernel: &DMatrix<Complex64>, sys: &GaborSystem) -> Result<GaborCoefficients> {
    let n = sys.grid().n();
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(Error::Structure(format!(
            "kernel is {}x{}, Gabor system lives on {} nodes",
            kernel.nrows(),
            kernel.ncols(),
            n
        )));
    }
    let phi = sys.synthesis_matrix();
    let h = sys.grid().h();
    let values = phi.adjoint() * kernel * phi.map(|v| v.conj()) * Complex64::new(h * h, 0.0);
    Ok(GaborCoefficients { values, atoms: sys.atoms.clone(), alpha0: sys.alpha0, beta0: sys.beta0, source: None })
}

/// Kernel `k(x_i, y_j) = M[j, i] / h` of an operator matrix.
pub fn operator_kernel(op: &LocOpMatrix) -> DMatrix<Complex64> {
    op.matrix.transpose() * Complex64::new(1.0 / op.grid.h(), 0.0)
}

/// Coefficients of the kernel of `op`, tagged with its fingerprint.
pub fn operator_gabor_coefficients(op: &LocOpMatrix, sys: &GaborSystem) -> Result<GaborCoefficients> {
    op.grid.check_same(&sys.grid(), "Gabor expansion")?;
    let mut c = kernel_gabor_coefficients(&operator_kernel(op), sys)?;
    c.source = Some(op.fingerprint());
    Ok(c)
}

/// `k = A^{-2} sum c[alpha, beta] phi_alpha (x) phi_beta`.
pub fn reconstruct_kernel(c: &GaborCoefficients, sys: &GaborSystem, frame_constant: f64) -> DMatrix<Complex64> {
    let phi = sys.synthesis_matrix();
    &phi * &c.values * phi.transpose() * Complex64::new(frame_constant.powi(-2), 0.0)
}

impl GaborCoefficients {
    /// Phase-space radius of a coefficient: sup-norm of the two lattice points, with frequency
    /// measured in units of `2 pi`.
    pub fn radius(&self, alpha: usize, beta: usize) -> f64 {
        let (j, l) = self.atoms[alpha];
        let (m, k) = self.atoms[beta];
        let tx = self.alpha0;
        let fx = self.beta0 / (2.0 * std::f64::consts::PI);
        (j.abs() as f64 * tx)
            .max(l.abs() as f64 * fx)
            .max(m.abs() as f64 * tx)
            .max(k.abs() as f64 * fx)
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    /// `(radius, |c|)` sorted by decreasing radius; ties keep storage order.
    fn by_radius(&self) -> Vec<(f64, f64)> {
        let (na, nb) = self.values.shape();
        let mut v: Vec<(f64, f64)> = (0..na)
            .flat_map(|a| (0..nb).map(move |b| (a, b)))
            .map(|(a, b)| (self.radius(a, b), self.values[(a, b)].norm()))
            .collect();
        v.sort_by(|x, y| y.0.total_cmp(&x.0));
        v
    }

    /// Tail sums `t(r) = sum_{radius >= r} |c|` for each `r` in `radii`. Accumulated from the
    /// outside in, so `t` is non-increasing in `r` exactly.
    pub fn tails(&self, radii: &[f64]) -> Vec<(f64, f64)> {
        let sorted = self.by_radius();
        let mut cum = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        for &(_, v) in &sorted {
            acc += v;
            cum.push(acc);
        }
        radii
            .iter()
            .map(|&r| {
                let count = sorted.partition_point(|&(rad, _)| rad >= r);
                (r, if count == 0 { 0.0 } else { cum[count - 1] })
            })
            .collect()
    }

    /// Smallest radius whose ball holds at least half of the `l1` mass.
    pub fn median_radius(&self) -> f64 {
        let mut v = self.by_radius();
        v.reverse();
        let total: f64 = v.iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        for (r, m) in v {
            acc += m;
            if acc >= 0.5 * total {
                return r;
            }
        }
        0.0
    }
}

/// Radii `2 r0, 4 r0, 8 r0` for the tail-halving check, starting past the median-mass radius `r0`.
pub fn tail_ladder(r0: f64) -> Vec<f64> {
    [2.0, 4.0, 8.0].iter().map(|k| k * r0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuclearReport {
    /// `A^{-2} sum |c| ||phi_alpha|| ||phi_beta||`.
    pub bound: f64,
    /// Sum of singular values.
    pub trace_norm: f64,
    /// `trace_norm / bound` (0 when both vanish).
    pub ratio: f64,
}

/// Nuclear-norm bound from the Gabor expansion of `op`'s kernel versus its trace norm.
pub fn nuclear_bound(c: &GaborCoefficients, sys: &GaborSystem, op: &LocOpMatrix, frame_constant: f64) -> Result<NuclearReport> {
    if c.source != Some(op.fingerprint()) {
        return Err(Error::Argument("coefficients were not computed from this operator's kernel".into()));
    }
    if c.atoms != sys.atoms {
        return Err(Error::Argument("coefficients belong to a different Gabor system".into()));
    }
    let norms: Vec<f64> = sys.atoms.iter().map(|&(j, l)| sys.atom(j, l).norm_l2()).collect();
    let mut bound = 0.0;
    for a in 0..norms.len() {
        for b in 0..norms.len() {
            bound += c.values[(a, b)].norm() * norms[a] * norms[b];
        }
    }
    bound /= frame_constant * frame_constant;
    let trace_norm: f64 = singular_values(op)?.iter().sum();
    let ratio = if bound == 0.0 { 0.0 } else { trace_norm / bound };
    Ok(NuclearReport { bound, trace_norm, ratio })
}
