//! Localization operators `L^a_{psi,gamma} f = V*_gamma (a . V_psi f)` as dense matrices, their
//! Weyl symbols and kernels, spectra, norm estimators and the symbol decay hypothesis check.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, PhaseSpaceFunction, SampledSignal};
use crate::norms::{modulation_norm, Exponent, MixedNormParams};
use crate::signals::random_mixture;
use crate::symbol_stft;
use crate::transforms::{cross_wigner, cross_wigner_half_shifted, stft, stft_adjoint, CenteredDft};
use crate::weights::WeightSpec;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Analytic family a symbol was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolKind {
    Constant { value: f64 },
    /// `exp(-z^T D z)` with `z = (x, xi)`.
    Gaussian { decay: [[f64; 2]; 2] },
    /// Indicator of `[-wx, wx] x [-wxi, wxi]`.
    Indicator { half_width: [f64; 2] },
    /// `exp(-b x^2)`, independent of `xi`.
    XOnly { b: f64 },
    UserSampled,
}

/// A sampled symbol `a(x, xi)` with its analytic description.
#[derive(Debug, Clone)]
pub struct SymbolSpec {
    pub id: String,
    pub kind: SymbolKind,
    pub samples: PhaseSpaceFunction,
    /// Whether the generator expects the weighted STFT decay hypothesis to hold.
    pub expects_2m2: bool,
}

/// Identifiers of the built-in symbols, in catalog order.
pub const BUILTIN_SYMBOLS: [&str; 5] = ["const", "gauss", "gauss_aniso", "box", "xonly"];

impl SymbolKind {
    pub fn eval(&self, x: f64, xi: f64) -> Option<f64> {
        Some(match *self {
            SymbolKind::Constant { value } => value,
            SymbolKind::Gaussian { decay: d } => {
                (-(d[0][0] * x * x + (d[0][1] + d[1][0]) * x * xi + d[1][1] * xi * xi)).exp()
            }
            SymbolKind::Indicator { half_width: [wx, wxi] } => {
                if x.abs() <= wx && xi.abs() <= wxi {
                    1.0
                } else {
                    0.0
                }
            }
            SymbolKind::XOnly { b } => (-b * x * x).exp(),
            SymbolKind::UserSampled => return None,
        })
    }
}

impl SymbolSpec {
    fn analytic(id: &str, grid: Grid, kind: SymbolKind, expects_2m2: bool) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::Structure("built-in symbols are provided for d = 1".into()));
        }
        let k = kind.clone();
        let samples =
            PhaseSpaceFunction::from_fn(grid, |x, xi| Complex64::new(k.eval(x[0], xi[0]).unwrap_or(0.0), 0.0));
        Ok(Self { id: id.to_string(), kind, samples, expects_2m2 })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::analytic("const", grid, SymbolKind::Constant { value }, value == 0.0)
    }

    pub fn gaussian(grid: Grid, decay: [[f64; 2]; 2]) -> Result<Self> {
        let det = decay[0][0] * decay[1][1] - 0.25 * (decay[0][1] + decay[1][0]).powi(2);
        if !(decay[0][0] > 0.0 && det > 0.0) {
            return Err(Error::Argument("Gaussian decay matrix must be positive definite".into()));
        }
        Self::analytic("gauss", grid, SymbolKind::Gaussian { decay }, true)
    }

    pub fn indicator(grid: Grid, half_width: [f64; 2]) -> Result<Self> {
        if !(half_width[0] > 0.0 && half_width[1] > 0.0) {
            return Err(Error::Argument("box half-widths must be positive".into()));
        }
        Self::analytic("box", grid, SymbolKind::Indicator { half_width }, true)
    }

    pub fn x_only(grid: Grid, b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::Argument("x-only decay rate must be positive".into()));
        }
        Self::analytic("xonly", grid, SymbolKind::XOnly { b }, false)
    }

    pub fn user_sampled(id: &str, samples: PhaseSpaceFunction) -> Result<Self> {
        if !samples.is_finite() {
            return Err(Error::Data(format!("symbol {id} has non-finite samples")));
        }
        Ok(Self { id: id.to_string(), kind: SymbolKind::UserSampled, samples, expects_2m2: false })
    }

    /// Built-in symbol by id: `const`, `gauss`, `gauss_aniso`, `box`, `xonly`.
    pub fn builtin(id: &str, grid: Grid) -> Result<Self> {
        let mut s = match id {
            "const" => Self::constant(grid, 1.0)?,
            "gauss" => Self::gaussian(grid, [[1.0, 0.0], [0.0, 1.0]])?,
            "gauss_aniso" => Self::gaussian(grid, [[2.0, 0.0], [0.0, 0.5]])?,
            "box" => Self::indicator(grid, [2.0, 2.0])?,
            "xonly" => Self::x_only(grid, 1.0)?,
            other => return Err(Error::Config(format!("unknown symbol id {other:?}"))),
        };
        s.id = id.to_string();
        Ok(s)
    }

    pub fn scale(&self, c: f64) -> SymbolSpec {
        let mut out = self.clone();
        out.samples = self.samples.scale(Complex64::new(c, 0.0));
        if let SymbolKind::Constant { value } = out.kind {
            out.kind = SymbolKind::Constant { value: value * c };
        } else if c != 1.0 {
            out.kind = SymbolKind::UserSampled;
        }
        out
    }
}

/// How a matrix was built.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Localization,
    WeylKernel,
    RankOne,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Provenance {
    pub route: Route,
    pub symbol_id: String,
    pub windows: [String; 2],
}

/// Dense matrix acting on grid samples: `(L f)_i = sum_j M[i, j] f_j`. With the quadrature
/// inner product the singular values of `M` approximate those of the continuous operator.
#[derive(Debug, Clone)]
pub struct LocOpMatrix {
    pub grid: Grid,
    pub matrix: DMatrix<Complex64>,
    pub provenance: Provenance,
    fingerprint: u64,
}

impl LocOpMatrix {
    pub fn new(grid: Grid, matrix: DMatrix<Complex64>, provenance: Provenance) -> Result<Self> {
        if matrix.nrows() != grid.len() || matrix.ncols() != grid.len() {
            return Err(Error::Structure(format!(
                "matrix is {}x{}, grid has {} nodes",
                matrix.nrows(),
                matrix.ncols(),
                grid.len()
            )));
        }
        if matrix.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Data("operator matrix has non-finite entries".into()));
        }
        let fingerprint = fingerprint_of(&matrix, &provenance);
        Ok(Self { grid, matrix, provenance, fingerprint })
    }

    pub fn zero(grid: Grid) -> Self {
        let p = Provenance { route: Route::Explicit, symbol_id: "zero".into(), windows: ["-".into(), "-".into()] };
        Self::new(grid, DMatrix::zeros(grid.len(), grid.len()), p).expect("zero matrix is valid")
    }

    /// `f -> <f, phi> phi`.
    pub fn rank_one(phi: &SampledSignal, id: &str) -> Result<Self> {
        let grid = phi.grid;
        let v = DVector::from_column_slice(&phi.values);
        let m = v.clone() * v.adjoint() * Complex64::new(grid.cell(), 0.0);
        let p = Provenance { route: Route::RankOne, symbol_id: id.into(), windows: [id.into(), id.into()] };
        Self::new(grid, m, p)
    }

    /// Hash of the matrix entries and provenance; identifies which operator derived data came from.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut p = self.provenance.clone();
        p.symbol_id = format!("{}*{}", self.provenance.symbol_id, c);
        Self::new(self.grid, &self.matrix * c, p).expect("scaling keeps entries finite")
    }

    /// `|| L - L^H ||_F / || L ||_F`.
    pub fn hermitian_defect(&self) -> f64 {
        let nrm = self.matrix.norm();
        if nrm == 0.0 {
            return 0.0;
        }
        (&self.matrix - self.matrix.adjoint()).norm() / nrm
    }

    /// Eigenvalues of the hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

fn fingerprint_of(m: &DMatrix<Complex64>, p: &Provenance) -> u64 {
    let mut h = DefaultHasher::new();
    p.hash(&mut h);
    m.nrows().hash(&mut h);
    for v in m.iter() {
        v.re.to_bits().hash(&mut h);
        v.im.to_bits().hash(&mut h);
    }
    h.finish()
}

fn window_id(w: &SampledSignal) -> String {
    let mut h = DefaultHasher::new();
    for v in &w.values {
        v.re.to_bits().hash(&mut h);
        v.im.to_bits().hash(&mut h);
    }
    format!("{:016x}", h.finish())
}

fn require_1d(grid: &Grid, what: &str) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::Structure(format!("{what} is implemented for d = 1")));
    }
    Ok(())
}

/// Assembles `L^a_{psi,gamma}` column by column: `stft`, multiply by `a`, `stft_adjoint`.
pub fn localization_matrix(a: &SymbolSpec, psi: &SampledSignal, gamma: &SampledSignal) -> Result<LocOpMatrix> {
    let grid = psi.grid;
    require_1d(&grid, "operator assembly")?;
    grid.check_same(&gamma.grid, "localization operator")?;
    grid.check_same(&a.samples.grid, "localization operator")?;
    if psi.is_zero() || gamma.is_zero() {
        return Err(Error::Argument("windows must be nonzero".into()));
    }
    if !a.samples.is_finite() {
        return Err(Error::Data(format!("symbol {} has non-finite samples", a.id)));
    }
    let n = grid.len();
    let columns: Vec<Result<Vec<Complex64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = SampledSignal::zeros(grid);
            e.values[j] = Complex64::new(1.0, 0.0);
            let v = stft(&e, psi)?.multiply(&a.samples)?;
            Ok(stft_adjoint(&v, gamma)?.values)
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (j, col) in columns.into_iter().enumerate() {
        for (i, v) in col?.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let prov = Provenance {
        route: Route::Localization,
        symbol_id: a.id.clone(),
        windows: [window_id(psi), window_id(gamma)],
    };
    LocOpMatrix::new(grid, m, prov)
}

/// `L f` as grid samples.
pub fn apply(op: &LocOpMatrix, f: &SampledSignal) -> Result<SampledSignal> {
    op.grid.check_same(&f.grid, "operator application")?;
    let v = &op.matrix * DVector::from_column_slice(&f.values);
    Ok(SampledSignal { grid: f.grid, values: v.iter().copied().collect() })
}

/// Weyl symbol `a^w = a * W(gamma, psi)` sampled at the grid positions `x_j` (`integer`) and at
/// the midpoints `x_j + h/2` (`half`).
#[derive(Debug, Clone)]
pub struct WeylSymbol {
    pub integer: PhaseSpaceFunction,
    pub half: PhaseSpaceFunction,
}

/// Moves the origin of a centered `n x n` array to index 0 and transforms it.
fn fft2_origin_shifted(values: &[Complex64], n: usize, plan: &CenteredPlan) -> Vec<Complex64> {
    let mut buf = vec![ZERO; n * n];
    for i in 0..n {
        for m in 0..n {
            buf[((i + n / 2) % n) * n + (m + n / 2) % n] = values[i * n + m];
        }
    }
    plan.forward(&mut buf);
    buf
}

struct CenteredPlan {
    n: usize,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl CenteredPlan {
    fn new(n: usize) -> Self {
        let mut p = rustfft::FftPlanner::new();
        Self { n, fwd: p.plan_fft_forward(n), inv: p.plan_fft_inverse(n) }
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.inv } else { &self.fwd };
        for row in buf.chunks_exact_mut(n) {
            plan.process(row);
        }
        let mut col = vec![ZERO; n];
        for c in 0..n {
            for r in 0..n {
                col[r] = buf[r * n + c];
            }
            plan.process(&mut col);
            for r in 0..n {
                buf[r * n + c] = col[r];
            }
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }
}

/// `(h delta_xi) sum_u a(u) w(z - u)` with periodic indices, `w` centered at `(n/2, n/2)`.
fn circular_convolution(a_hat: &[Complex64], w: &PhaseSpaceFunction, plan: &CenteredPlan) -> Vec<Complex64> {
    let n = plan.n;
    let w_hat = fft2_origin_shifted(&w.values, n, plan);
    let mut prod: Vec<Complex64> = a_hat.iter().zip(&w_hat).map(|(x, y)| x * y).collect();
    plan.inverse(&mut prod);
    let c = w.grid.h() * w.grid.delta_xi() / (n * n) as f64;
    prod.iter_mut().for_each(|v| *v *= c);
    prod
}

/// `a^w = a * W(gamma, psi)` by FFT convolution (periodic in both variables).
pub fn weyl_symbol(a: &SymbolSpec, psi: &SampledSignal, gamma: &SampledSignal) -> Result<WeylSymbol> {
    let grid = psi.grid;
    require_1d(&grid, "Weyl symbol")?;
    grid.check_same(&a.samples.grid, "Weyl symbol")?;
    let w = cross_wigner(gamma, psi)?;
    let wh = cross_wigner_half_shifted(gamma, psi)?;
    let n = grid.n();
    let plan = CenteredPlan::new(n);
    let mut a_hat = a.samples.values.clone();
    plan.forward(&mut a_hat);
    let integer = PhaseSpaceFunction { grid, values: circular_convolution(&a_hat, &w, &plan) };
    let half = PhaseSpaceFunction { grid, values: circular_convolution(&a_hat, &wh, &plan) };
    Ok(WeylSymbol { integer, half })
}

/// `a^w = a * W(gamma, psi)` at the integer nodes with zero extension: a direct sum over `x`
/// and zero-padded FFT convolution along `xi`. Accurate relative to the local size of `a^w`
/// in `x`, so far tails are resolved below the rounding floor of [`weyl_symbol`].
pub fn weyl_symbol_direct(a: &SymbolSpec, psi: &SampledSignal, gamma: &SampledSignal) -> Result<PhaseSpaceFunction> {
    let grid = psi.grid;
    require_1d(&grid, "Weyl symbol")?;
    grid.check_same(&a.samples.grid, "Weyl symbol")?;
    let w = cross_wigner(gamma, psi)?;
    let n = grid.n();
    let half = n / 2;
    let len = 2 * n;
    let cell = grid.h() * grid.delta_xi();
    let mut planner = rustfft::FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let padded = |row: &[Complex64]| {
        let mut buf = vec![ZERO; len];
        buf[..n].copy_from_slice(row);
        fwd.process(&mut buf);
        buf
    };
    let a_hat: Vec<(usize, Vec<Complex64>)> = (0..n)
        .filter(|&u| a.samples.row(u).iter().any(|v| *v != ZERO))
        .map(|u| (u, padded(a.samples.row(u))))
        .collect();
    let w_hat: Vec<Option<Vec<Complex64>>> = (0..n)
        .map(|r| w.row(r).iter().any(|v| *v != ZERO).then(|| padded(w.row(r))))
        .collect();
    let scale = cell / len as f64;
    let mut values = vec![ZERO; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
        let mut acc = vec![ZERO; len];
        for (u, ah) in &a_hat {
            // W row index i - u + n/2 must be on the grid
            let r = i as i64 - *u as i64 + half as i64;
            if r < 0 || r >= n as i64 {
                continue;
            }
            let Some(wh) = &w_hat[r as usize] else { continue };
            for ((c, x), y) in acc.iter_mut().zip(ah).zip(wh) {
                *c += x * y;
            }
        }
        inv.process(&mut acc);
        for (m, o) in out.iter_mut().enumerate() {
            *o = acc[m + half] * scale;
        }
    });
    Ok(PhaseSpaceFunction { grid, values })
}

/// Weyl kernel `k(x, y)` with `L f(y) = int k(x, y) f(x) dx`, stored as `values[(i, j)] = k(x_i, y_j)`.
#[derive(Debug, Clone)]
pub struct WeylKernel {
    pub grid: Grid,
    pub values: DMatrix<Complex64>,
}

/// `k(x, y) = (2 pi)^{-1} int a^w((x + y)/2, xi) exp(i xi (y - x)) dxi`.
///
/// Midpoints of two grid nodes are grid nodes or half-nodes, read from the matching part of `aw`.
/// The grid is treated as periodic, matching the circular window shifts of the STFT.
pub fn weyl_kernel(aw: &WeylSymbol) -> Result<WeylKernel> {
    let grid = aw.integer.grid;
    require_1d(&grid, "Weyl kernel")?;
    grid.check_same(&aw.half.grid, "Weyl kernel")?;
    let n = grid.n();
    let dft = CenteredDft::new(n, 1);
    let c = grid.delta_xi() / (2.0 * PI);
    let transform = |f: &PhaseSpaceFunction| -> Vec<Vec<Complex64>> {
        (0..n)
            .into_par_iter()
            .map(|j| {
                let mut row = f.row(j).to_vec();
                dft.apply(&mut row, true);
                row.iter_mut().for_each(|v| *v *= c);
                row
            })
            .collect()
    };
    let g_int = transform(&aw.integer);
    let g_half = transform(&aw.half);
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // x = x_i, y = x_j; y - x = (j - i) h sits at centered index j - i + n/2 (mod n).
            // Positions live on a circle of length 2T, so the midpoint is taken along the
            // shorter arc between the two nodes.
            let diff = j as i64 - i as i64;
            let wraps = diff >= (n / 2) as i64 || diff < -((n / 2) as i64);
            let s = (i + j + if wraps { n } else { 0 }) % (2 * n);
            let row = if s % 2 == 0 { &g_int[s / 2] } else { &g_half[(s - 1) / 2] };
            values[(i, j)] = row[(j + n + n / 2 - i) % n];
        }
    }
    Ok(WeylKernel { grid, values })
}

/// Operator matrix of a kernel: `M[j, i] = h k(x_i, y_j)`.
pub fn kernel_matrix(k: &WeylKernel, provenance: Provenance) -> Result<LocOpMatrix> {
    let m = k.values.transpose() * Complex64::new(k.grid.h(), 0.0);
    LocOpMatrix::new(k.grid, m, provenance)
}

/// The kernel route end to end: symbol, Weyl symbol, kernel, matrix.
pub fn weyl_route_matrix(a: &SymbolSpec, psi: &SampledSignal, gamma: &SampledSignal) -> Result<LocOpMatrix> {
    let k = weyl_kernel(&weyl_symbol(a, psi, gamma)?)?;
    let prov = Provenance {
        route: Route::WeylKernel,
        symbol_id: a.id.clone(),
        windows: [window_id(psi), window_id(gamma)],
    };
    kernel_matrix(&k, prov)
}

/// Singular values, non-increasing.
pub fn singular_values(op: &LocOpMatrix) -> Result<Vec<f64>> {
    let n = op.matrix.nrows();
    if op.matrix.iter().all(|v| *v == ZERO) {
        return Ok(vec![0.0; n]);
    }
    let svd = op.matrix.clone().try_svd(false, false, f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Numerical(format!(
            "SVD did not converge for a {n}x{n} matrix with Frobenius norm {:.3e}",
            op.matrix.norm()
        ))
    })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Result of [`operator_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// `true` when the value is the exact largest singular value.
    pub exact: bool,
    pub trials_used: usize,
}

/// Deterministic trial signal number `t` of the norm estimator family.
pub fn trial_family(grid: Grid, seed: u64, count: usize) -> Vec<SampledSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = grid.extent() / 3.0;
    (0..count).map(|_| random_mixture(grid, &mut rng, spread, 4.0)).collect()
}

/// Operator norm on `M^{p,q}_m`. For `(2, 2, unit weight)` this is the largest singular value;
/// otherwise it is a lower bound: the largest ratio `||L f|| / ||f||` over a seeded family of
/// time-frequency shifted Gaussian mixtures.
pub fn operator_norm(
    op: &LocOpMatrix,
    params: &MixedNormParams,
    window: &SampledSignal,
    trial_count: usize,
    seed: u64,
) -> Result<NormEstimate> {
    if trial_count == 0 {
        return Err(Error::Argument("trial_count must be at least 1".into()));
    }
    if params.p == Exponent::TWO && params.q == Exponent::TWO && params.weight.is_unit() {
        let s = singular_values(op)?;
        return Ok(NormEstimate { value: s[0], exact: true, trials_used: 0 });
    }
    let trials = trial_family(op.grid, seed, trial_count);
    let ratios: Vec<Result<Option<f64>>> = trials
        .par_iter()
        .map(|f| {
            let den = modulation_norm(f, window, params)?;
            if den == 0.0 || !den.is_finite() {
                return Ok(None);
            }
            let num = modulation_norm(&apply(op, f)?, window, params)?;
            Ok(Some(num / den))
        })
        .collect();
    let mut best: Option<f64> = None;
    let mut used = 0;
    for r in ratios {
        if let Some(v) = r? {
            used += 1;
            best = Some(best.map_or(v, |b| b.max(v)));
        }
    }
    match best {
        Some(value) => Ok(NormEstimate { value, exact: false, trials_used: used }),
        None => Err(Error::Argument("every trial signal was degenerate".into())),
    }
}

/// Frequency envelope `zeta -> max_z |V_G a(z, zeta)|` of a symbol over the lattice scan.
///
/// The envelope does not depend on the weight, so one scan serves every `||a||_{M^inf_m}`
/// evaluation for the same symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolEnvelope {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl SymbolEnvelope {
    pub fn compute(a: &PhaseSpaceFunction, stride: usize) -> Result<Self> {
        let n = a.grid.n();
        let slices = symbol_stft::scan(a, stride, |s| s.values.iter().map(|v| v.norm()).collect::<Vec<f64>>())?;
        let mut values = vec![0.0f64; n * n];
        for sl in slices {
            for (e, v) in values.iter_mut().zip(sl) {
                *e = e.max(v);
            }
        }
        Ok(Self { grid: a.grid, values })
    }

    /// `sup_zeta envelope(zeta) exp(-lambda omega(zeta))`.
    pub fn sup_norm(&self, weight: &WeightSpec) -> f64 {
        let n = self.grid.n();
        let h = self.grid.h();
        let dual = self.grid.dual();
        let mut best: f64 = 0.0;
        for k in 0..n {
            for l in 0..n {
                let zx = dual.node(k);
                let zxi = (l as f64 - (n / 2) as f64) * h;
                let w = (-weight.lambda * weight.omega.eval_norm(&[zx, zxi])).exp();
                best = best.max(self.values[k * n + l] * w);
            }
        }
        best
    }
}

/// `|| a ||_{M^inf_{m_{-lambda,2}}} = sup_{z, zeta} |V_G a(z, zeta)| exp(-lambda omega(zeta))`
/// over the lattice scan.
pub fn symbol_sup_norm(a: &PhaseSpaceFunction, weight: &WeightSpec, stride: usize) -> Result<f64> {
    Ok(SymbolEnvelope::compute(a, stride)?.sup_norm(weight))
}

/// One radius of a [`check_2m2`] report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub radius: f64,
    /// `(x, xi, sup_{|zeta| <= R} |V_G a(z, zeta)| exp(lambda omega(z, zeta)))` per lattice position.
    pub profile: Vec<(f64, f64, f64)>,
    pub peak: f64,
    pub edge_time: f64,
    pub edge_frequency: f64,
}

impl DecayProfile {
    pub fn edge_ratio(&self) -> f64 {
        if self.peak == 0.0 {
            0.0
        } else {
            self.edge_time.max(self.edge_frequency) / self.peak
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoMTwoReport {
    pub symbol_id: String,
    pub profiles: Vec<DecayProfile>,
    pub threshold: f64,
    pub holds: bool,
}

/// Threshold on `edge / peak` below which the decay hypothesis counts as satisfied.
pub const DECAY_THRESHOLD: f64 = 1e-4;

/// Weighted decay of the symbol's STFT (window `exp(-pi |.|^2)` on the `(x, xi)` plane) in the
/// position variable, uniformly on frequency balls `|zeta| <= R`.
pub fn check_2m2(a: &SymbolSpec, weight: &WeightSpec, radii: &[f64], stride: usize) -> Result<TwoMTwoReport> {
    let grid = a.samples.grid;
    require_1d(&grid, "symbol decay check")?;
    if weight.lambda < 0.0 {
        return Err(Error::Argument("decay check needs lambda >= 0".into()));
    }
    let limit = (PI / grid.h()).min(grid.extent());
    if radii.is_empty() {
        return Err(Error::Argument("at least one radius is required".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r <= limit)) {
        return Err(Error::Argument(format!("radius {r} outside (0, {limit}]")));
    }
    let n = grid.n();
    let lam = weight.lambda;
    let om = weight.omega;
    let rows = symbol_stft::scan(&a.samples, stride, |s| {
        let mut sup = vec![0.0f64; radii.len()];
        for k in 0..n {
            for l in 0..n {
                let (zx, zxi) = (s.freq_x[k], s.freq_xi[l]);
                let r = (zx * zx + zxi * zxi).sqrt();
                let v = s.values[k * n + l].norm();
                if v == 0.0 {
                    continue;
                }
                let wv = v * (lam * om.eval_norm(&[s.x, s.xi, zx, zxi])).exp();
                for (slot, &big_r) in sup.iter_mut().zip(radii) {
                    if r <= big_r {
                        *slot = slot.max(wv);
                    }
                }
            }
        }
        (s.x, s.xi, sup)
    })?;
    let xi_extent = PI / grid.h();
    let t = grid.extent();
    let profiles: Vec<DecayProfile> = radii
        .iter()
        .enumerate()
        .map(|(ri, &radius)| {
            let profile: Vec<(f64, f64, f64)> = rows.iter().map(|(x, xi, s)| (*x, *xi, s[ri])).collect();
            let peak = profile.iter().map(|p| p.2).fold(0.0, f64::max);
            let edge_time = profile.iter().filter(|p| p.0.abs() >= 0.8 * t).map(|p| p.2).fold(0.0, f64::max);
            let edge_frequency =
                profile.iter().filter(|p| p.1.abs() >= 0.8 * xi_extent).map(|p| p.2).fold(0.0, f64::max);
            DecayProfile { radius, profile, peak, edge_time, edge_frequency }
        })
        .collect();
    let holds = profiles.iter().all(|p| p.edge_ratio() < DECAY_THRESHOLD);
    Ok(TwoMTwoReport { symbol_id: a.id.clone(), profiles, threshold: DECAY_THRESHOLD, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gaussian, hermite1, random_mixture};
    use crate::transforms::cross_wigner;
    use crate::weights::WeightFunction;
    use approx::assert_relative_eq;

    fn small() -> Grid {
        Grid::with_extent(1, 64, 6.0).unwrap()
    }

    #[test]
    fn constant_symbol_gives_scaled_identity() {
        let g = small();
        let g0 = gaussian(g);
        let op = localization_matrix(&SymbolSpec::builtin("const", g).unwrap(), &g0, &g0).unwrap();
        let c = 2.0 * PI * g0.inner(&g0).unwrap().re;
        let dev = (&op.matrix - DMatrix::<Complex64>::identity(64, 64) * Complex64::new(c, 0.0)).norm();
        assert!(dev / c < 1e-10, "{}", dev / c);
        let unit = op.scale(Complex64::new(1.0 / c, 0.0));
        let h1 = hermite1(g);
        let back = apply(&unit, &h1).unwrap();
        assert!(back.sub(&h1).unwrap().norm_l2() < 1e-6 * h1.norm_l2());
    }

    #[test]
    fn zero_symbol_and_zero_input() {
        let g = small();
        let g0 = gaussian(g);
        let op = localization_matrix(&SymbolSpec::constant(g, 0.0).unwrap(), &g0, &g0).unwrap();
        assert!(op.matrix.iter().all(|v| *v == ZERO));
        assert!(singular_values(&op).unwrap().iter().all(|&s| s == 0.0));
        let op = localization_matrix(&SymbolSpec::builtin("gauss", g).unwrap(), &g0, &g0).unwrap();
        assert!(apply(&op, &SampledSignal::zeros(g)).unwrap().is_zero());
    }

    #[test]
    fn radial_symbol_has_gaussian_eigenfunction() {
        // radial with respect to the exp(-i y xi) convention: exp(-pi (x^2 + (xi / 2 pi)^2))
        let g = Grid::with_extent(1, 128, 12.0).unwrap();
        let g0 = gaussian(g);
        let a = SymbolSpec::analytic(
            "radial",
            g,
            SymbolKind::Gaussian { decay: [[PI, 0.0], [0.0, 1.0 / (4.0 * PI)]] },
            true,
        )
        .unwrap();
        let op = localization_matrix(&a, &g0, &g0).unwrap();
        let lg = apply(&op, &g0).unwrap();
        let mu = lg.inner(&g0).unwrap() / g0.inner(&g0).unwrap();
        let res = lg.sub(&g0.scale(mu)).unwrap().norm_l2() / lg.norm_l2();
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn adjoint_identity_for_operator() {
        let g = small();
        let g0 = gaussian(g);
        let h1 = hermite1(g);
        let a = SymbolSpec::builtin("gauss_aniso", g).unwrap();
        let op = localization_matrix(&a, &g0, &h1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let f = random_mixture(g, &mut rng, 2.0, 2.0);
            let h = random_mixture(g, &mut rng, 2.0, 2.0);
            let lhs = apply(&op, &f).unwrap().inner(&h).unwrap();
            let rhs = stft(&f, &g0).unwrap().multiply(&a.samples).unwrap().inner(&stft(&h, &h1).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-300));
        }
    }

    #[test]
    fn hermitian_and_positive() {
        let g = small();
        let g0 = gaussian(g);
        for id in ["gauss", "box", "xonly"] {
            let op = localization_matrix(&SymbolSpec::builtin(id, g).unwrap(), &g0, &g0).unwrap();
            assert!(op.hermitian_defect() <= 1e-10, "{id}");
            let s1 = singular_values(&op).unwrap()[0];
            assert!(op.hermitian_eigenvalues()[0] >= -1e-8 * s1, "{id}");
        }
    }

    #[test]
    fn point_mass_symbol_reproduces_wigner() {
        let g = small();
        let g0 = gaussian(g);
        let h1 = hermite1(g);
        let mut samples = PhaseSpaceFunction::zeros(g);
        samples.values[32 * 64 + 32] = Complex64::new(1.0 / (g.h() * g.delta_xi()), 0.0);
        let a = SymbolSpec::user_sampled("delta", samples).unwrap();
        let aw = weyl_symbol(&a, &h1, &g0).unwrap();
        let w = cross_wigner(&g0, &h1).unwrap();
        let scale = w.max_abs();
        for (x, y) in aw.integer.values.iter().zip(&w.values) {
            assert!((x - y).norm() <= 1e-12 * scale);
        }
        let direct = weyl_symbol_direct(&a, &h1, &g0).unwrap();
        for (x, y) in direct.values.iter().zip(&w.values) {
            assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn constant_weyl_symbol_and_kernel() {
        let g = Grid::with_extent(1, 128, 12.0).unwrap();
        let g0 = gaussian(g);
        let a = SymbolSpec::builtin("const", g).unwrap();
        let aw = weyl_symbol(&a, &g0, &g0).unwrap();
        let c = 2.0 * PI * g0.inner(&g0).unwrap().re;
        for i in 32..96 {
            for m in 32..96 {
                assert!((aw.integer.at(i, m).re - c).abs() < 1e-6 * c);
            }
        }
        let k = weyl_kernel(&aw).unwrap();
        let (mut diag, mut off) = (0.0, 0.0);
        for i in 0..128usize {
            for j in 0..128usize {
                let d = (i as i64 - j as i64).abs();
                let d = d.min(128 - d);
                if d == 0 {
                    diag += k.values[(i, j)].norm();
                } else if d > 4 {
                    off += k.values[(i, j)].norm();
                }
            }
        }
        assert!(off < 1e-6 * diag);
        let zero = WeylSymbol { integer: PhaseSpaceFunction::zeros(g), half: PhaseSpaceFunction::zeros(g) };
        assert!(weyl_kernel(&zero).unwrap().values.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn weyl_symbol_linear_in_symbol() {
        let g = small();
        let g0 = gaussian(g);
        let a = SymbolSpec::builtin("gauss", g).unwrap();
        let one = weyl_symbol(&a, &g0, &g0).unwrap();
        let two = weyl_symbol(&a.scale(2.0), &g0, &g0).unwrap();
        for (x, y) in one.integer.values.iter().zip(&two.integer.values) {
            assert_eq!(*x * 2.0, *y);
        }
    }

    #[test]
    fn direct_symbol_matches_fft_symbol() {
        let g = Grid::with_extent(1, 64, 8.0).unwrap();
        let g0 = gaussian(g);
        let a = SymbolSpec::builtin("gauss", g).unwrap();
        let fft = weyl_symbol(&a, &g0, &g0).unwrap().integer;
        let direct = weyl_symbol_direct(&a, &g0, &g0).unwrap();
        let scale = fft.max_abs();
        for (x, y) in fft.values.iter().zip(&direct.values) {
            assert!((x - y).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn direct_symbol_resolves_gaussian_tails() {
        let g = Grid::with_extent(1, 256, 16.0).unwrap();
        let g0 = gaussian(g);
        let a = SymbolSpec::builtin("gauss", g).unwrap();
        let aw = weyl_symbol_direct(&a, &g0, &g0).unwrap();
        let c = 1.0 + 2.0 * PI;
        let exact = |x: f64, xi: f64| 2.0 * PI.powf(1.5) / c * (-(2.0 * PI * x * x + xi * xi) / c).exp();
        let dual = g.dual();
        let mut checked = 0;
        for i in 0..256 {
            let x = g.node(i);
            if !(8.0..=12.0).contains(&x.abs()) {
                continue;
            }
            for m in 0..256 {
                let xi = dual.node(m);
                if xi.abs() > 3.0 {
                    continue;
                }
                let e = exact(x, xi);
                assert!((aw.at(i, m).re - e).abs() <= 1e-8 * e, "x={x} xi={xi}");
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn routes_agree_on_small_grid() {
        let g = Grid::with_extent(1, 64, 8.0).unwrap();
        let g0 = gaussian(g);
        let gamma = crate::signals::shifted_gaussian(g, &[0.3], &[0.5], 1.2);
        for id in BUILTIN_SYMBOLS {
            let a = SymbolSpec::builtin(id, g).unwrap();
            let l = localization_matrix(&a, &g0, &gamma).unwrap();
            let k = weyl_route_matrix(&a, &g0, &gamma).unwrap();
            let rel = (&l.matrix - &k.matrix).norm() / l.matrix.norm();
            assert!(rel < 1e-5, "{id}: {rel}");
        }
    }

    #[test]
    fn operator_norm_behaviour() {
        let g = small();
        let g0 = gaussian(g);
        let op = localization_matrix(&SymbolSpec::builtin("const", g).unwrap(), &g0, &g0).unwrap();
        let p22 = MixedNormParams::unweighted(Exponent::TWO, Exponent::TWO);
        let est = operator_norm(&op, &p22, &g0, 1, 0).unwrap();
        assert!(est.exact);
        assert_eq!(est.value, singular_values(&op).unwrap()[0]);
        assert_relative_eq!(est.value, 2.0 * PI * g0.inner(&g0).unwrap().re, max_relative = 1e-6);
        let gop = localization_matrix(&SymbolSpec::builtin("gauss", g).unwrap(), &g0, &g0).unwrap();
        let p11 = MixedNormParams::new(Exponent::ONE, Exponent::ONE, WeightSpec::full(WeightFunction::log1p(), 1.0));
        let mut prev = 0.0;
        for t in [1, 2, 4, 8] {
            let e = operator_norm(&gop, &p11, &g0, t, 17).unwrap();
            assert!(e.value >= prev);
            prev = e.value;
        }
        assert!(matches!(operator_norm(&gop, &p11, &g0, 0, 17), Err(Error::Argument(_))));
    }

    #[test]
    fn rank_one_and_fingerprint() {
        let g = small();
        let g0 = gaussian(g);
        let op = LocOpMatrix::rank_one(&g0, "g0").unwrap();
        let s = singular_values(&op).unwrap();
        assert_relative_eq!(s[0], g0.norm_l2().powi(2), max_relative = 1e-10);
        assert!(s[1] < 1e-12);
        let op2 = op.scale(Complex64::new(2.0, 0.0));
        assert_ne!(op.fingerprint(), op2.fingerprint());
        assert_eq!(op.fingerprint(), LocOpMatrix::rank_one(&g0, "g0").unwrap().fingerprint());
    }

    #[test]
    fn decay_hypothesis_cases() {
        let g = Grid::with_extent(1, 96, 12.0).unwrap();
        let w = WeightSpec::full(WeightFunction::log1p(), 1.0);
        let gauss = check_2m2(&SymbolSpec::builtin("gauss", g).unwrap(), &w, &[1.0, 3.0], 4).unwrap();
        assert!(gauss.holds, "{:?}", gauss.profiles.iter().map(|p| p.edge_ratio()).collect::<Vec<_>>());
        let boxed = check_2m2(&SymbolSpec::builtin("box", g).unwrap(), &w, &[1.0, 3.0], 4).unwrap();
        assert!(boxed.profiles.iter().all(|p| p.edge_ratio() < 1e-8));
        let one = check_2m2(&SymbolSpec::builtin("const", g).unwrap(), &w, &[1.0], 4).unwrap();
        assert!(!one.holds);
        let xonly = check_2m2(&SymbolSpec::builtin("xonly", g).unwrap(), &w, &[1.0], 4).unwrap();
        assert!(!xonly.holds);
        let r = check_2m2(&SymbolSpec::builtin("gauss", g).unwrap(), &w, &[100.0], 4);
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn constant_symbol_stft_is_position_independent() {
        let g = Grid::with_extent(1, 64, 8.0).unwrap();
        let w = WeightSpec::full(WeightFunction::log1p(), 0.0);
        let one = check_2m2(&SymbolSpec::builtin("const", g).unwrap(), &w, &[1.0], 8).unwrap();
        let vals: Vec<f64> = one.profiles[0].profile.iter().map(|p| p.2).collect();
        for v in &vals {
            assert_relative_eq!(*v, vals[0], max_relative = 1e-10);
        }
    }

    #[test]
    fn symbol_kinds_validate() {
        let g = small();
        assert!(SymbolSpec::gaussian(g, [[1.0, 0.0], [0.0, -1.0]]).is_err());
        assert!(SymbolSpec::indicator(g, [0.0, 1.0]).is_err());
        assert!(matches!(SymbolSpec::builtin("nope", g), Err(Error::Config(_))));
        let mut bad = PhaseSpaceFunction::zeros(g);
        bad.values[0] = Complex64::new(f64::INFINITY, 0.0);
        assert!(matches!(SymbolSpec::user_sampled("bad", bad), Err(Error::Data(_))));
    }
}
