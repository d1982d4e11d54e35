//! Discrete short-time Fourier transform, its adjoint, the inversion formula, the Fourier
//! transform, and the cross-Wigner transform.
//!
//! Conventions: `V_psi f(x, xi) = int f(y) conj(psi(y - x)) exp(-i y.xi) dy` and
//! `f^(xi) = int f(x) exp(-i x.xi) dx`, with no `2 pi` in the exponent. Every integral is a
//! Riemann sum with weight `h^d` (signals) or `(h delta_xi)^d` (phase space).
//!
//! Window translations `psi(y - x)` wrap circularly on the grid. With this choice the
//! discrete STFT is an exactly tight frame, so `V*_gamma V_psi = (2 pi)^d <gamma, psi> I`
//! holds to rounding, and the discrete phase space is a torus in both variables.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, PhaseSpaceFunction, SampledSignal};

/// Centered DFT on `n^d` samples:
/// `F[m] = sum_j f[j] exp(-2 pi i (j - n/2)(m - n/2) / n)` along each axis (inverse flips the sign).
#[derive(Clone)]
pub struct CenteredDft {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CenteredDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CenteredDft").field("n", &self.n).field("dim", &self.dim).finish()
    }
}

impl CenteredDft {
    pub fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            dim,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn for_grid(grid: &Grid) -> Self {
        Self::new(grid.n(), grid.dim())
    }

    /// Transforms `buf` (length `n^dim`) in place; `inverse` uses `exp(+...)`, unnormalized.
    pub fn apply(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let half_parity = (n / 2) % 2 == 1;
        let plan = if inverse { &self.inverse } else { &self.forward };
        match self.dim {
            1 => Self::axis(plan, buf, n, half_parity),
            2 => {
                for row in buf.chunks_exact_mut(n) {
                    Self::axis(plan, row, n, half_parity);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for c in 0..n {
                    for r in 0..n {
                        col[r] = buf[r * n + c];
                    }
                    Self::axis(plan, &mut col, n, half_parity);
                    for r in 0..n {
                        buf[r * n + c] = col[r];
                    }
                }
            }
            _ => unreachable!("grid dimension is validated"),
        }
    }

    fn axis(plan: &Arc<dyn Fft<f64>>, v: &mut [Complex64], n: usize, half_parity: bool) {
        for (j, x) in v.iter_mut().enumerate() {
            if j % 2 == 1 {
                *x = -*x;
            }
        }
        plan.process(v);
        for (m, x) in v.iter_mut().enumerate().take(n) {
            if (m % 2 == 1) != half_parity {
                *x = -*x;
            }
        }
    }
}

/// Fourier transform `f^(xi_m) = h^d sum_j f(x_j) exp(-i x_j.xi_m)` on the dual grid.
pub fn fourier(f: &SampledSignal) -> SampledSignal {
    let dft = CenteredDft::for_grid(&f.grid);
    let mut v = f.values.clone();
    dft.apply(&mut v, false);
    let c = f.grid.cell();
    v.iter_mut().for_each(|x| *x *= c);
    SampledSignal { grid: f.grid.dual(), values: v }
}

/// Inverse of [`fourier`]: `f(x_j) = (2 pi)^{-d} delta_xi^d sum_m F(xi_m) exp(i x_j.xi_m)`.
///
/// `signal_grid` is the grid the result lives on; its dual must match `spectrum.grid`.
pub fn inverse_fourier(spectrum: &SampledSignal, signal_grid: Grid) -> Result<SampledSignal> {
    let dual = signal_grid.dual();
    if dual.n() != spectrum.grid.n()
        || dual.dim() != spectrum.grid.dim()
        || (dual.h() - spectrum.grid.h()).abs() > 1e-12 * dual.h()
    {
        return Err(Error::Structure("spectrum does not live on the dual grid".into()));
    }
    let dft = CenteredDft::for_grid(&signal_grid);
    let mut v = spectrum.values.clone();
    dft.apply(&mut v, true);
    let c = spectrum.grid.cell() / (2.0 * PI).powi(signal_grid.dim() as i32);
    v.iter_mut().for_each(|x| *x *= c);
    Ok(SampledSignal { grid: signal_grid, values: v })
}

fn check_window(psi: &SampledSignal, name: &str) -> Result<()> {
    if psi.is_zero() {
        return Err(Error::Argument(format!("{name} window is identically zero")));
    }
    Ok(())
}

/// `V_psi f(x_j, xi_m) = h^d sum_y f(y) conj(psi(y - x_j)) exp(-i y.xi_m)`.
pub fn stft(f: &SampledSignal, psi: &SampledSignal) -> Result<PhaseSpaceFunction> {
    f.grid.check_same(&psi.grid, "stft")?;
    check_window(psi, "analysis")?;
    let grid = f.grid;
    let nn = grid.len();
    let half = (grid.n() / 2) as i64;
    let dft = CenteredDft::for_grid(&grid);
    let cell = grid.cell();
    let psi_conj: Vec<Complex64> = psi.values.iter().map(|v| v.conj()).collect();
    let mut values = vec![Complex64::new(0.0, 0.0); nn * nn];
    values.par_chunks_mut(nn).enumerate().for_each(|(p, row)| {
        let pidx = grid.multi_index(p);
        // psi(y_k - x_p): index k - p + n/2 on each axis
        let shift = [half - pidx[0] as i64, half - pidx[1] as i64];
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = f.values[k] * psi_conj[grid.wrap_offset(k, shift)];
        }
        dft.apply(row, false);
        row.iter_mut().for_each(|v| *v *= cell);
    });
    Ok(PhaseSpaceFunction { grid, values })
}

/// `(V*_gamma F)(y) = (h delta_xi)^d sum_{x, xi} F(x, xi) exp(i y.xi) gamma(y - x)`,
/// the exact adjoint of [`stft`] for the quadrature inner products.
pub fn stft_adjoint(big_f: &PhaseSpaceFunction, gamma: &SampledSignal) -> Result<SampledSignal> {
    big_f.grid.check_same(&gamma.grid, "stft adjoint")?;
    let grid = big_f.grid;
    let nn = grid.len();
    let half = (grid.n() / 2) as i64;
    let dft = CenteredDft::for_grid(&grid);
    let partials: Vec<Vec<Complex64>> = (0..nn)
        .into_par_iter()
        .map(|p| {
            let mut row = big_f.row(p).to_vec();
            if row.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
                return Vec::new();
            }
            dft.apply(&mut row, true);
            let pidx = grid.multi_index(p);
            let shift = [half - pidx[0] as i64, half - pidx[1] as i64];
            for (k, v) in row.iter_mut().enumerate() {
                *v *= gamma.values[grid.wrap_offset(k, shift)];
            }
            row
        })
        .collect();
    // fixed-order reduction
    let mut out = vec![Complex64::new(0.0, 0.0); nn];
    for row in partials.iter().filter(|r| !r.is_empty()) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    let c = grid.phase_cell();
    out.iter_mut().for_each(|v| *v *= c);
    Ok(SampledSignal { grid, values: out })
}

/// Reconstruction `(2 pi)^{-d} <gamma, psi>^{-1} V*_gamma V_psi f`.
pub fn invert(f: &SampledSignal, psi: &SampledSignal, gamma: &SampledSignal) -> Result<SampledSignal> {
    let pairing = gamma.inner(psi)?;
    if pairing.norm() <= 1e-12 {
        return Err(Error::Singular { magnitude: pairing.norm() });
    }
    let v = stft(f, psi)?;
    let back = stft_adjoint(&v, gamma)?;
    let c = 1.0 / ((2.0 * PI).powi(f.grid.dim() as i32) * pairing);
    Ok(back.scale(c))
}

/// Cross-Wigner transform `W(f, g)(x, xi) = int f(x + t/2) conj(g(x - t/2)) exp(-i xi.t) dt`.
///
/// The substitution `t = 2 m h` puts both half-shifts on grid nodes, giving
/// `W(x_j, xi) = 2^d h^d sum_m f(x_j + m h) conj(g(x_j - m h)) exp(-2 i m h.xi)` with zero
/// extension. That sum is periodic in `xi` with period `pi / h`, so only the fundamental band
/// `|xi| < pi / (2h)` (centered index offsets in `[-n/4, n/4)`) is kept; nodes outside are zero.
pub fn cross_wigner(f: &SampledSignal, g: &SampledSignal) -> Result<PhaseSpaceFunction> {
    f.grid.check_same(&g.grid, "cross-Wigner")?;
    wigner_impl(f, g, false)
}

/// Cross-Wigner transform at the half-shifted positions `x_j + h/2` (d = 1), using odd
/// lags `t = (2m + 1) h`. The result's position nodes are interpreted as `x_j + h/2`.
pub fn cross_wigner_half_shifted(f: &SampledSignal, g: &SampledSignal) -> Result<PhaseSpaceFunction> {
    f.grid.check_same(&g.grid, "cross-Wigner")?;
    if f.grid.dim() != 1 {
        return Err(Error::Structure("half-shifted Wigner transform is defined for d = 1".into()));
    }
    wigner_impl(f, g, true)
}

/// Linear convolution `(f * g)(x_j) = h^d sum_k f(x_k) g(x_j - x_k)`; samples of `g` outside the
/// grid count as zero.
pub fn convolve(f: &SampledSignal, g: &SampledSignal) -> Result<SampledSignal> {
    if f.grid != g.grid {
        return Err(Error::Structure("convolution factors live on different grids".into()));
    }
    let grid = f.grid;
    let n = grid.n() as i64;
    let half = n / 2;
    let cell = grid.cell();
    let values = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let jj = grid.multi_index(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, fk) in f.values.iter().enumerate() {
                if *fk == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let kk = grid.multi_index(k);
                let mut idx = [0usize; 2];
                let mut inside = true;
                for a in 0..grid.dim() {
                    let m = jj[a] as i64 - kk[a] as i64 + half;
                    if !(0..n).contains(&m) {
                        inside = false;
                        break;
                    }
                    idx[a] = m as usize;
                }
                if inside {
                    acc += fk * g.values[grid.flat_index(idx)];
                }
            }
            acc * cell
        })
        .collect();
    Ok(SampledSignal { grid, values })
}

/// Whether the centered frequency index lies in the Wigner fundamental band.
#[inline]
pub fn in_wigner_band(m: usize, n: usize) -> bool {
    let off = m as i64 - (n / 2) as i64;
    let q = (n / 4) as i64;
    off >= -q && off < q
}

fn wigner_impl(f: &SampledSignal, g: &SampledSignal, half_shift: bool) -> Result<PhaseSpaceFunction> {
    let grid = f.grid;
    let n = grid.n();
    if n % 4 != 0 {
        return Err(Error::Argument(format!("Wigner transform needs n divisible by 4, got {n}")));
    }
    let nn = grid.len();
    let d = grid.dim();
    let dft = CenteredDft::for_grid(&grid);
    let half = (n / 2) as i64;
    let scale = 2f64.powi(d as i32) * grid.cell();
    let dual = grid.dual();
    let ni = n as i64;
    let mut values = vec![Complex64::new(0.0, 0.0); nn * nn];
    values.par_chunks_mut(nn).enumerate().for_each(|(p, row)| {
        let pidx = grid.multi_index(p);
        let mut buf = vec![Complex64::new(0.0, 0.0); nn];
        // lag offsets m in [-n/2, n/2) per axis, stored at m + n/2
        for (slot, v) in buf.iter_mut().enumerate() {
            let midx = grid.multi_index(slot);
            let mut plus = [0usize; 2];
            let mut minus = [0usize; 2];
            let mut inside = true;
            for a in 0..d {
                let m = midx[a] as i64 - half;
                let (ip, im) = if half_shift {
                    (pidx[a] as i64 + m + 1, pidx[a] as i64 - m)
                } else {
                    (pidx[a] as i64 + m, pidx[a] as i64 - m)
                };
                if ip < 0 || ip >= ni || im < 0 || im >= ni {
                    inside = false;
                    break;
                }
                plus[a] = ip as usize;
                minus[a] = im as usize;
            }
            if inside {
                *v = f.values[grid.flat_index(plus)] * g.values[grid.flat_index(minus)].conj();
            }
        }
        dft.apply(&mut buf, false);
        for (q, out) in row.iter_mut().enumerate() {
            let qidx = grid.multi_index(q);
            let mut src = [0usize; 2];
            let mut keep = true;
            for a in 0..d {
                if !in_wigner_band(qidx[a], n) {
                    keep = false;
                    break;
                }
                src[a] = 2 * qidx[a] - n / 2;
            }
            if keep {
                let mut v = buf[grid.flat_index(src)] * scale;
                if half_shift {
                    let xi = dual.node(qidx[0]);
                    v *= Complex64::from_polar(1.0, -xi * grid.h());
                }
                *out = v;
            }
        }
    });
    Ok(PhaseSpaceFunction { grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gaussian, hermite1, random_mixture, random_noise};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid256() -> Grid {
        Grid::with_extent(1, 256, 12.0).unwrap()
    }

    /// Brute-force quadrature of the STFT at one node, circular window index.
    fn stft_oracle(f: &SampledSignal, psi: &SampledSignal, p: usize, m: usize) -> Complex64 {
        let g = f.grid;
        let n = g.n();
        let xi = g.dual().node(m);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let w = (k + n + n / 2 - p) % n;
            acc += f.values[k] * psi.values[w].conj() * Complex64::from_polar(1.0, -g.node(k) * xi);
        }
        acc * g.h()
    }

    /// Brute-force Wigner sum, band-limited like the implementation.
    fn wigner_oracle(f: &SampledSignal, g: &SampledSignal, p: usize, q: usize) -> Complex64 {
        let grid = f.grid;
        let n = grid.n() as i64;
        if !in_wigner_band(q, grid.n()) {
            return Complex64::new(0.0, 0.0);
        }
        let xi = grid.dual().node(q);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in -n..n {
            let (a, b) = (p as i64 + m, p as i64 - m);
            if a < 0 || a >= n || b < 0 || b >= n {
                continue;
            }
            let t = 2.0 * m as f64 * grid.h();
            acc += f.values[a as usize]
                * g.values[b as usize].conj()
                * Complex64::from_polar(1.0, -xi * t);
        }
        acc * 2.0 * grid.h()
    }

    #[test]
    fn stft_gaussian_origin_value() {
        let g = grid256();
        let g0 = gaussian(g);
        let v = stft(&g0, &g0).unwrap();
        assert_relative_eq!(v.at(128, 128).re, 2f64.powf(-0.5), max_relative = 1e-8);
        assert!(v.at(128, 128).im.abs() < 1e-12);
    }

    #[test]
    fn stft_is_linear_bitwise() {
        let g = grid256();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_mixture(g, &mut rng, 4.0, 3.0);
        let psi = gaussian(g);
        let a = stft(&f.scale(Complex64::new(2.0, 0.0)), &psi).unwrap();
        let b = stft(&f, &psi).unwrap().scale(Complex64::new(2.0, 0.0));
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn stft_matches_brute_force() {
        let g = grid256();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_mixture(g, &mut rng, 4.0, 3.0);
        let psi = hermite1(g);
        let v = stft(&f, &psi).unwrap();
        let scale = v.max_abs();
        for _ in 0..16 {
            let (p, m) = (rng.gen_range(40..216), rng.gen_range(0..256));
            let o = stft_oracle(&f, &psi, p, m);
            assert!((v.at(p, m) - o).norm() <= 1e-10 * scale.max(o.norm()), "node ({p},{m})");
        }
    }

    #[test]
    fn stft_errors() {
        let g = grid256();
        let other = Grid::with_extent(1, 128, 12.0).unwrap();
        assert!(matches!(stft(&gaussian(g), &gaussian(other)), Err(Error::Structure(_))));
        assert!(matches!(stft(&gaussian(g), &SampledSignal::zeros(g)), Err(Error::Argument(_))));
    }

    #[test]
    fn adjoint_identity() {
        let g = Grid::with_extent(1, 64, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_noise(g, &mut rng);
        let gamma = gaussian(g);
        let big_f = PhaseSpaceFunction {
            grid: g,
            values: (0..g.len() * g.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        };
        let lhs = stft(&f, &gamma).unwrap().inner(&big_f).unwrap();
        let rhs = f.inner(&stft_adjoint(&big_f, &gamma).unwrap()).unwrap();
        let scale = stft(&f, &gamma).unwrap().norm_l2() * big_f.norm_l2();
        assert!((lhs - rhs).norm() <= 1e-12 * scale);
    }

    #[test]
    fn adjoint_of_zero_is_zero() {
        let g = grid256();
        let out = stft_adjoint(&PhaseSpaceFunction::zeros(g), &gaussian(g)).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn adjoint_of_gaussian_stft_is_scaled_gaussian() {
        let g = grid256();
        let g0 = gaussian(g);
        let back = stft_adjoint(&stft(&g0, &g0).unwrap(), &g0).unwrap();
        let c = 2.0 * PI * g0.inner(&g0).unwrap();
        let rec = invert(&g0, &g0, &g0).unwrap();
        let err = back.sub(&rec.scale(c)).unwrap().norm_l2() / back.norm_l2();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn inversion_round_trip() {
        let g = grid256();
        let g0 = gaussian(g);
        for f in [gaussian(g), hermite1(g)] {
            let rec = invert(&f, &g0, &g0).unwrap();
            let err = rec.sub(&f).unwrap().norm_l2() / f.norm_l2();
            assert!(err < 1e-6, "{err}");
        }
        assert!(invert(&SampledSignal::zeros(g), &g0, &g0).unwrap().is_zero());
    }

    #[test]
    fn inversion_rejects_orthogonal_windows() {
        let g = grid256();
        let r = invert(&gaussian(g), &gaussian(g), &hermite1(g));
        assert!(matches!(r, Err(Error::Singular { .. })));
    }

    #[test]
    fn orthogonality_constant() {
        let g = grid256();
        let f = hermite1(g);
        let psi = gaussian(g);
        let ratio = stft(&f, &psi).unwrap().norm_l2().powi(2)
            / (f.norm_l2().powi(2) * psi.norm_l2().powi(2));
        assert_relative_eq!(ratio, 2.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn covariance_on_inner_grid() {
        let g = grid256();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_mixture(g, &mut rng, 2.0, 2.0);
        let psi = gaussian(g);
        let k = 9i64;
        let u = k as f64 * g.h();
        let v = stft(&f, &psi).unwrap();
        let vt = stft(&f.translate_nodes([k, 0]), &psi).unwrap();
        let scale = v.max_abs();
        for p in 64 + 9..192 {
            for m in 0..256 {
                let expect = Complex64::from_polar(1.0, -u * g.dual().node(m)) * v.at(p - 9, m);
                assert!((vt.at(p, m) - expect).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn fourier_of_gaussian() {
        let g = grid256();
        let fh = fourier(&gaussian(g));
        for m in 0..256 {
            let xi = fh.grid.node(m);
            assert!((fh.values[m].re - (-xi * xi / (4.0 * PI)).exp()).abs() < 1e-8);
            assert!(fh.values[m].im.abs() < 1e-8);
        }
    }

    #[test]
    fn fourier_round_trip_and_parseval() {
        let g = grid256();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_mixture(g, &mut rng, 4.0, 3.0);
        let fh = fourier(&f);
        let back = inverse_fourier(&fh, g).unwrap();
        assert!(back.sub(&f).unwrap().norm_l2() <= 1e-12 * f.norm_l2());
        // Parseval via direct quadrature of |f^|^2 on the dual grid
        let direct: f64 = (0..256)
            .map(|m| {
                let xi = fh.grid.node(m);
                let s: Complex64 = (0..256)
                    .map(|k| f.values[k] * Complex64::from_polar(1.0, -g.node(k) * xi))
                    .sum::<Complex64>()
                    * g.h();
                s.norm_sqr()
            })
            .sum::<f64>()
            * fh.grid.h();
        assert_relative_eq!(direct, fh.norm_l2().powi(2), max_relative = 1e-10);
        assert_relative_eq!(direct, 2.0 * PI * f.norm_l2().powi(2), max_relative = 1e-10);
    }

    #[test]
    fn wigner_gaussian_origin() {
        let g = grid256();
        let g0 = gaussian(g);
        let w = cross_wigner(&g0, &g0).unwrap();
        assert_relative_eq!(w.at(128, 128).re, 2f64.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn wigner_matches_brute_force_and_symmetry() {
        let g = grid256();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = random_mixture(g, &mut rng, 4.0, 3.0);
        let h = random_mixture(g, &mut rng, 4.0, 3.0);
        let w = cross_wigner(&f, &h).unwrap();
        let scale = w.max_abs();
        for _ in 0..16 {
            let (p, q) = (rng.gen_range(0..256), rng.gen_range(64..192));
            let o = wigner_oracle(&f, &h, p, q);
            assert!((w.at(p, q) - o).norm() <= 1e-10 * scale.max(o.norm()));
        }
        let wr = cross_wigner(&h, &f).unwrap();
        for (a, b) in w.values.iter().zip(&wr.values) {
            assert!((a - b.conj()).norm() <= 1e-12 * scale);
        }
        let ww = cross_wigner(&f, &f).unwrap();
        let max_im = ww.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(max_im <= 1e-10 * ww.max_abs());
    }

    #[test]
    fn wigner_marginal_is_pointwise_product() {
        // delta_xi * sum over the band of W(f, g)(x, .) = 2 pi f(x) conj(g(x))
        let g = grid256();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_mixture(g, &mut rng, 3.0, 2.0);
        let h = random_mixture(g, &mut rng, 3.0, 2.0);
        let w = cross_wigner(&f, &h).unwrap();
        let dxi = g.delta_xi();
        for p in (40..216).step_by(7) {
            let s: Complex64 = w.row(p).iter().sum::<Complex64>() * dxi;
            let expect = f.values[p] * h.values[p].conj() * 2.0 * PI;
            assert!((s - expect).norm() < 1e-10 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn half_shifted_wigner_of_gaussian() {
        let g = grid256();
        let g0 = gaussian(g);
        let w = cross_wigner_half_shifted(&g0, &g0).unwrap();
        // W(g0, g0)(x, xi) = sqrt(2) exp(-2 pi x^2) exp(-xi^2 / (2 pi))
        for (p, q) in [(128usize, 128usize), (130, 120), (120, 140)] {
            let x = g.node(p) + 0.5 * g.h();
            let xi = g.dual().node(q);
            let exact = 2f64.sqrt() * (-2.0 * PI * x * x - xi * xi / (2.0 * PI)).exp();
            assert!((w.at(p, q) - Complex64::new(exact, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn two_dimensional_transforms() {
        let g = Grid::with_extent(2, 32, 4.0).unwrap();
        let g0 = gaussian(g);
        let v = stft(&g0, &g0).unwrap();
        let origin = g.flat_index([16, 16]);
        assert_relative_eq!(v.at(origin, origin).re, 0.5, max_relative = 1e-8);
        let ratio = v.norm_l2().powi(2) / g0.norm_l2().powi(4);
        assert_relative_eq!(ratio, (2.0 * PI).powi(2), max_relative = 1e-6);
        let rec = invert(&hermite1(g), &g0, &g0).unwrap();
        assert!(rec.sub(&hermite1(g)).unwrap().norm_l2() < 1e-6);
        let w = cross_wigner(&g0, &g0).unwrap();
        assert_relative_eq!(w.at(origin, origin).re, 2.0, max_relative = 1e-8);
        let fh = fourier(&g0);
        assert_relative_eq!(fh.values[origin].re, 1.0, max_relative = 1e-8);
    }
    #[test]
    fn convolution_of_gaussians() {
        let g = grid256();
        let g0 = gaussian(g);
        let conv = convolve(&g0, &g0).unwrap();
        let exact = crate::signals::gaussian_self_convolution(g);
        assert!(conv.sub(&exact).unwrap().max_abs() < 1e-12);
        let g2 = Grid::with_extent(2, 32, 4.0).unwrap();
        let conv2 = convolve(&gaussian(g2), &gaussian(g2)).unwrap();
        let exact2 = crate::signals::gaussian_self_convolution(g2);
        assert!(conv2.sub(&exact2).unwrap().max_abs() < 1e-10);
    }

}
