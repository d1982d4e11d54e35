//! Short-time Fourier transform of a phase-space function (d = 1), treated as a function of
//! two variables `(x, xi)` on the `(h, delta_xi)` grid. The window is the two-variable Gaussian
//! `G(u, v) = exp(-pi (u^2 + v^2))`, translated circularly.
//!
//! The full transform has `n^4` values, so it is evaluated lazily: one `n x n` frequency slice
//! per position on a strided lattice, handed to a visitor and dropped.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, PhaseSpaceFunction};
use crate::transforms::CenteredDft;

/// One frequency slice `zeta -> V_G a(z, zeta)` at a lattice position `z = (x, xi)`.
///
/// `values` is `n x n`, indexed `[k * n + l]` with `k` along the frequency dual to `x`
/// (spacing `delta_xi`, nodes `freq_x`) and `l` dual to `xi` (spacing `h`, nodes `freq_xi`).
pub struct SymbolSlice<'a> {
    pub x_index: usize,
    pub xi_index: usize,
    pub x: f64,
    pub xi: f64,
    pub values: &'a [Complex64],
    pub freq_x: &'a [f64],
    pub freq_xi: &'a [f64],
    /// Quadrature cell of the frequency variables, `delta_xi * h`.
    pub cell: f64,
}

/// Lattice indices `n/2 + k * stride` that lie in `[0, n)`, ascending.
pub fn lattice_positions(n: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut lo = n / 2;
    while lo >= stride {
        lo -= stride;
    }
    (lo..n).step_by(stride).collect()
}

/// The default lattice stride used by the symbol scans.
pub fn default_stride(n: usize) -> usize {
    (n / 48).max(1)
}

fn circular_gaussian(n: usize, spacing: f64) -> Vec<f64> {
    (0..n)
        .map(|idx| {
            let off = if idx < n / 2 { idx as f64 } else { idx as f64 - n as f64 };
            let u = off * spacing;
            (-PI * u * u).exp()
        })
        .collect()
}

/// Runs `visit` on every lattice slice and returns the results in lattice order
/// (x-major, then xi).
pub fn scan<T, F>(a: &PhaseSpaceFunction, stride: usize, visit: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&SymbolSlice<'_>) -> T + Sync,
{
    let grid = a.grid;
    if grid.dim() != 1 {
        return Err(Error::Structure("symbol STFT is implemented for d = 1".into()));
    }
    let n = grid.n();
    let h = grid.h();
    let dxi = grid.delta_xi();
    let gx = circular_gaussian(n, h);
    let gxi = circular_gaussian(n, dxi);
    let sym_grid = Grid::new(1, n, h)?;
    let freq_x: Vec<f64> = (0..n).map(|k| sym_grid.dual().node(k)).collect();
    let freq_xi: Vec<f64> = (0..n).map(|l| (l as f64 - (n / 2) as f64) * h).collect();
    let dft = CenteredDft::new(n, 2);
    let pos = lattice_positions(n, stride);
    let cell = h * dxi;
    let pairs: Vec<(usize, usize)> =
        pos.iter().flat_map(|&p| pos.iter().map(move |&q| (p, q))).collect();
    let out = pairs
        .par_iter()
        .map(|&(p, q)| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
            for k in 0..n {
                let wx = gx[(k + n - p) % n];
                if wx == 0.0 {
                    continue;
                }
                let row = &a.values[k * n..(k + 1) * n];
                let dst = &mut buf[k * n..(k + 1) * n];
                for l in 0..n {
                    dst[l] = row[l] * (wx * gxi[(l + n - q) % n]);
                }
            }
            dft.apply(&mut buf, false);
            buf.iter_mut().for_each(|v| *v *= cell);
            let slice = SymbolSlice {
                x_index: p,
                xi_index: q,
                x: grid.node(p),
                xi: grid.dual().node(q),
                values: &buf,
                freq_x: &freq_x,
                freq_xi: &freq_xi,
                cell,
            };
            visit(&slice)
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_centered() {
        assert_eq!(lattice_positions(16, 5), vec![3, 8, 13]);
        assert_eq!(lattice_positions(8, 1), (0..8).collect::<Vec<_>>());
        assert!(lattice_positions(256, 5).contains(&128));
    }

    #[test]
    fn gaussian_symbol_slice_matches_closed_form() {
        // a = G itself: V_G G(0, zeta) = int exp(-2 pi |u|^2 - i u.zeta) du = exp(-|zeta|^2 / (8 pi)) / 2
        let grid = Grid::with_extent(1, 128, 12.0).unwrap();
        let a = PhaseSpaceFunction::from_fn(grid, |x, xi| {
            Complex64::new((-PI * (x[0] * x[0] + xi[0] * xi[0])).exp(), 0.0)
        });
        let got = scan(&a, 1, |s| {
            if s.x_index != 64 || s.xi_index != 64 {
                return None;
            }
            let mut err: f64 = 0.0;
            for k in 0..128 {
                for l in 0..128 {
                    if s.freq_x[k].abs() > 4.0 || s.freq_xi[l].abs() > 4.0 {
                        continue;
                    }
                    let z2 = s.freq_x[k].powi(2) + s.freq_xi[l].powi(2);
                    let exact = 0.5 * (-z2 / (8.0 * PI)).exp();
                    err = err.max((s.values[k * 128 + l] - exact).norm());
                }
            }
            Some(err)
        })
        .unwrap();
        let err = got.into_iter().flatten().next().unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn two_dimensional_symbols_rejected() {
        let grid = Grid::with_extent(2, 8, 2.0).unwrap();
        let a = PhaseSpaceFunction::zeros(grid);
        assert!(matches!(scan(&a, 1, |_| ()), Err(Error::Structure(_))));
    }
}
