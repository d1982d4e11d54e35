//! Standard windows and test signals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, SampledSignal};

/// `g0(x) = exp(-pi |x|^2)`.
pub fn gaussian(grid: Grid) -> SampledSignal {
    SampledSignal::from_fn(grid, |x| {
        Complex64::new((-PI * x.iter().map(|c| c * c).sum::<f64>()).exp(), 0.0)
    })
}

/// `g0 * g0 (x) = 2^{-d/2} exp(-pi |x|^2 / 2)`.
pub fn gaussian_self_convolution(grid: Grid) -> SampledSignal {
    let d = grid.dim() as i32;
    SampledSignal::from_fn(grid, |x| {
        let r2 = x.iter().map(|c| c * c).sum::<f64>();
        Complex64::new(2f64.powf(-0.5 * d as f64) * (-0.5 * PI * r2).exp(), 0.0)
    })
}

/// First Hermite function `x exp(-pi x^2)` normalized to unit `L^2(R)` norm (first axis).
pub fn hermite1(grid: Grid) -> SampledSignal {
    // int x^2 exp(-2 pi x^2) dx = 2^{-1/2} / (4 pi)
    let norm = (2f64.powf(-0.5) / (4.0 * PI)).sqrt();
    // each extra axis contributes int exp(-2 pi y^2) dy = 2^{-1/2}
    let extra = 2f64.powf(0.25 * (grid.dim() as f64 - 1.0));
    SampledSignal::from_fn(grid, |x| {
        let r2 = x.iter().map(|c| c * c).sum::<f64>();
        Complex64::new(x[0] * (-PI * r2).exp() / norm * extra, 0.0)
    })
}

/// Time-frequency shifted Gaussian `M_xi T_x g0` with a width scale: `exp(i xi.y) exp(-pi |y-x|^2 / s^2)`.
pub fn shifted_gaussian(grid: Grid, x0: &[f64], xi0: &[f64], width: f64) -> SampledSignal {
    SampledSignal::from_fn(grid, |y| {
        let mut r2 = 0.0;
        let mut phase = 0.0;
        for a in 0..y.len() {
            r2 += (y[a] - x0[a]).powi(2);
            phase += xi0[a] * y[a];
        }
        Complex64::from_polar((-PI * r2 / (width * width)).exp(), phase)
    })
}

/// A random mixture of a few time-frequency shifted Gaussians, concentrated in `|x| <= spread`
/// and `|xi| <= band`.
pub fn random_mixture(grid: Grid, rng: &mut ChaCha8Rng, spread: f64, band: f64) -> SampledSignal {
    let d = grid.dim();
    let terms = rng.gen_range(1..=3);
    let mut acc = SampledSignal::zeros(grid);
    for _ in 0..terms {
        let x0: Vec<f64> = (0..d).map(|_| rng.gen_range(-spread..=spread)).collect();
        let xi0: Vec<f64> = (0..d).map(|_| rng.gen_range(-band..=band)).collect();
        let width = rng.gen_range(0.6..1.6);
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let term = shifted_gaussian(grid, &x0, &xi0, width).scale(c);
        acc = acc.add(&term).expect("same grid");
    }
    acc
}

/// White complex noise with independent uniform components on every node.
pub fn random_noise(grid: Grid, rng: &mut ChaCha8Rng) -> SampledSignal {
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SampledSignal { grid, values }
}
