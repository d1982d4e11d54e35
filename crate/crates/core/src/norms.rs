//! Weighted mixed norms `L^{p,q}_{m}` on phase space, modulation norms, the `M^{0,1}` decay
//! profile and inclusion ratios.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{Grid, PhaseSpaceFunction, SampledSignal};
use crate::symbol_stft;
use crate::transforms::stft;
use crate::weights::{PhaseWeight, WeightSpec};

/// A Lebesgue exponent in `[1, inf]`. Serialized as a number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(Error::Argument(format!("exponent must lie in [1, inf], got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// Conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INFINITY
        } else if self.is_infinite() {
            Exponent::ONE
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }

    #[inline]
    fn accumulate(self, acc: &mut f64, v: f64) {
        if self.is_infinite() {
            *acc = acc.max(v);
        } else if self.0 == 1.0 {
            *acc += v;
        } else if self.0 == 2.0 {
            *acc += v * v;
        } else {
            *acc += v.powf(self.0);
        }
    }

    #[inline]
    fn finish(self, acc: f64, cell: f64) -> f64 {
        if self.is_infinite() {
            acc
        } else if self.0 == 1.0 {
            acc * cell
        } else if self.0 == 2.0 {
            (acc * cell).sqrt()
        } else {
            (acc * cell).powf(1.0 / self.0)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(v) => v,
            Raw::Int(v) => v as f64,
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => f64::INFINITY,
                other => other
                    .parse::<f64>()
                    .map_err(|_| serde::de::Error::custom(format!("bad exponent {t:?}")))?,
            },
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// Exponents and weight of an `L^{p,q}_m` norm (`p` in `x`, inner; `q` in `xi`, outer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedNormParams {
    pub p: Exponent,
    pub q: Exponent,
    pub weight: PhaseWeight,
}

impl MixedNormParams {
    pub fn new(p: Exponent, q: Exponent, weight: impl Into<PhaseWeight>) -> Self {
        Self { p, q, weight: weight.into() }
    }

    pub fn unweighted(p: Exponent, q: Exponent) -> Self {
        Self::new(p, q, PhaseWeight::unit())
    }

    /// Total exponent of the weight factors (0 for the unit weight).
    pub fn lambda(&self) -> f64 {
        self.weight.factors.iter().map(|w| w.lambda).sum()
    }
}

fn phase_nodes(grid: &Grid) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let dual = grid.dual();
    let xs = (0..grid.len()).map(|i| grid.coords(i)).collect();
    let xis = (0..grid.len()).map(|i| dual.coords(i)).collect();
    (xs, xis)
}

/// `|| F ||_{L^{p,q}_m} = ( int ( int |F(x, xi)|^p m(x, xi)^p dx )^{q/p} dxi )^{1/q}`
/// by quadrature, with maxima for infinite exponents.
pub fn mixed_norm(f: &PhaseSpaceFunction, params: &MixedNormParams) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::Data("phase-space function has non-finite values".into()));
    }
    let grid = f.grid;
    let nn = grid.len();
    let (xs, xis) = phase_nodes(&grid);
    let unit = params.weight.is_unit();
    let (p, q) = (params.p, params.q);
    let hx = grid.cell();
    let hxi = grid.dual().cell();
    let inner: Vec<f64> = (0..nn)
        .into_par_iter()
        .map(|m| {
            let mut acc = 0.0;
            for k in 0..nn {
                let mut v = f.values[k * nn + m].norm();
                if !unit && v != 0.0 {
                    v *= params.weight.eval(&xs[k], &xis[m]);
                }
                p.accumulate(&mut acc, v);
            }
            p.finish(acc, hx)
        })
        .collect();
    let mut acc = 0.0;
    for v in inner {
        q.accumulate(&mut acc, v);
    }
    Ok(q.finish(acc, hxi))
}

/// `|| f ||_{M^{p,q}_m} = || V_window f ||_{L^{p,q}_m}`.
pub fn modulation_norm(f: &SampledSignal, window: &SampledSignal, params: &MixedNormParams) -> Result<f64> {
    mixed_norm(&stft(f, window)?, params)
}

/// Window-equivalence constant `C` with `1/C <= ||f||_{w1} / ||f||_{w2} <= C` over `signals`.
pub fn window_equivalence(
    signals: &[SampledSignal],
    w1: &SampledSignal,
    w2: &SampledSignal,
    params: &MixedNormParams,
) -> Result<f64> {
    let mut c: f64 = 1.0;
    for f in signals {
        let a = modulation_norm(f, w1, params)?;
        let b = modulation_norm(f, w2, params)?;
        if a == 0.0 || b == 0.0 {
            continue;
        }
        c = c.max(a / b).max(b / a);
    }
    Ok(c)
}

/// Decay profile `z -> m(z) || F(z, .) ||_{L^1_m}` over position nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct M01Profile {
    /// Position coordinates; for a signal profile only `nodes[i][0..d]` are used, for a symbol
    /// profile `nodes[i] = [x, xi]`.
    pub nodes: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub peak: f64,
    /// Max over positions whose time coordinate is in the outer 10% on either side.
    pub edge_time: f64,
    /// Max over positions whose frequency coordinate is in the outer 10% (symbol profiles).
    pub edge_frequency: f64,
}

const EDGE_FRACTION: f64 = 0.8;

impl M01Profile {
    fn build(nodes: Vec<[f64; 2]>, values: Vec<f64>, time_extent: f64, freq_extent: Option<f64>, time_axes: usize) -> Self {
        let peak = values.iter().copied().fold(0.0, f64::max);
        let mut edge_time: f64 = 0.0;
        let mut edge_frequency: f64 = 0.0;
        for (z, &v) in nodes.iter().zip(&values) {
            if z[..time_axes].iter().any(|c| c.abs() >= EDGE_FRACTION * time_extent) {
                edge_time = edge_time.max(v);
            }
            if let Some(fe) = freq_extent {
                if z[1].abs() >= EDGE_FRACTION * fe {
                    edge_frequency = edge_frequency.max(v);
                }
            }
        }
        Self { nodes, values, peak, edge_time, edge_frequency }
    }

    pub fn edge(&self) -> f64 {
        self.edge_time.max(self.edge_frequency)
    }

    /// `edge / peak`, or 0 for the zero profile.
    pub fn edge_ratio(&self) -> f64 {
        if self.peak == 0.0 {
            0.0
        } else {
            self.edge() / self.peak
        }
    }
}

fn require_nonnegative(weight: &WeightSpec) -> Result<()> {
    if weight.lambda < 0.0 {
        return Err(Error::Argument(format!("decay profile needs lambda >= 0, got {}", weight.lambda)));
    }
    Ok(())
}

/// `x -> exp(lambda omega(x)) * delta_xi^d * sum_xi |F(x, xi)| exp(lambda omega(xi))`.
pub fn m01_profile(f: &PhaseSpaceFunction, weight: &WeightSpec) -> Result<M01Profile> {
    require_nonnegative(weight)?;
    let grid = f.grid;
    let nn = grid.len();
    let d = grid.dim();
    let (xs, xis) = phase_nodes(&grid);
    let lam = weight.lambda;
    let om = weight.omega;
    let wxi: Vec<f64> = xis.iter().map(|c| (lam * om.eval_norm(c)).exp()).collect();
    let cell = grid.dual().cell();
    let values: Vec<f64> = (0..nn)
        .map(|k| {
            let s: f64 = f.row(k).iter().zip(&wxi).map(|(v, w)| v.norm() * w).sum();
            (lam * om.eval_norm(&xs[k])).exp() * cell * s
        })
        .collect();
    let nodes = xs
        .iter()
        .map(|c| if d == 1 { [c[0], 0.0] } else { [c[0], c[1]] })
        .collect();
    Ok(M01Profile::build(nodes, values, grid.extent(), None, d))
}

/// Decay profile of a phase-space symbol `b` (d = 1) seen as a function on `R^2`:
/// `z -> exp(lambda omega(z)) int |V_G b(z, zeta)| exp(lambda omega(zeta)) dzeta` on a strided
/// position lattice.
pub fn symbol_m01_profile(b: &PhaseSpaceFunction, weight: &WeightSpec, stride: usize) -> Result<M01Profile> {
    require_nonnegative(weight)?;
    let lam = weight.lambda;
    let om = weight.omega;
    let n = b.grid.n();
    let rows = symbol_stft::scan(b, stride, |s| {
        let mut acc = 0.0;
        for k in 0..n {
            for l in 0..n {
                let v = s.values[k * n + l].norm();
                if v != 0.0 {
                    acc += v * (lam * om.eval_norm(&[s.freq_x[k], s.freq_xi[l]])).exp();
                }
            }
        }
        ([s.x, s.xi], (lam * om.eval_norm(&[s.x, s.xi])).exp() * s.cell * acc)
    })?;
    let (nodes, values): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let xi_extent = std::f64::consts::PI / b.grid.h();
    Ok(M01Profile::build(nodes, values, b.grid.extent(), Some(xi_extent), 1))
}

/// Outcome of an inclusion check `M^{p1,q1}_{m_mu} -> M^{p2,q2}_{m_lambda}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclusionReport {
    pub strong: f64,
    pub weak: f64,
    /// `weak / strong`.
    pub ratio: f64,
}

/// Ratio of the weak norm to the strong norm. Requires `p1 <= p2`, `q1 <= q2`, `lambda <= mu`.
pub fn check_inclusion(
    f: &SampledSignal,
    window: &SampledSignal,
    strong: &MixedNormParams,
    weak: &MixedNormParams,
) -> Result<InclusionReport> {
    if strong.p > weak.p || strong.q > weak.q || weak.lambda() > strong.lambda() {
        return Err(Error::Argument(format!(
            "inclusion needs p1 <= p2, q1 <= q2, lambda <= mu; got ({}, {}, {}) -> ({}, {}, {})",
            strong.p,
            strong.q,
            strong.lambda(),
            weak.p,
            weak.q,
            weak.lambda()
        )));
    }
    let v = stft(f, window)?;
    let s = mixed_norm(&v, strong)?;
    let w = mixed_norm(&v, weak)?;
    if s == 0.0 {
        return Err(Error::Argument("inclusion ratio undefined for the zero signal".into()));
    }
    Ok(InclusionReport { strong: s, weak: w, ratio: w / s })
}

/// Multiplies every value of a phase-space function by a unimodular factor depending on `xi`.
pub fn modulate_in_frequency(f: &PhaseSpaceFunction, phase: impl Fn(&[f64]) -> f64) -> PhaseSpaceFunction {
    let grid = f.grid;
    let dual = grid.dual();
    let nn = grid.len();
    let factors: Vec<Complex64> = (0..nn).map(|m| Complex64::from_polar(1.0, phase(&dual.coords(m)))).collect();
    let values = f
        .values
        .chunks_exact(nn)
        .flat_map(|row| row.iter().zip(&factors).map(|(v, c)| v * c).collect::<Vec<_>>())
        .collect();
    PhaseSpaceFunction { grid, values }
}
