use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::{resolve_window, ConvTuple, SuiteConfig, SuiteKind};
use super::report::Artifact;
use crate::error::{Error, Result};
use crate::gabor::{
    build_gabor_system, nuclear_bound, operator_gabor_coefficients, tail_ladder, tightness_defect, GaborCoefficients,
    GaborSystem, Tightness,
};
use crate::grid::{Grid, PhaseSpaceFunction, SampledSignal};
use crate::io::Container;
use crate::locop::{
    check_2m2, localization_matrix, operator_norm, singular_values, weyl_route_matrix, weyl_symbol_direct,
    LocOpMatrix, SymbolEnvelope, SymbolSpec, DECAY_THRESHOLD,
};
use crate::norms::{modulation_norm, symbol_m01_profile, Exponent, M01Profile, MixedNormParams};
use crate::signals::{gaussian, gaussian_self_convolution, hermite1, random_mixture, random_noise};
use crate::transforms::{convolve, cross_wigner, invert, stft, stft_adjoint};
use crate::weights::{PhaseWeight, WeightComponent, WeightFunction, WeightSpec};

const ROUND_TRIP_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-6;
const ADJOINT_TOL: f64 = 1e-12;
const REALNESS_TOL: f64 = 1e-10;
const ORTHOGONALITY_TOL: f64 = 1e-6;
const COVARIANCE_TOL: f64 = 1e-10;
const ROUTE_TOL: f64 = 1e-5;
const LADDER_TOL: f64 = 0.1;
const SIGMA_CUTOFF: f64 = 1e-3;
const FLAT_TOL: f64 = 1e-3;
const K_SPREAD: f64 = 2.0;
const EDGE_TOL: f64 = 1e-3;
const T_LADDER_FACTOR: f64 = 0.25;
const GROWTH_TOL: f64 = 0.99;
const TIGHTNESS_TOL: f64 = 1e-8;
const TAIL_TOL: f64 = 0.1;

#[derive(Debug, Clone)]
pub(crate) enum Task {
    RoundTrip { g: usize, signal: &'static str },
    Identity { g: usize },
    Adjointness { g: usize },
    WignerRealness { g: usize },
    Orthogonality { g: usize },
    Covariance { g: usize },
    WeylRoutes { g: usize, symbol: String },
    Bound { g: usize, symbol: String, p: Exponent, q: Exponent, omega: usize, lambda: f64 },
    MaxRatioLadder { coarse: Vec<String>, fine: Vec<String> },
    ConvPair { g: usize, tuple: ConvTuple, omega: usize, pair: usize },
    Decaying { g: usize, symbol: String },
    Flat { g: usize, symbol: String },
    KStable { members: Vec<String> },
    Hypothesis { symbol: String, omega: usize, lambda: f64 },
    Edge { g: usize, symbol: String, omega: usize, lambda: f64 },
    EdgeLadder { coarse: String, fine: String },
    Growth { coarse: usize, fine: usize, symbol: String, omega: usize, lambda: f64 },
    Tightness { g: usize },
    Tail { g: usize, symbol: String, step: usize },
    Nuclear { g: usize, symbol: String },
}

#[derive(Debug, Clone)]
pub(crate) struct Case {
    pub id: String,
    pub params: Value,
    pub tol: f64,
    pub task: Task,
}

fn case(id: String, params: Value, tol: f64, task: Task) -> Case {
    Case { id, params, tol, task }
}

fn grid_params(cfg: &SuiteConfig, g: usize) -> Value {
    let s = cfg.grid[g];
    json!({ "dim": s.dim, "n": s.n, "t": s.t })
}

fn with(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn omega_id(cfg: &SuiteConfig, i: usize) -> String {
    WeightFunction::new(cfg.omega[i]).map(|w| w.id()).unwrap_or_else(|_| format!("{:?}", cfg.omega[i]))
}

fn ladder_params(cfg: &SuiteConfig, a: usize, b: usize, extra: Value) -> Value {
    with(json!({ "n": [cfg.grid[a].n, cfg.grid[b].n], "t": [cfg.grid[a].t, cfg.grid[b].t] }), extra)
}

fn ladder_tag(cfg: &SuiteConfig, a: usize, b: usize) -> String {
    format!("n{}-n{}", cfg.grid[a].n, cfg.grid[b].n)
}

/// The ordered case list of a configuration.
pub(crate) fn plan(cfg: &SuiteConfig) -> Result<Vec<Case>> {
    cfg.validate()?;
    let suite = cfg.suite.name();
    let ng = cfg.grid.len();
    let windows = json!({ "psi": cfg.psi_id(), "gamma": cfg.gamma_id() });
    let mut out = Vec::new();
    match cfg.suite {
        SuiteKind::Inversion => {
            for g in 0..ng {
                let n = cfg.grid[g].n;
                let base = with(grid_params(cfg, g), windows.clone());
                for signal in ["g0", "hermite1"] {
                    out.push(case(
                        format!("{suite}/round_trip/{signal}/n{n}"),
                        with(base.clone(), json!({ "signal": signal })),
                        ROUND_TRIP_TOL,
                        Task::RoundTrip { g, signal },
                    ));
                }
                out.push(case(format!("{suite}/identity/n{n}"), with(base.clone(), json!({ "symbol": "const" })), IDENTITY_TOL, Task::Identity { g }));
                let seeded = with(grid_params(cfg, g), json!({ "seed": cfg.seed, "psi": cfg.psi_id() }));
                out.push(case(format!("{suite}/adjointness/n{n}"), seeded.clone(), ADJOINT_TOL, Task::Adjointness { g }));
                out.push(case(format!("{suite}/wigner_realness/n{n}"), seeded.clone(), REALNESS_TOL, Task::WignerRealness { g }));
                out.push(case(
                    format!("{suite}/orthogonality/n{n}"),
                    with(grid_params(cfg, g), json!({ "signal": "hermite1", "psi": cfg.psi_id() })),
                    ORTHOGONALITY_TOL,
                    Task::Orthogonality { g },
                ));
                out.push(case(format!("{suite}/covariance/n{n}"), seeded, COVARIANCE_TOL, Task::Covariance { g }));
            }
        }
        SuiteKind::WeylEquivalence => {
            for g in 0..ng {
                for s in &cfg.symbols {
                    out.push(case(
                        format!("{suite}/{s}/n{}", cfg.grid[g].n),
                        with(with(grid_params(cfg, g), windows.clone()), json!({ "symbol": s })),
                        ROUTE_TOL,
                        Task::WeylRoutes { g, symbol: s.clone() },
                    ));
                }
            }
        }
        SuiteKind::Boundedness => {
            let mut per_grid: Vec<Vec<String>> = vec![Vec::new(); ng];
            for (g, ids) in per_grid.iter_mut().enumerate() {
                let n = cfg.grid[g].n;
                for s in &cfg.symbols {
                    for &lambda in &cfg.lambda {
                        // a = 1 belongs to M^inf_{m_lambda} only for lambda = 0
                        if s == "const" && lambda > 0.0 {
                            continue;
                        }
                        for omega in 0..cfg.omega.len() {
                            let om = omega_id(cfg, omega);
                            for &[p, q] in &cfg.pq {
                                let id = format!("{suite}/{s}/p{p}q{q}/lam{lambda}/{om}/n{n}");
                                let params = with(
                                    with(grid_params(cfg, g), windows.clone()),
                                    json!({ "symbol": s, "p": p, "q": q, "lambda": lambda, "omega": cfg.omega[omega],
                                            "trials": cfg.trials, "seed": cfg.seed, "c_disc": cfg.c_disc,
                                            "stride": cfg.envelope_stride(g) }),
                                );
                                ids.push(id.clone());
                                out.push(case(id, params, cfg.c_disc, Task::Bound { g, symbol: s.clone(), p, q, omega, lambda }));
                            }
                        }
                    }
                }
            }
            for g in 1..ng {
                out.push(case(
                    format!("{suite}/ladder/{}", ladder_tag(cfg, g - 1, g)),
                    ladder_params(cfg, g - 1, g, json!({ "statistic": "max ratio" })),
                    LADDER_TOL,
                    Task::MaxRatioLadder { coarse: per_grid[g - 1].clone(), fine: per_grid[g].clone() },
                ));
            }
        }
        SuiteKind::Convolution => {
            for tuple in &cfg.tuples {
                let label = tuple.label();
                for omega in 0..cfg.omega.len() {
                    let om = omega_id(cfg, omega);
                    let mut per_grid: Vec<Vec<String>> = vec![Vec::new(); ng];
                    for (g, ids) in per_grid.iter_mut().enumerate() {
                        for pair in 0..cfg.pairs {
                            let id = format!("{suite}/{label}/{om}/pair{pair}/n{}", cfg.grid[g].n);
                            let params = with(
                                grid_params(cfg, g),
                                json!({ "tuple": tuple, "omega": cfg.omega[omega], "pair": pair, "seed": cfg.seed,
                                        "lhs_window": "g0g0", "rhs_window": "g0", "c_disc": cfg.c_disc }),
                            );
                            ids.push(id.clone());
                            out.push(case(id, params, cfg.c_disc, Task::ConvPair { g, tuple: *tuple, omega, pair }));
                        }
                    }
                    for g in 1..ng {
                        out.push(case(
                            format!("{suite}/{label}/{om}/ladder/{}", ladder_tag(cfg, g - 1, g)),
                            ladder_params(cfg, g - 1, g, json!({ "tuple": tuple, "omega": cfg.omega[omega], "statistic": "max ratio" })),
                            LADDER_TOL,
                            Task::MaxRatioLadder { coarse: per_grid[g - 1].clone(), fine: per_grid[g].clone() },
                        ));
                    }
                }
            }
        }
        SuiteKind::Compactness => {
            for s in &cfg.symbols {
                let flat = s == "const";
                let mut members = Vec::new();
                for g in 0..ng {
                    let n = cfg.grid[g].n;
                    let params = with(with(grid_params(cfg, g), windows.clone()), json!({ "symbol": s }));
                    if flat {
                        out.push(case(
                            format!("{suite}/{s}/flat/n{n}"),
                            with(params, json!({ "k": n / 2 })),
                            FLAT_TOL,
                            Task::Flat { g, symbol: s.clone() },
                        ));
                    } else {
                        let id = format!("{suite}/{s}/decay/n{n}");
                        members.push(id.clone());
                        out.push(case(id, with(params, json!({ "cutoff": SIGMA_CUTOFF })), SIGMA_CUTOFF, Task::Decaying { g, symbol: s.clone() }));
                    }
                }
                if !flat && ng > 1 {
                    let ns: Vec<usize> = cfg.grid.iter().map(|g| g.n).collect();
                    out.push(case(
                        format!("{suite}/{s}/k_stability"),
                        json!({ "symbol": s, "n": ns, "cutoff": SIGMA_CUTOFF }),
                        K_SPREAD,
                        Task::KStable { members },
                    ));
                }
            }
        }
        SuiteKind::M01Decay => {
            let base_grid = cfg.grid[0].grid()?;
            for s in &cfg.symbols {
                let expects = SymbolSpec::builtin(s, base_grid)?.expects_2m2;
                for omega in 0..cfg.omega.len() {
                    let om = omega_id(cfg, omega);
                    for &lambda in &cfg.lambda {
                        let prefix = format!("{suite}/{s}/{om}/lam{lambda}");
                        let common = json!({ "symbol": s, "omega": cfg.omega[omega], "lambda": lambda,
                                             "psi": cfg.psi_id(), "gamma": cfg.gamma_id() });
                        let stride = |g: usize| json!({ "stride": cfg.decay_stride(g) });
                        out.push(case(
                            format!("{prefix}/hypothesis"),
                            with(with(with(grid_params(cfg, 0), common.clone()), stride(0)), json!({ "radii": cfg.radii, "expects_decay": expects,
                                                                                     "threshold": DECAY_THRESHOLD })),
                            if expects { DECAY_THRESHOLD } else { 1.0 },
                            Task::Hypothesis { symbol: s.clone(), omega, lambda },
                        ));
                        if expects {
                            for g in 0..ng {
                                out.push(case(
                                    format!("{prefix}/edge/n{}", cfg.grid[g].n),
                                    with(with(grid_params(cfg, g), common.clone()), stride(g)),
                                    EDGE_TOL,
                                    Task::Edge { g, symbol: s.clone(), omega, lambda },
                                ));
                            }
                            for g in 1..ng {
                                out.push(case(
                                    format!("{prefix}/ladder/{}", ladder_tag(cfg, g - 1, g)),
                                    ladder_params(cfg, g - 1, g, with(common.clone(), json!({ "stride": [cfg.decay_stride(g - 1), cfg.decay_stride(g)] }))),
                                    T_LADDER_FACTOR,
                                    Task::EdgeLadder {
                                        coarse: format!("{prefix}/edge/n{}", cfg.grid[g - 1].n),
                                        fine: format!("{prefix}/edge/n{}", cfg.grid[g].n),
                                    },
                                ));
                            }
                        } else if s == "const" && lambda > 0.0 {
                            for g in 1..ng {
                                out.push(case(
                                    format!("{prefix}/growth/{}", ladder_tag(cfg, g - 1, g)),
                                    ladder_params(cfg, g - 1, g, with(common.clone(), json!({ "stride": [cfg.decay_stride(g - 1), cfg.decay_stride(g)] }))),
                                    GROWTH_TOL,
                                    Task::Growth { coarse: g - 1, fine: g, symbol: s.clone(), omega, lambda },
                                ));
                            }
                        }
                    }
                }
            }
        }
        SuiteKind::FrameNuclear => {
            let steps = json!({ "a": cfg.gabor.a, "b": cfg.gabor.b, "window": "g0" });
            for g in 0..ng {
                let n = cfg.grid[g].n;
                out.push(case(
                    format!("{suite}/tightness/n{n}"),
                    with(grid_params(cfg, g), steps.clone()),
                    TIGHTNESS_TOL,
                    Task::Tightness { g },
                ));
                for s in &cfg.symbols {
                    let params = with(with(with(grid_params(cfg, g), steps.clone()), windows.clone()), json!({ "symbol": s }));
                    for (step, factors) in [(0usize, [2, 4]), (1, [4, 8])] {
                        out.push(case(
                            format!("{suite}/{s}/tail{step}/n{n}"),
                            with(params.clone(), json!({ "radii_over_median": factors })),
                            TAIL_TOL,
                            Task::Tail { g, symbol: s.clone(), step },
                        ));
                    }
                    out.push(case(format!("{suite}/{s}/nuclear/n{n}"), params, 1.0, Task::Nuclear { g, symbol: s.clone() }));
                }
            }
        }
    }
    Ok(out)
}

type WeightKey = (usize, u64);

/// Evaluation state of one run: grids, caches shared between cases and the recorded values
/// that ladder cases read back.
pub(crate) struct Context<'a> {
    cfg: &'a SuiteConfig,
    grids: Vec<Grid>,
    weights: Vec<WeightFunction>,
    recorded: HashMap<String, (f64, f64)>,
    extras: HashMap<String, f64>,
    ops: HashMap<(String, usize), LocOpMatrix>,
    envelopes: HashMap<(String, usize), SymbolEnvelope>,
    profiles: HashMap<(String, usize, WeightKey), M01Profile>,
    frames: HashMap<usize, (GaborSystem, Tightness)>,
    coefficients: HashMap<(String, usize), GaborCoefficients>,
    artifacts: Vec<Artifact>,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a SuiteConfig) -> Result<Self> {
        Ok(Self {
            cfg,
            grids: cfg.grids()?,
            weights: cfg.weights()?,
            recorded: HashMap::new(),
            extras: HashMap::new(),
            ops: HashMap::new(),
            envelopes: HashMap::new(),
            profiles: HashMap::new(),
            frames: HashMap::new(),
            coefficients: HashMap::new(),
            artifacts: Vec::new(),
        })
    }

    pub fn record(&mut self, id: &str, lhs: f64, rhs: f64) {
        self.recorded.insert(id.to_string(), (lhs, rhs));
    }

    pub fn into_artifacts(self) -> Vec<Artifact> {
        self.artifacts
    }

    fn recorded(&self, id: &str) -> (f64, f64) {
        self.recorded.get(id).copied().unwrap_or((f64::NAN, f64::NAN))
    }

    fn windows(&self, g: usize) -> Result<(SampledSignal, SampledSignal)> {
        let grid = self.grids[g];
        Ok((resolve_window(self.cfg.psi_id(), grid)?, resolve_window(self.cfg.gamma_id(), grid)?))
    }

    fn operator(&mut self, symbol: &str, g: usize) -> Result<&LocOpMatrix> {
        let key = (symbol.to_string(), g);
        if !self.ops.contains_key(&key) {
            let (psi, gamma) = self.windows(g)?;
            let a = SymbolSpec::builtin(symbol, self.grids[g])?;
            let op = localization_matrix(&a, &psi, &gamma)?;
            self.ops.insert(key.clone(), op);
        }
        Ok(&self.ops[&key])
    }

    fn weight(&self, omega: usize, lambda: f64, component: WeightComponent) -> WeightSpec {
        WeightSpec::new(self.weights[omega], lambda, component)
    }

    fn profile(&mut self, symbol: &str, g: usize, omega: usize, lambda: f64) -> Result<&M01Profile> {
        let key = (symbol.to_string(), g, (omega, lambda.to_bits()));
        if !self.profiles.contains_key(&key) {
            let (psi, gamma) = self.windows(g)?;
            let a = SymbolSpec::builtin(symbol, self.grids[g])?;
            let aw = weyl_symbol_direct(&a, &psi, &gamma)?;
            let w = self.weight(omega, lambda, WeightComponent::Full);
            let p = symbol_m01_profile(&aw, &w, self.cfg.decay_stride(g))?;
            self.profiles.insert(key.clone(), p);
        }
        Ok(&self.profiles[&key])
    }

    fn frame(&mut self, g: usize) -> Result<&(GaborSystem, Tightness)> {
        if !self.frames.contains_key(&g) {
            let grid = self.grids[g];
            let steps = self.cfg.gabor;
            let sys = build_gabor_system(&gaussian(grid), steps.a as f64 * grid.h(), steps.b as f64 * grid.delta_xi())?;
            let t = tightness_defect(&sys);
            self.frames.insert(g, (sys, t));
        }
        Ok(&self.frames[&g])
    }

    fn coefficients(&mut self, symbol: &str, g: usize) -> Result<GaborCoefficients> {
        let key = (symbol.to_string(), g);
        if !self.coefficients.contains_key(&key) {
            let op = self.operator(symbol, g)?.clone();
            let sys = self.frame(g)?.0.clone();
            let c = operator_gabor_coefficients(&op, &sys)?;
            self.coefficients.insert(key.clone(), c);
        }
        Ok(self.coefficients[&key].clone())
    }

    fn spectrum(&mut self, symbol: &str, g: usize) -> Result<Vec<f64>> {
        let op = self.operator(symbol, g)?;
        let sigma = singular_values(op)?;
        let grid = self.grids[g];
        self.artifacts.push(Artifact {
            name: format!("spectra/{symbol}_n{}.bin", grid.n()),
            container: Container::from_spectrum(&grid, &sigma),
        });
        Ok(sigma)
    }

    fn max_ratio(&self, ids: &[String]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for id in ids {
            let (l, r) = self.recorded(id);
            let v = l / r;
            if !v.is_finite() {
                return f64::NAN;
            }
            best = best.max(v);
        }
        best
    }

    /// `(lhs, rhs)` of one case.
    pub fn evaluate(&mut self, case: &Case) -> Result<(f64, f64)> {
        let cfg = self.cfg;
        match &case.task {
            Task::RoundTrip { g, signal } => {
                let grid = self.grids[*g];
                let f = if *signal == "g0" { gaussian(grid) } else { hermite1(grid) };
                let (psi, gamma) = self.windows(*g)?;
                let rec = invert(&f, &psi, &gamma)?;
                Ok((rec.sub(&f)?.norm_l2(), f.norm_l2()))
            }
            Task::Identity { g } => {
                let (psi, gamma) = self.windows(*g)?;
                let d = self.grids[*g].dim() as i32;
                let c = gamma.inner(&psi)? * (2.0 * PI).powi(d);
                let op = self.operator("const", *g)?;
                let diff = &op.matrix - DMatrix::<Complex64>::identity(op.matrix.nrows(), op.matrix.ncols()) * c;
                Ok((diff.singular_values().max(), c.norm()))
            }
            Task::Adjointness { g } => {
                let grid = self.grids[*g];
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let f = random_noise(grid, &mut rng);
                let big_f = PhaseSpaceFunction {
                    grid,
                    values: (0..grid.len() * grid.len())
                        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect(),
                };
                let (psi, _) = self.windows(*g)?;
                let vf = stft(&f, &psi)?;
                let lhs = vf.inner(&big_f)?;
                let rhs = f.inner(&stft_adjoint(&big_f, &psi)?)?;
                Ok(((lhs - rhs).norm(), vf.norm_l2() * big_f.norm_l2()))
            }
            Task::WignerRealness { g } => {
                let grid = self.grids[*g];
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
                let f = random_mixture(grid, &mut rng, grid.extent() / 3.0, 2.0);
                let w = cross_wigner(&f, &f)?;
                let imag = w.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
                Ok((imag, w.max_abs()))
            }
            Task::Orthogonality { g } => {
                let grid = self.grids[*g];
                let f = hermite1(grid);
                let (psi, _) = self.windows(*g)?;
                let c = (2.0 * PI).powi(grid.dim() as i32);
                let ratio = stft(&f, &psi)?.norm_l2().powi(2) / (f.norm_l2().powi(2) * psi.norm_l2().powi(2));
                Ok(((ratio - c).abs(), c))
            }
            Task::Covariance { g } => {
                let grid = self.grids[*g];
                if grid.dim() != 1 {
                    return Err(Error::Structure("covariance check is implemented for d = 1".into()));
                }
                let n = grid.n();
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
                let f = random_mixture(grid, &mut rng, grid.extent() / 6.0, 2.0);
                let (psi, _) = self.windows(*g)?;
                let k = (n / 32).max(1);
                let s = (n / 64).max(1);
                let u = k as f64 * grid.h();
                let eta = s as f64 * grid.delta_xi();
                let shifted = f.translate_nodes([k as i64, 0]);
                let moved = SampledSignal::from_fn(grid, |y| Complex64::from_polar(1.0, eta * y[0]))
                    .values
                    .iter()
                    .zip(&shifted.values)
                    .map(|(m, v)| m * v)
                    .collect();
                let moved = SampledSignal::new(grid, moved)?;
                let v = stft(&f, &psi)?;
                let vm = stft(&moved, &psi)?;
                let dual = grid.dual();
                let mut dev: f64 = 0.0;
                for p in n / 4 + k..3 * n / 4 {
                    for m in n / 4 + s..3 * n / 4 {
                        let expect = Complex64::from_polar(1.0, -u * (dual.node(m) - eta)) * v.at(p - k, m - s);
                        dev = dev.max((vm.at(p, m) - expect).norm());
                    }
                }
                Ok((dev, v.max_abs()))
            }
            Task::WeylRoutes { g, symbol } => {
                let (psi, gamma) = self.windows(*g)?;
                let a = SymbolSpec::builtin(symbol, self.grids[*g])?;
                let l = self.operator(symbol, *g)?.clone();
                let k = weyl_route_matrix(&a, &psi, &gamma)?;
                self.artifacts.push(Artifact {
                    name: format!("operators/{symbol}_n{}.bin", self.grids[*g].n()),
                    container: Container::from_matrix(&self.grids[*g], &l.matrix),
                });
                Ok(((&l.matrix - &k.matrix).norm(), l.matrix.norm()))
            }
            Task::Bound { g, symbol, p, q, omega, lambda } => {
                let grid = self.grids[*g];
                let (psi, gamma) = self.windows(*g)?;
                let g0 = gaussian(grid);
                let full = self.weight(*omega, *lambda, WeightComponent::Full);
                let params = MixedNormParams::new(*p, *q, full);
                let op = self.operator(symbol, *g)?;
                let est = operator_norm(op, &params, &g0, cfg.trials, cfg.seed)?;
                let key = (symbol.clone(), *g);
                if !self.envelopes.contains_key(&key) {
                    let a = SymbolSpec::builtin(symbol, grid)?;
                    let stride = cfg.envelope_stride(*g);
                    self.envelopes.insert(key.clone(), SymbolEnvelope::compute(&a.samples, stride)?);
                }
                let a_norm = self.envelopes[&key].sup_norm(&self.weight(*omega, *lambda, WeightComponent::Second));
                let psi_norm = modulation_norm(
                    &psi,
                    &g0,
                    &MixedNormParams::new(Exponent::ONE, Exponent::ONE, self.weight(*omega, *lambda, WeightComponent::Absolute)),
                )?;
                let gamma_norm = modulation_norm(&gamma, &g0, &MixedNormParams::new(*p, *p, full))?;
                Ok((est.value, a_norm * psi_norm * gamma_norm))
            }
            Task::MaxRatioLadder { coarse, fine } => {
                let c = self.max_ratio(coarse);
                let f = self.max_ratio(fine);
                Ok(((f - c).abs(), c))
            }
            Task::ConvPair { g, tuple, omega, pair } => {
                let grid = self.grids[*g];
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(*pair as u64));
                let spread = grid.extent() / 4.0;
                let f = random_mixture(grid, &mut rng, spread, 2.0);
                let h = random_mixture(grid, &mut rng, spread, 2.0);
                let om = self.weights[*omega];
                let ConvTuple { p, q, r, s, t, lambda, mu } = *tuple;
                let product = |a: Exponent, b: Exponent| Exponent::new(a.value() * b.value());
                let f_weight = PhaseWeight::product([
                    WeightSpec::new(om, lambda, WeightComponent::First),
                    WeightSpec::new(om, mu, WeightComponent::Second),
                ]);
                let h_weight = PhaseWeight::product([
                    WeightSpec::new(om, lambda, WeightComponent::First),
                    WeightSpec::new(om, lambda.abs(), WeightComponent::Second),
                    WeightSpec::new(om, -mu, WeightComponent::Second),
                ]);
                let g0 = gaussian(grid);
                let lhs = modulation_norm(
                    &convolve(&f, &h)?,
                    &gaussian_self_convolution(grid),
                    &MixedNormParams::new(r, s, WeightSpec::full(om, lambda)),
                )?;
                let nf = modulation_norm(&f, &g0, &MixedNormParams::new(p, product(s, t)?, f_weight))?;
                let nh = modulation_norm(&h, &g0, &MixedNormParams::new(q, product(s, t.conjugate())?, h_weight))?;
                Ok((lhs, nf * nh))
            }
            Task::Decaying { g, symbol } => {
                let sigma = self.spectrum(symbol, *g)?;
                let top = sigma[0];
                let k = sigma.iter().position(|s| *s < SIGMA_CUTOFF * top);
                let (idx, value) = match k {
                    Some(i) => (i as f64 + 1.0, sigma[i]),
                    None => (f64::NAN, *sigma.last().expect("non-empty spectrum")),
                };
                self.extras.insert(case.id.clone(), idx);
                Ok((value, top))
            }
            Task::Flat { g, symbol } => {
                let sigma = self.spectrum(symbol, *g)?;
                let half = sigma.len() / 2;
                Ok((sigma[0] - sigma[half - 1], sigma[0]))
            }
            Task::KStable { members } => {
                let ks: Vec<f64> = members.iter().map(|m| self.extras.get(m).copied().unwrap_or(f64::NAN)).collect();
                if ks.iter().any(|k| !k.is_finite()) {
                    return Ok((f64::NAN, 1.0));
                }
                let hi = ks.iter().copied().fold(f64::MIN, f64::max);
                let lo = ks.iter().copied().fold(f64::MAX, f64::min);
                Ok((hi - lo, 1.0))
            }
            Task::Hypothesis { symbol, omega, lambda } => {
                let a = SymbolSpec::builtin(symbol, self.grids[0])?;
                let w = self.weight(*omega, *lambda, WeightComponent::Full);
                let rep = check_2m2(&a, &w, &cfg.radii, self.cfg.decay_stride(0))?;
                let worst = rep
                    .profiles
                    .iter()
                    .max_by(|x, y| x.edge_ratio().total_cmp(&y.edge_ratio()))
                    .ok_or_else(|| Error::Numerical("decay check returned no profile".into()))?;
                let edge = worst.edge_time.max(worst.edge_frequency);
                if a.expects_2m2 {
                    Ok((edge, worst.peak))
                } else {
                    Ok((DECAY_THRESHOLD * worst.peak, edge))
                }
            }
            Task::Edge { g, symbol, omega, lambda } => {
                let p = self.profile(symbol, *g, *omega, *lambda)?;
                Ok((p.edge_time, p.peak))
            }
            Task::EdgeLadder { coarse, fine } => Ok((self.recorded(fine).0, self.recorded(coarse).0)),
            Task::Growth { coarse, fine, symbol, omega, lambda } => {
                let c = self.profile(symbol, *coarse, *omega, *lambda)?.edge_time;
                let f = self.profile(symbol, *fine, *omega, *lambda)?.edge_time;
                Ok((c, f))
            }
            Task::Tightness { g } => Ok((self.frame(*g)?.1.defect, 1.0)),
            Task::Tail { g, symbol, step } => {
                let c = self.coefficients(symbol, *g)?;
                let t = c.tails(&tail_ladder(c.median_radius()));
                Ok((t[step + 1].1, t[*step].1))
            }
            Task::Nuclear { g, symbol } => {
                let c = self.coefficients(symbol, *g)?;
                let op = self.operator(symbol, *g)?.clone();
                let (sys, t) = self.frame(*g)?.clone();
                let rep = nuclear_bound(&c, &sys, &op, t.frame_constant)?;
                Ok((rep.trace_norm, rep.bound))
            }
        }
    }
}
