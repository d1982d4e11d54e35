use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledSignal};
use crate::locop::BUILTIN_SYMBOLS;
use crate::norms::Exponent;
use crate::signals;
use crate::weights::{OmegaKind, WeightFunction};

/// The seven verification suites, in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Inversion,
    WeylEquivalence,
    Boundedness,
    Convolution,
    Compactness,
    M01Decay,
    FrameNuclear,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 7] = [
        SuiteKind::Inversion,
        SuiteKind::WeylEquivalence,
        SuiteKind::Boundedness,
        SuiteKind::Convolution,
        SuiteKind::Compactness,
        SuiteKind::M01Decay,
        SuiteKind::FrameNuclear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Inversion => "inversion",
            SuiteKind::WeylEquivalence => "weyl_equivalence",
            SuiteKind::Boundedness => "boundedness",
            SuiteKind::Convolution => "convolution",
            SuiteKind::Compactness => "compactness",
            SuiteKind::M01Decay => "m01_decay",
            SuiteKind::FrameNuclear => "frame_nuclear",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            SuiteKind::Inversion => "STFT inversion, identity recovery, adjointness, Wigner realness, orthogonality, covariance",
            SuiteKind::WeylEquivalence => "localization matrix versus Weyl-kernel matrix for each symbol",
            SuiteKind::Boundedness => "operator-norm estimate against the symbol/window norm product, with n-ladder",
            SuiteKind::Convolution => "weighted mixed-norm convolution inequality over seeded pairs, with n-ladder",
            SuiteKind::Compactness => "singular-value fingerprints: decaying for decaying symbols, flat for a = 1",
            SuiteKind::M01Decay => "symbol decay hypothesis and the decay of a * W(gamma, psi) under a T-ladder",
            SuiteKind::FrameNuclear => "Gabor tightness, kernel coefficient tails and the nuclear bound",
        }
    }

    pub fn parse(name: &str) -> Result<SuiteKind> {
        SuiteKind::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown suite {name:?}")))
    }
}

impl std::fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "one")]
    pub dim: usize,
    pub n: usize,
    /// Half extent: the grid covers `[-t, t)`.
    pub t: f64,
}

fn one() -> usize {
    1
}

impl GridSpec {
    pub fn new(n: usize, t: f64) -> Self {
        Self { dim: 1, n, t }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::with_extent(self.dim, self.n, self.t).map_err(|e| Error::Config(e.to_string()))
    }
}

/// One admissible parameter tuple of the convolution inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvTuple {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    pub s: Exponent,
    pub t: Exponent,
    pub lambda: f64,
    pub mu: f64,
}

impl ConvTuple {
    fn new(p: f64, q: f64, r: f64, s: f64, t: f64, lambda: f64, mu: f64) -> Self {
        let e = |v: f64| Exponent::new(v).expect("valid default exponent");
        Self { p: e(p), q: e(q), r: e(r), s: e(s), t: e(t), lambda, mu }
    }

    /// `1/p + 1/q - 1 = 1/r` and `lambda >= 0`.
    pub fn is_admissible(&self) -> bool {
        let lhs = self.p.reciprocal() + self.q.reciprocal() - 1.0;
        (lhs - self.r.reciprocal()).abs() < 1e-12 && self.lambda >= 0.0 && self.mu.is_finite()
    }

    pub fn label(&self) -> String {
        format!("p{}q{}r{}s{}t{}l{}m{}", self.p, self.q, self.r, self.s, self.t, self.lambda, self.mu)
    }
}

/// Gabor lattice steps in grid nodes: `alpha0 = a h`, `beta0 = b delta_xi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaborSteps {
    pub a: usize,
    pub b: usize,
}

pub const WINDOW_IDS: [&str; 4] = ["g0", "g0g0", "hermite1", "g0_shifted"];

pub fn resolve_window(id: &str, grid: Grid) -> Result<SampledSignal> {
    Ok(match id {
        "g0" => signals::gaussian(grid),
        "g0g0" => signals::gaussian_self_convolution(grid),
        "hermite1" => signals::hermite1(grid),
        "g0_shifted" => {
            let d = grid.dim();
            signals::shifted_gaussian(grid, &vec![0.3; d], &vec![0.5; d], 1.2)
        }
        other => return Err(Error::Config(format!("unknown window id {other:?}"))),
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    suite: SuiteKind,
    grid: Option<OneOrMany<GridSpec>>,
    omega: Option<OneOrMany<OmegaKind>>,
    lambda: Option<OneOrMany<f64>>,
    pq: Option<Vec<[Exponent; 2]>>,
    symbols: Option<Vec<String>>,
    windows: Option<Vec<String>>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    c_disc: Option<f64>,
    trials: Option<usize>,
    pairs: Option<usize>,
    tuples: Option<Vec<ConvTuple>>,
    radii: Option<Vec<f64>>,
    stride: Option<usize>,
    gabor: Option<GaborSteps>,
}

/// Fully resolved configuration of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suite: SuiteKind,
    /// A single grid or a ladder with strictly increasing `n`.
    pub grid: Vec<GridSpec>,
    pub omega: Vec<OmegaKind>,
    pub lambda: Vec<f64>,
    pub pq: Vec<[Exponent; 2]>,
    pub symbols: Vec<String>,
    /// `[psi, gamma]`: analysis and synthesis windows.
    pub windows: Vec<String>,
    pub seed: u64,
    pub output: PathBuf,
    pub c_disc: f64,
    pub trials: usize,
    pub pairs: usize,
    pub tuples: Vec<ConvTuple>,
    pub radii: Vec<f64>,
    pub stride: Option<usize>,
    pub gabor: GaborSteps,
}

impl SuiteConfig {
    /// The built-in configuration of a suite.
    pub fn default_for(suite: SuiteKind) -> SuiteConfig {
        let inf = f64::INFINITY;
        let e = |v: f64| Exponent::new(v).expect("valid default exponent");
        let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let mut c = SuiteConfig {
            suite,
            grid: vec![GridSpec::new(256, 12.0)],
            omega: vec![OmegaKind::Log1p],
            lambda: vec![0.0],
            pq: vec![[Exponent::TWO, Exponent::TWO]],
            symbols: Vec::new(),
            windows: ids(&["g0", "g0"]),
            seed: 1,
            output: PathBuf::from("reports").join(suite.name()),
            c_disc: 2.0,
            trials: 16,
            pairs: 20,
            tuples: Vec::new(),
            radii: vec![1.0, 4.0],
            stride: None,
            gabor: GaborSteps { a: 1, b: 6 },
        };
        match suite {
            SuiteKind::Inversion => {}
            SuiteKind::WeylEquivalence => c.symbols = ids(&BUILTIN_SYMBOLS),
            SuiteKind::Boundedness => {
                c.grid = vec![GridSpec::new(128, 12.0), GridSpec::new(256, 12.0)];
                c.omega = vec![OmegaKind::Log1p, OmegaKind::Power(0.5)];
                c.lambda = vec![0.0, 1.0];
                c.pq = [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0)].iter().map(|&(p, q)| [e(p), e(q)]).collect();
                c.symbols = ids(&["gauss", "gauss_aniso", "box", "const"]);
                c.seed = 7;
            }
            SuiteKind::Convolution => {
                c.grid = vec![GridSpec::new(128, 12.0), GridSpec::new(256, 12.0)];
                c.seed = 11;
                c.tuples = vec![
                    ConvTuple::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0),
                    ConvTuple::new(inf, 1.0, inf, 1.0, inf, 0.0, -1.0),
                    ConvTuple::new(2.0, 1.0, 2.0, 2.0, 1.0, 0.0, 0.0),
                    ConvTuple::new(1.0, 2.0, 2.0, 1.0, 2.0, 1.0, 0.0),
                    ConvTuple::new(2.0, 2.0, inf, 1.0, 2.0, 1.0, 1.0),
                    ConvTuple::new(1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 0.0),
                ];
            }
            SuiteKind::Compactness => {
                c.grid = vec![GridSpec::new(128, 12.0), GridSpec::new(256, 12.0), GridSpec::new(512, 12.0)];
                c.symbols = ids(&["gauss", "box", "const"]);
            }
            SuiteKind::M01Decay => {
                c.grid = vec![GridSpec::new(192, 12.0), GridSpec::new(256, 16.0)];
                c.symbols = ids(&BUILTIN_SYMBOLS);
                c.lambda = vec![1.0];
            }
            SuiteKind::FrameNuclear => {
                c.grid = vec![GridSpec::new(96, 12.0)];
                c.symbols = ids(&["gauss"]);
            }
        }
        c
    }

    /// Parses a TOML configuration; omitted keys take the suite defaults.
    pub fn from_toml_str(text: &str) -> Result<SuiteConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut c = SuiteConfig::default_for(raw.suite);
        if let Some(g) = raw.grid {
            c.grid = g.into_vec();
        }
        if let Some(o) = raw.omega {
            c.omega = o.into_vec();
        }
        if let Some(l) = raw.lambda {
            c.lambda = l.into_vec();
        }
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = raw.$field { c.$field = v; } )* };
        }
        take!(pq, symbols, windows, seed, output, c_disc, trials, pairs, tuples, radii, gabor);
        c.stride = raw.stride.or(c.stride);
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<SuiteConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        SuiteConfig::from_toml_str(&text)
    }

    pub fn grids(&self) -> Result<Vec<Grid>> {
        self.grid.iter().map(GridSpec::grid).collect()
    }

    pub fn weights(&self) -> Result<Vec<WeightFunction>> {
        self.omega
            .iter()
            .map(|k| WeightFunction::new(*k).map_err(|e| Error::Config(e.to_string())))
            .collect()
    }

    /// Lattice stride of the symbol STFT scan used for `||a||_{M^inf}` on grid `g`.
    pub fn envelope_stride(&self, g: usize) -> usize {
        self.stride.unwrap_or_else(|| crate::symbol_stft::default_stride(self.grid[g].n))
    }

    /// Lattice stride of the decay scans on grid `g`: one unit of length unless configured.
    pub fn decay_stride(&self, g: usize) -> usize {
        let h = 2.0 * self.grid[g].t / self.grid[g].n as f64;
        self.stride.unwrap_or_else(|| (1.0 / h).round().max(1.0) as usize)
    }

    pub fn psi_id(&self) -> &str {
        &self.windows[0]
    }

    pub fn gamma_id(&self) -> &str {
        &self.windows[1]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.grid.is_empty() {
            return bad("grid list is empty".into());
        }
        for g in &self.grid {
            g.grid()?;
        }
        if self.grid.windows(2).any(|w| w[1].n <= w[0].n) {
            return bad("grid ladder must be strictly increasing in n".into());
        }
        self.weights()?;
        if self.omega.is_empty() {
            return bad("omega list is empty".into());
        }
        if let Some(l) = self.lambda.iter().find(|l| !l.is_finite()) {
            return bad(format!("lambda {l} is not finite"));
        }
        for s in &self.symbols {
            if !BUILTIN_SYMBOLS.contains(&s.as_str()) {
                return bad(format!("unknown symbol id {s:?}"));
            }
        }
        if self.windows.len() != 2 {
            return bad(format!("windows must list [psi, gamma], got {} entries", self.windows.len()));
        }
        for w in &self.windows {
            if !WINDOW_IDS.contains(&w.as_str()) {
                return bad(format!("unknown window id {w:?}"));
            }
        }
        if !(self.c_disc > 0.0 && self.c_disc.is_finite()) {
            return bad(format!("c_disc must be positive, got {}", self.c_disc));
        }
        if self.trials == 0 || self.pairs == 0 {
            return bad("trials and pairs must be at least 1".into());
        }
        if self.stride == Some(0) {
            return bad("stride must be at least 1".into());
        }
        let one_dim = self.grid.iter().all(|g| g.dim == 1);
        let need = |cond: bool, msg: &str| if cond { Ok(()) } else { Err(Error::Config(msg.to_string())) };
        match self.suite {
            SuiteKind::Inversion => {}
            SuiteKind::WeylEquivalence => {
                need(one_dim, "weyl_equivalence needs d = 1")?;
                need(self.grid.iter().all(|g| g.n % 4 == 0), "weyl_equivalence needs n divisible by 4")?;
                need(!self.symbols.is_empty(), "weyl_equivalence needs at least one symbol")?;
            }
            SuiteKind::Boundedness => {
                need(one_dim, "boundedness needs d = 1")?;
                need(!self.symbols.is_empty() && !self.pq.is_empty() && !self.lambda.is_empty(), "boundedness needs symbols, pq and lambda")?;
                need(self.lambda.iter().all(|l| *l >= 0.0), "boundedness needs lambda >= 0")?;
                need(self.pq.iter().all(|[p, q]| !p.is_infinite() && !q.is_infinite()), "boundedness needs finite p and q")?;
            }
            SuiteKind::Convolution => {
                need(!self.tuples.is_empty(), "convolution needs at least one tuple")?;
                if let Some(t) = self.tuples.iter().find(|t| !t.is_admissible()) {
                    return bad(format!("tuple {} violates 1/p + 1/q - 1 = 1/r or lambda >= 0", t.label()));
                }
            }
            SuiteKind::Compactness => {
                need(one_dim, "compactness needs d = 1")?;
                for s in &self.symbols {
                    if s == "xonly" {
                        return bad("compactness has no fingerprint for the x-only symbol".into());
                    }
                }
                need(!self.symbols.is_empty(), "compactness needs at least one symbol")?;
            }
            SuiteKind::M01Decay => {
                need(one_dim, "m01_decay needs d = 1")?;
                need(self.grid.len() >= 2, "m01_decay needs a T-ladder of at least two grids")?;
                let h0 = self.grid[0].t * 2.0 / self.grid[0].n as f64;
                for g in &self.grid {
                    let h = g.t * 2.0 / g.n as f64;
                    need((h - h0).abs() <= 1e-12 * h0, "m01_decay ladder must keep the spacing h fixed")?;
                }
                need(self.lambda.iter().all(|l| *l >= 0.0), "m01_decay needs lambda >= 0")?;
                need(!self.radii.is_empty(), "m01_decay needs at least one radius")?;
                for g in &self.grid {
                    let h = g.t * 2.0 / g.n as f64;
                    let limit = (std::f64::consts::PI / h).min(g.t);
                    if let Some(r) = self.radii.iter().find(|r| !(**r > 0.0 && **r <= limit)) {
                        return bad(format!("radius {r} outside (0, {limit}]"));
                    }
                }
            }
            SuiteKind::FrameNuclear => {
                need(one_dim, "frame_nuclear needs d = 1")?;
                let GaborSteps { a, b } = self.gabor;
                need(a >= 1 && b >= 1, "gabor steps must be positive")?;
                need(self.grid.iter().all(|g| g.n % b == 0), "gabor step b must divide n")?;
            }
        }
        Ok(())
    }
}
