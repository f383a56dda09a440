//! Strict JSON run configuration. Unknown keys are rejected, and parse
//! errors carry the offending field path and line.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{EnsembleSpec, Generator, ResolventOptions, Weak11Options};
use crate::forcing::{Forcing, Pulse, Spatial};
use crate::grid::{SpaceTimeGrid, SpatialGrid};
use crate::kernels::{Assumption1Options, HormanderOptions, MomentRange, SliceGridRule};
use crate::partitions::Gamma;
use crate::symbols::{LevyDensity, Piece, Poly2mCoeffs, SymbolSpec, TimeProfile};
use crate::CONFIG_SCHEMA_VERSION;

/// A real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl Coefficient {
    pub fn value(&self) -> Complex64 {
        match *self {
            Coefficient::Real(r) => Complex64::new(r, 0.0),
            Coefficient::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractionalPiece {
    pub t0: f64,
    pub t1: f64,
    pub a: Coefficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Poly2mPiece {
    pub t0: f64,
    pub t1: f64,
    /// Row-major over the order-`m` multi-indices.
    pub matrix: Vec<Coefficient>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyPiece {
    pub t0: f64,
    pub t1: f64,
    pub density: LevyDensity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub symbol: SymbolConfig,
    pub power: f64,
}

/// Declarative symbol, built into a [`SymbolSpec`] by [`SymbolConfig::build`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolConfig {
    Fractional {
        gamma: f64,
        dim: usize,
        pieces: Vec<FractionalPiece>,
    },
    Poly2m {
        m: u32,
        dim: usize,
        pieces: Vec<Poly2mPiece>,
    },
    Levy {
        gamma: f64,
        dim: usize,
        pieces: Vec<LevyPiece>,
    },
    /// One factor is a power `−(−ψ)^a`; two factors multiply.
    Composed {
        factors: Vec<Factor>,
    },
    Scaled {
        symbol: Box<SymbolConfig>,
        xi_scale: f64,
    },
}

fn profile<P, C>(pieces: &[P], f: impl Fn(&P) -> (f64, f64, C)) -> Result<TimeProfile<C>> {
    TimeProfile::new(
        pieces
            .iter()
            .map(|p| {
                let (t0, t1, coeff) = f(p);
                Piece { t0, t1, coeff }
            })
            .collect(),
    )
}

impl SymbolConfig {
    pub fn build(&self) -> Result<SymbolSpec> {
        match self {
            SymbolConfig::Fractional { gamma, dim, pieces } => {
                SymbolSpec::fractional(profile(pieces, |p| (p.t0, p.t1, p.a.value()))?, *gamma, *dim)
            }
            SymbolConfig::Poly2m { m, dim, pieces } => SymbolSpec::poly2m(
                profile(pieces, |p| {
                    (p.t0, p.t1, Poly2mCoeffs { matrix: p.matrix.iter().map(|c| c.value()).collect() })
                })?,
                *m,
                *dim,
            ),
            SymbolConfig::Levy { gamma, dim, pieces } => {
                SymbolSpec::levy(profile(pieces, |p| (p.t0, p.t1, p.density.clone()))?, *gamma, *dim)
            }
            SymbolConfig::Composed { factors } => match factors.as_slice() {
                [a] => SymbolSpec::power(&a.symbol.build()?, a.power),
                [a, b] => SymbolSpec::compose(&a.symbol.build()?, a.power, &b.symbol.build()?, b.power),
                _ => Err(Error::Config(format!("composed symbols take one or two factors, got {}", factors.len()))),
            },
            SymbolConfig::Scaled { symbol, xi_scale } => SymbolSpec::scaled(&symbol.build()?, *xi_scale),
        }
    }
}

/// Space-time lattice; the time window defaults to the symbol's window, and
/// every coefficient breakpoint is added as a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub extent: f64,
    pub points: usize,
    pub nodes: usize,
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub t1: Option<f64>,
}

impl GridConfig {
    pub fn build(&self, sym: &SymbolSpec) -> Result<SpaceTimeGrid> {
        let (a, b) = sym.window();
        let space = SpatialGrid::new(sym.dim(), self.extent, self.points)?;
        SpaceTimeGrid::aligned(space, self.t0.unwrap_or(a), self.t1.unwrap_or(b), self.nodes, sym)
    }
}

fn default_levels() -> Vec<i64> {
    (-2..=2).collect()
}

fn default_lambdas() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 4.0]
}

fn default_gaps() -> Vec<f64> {
    (-4..=2).map(|k| (k as f64).exp2()).collect()
}

/// Settings for `czkit kernel`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// Birth time of the slices; defaults to the window start.
    pub s0: Option<f64>,
    pub gaps: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub slice: SliceGridRule,
    pub opnorm_tol: f64,
    /// Moment order; defaults to `γ/2`.
    pub mu: Option<f64>,
    pub moment_range: MomentRange,
    pub moment_extent: f64,
    pub moment_points: usize,
    pub moment_tol: f64,
    /// Exact order for the filtration (`"3/2"`, `"pi"`, …); defaults to
    /// the shortest decimal of the symbol's order.
    pub gamma_exact: Option<String>,
    pub levels: Vec<i64>,
    pub pairs: usize,
    pub variation_tol: f64,
    pub hormander: HormanderOptions,
    pub assumption1: Assumption1Options,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            s0: None,
            gaps: default_gaps(),
            lambdas: default_lambdas(),
            slice: SliceGridRule::default(),
            opnorm_tol: 0.1,
            mu: None,
            moment_range: MomentRange::Integrable,
            moment_extent: 8192.0,
            moment_points: 1 << 20,
            moment_tol: 0.05,
            gamma_exact: None,
            levels: default_levels(),
            pairs: 32,
            variation_tol: 0.25,
            hormander: HormanderOptions::default(),
            assumption1: Assumption1Options::default(),
        }
    }
}

impl KernelConfig {
    pub fn exact_gamma(&self, sym: &SymbolSpec) -> Result<Gamma> {
        match &self.gamma_exact {
            Some(s) => {
                let g: Gamma = s.parse()?;
                if (g.value() - sym.gamma()).abs() > 1e-12 * sym.gamma() {
                    return Err(Error::Config(format!(
                        "gamma_exact = {s} disagrees with the symbol order {}",
                        sym.gamma()
                    )));
                }
                Ok(g)
            }
            None => Gamma::from_f64(sym.gamma()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub count: usize,
    pub generator: Generator,
    pub band: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { count: 64, generator: Generator::GaussianField, band: 1.0 / 3.0 }
    }
}

impl EnsembleConfig {
    pub fn spec(&self, seed: u64) -> EnsembleSpec {
        EnsembleSpec { count: self.count, generator: self.generator, seed, band: self.band }
    }
}

/// Settings for `czkit estimate`; command-line flags override `p`, `q`,
/// `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub ensemble: EnsembleConfig,
    pub resolvent: ResolventOptions,
    pub weak11: Weak11Options,
    /// Forcing for the weak-type check; defaults to a unit-mass bump two
    /// lattice spacings wide, switched on over the first quarter window.
    pub forcing: Option<Forcing>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            p: 2.0,
            q: 2.0,
            lambda: 1.0,
            ensemble: EnsembleConfig::default(),
            resolvent: ResolventOptions::default(),
            weak11: Weak11Options::default(),
            forcing: None,
        }
    }
}

impl EstimateConfig {
    pub fn weak11_forcing(&self, grid: &SpaceTimeGrid) -> Forcing {
        self.forcing.clone().unwrap_or_else(|| {
            let (a, b) = grid.window();
            Forcing::single(
                Spatial::Bump {
                    center: vec![0.0; grid.space().dim()],
                    width: 2.0 * grid.space().spacing(),
                    normalized: true,
                },
                vec![Pulse { t0: a, t1: a + 0.25 * (b - a), value: Complex64::new(1.0, 0.0) }],
            )
        })
    }
}

/// Settings for `czkit verify-symbol`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Defaults to the midpoint of every coefficient piece.
    pub t_samples: Option<Vec<f64>>,
    /// Defaults to log-spaced radii times a fixed set of directions.
    pub xi_lattice: Option<Vec<Vec<f64>>>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub schema: Option<String>,
    pub symbol: SymbolConfig,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub estimate: EstimateConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

impl RunConfig {
    /// Parses and checks the schema version; field errors name the path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            // serde_json's message already ends with the line and column.
            Error::Config(format!("at `{path}`: {}", e.into_inner()))
        })?;
        if let Some(v) = &cfg.schema {
            if v != CONFIG_SCHEMA_VERSION {
                return Err(Error::Config(format!(
                    "schema version {v} is not supported (expected {CONFIG_SCHEMA_VERSION})"
                )));
            }
        }
        Ok(cfg)
    }

    pub fn grid(&self, sym: &SymbolSpec) -> Result<SpaceTimeGrid> {
        self.grid.as_ref().ok_or_else(|| Error::Config("this command needs a `grid` section".into()))?.build(sym)
    }

    /// The config as JSON, with defaults filled in.
    pub fn resolved(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v["schema"] = serde_json::Value::String(CONFIG_SCHEMA_VERSION.into());
        v
    }
}
