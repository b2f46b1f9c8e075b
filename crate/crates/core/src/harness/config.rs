//! Experiment configuration: TOML (or JSON) sections `[model]`, `[tilt]`,
//! `[run]`, `[hydro]`, `[event]`, `[diagnostics]` and `[tolerances]`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::TiltParams;
use crate::error::{Error, Result};
use crate::hydro::SpaceTimeGrid;
use crate::ldp::BasisSpec;
use crate::model::{parse_rational, DensityProfile, Diffusion, LocalRate};
use crate::testfn::{TestFunctionH, TimeFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Lln,
    PerturbedLln,
    Entropy,
    ImportanceSampling,
    Diagnostics,
}

impl ExperimentKind {
    pub fn tag(self) -> u64 {
        match self {
            ExperimentKind::Lln => 1,
            ExperimentKind::Entropy => 2,
            ExperimentKind::ImportanceSampling => 3,
            ExperimentKind::Diagnostics => 4,
            ExperimentKind::PerturbedLln => 5,
        }
    }
}

/// A periodic density profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    Cosine {
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        k: u32,
        #[serde(default = "default_profile_points")]
        points: usize,
    },
    Knots {
        knots: Vec<(f64, f64)>,
    },
    /// Text file with one `x value` pair per line; `#` starts a comment.
    File {
        path: PathBuf,
    },
}

fn one() -> u32 {
    1
}

fn default_profile_points() -> usize {
    256
}

impl ProfileSpec {
    pub fn build(&self) -> Result<DensityProfile> {
        match self {
            ProfileSpec::Constant { value } => DensityProfile::constant(*value),
            ProfileSpec::Cosine {
                mean,
                amplitude,
                k,
                points,
            } => DensityProfile::cosine(*mean, *amplitude, *k, *points),
            ProfileSpec::Knots { knots } => DensityProfile::from_knots(knots.clone()),
            ProfileSpec::File { path } => {
                let text = std::fs::read_to_string(path)?;
                DensityProfile::from_knots(parse_knots(&text)?)
            }
        }
    }
}

fn parse_knots(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut knots = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
        let mut next = || -> Result<f64> {
            cols.next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("profile line {}: expected `x value`", lineno + 1)))
        };
        knots.push((next()?, next()?));
    }
    Ok(knots)
}

/// Walker jump rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RatesSpec {
    /// `c+ = (1 + eta(0))/3`, `c- = (2 - eta(0))/3`.
    Intro,
    Archetype { alpha: String, beta: String },
    Constant { plus: String, minus: String },
    Zero,
    /// Inline rate table (`support:` line then `bits c+ c-` lines).
    Table { table: String },
    File { path: PathBuf },
}

impl RatesSpec {
    pub fn build(&self) -> Result<LocalRate> {
        let rat = |s: &str| parse_rational(s).ok_or_else(|| Error::Config(format!("not a rational: {s:?}")));
        match self {
            RatesSpec::Intro => Ok(LocalRate::intro()),
            RatesSpec::Archetype { alpha, beta } => LocalRate::archetype(rat(alpha)?, rat(beta)?),
            RatesSpec::Constant { plus, minus } => LocalRate::constant(rat(plus)?, rat(minus)?),
            RatesSpec::Zero => Ok(LocalRate::zero()),
            RatesSpec::Table { table } => LocalRate::from_str(table),
            RatesSpec::File { path } => LocalRate::from_str(&std::fs::read_to_string(path)?),
        }
    }
}

/// Space-time test function `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HSpec {
    #[default]
    Zero,
    Cosine {
        #[serde(default = "one_usize")]
        k: usize,
        amplitude: f64,
    },
    Sine {
        #[serde(default = "one_usize")]
        k: usize,
        amplitude: f64,
    },
    /// Raw coefficients in the Fourier x Chebyshev basis.
    Basis {
        k_max: usize,
        degree: usize,
        coeffs: Vec<f64>,
    },
}

fn one_usize() -> usize {
    1
}

impl HSpec {
    pub fn build(&self, t_max: f64) -> Result<TestFunctionH> {
        match self {
            HSpec::Zero => Ok(TestFunctionH::zero(t_max)),
            HSpec::Cosine { k, amplitude } => Ok(TestFunctionH::cosine(*k, *amplitude, t_max)),
            HSpec::Sine { k, amplitude } => Ok(TestFunctionH::sine(*k, *amplitude, t_max)),
            HSpec::Basis { k_max, degree, coeffs } => TestFunctionH::new(*k_max, *degree, t_max, coeffs.clone()),
        }
    }
}

/// Walker tilt `a(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ASpec {
    #[default]
    Zero,
    Constant { value: f64 },
    Samples { times: Vec<f64>, values: Vec<f64> },
}

impl ASpec {
    pub fn build(&self) -> Result<TimeFunction> {
        match self {
            ASpec::Zero => Ok(TimeFunction::zero()),
            ASpec::Constant { value } => Ok(TimeFunction::constant(*value)),
            ASpec::Samples { times, values } => TimeFunction::samples(times.clone(), values.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Lattice sizes, strictly increasing.
    pub n: Vec<usize>,
    pub t_max: f64,
    pub rates: RatesSpec,
    pub u0: ProfileSpec,
    #[serde(default = "one_u8")]
    pub diffusion: u8,
}

fn one_u8() -> u8 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TiltSection {
    /// Defaults to `u0`.
    #[serde(default)]
    pub v0: Option<ProfileSpec>,
    #[serde(default)]
    pub h: HSpec,
    #[serde(default)]
    pub a: ASpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    /// Number of recording intervals on `[0, T]`.
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_frames() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroSection {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Time frames used when rate functionals are evaluated on a hydrodynamic
    /// solution (at least `run.frames`).
    #[serde(default = "default_rate_frames")]
    pub rate_frames: usize,
    #[serde(default = "default_basis_k")]
    pub basis_k: usize,
    #[serde(default = "default_basis_degree")]
    pub basis_degree: usize,
}

fn default_m() -> usize {
    256
}

fn default_rate_frames() -> usize {
    200
}

fn default_basis_k() -> usize {
    BasisSpec::default().k_max
}

fn default_basis_degree() -> usize {
    BasisSpec::default().degree
}

impl Default for HydroSection {
    fn default() -> Self {
        HydroSection {
            m: default_m(),
            dt: None,
            rate_frames: default_rate_frames(),
            basis_k: default_basis_k(),
            basis_degree: default_basis_degree(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EventCenter {
    /// The hydrodynamic limit of the tilted dynamics.
    #[default]
    Tilt,
    /// The law-of-large-numbers path of the original dynamics.
    Null,
}

/// Tube around a target path; membership is checked on the recording grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSection {
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub density_radius: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub walker_radius: f64,
    #[serde(default)]
    pub center: EventCenter,
    /// Plain Monte Carlo is run for `n` up to this size.
    #[serde(default = "default_naive_max_n")]
    pub naive_max_n: usize,
    /// Replicas for plain Monte Carlo; defaults to `run.replicas`.
    #[serde(default)]
    pub naive_replicas: Option<usize>,
    /// Plain estimates below this probability count as rare.
    #[serde(default = "default_rare")]
    pub rare_below: f64,
}

fn default_naive_max_n() -> usize {
    32
}

fn default_rare() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_ells")]
    pub ells: Vec<usize>,
    /// Block size used to smooth empirical paths before the energy norm.
    #[serde(default = "default_energy_eps")]
    pub energy_eps: f64,
    /// Replicas for the replacement and energy curves; defaults to `run.replicas`.
    #[serde(default)]
    pub replicas: Option<usize>,
}

fn default_eps() -> Vec<f64> {
    vec![0.25, 0.125, 0.0625]
}

fn default_ells() -> Vec<usize> {
    (2..=12).collect()
}

fn default_energy_eps() -> f64 {
    0.05
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            eps: default_eps(),
            ells: default_ells(),
            energy_eps: default_energy_eps(),
            replicas: None,
        }
    }
}

/// Pass/fail thresholds; every report echoes them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Standard errors allowed in statistical comparisons.
    #[serde(default = "default_z")]
    pub z: f64,
    #[serde(default)]
    pub atol: f64,
    /// Largest allowed mean L1 error at the largest `n`.
    #[serde(default = "default_lln_l1")]
    pub lln_l1_max: f64,
    /// Largest allowed relative-entropy gap at the largest `n`.
    #[serde(default = "default_entropy_gap")]
    pub entropy_gap_max: f64,
    /// Allowed distance between `-(1/n) log P` and the rate value at the largest `n`.
    #[serde(default = "default_is_rate")]
    pub is_rate_tol: f64,
    /// Allowed relative growth of the smoothed energy norm along `n`.
    #[serde(default = "default_energy_growth")]
    pub energy_growth: f64,
}

fn default_z() -> f64 {
    4.0
}

fn default_lln_l1() -> f64 {
    0.05
}

fn default_entropy_gap() -> f64 {
    0.05
}

fn default_is_rate() -> f64 {
    0.15
}

fn default_energy_growth() -> f64 {
    0.25
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            z: default_z(),
            atol: 0.0,
            lln_l1_max: default_lln_l1(),
            entropy_gap_max: default_entropy_gap(),
            is_rate_tol: default_is_rate(),
            energy_growth: default_energy_growth(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelSection,
    #[serde(default)]
    pub tilt: Option<TiltSection>,
    pub run: RunSection,
    #[serde(default)]
    pub hydro: HydroSection,
    #[serde(default)]
    pub event: Option<EventSection>,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a `.json` or TOML file. Relative file references resolve
    /// against the directory of the config.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let ProfileSpec::File { path } = &mut self.model.u0 {
            fix(path);
        }
        if let RatesSpec::File { path } = &mut self.model.rates {
            fix(path);
        }
        if let Some(TiltSection {
            v0: Some(ProfileSpec::File { path }),
            ..
        }) = &mut self.tilt
        {
            fix(path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.n.is_empty() {
            return Err(Error::Config("model.n is empty".into()));
        }
        if m.n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("model.n must be sorted ascending without repeats".into()));
        }
        if m.n[0] < 2 {
            return Err(Error::Config("lattice sizes must be at least 2".into()));
        }
        if !(m.t_max > 0.0 && m.t_max.is_finite()) {
            return Err(Error::Config(format!("model.t_max must be positive, got {}", m.t_max)));
        }
        Diffusion::new(m.diffusion)?;
        if self.run.replicas == 0 {
            return Err(Error::Config("run.replicas must be at least 1".into()));
        }
        if self.run.frames == 0 {
            return Err(Error::Config("run.frames must be at least 1".into()));
        }
        if self.run.threads == Some(0) {
            return Err(Error::Config("run.threads must be at least 1".into()));
        }
        let mut files = Vec::new();
        if let ProfileSpec::File { path } = &m.u0 {
            files.push(path);
        }
        if let RatesSpec::File { path } = &m.rates {
            files.push(path);
        }
        if let Some(TiltSection {
            v0: Some(ProfileSpec::File { path }),
            ..
        }) = &self.tilt
        {
            files.push(path);
        }
        if let Some(missing) = files.into_iter().find(|p| !p.exists()) {
            return Err(Error::Config(format!("file not found: {}", missing.display())));
        }
        if let Some(ev) = &self.event {
            if ev.density_radius.is_nan() || ev.walker_radius.is_nan() || ev.density_radius < 0.0 || ev.walker_radius < 0.0 {
                return Err(Error::Config("event radii must be non-negative".into()));
            }
        }
        Ok(())
    }

    pub fn diffusion(&self) -> Diffusion {
        Diffusion::new(self.model.diffusion).expect("validated")
    }

    pub fn u0(&self) -> Result<DensityProfile> {
        self.model.u0.build()
    }

    pub fn rates(&self) -> Result<LocalRate> {
        self.model.rates.build()
    }

    /// The tilt triple, or `None` when no `[tilt]` section is present.
    pub fn tilt_params(&self) -> Result<Option<TiltParams>> {
        let Some(t) = &self.tilt else { return Ok(None) };
        let u0 = self.u0()?;
        let v0 = match &t.v0 {
            Some(p) => p.build()?,
            None => u0,
        };
        Ok(Some(TiltParams::new(v0, t.h.build(self.model.t_max)?, t.a.build()?)))
    }

    /// Tilt triple with the null tilt filled in.
    pub fn tilt_or_null(&self) -> Result<TiltParams> {
        match self.tilt_params()? {
            Some(p) => Ok(p),
            None => Ok(TiltParams::null(&self.u0()?, self.model.t_max)),
        }
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid> {
        let g = SpaceTimeGrid::new(self.hydro.m, self.model.t_max, self.run.frames)?;
        Ok(match self.hydro.dt {
            Some(dt) => g.with_dt(dt),
            None => g,
        })
    }

    /// Grid for rate functionals: the recording grid refined in time.
    pub fn rate_grid(&self) -> Result<SpaceTimeGrid> {
        let frames = self.run.frames.max(self.hydro.rate_frames);
        let g = SpaceTimeGrid::new(self.hydro.m, self.model.t_max, frames)?;
        Ok(match self.hydro.dt {
            Some(dt) => g.with_dt(dt),
            None => g,
        })
    }

    pub fn basis(&self) -> BasisSpec {
        BasisSpec {
            k_max: self.hydro.basis_k,
            degree: self.hydro.basis_degree,
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
