//! Flat `section.key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::algebra::AlgebraKind;
use crate::data::HiggsData;
use crate::error::{Result, YmhError};
use crate::evolve::{EvolveConfig, Integrator};
use crate::grid::{Dealias, GridSpec};
use crate::system::{check_exponent, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    VerifyIdentities,
    ProbeEstimates,
    Converge,
    DataCheck,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Self::Simulate, Self::VerifyIdentities, Self::ProbeEstimates, Self::Converge, Self::DataCheck];

    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::VerifyIdentities => "verify-identities",
            Self::ProbeEstimates => "probe-estimates",
            Self::Converge => "converge",
            Self::DataCheck => "data-check",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command '{s}'"))
    }
}

/// Initial data family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataKind {
    /// random band-limited fields, Lorenz-finalized; Gauss not enforced
    Random,
    /// a₀ = 0, ȧ_i = 0, φ₀ = 0: both constraints hold exactly
    Constrained,
    /// the abelian plane wave (needs algebra.abelian = true)
    PlaneWave,
    Zero,
}

impl FromStr for DataKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" => Ok(Self::Random),
            "constrained" => Ok(Self::Constrained),
            "plane-wave" => Ok(Self::PlaneWave),
            "zero" => Ok(Self::Zero),
            _ => Err(format!("unknown data kind '{s}' (random, constrained, plane-wave, zero)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataConfig {
    pub kind: DataKind,
    pub amplitude: f64,
    pub band: usize,
    pub higgs: HiggsData,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeConfig {
    pub batch: usize,
    pub small_n: usize,
    pub large_n: usize,
    /// empty means the whole catalog
    pub estimates: Vec<String>,
    pub linear: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub grid: GridSpec,
    pub evolve: EvolveConfig,
    pub variant: Variant,
    pub algebra: AlgebraKind,
    pub abelian: bool,
    pub p: f64,
    pub eps: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub data: DataConfig,
    /// diagnostics every `stride` steps
    pub stride: usize,
    /// snapshots every `snapshot_stride` steps (0: first and last only)
    pub snapshot_stride: usize,
    pub verify_seeds: usize,
    pub probe: ProbeConfig,
    pub dts: Vec<f64>,
    /// fail `converge` when residual orders miss the integrator order by > 0.3
    pub check_order: bool,
    pub check_seeds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            grid: GridSpec::cube(32),
            evolve: EvolveConfig::default(),
            variant: Variant::Printed,
            algebra: AlgebraKind::su(2),
            abelian: false,
            p: 3.0,
            eps: 0.05,
            seed: 0,
            out: PathBuf::from("ymh-out"),
            data: DataConfig { kind: DataKind::Constrained, amplitude: 0.1, band: 2, higgs: HiggsData::Velocity },
            stride: 10,
            snapshot_stride: 0,
            verify_seeds: 10,
            probe: ProbeConfig { batch: 100, small_n: 8, large_n: 16, estimates: Vec::new(), linear: true },
            dts: vec![4e-3, 2e-3, 1e-3],
            check_order: false,
            check_seeds: 5,
        }
    }
}

const KEYS: [&str; 30] = [
    "command",
    "seed",
    "output.dir",
    "grid.N",
    "grid.L",
    "grid.dealias",
    "algebra.kind",
    "algebra.abelian",
    "model.p",
    "model.eps",
    "model.variant",
    "evolve.dt",
    "evolve.T",
    "evolve.integrator",
    "evolve.picard_depth",
    "data.kind",
    "data.amplitude",
    "data.band",
    "data.higgs",
    "simulate.stride",
    "simulate.snapshot_stride",
    "verify.seeds",
    "probe.batch",
    "probe.small_N",
    "probe.large_N",
    "probe.estimates",
    "probe.linear",
    "converge.dts",
    "converge.check_order",
    "check.seeds",
];

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse '{v}'"))
}

fn boolean(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn positive(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = num(v)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got '{v}'"))
    }
}

fn count(v: &str) -> std::result::Result<usize, String> {
    let x: usize = num(v)?;
    if x == 0 {
        Err("expected a positive integer".into())
    } else {
        Ok(x)
    }
}

impl RunConfig {
    /// Parses the text of a config file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<(&str, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| YmhError::Config { line, msg };
            let (key, value) =
                content.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let key = KEYS.iter().find(|k| **k == key).ok_or_else(|| err(format!("unknown key '{key}'")))?;
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
                return Err(err(format!("'{key}' already set on line {first}")));
            }
            seen.push((key, line));
            cfg.set(key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "command" => self.command = Some(v.parse()?),
            "seed" => self.seed = num(v)?,
            "output.dir" => self.out = PathBuf::from(v),
            "grid.N" => {
                self.grid = GridSpec::new(num(v)?, self.grid.l, self.grid.dealias).map_err(|e| e.to_string())?
            }
            "grid.L" => self.grid.l = positive(v)?,
            "grid.dealias" => {
                self.grid.dealias = match v {
                    "two-thirds" => Dealias::TwoThirds,
                    "none" => Dealias::None,
                    _ => return Err(format!("unknown dealias '{v}' (two-thirds, none)")),
                }
            }
            "algebra.kind" => self.algebra = AlgebraKind::parse(v).ok_or_else(|| format!("unknown algebra '{v}'"))?,
            "algebra.abelian" => self.abelian = boolean(v)?,
            "model.p" => {
                let p: f64 = num(v)?;
                check_exponent(p).map_err(|e| e.to_string())?;
                self.p = p;
            }
            "model.eps" => {
                let e = positive(v)?;
                if e >= 0.25 {
                    return Err(format!("eps = {e} is not small (need eps < 1/4)"));
                }
                self.eps = e;
            }
            "model.variant" => self.variant = Variant::parse(v).map_err(|e| e.to_string())?,
            "evolve.dt" => self.evolve.dt = positive(v)?,
            "evolve.T" => self.evolve.t_end = positive(v)?,
            "evolve.integrator" => {
                self.evolve.integrator = Integrator::parse(v).ok_or_else(|| format!("unknown integrator '{v}'"))?
            }
            "evolve.picard_depth" => self.evolve.picard_depth = count(v)?,
            "data.kind" => self.data.kind = v.parse()?,
            "data.amplitude" => {
                let a: f64 = num(v)?;
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(format!("amplitude must be ≥ 0, got '{v}'"));
                }
                self.data.amplitude = a;
            }
            "data.band" => self.data.band = count(v)?,
            "data.higgs" => {
                self.data.higgs = match v {
                    "none" => HiggsData::None,
                    "velocity" => HiggsData::Velocity,
                    _ => return Err(format!("unknown Higgs data '{v}' (none, velocity)")),
                }
            }
            "simulate.stride" => self.stride = count(v)?,
            "simulate.snapshot_stride" => self.snapshot_stride = num(v)?,
            "verify.seeds" => self.verify_seeds = count(v)?,
            "probe.batch" => self.probe.batch = count(v)?,
            "probe.small_N" => self.probe.small_n = count(v)?,
            "probe.large_N" => self.probe.large_n = count(v)?,
            "probe.estimates" => {
                self.probe.estimates = if v == "all" {
                    Vec::new()
                } else {
                    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                }
            }
            "probe.linear" => self.probe.linear = boolean(v)?,
            "converge.dts" => {
                self.dts = v.split(',').map(|s| positive(s.trim())).collect::<std::result::Result<_, _>>()?;
                if self.dts.len() < 2 {
                    return Err("need at least two time steps".into());
                }
            }
            "converge.check_order" => self.check_order = boolean(v)?,
            "check.seeds" => self.check_seeds = count(v)?,
            _ => unreachable!("key list and setter agree"),
        }
        Ok(())
    }

    /// Cross-field checks; line 0 marks errors not tied to one line.
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(YmhError::Config { line: 0, msg });
        self.evolve.validate().or_else(|e| err(e.to_string()))?;
        check_exponent(self.p).or_else(|e| err(e.to_string()))?;
        if self.data.kind == DataKind::PlaneWave && !self.abelian {
            return err("data.kind = plane-wave needs algebra.abelian = true".into());
        }
        if 2 * self.data.band > self.grid.band_limit() {
            return err(format!(
                "data.band = {} is not resolved by products on N = {} (need 2·band ≤ {})",
                self.data.band,
                self.grid.n,
                self.grid.band_limit()
            ));
        }
        for n in [self.probe.small_n, self.probe.large_n] {
            if n < 4 || !n.is_power_of_two() {
                return err(format!("probe resolution {n} must be a power of two ≥ 4"));
            }
        }
        if self.probe.large_n <= self.probe.small_n {
            return err("probe.large_N must exceed probe.small_N".into());
        }
        Ok(())
    }

    /// Every setting except the output directory, one `key = value` per line.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("command", self.command.map_or("-", Command::name).to_string());
        put("seed", self.seed.to_string());
        put("grid.N", self.grid.n.to_string());
        put("grid.L", format!("{:e}", self.grid.l));
        put("grid.dealias", format!("{:?}", self.grid.dealias));
        put("algebra.kind", self.algebra.to_string());
        put("algebra.abelian", self.abelian.to_string());
        put("model.p", format!("{:e}", self.p));
        put("model.eps", format!("{:e}", self.eps));
        put("model.variant", format!("{:?}", self.variant));
        put("evolve.dt", format!("{:e}", self.evolve.dt));
        put("evolve.T", format!("{:e}", self.evolve.t_end));
        put("evolve.integrator", format!("{:?}", self.evolve.integrator));
        put("evolve.picard_depth", self.evolve.picard_depth.to_string());
        put("data.kind", format!("{:?}", self.data.kind));
        put("data.amplitude", format!("{:e}", self.data.amplitude));
        put("data.band", self.data.band.to_string());
        put("data.higgs", format!("{:?}", self.data.higgs));
        put("simulate.stride", self.stride.to_string());
        put("simulate.snapshot_stride", self.snapshot_stride.to_string());
        put("verify.seeds", self.verify_seeds.to_string());
        put("probe.batch", self.probe.batch.to_string());
        put("probe.small_N", self.probe.small_n.to_string());
        put("probe.large_N", self.probe.large_n.to_string());
        put("probe.estimates", self.probe.estimates.join(","));
        put("probe.linear", self.probe.linear.to_string());
        put("converge.dts", self.dts.iter().map(|d| format!("{d:e}")).collect::<Vec<_>>().join(","));
        put("converge.check_order", self.check_order.to_string());
        put("check.seeds", self.check_seeds.to_string());
        s
    }

    /// SHA-256 of [`Self::canonical`], hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
