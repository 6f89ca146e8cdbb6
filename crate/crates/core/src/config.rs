//! Run configuration: flat `key = value` text with `#` comments.
//!
//! The manifest written next to a run's outputs uses the same format, so it can be fed
//! back as a config to reproduce the run.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mild::{Exponents, ProblemSpec};
use crate::models::{make_heat_model, make_ns_model, HeatParams, NsParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Heat,
    Ns2d,
    Ns3d,
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "heat" => Ok(Self::Heat),
            "ns2d" => Ok(Self::Ns2d),
            "ns3d" => Ok(Self::Ns3d),
            _ => Err(format!("unknown model `{s}` (expected heat, ns2d or ns3d)")),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Heat => "heat",
            Self::Ns2d => "ns2d",
            Self::Ns3d => "ns3d",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    /// Number of sine modes of the heat model.
    pub modes: usize,
    /// Largest wave-number component of the Navier–Stokes models.
    pub k_max: usize,
    pub hurst: f64,
    pub alpha: f64,
    pub delta: f64,
    pub tau: f64,
    pub noise_amp: f64,
    pub noise_dim: usize,
    pub reaction: f64,
    pub u0_amp: f64,
    pub seed: u64,
    /// Total simulated time `T_max`, split evenly over `segments`.
    pub horizon: f64,
    /// Grid cells over `[0, T_max]`.
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub segments: usize,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub disable_q: bool,
    pub broken_f: bool,
    /// Compare the trajectory with `P_t u₀` (requires `noise_amp = 0` and `disable_q`).
    pub self_test: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Heat,
            modes: 16,
            k_max: 4,
            hurst: 0.75,
            alpha: 0.6,
            delta: 0.5,
            tau: 0.25,
            noise_amp: 1.0,
            noise_dim: 2,
            reaction: 1.0,
            u0_amp: 1.0,
            seed: 1,
            horizon: 1.0,
            n: 1024,
            tol: 1e-8,
            max_iter: 100,
            segments: 1,
            out: None,
            formats: vec![Format::Csv, Format::Json],
            disable_q: false,
            broken_f: false,
            self_test: false,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| Error::Parse {
        line,
        message: format!("bad value `{value}` for `{key}`: {e}"),
    })
}

impl RunConfig {
    /// Parses config text on top of the defaults, then validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `key = value`, got `{body}`"),
                });
            };
            c.set(line, key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = parse_value(line, key, value)?,
            "modes" => self.modes = parse_value(line, key, value)?,
            "k_max" => self.k_max = parse_value(line, key, value)?,
            "hurst" => self.hurst = parse_value(line, key, value)?,
            "alpha" => self.alpha = parse_value(line, key, value)?,
            "delta" => self.delta = parse_value(line, key, value)?,
            "tau" => self.tau = parse_value(line, key, value)?,
            "noise_amp" => self.noise_amp = parse_value(line, key, value)?,
            "noise_dim" => self.noise_dim = parse_value(line, key, value)?,
            "reaction" => self.reaction = parse_value(line, key, value)?,
            "u0_amp" => self.u0_amp = parse_value(line, key, value)?,
            "seed" => self.seed = parse_value(line, key, value)?,
            "horizon" => self.horizon = parse_value(line, key, value)?,
            "n" => self.n = parse_value(line, key, value)?,
            "tol" => self.tol = parse_value(line, key, value)?,
            "max_iter" => self.max_iter = parse_value(line, key, value)?,
            "segments" => self.segments = parse_value(line, key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "formats" => {
                self.formats = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_value(line, key, s))
                    .collect::<Result<_>>()?
            }
            "disable_q" => self.disable_q = parse_value(line, key, value)?,
            "broken_f" => self.broken_f = parse_value(line, key, value)?,
            "self_test" => self.self_test = parse_value(line, key, value)?,
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key `{key}`"),
                })
            }
        }
        Ok(())
    }

    /// Parameter constraints shared by every command.
    pub fn validate(&self) -> Result<()> {
        Exponents::new(self.tau, self.delta, self.alpha)?;
        let lo = (0.5f64).max(1.0 - self.delta);
        if !(self.alpha > lo && self.alpha < 1.0 - self.tau) {
            return Err(Error::config(format!(
                "alpha = {} must lie in ({lo}, {}) for delta = {}, tau = {}",
                self.alpha,
                1.0 - self.tau,
                self.delta,
                self.tau
            )));
        }
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::config(format!("hurst = {} must lie in (0, 1)", self.hurst)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config(format!("horizon = {} must be positive", self.horizon)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::config(format!("tol = {} must be positive", self.tol)));
        }
        for (name, v) in [("modes", self.modes), ("k_max", self.k_max), ("noise_dim", self.noise_dim), ("n", self.n), ("max_iter", self.max_iter), ("segments", self.segments)] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be at least 1")));
            }
        }
        if !self.n.is_multiple_of(self.segments) {
            return Err(Error::config(format!(
                "n = {} is not divisible by segments = {}",
                self.n, self.segments
            )));
        }
        if !(self.noise_amp.is_finite() && self.reaction.is_finite() && self.u0_amp.is_finite()) {
            return Err(Error::config("amplitudes must be finite"));
        }
        if self.formats.is_empty() {
            return Err(Error::config("formats must name at least one of csv, json"));
        }
        Ok(())
    }

    /// Extra constraints of `simulate`: the driving path must be rough enough to be
    /// integrated in the Young sense and regular enough to carry α-Hölder norms.
    pub fn validate_for_simulate(&self) -> Result<()> {
        self.validate()?;
        if !(self.hurst > 0.5) {
            return Err(Error::config(format!("simulate needs hurst > 1/2, got {}", self.hurst)));
        }
        if !(self.alpha < self.hurst) {
            return Err(Error::config(format!(
                "alpha = {} must be below hurst = {} for the driving path to be alpha-Hölder",
                self.alpha, self.hurst
            )));
        }
        if self.self_test && (self.noise_amp != 0.0 || !self.disable_q) {
            return Err(Error::config("self_test requires noise_amp = 0 and disable_q = true"));
        }
        Ok(())
    }

    pub fn heat_params(&self) -> HeatParams {
        HeatParams {
            modes: self.modes,
            delta: self.delta,
            tau: self.tau,
            alpha: self.alpha,
            noise_dim: self.noise_dim,
            noise_amp: self.noise_amp,
            reaction: self.reaction,
            hurst: self.hurst,
            n_cells: self.n,
            horizon: self.horizon,
            u0_amp: self.u0_amp,
            seed: self.seed,
            disable_q: self.disable_q,
            broken_f: self.broken_f,
        }
    }

    pub fn ns_params(&self) -> NsParams {
        NsParams {
            dim: if self.model == ModelKind::Ns3d { 3 } else { 2 },
            k_max: self.k_max,
            delta: self.delta,
            tau: self.tau,
            alpha: self.alpha,
            noise_dim: self.noise_dim,
            noise_amp: self.noise_amp,
            hurst: self.hurst,
            n_cells: self.n,
            horizon: self.horizon,
            u0_amp: self.u0_amp,
            seed: self.seed,
            disable_q: self.disable_q,
        }
    }

    /// The model problem over `[0, T_max]`.
    pub fn build_spec(&self) -> Result<ProblemSpec> {
        match self.model {
            ModelKind::Heat => make_heat_model(&self.heat_params()),
            ModelKind::Ns2d | ModelKind::Ns3d => {
                if self.broken_f {
                    return Err(Error::config("broken_f is only available for the heat model"));
                }
                make_ns_model(&self.ns_params())
            }
        }
    }

    /// Every resolved key except `out`, in a fixed order. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_manifest(&self) -> String {
        let formats = self.formats.iter().map(Format::to_string).collect::<Vec<_>>().join(",");
        let mut s = String::from("# rough-mild run manifest\n");
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("model", self.model.to_string());
        kv("modes", self.modes.to_string());
        kv("k_max", self.k_max.to_string());
        kv("hurst", format!("{:?}", self.hurst));
        kv("alpha", format!("{:?}", self.alpha));
        kv("delta", format!("{:?}", self.delta));
        kv("tau", format!("{:?}", self.tau));
        kv("noise_amp", format!("{:?}", self.noise_amp));
        kv("noise_dim", self.noise_dim.to_string());
        kv("reaction", format!("{:?}", self.reaction));
        kv("u0_amp", format!("{:?}", self.u0_amp));
        kv("seed", self.seed.to_string());
        kv("horizon", format!("{:?}", self.horizon));
        kv("n", self.n.to_string());
        kv("tol", format!("{:?}", self.tol));
        kv("max_iter", self.max_iter.to_string());
        kv("segments", self.segments.to_string());
        kv("formats", formats);
        kv("disable_q", self.disable_q.to_string());
        kv("broken_f", self.broken_f.to_string());
        kv("self_test", self.self_test.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate_for_simulate().unwrap();
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_keys_and_comments() {
        let c = RunConfig::parse("# a run\nmodel = ns3d  # inline\nk_max=3\n\nformats = json\ntol = 1e-6\n").unwrap();
        assert_eq!(c.model, ModelKind::Ns3d);
        assert_eq!(c.k_max, 3);
        assert_eq!(c.formats, vec![Format::Json]);
        assert_eq!(c.tol, 1e-6);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match RunConfig::parse("seed = 1\nbogus = 2\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("\n\nhurst = abc\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(RunConfig::parse("just words"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn rejects_condition_violations() {
        assert!(matches!(RunConfig::parse("alpha = 0.4"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("tau = 0.5\nalpha = 0.6"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("n = 10\nsegments = 3"), Err(Error::Config(_))));
        let c = RunConfig::parse("hurst = 0.5").unwrap();
        assert!(c.validate_for_simulate().is_err());
        let c = RunConfig::parse("self_test = true").unwrap();
        assert!(c.validate_for_simulate().is_err());
    }

    #[test]
    fn manifest_round_trips() {
        let c = RunConfig {
            model: ModelKind::Ns2d,
            hurst: 0.7300000000000001,
            tol: 3.3e-9,
            seed: u64::MAX,
            formats: vec![Format::Json, Format::Csv],
            ..RunConfig::default()
        };
        let back = RunConfig::parse(&c.to_manifest()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_manifest(), c.to_manifest());
    }
}
