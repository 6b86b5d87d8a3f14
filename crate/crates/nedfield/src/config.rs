//! Structured run configuration: TOML sections named after the paper's
//! symbols, unknown keys rejected, resolved values echoed verbatim into the
//! outputs of every run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{AlphaScale, DependenceKind, DependenceParams, GeometryParams, Theorem2Constants};
use crate::estimators::{Grid1, KernelFamily, KernelSpec};
use crate::fields::{CovariateDesign, InnovationKind, Link, Marginal, TruthFn, WeightDecay};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("missing required key `{key}` for this subcommand; schema: {schema}")]
    MissingKey {
        key: &'static str,
        schema: &'static str,
    },
    #[error("invalid value for `{key}`: {message}")]
    BadValue { key: &'static str, message: String },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// 0 = auto worker count, 1 = sequential.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locations: Option<LocationsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependence: Option<DependenceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LocationsSection {
    pub scheme: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<f64>,
    pub d0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_len: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    /// What to generate: "innovations", "ned", or "regression".
    pub what: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub innovation: Option<InnovationKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal: Option<Marginal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<WeightDecay>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<Link>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replication: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<CovariateDesign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<TruthFn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd: Option<TruthFn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<Marginal>,
}

/// Every symbol of the dependence side, named as in the formulas.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DependenceSection {
    pub kind: DependenceKind,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default = "euler")]
    pub nu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu2: Option<f64>,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default = "one", rename = "A")]
    pub a: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "one")]
    pub sigma_2_delta: f64,
    #[serde(default)]
    pub sigma_bar: f64,
    #[serde(default = "default_p")]
    pub s: f64,
    #[serde(default = "default_alpha")]
    pub alpha_scale: AlphaScale,
    #[serde(default)]
    pub constants: Theorem2Constants,
}

fn one() -> f64 {
    1.0
}
fn default_p() -> f64 {
    2.0
}
fn euler() -> f64 {
    std::f64::consts::E
}
fn default_alpha() -> AlphaScale {
    AlphaScale::Constant { c: 1.0 }
}

impl DependenceSection {
    /// Kind-aware validation: geometric kinds require `b` and `gamma`,
    /// the algebraic kind requires `nu1` and `nu2`.
    pub fn to_params(&self) -> Result<DependenceParams, ConfigError> {
        let require = |v: Option<f64>, key: &'static str, schema: &'static str| {
            v.ok_or(ConfigError::MissingKey { key, schema })
        };
        let (b, gamma, nu1, nu2) = match self.kind {
            DependenceKind::GeometricNed | DependenceKind::GeometricMixing => (
                require(self.b, "b", "[dependence] b = <decay rate > 0>")?,
                require(self.gamma, "gamma", "[dependence] gamma = <decay exponent > 0>")?,
                self.nu1.unwrap_or(1.0),
                self.nu2.unwrap_or(1.0),
            ),
            DependenceKind::AlgebraicNed => (
                self.b.unwrap_or(1.0),
                self.gamma.unwrap_or(1.0),
                require(self.nu1, "nu1", "[dependence] nu1 = <NED rate > 0>")?,
                require(self.nu2, "nu2", "[dependence] nu2 = <mixing rate > 0>")?,
            ),
        };
        Ok(DependenceParams {
            kind: self.kind,
            p: self.p,
            b,
            gamma,
            nu: self.nu,
            nu1,
            nu2,
            tau: self.tau,
            kappa: self.kappa,
            beta: self.beta,
            delta: self.delta,
            a_sup: self.a,
            sigma: self.sigma,
            sigma_2_delta: self.sigma_2_delta,
            sigma_bar: self.sigma_bar,
            s: self.s,
            alpha_scale: self.alpha_scale,
            constants: self.constants,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub d: usize,
    #[serde(default)]
    pub d1: usize,
    pub h0: f64,
    pub d0: f64,
}

impl GeometrySection {
    pub fn to_params(&self) -> Result<GeometryParams, ConfigError> {
        GeometryParams::new(self.d, self.d1, self.h0, self.d0).map_err(|e| ConfigError::BadValue {
            key: "geometry",
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthFn>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    /// Fully resolved config text, echoed next to every output.
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(0)
    }
}

/// Kernel lookup for the CLI `--kernel` flag and `[estimator] kernel` key.
pub fn kernel_by_name(name: &str) -> Result<KernelSpec, ConfigError> {
    let family = match name {
        "epanechnikov" => KernelFamily::Epanechnikov,
        "triangular" => KernelFamily::Triangular,
        "quartic" => KernelFamily::Quartic,
        other => {
            return Err(ConfigError::BadValue {
                key: "kernel",
                message: format!("unknown kernel `{other}` (epanechnikov|triangular|quartic)"),
            })
        }
    };
    KernelSpec::new(family).map_err(|e| ConfigError::BadValue {
        key: "kernel",
        message: e.to_string(),
    })
}

pub fn parse_grid(text: &str) -> Result<Grid1, ConfigError> {
    Grid1::parse(text).map_err(|e| ConfigError::BadValue {
        key: "grid",
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rejects_unknown_keys() {
        let text = r#"
seed = 7
[dependence]
kind = "geometric-mixing"
b = 0.5
gamma = 1.0
sigma = 0.57
[geometry]
d = 1
h0 = 2.0
d0 = 0.5
"#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.seed(), 7);
        let dep = cfg.dependence.unwrap().to_params().unwrap();
        assert_eq!(dep.b, 0.5);
        assert_eq!(dep.tau, 1.0);

        let bad = RunConfig::parse("[dependence]\nkind = \"geometric-ned\"\nnot_a_key = 1\n");
        assert!(bad.is_err());
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"
seed = 3
threads = 2
[locations]
scheme = "jittered-grid"
d = 1
n = 100
pitch = 1.0
jitter = 0.2
d0 = 0.5
h0 = 2.0
[experiment]
r = 500
t_grid = [0.05, 0.1]
"#;
        let cfg = RunConfig::parse(text).unwrap();
        let echoed = cfg.echo();
        let back = RunConfig::parse(&echoed).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(echoed, back.echo());
    }

    #[test]
    fn marginal_tables_parse() {
        let text = r#"
[field]
what = "ned"
marginal = { family = "uniform", a = 1.0 }
decay = { decay = "geometric", b = 1.0, gamma = 1.0, nu = 2.718281828459045 }
link = { link = "identity" }
"#;
        let cfg = RunConfig::parse(text).unwrap();
        let f = cfg.field.unwrap();
        assert_eq!(f.marginal, Some(Marginal::Uniform { a: 1.0 }));
        assert!(matches!(f.decay, Some(WeightDecay::Geometric { .. })));
    }

    #[test]
    fn kernel_lookup() {
        assert!(kernel_by_name("epanechnikov").is_ok());
        assert!(kernel_by_name("gauss").is_err());
    }
}
