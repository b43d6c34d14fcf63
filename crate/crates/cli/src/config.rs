use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use critmoments::zerocount::CountTarget;
use critmoments::BoxDomain;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KerginSuite,
    Factorization,
    Exponent,
    SigmaProbe,
    Moments,
    Bezout,
    Crofton,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::KerginSuite => "kergin-suite",
            ExperimentKind::Factorization => "factorization",
            ExperimentKind::Exponent => "exponent",
            ExperimentKind::SigmaProbe => "sigma-probe",
            ExperimentKind::Moments => "moments",
            ExperimentKind::Bezout => "bezout",
            ExperimentKind::Crofton => "crofton",
        }
    }

    fn needs_model(self) -> bool {
        matches!(
            self,
            ExperimentKind::Factorization
                | ExperimentKind::Exponent
                | ExperimentKind::SigmaProbe
                | ExperimentKind::Moments
        )
    }

    fn needs_box(self) -> bool {
        self != ExperimentKind::KerginSuite
    }

    fn needs_p(self) -> bool {
        matches!(
            self,
            ExperimentKind::Factorization
                | ExperimentKind::SigmaProbe
                | ExperimentKind::Moments
                | ExperimentKind::Bezout
        )
    }

    fn needs_mc_samples(self) -> bool {
        matches!(
            self,
            ExperimentKind::Factorization | ExperimentKind::Exponent | ExperimentKind::SigmaProbe
        )
    }

    fn needs_n_samples(self) -> bool {
        matches!(
            self,
            ExperimentKind::KerginSuite
                | ExperimentKind::Factorization
                | ExperimentKind::Moments
                | ExperimentKind::Bezout
                | ExperimentKind::Crofton
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Scalar real Bargmann–Fock field.
    BargmannFock,
    /// `codim` independent Bargmann–Fock components.
    Product,
    /// Gradient of a scalar Bargmann–Fock field.
    Gradient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codim: Option<usize>,
    /// Series truncation tolerance for sample paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl ModelSpec {
    pub fn codim(&self) -> usize {
        match self.kind {
            ModelKind::BargmannFock => 1,
            ModelKind::Product => self.codim.unwrap_or(self.dim),
            ModelKind::Gradient => self.dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSpec {
    pub fn domain(&self) -> critmoments::Result<BoxDomain> {
        BoxDomain::new(self.lo.clone(), self.hi.clone())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Monte Carlo samples per Kac density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    /// Sample paths, configurations, systems, probes or cases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    /// Grid spacing for zero counting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid {
            min: 1e-3,
            max: 1.0,
            points: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    /// `{x_1 = c_1}` through the box centre.
    Hyperplane,
    /// Sphere about the box centre.
    Sphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Surface {
    pub kind: SurfaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<CountTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoxSpec>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<EpsGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<Surface>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A config problem, reported with the dotted path of the offending field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: `{}` {}", self.field, self.message)
    }
}

impl std::error::Error for ValidationError {}

fn invalid(field: &str, message: impl Into<String>) -> ValidationError {
    ValidationError {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ValidationError> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let field = e
                .span()
                .map(|s| text[s].trim().to_string())
                .unwrap_or_else(|| "<document>".into());
            invalid(&field, message)
        })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_toml(&text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Hex SHA-256 of the canonical TOML form, without the output block.
    pub fn hash(&self) -> String {
        let mut cfg = self.clone();
        cfg.output = OutputSpec::default();
        hex(&Sha256::digest(cfg.to_toml().as_bytes()))
    }

    pub fn eps_grid(&self) -> EpsGrid {
        self.eps.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("must be {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "must list at least one seed"));
        }
        let kind = self.kind;
        if kind.needs_model() && self.model.is_none() {
            return Err(invalid("model", format!("is required for {kind}")));
        }
        if kind.needs_box() && self.bbox.is_none() {
            return Err(invalid("box", format!("is required for {kind}")));
        }
        if kind.needs_p() && self.p.is_none() {
            return Err(invalid("p", format!("is required for {kind}")));
        }
        if kind.needs_mc_samples() && self.budgets.mc_samples.is_none() {
            return Err(invalid(
                "budgets.mc_samples",
                format!("is required for {kind}"),
            ));
        }
        if kind.needs_n_samples() && self.budgets.n_samples.is_none() {
            return Err(invalid(
                "budgets.n_samples",
                format!("is required for {kind}"),
            ));
        }
        if kind == ExperimentKind::Crofton && self.surface.is_none() {
            return Err(invalid("surface", "is required for crofton"));
        }
        if self.target.is_some() && kind != ExperimentKind::Moments {
            return Err(invalid("target", "only applies to moments"));
        }
        if self.surface.is_some() && kind != ExperimentKind::Crofton {
            return Err(invalid("surface", "only applies to crofton"));
        }
        if self.eps.is_some()
            && !matches!(kind, ExperimentKind::Exponent | ExperimentKind::SigmaProbe)
        {
            return Err(invalid("eps", "only applies to exponent and sigma-probe"));
        }
        if self.output.dir.is_none() {
            return Err(invalid("output.dir", "is required (or pass --out)"));
        }

        let positive = |v: Option<usize>, field: &str| match v {
            Some(0) => Err(invalid(field, "must be positive")),
            _ => Ok(()),
        };
        positive(self.p, "p")?;
        positive(self.budgets.mc_samples, "budgets.mc_samples")?;
        positive(self.budgets.n_samples, "budgets.n_samples")?;
        if let Some(r) = self.budgets.resolution {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("budgets.resolution", "must be positive"));
            }
        }
        if kind == ExperimentKind::Exponent && self.p.is_some_and(|p| p != 2) {
            return Err(invalid("p", "must be 2 for exponent"));
        }
        if matches!(kind, ExperimentKind::Moments | ExperimentKind::Crofton)
            && self.budgets.n_samples.is_some_and(|n| n < 2)
        {
            return Err(invalid("budgets.n_samples", "must be at least 2"));
        }

        let mut dim = None;
        if let Some(b) = &self.bbox {
            if b.lo.len() != b.hi.len() || b.lo.is_empty() {
                return Err(invalid("box", "needs lo and hi of equal, nonzero length"));
            }
            if b.domain().is_err() {
                return Err(invalid("box", "needs lo < hi on every axis"));
            }
            dim = Some(b.dim());
        }
        if let Some(m) = &self.model {
            if m.dim == 0 {
                return Err(invalid("model.dim", "must be positive"));
            }
            if dim.is_some_and(|d| d != m.dim) {
                return Err(invalid("model.dim", "must match the box dimension"));
            }
            if m.codim.is_some() && m.kind != ModelKind::Product {
                return Err(invalid("model.codim", "only applies to product models"));
            }
            if m.codim == Some(0) {
                return Err(invalid("model.codim", "must be positive"));
            }
            if m.tol.is_some_and(|t| !(t > 0.0)) {
                return Err(invalid("model.tol", "must be positive"));
            }
            match kind {
                ExperimentKind::Factorization | ExperimentKind::SigmaProbe
                    if m.codim() != m.dim =>
                {
                    return Err(invalid("model", "needs as many components as dimensions"));
                }
                ExperimentKind::Exponent if m.codim() != m.dim => {
                    return Err(invalid("model", "needs as many components as dimensions"));
                }
                ExperimentKind::Moments => {
                    if m.kind == ModelKind::Gradient {
                        return Err(invalid(
                            "model.kind",
                            "moments sample the scalar field; use bargmann-fock with target critical-points",
                        ));
                    }
                    let codim = match self.target() {
                        CountTarget::Zeros => m.dim,
                        CountTarget::CriticalPoints => 1,
                    };
                    if m.codim() != codim {
                        return Err(invalid(
                            "model",
                            format!("needs {codim} component(s) for this target"),
                        ));
                    }
                }
                _ => {}
            }
        }
        if let Some(eps) = &self.eps {
            if !(eps.min > 0.0 && eps.min < eps.max) {
                return Err(invalid("eps", "needs 0 < min < max"));
            }
            if eps.points < 2 {
                return Err(invalid("eps.points", "must be at least 2"));
            }
        }
        if let Some(s) = &self.surface {
            match (s.kind, s.radius) {
                (SurfaceKind::Sphere, None) => {
                    return Err(invalid("surface.radius", "is required for a sphere"))
                }
                (_, Some(r)) if !(r > 0.0) => {
                    return Err(invalid("surface.radius", "must be positive"))
                }
                (SurfaceKind::Hyperplane, Some(_)) => {
                    return Err(invalid("surface.radius", "does not apply to a hyperplane"))
                }
                _ => {}
            }
            if dim.is_some_and(|d| d < 2) {
                return Err(invalid("box", "crofton needs dimension at least 2"));
            }
        }
        if kind == ExperimentKind::Bezout && self.p.is_some_and(|p| p > 12) {
            return Err(invalid("p", "bezout degree is capped at 12"));
        }
        Ok(())
    }

    /// Count target for moments; critical points for scalar models.
    pub fn target(&self) -> CountTarget {
        self.target.unwrap_or(match &self.model {
            Some(m) if m.kind == ModelKind::BargmannFock => CountTarget::CriticalPoints,
            _ => CountTarget::Zeros,
        })
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
