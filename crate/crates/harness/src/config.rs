//! Experiment configuration, one JSON document per run.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use lanfa_core::approx::{pade_exp_scaled, zolotarev_sqrt};
use lanfa_core::instances::SpectrumKind;
use lanfa_core::matfunc::ScalarFunction;
use lanfa_core::xlinalg::{Precision, Real};

pub const DEFAULT_PRECISION_BITS: u32 = 256;
pub const DEFAULT_SUP_GRID: usize = 10_000;
pub const DEFAULT_K_MAX_CAP: usize = 60;
pub const PRECISION_ENV: &str = "LANFA_PRECISION_BITS";

/// A decimal literal kept as text so it is parsed at working precision.
///
/// Accepts JSON numbers or strings; numbers go through their shortest
/// round-trip form, so `0.01` means exactly one hundredth.
#[derive(Clone, Debug, PartialEq)]
pub struct Decimal(pub String);

impl Decimal {
    pub fn real(&self, prec: &Precision) -> anyhow::Result<Real> {
        prec.parse(&self.0)
            .with_context(|| format!("invalid number {:?}", self.0))
    }
}

impl From<&str> for Decimal {
    fn from(s: &str) -> Self {
        Decimal(s.to_string())
    }
}

impl From<f64> for Decimal {
    fn from(v: f64) -> Self {
        Decimal(format!("{v}"))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Num(v) => Decimal::from(v),
            Raw::Text(s) => Decimal(s),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumSpec {
    Uniform { d: usize, lo: Decimal, hi: Decimal },
    Geometric { d: usize, lo: Decimal, hi: Decimal },
    ClusterOutlier {
        d: usize,
        outlier: Decimal,
        cluster_lo: Decimal,
        cluster_hi: Decimal,
    },
    IndefiniteSymmetric { d: usize, inner: Decimal, outer: Decimal },
    /// `width*` is the total width of each cluster.
    TwoClusters {
        d1: usize,
        c1: Decimal,
        width1: Decimal,
        d2: usize,
        c2: Decimal,
        width2: Decimal,
    },
    UnitOutlier { d: usize, kappa: Decimal },
}

impl SpectrumSpec {
    pub fn kind(&self, prec: &Precision) -> anyhow::Result<SpectrumKind> {
        let r = |x: &Decimal| x.real(prec);
        Ok(match self {
            SpectrumSpec::Uniform { d, lo, hi } => SpectrumKind::Uniform { d: *d, lo: r(lo)?, hi: r(hi)? },
            SpectrumSpec::Geometric { d, lo, hi } => SpectrumKind::Geometric { d: *d, lo: r(lo)?, hi: r(hi)? },
            SpectrumSpec::ClusterOutlier {
                d,
                outlier,
                cluster_lo,
                cluster_hi,
            } => SpectrumKind::ClusterOutlier {
                d: *d,
                outlier: r(outlier)?,
                cluster_lo: r(cluster_lo)?,
                cluster_hi: r(cluster_hi)?,
            },
            SpectrumSpec::IndefiniteSymmetric { d, inner, outer } => SpectrumKind::IndefiniteSymmetric {
                d: *d,
                inner: r(inner)?,
                outer: r(outer)?,
            },
            SpectrumSpec::TwoClusters {
                d1,
                c1,
                width1,
                d2,
                c2,
                width2,
            } => SpectrumKind::TwoClusters {
                d1: *d1,
                c1: r(c1)?,
                width1: r(width1)?,
                d2: *d2,
                c2: r(c2)?,
                width2: r(width2)?,
            },
            SpectrumSpec::UnitOutlier { d, kappa } => SpectrumKind::UnitOutlier { d: *d, kappa: r(kappa)? },
        })
    }

    /// Short name used for output directories.
    pub fn label(&self) -> String {
        match self {
            SpectrumSpec::Uniform { .. } => "uniform",
            SpectrumSpec::Geometric { .. } => "geometric",
            SpectrumSpec::ClusterOutlier { .. } => "cluster_outlier",
            SpectrumSpec::IndefiniteSymmetric { .. } => "indefinite_symmetric",
            SpectrumSpec::TwoClusters { .. } => "two_clusters",
            SpectrumSpec::UnitOutlier { .. } => "unit_outlier",
        }
        .to_string()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BSpec {
    #[default]
    Ones,
    /// Searched against the first function of the run.
    Adversarial { seed: u64, budget: usize },
    /// Coefficients in the eigenbasis of `A`.
    Explicit { w: Vec<Decimal> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Sample points for sup-norm estimates on the spectral interval.
    #[serde(default = "default_sup_grid")]
    pub sup: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { sup: DEFAULT_SUP_GRID }
    }
}

fn default_sup_grid() -> usize {
    DEFAULT_SUP_GRID
}

fn default_precision() -> u32 {
    DEFAULT_PRECISION_BITS
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    #[serde(default)]
    pub thm1: bool,
    #[serde(default)]
    pub uniform: bool,
    /// Rational candidates for the triangle bound, as function specs.
    #[serde(default)]
    pub triangle: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub b: BSpec,
    pub functions: Vec<String>,
    /// Defaults to `min(grade, 60)`.
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub bounds: BoundSpec,
    #[serde(default)]
    pub lanczos_or: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            anyhow::anyhow!("config error at line {}, column {}: {e}", e.line(), e.column())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.id.trim().is_empty() {
            bail!("field `id`: must be non-empty");
        }
        if self.functions.is_empty() {
            bail!("field `functions`: at least one function is required");
        }
        if self.k_max == Some(0) {
            bail!("field `k_max`: must be at least 1");
        }
        if self.precision_bits < 64 {
            bail!("field `precision_bits`: must be at least 64, got {}", self.precision_bits);
        }
        if let BSpec::Adversarial { budget: 0, .. } = self.b {
            bail!("field `b.budget`: must be at least 1");
        }
        let prec = self.precision()?;
        self.spectrum.kind(&prec).context("field `spectrum`")?;
        for (i, f) in self.functions.iter().chain(&self.bounds.triangle).enumerate() {
            FunctionSpec::parse(f).with_context(|| format!("function spec #{i} ({f:?})"))?;
        }
        Ok(())
    }

    /// Working precision, honouring the environment override.
    pub fn precision(&self) -> anyhow::Result<Precision> {
        let bits = precision_override()?.unwrap_or(self.precision_bits);
        Ok(Precision::new(bits)?)
    }
}

pub fn precision_override() -> anyhow::Result<Option<u32>> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => {
            let bits = v
                .trim()
                .parse()
                .with_context(|| format!("{PRECISION_ENV}={v:?} is not a bit count"))?;
            Ok(Some(bits))
        }
        Err(_) => Ok(None),
    }
}

/// A function as written in a config: a core spec or an approximant that
/// is built on the spectral interval of the instance.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Core(String),
    /// Diagonal Padé `[m/m]` of `exp(sign·t·x)` about 0.
    PadeExp { m: usize, t: Decimal, sign: i8 },
    /// Zolotarev type `(r, r)` relative approximation of `√x` on `[λmin, λmax]`.
    Zolotarev { r: usize },
}

impl FunctionSpec {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let kv = || {
            args.split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| {
                    x.split_once('=')
                        .map(|(k, v)| (k.trim(), v.trim()))
                        .with_context(|| format!("expected key=value in {s:?}"))
                })
                .collect::<anyhow::Result<Vec<_>>>()
        };
        match name.trim() {
            "pade_exp" => {
                let (mut m, mut t, mut sign) = (None, Decimal::from("1"), 1i8);
                for (k, v) in kv()? {
                    match k {
                        "m" => m = Some(v.parse().with_context(|| format!("m={v:?}"))?),
                        "t" => t = Decimal(v.to_string()),
                        "sign" => {
                            sign = match v {
                                "1" | "+1" => 1,
                                "-1" => -1,
                                _ => bail!("sign must be 1 or -1, got {v:?}"),
                            }
                        }
                        _ => bail!("unknown pade_exp key {k:?}"),
                    }
                }
                let m = m.context("pade_exp needs m")?;
                if m == 0 {
                    bail!("pade_exp needs m >= 1");
                }
                Ok(FunctionSpec::PadeExp { m, t, sign })
            }
            "zolotarev" => {
                let mut r = None;
                for (k, v) in kv()? {
                    match k {
                        "r" => r = Some(v.parse().with_context(|| format!("r={v:?}"))?),
                        _ => bail!("unknown zolotarev key {k:?}"),
                    }
                }
                let r = r.context("zolotarev needs r")?;
                if r == 0 {
                    bail!("zolotarev needs r >= 1");
                }
                Ok(FunctionSpec::Zolotarev { r })
            }
            _ => {
                ScalarFunction::parse(s, &Precision::default())?;
                Ok(FunctionSpec::Core(s.to_string()))
            }
        }
    }

    /// Concrete function for an instance with spectral interval `[lo, hi]`.
    pub fn resolve(&self, lo: &Real, hi: &Real, prec: &Precision) -> anyhow::Result<ScalarFunction> {
        Ok(match self {
            FunctionSpec::Core(s) => ScalarFunction::parse(s, prec)?,
            FunctionSpec::PadeExp { m, t, sign } => {
                ScalarFunction::Rational(pade_exp_scaled(*m, &t.real(prec)?, *sign, prec)?)
            }
            FunctionSpec::Zolotarev { r } => ScalarFunction::Rational(zolotarev_sqrt(lo, hi, *r, prec)?),
        })
    }

    /// Artifact choices implied by this spec, for run metadata.
    pub fn artifact_notes(&self) -> Vec<String> {
        match self {
            FunctionSpec::Core(_) => vec![],
            FunctionSpec::PadeExp { m, t, sign } => vec![format!(
                "Pade approximant taken diagonal [{m}/{m}] about 0 of exp({}{t}·x)",
                if *sign < 0 { "-" } else { "" }
            )],
            FunctionSpec::Zolotarev { r } => vec![format!(
                "Zolotarev approximant taken of type ({r},{r}) on [lambda_min, lambda_max]"
            )],
        }
    }

    /// File-system safe label.
    pub fn label(&self) -> String {
        let raw = match self {
            FunctionSpec::Core(s) => s.clone(),
            FunctionSpec::PadeExp { m, t, sign } => format!("pade_exp_m{m}_t{t}_s{sign}"),
            FunctionSpec::Zolotarev { r } => format!("zolotarev_r{r}"),
        };
        slug(&raw)
    }
}

pub fn slug(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' => out.push(c),
            '-' => out.push('m'),
            '.' => out.push('p'),
            _ => {
                if !out.ends_with('_') {
                    out.push('_');
                }
            }
        }
    }
    out.trim_matches('_').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"id": "x", "spectrum": {"kind": "uniform", "d": 10, "lo": 1, "hi": 100}, "functions": ["sqrt"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.precision_bits, 256);
        assert_eq!(cfg.grid.sup, 10_000);
        assert_eq!(cfg.b, BSpec::Ones);
        assert_eq!(cfg.k_max, None);
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = ExperimentConfig::from_json("{\n  \"id\": \"x\",\n  \"spectrum\": 3\n}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = ExperimentConfig::from_json(
            r#"{"id": "x", "spectrum": {"kind": "uniform", "d": 10, "lo": 1, "hi": 100}, "functions": ["cosh"]}"#,
        )
        .unwrap_err();
        assert!(format!("{e:#}").contains("cosh"), "{e:#}");
        let e = ExperimentConfig::from_json(
            r#"{"id": "x", "spectrum": {"kind": "uniform", "d": 10, "lo": 1, "hi": 100}, "functions": ["sqrt"], "k_max": 0}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("k_max"), "{e}");
    }

    #[test]
    fn decimals_keep_their_text() {
        let d: Decimal = serde_json::from_str("0.01").unwrap();
        assert_eq!(d.0, "0.01");
        let d: Decimal = serde_json::from_str("\"0.99995\"").unwrap();
        assert_eq!(d.0, "0.99995");
        let d: Decimal = serde_json::from_str("1e6").unwrap();
        assert_eq!(d.0, "1000000");
    }

    #[test]
    fn function_specs() {
        assert_eq!(
            FunctionSpec::parse("pade_exp:m=5,t=1,sign=-1").unwrap(),
            FunctionSpec::PadeExp {
                m: 5,
                t: Decimal::from("1"),
                sign: -1
            }
        );
        assert_eq!(FunctionSpec::parse("zolotarev:r=13").unwrap(), FunctionSpec::Zolotarev { r: 13 });
        assert!(FunctionSpec::parse("zolotarev:r=0").is_err());
        assert!(FunctionSpec::parse("inv_power:1").is_ok());
        assert_eq!(FunctionSpec::parse("inv_power:1").unwrap().label(), "inv_power_1");
        assert_eq!(FunctionSpec::parse("exp:t=1,sign=-1").unwrap().label(), "exp_t_1_sign_m1");
    }
}
