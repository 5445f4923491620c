//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ncspectral::diophantine::{jarnik_construct, rational_to_f64, Profile};
use ncspectral::operator::OneForm;
use ncspectral::{Complex64, DeformationMatrix, Error, FourierElement, LatticePoint};
use serde::{Deserialize, Serialize};

/// Θ either as a preset string or as explicit rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    /// `golden`, `rational:p/q`, `jarnik:<profile>[@depth]` or `zero`.
    Preset(String),
    Matrix(Vec<Vec<f64>>),
}

impl FromStr for ThetaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.starts_with('[') {
            let rows: Vec<Vec<f64>> = serde_json::from_str(s)
                .map_err(|e| Error::Config(format!("bad Θ matrix {s:?}: {e}")))?;
            Ok(ThetaSpec::Matrix(rows))
        } else {
            Ok(ThetaSpec::Preset(s.to_string()))
        }
    }
}

/// Default continued-fraction depth of the `jarnik:` preset.
pub const JARNIK_DEPTH: usize = 8;

/// θ ∈ [0, 1) behind a scalar preset, as a fraction of 2π.
pub fn preset_fraction(name: &str) -> Result<f64, Error> {
    if name == "golden" {
        return Ok(ncspectral::weyl::golden_conjugate());
    }
    if name == "zero" {
        return Ok(0.0);
    }
    if let Some(pq) = name.strip_prefix("rational:") {
        let (p, q) = pq
            .split_once('/')
            .ok_or_else(|| Error::Config(format!("expected rational:p/q, got {name:?}")))?;
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad numerator in {name:?}")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad denominator in {name:?}")))?;
        if q == 0 {
            return Err(Error::Config(format!("zero denominator in {name:?}")));
        }
        return Ok(p as f64 / q as f64);
    }
    if let Some(rest) = name.strip_prefix("jarnik:") {
        let (profile, depth) = match rest.rsplit_once('@') {
            Some((p, d)) => (
                p,
                d.parse()
                    .map_err(|_| Error::Config(format!("bad depth in {name:?}")))?,
            ),
            None => (rest, JARNIK_DEPTH),
        };
        let profile: Profile = profile.parse()?;
        let j = jarnik_construct(&profile, depth)?;
        return Ok(rational_to_f64(&j.theta()));
    }
    Err(Error::Config(format!(
        "unknown Θ preset {name:?}; expected golden, zero, rational:p/q, jarnik:<profile>[@depth] or a matrix"
    )))
}

impl ThetaSpec {
    pub fn resolve(&self, n: usize) -> Result<DeformationMatrix, Error> {
        match self {
            ThetaSpec::Matrix(rows) => DeformationMatrix::new(n, rows),
            ThetaSpec::Preset(name) => {
                let frac = preset_fraction(name)?;
                Ok(DeformationMatrix::block_symplectic(
                    n,
                    2.0 * std::f64::consts::PI * frac,
                ))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ThetaSpec::Preset(s) => s.clone(),
            ThetaSpec::Matrix(rows) => serde_json::to_string(rows).unwrap_or_default(),
        }
    }
}

/// One Fourier mode c·U_k in component `axis` of a one-form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub axis: usize,
    pub k: Vec<i64>,
    /// (re, im)
    pub c: [f64; 2],
}

impl FromStr for ModeSpec {
    type Err = Error;

    /// `axis:k1,k2,…:re[,im]`
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("expected axis:k1,k2,...:re[,im], got {s:?}"));
        let mut parts = s.split(':');
        let axis = parts
            .next()
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        let k = parts
            .next()
            .ok_or_else(bad)?
            .split(',')
            .map(|x| x.trim().parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let cs: Vec<f64> = parts
            .next()
            .ok_or_else(bad)?
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        if parts.next().is_some() || cs.is_empty() || cs.len() > 2 {
            return Err(bad());
        }
        Ok(ModeSpec {
            axis,
            k,
            c: [cs[0], cs.get(1).copied().unwrap_or(0.0)],
        })
    }
}

/// The anti-selfadjoint part of Σ c·U_k ⊗ e_axis over the listed modes.
pub fn build_one_form(n: usize, modes: &[ModeSpec]) -> Result<OneForm, Error> {
    let mut comps = vec![FourierElement::zero(n); n];
    for m in modes {
        if m.axis >= n {
            return Err(Error::AxisOutOfRange { axis: m.axis, n });
        }
        if m.k.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.k.len(),
            });
        }
        let term =
            FourierElement::monomial(LatticePoint::new(&m.k), Complex64::new(m.c[0], m.c[1]));
        comps[m.axis] = comps[m.axis].add(&term)?;
    }
    Ok(OneForm::new(comps, n)?.anti_selfadjoint_part())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        ncspectral::action::log_grid(self.min, self.max, self.points)
    }
}

/// Every key is optional; missing ones fall back to per-command defaults and
/// the resolved values are written back into summary.json.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
    /// Θ family for correction sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<ThetaSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_form: Option<Vec<ModeSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<Vec<f64>>,
    /// Points s = (re, im) for zeta evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Approximation profile for Jarnik constructions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        if text.trim().is_empty() {
            return Err(Error::Config("config file is empty".into()));
        }
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &RunConfig) {
        overlay!(
            self,
            other,
            n,
            theta,
            thetas,
            one_form,
            profile,
            polynomial,
            twist,
            s,
            shift,
            lambda,
            t,
            qmax,
            delta,
            c,
            approximation,
            depth,
            order,
            method,
            tolerance,
            seed,
            output_dir,
            threads
        );
    }
}
