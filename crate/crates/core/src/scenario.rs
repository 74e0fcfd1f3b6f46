//! Scenario files: TOML (or the equivalent JSON tree) describing one
//! experiment. Unknown keys are rejected at every level.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::asymptotics::Branch;
use crate::density::{
    bump_amplitude, gaussian_shell_density, gaussian_source, polynomial_profile, BoundaryFlatAmplitude, ChartDensity,
    MassShellDensity, Monomial, ProfileTerm, SchwartzSource, SectorWeight,
};
use crate::error::{Error, Result};
use crate::field::SchemeOptions;
use crate::model::{CharacteristicRay, ProblemSignature, SpacetimePoint, TimelikeRay};
use crate::scalar::Cx;
use crate::verify::geometric_samples;

/// Branch and amplitude of a `[given]` section.
pub type GivenAmplitude = (Branch, Arc<dyn BoundaryFlatAmplitude<f64>>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub signature: SignatureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<GivenSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timelike: Vec<TimelikeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub characteristic: Vec<CharacteristicSpec>,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub checks: ChecksSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureSpec {
    pub d: usize,
    pub n: usize,
    pub m: f64,
}

/// Complex number as `[re, im]`.
pub type Complex2 = [f64; 2];

fn c(v: Complex2) -> Cx<f64> {
    Cx::new(v[0], v[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub coef: Complex2,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    /// `A(xi, sigma) = wgt(sigma) exp(-|xi - center|^2 / (2 width^2))`.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        sector: Vec<MonomialSpec>,
        #[serde(default)]
        hermitian: bool,
    },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Gaussian {
        center_x: Vec<f64>,
        center_t: Vec<f64>,
        width: f64,
        #[serde(default = "unit_amplitude")]
        amplitude: Complex2,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift_xi: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift_tau: Option<Vec<f64>>,
        #[serde(default)]
        real: bool,
    },
    Zero,
}

fn unit_amplitude() -> Complex2 {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileTermSpec {
    pub coef: Complex2,
    pub theta_powers: Vec<u32>,
    pub omega_powers: Vec<u32>,
}

/// Bump amplitude `profile(theta, omega) exp(-flatness / (1 - |theta|^2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GivenSpec {
    pub branch: Branch,
    pub flatness: f64,
    pub profile: Vec<ProfileTermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelikeSpec {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacteristicSpec {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    #[serde(default)]
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSpec {
    pub resolution_scale: f64,
    pub truncation_tol: f64,
    pub rho_window: f64,
    pub order: usize,
    pub phase_per_panel: f64,
    pub panels_per_extent: f64,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        let o = SchemeOptions::<f64>::default();
        Self {
            resolution_scale: o.resolution_scale,
            truncation_tol: o.truncation_tol,
            rho_window: o.rho_window,
            order: o.order,
            phase_per_panel: o.phase_per_panel,
            panels_per_extent: o.panels_per_extent,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Geometric,
    Linear,
}

/// Range of ray parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Range {
    pub const fn geometric(start: f64, end: f64, count: usize) -> Self {
        Self { start, end, count, spacing: Spacing::Geometric }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        match self.spacing {
            Spacing::Geometric => {
                geometric_samples(self.start, self.end, self.count).map_err(|e| Error::config(format!("range: {e}")))
            }
            Spacing::Linear => {
                if !(self.start.is_finite() && self.end.is_finite()) {
                    return Err(Error::config("range bounds must be finite"));
                }
                let k = self.count;
                Ok((0..k)
                    .map(|j| {
                        if k == 1 {
                            self.start
                        } else {
                            self.start + (self.end - self.start) * j as f64 / (k - 1) as f64
                        }
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSpec {
    /// Explicit points for `synthesize`.
    pub points: Vec<PointSpec>,
    /// Also sample the first timelike ray on this range in `synthesize`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ray_samples: Option<Range>,
    pub timelike_s: Range,
    pub characteristic_s: Range,
    /// Ray parameter where the leading term is compared with the field.
    pub leading_s: f64,
    pub residual_probes: Vec<PointSpec>,
    /// Difference step; defaults to `1e-8^{1/4}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_h: Option<f64>,
    /// Samples for the least-squares amplitude extraction.
    pub extract_s: Range,
    /// Number of `1/s` correction orders in the extraction.
    pub extract_corrections: usize,
    /// Random `(theta, omega)` probes for symmetry and round-trip checks.
    pub amplitude_probes: usize,
    /// `invert` dumps the density on `[-dump_extent, dump_extent]^d`.
    pub dump_extent: f64,
    pub dump_points: usize,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            ray_samples: None,
            timelike_s: Range::geometric(20.0, 80.0, 16),
            characteristic_s: Range::geometric(10.0, 60.0, 16),
            leading_s: 60.0,
            residual_probes: Vec::new(),
            residual_h: None,
            extract_s: Range::geometric(50.0, 70.0, 32),
            extract_corrections: 2,
            amplitude_probes: 100,
            dump_extent: 4.0,
            dump_points: 17,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksSpec {
    /// Residual tolerance relative to `max(m^2 max|u|, max|f|)`.
    pub residual_rtol: f64,
    /// Allowed slope window around `-(d+n+1)/2`: `[target - below, target + above]`.
    pub slope_below: f64,
    pub slope_above: f64,
    /// Relative tolerance on `|u|` against the leading term at `leading_s`.
    pub leading_rtol: f64,
    /// Characteristic fits must be at or below this slope.
    pub characteristic_max_slope: f64,
    /// When set, `|u|` along each timelike ray over `characteristic_s` must
    /// decay no faster than this, as a control for the characteristic fits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_min_slope: Option<f64>,
    /// Relative tolerance on the extracted amplitude modulus.
    pub extract_rtol: f64,
    /// Round-trip tolerance for `invert`, relative.
    pub roundtrip_rtol: f64,
}

impl Default for ChecksSpec {
    fn default() -> Self {
        Self {
            residual_rtol: 1e-3,
            slope_below: 0.4,
            slope_above: 0.3,
            leading_rtol: 0.05,
            characteristic_max_slope: -6.0,
            control_min_slope: None,
            extract_rtol: 0.05,
            roundtrip_rtol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: String,
    pub deterministic: bool,
    pub seed: u64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: "out".into(), deterministic: false, seed: 1 }
    }
}

impl Scenario {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let sc: Scenario = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let sig = self.signature()?;
        let (d, n) = (sig.d, sig.n);
        let dims = |what: &str, v: &[f64], k: usize| -> Result<()> {
            if v.len() != k {
                return Err(Error::config(format!("{what} has length {}, expected {k}", v.len())));
            }
            Ok(())
        };
        if let Some(DensitySpec::Gaussian { center, .. }) = &self.density {
            dims("density.center", center, d)?;
        }
        if let Some(SourceSpec::Gaussian { center_x, center_t, shift_xi, shift_tau, .. }) = &self.source {
            dims("source.center_x", center_x, d)?;
            dims("source.center_t", center_t, n)?;
            if shift_xi.is_some() != shift_tau.is_some() {
                return Err(Error::config("source.shift_xi and source.shift_tau go together"));
            }
            if let (Some(a), Some(b)) = (shift_xi, shift_tau) {
                dims("source.shift_xi", a, d)?;
                dims("source.shift_tau", b, n)?;
            }
        }
        for (i, r) in self.timelike.iter().enumerate() {
            dims(&format!("timelike[{i}].theta"), &r.theta, d)?;
            dims(&format!("timelike[{i}].omega"), &r.omega, n)?;
        }
        for (i, r) in self.characteristic.iter().enumerate() {
            dims(&format!("characteristic[{i}].theta"), &r.theta, d)?;
            dims(&format!("characteristic[{i}].omega"), &r.omega, n)?;
        }
        for (i, p) in self.sampling.points.iter().chain(&self.sampling.residual_probes).enumerate() {
            dims(&format!("point[{i}].x"), &p.x, d)?;
            dims(&format!("point[{i}].t"), &p.t, n)?;
        }
        Ok(())
    }

    pub fn signature(&self) -> Result<ProblemSignature<f64>> {
        ProblemSignature::new(self.signature.d, self.signature.n, self.signature.m)
            .map_err(|e| Error::config(e.to_string()))
    }

    /// A `zero` source family counts as data; it builds to no source at all.
    pub fn has_data(&self) -> bool {
        self.density.is_some() || self.source.is_some()
    }

    pub fn build_density(&self) -> Result<Option<Arc<dyn MassShellDensity<f64>>>> {
        let sig = self.signature()?;
        Ok(match &self.density {
            None => None,
            Some(DensitySpec::Zero) => {
                Some(Arc::new(ChartDensity::new(sig, Arc::new(|_: &[f64], _: &[f64]| Cx::new(0.0, 0.0)), "zero")))
            }
            Some(DensitySpec::Gaussian { center, width, sector, hermitian }) => {
                let terms = sector.iter().map(|t| Monomial { coef: c(t.coef), powers: t.powers.clone() }).collect();
                let w = SectorWeight::new(sig.n, terms).map_err(|e| Error::config(e.to_string()))?;
                let g =
                    gaussian_shell_density(sig, center.clone(), *width, w).map_err(|e| Error::config(e.to_string()))?;
                Some(Arc::new(if *hermitian { g.hermitian() } else { g }))
            }
        })
    }

    pub fn build_source(&self) -> Result<Option<Arc<dyn SchwartzSource<f64>>>> {
        Ok(match &self.source {
            None => None,
            Some(SourceSpec::Zero) => None,
            Some(SourceSpec::Gaussian { center_x, center_t, width, amplitude, shift_xi, shift_tau, real }) => {
                let shift = shift_xi.clone().zip(shift_tau.clone());
                let g = gaussian_source(center_x.clone(), center_t.clone(), *width, shift)
                    .map_err(|e| Error::config(e.to_string()))?
                    .with_amplitude(c(*amplitude));
                Some(Arc::new(if *real { g.with_real_part() } else { g }))
            }
        })
    }

    pub fn build_given(&self) -> Result<Option<GivenAmplitude>> {
        let Some(g) = &self.given else { return Ok(None) };
        let terms = g
            .profile
            .iter()
            .map(|t| ProfileTerm {
                coef: c(t.coef),
                theta_powers: t.theta_powers.clone(),
                omega_powers: t.omega_powers.clone(),
            })
            .collect();
        let u = bump_amplitude(polynomial_profile(terms), g.flatness, "given bump amplitude")
            .map_err(|e| Error::config(e.to_string()))?;
        Ok(Some((g.branch, Arc::new(u))))
    }

    pub fn timelike_rays(&self) -> Result<Vec<TimelikeRay<f64>>> {
        self.timelike
            .iter()
            .map(|r| TimelikeRay::new(r.theta.clone(), r.omega.clone()).map_err(|e| Error::config(e.to_string())))
            .collect()
    }

    pub fn characteristic_rays(&self) -> Result<Vec<CharacteristicRay<f64>>> {
        self.characteristic
            .iter()
            .map(|r| {
                CharacteristicRay::new(r.theta.clone(), r.omega.clone(), r.q).map_err(|e| Error::config(e.to_string()))
            })
            .collect()
    }

    pub fn scheme_options(&self, resolution_scale: Option<f64>) -> SchemeOptions<f64> {
        let s = &self.scheme;
        SchemeOptions {
            resolution_scale: s.resolution_scale * resolution_scale.unwrap_or(1.0),
            truncation_tol: s.truncation_tol,
            rho_window: s.rho_window,
            order: s.order,
            phase_per_panel: s.phase_per_panel,
            panels_per_extent: s.panels_per_extent,
            ..SchemeOptions::default()
        }
    }

    pub fn points(list: &[PointSpec]) -> Result<Vec<SpacetimePoint<f64>>> {
        list.iter().map(|p| SpacetimePoint::new(p.x.clone(), p.t.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "sample"

[signature]
d = 1
n = 1
m = 2.0

[density]
family = "gaussian"
center = [0.0]
width = 1.0
sector = [{ coef = [1.0, 0.0], powers = [0] }]

[source]
family = "gaussian"
center_x = [0.0]
center_t = [0.0]
width = 1.5

[[timelike]]
theta = [0.3]
omega = [1.0]

[sampling]
leading_s = 60.0
points = [{ x = [0.1], t = [0.2] }]
"#;

    #[test]
    fn toml_round_trip() {
        let sc = Scenario::parse(SAMPLE).unwrap();
        assert_eq!(sc.signature.m, 2.0);
        let again = Scenario::parse(&sc.to_toml().unwrap()).unwrap();
        assert_eq!(sc, again);
        let json = Scenario::parse(&sc.to_json().unwrap()).unwrap();
        assert_eq!(sc, json);
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = SAMPLE.replace("leading_s = 60.0", "leading_s = 60.0\nbogus_key = 1");
        let err = Scenario::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("bogus_key"), "{err}");
        let bad = SAMPLE.replace("width = 1.5", "width = 1.5\ncolour = 2");
        assert!(Scenario::parse(&bad).unwrap_err().to_string().contains("colour"));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let bad = SAMPLE.replace("theta = [0.3]", "theta = [0.3, 0.1]");
        assert!(matches!(Scenario::parse(&bad), Err(Error::Configuration(_))));
    }

    #[test]
    fn builds_families() {
        let sc = Scenario::parse(SAMPLE).unwrap();
        assert!(sc.build_density().unwrap().is_some());
        let f = sc.build_source().unwrap().unwrap();
        assert!((f.eval_spacetime(&[0.0], &[0.0]).re - 1.0).abs() < 1e-15);
        assert_eq!(sc.timelike_rays().unwrap().len(), 1);
        assert!(sc.build_given().unwrap().is_none());
    }
}
