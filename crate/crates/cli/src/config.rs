//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thinfb::analysis::ClassifyConfig;
use thinfb::profiles::{ProfileKind, ProfileSpec};
use thinfb::{GridSpec, SolverConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub boundary_data: BoundaryData,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either a sum of closed-form profiles or a field file whose values are used
/// as Dirichlet data. No profiles means `Φ ≡ 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryData {
    #[serde(default)]
    pub profiles: Vec<ProfileEntry>,
    #[serde(default)]
    pub field_file: Option<PathBuf>,
}

/// Amplitude multiplier: a number, or `"a_star"` for the calibrated slope constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scale {
    Value(f64),
    Named(NamedScale),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedScale {
    AStar,
}

impl Default for Scale {
    fn default() -> Self {
        Scale::Value(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub kind: ProfileKind,
    pub alpha: f64,
    pub nu: Vec<f64>,
    #[serde(default)]
    pub shift: f64,
    pub xi: Vec<f64>,
    #[serde(default)]
    pub scale: Scale,
}

impl ProfileEntry {
    pub fn uses_a_star(&self) -> bool {
        matches!(self.scale, Scale::Named(NamedScale::AStar))
    }

    /// The profile with its amplitude multiplied out.
    pub fn resolve(&self, a_star: Option<f64>) -> Result<ProfileSpec, CliError> {
        let factor = match self.scale {
            Scale::Value(v) => v,
            Scale::Named(NamedScale::AStar) => a_star.ok_or_else(|| CliError::Config("profile scale \"a_star\" needs a calibrated A*".into()))?,
        };
        Ok(ProfileSpec { kind: self.kind, alpha: self.alpha * factor, nu: self.nu.clone(), shift: self.shift, xi: self.xi.clone() })
    }
}

/// How the diagnostics obtain `A*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AStarSetting {
    Value(f64),
    Mode(AStarMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AStarMode {
    /// Median slope of the field under diagnosis, over points in the density band.
    Estimate,
    /// Median slope of a separate minimizer with data `U f¹` on the same grid.
    Calibrate,
}

impl Default for AStarSetting {
    fn default() -> Self {
        AStarSetting::Mode(AStarMode::Estimate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Weiss,
    Scaling,
    Blowup,
    Density,
    Regularity,
    Flatness,
    Harnack,
    Iof,
    Classify,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Weiss,
        Check::Scaling,
        Check::Blowup,
        Check::Density,
        Check::Regularity,
        Check::Flatness,
        Check::Harnack,
        Check::Iof,
        Check::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Weiss => "weiss",
            Check::Scaling => "scaling",
            Check::Blowup => "blowup",
            Check::Density => "density",
            Check::Regularity => "regularity",
            Check::Flatness => "flatness",
            Check::Harnack => "harnack",
            Check::Iof => "iof",
            Check::Classify => "classify",
        }
    }

    pub fn parse(s: &str) -> Result<Check, CliError> {
        Check::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| CliError::Config(format!("unknown check {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub checks: Vec<Check>,
    pub a_star: AStarSetting,
    /// Weiss radii: geometric from `weiss_min_cells · h` to `weiss_max`.
    pub weiss_min_cells: f64,
    pub weiss_max: f64,
    pub weiss_count: usize,
    /// Radii for `J(G, B_r)` rows and the scaling identity, with `R`.
    pub scaling_pairs: Vec<(f64, f64)>,
    /// Density radii run from `8h` dyadically up to this value.
    pub density_max: f64,
    /// Density bounds on every radius.
    pub density_floor: f64,
    /// Largest radius of the Hölder / non-degeneracy fits.
    pub regularity_max: f64,
    pub slope_band: (f64, f64),
    /// Radius rescaled to unit size for flatness.
    pub flatness_radius: f64,
    pub eps_bar: f64,
    pub envelope_max: f64,
    pub harnack_scales: Vec<f64>,
    pub iof_rho: f64,
    pub iof_pass_fraction: f64,
    pub classify: ClassifyConfig,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            checks: Check::ALL.to_vec(),
            a_star: AStarSetting::default(),
            weiss_min_cells: 8.0,
            weiss_max: 0.25,
            weiss_count: 5,
            scaling_pairs: vec![(0.5, 0.5), (0.25, 0.5)],
            density_max: 0.25,
            density_floor: 0.05,
            regularity_max: 0.25,
            slope_band: (0.45, 0.55),
            flatness_radius: 0.5,
            eps_bar: 0.1,
            envelope_max: 20.0,
            harnack_scales: vec![0.25, 0.125, 0.0625],
            iof_rho: 0.125,
            iof_pass_fraction: 0.9,
            classify: ClassifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Any of `"csv"`, `"json"`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), formats: vec!["csv".into(), "json".into()] }
    }
}

impl OutputConfig {
    pub fn csv(&self) -> bool {
        self.formats.iter().any(|f| f == "csv")
    }

    pub fn json(&self) -> bool {
        self.formats.iter().any(|f| f == "json")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // relative paths are taken from the config file's directory
        if let Some(file) = &config.boundary_data.field_file {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    config.boundary_data.field_file = Some(dir.join(file));
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let grid = thinfb::Grid::try_from(self.grid)?;
        self.solver.validate()?;
        let data = &self.boundary_data;
        if !data.profiles.is_empty() && data.field_file.is_some() {
            return Err(CliError::Config("boundary_data takes profiles or a field file, not both".into()));
        }
        for p in &data.profiles {
            if let Scale::Value(v) = p.scale {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Config(format!("profile scale {v} must be positive")));
                }
            }
            p.resolve(Some(1.0))?.validate(grid.n(), grid.m())?;
        }
        if let Some(file) = &data.field_file {
            if !file.exists() {
                return Err(CliError::Config(format!("field file {} does not exist", file.display())));
            }
        }
        if let Some(bad) = self.output.formats.iter().find(|f| *f != "csv" && *f != "json") {
            return Err(CliError::Config(format!("unknown output format {bad:?}")));
        }
        let d = &self.diagnostics;
        if let AStarSetting::Value(v) = d.a_star {
            if !(v > 0.0) {
                return Err(CliError::Config(format!("a_star = {v} must be positive")));
            }
        }
        if d.weiss_count < 2 || !(d.eps_bar > 0.0) || !(d.iof_rho > 0.0 && d.iof_rho < 1.0) {
            return Err(CliError::Config("diagnostics: need weiss_count >= 2, eps_bar > 0 and iof_rho in (0, 1)".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "grid": {"n": 1, "m": 2, "h": 0.0078125, "extent": 1.0},
        "boundary_data": {"profiles": [
            {"kind": "halfplane", "alpha": 1.0, "nu": [1.0], "xi": [1.0, 0.0], "scale": "a_star"},
            {"kind": "threehalves", "alpha": 0.05, "nu": [1.0], "shift": 0.1, "xi": [1.0, 0.0], "scale": 2.0}
        ]}
    }"#;

    #[test]
    fn parses_and_defaults() {
        let c: RunConfig = serde_json::from_str(MINIMAL).unwrap();
        c.validate().unwrap();
        assert!(c.boundary_data.profiles[0].uses_a_star());
        assert_eq!(c.boundary_data.profiles[1].resolve(None).unwrap().alpha, 0.1);
        assert!(c.boundary_data.profiles[0].resolve(None).is_err());
        assert_eq!(c.diagnostics.checks.len(), 9);
        assert_eq!(c.solver, SolverConfig::default());
        assert!(c.output.csv() && c.output.json());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_h = MINIMAL.replace("0.0078125", "0.3");
        let c: RunConfig = serde_json::from_str(&bad_h).unwrap();
        assert!(c.validate().is_err());
        let unknown = MINIMAL.replace("\"grid\"", "\"gird\"");
        assert!(serde_json::from_str::<RunConfig>(&unknown).is_err());
        let bad_scale = MINIMAL.replace("\"scale\": 2.0", "\"scale\": \"b_star\"");
        assert!(serde_json::from_str::<RunConfig>(&bad_scale).is_err());
        let bad_nu = MINIMAL.replace("\"nu\": [1.0], \"xi\": [1.0, 0.0], \"scale\": \"a_star\"", "\"nu\": [2.0], \"xi\": [1.0, 0.0]");
        let c: RunConfig = serde_json::from_str(&bad_nu).unwrap();
        assert!(c.validate().is_err());
    }
}
