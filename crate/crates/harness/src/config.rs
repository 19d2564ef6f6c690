//! Run configuration: TOML sections `geometry`, `flow`, `mesh`, `solver`, `analysis`, `output`
//! and `sweep`. Every section and key is optional; unknown keys are rejected.

use std::path::{Path, PathBuf};

use leray_strip::decay::DECAY_FLOOR;
use leray_strip::geometry::{ConstrictionParams, SBendParams, StripGeometry};
use leray_strip::solver::SolverConfig;
use leray_strip::Friction;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKindSpec {
    Straight,
    SBend,
    Constriction,
    /// Walls read from `wall_samples`.
    Samples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub kind: GeometryKindSpec,
    /// Width of the left straight section (S-bend only).
    pub c0: f64,
    pub amplitude: Option<f64>,
    pub length: Option<f64>,
    pub steepness: Option<f64>,
    /// Mirror-symmetric walls (constriction only).
    pub symmetric: bool,
    /// CSV file with rows `wall,x1,x2` (`wall` is `lower` or `upper`), relative to the config file.
    pub wall_samples: Option<PathBuf>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { kind: GeometryKindSpec::Straight, c0: 1.0, amplitude: None, length: None, steepness: None, symmetric: false, wall_samples: None }
    }
}

/// Friction as a number or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Number(f64),
    Text(String),
}

impl AlphaSpec {
    pub fn friction(&self) -> Result<Friction<f64>, String> {
        match self {
            AlphaSpec::Number(a) if a.is_infinite() && *a > 0.0 => Ok(Friction::NoSlip),
            AlphaSpec::Number(a) => Friction::parse(&a.to_string()).map_err(|e| e.to_string()),
            AlphaSpec::Text(t) => Friction::parse(t).map_err(|e| e.to_string()),
        }
    }

    pub fn from_friction(f: Friction<f64>) -> Self {
        match f {
            Friction::Finite(a) => AlphaSpec::Number(a),
            Friction::NoSlip => AlphaSpec::Text("inf".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    pub phi: f64,
    pub alpha: AlphaSpec,
    /// Layer thickness of the flux carrier; the geometry default when absent.
    pub carrier_eps: Option<f64>,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self { phi: 0.1, alpha: AlphaSpec::Number(1.0), carrier_eps: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub h: f64,
    pub zeta: f64,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { h: 0.1, zeta: 6.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub picard_iters: usize,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub continuation_steps: usize,
    pub linear_tol: f64,
    pub smallness_threshold: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            picard_iters: d.picard_iters,
            newton_tol: d.newton_tol,
            newton_max_iters: d.newton_max_iters,
            continuation_steps: d.continuation_steps,
            linear_tol: d.linear_tol,
            smallness_threshold: d.smallness_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Decay stations (distances from the distorted part); `1, 1.5, ..., zeta - 2` when absent.
    pub stations: Option<Vec<f64>>,
    pub decay_floor: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self { stations: None, decay_floor: DECAY_FLOOR }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Vtk,
    Svg,
    Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("leray-strip-out"), formats: vec![Format::Csv, Format::Vtk, Format::Svg, Format::Summary] }
    }
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Default cap on the number of runs of a sweep.
pub const SWEEP_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub phi: Option<Vec<f64>>,
    pub alpha: Option<Vec<AlphaSpec>>,
    pub zeta: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub cap: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { phi: None, alpha: None, zeta: None, h: None, cap: SWEEP_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub flow: FlowSection,
    pub mesh: MeshSection,
    pub solver: SolverSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
    pub sweep: SweepSection,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Non-fatal findings of [`parse_config`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigWarning {
    /// `alpha phi / (1 + alpha)` above the solver threshold.
    Smallness { value: f64, threshold: f64 },
}

impl std::fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigWarning::Smallness { value, threshold } => {
                write!(f, "alpha phi / (1 + alpha) = {value} exceeds {threshold}; uniqueness is not guaranteed")
            }
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<(RunConfig, Vec<ConfigWarning>), ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    config.validate()?;
    Ok((config.clone(), config.warnings()))
}

/// Reads and parses a configuration file; relative paths inside resolve against its directory.
pub fn load_config(path: &Path) -> Result<(RunConfig, Vec<ConfigWarning>), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let (mut config, warnings) = parse_config(&text)?;
    config.base_dir = path.parent().map(Path::to_path_buf);
    Ok((config, warnings))
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), message: message.into() }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be a finite number > 0, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        positive("geometry.c0", g.c0)?;
        for (key, v) in [("geometry.length", g.length), ("geometry.steepness", g.steepness)] {
            if let Some(v) = v {
                positive(key, v)?;
            }
        }
        if let Some(a) = g.amplitude {
            if !a.is_finite() {
                return Err(invalid("geometry.amplitude", "must be finite"));
            }
        }
        let applies = |key: &str, set: bool, kinds: &[GeometryKindSpec]| {
            if set && !kinds.contains(&g.kind) {
                Err(invalid(key, format!("does not apply to geometry kind {:?}", g.kind)))
            } else {
                Ok(())
            }
        };
        use GeometryKindSpec::*;
        applies("geometry.c0", g.c0 != 1.0, &[SBend])?;
        applies("geometry.amplitude", g.amplitude.is_some(), &[SBend, Constriction])?;
        applies("geometry.length", g.length.is_some(), &[SBend, Constriction])?;
        applies("geometry.steepness", g.steepness.is_some(), &[SBend, Constriction])?;
        applies("geometry.symmetric", g.symmetric, &[Constriction])?;
        applies("geometry.wall_samples", g.wall_samples.is_some(), &[Samples])?;
        if g.kind == Samples && g.wall_samples.is_none() {
            return Err(invalid("geometry.wall_samples", "is required for kind = \"samples\""));
        }
        let f = &self.flow;
        if !(f.phi >= 0.0 && f.phi.is_finite()) {
            return Err(invalid("flow.phi", format!("must be finite and >= 0, got {}", f.phi)));
        }
        f.alpha.friction().map_err(|m| invalid("flow.alpha", m))?;
        if let Some(e) = f.carrier_eps {
            positive("flow.carrier_eps", e)?;
        }
        positive("mesh.h", self.mesh.h)?;
        positive("mesh.zeta", self.mesh.zeta)?;
        self.solver_config_for(f.phi, f.alpha.friction().unwrap(), self.mesh.zeta, self.mesh.h)
            .validate()
            .map_err(|e| invalid("solver", e.to_string()))?;
        if let Some(st) = &self.analysis.stations {
            if st.len() < 4 {
                return Err(invalid("analysis.stations", "needs at least four stations"));
            }
            if let Some(s) = st.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
                return Err(invalid("analysis.stations", format!("station {s} is not a finite distance >= 0")));
            }
        }
        if !(self.analysis.decay_floor >= 0.0) {
            return Err(invalid("analysis.decay_floor", "must be >= 0"));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "must name at least one format"));
        }
        let s = &self.sweep;
        if s.cap == 0 {
            return Err(invalid("sweep.cap", "must be >= 1"));
        }
        for (key, list) in [("sweep.phi", &s.phi), ("sweep.zeta", &s.zeta), ("sweep.h", &s.h)] {
            if let Some(l) = list {
                if l.is_empty() {
                    return Err(invalid(key, "must not be empty"));
                }
                if let Some(v) = l.iter().find(|v| !(v.is_finite() && (**v > 0.0 || (key == "sweep.phi" && **v == 0.0)))) {
                    return Err(invalid(key, format!("invalid value {v}")));
                }
            }
        }
        if let Some(l) = &s.alpha {
            if l.is_empty() {
                return Err(invalid("sweep.alpha", "must not be empty"));
            }
            for a in l {
                a.friction().map_err(|m| invalid("sweep.alpha", m))?;
            }
        }
        Ok(())
    }

    pub fn friction(&self) -> Friction<f64> {
        self.flow.alpha.friction().expect("validated config")
    }

    fn solver_config_for(&self, phi: f64, alpha: Friction<f64>, zeta: f64, h: f64) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            phi,
            alpha,
            zeta,
            h,
            picard_iters: s.picard_iters,
            newton_tol: s.newton_tol,
            newton_max_iters: s.newton_max_iters,
            continuation_steps: s.continuation_steps,
            linear_tol: s.linear_tol,
            smallness_threshold: s.smallness_threshold,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver_config_for(self.flow.phi, self.friction(), self.mesh.zeta, self.mesh.h)
    }

    pub fn warnings(&self) -> Vec<ConfigWarning> {
        let c = self.solver_config();
        if c.smallness_warning() {
            vec![ConfigWarning::Smallness { value: c.smallness(), threshold: c.smallness_threshold }]
        } else {
            Vec::new()
        }
    }

    /// Builds the strip described by the geometry section.
    pub fn geometry(&self) -> Result<StripGeometry, crate::error::HarnessError> {
        let g = &self.geometry;
        let geometry = match g.kind {
            GeometryKindSpec::Straight => StripGeometry::straight(),
            GeometryKindSpec::SBend => {
                let d = SBendParams::default();
                StripGeometry::s_bend(SBendParams {
                    amplitude: g.amplitude.unwrap_or(d.amplitude),
                    length: g.length.unwrap_or(d.length),
                    steepness: g.steepness.unwrap_or(d.steepness),
                    c0: g.c0,
                })?
            }
            GeometryKindSpec::Constriction => {
                let d = ConstrictionParams::default();
                StripGeometry::constriction(ConstrictionParams {
                    amplitude: g.amplitude.unwrap_or(d.amplitude),
                    length: g.length.unwrap_or(d.length),
                    steepness: g.steepness.unwrap_or(d.steepness),
                    symmetric: g.symmetric,
                })?
            }
            GeometryKindSpec::Samples => {
                let rel = g.wall_samples.as_ref().expect("validated config");
                let path = match &self.base_dir {
                    Some(dir) if rel.is_relative() => dir.join(rel),
                    _ => rel.clone(),
                };
                let (lower, upper) = read_wall_samples(&path)?;
                StripGeometry::from_samples(&lower, &upper)?
            }
        };
        Ok(geometry)
    }
}

type WallPoints = Vec<[f64; 2]>;

/// Reads `wall,x1,x2` rows (with a header) into lower and upper sample lists.
pub fn read_wall_samples(path: &Path) -> Result<(WallPoints, WallPoints), ConfigError> {
    let err = |m: String| ConfigError::Invalid { key: "geometry.wall_samples".into(), message: m };
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path).map_err(|e| err(format!("{}: {e}", path.display())))?;
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 3 {
            return Err(err(format!("row {} has {} fields, expected wall,x1,x2", k + 2, rec.len())));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| err(format!("row {}: `{}` is not a number", k + 2, &rec[i])));
        let p = [num(1)?, num(2)?];
        match &rec[0] {
            "lower" => lower.push(p),
            "upper" => upper.push(p),
            other => return Err(err(format!("row {}: unknown wall `{other}`", k + 2))),
        }
    }
    Ok((lower, upper))
}
