//! Run configuration: TOML schema, validation and command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use bonnetlab::zoo::Param;
use serde::{Deserialize, Serialize};

pub const MIN_GRID: usize = 16;
pub const DEFAULT_GRID: usize = 64;

/// Invalid or unreadable configuration; maps to exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    /// One-based `(line, column)` in the config file, when known.
    pub location: Option<(usize, usize)>,
    pub path: Option<PathBuf>,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError { message: message.into(), location: None, path: None }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.path, self.location) {
            (Some(p), Some((l, c))) => write!(f, "{}:{l}:{c}: {}", p.display(), self.message),
            (Some(p), None) => write!(f, "{}: {}", p.display(), self.message),
            (None, Some((l, c))) => write!(f, "{l}:{c}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Classify,
    Lines,
    Index,
    GlobalChecks,
    Mates,
    Deform,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Classify => "classify",
            Command::Lines => "lines",
            Command::Index => "index",
            Command::GlobalChecks => "global-checks",
            Command::Mates => "mates",
            Command::Deform => "deform",
            Command::Verify => "verify",
        }
    }
}

/// Which isotropic signs a command covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SignChoice {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
    #[default]
    #[serde(rename = "both")]
    Both,
}

impl SignChoice {
    pub fn signs(self) -> Vec<bonnetlab::Sign> {
        use bonnetlab::Sign;
        match self {
            SignChoice::Minus => vec![Sign::Minus],
            SignChoice::Plus => vec![Sign::Plus],
            SignChoice::Both => vec![Sign::Minus, Sign::Plus],
        }
    }
}

/// Zoo entry, or a chart whose four components are polynomials in `(u, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub name: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, Param>,
    /// `[i, j, coefficient, ...]` triples, one list per ambient coordinate.
    pub polynomial: Option<Vec<Vec<f64>>>,
    /// `[u0, u1, v0, v1]` for polynomial charts.
    pub domain: Option<[f64; 4]>,
    #[serde(default)]
    pub isothermal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_grid")]
    pub size: [usize; 2],
    /// `[u0, u1, v0, v1]` inside the chart domain; the grid is then nonperiodic.
    pub subdomain: Option<[f64; 4]>,
}

fn default_grid() -> [usize; 2] {
    [DEFAULT_GRID, DEFAULT_GRID]
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { size: default_grid(), subdomain: None }
    }
}

/// Tolerances used to decide every check's pass flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Pointwise algebraic identities (absolute).
    pub identity: f64,
    /// Pseudo-umbilic threshold relative to the curvature scale.
    pub eps_scale: f64,
    /// `|d*Omega| < iso_eps * scale` counts as isotropically isothermic.
    pub iso_eps: f64,
    /// Relative error of `dOmega = -(2K +/- K_N)`.
    pub exterior: f64,
    /// Global integrals (absolute).
    pub integral: f64,
    /// Scaled Ricci-like and Chern-form residuals.
    pub residual: f64,
    /// Distance of an index from the nearest integer.
    pub index: f64,
    /// Mate metric, mean curvature and normal curvature errors (relative).
    pub mate: f64,
    /// Procrustes residual of the trivial mate, relative to the diameter.
    pub congruence: f64,
    /// Deformation system, bending and closure residuals.
    pub system: f64,
    /// Minimum nontriviality residual of a bending field.
    pub nontrivial: f64,
    /// Allowed relative spread of the step-ratio checks (0.2 means 80..120).
    pub ratio: f64,
    /// Superconformal variant: bound on the preserved lift's variation and
    /// floor for the other lift's.
    pub lift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-9,
            eps_scale: bonnetlab::invariants::DEFAULT_EPS_SCALE,
            iso_eps: bonnetlab::mixed::DEFAULT_ISO_EPS,
            exterior: 1e-4,
            integral: 1e-8,
            residual: 1e-4,
            index: 0.05,
            mate: 1e-4,
            congruence: 1e-5,
            system: bonnetlab::deform::SYSTEM_TOL,
            nontrivial: bonnetlab::deform::NONTRIVIAL_THRESHOLD,
            ratio: 0.2,
            lift: 1e-3,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 13] = [
        "identity",
        "eps_scale",
        "iso_eps",
        "exterior",
        "integral",
        "residual",
        "index",
        "mate",
        "congruence",
        "system",
        "nontrivial",
        "ratio",
        "lift",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "identity" => &mut self.identity,
            "eps_scale" => &mut self.eps_scale,
            "iso_eps" => &mut self.iso_eps,
            "exterior" => &mut self.exterior,
            "integral" => &mut self.integral,
            "residual" => &mut self.residual,
            "index" => &mut self.index,
            "mate" => &mut self.mate,
            "congruence" => &mut self.congruence,
            "system" => &mut self.system,
            "nontrivial" => &mut self.nontrivial,
            "ratio" => &mut self.ratio,
            "lift" => &mut self.lift,
            _ => return None,
        })
    }

    /// Apply a `KEY=VAL` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, val) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::new(format!("--tol expects KEY=VAL, got '{assignment}'")))?;
        let x: f64 = val.trim().parse().map_err(|_| ConfigError::new(format!("--tol {key}: '{val}' is not a number")))?;
        let slot = self
            .slot(key.trim())
            .ok_or_else(|| ConfigError::new(format!("--tol: unknown key '{key}' (known: {})", Self::KEYS.join(", "))))?;
        *slot = x;
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut copy = *self;
        for key in Self::KEYS {
            let x = *copy.slot(key).expect("listed key");
            if !(x > 0.0 && x.is_finite()) {
                return Err(ConfigError::new(format!("tolerance '{key}' must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Artifact directory; without it the report goes to stdout.
    pub dir: Option<PathBuf>,
    #[serde(default = "default_report")]
    pub report: String,
    /// Largest side of the invariant grids embedded in the report.
    #[serde(default = "default_downsample")]
    pub downsample: usize,
    #[serde(default = "yes")]
    pub meshes: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, report: default_report(), downsample: default_downsample(), meshes: true }
    }
}

fn default_report() -> String {
    "report.json".into()
}

fn default_downsample() -> usize {
    16
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct IndexConfig {
    #[serde(default)]
    pub sign: SignChoice,
    /// Loop radii in parameter units, largest first; default 4, 2, 1 grid steps.
    pub radii: Option<Vec<f64>>,
    /// Expected sum of the indices, checked within the `index` tolerance.
    pub expected_sum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatesConfig {
    #[serde(default)]
    pub theta_minus: Vec<f64>,
    #[serde(default)]
    pub theta_plus: Vec<f64>,
}

impl Default for MatesConfig {
    fn default() -> Self {
        let quarter: Vec<f64> = (0..4).map(|k| k as f64 * std::f64::consts::FRAC_PI_2).collect();
        MatesConfig { theta_minus: quarter, theta_plus: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformConfig {
    /// Isothermic sign `s` of the construction; the part of sign `-s` is preserved.
    #[serde(default = "minus")]
    pub sign: SignChoice,
    #[serde(default = "default_t")]
    pub t_values: Vec<f64>,
    /// Use the superconformal variant (mean-curvature gauge, sign chosen automatically).
    #[serde(default)]
    pub superconformal: bool,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

fn minus() -> SignChoice {
    SignChoice::Minus
}

fn default_t() -> Vec<f64> {
    bonnetlab::deform::DEFAULT_T_VALUES.to_vec()
}

fn default_substeps() -> usize {
    bonnetlab::lattice::DEFAULT_SUBSTEPS
}

impl Default for DeformConfig {
    fn default() -> Self {
        DeformConfig { sign: minus(), t_values: default_t(), superconformal: false, substeps: default_substeps() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinesConfig {
    /// Seeds per axis on a regular interior lattice.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    /// Step cap per direction from a seed.
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_seeds() -> usize {
    4
}

fn default_max_steps() -> usize {
    2000
}

impl Default for LinesConfig {
    fn default() -> Self {
        LinesConfig { seeds: default_seeds(), max_steps: default_max_steps() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub grid: GridConfig,
    /// Commands for `bonnetlab run`, executed in order.
    #[serde(default)]
    pub commands: Vec<Command>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub index: IndexConfig,
    #[serde(default)]
    pub mates: MatesConfig,
    #[serde(default)]
    pub deform: DeformConfig,
    #[serde(default)]
    pub lines: LinesConfig,
}

/// One-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| ConfigError {
            message: e.message().to_string(),
            location: e.span().map(|s| line_col(src, s.start)),
            path: None,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError { message: format!("cannot read config: {e}"), location: None, path: Some(path.into()) })?;
        RunConfig::parse(&src).map_err(|e| ConfigError { path: Some(path.into()), ..e })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let [nu, nv] = self.grid.size;
        if nu < MIN_GRID || nv < MIN_GRID {
            return Err(ConfigError::new(format!("grid {nu}x{nv} is below the {MIN_GRID}x{MIN_GRID} minimum")));
        }
        if let Some([u0, u1, v0, v1]) = self.grid.subdomain {
            if !(u1 > u0 && v1 > v0) {
                return Err(ConfigError::new("grid.subdomain must be [u0, u1, v0, v1] with u0 < u1 and v0 < v1"));
            }
        }
        match (&self.surface.name, &self.surface.polynomial) {
            (Some(_), Some(_)) => return Err(ConfigError::new("surface: give either 'name' or 'polynomial', not both")),
            (None, None) => return Err(ConfigError::new("surface: missing 'name' (zoo entry) or 'polynomial'")),
            (None, Some(p)) => {
                if p.len() != 4 {
                    return Err(ConfigError::new("surface.polynomial needs four component lists"));
                }
                if self.surface.domain.is_none() {
                    return Err(ConfigError::new("surface.domain is required for polynomial charts"));
                }
            }
            (Some(_), None) => {
                if self.surface.domain.is_some() {
                    return Err(ConfigError::new("surface.domain only applies to polynomial charts; use grid.subdomain"));
                }
            }
        }
        self.tolerances.validate()?;
        if self.output.downsample < 2 {
            return Err(ConfigError::new("output.downsample must be at least 2"));
        }
        if let Some(r) = &self.index.radii {
            if r.is_empty() || r.iter().any(|&x| !(x > 0.0)) {
                return Err(ConfigError::new("index.radii must be a nonempty list of positive radii"));
            }
        }
        if self.deform.t_values.len() < 2 || self.deform.t_values.iter().any(|&t| !(t > 0.0)) {
            return Err(ConfigError::new("deform.t_values needs at least two positive values"));
        }
        if self.deform.sign == SignChoice::Both {
            return Err(ConfigError::new("deform.sign must be '-' or '+'"));
        }
        if self.deform.substeps == 0 || self.lines.seeds == 0 || self.lines.max_steps == 0 {
            return Err(ConfigError::new("deform.substeps, lines.seeds and lines.max_steps must be positive"));
        }
        Ok(())
    }

    /// `NxM` override of the grid size.
    pub fn set_grid(&mut self, size: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::new(format!("--grid expects NxM, got '{size}'"));
        let (a, b) = size.to_ascii_lowercase().split_once('x').map(|(a, b)| (a.to_string(), b.to_string())).ok_or_else(bad)?;
        self.grid.size = [a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?];
        self.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[surface]\nname = \"product_circles\"\nparams = { r1 = 0.5, r2 = 1 }\n";

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.grid.size, [64, 64]);
        assert_eq!(c.tolerances, Tolerances::default());
        assert!(c.output.dir.is_none() && c.output.meshes);
        assert_eq!(c.surface.params.get("r2"), Some(&Param::Num(1.0)));
    }

    #[test]
    fn syntax_error_reports_line_and_column() {
        let e = RunConfig::parse("[surface]\nname = \"plane\"\nparams = { r = }\n").unwrap_err();
        assert_eq!(e.location.map(|l| l.0), Some(3), "{e}");
        assert!(e.to_string().starts_with("3:"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::parse(&format!("{MINIMAL}[grid]\nsise = [16, 16]\n")).unwrap_err();
        assert!(e.message.contains("sise"), "{e}");
        assert!(e.location.is_some());
    }

    #[test]
    fn small_grids_and_bad_tolerances_are_rejected() {
        assert!(RunConfig::parse(&format!("{MINIMAL}[grid]\nsize = [8, 64]\n")).is_err());
        assert!(RunConfig::parse(&format!("{MINIMAL}[tolerances]\nmate = -1.0\n")).is_err());
        let mut c = RunConfig::parse(MINIMAL).unwrap();
        assert!(c.set_grid("12x40").is_err());
        c.set_grid("20x24").unwrap();
        assert_eq!(c.grid.size, [20, 24]);
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("mate=2e-4").unwrap();
        assert_eq!(t.mate, 2e-4);
        assert!(t.set("bogus=1").is_err());
        assert!(t.set("mate").is_err());
        assert!(t.set("mate=0").is_err());
    }

    #[test]
    fn commands_parse_in_kebab_case() {
        let c = RunConfig::parse(&format!("commands = [\"analyze\", \"global-checks\"]\n{MINIMAL}")).unwrap();
        assert_eq!(c.commands, vec![Command::Analyze, Command::GlobalChecks]);
    }

    #[test]
    fn nested_zoo_entries() {
        let src = "[surface]\nname = \"inverted\"\n[surface.params]\ncenter = [0, 0, 0, 3]\nbase = { name = \"product_curves\", params = { k1 = [0, 1] } }\n";
        let c = RunConfig::parse(src).unwrap();
        assert!(matches!(c.surface.params.get("base"), Some(Param::Surface(_))));
    }

    #[test]
    fn polynomial_charts_need_a_domain() {
        let src = "[surface]\npolynomial = [[1, 0, 1], [0, 1, 1], [2, 0, 1, 0, 2, -1], [1, 1, 2]]\n";
        assert!(RunConfig::parse(src).is_err());
        let ok = format!("{src}domain = [-1, 1, -1, 1]\nisothermal = true\n");
        assert!(RunConfig::parse(&ok).is_ok());
    }
}
