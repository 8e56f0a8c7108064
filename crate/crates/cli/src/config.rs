//! Run configuration: a TOML file with one table per subcommand, plus
//! `--set table.key=value` overrides applied on top.

use std::fmt;
use std::path::Path;

use fockedge::experiments::{DarkStateConfig, PointerConfig, SshParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Base seed for trajectory sampling.
    pub seed: u64,
    pub spectrum: SpectrumConfig,
    pub edgefit: EdgeFitConfig,
    pub darkstate: DarkStateConfig,
    pub evolve: PointerConfig,
    pub winding: WindingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub t_inter: f64,
    pub t_intra: f64,
    pub n_cells: usize,
    pub j1_start: f64,
    pub j1_stop: f64,
    pub j1_step: f64,
    pub j2: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { t_inter: -2.0, t_intra: -1.0, n_cells: 80, j1_start: 0.0, j1_stop: -1.0, j1_step: -0.05, j2: 0.0 }
    }
}

impl SpectrumConfig {
    pub fn ssh(&self) -> SshParams {
        SshParams { t_inter: self.t_inter, t_intra: self.t_intra, n_cells: self.n_cells }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeFitConfig {
    pub t_inter: f64,
    pub t_intra: f64,
    pub n_cells: usize,
    /// `[J₁, J₂]` pairs; one output file set per pair.
    pub points: Vec<[f64; 2]>,
}

impl Default for EdgeFitConfig {
    fn default() -> Self {
        Self {
            t_inter: -2.0,
            t_intra: -1.0,
            n_cells: 80,
            points: vec![[-0.5, 0.0], [-0.5, -0.5], [-0.9, 0.0]],
        }
    }
}

impl EdgeFitConfig {
    pub fn ssh(&self) -> SshParams {
        SshParams { t_inter: self.t_inter, t_intra: self.t_intra, n_cells: self.n_cells }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindingConfig {
    pub v: f64,
    pub w: Vec<f64>,
    pub k_points: usize,
}

impl Default for WindingConfig {
    fn default() -> Self {
        Self { v: -1.0, w: vec![-2.0, -0.5], k_points: 256 }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Load `path` (if any), then apply each `key=value` override in order.
///
/// The file is validated on its own first so that errors carry its line
/// numbers; overrides are validated after merging.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let label = path.map(|p| p.display().to_string()).unwrap_or_else(|| "<defaults>".into());
    toml::from_str::<RunConfig>(&text).map_err(|e| ConfigError(format!("{label}: {e}")))?;
    if overrides.is_empty() {
        return toml::from_str(&text).map_err(|e| ConfigError(format!("{label}: {e}")));
    }
    let mut table: toml::Table = toml::from_str(&text).map_err(|e| ConfigError(format!("{label}: {e}")))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| ConfigError(format!("after --set {}: {e}", overrides.join(" --set "))))
}

/// `a.b.c=value`, with `value` parsed as a TOML value and falling back to a
/// bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("--set {spec}: expected key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError(format!("--set {spec}: empty key segment")));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("nonempty path");
    let mut cur = table;
    for p in parents {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError(format!("--set {spec}: `{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Effective configuration rendered back to TOML, suitable for `--config`.
pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}
