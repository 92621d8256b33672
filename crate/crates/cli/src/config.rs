//! Run configuration: one TOML tree, overridable field-by-field from the
//! command line with `--set table.key=value`.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use switch_core::fcs::EigMethod;
use switch_core::hilbert::{AtomState, ModeSpec};
use switch_core::model::SwitchParams;
use switch_core::presets;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub s_min: f64,
    pub s_max: f64,
    pub s_count: usize,
    /// Optional explicit q grid bounds; derived from the curve slopes when
    /// absent.
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub q_count: usize,
    pub delta_s: f64,
    pub eigensolver: EigMethod,
    pub dense_limit: usize,
    pub imag_tol: f64,
    pub residual_tol: f64,
    /// Override for the steady-state null threshold (default 1e-8 ||W||_F).
    pub zero_threshold: Option<f64>,
    pub kink_rel_tol: f64,
    pub q_floor: f64,
    pub refine: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            s_min: -1.0,
            s_max: 1.0,
            s_count: 41,
            q_min: None,
            q_max: None,
            q_count: 200,
            delta_s: 1e-3,
            eigensolver: EigMethod::Auto,
            dense_limit: 4096,
            imag_tol: 1e-9,
            residual_tol: 1e-9,
            zero_threshold: None,
            kink_rel_tol: 1e-3,
            q_floor: 1e-12,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub cutoffs: [usize; 3],
    pub global_cap: Option<usize>,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            cutoffs: [1, 1, 1],
            global_cap: Some(1),
        }
    }
}

impl Truncation {
    pub fn mode_spec(&self) -> ModeSpec {
        ModeSpec {
            cavity_cutoffs: self.cutoffs,
            global_cap: self.global_cap,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Trajectory {
    pub t_max: f64,
    pub seed: u64,
    pub ensemble: usize,
    /// "basis" starts every trajectory from the configured basis state;
    /// "steady" samples each trajectory from the computed steady state.
    pub initial: String,
    pub initial_atom: String,
    pub initial_photons: [usize; 3],
    pub counted: Vec<String>,
    /// Dark/bright gap threshold; the geometric-mean default is used when
    /// absent.
    pub threshold: Option<f64>,
}

impl Default for Trajectory {
    fn default() -> Self {
        Trajectory {
            t_max: 4e5,
            seed: 1,
            ensemble: 100,
            initial: "basis".into(),
            initial_atom: "00".into(),
            initial_photons: [0, 0, 0],
            counted: vec!["r_emit".into(), "r_abs".into()],
            threshold: None,
        }
    }
}

impl Trajectory {
    pub fn initial_atom_state(&self) -> Result<AtomState> {
        Ok(AtomState::from_label(&self.initial_atom)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    /// Explicit hopping values; overrides the log grid when nonempty.
    pub j_values: Vec<f64>,
    pub j_min: f64,
    pub j_max: f64,
    pub j_count: usize,
    /// Worker threads for sweep points (0 = number of cores).
    pub workers: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            j_values: Vec::new(),
            j_min: 1e-3,
            j_max: 1e-1,
            j_count: 9,
            workers: 0,
        }
    }
}

impl Sweep {
    pub fn grid(&self) -> Vec<f64> {
        if !self.j_values.is_empty() {
            return self.j_values.clone();
        }
        let step = (self.j_max / self.j_min).ln() / (self.j_count - 1).max(1) as f64;
        (0..self.j_count)
            .map(|k| self.j_min * (step * k as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub svg: bool,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            dir: PathBuf::from("out"),
            svg: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: SwitchParams,
    pub numerics: Numerics,
    pub truncation: Truncation,
    pub trajectory: Trajectory,
    pub sweep: Sweep,
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: presets::laser_on(),
            numerics: Numerics::default(),
            truncation: Truncation::default(),
            trajectory: Trajectory::default(),
            sweep: Sweep::default(),
            output: Output::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.truncation.mode_spec().validate()?;
        let n = &self.numerics;
        if n.s_count == 0 || n.q_count == 0 {
            bail!("s and q grids must be non-empty");
        }
        if n.s_count > 1 && n.s_min >= n.s_max {
            bail!("s grid bounds must be ordered: [{}, {}]", n.s_min, n.s_max);
        }
        for (name, v) in [
            ("delta_s", n.delta_s),
            ("imag_tol", n.imag_tol),
            ("residual_tol", n.residual_tol),
            ("kink_rel_tol", n.kink_rel_tol),
            ("q_floor", n.q_floor),
        ] {
            if !(v > 0.0) {
                bail!("numerics.{name} must be positive, got {v}");
            }
        }
        if let (Some(lo), Some(hi)) = (n.q_min, n.q_max) {
            if lo >= hi {
                bail!("q grid bounds must be ordered");
            }
        }
        if self.sweep.grid().iter().any(|j| !(*j > 0.0)) {
            bail!("sweep hopping grid must be positive");
        }
        Ok(())
    }

    pub fn s_grid(&self) -> Vec<f64> {
        let n = &self.numerics;
        if n.s_count == 1 {
            return vec![n.s_min];
        }
        let step = (n.s_max - n.s_min) / (n.s_count - 1) as f64;
        (0..n.s_count).map(|k| n.s_min + step * k as f64).collect()
    }

    pub fn solver(&self) -> switch_core::fcs::SolverConfig {
        switch_core::fcs::SolverConfig {
            method: self.numerics.eigensolver,
            dense_limit: self.numerics.dense_limit,
            imag_tol: self.numerics.imag_tol,
            residual_tol: self.numerics.residual_tol,
            refine: self.numerics.refine,
            arnoldi: Default::default(),
        }
    }
}

/// Parse one `table.key=value` override into the TOML tree.
fn apply_override(tree: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, value) = spec
        .split_once('=')
        .with_context(|| format!("override '{spec}' is not of the form key=value"))?;
    // Parse the right-hand side as a TOML value by wrapping it in a
    // one-entry document; bare words (e.g. thermal_convention=standard)
    // fall back to strings.
    let parsed: toml::Value = match format!("v = {value}").parse::<toml::Table>() {
        Ok(mut table) => table.remove("v").unwrap(),
        Err(_) => toml::Value::String(value.to_string()),
    };
    let mut node = tree;
    let segments: Vec<&str> = path.split('.').collect();
    for seg in &segments[..segments.len() - 1] {
        node = node
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("'{seg}' in '{path}' is not a table"))?;
    }
    node.insert(segments[segments.len() - 1].to_string(), parsed);
    Ok(())
}

/// Deep merge: tables recurse, everything else replaces.
fn merge(base: &mut toml::Table, layer: toml::Table) {
    for (key, value) in layer {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(bt)), toml::Value::Table(lt)) => merge(bt, lt),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Load the configuration in layers: built-in defaults, then the optional
/// file, then the optional preset (replacing the params block), then the
/// field overrides.
pub fn load(
    file: Option<&Path>,
    preset: Option<&str>,
    overrides: &[String],
) -> Result<RunConfig> {
    let mut tree: toml::Table = toml::Value::try_from(RunConfig::default())
        .context("serializing defaults")?
        .as_table()
        .cloned()
        .expect("defaults serialize to a table");

    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let file_tree: toml::Table = text
            .parse()
            .with_context(|| format!("parsing config {}", path.display()))?;
        merge(&mut tree, file_tree);
    }

    if let Some(name) = preset {
        let params = presets::by_name(name).with_context(|| {
            let names: Vec<&str> = presets::all().iter().map(|(n, _)| *n).collect();
            format!("unknown preset '{name}'; available: {}", names.join(", "))
        })?;
        let params_tree: toml::Value =
            toml::Value::try_from(&params).context("serializing preset")?;
        tree.insert("params".into(), params_tree);
    }

    for spec in overrides {
        apply_override(&mut tree, spec)?;
    }

    let config: RunConfig = toml::Value::Table(tree)
        .try_into()
        .context("deserializing configuration")?;
    config.validate()?;
    Ok(config)
}
