//! Instance files: the on-disk description of one problem instance.
//!
//! The format is JSON with a `schema_version` field. Unknown fields are
//! rejected, and parse errors carry the line/column of the offending token.
//! Serialization uses shortest-round-trip floats, so parse -> serialize ->
//! parse is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use scf_core::{
    IntegratorOptions, ModelConfig, ModelParams, QuadratureOptions, ReactorState,
    ResponseFunction, RunOptions,
};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: String,
    pub params: ParamsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub f1: ResponseFile,
    pub f2: ResponseFile,
    pub y1: f64,
    pub y2: f64,
    pub death_rate: f64,
    pub drain_fraction: f64,
    pub s1_bar: f64,
    pub s2_bar: f64,
    pub s1_in: f64,
    pub s2_in: f64,
}

/// Response functions expressible in a file: saturating (Monod) kinetics or
/// a named linear response. Caller-supplied closures are API-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum ResponseFile {
    Monod { max_rate: f64, half_saturation: f64 },
    Linear { slope: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialFile {
    pub s1: f64,
    pub s2: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_impulses: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
}

impl ResponseFile {
    pub fn build(&self) -> Result<ResponseFunction, CliError> {
        let f = match *self {
            ResponseFile::Monod {
                max_rate,
                half_saturation,
            } => ResponseFunction::monod(max_rate, half_saturation)?,
            ResponseFile::Linear { slope } => ResponseFunction::linear(slope)?,
        };
        Ok(f)
    }
}

/// Numerical settings resolved from the file and command-line overrides.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tolerances {
    pub quad: QuadratureOptions,
    pub integrator: IntegratorOptions,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(CliError::Parse)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {:?}; this build reads version {:?}",
                file.schema_version, SCHEMA_VERSION
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("instance serializes");
        out.push('\n');
        out
    }

    pub fn build_params(&self) -> Result<ModelParams, CliError> {
        let p = &self.params;
        Ok(ModelParams::new(ModelConfig {
            f1: p.f1.build()?,
            f2: p.f2.build()?,
            y1: p.y1,
            y2: p.y2,
            death_rate: p.death_rate,
            drain_fraction: p.drain_fraction,
            s1_bar: p.s1_bar,
            s2_bar: p.s2_bar,
            s1_in: p.s1_in,
            s2_in: p.s2_in,
        })?)
    }

    /// Initial state in the caller's labelling, when present.
    pub fn initial_state(&self) -> Option<ReactorState> {
        self.initial
            .as_ref()
            .map(|i| ReactorState::new(0.0, i.s1, i.s2, i.x))
    }

    pub fn tolerances(&self, tol_override: Option<f64>) -> Result<Tolerances, CliError> {
        let mut t = Tolerances::default();
        if let Some(run) = &self.run {
            if let Some(abs) = run.abs_tol {
                t.quad = QuadratureOptions::new(abs, t.quad.rel_tol, t.quad.max_subdivisions)?;
                t.integrator.abs_tol = abs;
            }
            if let Some(rel) = run.rel_tol {
                t.quad = QuadratureOptions::new(t.quad.abs_tol, rel, t.quad.max_subdivisions)?;
                t.integrator.rel_tol = rel;
            }
        }
        if let Some(x) = tol_override {
            t.quad = QuadratureOptions::new(x, x, t.quad.max_subdivisions)?;
            t.integrator.abs_tol = x;
            t.integrator.rel_tol = x;
        }
        Ok(t)
    }

    pub fn run_options(
        &self,
        max_impulses_override: Option<u32>,
        tol_override: Option<f64>,
    ) -> Result<RunOptions, CliError> {
        let t = self.tolerances(tol_override)?;
        let mut opts = RunOptions {
            integrator: t.integrator,
            ..Default::default()
        };
        if let Some(run) = &self.run {
            if let Some(h) = run.horizon {
                if !(h > 0.0) {
                    return Err(CliError::Validation(format!(
                        "horizon must be positive, got {h}"
                    )));
                }
                opts.horizon = h;
            }
            if let Some(m) = run.max_impulses {
                opts.max_impulses = m;
            }
        }
        if let Some(m) = max_impulses_override {
            opts.max_impulses = m;
        }
        Ok(opts)
    }
}
