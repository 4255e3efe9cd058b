//! JSON system and disturbance files.
//!
//! Matrices are row-major lists of rows. Every problem is reported with the
//! path of the offending field, e.g. `subsystems[1].discrete[0].A`.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::delay::{DelaySubsystem, DelayTerms, DiscreteDelay, DistributedKernel};
use crate::matrix::Matrix;
use crate::perturb::{Disturbance, DisturbanceTerm, PerturbationStructure, StructureQuad};
use crate::SwitchedDelaySystem;

/// Current version of the system file layout.
pub const SYSTEM_FILE_VERSION: u32 = 1;

/// A problem in an input file, located by field path.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub path: String,
    pub message: String,
}

impl InputError {
    fn at(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for InputError {}

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSpec {
    pub delay: f64,
    #[serde(rename = "A")]
    pub a: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub grid: Vec<f64>,
    pub values: Vec<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemSpec {
    #[serde(rename = "A0")]
    pub a0: Rows,
    #[serde(default)]
    pub discrete: Vec<DiscreteSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    #[serde(rename = "D0")]
    pub d0: Rows,
    #[serde(rename = "E0")]
    pub e0: Rows,
    #[serde(rename = "D1")]
    pub d1: Rows,
    #[serde(rename = "E1")]
    pub e1: Rows,
}

fn default_version() -> u32 {
    SYSTEM_FILE_VERSION
}

/// On-disk description of a switched system and optional analysis inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default = "default_version")]
    pub version: u32,
    pub n: usize,
    pub h: f64,
    pub subsystems: Vec<SubsystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Vec<StructureSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<SubsystemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_structure: Option<StructureSpec>,
}

/// Validated contents of a [`SystemFile`].
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub system: SwitchedDelaySystem,
    pub structure: Option<PerturbationStructure>,
    pub bound: Option<DelaySubsystem>,
    pub bound_structure: Option<StructureQuad>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceTermSpec {
    #[serde(rename = "Delta")]
    pub delta: Rows,
    #[serde(default)]
    pub discrete: Vec<DiscreteSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
}

/// On-disk disturbance: one term per subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceFile {
    pub terms: Vec<DisturbanceTermSpec>,
}

/// Parses JSON text, reporting type errors with their field path.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        InputError::at(path, e.into_inner())
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError::at("", format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| InputError {
        path: e.path,
        message: format!("{} ({})", e.message, path.display()),
    })
}

fn matrix(rows: &Rows, path: &str, shape: Option<(usize, usize)>) -> Result<Matrix, InputError> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || width == 0 {
        return Err(InputError::at(
            path,
            "matrix must have at least one row and column",
        ));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(InputError::at(
            format!("{path}[{i}]"),
            format!("row has {} entries, expected {width}", rows[i].len()),
        ));
    }
    let m = Matrix::from_rows(rows).map_err(|e| InputError::at(path, e))?;
    if let Some(expected) = shape {
        if m.shape() != expected {
            return Err(InputError::at(
                path,
                format!(
                    "expected a {}x{} matrix, got {}x{}",
                    expected.0,
                    expected.1,
                    m.rows(),
                    m.cols()
                ),
            ));
        }
    }
    Ok(m)
}

fn delay_terms(
    discrete: &[DiscreteSpec],
    kernel: Option<&KernelSpec>,
    shape: Option<(usize, usize)>,
    path: &str,
) -> Result<DelayTerms, InputError> {
    let mut shape = shape;
    let mut jumps = Vec::with_capacity(discrete.len());
    for (i, d) in discrete.iter().enumerate() {
        let p = format!("{path}.discrete[{i}]");
        let a = matrix(&d.a, &format!("{p}.A"), shape)?;
        shape.get_or_insert(a.shape());
        if !(d.delay > 0.0) || !d.delay.is_finite() {
            return Err(InputError::at(
                format!("{p}.delay"),
                "delay must be positive",
            ));
        }
        jumps.push(DiscreteDelay {
            delay: d.delay,
            matrix: a,
        });
    }
    let kernel = match kernel {
        Some(k) => {
            let p = format!("{path}.kernel");
            if k.values.len() != k.grid.len() {
                return Err(InputError::at(
                    format!("{p}.values"),
                    format!("{} values for {} grid points", k.values.len(), k.grid.len()),
                ));
            }
            let mut values = Vec::with_capacity(k.values.len());
            for (i, v) in k.values.iter().enumerate() {
                let m = matrix(v, &format!("{p}.values[{i}]"), shape)?;
                shape.get_or_insert(m.shape());
                values.push(m);
            }
            Some(DistributedKernel::new(k.grid.clone(), values).map_err(|e| InputError::at(p, e))?)
        }
        None => None,
    };
    let shape = shape.ok_or_else(|| InputError::at(path, "cannot infer delay matrix shape"))?;
    DelayTerms::new(shape, jumps, kernel).map_err(|e| InputError::at(format!("{path}.discrete"), e))
}

fn check_horizon(terms: &DelayTerms, h: f64, path: &str) -> Result<(), InputError> {
    if let Some(d) = terms.discrete().last() {
        if d.delay > h {
            return Err(InputError::at(
                format!("{path}.discrete"),
                format!("delay {} exceeds h = {h}", d.delay),
            ));
        }
    }
    if let Some(k) = terms.kernel() {
        if k.start() != -h {
            return Err(InputError::at(
                format!("{path}.kernel.grid"),
                format!("grid must start at -h = {}, starts at {}", -h, k.start()),
            ));
        }
    }
    Ok(())
}

fn subsystem(
    spec: &SubsystemSpec,
    n: usize,
    h: f64,
    path: &str,
) -> Result<DelaySubsystem, InputError> {
    let a0 = matrix(&spec.a0, &format!("{path}.A0"), Some((n, n)))?;
    let terms = delay_terms(&spec.discrete, spec.kernel.as_ref(), Some((n, n)), path)?;
    check_horizon(&terms, h, path)?;
    DelaySubsystem::from_parts(a0, terms).map_err(|e| InputError::at(path, e))
}

fn structure_quad(spec: &StructureSpec, n: usize, path: &str) -> Result<StructureQuad, InputError> {
    let d0 = matrix(&spec.d0, &format!("{path}.D0"), None)?;
    let d1 = matrix(&spec.d1, &format!("{path}.D1"), None)?;
    let e0 = matrix(&spec.e0, &format!("{path}.E0"), None)?;
    let e1 = matrix(&spec.e1, &format!("{path}.E1"), None)?;
    for (name, rows) in [("D0", d0.rows()), ("D1", d1.rows())] {
        if rows != n {
            return Err(InputError::at(
                format!("{path}.{name}"),
                format!("needs {n} rows, has {rows}"),
            ));
        }
    }
    for (name, cols) in [("E0", e0.cols()), ("E1", e1.cols())] {
        if cols != n {
            return Err(InputError::at(
                format!("{path}.{name}"),
                format!("needs {n} columns, has {cols}"),
            ));
        }
    }
    StructureQuad::new(d0, e0, d1, e1).map_err(|e| InputError::at(path, e))
}

fn subsystem_spec(s: &DelaySubsystem) -> SubsystemSpec {
    let (discrete, kernel) = terms_spec(s.delays());
    SubsystemSpec {
        a0: s.a0().to_rows(),
        discrete,
        kernel,
    }
}

fn terms_spec(t: &DelayTerms) -> (Vec<DiscreteSpec>, Option<KernelSpec>) {
    let discrete = t
        .discrete()
        .iter()
        .map(|d| DiscreteSpec {
            delay: d.delay,
            a: d.matrix.to_rows(),
        })
        .collect();
    let kernel = t.kernel().map(|k| KernelSpec {
        grid: k.grid().to_vec(),
        values: k.values().iter().map(Matrix::to_rows).collect(),
    });
    (discrete, kernel)
}

fn structure_spec(q: &StructureQuad) -> StructureSpec {
    StructureSpec {
        d0: q.d0.to_rows(),
        e0: q.e0.to_rows(),
        d1: q.d1.to_rows(),
        e1: q.e1.to_rows(),
    }
}

impl SystemFile {
    pub fn read(path: &Path) -> Result<Self, InputError> {
        read_json(path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Validates every section and builds the analysis objects.
    pub fn to_model(&self) -> Result<Model, InputError> {
        if self.version != SYSTEM_FILE_VERSION {
            return Err(InputError::at(
                "version",
                format!(
                    "unsupported version {}, expected {SYSTEM_FILE_VERSION}",
                    self.version
                ),
            ));
        }
        if self.n == 0 {
            return Err(InputError::at("n", "state dimension must be at least 1"));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(InputError::at("h", "max delay must be positive"));
        }
        if self.subsystems.is_empty() {
            return Err(InputError::at(
                "subsystems",
                "at least one subsystem is required",
            ));
        }
        let subs = self
            .subsystems
            .iter()
            .enumerate()
            .map(|(k, s)| subsystem(s, self.n, self.h, &format!("subsystems[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let system =
            SwitchedDelaySystem::new(self.h, subs).map_err(|e| InputError::at("subsystems", e))?;
        let structure = match &self.perturbation {
            Some(list) => {
                if list.len() != system.len() {
                    return Err(InputError::at(
                        "perturbation",
                        format!("{} entries for {} subsystems", list.len(), system.len()),
                    ));
                }
                let quads = list
                    .iter()
                    .enumerate()
                    .map(|(k, q)| structure_quad(q, self.n, &format!("perturbation[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(
                    PerturbationStructure::new(quads)
                        .map_err(|e| InputError::at("perturbation", e))?,
                )
            }
            None => None,
        };
        let bound = self
            .bound
            .as_ref()
            .map(|b| subsystem(b, self.n, self.h, "bound"))
            .transpose()?;
        let bound_structure = self
            .bound_structure
            .as_ref()
            .map(|q| structure_quad(q, self.n, "bound_structure"))
            .transpose()?;
        Ok(Model {
            system,
            structure,
            bound,
            bound_structure,
        })
    }

    pub fn from_model(model: &Model) -> Self {
        Self {
            version: SYSTEM_FILE_VERSION,
            n: model.system.dim(),
            h: model.system.h(),
            subsystems: model
                .system
                .subsystems()
                .iter()
                .map(subsystem_spec)
                .collect(),
            perturbation: model
                .structure
                .as_ref()
                .map(|p| p.quads().iter().map(structure_spec).collect()),
            bound: model.bound.as_ref().map(subsystem_spec),
            bound_structure: model.bound_structure.as_ref().map(structure_spec),
        }
    }
}

impl DisturbanceFile {
    pub fn read(path: &Path) -> Result<Self, InputError> {
        read_json(path)
    }

    /// Builds a disturbance matching `p`, one term per subsystem.
    pub fn to_disturbance(&self, p: &PerturbationStructure) -> Result<Disturbance, InputError> {
        if self.terms.len() != p.len() {
            return Err(InputError::at(
                "terms",
                format!("{} terms for {} subsystems", self.terms.len(), p.len()),
            ));
        }
        let terms = self
            .terms
            .iter()
            .zip(p.quads())
            .enumerate()
            .map(|(k, (t, q))| {
                let path = format!("terms[{k}]");
                let delta0 = matrix(&t.delta, &format!("{path}.Delta"), Some(q.delta0_shape()))?;
                let delta1 = delay_terms(
                    &t.discrete,
                    t.kernel.as_ref(),
                    Some(q.delta1_shape()),
                    &path,
                )?;
                Ok(DisturbanceTerm { delta0, delta1 })
            })
            .collect::<Result<Vec<_>, InputError>>()?;
        Ok(Disturbance::new(terms))
    }

    pub fn from_disturbance(d: &Disturbance) -> Self {
        let terms = d
            .terms()
            .iter()
            .map(|t| {
                let (discrete, kernel) = terms_spec(&t.delta1);
                DisturbanceTermSpec {
                    delta: t.delta0.to_rows(),
                    discrete,
                    kernel,
                }
            })
            .collect();
        Self { terms }
    }
}
