//! The fixture catalog and run configuration.
//!
//! The catalog is a TOML document; a default copy is compiled in and any
//! other file with the same layout can replace it at run time.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::expr::{parse, symbol, Constraint, DomainBox, Expr, ZeroTestConfig};
use crate::report::OdeError;

pub const DEFAULT_CATALOG: &str = include_str!("../data/catalog.toml");

/// Environment variable naming a run-configuration file.
pub const CONFIG_ENV: &str = "ODECONF_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Stated in the literature.
    Claim,
    /// Computed independently and frozen.
    Derived,
    /// Immediate from the definitions.
    Trivial,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Region {
    #[serde(default, rename = "box")]
    pub bounds: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
}

impl Region {
    pub fn domain(&self) -> Result<DomainBox, OdeError> {
        let mut d = DomainBox::new();
        for b in &self.bounds {
            d.apply_spec(b).map_err(|e| OdeError::Precondition(e.to_string()))?;
        }
        for c in &self.constraints {
            d.add_constraint(Constraint::parse(c).map_err(|e| OdeError::Precondition(e.to_string()))?);
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ode3Entry {
    pub id: String,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(flatten)]
    pub region: Region,
    pub basis: Basis,
    pub expect: Option<String>,
    /// Expected vanishing of `A`, `G` and `C` (all of C1..C5).
    #[serde(default)]
    pub zero: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DkpEntry {
    pub id: String,
    pub u: String,
    #[serde(rename = "X")]
    pub x: Option<String>,
    #[serde(flatten)]
    pub region: Region,
    pub basis: Basis,
    pub solution: bool,
    pub member: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ode2Entry {
    pub id: String,
    #[serde(rename = "Q")]
    pub q: String,
    #[serde(flatten)]
    pub region: Region,
    pub basis: Basis,
    pub expect: String,
    pub w1: Option<String>,
    pub w2: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MongeEntry {
    pub id: String,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(flatten)]
    pub region: Region,
    pub basis: Basis,
    pub expect: String,
    /// For second-order entries: Weyl of the (3,2) metric vanishes.
    pub flat: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionEntry {
    pub id: String,
    /// `monge1` or `monge2`.
    pub equation: String,
    #[serde(rename = "F")]
    pub f: String,
    pub x: String,
    pub y: String,
    pub z: String,
    #[serde(flatten)]
    pub region: Region,
    pub basis: Basis,
    pub verifies: bool,
    /// Perturbed (x, y, z) triples that must fail to verify.
    #[serde(default)]
    pub mutations: Vec<[String; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleVariableEntry {
    pub id: String,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(flatten)]
    pub region: Region,
    pub basis: Basis,
    pub a5: Option<String>,
    pub pattern: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(default)]
    pub ode3: Vec<Ode3Entry>,
    #[serde(default)]
    pub dkp: Vec<DkpEntry>,
    #[serde(default)]
    pub ode2: Vec<Ode2Entry>,
    #[serde(default)]
    pub monge1: Vec<MongeEntry>,
    #[serde(default)]
    pub monge2: Vec<MongeEntry>,
    #[serde(default)]
    pub solution: Vec<SolutionEntry>,
    #[serde(default)]
    pub single_variable: Vec<SingleVariableEntry>,
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Catalog, OdeError> {
        let c: Catalog = toml::from_str(text).map_err(|e| OdeError::Precondition(format!("catalog: {}", e)))?;
        c.check_ids()?;
        Ok(c)
    }

    pub fn builtin() -> Catalog {
        Catalog::parse(DEFAULT_CATALOG).expect("bundled catalog parses")
    }

    pub fn load(path: Option<&Path>) -> Result<Catalog, OdeError> {
        match path {
            None => Ok(Catalog::builtin()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| OdeError::Precondition(format!("{}: {}", p.display(), e)))?;
                Catalog::parse(&text)
            }
        }
    }

    pub fn ode3_entry(&self, id: &str) -> Option<&Ode3Entry> {
        self.ode3.iter().find(|e| e.id == id)
    }

    fn check_ids(&self) -> Result<(), OdeError> {
        let mut seen = std::collections::HashSet::new();
        let ids = self
            .ode3
            .iter()
            .map(|e| ("ode3", &e.id))
            .chain(self.dkp.iter().map(|e| ("dkp", &e.id)))
            .chain(self.ode2.iter().map(|e| ("ode2", &e.id)))
            .chain(self.monge1.iter().map(|e| ("monge1", &e.id)))
            .chain(self.monge2.iter().map(|e| ("monge2", &e.id)))
            .chain(self.solution.iter().map(|e| ("solution", &e.id)))
            .chain(self.single_variable.iter().map(|e| ("single_variable", &e.id)));
        for (section, id) in ids {
            if !seen.insert((section, id.clone())) {
                return Err(OdeError::Precondition(format!("catalog: duplicate id `{}` in [{}]", id, section)));
            }
        }
        Ok(())
    }
}

/// Parses `text` and substitutes the numeric parameters.
pub fn formula(text: &str, params: &BTreeMap<String, String>) -> Result<Expr, OdeError> {
    let e = parse(text).map_err(|e| OdeError::Precondition(format!("`{}`: {}", text, e)))?;
    if params.is_empty() {
        return Ok(e);
    }
    let mut b = HashMap::new();
    for (k, v) in params {
        let val = parse(v).map_err(|e| OdeError::Precondition(format!("parameter {}: {}", k, e)))?;
        if !val.symbols().is_empty() {
            return Err(OdeError::Precondition(format!("parameter {} must be a number", k)));
        }
        b.insert(symbol(k), val);
    }
    Ok(e.substitute(&b))
}

/// Tolerance, sampling and catalog location for a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub catalog: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let z = ZeroTestConfig::default();
        RunConfig { tol: z.tol, samples: z.samples, seed: z.seed, catalog: None }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.tol > 0.0) {
            return Err(OdeError::Precondition(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.samples < 5 {
            return Err(OdeError::Precondition(format!("at least 5 samples are needed, got {}", self.samples)));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<RunConfig, OdeError> {
        let c: RunConfig = toml::from_str(text).map_err(|e| OdeError::Precondition(format!("config: {}", e)))?;
        c.validate()?;
        Ok(c)
    }

    /// The file named by `ODECONF_CONFIG`, or defaults.
    pub fn from_env() -> Result<RunConfig, OdeError> {
        match std::env::var_os(CONFIG_ENV) {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text =
                    std::fs::read_to_string(&p).map_err(|e| OdeError::Precondition(format!("{}: {}", Path::new(&p).display(), e)))?;
                RunConfig::from_toml(&text)
            }
        }
    }

    pub fn zero_test(&self) -> ZeroTestConfig {
        ZeroTestConfig { samples: self.samples, seed: self.seed, tol: self.tol, ..Default::default() }
    }
}
