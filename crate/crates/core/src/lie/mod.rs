//! Lie algebras of the flat models: structure constants, Jacobi and Killing
//! analysis, and closure and invariant forms of the connection matrices.
//!
//! Everything is exact over ℚ(√3).

mod field;
mod linalg;
mod matrix;
pub mod systems;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use field::Q3;
pub use linalg::{identity, inertia, nullspace, rank, Inertia, Matrix};
pub use matrix::{BilinearFormReport, ClosureReport, MatrixBasis, ThreeFormReport};
pub use table::{JacobiReport, JacobiViolation, KillingReport, StructureTable};

use crate::exterior::ExteriorError;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("unknown generator `{0}`")]
    UnknownLabel(String),
    #[error("`{0}` is not a constant-coefficient linear combination of generators")]
    NotLinear(String),
    #[error("expected {expected} generators, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("unknown system `{0}`; expected one of syspoint, g2-flat, conpoint, caln, ccg2")]
    UnknownSystem(String),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

/// Flat coframe systems given by structure equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatSystem {
    /// Third-order equations under point transformations (7 forms).
    Point,
    /// Monge equations z' = F(x, y, y', y'', z) under contact transformations (14 forms).
    G2,
}

/// Matrix-valued connections of the flat models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connection {
    /// 5×5, point geometry of third-order equations.
    Point,
    /// 8×8 normal conformal connection of the six-dimensional metric.
    PointNormal,
    /// 7×7 connection of the (3,2) metric.
    G2,
}

pub fn flat_structure_constants(system: FlatSystem) -> StructureTable {
    let t = match system {
        FlatSystem::Point => StructureTable::from_system(&systems::POINT_LABELS, systems::POINT_FLAT),
        FlatSystem::G2 => StructureTable::from_system(&systems::G2_LABELS, systems::G2_FLAT),
    };
    t.expect("bundled structure equations parse")
}

pub fn matrix_rep(connection: Connection) -> MatrixBasis {
    fn rows<const N: usize>(m: &'static [[&'static str; N]; N]) -> Vec<&'static [&'static str]> {
        m.iter().map(|r| r.as_slice()).collect()
    }
    let b = match connection {
        Connection::Point => MatrixBasis::from_connection(&systems::POINT_LABELS, &rows(&systems::POINT_CONNECTION)),
        Connection::PointNormal => MatrixBasis::from_connection(&systems::POINT_LABELS, &rows(&systems::POINT_NORMAL_CONNECTION)),
        Connection::G2 => MatrixBasis::from_connection(&systems::G2_LABELS, &rows(&systems::G2_CONNECTION)),
    };
    b.expect("bundled connection matrices parse")
}

/// Names accepted by `lie verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LieSystem {
    Syspoint,
    G2Flat,
    Conpoint,
    Caln,
    Ccg2,
}

impl LieSystem {
    pub const ALL: [LieSystem; 5] = [LieSystem::Syspoint, LieSystem::G2Flat, LieSystem::Conpoint, LieSystem::Caln, LieSystem::Ccg2];

    pub fn name(self) -> &'static str {
        match self {
            LieSystem::Syspoint => "syspoint",
            LieSystem::G2Flat => "g2-flat",
            LieSystem::Conpoint => "conpoint",
            LieSystem::Caln => "caln",
            LieSystem::Ccg2 => "ccg2",
        }
    }
}

impl fmt::Display for LieSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LieSystem {
    type Err = LieError;
    fn from_str(s: &str) -> Result<LieSystem, LieError> {
        LieSystem::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| LieError::UnknownSystem(s.into()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixSummary {
    pub size: usize,
    pub independent: bool,
    pub closure: ClosureReport,
    /// Induced constants equal those of the flat coframe system, by label.
    pub matches_flat_system: Option<bool>,
    pub invariant_bilinear_form: BilinearFormReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_three_form: Option<ThreeFormReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LieReport {
    pub system: String,
    pub dimension: usize,
    pub antisymmetric: bool,
    pub jacobi: JacobiReport,
    /// Labels whose d(dθ) fails to vanish, computed with exterior forms.
    pub d_squared_failures: Vec<String>,
    pub killing: KillingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatrixSummary>,
    pub brackets: Vec<String>,
}

impl LieReport {
    /// Jacobi and d² agree and, for matrix systems, the basis is independent and closes.
    pub fn consistent(&self) -> bool {
        self.jacobi.holds == self.d_squared_failures.is_empty() && self.matrices.as_ref().is_none_or(|m| m.independent && m.closure.closed)
    }
}

fn table_report(system: LieSystem, t: &StructureTable, matrices: Option<MatrixSummary>) -> Result<LieReport, LieError> {
    Ok(LieReport {
        system: system.name().into(),
        dimension: t.dim(),
        antisymmetric: t.is_antisymmetric(),
        jacobi: t.jacobi_check(),
        d_squared_failures: t.d_squared_check()?,
        killing: t.killing_analysis(),
        matrices,
        brackets: t.brackets(),
    })
}

pub fn verify(system: LieSystem) -> Result<LieReport, LieError> {
    let (connection, flat) = match system {
        LieSystem::Syspoint => return table_report(system, &flat_structure_constants(FlatSystem::Point), None),
        LieSystem::G2Flat => return table_report(system, &flat_structure_constants(FlatSystem::G2), None),
        LieSystem::Conpoint => (Connection::Point, FlatSystem::Point),
        LieSystem::Caln => (Connection::PointNormal, FlatSystem::Point),
        LieSystem::Ccg2 => (Connection::G2, FlatSystem::G2),
    };
    let b = matrix_rep(connection);
    let closure = b.commutator_closure_check();
    let table = closure.table.clone();
    let matches_flat_system = table.as_ref().map(|t| t.same_brackets(&flat_structure_constants(flat)));
    let summary = MatrixSummary {
        size: b.size(),
        independent: b.is_independent(),
        closure,
        matches_flat_system,
        invariant_bilinear_form: b.invariant_bilinear_form(),
        invariant_three_form: (b.size() == 7).then(|| b.invariant_three_form()),
    };
    let t = table.unwrap_or_else(|| StructureTable::zero(b.labels().to_vec()));
    table_report(system, &t, Some(summary))
}
