use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{symbol, Expr, Symbol};

use super::ExteriorError;

/// An ordered list of coordinate symbols.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    name: String,
    coords: Vec<Symbol>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<&str> = self.coords.iter().map(|c| &**c).collect();
        write!(f, "{}({})", self.name, cs.join(","))
    }
}

impl Chart {
    pub fn new(name: &str, coords: &[&str]) -> Result<Arc<Chart>, ExteriorError> {
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(ExteriorError::DuplicateCoordinate(c.to_string()));
            }
        }
        Ok(Arc::new(Chart { name: name.to_string(), coords: coords.iter().map(|c| symbol(c)).collect() }))
    }

    /// Jet coordinates of a third-order equation y''' = F(x, y, p, q).
    pub fn j2_third() -> Arc<Chart> {
        Chart::new("J2_3rd", &["x", "y", "p", "q"]).unwrap()
    }

    /// First jets of a second-order equation plus a fiber coordinate.
    pub fn j1_ext() -> Arc<Chart> {
        Chart::new("J1ext", &["x", "y", "p", "phi"]).unwrap()
    }

    pub fn monge1() -> Arc<Chart> {
        Chart::new("Monge1", &["x", "y", "p", "z"]).unwrap()
    }

    pub fn monge2() -> Arc<Chart> {
        Chart::new("Monge2", &["x", "y", "p", "q", "z"]).unwrap()
    }

    pub fn dkp() -> Arc<Chart> {
        Chart::new("DKP", &["x", "y", "t", "v"]).unwrap()
    }

    /// The standard charts, by name.
    pub fn standard(name: &str) -> Option<Arc<Chart>> {
        match name {
            "J2_3rd" => Some(Chart::j2_third()),
            "J1ext" => Some(Chart::j1_ext()),
            "Monge1" => Some(Chart::monge1()),
            "Monge2" => Some(Chart::monge2()),
            "DKP" => Some(Chart::dkp()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| &**c == name)
    }

    pub fn coord(&self, i: usize) -> Expr {
        Expr::from_symbol(&self.coords[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_charts() {
        assert_eq!(Chart::monge2().dim(), 5);
        assert_eq!(Chart::dkp().index_of("t"), Some(2));
        assert!(Chart::new("bad", &["x", "x"]).is_err());
    }
}
