use std::fmt;
use std::sync::Arc;

use crate::symexpr::{Expr, Scope};

use super::GeomError;

/// An ordered list of coordinate names modelling a patch of R^n.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    name: Arc<str>,
    coords: Arc<[String]>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(name: &str, coords: &[S]) -> Result<Chart, GeomError> {
        if coords.is_empty() {
            return Err(GeomError::EmptyChart(name.to_string()));
        }
        let coords: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(GeomError::DuplicateCoordinate(c.clone()));
            }
        }
        Ok(Chart { name: Arc::from(name), coords: coords.into() })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn coord_expr(&self, i: usize) -> Expr {
        Expr::sym(&self.coords[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    /// Parsing scope over this chart's coordinates.
    pub fn scope<S: AsRef<str>>(&self, functions: &[S]) -> Scope {
        Scope::new(&self.coords).with_functions(functions)
    }

    pub(crate) fn ensure_same(&self, other: &Chart) -> Result<(), GeomError> {
        if self == other {
            Ok(())
        } else {
            Err(GeomError::ChartMismatch { expected: self.name().into(), found: other.name().into() })
        }
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({}: {})", self.name, self.coords.join(", "))
    }
}
