//! Hyperparameter grids.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{MlError, Result};

/// One grid cell: parameter name to value.
pub type Hyperparameters = BTreeMap<String, f64>;

/// Named value lists; cells are the cartesian product in key order, with the
/// last key varying fastest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid(pub BTreeMap<String, Vec<f64>>);

impl Grid {
    pub fn new() -> Self {
        Grid(BTreeMap::new())
    }

    pub fn with(mut self, name: &str, values: &[f64]) -> Self {
        self.0.insert(name.to_string(), values.to_vec());
        self
    }

    pub fn cells(&self) -> Result<Vec<Hyperparameters>> {
        if self.0.is_empty() || self.0.values().any(Vec::is_empty) {
            return Err(MlError::EmptyGrid);
        }
        let mut cells = vec![Hyperparameters::new()];
        for (name, values) in &self.0 {
            let mut next = Vec::with_capacity(cells.len() * values.len());
            for cell in &cells {
                for v in values {
                    let mut c = cell.clone();
                    c.insert(name.clone(), *v);
                    next.push(c);
                }
            }
            cells = next;
        }
        Ok(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_product_in_key_order() {
        let g = Grid::new()
            .with("max_depth", &[3.0, 6.0])
            .with("n_trees", &[10.0, 20.0, 30.0]);
        let cells = g.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0]["max_depth"], 3.0);
        assert_eq!(cells[0]["n_trees"], 10.0);
        assert_eq!(cells[1]["n_trees"], 20.0);
        assert_eq!(cells[3]["max_depth"], 6.0);
    }

    #[test]
    fn empty_grids_are_rejected() {
        assert!(matches!(Grid::new().cells(), Err(MlError::EmptyGrid)));
        assert!(matches!(
            Grid::new().with("c", &[]).cells(),
            Err(MlError::EmptyGrid)
        ));
    }
}
