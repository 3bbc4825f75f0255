//! Admissible path enumeration, block-count statistics and the design matrix.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{path_monomial_unchecked, symbolic_path_monomial, ExponentVector, Model, ParameterPoint, Path, Symbol};

/// Admissible length-`n` paths in strict lexicographic order of state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTable {
    paths: Vec<Path>,
    index: HashMap<Path, usize>,
}

impl PathTable {
    pub fn from_paths(paths: Vec<Path>) -> Self {
        let index = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        PathTable { paths, index }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn get(&self, index: usize) -> Result<&Path> {
        self.paths
            .get(index)
            .ok_or(Error::IndexOutOfRange { index, len: self.paths.len() })
    }

    pub fn index_of(&self, path: &[usize]) -> Option<usize> {
        self.index.get(path).copied()
    }

    /// `phi(theta)`: the exact probability of every path in the table.
    pub fn probabilities(&self, model: &Model, params: &ParameterPoint) -> Vec<BigRational> {
        self.paths.iter().map(|p| params.evaluate(model, p)).collect()
    }

    /// One path per line, comma-separated labels.
    pub fn to_text(&self, model: &Model) -> String {
        self.paths.iter().map(|p| model.path_csv(p) + "\n").collect()
    }
}

fn extend(model: &Model, prefix: &mut Path, out: &mut Vec<Path>) {
    if prefix.len() == model.horizon() {
        out.push(prefix.clone());
        return;
    }
    let history = &prefix[prefix.len() - model.order()..];
    for &next in model.allowed_next(history) {
        prefix.push(next);
        extend(model, prefix, out);
        prefix.pop();
    }
}

/// Depth-first enumeration from each allowed initial block. Blocks are
/// explored in parallel and concatenated in lexicographic order.
pub fn enumerate_paths(model: &Model) -> PathTable {
    let chunks: Vec<Vec<Path>> = model
        .initial_blocks()
        .par_iter()
        .map(|block| {
            let mut out = Vec::new();
            let mut prefix = block.clone();
            extend(model, &mut prefix, &mut out);
            out
        })
        .collect();
    PathTable::from_paths(chunks.concat())
}

/// Paths of the unrestricted companion model that the given model forbids.
pub fn inadmissible_paths(model: &Model) -> Vec<Path> {
    enumerate_paths(&model.companion())
        .paths
        .into_iter()
        .filter(|p| !model.is_admissible(p))
        .collect()
}

/// Block counts of a path: the initial `k`-block plus each `(k+1)`-window,
/// pooled over time when the model is homogeneous.
pub type SufficientStats = ExponentVector;

pub fn block_counts(model: &Model, path: &[usize]) -> Result<SufficientStats> {
    symbolic_path_monomial(model, path)
}

/// Toric design matrix: one row per parameter symbol, one column per path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignMatrix {
    rows: Vec<Symbol>,
    num_cols: usize,
    /// Column-major entries.
    entries: Vec<u32>,
}

impl DesignMatrix {
    pub fn rows(&self) -> &[Symbol] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn column(&self, col: usize) -> &[u32] {
        let r = self.rows.len();
        &self.entries[col * r..(col + 1) * r]
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.entries[col * self.rows.len() + row]
    }

    pub fn row_labels(&self, model: &Model) -> Vec<String> {
        self.rows.iter().map(|s| model.format_symbol(s)).collect()
    }

    /// `A v` for a sparse integer vector given as `(column, value)` pairs.
    pub fn apply_sparse(&self, v: &[(usize, BigInt)]) -> Result<Vec<BigInt>> {
        let mut out = vec![BigInt::from(0); self.rows.len()];
        for (col, value) in v {
            if *col >= self.num_cols {
                return Err(Error::IndexOutOfRange { index: *col, len: self.num_cols });
            }
            for (acc, &a) in out.iter_mut().zip(self.column(*col)) {
                if a != 0 {
                    *acc += value * a;
                }
            }
        }
        Ok(out)
    }

    /// `A v` for a dense rational vector.
    pub fn apply_rational(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        if v.len() != self.num_cols {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} entries, design matrix has {} columns",
                v.len(),
                self.num_cols
            )));
        }
        let mut out = vec![BigRational::from_integer(0.into()); self.rows.len()];
        for (col, value) in v.iter().enumerate() {
            for (acc, &a) in out.iter_mut().zip(self.column(col)) {
                if a != 0 {
                    *acc += value * BigRational::from_integer(a.into());
                }
            }
        }
        Ok(out)
    }
}

pub fn build_design_matrix(model: &Model, table: &PathTable) -> DesignMatrix {
    let rows = model.symbols();
    let row_index: HashMap<&Symbol, usize> = rows.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut entries = vec![0u32; rows.len() * table.len()];
    for (col, path) in table.paths().iter().enumerate() {
        for (symbol, count) in path_monomial_unchecked(model, path) {
            entries[col * rows.len() + row_index[&symbol]] = count;
        }
    }
    DesignMatrix { num_cols: table.len(), rows, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;

    fn keys(model: &Model, table: &PathTable) -> Vec<String> {
        table.paths().iter().map(|p| model.path_key(p)).collect()
    }

    #[test]
    fn illness_death_has_fourteen_paths() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        assert_eq!(
            keys(&m, &t),
            [
                "0000", "0001", "0002", "0011", "0012", "0022", "0111", "0112", "0122", "0222",
                "1111", "1112", "1122", "1222"
            ]
        );
        assert_eq!(t.index_of(&[0, 1, 2, 2]), Some(8));
        assert_eq!(inadmissible_paths(&m).len(), 67);
    }

    #[test]
    fn unrestricted_counts() {
        assert_eq!(enumerate_paths(&catalog::unrestricted(3, 1, 4, false)).len(), 81);
        assert_eq!(enumerate_paths(&catalog::unrestricted(1, 1, 5, false)).len(), 1);
        assert_eq!(enumerate_paths(&catalog::unrestricted(2, 2, 5, true)).len(), 32);
    }

    #[test]
    fn block_counts_pool_windows() {
        let m = catalog::illness_death(4, true);
        let stats = block_counts(&m, &[1, 1, 1, 1]).unwrap();
        assert_eq!(stats.len(), 2);
        assert_eq!(stats[&Symbol::Transition { time: None, window: vec![1, 1] }], 3);
        assert!(block_counts(&m, &[1, 0, 0, 0]).is_err());

        let non = catalog::illness_death(4, false);
        let stats = block_counts(&non, &[1, 1, 1, 1]).unwrap();
        assert!(stats.values().all(|&c| c == 1));
        assert_eq!(stats.len(), 4);
    }

    #[test]
    fn binary_design_matrix_shape() {
        let m = catalog::unrestricted(2, 1, 3, true);
        let t = enumerate_paths(&m);
        let a = build_design_matrix(&m, &t);
        assert_eq!((a.num_rows(), a.num_cols()), (6, 8));
        assert_eq!(a.row_labels(&m), ["pi_0", "pi_1", "a_00", "a_01", "a_10", "a_11"]);
        let col = t.index_of(&[0, 1, 1]).unwrap();
        assert_eq!(a.column(col), &[1, 0, 0, 1, 0, 1]);

        let non = m.with_homogeneous(false);
        let a = build_design_matrix(&non, &t);
        assert_eq!((a.num_rows(), a.num_cols()), (10, 8));
        for c in 0..8 {
            assert_eq!(a.column(c).iter().sum::<u32>(), 3);
            assert!(a.column(c).iter().all(|&x| x <= 1));
        }
    }
}
