//! Exact Gaussian elimination over the rationals, enough to measure ranks and
//! solution-space dimensions of the linear systems that arise from
//! finite-difference and parallelogram constraints.

use num_traits::Zero;

use crate::phase::Rat;

/// Incremental row reducer: rows are folded in one at a time and the running
/// basis stays in reduced echelon form, so the rank is available at any point.
pub struct RowReducer {
    cols: usize,
    pivots: Vec<usize>,
    basis: Vec<Vec<Rat>>,
}

impl RowReducer {
    pub fn new(cols: usize) -> Self {
        RowReducer {
            cols,
            pivots: Vec::new(),
            basis: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.cols
    }

    /// Reduces the row against the basis; returns true if it added rank.
    pub fn insert(&mut self, mut row: Vec<Rat>) -> bool {
        assert_eq!(row.len(), self.cols);
        for (pivot, basis_row) in self.pivots.iter().zip(&self.basis) {
            if !row[*pivot].is_zero() {
                let factor = row[*pivot].clone();
                for (r, b) in row.iter_mut().zip(basis_row) {
                    *r -= &factor * b;
                }
            }
        }
        let lead = match row.iter().position(|v| !v.is_zero()) {
            Some(i) => i,
            None => return false,
        };
        let lead_value = row[lead].clone();
        for v in row.iter_mut() {
            *v /= &lead_value;
        }
        // Back-substitute into the existing basis to keep it reduced.
        for (pivot, basis_row) in self.pivots.iter().zip(self.basis.iter_mut()) {
            let _ = pivot;
            if !basis_row[lead].is_zero() {
                let factor = basis_row[lead].clone();
                for (b, r) in basis_row.iter_mut().zip(&row) {
                    *b -= &factor * r;
                }
            }
        }
        self.pivots.push(lead);
        self.basis.push(row);
        true
    }
}

impl RowReducer {
    /// Basis of the solution space of the accumulated homogeneous system:
    /// one vector per free column, read off the reduced echelon form.
    pub fn nullspace_basis(&self) -> Vec<Vec<Rat>> {
        use num_traits::One;
        let pivot_set: std::collections::BTreeSet<usize> = self.pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut vector = vec![Rat::zero(); self.cols];
            vector[free] = Rat::one();
            for (pivot, row) in self.pivots.iter().zip(&self.basis) {
                vector[*pivot] = -row[free].clone();
            }
            basis.push(vector);
        }
        basis
    }
}

/// Rank of a dense rational matrix.
pub fn rank(rows: impl IntoIterator<Item = Vec<Rat>>, cols: usize) -> usize {
    let mut reducer = RowReducer::new(cols);
    for row in rows {
        reducer.insert(row);
        if reducer.is_full_rank() {
            break;
        }
    }
    reducer.rank()
}

/// Dimension of the solution space of a homogeneous system.
pub fn nullspace_dimension(rows: impl IntoIterator<Item = Vec<Rat>>, cols: usize) -> usize {
    cols - rank(rows, cols)
}
