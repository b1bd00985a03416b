//! Dense two-phase simplex for the small linear programs behind the grasp
//! metrics.
//!
//! Solves `min c·x` subject to `A_eq x = b_eq`, `A_le x <= b_le`, `x >= 0`.
//! Problems here have a handful of rows (six equilibrium equations plus a
//! couple of rows per contact), so a dense tableau is the right tool. Bland's
//! rule is used for every pivot, which rules out cycling on the degenerate
//! bases these equilibrium problems frequently produce.

use thiserror::Error;

/// Pivoting / reduced-cost tolerance.
const TOL: f64 = 1e-9;
/// Smallest acceptable pivot magnitude.
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Eq,
    Le,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, RowKind, f64)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual values per constraint row, in insertion order; `None` when a
    /// redundant row had to be dropped during phase 1.
    pub duals: Option<Vec<f64>>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, c: Vec<f64>) {
        assert_eq!(c.len(), self.num_vars);
        self.objective = c;
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push((coeffs, RowKind::Eq, rhs));
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push((coeffs, RowKind::Le, rhs));
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    /// `rows x (cols + 1)`; the trailing entry of each row is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Original row index per tableau row (rows can be dropped as redundant).
    row_ids: Vec<usize>,
    /// Sign-normalized constraint rows (structural columns) and rhs, kept
    /// pristine for the final refactorization and the dual solve.
    norm_rows: Vec<Vec<f64>>,
    norm_rhs: Vec<f64>,
    signs: Vec<f64>,
    /// Original row index of each artificial column.
    artificial_rows: Vec<usize>,
    num_structural: usize, // original vars + slacks
    num_artificial: usize,
    dropped_rows: bool,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let num_slack = lp
            .rows
            .iter()
            .filter(|(_, kind, _)| *kind == RowKind::Le)
            .count();
        let num_structural = n + num_slack;

        // lay rows out with slack columns, then normalize rhs >= 0
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(lp.rows.len());
        let mut signs = Vec::with_capacity(lp.rows.len());
        let mut slack = 0;
        for (coeffs, kind, rhs) in &lp.rows {
            let mut row = vec![0.0; num_structural];
            row[..n].copy_from_slice(coeffs);
            if *kind == RowKind::Le {
                row[n + slack] = 1.0;
                slack += 1;
            }
            let mut rhs = *rhs;
            let mut sign = 1.0;
            if rhs < 0.0 {
                for c in &mut row {
                    *c = -*c;
                }
                rhs = -rhs;
                sign = -1.0;
            }
            signs.push(sign);
            rows.push((row, rhs));
        }

        // a row whose slack survived normalization starts basic in the slack;
        // everything else gets an artificial
        let mut t = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut artificials = Vec::new();
        for (i, (row, _)) in rows.iter().enumerate() {
            let natural = (n..num_structural).find(|&j| row[j] == 1.0);
            match natural {
                Some(j) => basis.push(j),
                None => {
                    artificials.push(i);
                    basis.push(num_structural + artificials.len() - 1);
                }
            }
            t.push(row.clone());
        }
        let num_artificial = artificials.len();
        for &i in &artificials {
            for row in t.iter_mut() {
                row.push(0.0);
            }
            let col = t[i].len() - 1;
            t[i][col] = 1.0;
        }
        for (row, (_, rhs)) in t.iter_mut().zip(&rows) {
            row.push(*rhs);
        }

        let (norm_rows, norm_rhs) = rows.into_iter().unzip();
        Tableau {
            t,
            basis,
            row_ids: (0..lp.rows.len()).collect(),
            norm_rows,
            norm_rhs,
            signs,
            artificial_rows: artificials,
            num_structural,
            num_artificial,
            dropped_rows: false,
        }
    }

    /// Entry of the pristine constraint matrix: structural columns come from
    /// the normalized rows, artificial columns are unit vectors on their
    /// home row.
    fn original_entry(&self, row_id: usize, col: usize) -> f64 {
        if col < self.num_structural {
            self.norm_rows[row_id][col]
        } else if self.artificial_rows[col - self.num_structural] == row_id {
            1.0
        } else {
            0.0
        }
    }

    /// Rebuilds the tableau as `B^{-1} [A | b]` by fresh elimination on the
    /// input data. Pivot round-off otherwise accumulates over the solve and
    /// can corrupt the ratio test badly enough to walk the basis out of the
    /// feasible region.
    #[allow(clippy::needless_range_loop)]
    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.t.len();
        let total_cols = self.cols();
        let width = m + total_cols + 1;
        let mut aug = vec![vec![0.0; width]; m];
        for (r, &rid) in self.row_ids.iter().enumerate() {
            for (i, &bj) in self.basis.iter().enumerate() {
                aug[r][i] = self.original_entry(rid, bj);
            }
            for j in 0..total_cols {
                aug[r][m + j] = self.original_entry(rid, j);
            }
            aug[r][width - 1] = self.norm_rhs[rid];
        }
        // Gauss-Jordan on the basis block; afterwards row i carries the
        // basic variable basis[i]
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&x, &y| aug[x][col].abs().partial_cmp(&aug[y][col].abs()).unwrap())
                .unwrap();
            let p = aug[piv][col];
            if p.abs() < 1e-12 || !p.is_finite() {
                return Err(LpError::Numerical("singular basis".into()));
            }
            aug.swap(col, piv);
            let inv = 1.0 / p;
            for k in col..width {
                aug[col][k] *= inv;
            }
            for r in 0..m {
                if r != col {
                    let f = aug[r][col];
                    if f != 0.0 {
                        for k in col..width {
                            aug[r][k] -= f * aug[col][k];
                        }
                        aug[r][col] = 0.0;
                    }
                }
            }
        }
        for (r, row) in aug.iter().enumerate() {
            self.t[r][..total_cols].copy_from_slice(&row[m..m + total_cols]);
            let rhs_slot = self.t[r].len() - 1;
            self.t[r][rhs_slot] = row[width - 1];
        }
        Ok(())
    }

    fn cols(&self) -> usize {
        self.num_structural + self.num_artificial
    }

    fn rhs(&self, r: usize) -> f64 {
        *self.t[r].last().unwrap()
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<(), LpError> {
        let p = self.t[r][c];
        if p.abs() < PIVOT_TOL || !p.is_finite() {
            return Err(LpError::Numerical(format!("pivot {p} at ({r},{c})")));
        }
        let inv = 1.0 / p;
        for v in &mut self.t[r] {
            *v *= inv;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        Ok(())
    }

    /// One simplex phase under Bland's rule. `cost` indexes all columns.
    fn run(&mut self, cost: &[f64], allow_artificial: bool) -> Result<(), LpError> {
        let max_col = if allow_artificial {
            self.cols()
        } else {
            self.num_structural
        };
        let max_iter = 400 * (self.t.len() + self.cols() + 10);
        let mut pivots_since_refactor = 0usize;
        for _ in 0..max_iter {
            if pivots_since_refactor >= 25 {
                self.refactorize()?;
                pivots_since_refactor = 0;
            }
            // reduced costs from scratch each iteration: cheap at this size
            // and immune to cost-row drift
            let entering = (0..max_col).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut rc = cost[j];
                for (i, row) in self.t.iter().enumerate() {
                    let cb = cost[self.basis[i]];
                    if cb != 0.0 {
                        rc -= cb * row[j];
                    }
                }
                rc < -TOL
            });
            let Some(j) = entering else {
                return Ok(());
            };

            let mut leaving: Option<(f64, usize, usize)> = None; // ratio, basis var, row
            for i in 0..self.t.len() {
                let a = self.t[i][j];
                if a > TOL {
                    let ratio = self.rhs(i) / a;
                    let key = (ratio, self.basis[i]);
                    if leaving.is_none_or(|(br, bv, _)| key < (br, bv)) {
                        leaving = Some((ratio, self.basis[i], i));
                    }
                }
            }
            let Some((_, _, r)) = leaving else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, j)?;
            pivots_since_refactor += 1;

            if self.t[r].iter().any(|v| !v.is_finite()) {
                return Err(LpError::Numerical("non-finite tableau entry".into()));
            }
        }
        Err(LpError::Numerical("iteration limit".into()))
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let scale = 1.0
            + self
                .t
                .iter()
                .map(|row| row.last().unwrap().abs())
                .fold(0.0, f64::max);

        if self.num_artificial > 0 {
            let mut cost = vec![0.0; self.cols()];
            for c in cost.iter_mut().skip(self.num_structural) {
                *c = 1.0;
            }
            self.run(&cost, true)?;
            self.refactorize()?;
            let infeasibility: f64 = (0..self.t.len())
                .filter(|&i| self.basis[i] >= self.num_structural)
                .map(|i| self.rhs(i))
                .sum();
            if infeasibility > TOL * scale {
                return Err(LpError::Infeasible);
            }
            self.evict_artificials()?;
            self.refactorize()?;
        }

        let mut cost = vec![0.0; self.cols()];
        cost[..lp.num_vars].copy_from_slice(&lp.objective);
        self.run(&cost, false)?;

        // final refactorization: the tableau rhs carries accumulated pivot
        // round-off, so re-solve B x_B = b from the pristine rows
        let mut x = vec![0.0; self.num_structural];
        let basic_values = self
            .refactorized_basic_values()
            .ok_or_else(|| LpError::Numerical("singular basis at optimum".into()))?;
        for (i, &b) in self.basis.iter().enumerate() {
            if basic_values[i] < -1e-7 * scale {
                return Err(LpError::Numerical(format!(
                    "basis infeasible by {:.3e} after refactorization",
                    -basic_values[i]
                )));
            }
            if b < self.num_structural {
                x[b] = basic_values[i].max(0.0);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
        let duals = if self.dropped_rows {
            None
        } else {
            self.compute_duals(lp)
        };
        x.truncate(lp.num_vars);
        Ok(LpSolution {
            x,
            objective,
            duals,
        })
    }

    /// Solves `B x_B = b` over the surviving rows with fresh elimination on
    /// the input data, discarding tableau drift.
    fn refactorized_basic_values(&self) -> Option<Vec<f64>> {
        let m = self.t.len();
        let mut a = vec![vec![0.0; m + 1]; m];
        for (r, &row_id) in self.row_ids.iter().enumerate() {
            for (i, &bj) in self.basis.iter().enumerate() {
                a[r][i] = self.norm_rows[row_id][bj];
            }
            a[r][m] = self.norm_rhs[row_id];
        }
        solve_dense(a)
    }

    /// After phase 1, swaps basic artificials for structural columns, or
    /// drops the (redundant) row when no structural pivot exists.
    fn evict_artificials(&mut self) -> Result<(), LpError> {
        let mut r = 0;
        while r < self.t.len() {
            if self.basis[r] >= self.num_structural {
                let pivot_col = (0..self.num_structural)
                    .max_by(|&a, &b| self.t[r][a].abs().partial_cmp(&self.t[r][b].abs()).unwrap())
                    .filter(|&j| self.t[r][j].abs() > 1e-7);
                match pivot_col {
                    Some(j) => self.pivot(r, j)?,
                    None => {
                        self.t.remove(r);
                        self.basis.remove(r);
                        self.row_ids.remove(r);
                        self.dropped_rows = true;
                        continue;
                    }
                }
            }
            r += 1;
        }
        // artificial columns are dead from here on; truncate them away
        for row in &mut self.t {
            let rhs = *row.last().unwrap();
            row.truncate(self.num_structural);
            row.push(rhs);
        }
        self.num_artificial = 0;
        Ok(())
    }

    /// Duals from B^T y = c_B, with B taken from the normalized input rows.
    #[allow(clippy::needless_range_loop)]
    fn compute_duals(&self, lp: &LinearProgram) -> Option<Vec<f64>> {
        let m = self.t.len();
        let n = lp.num_vars;
        // B^T y = c_B: equation i reads sum_r B[r][basis_i] y_r = c_{basis_i}
        let mut a = vec![vec![0.0; m + 1]; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            for r in 0..m {
                a[i][r] = self.norm_rows[r][bj];
            }
            a[i][m] = if bj < n { lp.objective[bj] } else { 0.0 };
        }
        let mut y = solve_dense(a)?;
        // undo the rhs sign normalization so duals refer to the caller's rows
        for (yi, s) in y.iter_mut().zip(&self.signs) {
            *yi *= s;
        }
        Some(y)
    }
}

/// Gauss-Jordan with partial pivoting on an augmented square system.
#[allow(clippy::needless_range_loop)]
fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let piv =
            (col..m).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=m {
                        a[r][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    Some((0..m).map(|r| a[r][m] / a[r][r]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_two_var_max() {
        // max x + 2y s.t. x + y <= 4, x <= 2  ->  (0, 4), value 8
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![-1.0, -2.0]);
        lp.add_le(vec![1.0, 1.0], 4.0);
        lp.add_le(vec![1.0, 0.0], 2.0);
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, -8.0, epsilon = 1e-9);
        assert_relative_eq!(s.x[1], 4.0, epsilon = 1e-9);
    }

    #[test]
    fn solves_with_equalities() {
        // min x + y s.t. x + 2y = 3, x <= y: optimum (0, 1.5) -> 1.5
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, 2.0], 3.0);
        lp.add_le(vec![1.0, -1.0], 0.0);
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, 1.5, epsilon = 1e-9);
        assert_relative_eq!(s.x[0] + 2.0 * s.x[1], 3.0, epsilon = 1e-9);
        assert!(s.x[0] <= s.x[1] + 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x + y = -1 with x, y >= 0
        let mut lp = LinearProgram::new(2);
        lp.add_eq(vec![1.0, 1.0], -1.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![-1.0, 0.0]);
        lp.add_le(vec![0.0, 1.0], 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // the classic cycling instance; Bland's rule must terminate at -0.05
        let mut lp = LinearProgram::new(4);
        lp.set_objective(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0);
        lp.add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0);
        lp.add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, -0.05, epsilon = 1e-9);
    }

    #[test]
    fn negative_rhs_le_needs_artificial() {
        // x >= 2 encoded as -x <= -2, minimize x -> 2
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![1.0]);
        lp.add_le(vec![-1.0], -2.0);
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn redundant_equality_rows_are_dropped() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 0.0]);
        lp.add_eq(vec![1.0, 1.0], 2.0);
        lp.add_eq(vec![2.0, 2.0], 4.0); // same constraint twice
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.objective, 0.0, epsilon = 1e-9);
        assert!(s.duals.is_none());
    }

    #[test]
    fn duality_gap_vanishes_on_random_feasible_lps() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..50 {
            let n = rng.random_range(2..6);
            let m_eq = rng.random_range(1..3.min(n));
            let m_le = rng.random_range(1..4);
            let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
            let mut lp = LinearProgram::new(n);
            lp.set_objective((0..n).map(|_| rng.random_range(-1.0..2.0)).collect());
            for _ in 0..m_eq {
                let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let rhs = row.iter().zip(&x0).map(|(a, b)| a * b).sum();
                lp.add_eq(row, rhs);
            }
            for _ in 0..m_le {
                let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let rhs: f64 = row.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>()
                    + rng.random_range(0.0..1.0);
                lp.add_le(row, rhs);
            }
            // bounded by construction: add a box
            for j in 0..n {
                let mut row = vec![0.0; n];
                row[j] = 1.0;
                lp.add_le(row, 10.0);
            }
            let s = match lp.solve() {
                Ok(s) => s,
                Err(LpError::Infeasible) => panic!("trial {trial}: feasible by construction"),
                Err(e) => panic!("trial {trial}: {e}"),
            };
            if let Some(duals) = &s.duals {
                let b_dot_y: f64 = lp
                    .rows
                    .iter()
                    .zip(duals)
                    .map(|((_, _, rhs), y)| rhs * y)
                    .sum();
                assert!(
                    (s.objective - b_dot_y).abs() <= 1e-8 * (1.0 + s.objective.abs()),
                    "trial {trial}: gap {} vs {}",
                    s.objective,
                    b_dot_y
                );
            }
            // primal feasibility of the reported point
            for (coeffs, kind, rhs) in &lp.rows {
                let lhs: f64 = coeffs.iter().zip(&s.x).map(|(a, b)| a * b).sum();
                match kind {
                    RowKind::Eq => assert!((lhs - rhs).abs() <= 1e-7),
                    RowKind::Le => assert!(lhs <= rhs + 1e-7),
                }
            }
        }
    }
}
