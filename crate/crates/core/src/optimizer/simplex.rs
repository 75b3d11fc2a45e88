//! Bounded-variable primal revised simplex for the maximin design LP
//!
//! ```text
//!   maximize t
//!   subject to  sum_i c[j][i] a_i - t - s_j = 0   for every mode row j
//!               sum_i w_i a_i = M
//!               0 <= a_i <= 1,  s_j >= 0,  t free
//! ```
//!
//! Cell variables carry their upper bound natively, so a cell entering at
//! its upper bound is a bound flip rather than a pivot. The basis has one
//! row per mode plus the measure row and `t` never leaves it. Pricing is
//! Dantzig's rule; after a run of degenerate pivots the solver switches to
//! Bland's rule until it makes progress again.

use crate::error::{Error, Result};
use crate::linalg::invert;

const DUAL_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-11;
const DEGENERATE_STEP: f64 = 1e-12;
const DEGENERATE_RUN_FOR_BLAND: usize = 50;
const REFACTOR_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic(usize),
    AtLower,
    AtUpper,
}

/// Solution of the maximin LP in the caller's units.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub a: Vec<f64>,
    pub objective: f64,
    /// Simplex multipliers of the mode rows (nonnegative, summing to 1).
    pub multipliers: Vec<f64>,
    /// Dual of the measure row expressed as a level of the switching field.
    pub level: f64,
    pub iterations: usize,
    /// Largest violation of the equality rows and bounds.
    pub primal_residual: f64,
    /// Largest violation of dual feasibility (reduced-cost signs, multiplier signs).
    pub dual_residual: f64,
}

struct Lp {
    m: usize,
    n_modes: usize,
    n: usize,
    cols: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    x: Vec<f64>,
    binv: Vec<f64>,
}

impl Lp {
    fn t_var(&self) -> usize {
        self.n
    }

    fn slack_var(&self, j: usize) -> usize {
        self.n + 1 + j
    }

    fn lower(&self, v: usize) -> f64 {
        if v == self.n {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }

    fn upper(&self, v: usize) -> f64 {
        if v < self.n {
            1.0
        } else {
            f64::INFINITY
        }
    }

    fn column(&self, v: usize) -> Vec<f64> {
        if v < self.n {
            self.cols[v * self.m..(v + 1) * self.m].to_vec()
        } else if v == self.n {
            let mut c = vec![-1.0; self.m];
            c[self.n_modes] = 0.0;
            c
        } else {
            let mut c = vec![0.0; self.m];
            c[v - self.n - 1] = -1.0;
            c
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut bmat = vec![0.0; m * m];
        for (p, &v) in self.basis.iter().enumerate() {
            for (r, c) in self.column(v).into_iter().enumerate() {
                bmat[r * m + p] = c;
            }
        }
        self.binv = invert(m, &bmat)?;
        // x_B = B^-1 (b - N x_N); only cells at their upper bound contribute.
        let mut rhs = self.b.clone();
        for i in 0..self.n {
            if self.status[i] == Status::AtUpper {
                for (r, c) in self.cols[i * m..(i + 1) * m].iter().enumerate() {
                    rhs[r] -= c;
                }
            }
        }
        for p in 0..m {
            let v = self.basis[p];
            self.x[v] = (0..m).map(|r| self.binv[p * m + r] * rhs[r]).sum();
        }
        Ok(())
    }

    /// Row prices `y = c_B B^-1`; only `t` has a nonzero cost (-1).
    fn prices(&self) -> Vec<f64> {
        let Status::Basic(pt) = self.status[self.t_var()] else {
            unreachable!("t is free and never leaves the basis")
        };
        self.binv[pt * self.m..(pt + 1) * self.m].iter().map(|v| -v).collect()
    }

    fn reduced_cost(&self, v: usize, y: &[f64]) -> f64 {
        if v < self.n {
            -self.cols[v * self.m..(v + 1) * self.m]
                .iter()
                .zip(y)
                .map(|(c, y)| c * y)
                .sum::<f64>()
        } else if v == self.n {
            -1.0 + y[..self.n_modes].iter().sum::<f64>()
        } else {
            y[v - self.n - 1]
        }
    }

    fn cell_reduced_costs(&self, y: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.cols.chunks_exact(self.m).map(|col| {
            -col.iter().zip(y).map(|(c, y)| c * y).sum::<f64>()
        }));
    }

    /// Entering variable and its reduced cost, or `None` at optimality.
    /// `cell_d` holds the cell reduced costs for the current prices.
    fn price(&self, y: &[f64], cell_d: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..self.status.len() {
            let d = match self.status[v] {
                Status::Basic(_) => continue,
                Status::AtLower if v == self.n => continue,
                Status::AtLower => {
                    let d = if v < self.n { cell_d[v] } else { self.reduced_cost(v, y) };
                    if d < -DUAL_TOL {
                        d
                    } else {
                        continue;
                    }
                }
                Status::AtUpper => {
                    let d = cell_d[v];
                    if d > DUAL_TOL {
                        d
                    } else {
                        continue;
                    }
                }
            };
            if bland {
                return Some((v, d));
            }
            if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                best = Some((v, d));
            }
        }
        best
    }

    fn pivot(&mut self, p: usize, u: &[f64]) {
        let m = self.m;
        let piv = u[p];
        for k in 0..m {
            self.binv[p * m + k] /= piv;
        }
        let pivot_row: Vec<f64> = self.binv[p * m..(p + 1) * m].to_vec();
        for r in 0..m {
            if r == p || u[r] == 0.0 {
                continue;
            }
            let f = u[r];
            for k in 0..m {
                self.binv[r * m + k] -= f * pivot_row[k];
            }
        }
    }

    fn run(&mut self, max_iterations: usize) -> Result<usize> {
        let m = self.m;
        let mut iterations = 0;
        let mut since_refactor = 0;
        let mut degenerate_run = 0;
        let mut bland = false;
        let mut y = self.prices();
        let mut cell_d = Vec::with_capacity(self.n);
        self.cell_reduced_costs(&y, &mut cell_d);
        loop {
            let Some((q, d)) = self.price(&y, &cell_d, bland) else {
                // Confirm optimality on a fresh factorization.
                if since_refactor == 0 {
                    return Ok(iterations);
                }
                self.refactor()?;
                since_refactor = 0;
                y = self.prices();
                self.cell_reduced_costs(&y, &mut cell_d);
                continue;
            };
            iterations += 1;
            if iterations > max_iterations {
                return Err(Error::Solver(format!(
                    "iteration guard exceeded after {max_iterations} iterations"
                )));
            }
            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            let aq = self.column(q);
            let u: Vec<f64> = (0..m)
                .map(|p| (0..m).map(|r| self.binv[p * m + r] * aq[r]).sum())
                .collect();

            let mut step = self.upper(q) - self.lower(q);
            let mut leaving: Option<(usize, bool)> = None;
            let mut leaving_pivot = 0.0;
            for p in 0..m {
                let v = self.basis[p];
                let rate = -dir * u[p];
                let (limit, to_upper) = if rate < -PIVOT_TOL && self.lower(v).is_finite() {
                    ((self.x[v] - self.lower(v)) / -rate, false)
                } else if rate > PIVOT_TOL && self.upper(v).is_finite() {
                    ((self.upper(v) - self.x[v]) / rate, true)
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let better = if limit < step - DEGENERATE_STEP {
                    true
                } else if (limit - step).abs() <= DEGENERATE_STEP {
                    match leaving {
                        // Ties with the bound flip keep the cheaper flip.
                        None => false,
                        Some((lp, _)) if bland => v < self.basis[lp],
                        Some(_) => u[p].abs() > leaving_pivot,
                    }
                } else {
                    false
                };
                if better {
                    step = limit;
                    leaving = Some((p, to_upper));
                    leaving_pivot = u[p].abs();
                }
            }
            if !step.is_finite() {
                return Err(Error::Solver("LP is unbounded".into()));
            }

            self.x[q] += dir * step;
            for p in 0..m {
                let v = self.basis[p];
                self.x[v] -= dir * step * u[p];
            }
            match leaving {
                None => {
                    self.status[q] = if dir > 0.0 { Status::AtUpper } else { Status::AtLower };
                    self.x[q] = if dir > 0.0 { self.upper(q) } else { self.lower(q) };
                }
                Some((p, to_upper)) => {
                    let v = self.basis[p];
                    self.x[v] = if to_upper { self.upper(v) } else { self.lower(v) };
                    self.status[v] = if to_upper { Status::AtUpper } else { Status::AtLower };
                    self.basis[p] = q;
                    self.status[q] = Status::Basic(p);
                    self.pivot(p, &u);
                    since_refactor += 1;
                    if since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                        since_refactor = 0;
                    }
                    // Bound flips leave the prices unchanged; pivots do not.
                    y = self.prices();
                    self.cell_reduced_costs(&y, &mut cell_d);
                }
            }

            if step <= DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_RUN_FOR_BLAND {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }
}

/// Solves the maximin LP.
///
/// `rows[j][i]` is the contribution of cell `i` to mode row `j`, `weights`
/// the cell measures and `measure` the prescribed total `sum_i w_i a_i`.
/// `hint`, when given, orders the cells of the starting vertex (largest
/// first); by default the first row is used.
pub fn solve_maximin(
    rows: &[&[f64]],
    weights: &[f64],
    measure: f64,
    hint: Option<&[f64]>,
) -> Result<LpSolution> {
    let n_modes = rows.len();
    let n = weights.len();
    if n_modes == 0 {
        return Err(Error::Config("the LP needs at least one mode row".into()));
    }
    if rows.iter().any(|r| r.len() != n) || hint.is_some_and(|h| h.len() != n) {
        return Err(Error::Precondition("row lengths do not match the cell count".into()));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Precondition("cell weights must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(measure > 0.0 && measure < total) {
        return Err(Error::Solver(format!(
            "measure {measure} must lie strictly inside (0, {total})"
        )));
    }
    let m = n_modes + 1;

    // Scale mode rows so that t and the cell columns are O(1) per cell.
    let min_row_sum = rows
        .iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    if !(min_row_sum > 0.0) {
        return Err(Error::Precondition("every mode row needs a positive entry".into()));
    }
    let row_scale = n as f64 / min_row_sum;
    let measure_scale = n as f64 / total;

    let mut cols = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..n_modes {
            cols[i * m + j] = rows[j][i] * row_scale;
        }
        cols[i * m + n_modes] = weights[i] * measure_scale;
    }
    let mut b = vec![0.0; m];
    b[n_modes] = measure * measure_scale;

    // Starting vertex: fill cells by decreasing hint.
    let order_key = hint.unwrap_or(rows[0]);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &k| order_key[k].total_cmp(&order_key[i]).then(i.cmp(&k)));
    let nv = n + 1 + n_modes;
    let mut status = vec![Status::AtLower; nv];
    let mut x = vec![0.0; nv];
    let mut filled = 0.0;
    let mut boundary = order[n - 1];
    for &i in &order {
        if filled + weights[i] <= measure {
            filled += weights[i];
            status[i] = Status::AtUpper;
            x[i] = 1.0;
        } else {
            boundary = i;
            x[i] = (measure - filled) / weights[i];
            break;
        }
    }
    let row_values: Vec<f64> = (0..n_modes)
        .map(|j| (0..n).map(|i| cols[i * m + j] * x[i]).sum())
        .collect();
    let tight = (0..n_modes)
        .min_by(|&a, &c| row_values[a].total_cmp(&row_values[c]))
        .expect("n_modes >= 1");
    let mut basis = vec![0; m];
    for j in 0..n_modes {
        basis[j] = if j == tight { n } else { n + 1 + j };
    }
    basis[n_modes] = boundary;
    for (p, &v) in basis.iter().enumerate() {
        status[v] = Status::Basic(p);
    }

    let mut lp = Lp { m, n_modes, n, cols, b, basis, status, x, binv: Vec::new() };
    lp.refactor()?;
    let guard = 50 * (n + m) + 10_000;
    let iterations = lp.run(guard)?;
    lp.refactor()?;

    let y = lp.prices();
    let mut multipliers: Vec<f64> = y[..n_modes].to_vec();
    let mut dual_residual = multipliers.iter().fold(0.0f64, |acc, &v| acc.max(-v));
    for v in 0..nv {
        let d = lp.reduced_cost(v, &y);
        let viol = match lp.status[v] {
            Status::Basic(_) => d.abs(),
            Status::AtLower => (-d).max(0.0),
            Status::AtUpper => d.max(0.0),
        };
        // cell reduced costs are per unit cell; report relative to the column scale
        dual_residual = dual_residual.max(viol);
    }
    for v in multipliers.iter_mut() {
        *v = v.max(0.0);
    }
    let s: f64 = multipliers.iter().sum();
    for v in multipliers.iter_mut() {
        *v /= s;
    }

    let a: Vec<f64> = lp.x[..n].iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut primal_residual: f64 = lp.x[..n]
        .iter()
        .map(|&v| (-v).max(v - 1.0).max(0.0))
        .fold(0.0, f64::max);
    let mass: f64 = a.iter().zip(weights).map(|(a, w)| a * w).sum();
    primal_residual = primal_residual.max((mass - measure).abs() / total);
    for j in 0..n_modes {
        primal_residual = primal_residual.max((-lp.x[lp.slack_var(j)]).max(0.0) / n as f64);
    }

    Ok(LpSolution {
        objective: lp.x[lp.t_var()] / row_scale,
        level: -y[n_modes] * measure_scale / row_scale,
        multipliers,
        a,
        iterations,
        primal_residual,
        dual_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_row_is_a_knapsack() {
        let row = [1.0, 4.0, 3.0, 2.0];
        let w = [1.0; 4];
        let sol = solve_maximin(&[&row], &w, 2.5, None).unwrap();
        assert_abs_diff_eq!(sol.objective, 4.0 + 3.0 + 0.5 * 2.0, epsilon = 1e-12);
        assert_eq!(sol.multipliers, vec![1.0]);
        assert_abs_diff_eq!(sol.a[3], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn two_rows_balance() {
        // cells favour one row each; the optimum splits the budget
        let r1 = [1.0, 0.0];
        let r2 = [0.0, 1.0];
        let sol = solve_maximin(&[&r1, &r2], &[1.0, 1.0], 1.0, None).unwrap();
        assert_abs_diff_eq!(sol.objective, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.multipliers[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.a[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_measure() {
        let r = [1.0, 1.0];
        assert!(solve_maximin(&[&r], &[1.0, 1.0], 2.0, None).is_err());
        assert!(solve_maximin(&[&r], &[1.0, 1.0], 0.0, None).is_err());
        assert!(solve_maximin(&[], &[1.0, 1.0], 1.0, None).is_err());
    }
}
