//! Reference solver for tiny maximin LPs.

/// Solves a small dense system by Gaussian elimination; `None` if singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-12 {
            return None;
        }
        a.swap(p, col);
        b.swap(p, col);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Optimal value of the maximin LP by exhaustive vertex enumeration.
///
/// Every vertex is found by choosing the tight rows `S`, as many free cells
/// `F`, a 0/1 value for every other cell, and solving for `(a_F, t)`. The
/// cost is exponential in the cell count; meant as a reference for tiny
/// instances (a dozen cells, a few rows).
pub fn solve_by_enumeration(rows: &[Vec<f64>], w: &[f64], measure: f64) -> f64 {
    let (m, n) = (rows.len(), w.len());
    let mut best = f64::NEG_INFINITY;
    for size in 1..=m.min(n) {
        for tight in subsets(m, size) {
            for free in subsets(n, size) {
                let fixed: Vec<usize> = (0..n).filter(|i| !free.contains(i)).collect();
                for bits in 0u32..1 << fixed.len() {
                    let mut a = vec![0.0; n];
                    for (b, &i) in fixed.iter().enumerate() {
                        if bits & (1 << b) != 0 {
                            a[i] = 1.0;
                        }
                    }
                    // unknowns: a_F (size) then t
                    let mut mat = Vec::with_capacity(size + 1);
                    let mut rhs = Vec::with_capacity(size + 1);
                    for &j in &tight {
                        let mut row: Vec<f64> = free.iter().map(|&i| rows[j][i]).collect();
                        row.push(-1.0);
                        mat.push(row);
                        rhs.push(-fixed.iter().map(|&i| rows[j][i] * a[i]).sum::<f64>());
                    }
                    let mut row: Vec<f64> = free.iter().map(|&i| w[i]).collect();
                    row.push(0.0);
                    mat.push(row);
                    rhs.push(measure - fixed.iter().map(|&i| w[i] * a[i]).sum::<f64>());
                    let Some(x) = solve_dense(mat, rhs) else { continue };
                    if x[..size].iter().any(|&v| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
                        continue;
                    }
                    for (k, &i) in free.iter().enumerate() {
                        a[i] = x[k].clamp(0.0, 1.0);
                    }
                    let t = x[size];
                    let feasible = rows
                        .iter()
                        .all(|r| r.iter().zip(&a).map(|(c, a)| c * a).sum::<f64>() >= t - 1e-11);
                    if feasible && t > best {
                        best = t;
                    }
                }
            }
        }
    }
    best
}
