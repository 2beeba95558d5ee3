//! Tridiagonal and bordered linear solves.
//!
//! The radial transmission problems and the implicit time stepper both reduce
//! to tridiagonal systems, optionally bordered by a few dense rows/columns
//! (interface unknowns). LU with partial pivoting keeps the indefinite
//! resolvent systems (negative spectral parameter) stable.

/// Error for a numerically singular system.
#[derive(Debug, Clone, thiserror::Error)]
#[error("singular tridiagonal system at row {row}")]
pub struct SingularError {
    pub row: usize,
}

/// Tridiagonal matrix in banded storage: `lower[i]` multiplies `x[i-1]` in row
/// `i`, `diag[i]` multiplies `x[i]`, `upper[i]` multiplies `x[i+1]`.
#[derive(Debug, Clone)]
pub struct Tridiag {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Tridiag { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                v += self.upper[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// Thomas algorithm without pivoting. Componentwise stable for the
    /// symmetric positive definite (M-matrix) systems of the λ >= 0 solves;
    /// row swaps would smear round-off across the widely scaled conductance
    /// cascade of high-l modes.
    pub fn solve_unpivoted(&self, b: &[f64]) -> Result<Vec<f64>, SingularError> {
        let n = self.len();
        assert_eq!(b.len(), n);
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut d = self.diag.clone();
        let mut x = b.to_vec();
        for k in 0..n - 1 {
            if d[k] == 0.0 {
                return Err(SingularError { row: k });
            }
            let m = self.lower[k + 1] / d[k];
            d[k + 1] -= m * self.upper[k];
            x[k + 1] -= m * x[k];
        }
        if d[n - 1] == 0.0 {
            return Err(SingularError { row: n - 1 });
        }
        x[n - 1] /= d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / d[i];
        }
        Ok(x)
    }

    /// Solves `A x = b` by banded LU with partial pivoting (one fill-in band).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SingularError> {
        let n = self.len();
        assert_eq!(b.len(), n);
        if n == 0 {
            return Ok(Vec::new());
        }
        // Working bands: c = subdiagonal, d = diagonal, e = first
        // superdiagonal, f = second superdiagonal (fill-in from row swaps).
        let mut c = self.lower.clone();
        let mut d = self.diag.clone();
        let mut e = self.upper.clone();
        let mut f = vec![0.0; n];
        let mut x = b.to_vec();

        for k in 0..n - 1 {
            if c[k + 1].abs() > d[k].abs() {
                // Swap rows k and k+1, column by column (k, k+1, k+2).
                std::mem::swap(&mut d[k], &mut c[k + 1]);
                std::mem::swap(&mut e[k], &mut d[k + 1]);
                std::mem::swap(&mut f[k], &mut e[k + 1]);
                x.swap(k, k + 1);
            }
            if d[k] == 0.0 {
                return Err(SingularError { row: k });
            }
            let m = c[k + 1] / d[k];
            d[k + 1] -= m * e[k];
            e[k + 1] -= m * f[k];
            x[k + 1] -= m * x[k];
        }
        if d[n - 1] == 0.0 {
            return Err(SingularError { row: n - 1 });
        }
        // Back substitution against the (d, e, f) upper bands.
        x[n - 1] /= d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - e[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - e[i] * x[i + 1] - f[i] * x[i + 2]) / d[i];
        }
        Ok(x)
    }
}

/// Solves the bordered system
/// `[A B; C D] [x; y] = [bx; by]`
/// where `A` is tridiagonal, `B` is `n×m`, `C` is `m×n`, `D` is `m×m`, with
/// small `m` (Schur complement on the border).
pub struct Bordered<'a> {
    pub a: &'a Tridiag,
    /// Dense border columns, one `Vec<f64>` of length `n` per border unknown.
    pub b_cols: &'a [Vec<f64>],
    /// Dense border rows, one `Vec<f64>` of length `n` per border equation.
    pub c_rows: &'a [Vec<f64>],
    /// Dense `m×m` corner, row-major.
    pub d: &'a [Vec<f64>],
}

impl<'a> Bordered<'a> {
    pub fn solve(&self, bx: &[f64], by: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SingularError> {
        let m = by.len();
        assert_eq!(self.b_cols.len(), m);
        assert_eq!(self.c_rows.len(), m);
        let w = self.a.solve(bx)?;
        let z: Vec<Vec<f64>> =
            self.b_cols.iter().map(|col| self.a.solve(col)).collect::<Result<_, _>>()?;
        // Schur complement S = D - C Z, rhs = by - C w.
        let mut s = vec![vec![0.0; m]; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            rhs[i] = by[i] - dot(&self.c_rows[i], &w);
            for j in 0..m {
                s[i][j] = self.d[i][j] - dot(&self.c_rows[i], &z[j]);
            }
        }
        let y = dense_solve(&mut s, &mut rhs).ok_or(SingularError { row: usize::MAX })?;
        let n = w.len();
        let mut x = w;
        for j in 0..m {
            for i in 0..n {
                x[i] -= z[j][i] * y[j];
            }
        }
        Ok((x, y))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place Gaussian elimination with partial pivoting for the small Schur block.
fn dense_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[piv][k] == 0.0 {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= m * a[k][j];
            }
            b[i] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        for j in i + 1..n {
            v -= a[i][j] * x[j];
        }
        x[i] = v / a[i][i];
    }
    Some(x)
}


#[cfg(test)]
mod residual_probe {
    use super::*;

    #[test]
    fn steep_graded_system_residual() {
        // Mimics the outer l=8 assembly at coarse resolution: widely varying
        // conductances with a zeroth-order term.
        let n = 300;
        let nodes: Vec<f64> = crate::num::mesh::graded_nodes(0.75, 1.5, n, 6.0);
        let cond: Vec<f64> = nodes
            .windows(2)
            .map(|w| {
                let f = 0.5 * (w[0] + w[1]);
                0.2 * f * f / (w[1] - w[0])
            })
            .collect();
        let s: Vec<f64> = nodes.windows(2).map(|w| 14.4 * (w[1] - w[0])).collect();
        let m = n; // unknowns: nodes 1..=n
        let mut t = Tridiag::zeros(m);
        let mut b = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            let mut diag = s.get(i).copied().unwrap_or(0.0) + cond[i - 1];
            if k > 0 {
                t.lower[k] = -cond[i - 1];
            } else {
                b[k] = cond[0];
            }
            if i < m {
                diag += cond[i];
                t.upper[k] = -cond[i];
            }
            t.diag[k] = diag;
        }
        let x = t.solve(&b).unwrap();
        let ax = t.mul_vec(&x);
        let mut worst = 0.0f64;
        for i in 0..m {
            worst = worst.max((ax[i] - b[i]).abs());
        }
        println!("max residual {worst:e}, x1 = {}", x[0]);
        assert!(worst < 1e-9, "residual {worst}");
    }
}
