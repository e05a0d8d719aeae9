use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Output of [`pca_project`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// N×h coordinates of the centered rows in the principal basis.
    pub projected: Matrix,
    /// h×m matrix of orthonormal principal directions.
    pub component_basis: Matrix,
    pub column_means: Vec<f64>,
    /// Sample variance along each direction, non-increasing.
    pub explained_variance: Vec<f64>,
}

impl ProjectionResult {
    /// Coordinates of an arbitrary m-vector in the fitted basis.
    pub fn project_row(&self, row: &[f64]) -> Vec<f64> {
        self.component_basis
            .iter_rows()
            .map(|basis| {
                row.iter()
                    .zip(&self.column_means)
                    .zip(basis)
                    .map(|((x, mu), b)| (x - mu) * b)
                    .sum()
            })
            .collect()
    }
}

/// Projects the rows of `updates` onto their top-`h` principal directions.
///
/// The decomposition goes through the N×N Gram matrix of the centered rows,
/// which is cheap whenever N is much smaller than m. Each basis row is signed
/// so that its largest-magnitude entry is non-negative.
pub fn pca_project(updates: &Matrix, h: usize) -> Result<ProjectionResult> {
    let n = updates.rows();
    let m = updates.cols();
    if n < 2 {
        return Err(Error::DegenerateInput(format!("PCA needs at least 2 rows, got {n}")));
    }
    if h == 0 || h > (n - 1).min(m) {
        return Err(Error::DegenerateInput(format!(
            "cannot keep {h} components of a {n}x{m} matrix"
        )));
    }
    if let Some(i) = updates.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }

    let mut column_means = vec![0.0; m];
    for row in updates.iter_rows() {
        for (mu, x) in column_means.iter_mut().zip(row) {
            *mu += x;
        }
    }
    for mu in &mut column_means {
        *mu /= n as f64;
    }
    let mut centered = updates.clone();
    for i in 0..n {
        for (x, mu) in centered.row_mut(i).iter_mut().zip(&column_means) {
            *x -= mu;
        }
    }

    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = centered
                .row(i)
                .iter()
                .zip(centered.row(j))
                .map(|(a, b)| a * b)
                .sum();
            gram[i * n + j] = dot;
            gram[j * n + i] = dot;
        }
    }
    let (eigvals, eigvecs) = symmetric_eigen(gram, n);

    let scale = eigvals.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = scale * 1e-12 * n as f64;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(h);
    let mut explained_variance = Vec::with_capacity(h);
    for k in 0..h {
        let lambda = eigvals[k];
        let mut direction = vec![0.0; m];
        let mut usable = lambda > cutoff && lambda > 0.0;
        if usable {
            for i in 0..n {
                let u = eigvecs[i * n + k];
                for (d, x) in direction.iter_mut().zip(centered.row(i)) {
                    *d += u * x;
                }
            }
            usable = orthonormalize(&mut direction, &basis);
        }
        if !usable {
            direction = null_direction(m, &basis);
        }
        apply_sign_convention(&mut direction);
        explained_variance.push(if usable { lambda / (n - 1) as f64 } else { 0.0 });
        basis.push(direction);
    }

    let mut projected = Vec::with_capacity(n * h);
    for row in centered.iter_rows() {
        for b in &basis {
            projected.push(row.iter().zip(b).map(|(x, v)| x * v).sum());
        }
    }
    Ok(ProjectionResult {
        projected: Matrix::new(n, h, projected)?,
        component_basis: Matrix::from_rows(&basis)?,
        column_means,
        explained_variance,
    })
}

/// Removes components along `basis` and normalises. Returns false when
/// nothing meaningful is left.
fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> bool {
    let original = norm(v);
    if original == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
    }
    let len = norm(v);
    if len <= original * 1e-10 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= len;
    }
    true
}

/// First standard basis vector that survives orthogonalisation.
fn null_direction(m: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    for axis in 0..m {
        let mut v = vec![0.0; m];
        v[axis] = 1.0;
        if orthonormalize(&mut v, basis) {
            return v;
        }
    }
    unreachable!("fewer than m basis vectors always leave a free axis")
}

fn apply_sign_convention(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Cyclic Jacobi eigendecomposition of a symmetric n×n matrix.
///
/// Returns eigenvalues sorted descending and the matching eigenvectors as
/// the columns of a row-major n×n matrix.
pub(crate) fn symmetric_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= total * 1e-32 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    (values, vectors)
}
