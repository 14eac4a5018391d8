//! Small fixed-size tensor helpers generic over [`Real`].

use nalgebra::Matrix3;

use crate::dual::Real;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub fn zero_mat<T: Real>() -> [[T; 3]; 3] {
    [[T::zero(); 3]; 3]
}

pub fn identity() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn det<T: Real>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Adjugate inverse; callers check definiteness first.
pub fn inverse<T: Real>(m: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    let d = det(m).recip();
    let c = |a: usize, b: usize, c: usize, e: usize| m[a][b] * m[c][e] - m[a][e] * m[c][b];
    [
        [c(1, 1, 2, 2) * d, -(c(0, 1, 2, 2)) * d, c(0, 1, 1, 2) * d],
        [-(c(1, 0, 2, 2)) * d, c(0, 0, 2, 2) * d, -(c(0, 0, 1, 2)) * d],
        [c(1, 0, 2, 1) * d, -(c(0, 0, 2, 1)) * d, c(0, 0, 1, 1) * d],
    ]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn transpose(a: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `u^T m v`.
pub fn bilinear(m: &Mat3, u: &Vec3, v: &Vec3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += m[i][j] * u[i] * v[j];
        }
    }
    s
}

pub fn frobenius(m: &Mat3) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &Mat3, b: &Mat3) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] - b[i][j]))
}

pub fn scale(a: &Mat3, s: f64) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] * s))
}

pub fn to_na(m: &Mat3) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 3×3 matrix.
/// Returns eigenvalues and the matching eigenvectors as columns of `V`
/// (`m = V diag(λ) Vᵀ`). nalgebra's `SymmetricEigen` can return visibly
/// rotated eigenvectors for nearly degenerate spectra; Jacobi rotations do
/// not have that failure mode.
pub fn sym_eigen(m: &Mat3) -> (Vec3, Mat3) {
    let mut a = *m;
    let mut v = identity();
    for _sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let diag = a[0][0].abs() + a[1][1].abs() + a[2][2].abs();
        if off == 0.0 || off <= f64::EPSILON * 1e-3 * diag {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // A ← Jᵀ A J with J the (p, q) rotation
            for k in 0..3 {
                let (akp, akq) = (a[k][p], a[k][q]);
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let (apk, aqk) = (a[p][k], a[q][k]);
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &Mat3) -> Vec3 {
    let (mut ev, _) = sym_eigen(m);
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest |Mᵀ M − I| entry.
pub fn orthogonality_defect(m: &Mat3) -> f64 {
    let p = mat_mul(&transpose(m), m);
    let id = identity();
    p.iter()
        .flatten()
        .zip(id.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Rotation by `angle` about coordinate axis `axis`.
pub fn axis_rotation(axis: usize, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut m = identity();
    m[i][i] = c;
    m[i][j] = -s;
    m[j][i] = s;
    m[j][j] = c;
    m
}

/// Solve the generalized symmetric problem `A v = λ B v` with `B` positive
/// definite. Eigenvalues ascend; eigenvectors are `B`-orthonormal columns
/// returned as rows.
pub fn generalized_eigen(a: &Mat3, b: &Mat3) -> Option<(Vec3, [Vec3; 3])> {
    let chol = to_na(b).cholesky()?;
    let l = chol.l();
    let linv = l.try_inverse()?;
    let c = linv * to_na(a) * linv.transpose();
    let c: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (c[(i, j)] + c[(j, i)])));
    let (ev, basis) = sym_eigen(&c);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| ev[i].total_cmp(&ev[j]));
    let lt_inv = linv.transpose();
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (slot, &k) in idx.iter().enumerate() {
        values[slot] = ev[k];
        let y = nalgebra::Vector3::new(basis[0][k], basis[1][k], basis[2][k]);
        let v = lt_inv * y;
        vectors[slot] = [v[0], v[1], v[2]];
    }
    if values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((values, vectors))
}

/// Least squares `min |X c − y|` by SVD, with the residual norm.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = rows.len();
    let k = rows.first()?.len();
    if n < k {
        return None;
    }
    let x = nalgebra::DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let yv = nalgebra::DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin / smax < 1e-13 {
        return None;
    }
    let c = svd.solve(&yv, 0.0).ok()?;
    let resid = (&x * &c - &yv).norm();
    Some((c.iter().copied().collect(), resid))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
