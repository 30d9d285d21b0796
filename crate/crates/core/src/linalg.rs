//! Dense Hermitian kernels: eigenvalues, inertia and numerical rank.
//!
//! Matrices are stored as `DMatrix<Complex64>`. Whenever every imaginary
//! part vanishes the real routines are used instead.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold for treating a singular value as zero.
pub const RANK_RTOL: f64 = 1e-10;

pub fn is_real(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn dump(m: &DMatrix<Complex64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z != Complex64::new(0.0, 0.0) {
                s.push_str(&format!("{i} {j} {} {}\n", z.re, z.im));
            }
        }
    }
    s
}

fn eigen_iterations(n: usize) -> usize {
    10_000 * n.max(1)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut vals: Vec<f64> = if n == 0 {
        Vec::new()
    } else if n == 1 {
        vec![m[(0, 0)].re]
    } else if is_real(m) {
        SymmetricEigen::try_new(real_part(m), f64::EPSILON, eigen_iterations(n))
            .ok_or_else(|| Error::EigenNonConvergence { size: n, dump: dump(m) })?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    } else {
        SymmetricEigen::try_new(m.clone(), f64::EPSILON, eigen_iterations(n))
            .ok_or_else(|| Error::EigenNonConvergence { size: n, dump: dump(m) })?
            .eigenvalues
            .iter()
            .copied()
            .collect()
    };
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Eigenvalues and unit eigenvectors (columns), unsorted.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    if is_real(m) {
        let e = SymmetricEigen::try_new(real_part(m), f64::EPSILON, eigen_iterations(n))
            .ok_or_else(|| Error::EigenNonConvergence { size: n, dump: dump(m) })?;
        Ok((e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|x| Complex64::new(x, 0.0))))
    } else {
        let e = SymmetricEigen::try_new(m.clone(), f64::EPSILON, eigen_iterations(n))
            .ok_or_else(|| Error::EigenNonConvergence { size: n, dump: dump(m) })?;
        Ok((e.eigenvalues.iter().copied().collect(), e.eigenvectors))
    }
}

/// Number of negative eigenvalues of a Hermitian matrix via a Bunch–Kaufman
/// `L D L*` factorization. Returns `None` when a pivot block has an
/// eigenvalue smaller than `pivot_tol` in modulus.
pub fn negative_inertia(mut a: DMatrix<Complex64>, pivot_tol: f64) -> Option<usize> {
    let n = a.nrows();
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let mut negatives = 0;
    let mut k = 0;
    while k < n {
        let absakk = a[(k, k)].re.abs();
        let (imax, colmax) = ((k + 1)..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, 0.0), |best, c| if c.1 > best.1 { c } else { best });
        let mut two_by_two = false;
        if absakk < alpha * colmax {
            let rowmax = (k..n)
                .filter(|&j| j != imax)
                .map(|j| a[(imax, j)].norm())
                .fold(0.0, f64::max);
            if absakk * rowmax >= alpha * colmax * colmax {
                // keep the diagonal pivot
            } else if a[(imax, imax)].re.abs() >= alpha * rowmax {
                symmetric_swap(&mut a, k, imax);
            } else {
                symmetric_swap(&mut a, k + 1, imax);
                two_by_two = true;
            }
        }
        if !two_by_two {
            let d = a[(k, k)].re;
            if d.abs() < pivot_tol {
                return None;
            }
            if d < 0.0 {
                negatives += 1;
            }
            for i in (k + 1)..n {
                let l = a[(i, k)] / d;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..n {
                    let update = l * a[(k, j)];
                    a[(i, j)] -= update;
                }
            }
            k += 1;
        } else {
            let p = a[(k, k)].re;
            let q = a[(k + 1, k + 1)].re;
            let b = a[(k, k + 1)];
            let det = p * q - b.norm_sqr();
            let half_trace = 0.5 * (p + q);
            let disc = (0.25 * (p - q) * (p - q) + b.norm_sqr()).sqrt();
            let (e1, e2) = (half_trace - disc, half_trace + disc);
            if e1.abs().min(e2.abs()) < pivot_tol {
                return None;
            }
            negatives += usize::from(e1 < 0.0) + usize::from(e2 < 0.0);
            // D^{-1} = [[q, -b], [-conj b, p]] / det
            let inv = [
                [Complex64::new(q / det, 0.0), -b / det],
                [-b.conj() / det, Complex64::new(p / det, 0.0)],
            ];
            for i in (k + 2)..n {
                let (x0, x1) = (a[(i, k)], a[(i, k + 1)]);
                let l0 = x0 * inv[0][0] + x1 * inv[1][0];
                let l1 = x0 * inv[0][1] + x1 * inv[1][1];
                for j in (k + 2)..n {
                    let update = l0 * a[(k, j)] + l1 * a[(k + 1, j)];
                    a[(i, j)] -= update;
                }
            }
            k += 2;
        }
    }
    Some(negatives)
}

fn symmetric_swap(a: &mut DMatrix<Complex64>, i: usize, j: usize) {
    if i != j {
        a.swap_rows(i, j);
        a.swap_columns(i, j);
    }
}

/// Numerical rank and an orthonormal null-space basis (columns of `V`
/// whose singular values fall below `RANK_RTOL·max(σ_max, 1)·max(m, n)`).
pub fn rank_and_null_space(m: &DMatrix<Complex64>) -> (usize, Vec<Vec<Complex64>>) {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return (0, Vec::new());
    }
    if rows == 0 {
        let basis = (0..cols)
            .map(|c| (0..cols).map(|r| Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        return (0, basis);
    }
    // pad to at least as many rows as columns so V is square
    let padded;
    let src = if rows < cols {
        padded = m.clone().resize_vertically(cols, Complex64::new(0.0, 0.0));
        &padded
    } else {
        m
    };
    let (sigma, v_t): (Vec<f64>, DMatrix<Complex64>) = if is_real(src) {
        let svd = SVD::new(real_part(src), false, true);
        (
            svd.singular_values.iter().copied().collect(),
            svd.v_t.expect("requested V").map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let svd = SVD::new(src.clone(), false, true);
        (svd.singular_values.iter().copied().collect(), svd.v_t.expect("requested V"))
    };
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let tol = RANK_RTOL * sigma_max.max(1.0) * rows.max(cols) as f64;
    let mut rank = 0;
    let mut null = Vec::new();
    for (k, s) in sigma.iter().enumerate() {
        if *s > tol {
            rank += 1;
        } else {
            null.push(v_t.row(k).iter().map(|z| z.conj()).collect());
        }
    }
    (rank, null)
}

/// Gershgorin interval `[min(a_ii − r_i), max(a_ii + r_i)]`.
pub fn gershgorin(m: &DMatrix<Complex64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m.nrows() {
        let r: f64 = (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
        lo = lo.min(m[(i, i)].re - r);
        hi = hi.max(m[(i, i)].re + r);
    }
    (lo, hi)
}
