//! Exact rank and null spaces over ℚ.
//!
//! [`bareiss_echelon`] is the fraction-free elimination used by the jump
//! estimator. [`gauss_jordan_rank`] is a plain rational Gauss–Jordan
//! elimination kept as an independent second route.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Complex64;

/// Exact rational value of a finite float.
pub fn rational_of(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidParameter(format!("non-finite entry {x}")))
}

pub fn rational_of_complex(z: Complex64) -> Result<BigRational> {
    if z.im != 0.0 {
        return Err(Error::NonRealEntries);
    }
    rational_of(z.re)
}

/// Scales each row by the lcm of its denominators.
pub fn integer_rows(rows: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&lcm / q.denom())).collect()
        })
        .collect()
}

/// Fraction-free row echelon form.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// Basis of the null space, one vector per free column.
    pub fn null_space(&self) -> Vec<Vec<BigRational>> {
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &self.pivots {
                v[p] = true;
            }
            v
        };
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|free| {
                let mut x = vec![BigRational::zero(); self.cols];
                x[free] = BigRational::one();
                for (t, &p) in self.pivots.iter().enumerate().rev() {
                    let row = &self.rows[t];
                    let mut acc = BigRational::zero();
                    for j in (p + 1)..self.cols {
                        if !row[j].is_zero() && !x[j].is_zero() {
                            acc += BigRational::from_integer(row[j].clone()) * &x[j];
                        }
                    }
                    x[p] = -acc / BigRational::from_integer(row[p].clone());
                }
                x
            })
            .collect()
    }
}

/// Bareiss fraction-free elimination to row echelon form.
pub fn bareiss_echelon(mut m: Vec<Vec<BigInt>>, cols: usize) -> Echelon {
    let nrows = m.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let lead = row[c].clone();
            for j in (c + 1)..cols {
                let v = &pivot_row[c] * &row[j] - &lead * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Echelon { rows: m, pivots, cols }
}

/// Rank by Gauss–Jordan elimination over ℚ.
pub fn gauss_jordan_rank(mut m: Vec<Vec<BigRational>>, cols: usize) -> usize {
    let nrows = m.len();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = BigRational::one() / &m[r][c];
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..nrows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let v = &f * &m[r][j];
                    m[i][j] -= v;
                }
            }
        }
        r += 1;
    }
    r
}
