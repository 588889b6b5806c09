//! Dense exact-rational matrices, just enough linear algebra for
//! design matrices: determinant, inverse, product, transpose.

use num_traits::{One, Signed, Zero};

use crate::{Error, Rat, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Rat>,
}

impl RationalMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        RationalMatrix {
            nrows,
            ncols,
            data: vec![Rat::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            if r.len() != ncols {
                return Err(Error::Dimension("ragged rows".into()));
            }
            data.extend(r);
        }
        Ok(RationalMatrix { nrows, ncols, data })
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rat::from_integer(v.into())).collect())
                .collect(),
        )
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for j in 0..other.ncols {
                let mut acc = Rat::zero();
                for l in 0..self.ncols {
                    let a = self.get(i, l);
                    if !a.is_zero() {
                        acc += a * other.get(l, j);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if v.len() != self.ncols {
            return Err(Error::LengthMismatch { expected: self.ncols, got: v.len() });
        }
        Ok((0..self.nrows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect())
    }

    /// Determinant by elimination with partial pivoting on magnitude.
    pub fn det(&self) -> Result<Rat> {
        if self.nrows != self.ncols {
            return Err(Error::NotSquare(self.nrows, self.ncols));
        }
        let n = self.nrows;
        let mut a = self.data.clone();
        let at = |a: &Vec<Rat>, i: usize, j: usize| a[i * n + j].clone();
        let mut det = Rat::one();
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a[r * n + col].is_zero())
                .max_by(|&r, &s| a[r * n + col].abs().cmp(&a[s * n + col].abs()));
            let Some(p) = pivot else { return Ok(Rat::zero()) };
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let pv = at(&a, col, col);
            det *= &pv;
            for r in col + 1..n {
                let f = &at(&a, r, col) / &pv;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let s = &at(&a, r, j) - &f * &at(&a, col, j);
                    a[r * n + j] = s;
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan; singular input is an error.
    pub fn inverse(&self) -> Result<RationalMatrix> {
        if self.nrows != self.ncols {
            return Err(Error::NotSquare(self.nrows, self.ncols));
        }
        let n = self.nrows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a.get(r, col).is_zero())
                .max_by(|&r, &s| a.get(r, col).abs().cmp(&a.get(s, col).abs()));
            let Some(p) = pivot else { return Err(Error::SingularMatrix) };
            if p != col {
                for j in 0..n {
                    let x = a.get(p, j).clone();
                    let y = a.get(col, j).clone();
                    a.set(p, j, y);
                    a.set(col, j, x);
                    let x = inv.get(p, j).clone();
                    let y = inv.get(col, j).clone();
                    inv.set(p, j, y);
                    inv.set(col, j, x);
                }
            }
            let pv = a.get(col, col).clone();
            for j in 0..n {
                a.set(col, j, a.get(col, j) / &pv);
                inv.set(col, j, inv.get(col, j) / &pv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let s = a.get(r, j) - &f * a.get(col, j);
                    a.set(r, j, s);
                    let s = inv.get(r, j) - &f * inv.get(col, j);
                    inv.set(r, j, s);
                }
            }
        }
        Ok(inv)
    }
}
