//! Dense complex matrices, row-major. Small enough vocabulary that pulling in a
//! full linear-algebra crate would cost more than it buys; the eigensolvers in
//! [`crate::eig`] need direct slice access to rows anyway.

use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt;
use std::ops::{Index, IndexMut};

pub type C64 = Complex64;

#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = *e;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i])
    }

    pub fn add_assign(&mut self, rhs: &CMat) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&mut self, z: C64) {
        for a in &mut self.data {
            *a *= z;
        }
    }

    pub fn scaled(&self, z: C64) -> CMat {
        let mut m = self.clone();
        m.scale(z);
        m
    }

    /// Matrix product. Rows are computed independently (parallel for large
    /// sizes); each entry is a sequential dot product, so results do not
    /// depend on the thread count.
    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![C64::new(0.0, 0.0); n * m];
        let body = |(i, out_row): (usize, &mut [C64])| {
            let lhs_row = &self.data[i * k..(i + 1) * k];
            for (l, &a) in lhs_row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[l * m..(l + 1) * m];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        };
        if n * k * m >= 1 << 18 {
            out.par_chunks_mut(m).enumerate().for_each(body);
        } else {
            out.chunks_mut(m).enumerate().for_each(body);
        }
        CMat { rows: n, cols: m, data: out }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max_ij |M_ij - conj(M_ji)|
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut d = 0.0f64;
        for i in 0..n {
            for j in i..n {
                d = d.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        d
    }

    /// ||M† M - I||_max
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.dagger().mul(self);
        let n = p.rows;
        let mut d = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                d = d.max((p.data[i * n + j] - C64::new(expect, 0.0)).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermitian_defect() <= 1e-12 * self.max_abs().max(f64::MIN_POSITIVE)
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMat({}x{})", self.rows, self.cols)
    }
}

/// Quantum state. Hermiticity and unit trace are enforced at construction;
/// positivity is a property of how states are built (pure projectors, convex
/// mixtures, unitary conjugation) and is checked in tests via the spectrum
/// rather than on every instance.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let scale = mat.max_abs().max(f64::MIN_POSITIVE);
        if mat.hermitian_defect() > 1e-12 * scale {
            return Err(Error::Contract("density matrix must be Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Contract(format!("density matrix trace {tr} != 1")));
        }
        Ok(DensityMatrix { mat })
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr <= 0.0 {
            return Err(Error::Contract("zero state vector".into()));
        }
        let n = psi.len();
        let mat = CMat::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / norm_sqr);
        Ok(DensityMatrix { mat })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let mut mat = CMat::identity(n);
        mat.scale(C64::new(1.0 / n as f64, 0.0));
        DensityMatrix { mat }
    }

    /// Convex mixture sum_k w_k |psi_k><psi_k|; weights are normalized.
    pub fn mixture(states: &[(f64, Vec<C64>)]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InsufficientData("empty mixture".into()));
        }
        let n = states[0].1.len();
        let wsum: f64 = states.iter().map(|(w, _)| w).sum();
        let mut mat = CMat::zeros(n, n);
        for (w, psi) in states {
            let nrm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            let scale = w / (wsum * nrm);
            for i in 0..n {
                for j in 0..n {
                    mat[(i, j)] += psi[i] * psi[j].conj() * scale;
                }
            }
        }
        DensityMatrix::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    /// U rho U†
    pub fn conjugated_by(&self, u: &CMat) -> DensityMatrix {
        DensityMatrix { mat: u.mul(&self.mat).mul(&u.dagger()) }
    }

    pub fn expectation(&self, o: &CMat) -> C64 {
        self.mat.mul(o).trace()
    }
}
