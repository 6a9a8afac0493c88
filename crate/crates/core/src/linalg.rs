//! Small dense complex matrices for one-cycle propagators.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Square row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(n: usize, cols: &[C64]) -> Self {
        assert_eq!(cols.len(), n * n);
        let mut m = Self::zeros(n);
        for j in 0..n {
            for i in 0..n {
                m.data[i * n + j] = cols[j * n + i];
            }
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, o.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            let dst = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = &o.data[k * n..(k + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// `self^p` by repeated squaring.
    pub fn pow(&self, mut p: u64) -> Self {
        let mut acc = Self::identity(self.n);
        let mut base = self.clone();
        while p > 0 {
            if p & 1 == 1 {
                acc = acc.mul(&base);
            }
            p >>= 1;
            if p > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Largest entry of `|U†U − 𝟙|`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().mul(self);
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.get(i, j) - target).norm());
            }
        }
        worst
    }

    /// Pulls a nearly unitary matrix onto the unitary group with
    /// Newton–Schulz steps `U ← U (3 − U†U)/2`.
    pub fn unitarize(&mut self) {
        for _ in 0..4 {
            if self.unitarity_defect() < 1e-15 {
                return;
            }
            let g = self.adjoint().mul(self);
            let mut t = g;
            for v in t.data.iter_mut() {
                *v = -*v * 0.5;
            }
            for i in 0..self.n {
                t.data[i * self.n + i] += 1.5;
            }
            *self = self.mul(&t);
        }
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
