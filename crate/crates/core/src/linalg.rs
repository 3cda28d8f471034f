//! Dense linear algebra over a [`FieldCtx`]: row reduction, rank,
//! null spaces and linear solves.

use crate::gf::FieldCtx;

/// Row-major dense matrix over GF(2^s).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

/// Reduced row echelon form plus pivot columns (one per nonzero row).
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u32>], cols: usize) -> Self {
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            m.row_mut(i).copy_from_slice(r);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    /// `row[dst] += factor * row[src]`
    fn axpy(&mut self, f: &FieldCtx, dst: usize, src: usize, factor: u32) {
        if factor == 0 {
            return;
        }
        for c in 0..self.cols {
            let v = f.mul(factor, self.get(src, c));
            self.data[dst * self.cols + c] ^= v;
        }
    }

    pub fn echelon(&self, f: &FieldCtx) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else { continue };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for x in m.row_mut(r) {
                *x = f.mul(*x, inv);
            }
            for i in 0..m.rows {
                if i != r {
                    let factor = m.get(i, c);
                    m.axpy(f, i, r, factor);
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.rows = r;
        m.data.truncate(r * m.cols);
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self, f: &FieldCtx) -> usize {
        self.echelon(f).pivots.len()
    }

    /// Basis of `{x : M x = 0}` as rows.
    pub fn null_space(&self, f: &FieldCtx) -> Matrix {
        let ech = self.echelon(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !ech.pivots.contains(c)).collect();
        let mut out = Matrix::zeros(free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            out.set(k, fc, 1);
            for (r, &pc) in ech.pivots.iter().enumerate() {
                // characteristic 2: -a = a
                out.set(k, pc, ech.matrix.get(r, fc));
            }
        }
        out
    }

    /// Some solution of `M x = b`, or `None` when inconsistent.
    pub fn solve(&self, f: &FieldCtx, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            aug.row_mut(r)[..self.cols].copy_from_slice(self.row(r));
            aug.set(r, self.cols, b[r]);
        }
        let ech = aug.echelon(f);
        if ech.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u32; self.cols];
        for (r, &pc) in ech.pivots.iter().enumerate() {
            x[pc] = ech.matrix.get(r, self.cols);
        }
        Some(x)
    }

    pub fn mul_vec(&self, f: &FieldCtx, v: &[u32]) -> Vec<u32> {
        (0..self.rows).map(|r| dot(f, self.row(r), v)).collect()
    }
}

impl Echelon {
    /// Reduce `v` against the pivots; zero residual iff `v` is in the row space.
    pub fn residual(&self, f: &FieldCtx, v: &[u32]) -> Vec<u32> {
        let mut v = v.to_vec();
        for (r, &pc) in self.pivots.iter().enumerate() {
            let factor = v[pc];
            if factor != 0 {
                for (x, &m) in v.iter_mut().zip(self.matrix.row(r)) {
                    *x ^= f.mul(factor, m);
                }
            }
        }
        v
    }

    pub fn contains(&self, f: &FieldCtx, v: &[u32]) -> bool {
        self.residual(f, v).iter().all(|&x| x == 0)
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn dot(f: &FieldCtx, a: &[u32], b: &[u32]) -> u32 {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| acc ^ f.mul(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_is_orthogonal_and_full() {
        let f = FieldCtx::with_default_modulus(4).unwrap();
        let m = Matrix::from_rows(&[vec![1, 2, 3, 4, 5], vec![0, 1, 7, 9, 2], vec![1, 3, 4, 13, 7]], 5);
        let rank = m.rank(&f);
        let ns = m.null_space(&f);
        assert_eq!(ns.rows, 5 - rank);
        for k in 0..ns.rows {
            assert!(m.mul_vec(&f, ns.row(k)).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn solve_and_inconsistency() {
        let f = FieldCtx::with_default_modulus(2).unwrap();
        let m = Matrix::from_rows(&[vec![1, 1], vec![2, 2]], 2);
        // second row is 2 * first row
        assert!(m.solve(&f, &[1, 3]).is_none());
        let x = m.solve(&f, &[1, 2]).unwrap();
        assert_eq!(m.mul_vec(&f, &x), vec![1, 2]);
    }
}
