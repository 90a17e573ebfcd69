//! Dense integer matrices over `BigInt` and a diagonalizing Smith reduction with transforms.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Vec<BigInt>>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            let s: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", s.join(", "))?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![vec![BigInt::zero(); cols]; rows] }
    }
    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = BigInt::one();
        }
        m
    }
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Mat {
        assert_eq!(entries.len(), rows * cols);
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i][j] = BigInt::from(entries[i * cols + j]);
            }
        }
        m
    }
    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Mat {
        assert!(rows.iter().all(|r| r.len() == cols));
        Mat { rows: rows.len(), cols, data: rows }
    }
    pub fn from_columns(cols: &[Vec<BigInt>], rows: usize) -> Mat {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in 0..rows {
                m.data[i][j] = c[i].clone();
            }
        }
        m
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i][j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i][j] = v;
    }
    pub fn add_to(&mut self, i: usize, j: usize, v: &BigInt) {
        self.data[i][j] += v;
    }
    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i]
    }
    pub fn column(&self, j: usize) -> Vec<BigInt> {
        self.data.iter().map(|r| r[j].clone()).collect()
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }
    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[j][i] = self.data[i][j].clone();
            }
        }
        m
    }
    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut m = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k][j];
                    if !b.is_zero() {
                        m.data[i][j] += a * b;
                    }
                }
            }
        }
        m
    }
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        self.data
            .iter()
            .map(|r| {
                let mut s = BigInt::zero();
                for (a, b) in r.iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        s += a * b;
                    }
                }
                s
            })
            .collect()
    }
    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[i][j] += &other.data[i][j];
            }
        }
        m
    }
    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.scale(&BigInt::from(-1)))
    }
    pub fn scale(&self, c: &BigInt) -> Mat {
        let mut m = self.clone();
        for r in m.data.iter_mut() {
            for x in r.iter_mut() {
                *x *= c;
            }
        }
        m
    }
    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        Mat { rows: idx.len(), cols: self.cols, data: idx.iter().map(|&i| self.data[i].clone()).collect() }
    }
    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat {
            rows: self.rows,
            cols: idx.len(),
            data: self.data.iter().map(|r| idx.iter().map(|&j| r[j].clone()).collect()).collect(),
        }
    }
    pub fn row_range(&self, a: usize, b: usize) -> Mat {
        self.select_rows(&(a..b).collect::<Vec<_>>())
    }
    pub fn col_range(&self, a: usize, b: usize) -> Mat {
        self.select_cols(&(a..b).collect::<Vec<_>>())
    }
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().chain(b.iter()).cloned().collect())
            .collect();
        Mat { rows: self.rows, cols: self.cols + other.cols, data }
    }
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Mat { rows: self.rows + other.rows, cols: self.cols, data }
    }
    pub fn diag(entries: &[BigInt]) -> Mat {
        let mut m = Mat::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.data[i][i] = e.clone();
        }
        m
    }
    /// Entries as `i64`, panicking on overflow; for tests and display.
    pub fn to_i64(&self) -> Vec<Vec<i64>> {
        self.data.iter().map(|r| r.iter().map(|x| x.to_i64().expect("entry overflows i64")).collect()).collect()
    }
    pub fn reduce_mod(&self, p: &BigInt) -> Mat {
        let mut m = self.clone();
        for r in m.data.iter_mut() {
            for x in r.iter_mut() {
                *x = x.mod_floor(p);
            }
        }
        m
    }
}

/// Result of diagonalizing `A`: `U A V = D` with `D` diagonal, nonzero pivots first and positive.
#[derive(Clone, Debug)]
pub struct Snf {
    pub diag: Vec<BigInt>,
    pub rank: usize,
    pub u: Option<Mat>,
    pub u_inv: Option<Mat>,
    pub v: Option<Mat>,
    pub v_inv: Option<Mat>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Track {
    pub u: bool,
    pub u_inv: bool,
    pub v: bool,
    pub v_inv: bool,
}

impl Track {
    pub const NONE: Track = Track { u: false, u_inv: false, v: false, v_inv: false };
    pub const ALL: Track = Track { u: true, u_inv: true, v: true, v_inv: true };
}

struct Reducer {
    a: Vec<Vec<BigInt>>,
    m: usize,
    n: usize,
    u: Option<Vec<Vec<BigInt>>>,
    u_inv: Option<Vec<Vec<BigInt>>>,
    v: Option<Vec<Vec<BigInt>>>,
    v_inv: Option<Vec<Vec<BigInt>>>,
}

fn row_axpy(rows: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    // rows[dst] -= q * rows[src]
    let (d, s) = if dst < src {
        let (lo, hi) = rows.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in d.iter_mut().zip(s.iter()) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

fn col_axpy(rows: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    // column dst -= q * column src
    for r in rows.iter_mut() {
        if !r[src].is_zero() {
            let t = q * &r[src];
            r[dst] -= t;
        }
    }
}

fn col_swap(rows: &mut [Vec<BigInt>], a: usize, b: usize) {
    for r in rows.iter_mut() {
        r.swap(a, b);
    }
}

impl Reducer {
    fn row_op(&mut self, dst: usize, src: usize, q: &BigInt) {
        row_axpy(&mut self.a, dst, src, q);
        if let Some(u) = &mut self.u {
            row_axpy(u, dst, src, q);
        }
        if let Some(ui) = &mut self.u_inv {
            // inverse: column src += q * column dst
            col_axpy(ui, src, dst, &-q);
        }
    }
    fn row_swap(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if let Some(u) = &mut self.u {
            u.swap(i, j);
        }
        if let Some(ui) = &mut self.u_inv {
            col_swap(ui, i, j);
        }
    }
    fn row_neg(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -&*x;
        }
        if let Some(u) = &mut self.u {
            for x in u[i].iter_mut() {
                *x = -&*x;
            }
        }
        if let Some(ui) = &mut self.u_inv {
            for r in ui.iter_mut() {
                r[i] = -&r[i];
            }
        }
    }
    fn col_op(&mut self, dst: usize, src: usize, q: &BigInt) {
        col_axpy(&mut self.a, dst, src, q);
        if let Some(v) = &mut self.v {
            col_axpy(v, dst, src, q);
        }
        if let Some(vi) = &mut self.v_inv {
            // inverse: row src += q * row dst
            row_axpy(vi, src, dst, &-q);
        }
    }
    fn col_swap(&mut self, i: usize, j: usize) {
        col_swap(&mut self.a, i, j);
        if let Some(v) = &mut self.v {
            col_swap(v, i, j);
        }
        if let Some(vi) = &mut self.v_inv {
            vi.swap(i, j);
        }
    }

    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let mut best_abs: Option<BigInt> = None;
        for i in t..self.m {
            for j in t..self.n {
                let x = &self.a[i][j];
                if x.is_zero() {
                    continue;
                }
                let ax = x.abs();
                if best_abs.as_ref().map_or(true, |b| ax < *b) {
                    let one = ax.is_one();
                    best_abs = Some(ax);
                    best = Some((i, j));
                    if one {
                        return best;
                    }
                }
            }
        }
        best
    }

    fn run(&mut self) -> usize {
        let mut t = 0;
        while t < self.m.min(self.n) {
            let Some((pi, pj)) = self.find_pivot(t) else { break };
            if pi != t {
                self.row_swap(pi, t);
            }
            if pj != t {
                self.col_swap(pj, t);
            }
            loop {
                let mut changed = false;
                for i in t + 1..self.m {
                    if self.a[i][t].is_zero() {
                        continue;
                    }
                    let q = self.a[i][t].div_floor(&self.a[t][t]);
                    self.row_op(i, t, &q);
                    if !self.a[i][t].is_zero() {
                        self.row_swap(i, t);
                        changed = true;
                    }
                }
                for j in t + 1..self.n {
                    if self.a[t][j].is_zero() {
                        continue;
                    }
                    let q = self.a[t][j].div_floor(&self.a[t][t]);
                    self.col_op(j, t, &q);
                    if !self.a[t][j].is_zero() {
                        self.col_swap(j, t);
                        changed = true;
                    }
                }
                if !changed {
                    let clean = (t + 1..self.m).all(|i| self.a[i][t].is_zero())
                        && (t + 1..self.n).all(|j| self.a[t][j].is_zero());
                    if clean {
                        break;
                    }
                }
            }
            if self.a[t][t].is_negative() {
                self.row_neg(t);
            }
            t += 1;
        }
        t
    }
}

/// Diagonalize `a` by unimodular row and column operations.
pub fn snf(a: &Mat, track: Track) -> Snf {
    let (m, n) = (a.rows, a.cols);
    let mut r = Reducer {
        a: a.data.clone(),
        m,
        n,
        u: track.u.then(|| Mat::identity(m).data),
        u_inv: track.u_inv.then(|| Mat::identity(m).data),
        v: track.v.then(|| Mat::identity(n).data),
        v_inv: track.v_inv.then(|| Mat::identity(n).data),
    };
    let rank = r.run();
    let diag = (0..m.min(n)).map(|i| r.a[i][i].clone()).collect();
    let wrap = |d: Option<Vec<Vec<BigInt>>>, k: usize| d.map(|data| Mat { rows: k, cols: k, data });
    Snf { diag, rank, u: wrap(r.u, m), u_inv: wrap(r.u_inv, m), v: wrap(r.v, n), v_inv: wrap(r.v_inv, n) }
}

/// Rank over Q.
pub fn rank(a: &Mat) -> usize {
    snf(a, Track::NONE).rank
}

/// Rank over F_p by Gaussian elimination.
pub fn rank_mod_p(a: &Mat, p: u64) -> usize {
    let pb = BigInt::from(p);
    let mut m: Vec<Vec<u64>> = a
        .data
        .iter()
        .map(|r| r.iter().map(|x| x.mod_floor(&pb).to_u64().unwrap()).collect())
        .collect();
    let inv = |x: u64| -> u64 {
        let (mut b, mut e, mut r) = (x % p, p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    for c in 0..a.cols {
        let Some(piv) = (rank..a.rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, piv);
        let iv = inv(m[rank][c]);
        for x in m[rank].iter_mut() {
            *x = *x * iv % p;
        }
        for r in 0..a.rows {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for j in c..a.cols {
                    let sub = f * m[rank][j] % p;
                    m[r][j] = (m[r][j] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transforms_are_consistent() {
        let a = Mat::from_i64(3, 4, &[2, 4, 4, 6, -6, 6, 12, 0, 10, -4, -16, 8]);
        let s = snf(&a, Track::ALL);
        let (u, ui, v, vi) = (s.u.unwrap(), s.u_inv.unwrap(), s.v.unwrap(), s.v_inv.unwrap());
        assert_eq!(u.mul(&ui), Mat::identity(3));
        assert_eq!(v.mul(&vi), Mat::identity(4));
        let d = u.mul(&a).mul(&v);
        for i in 0..3 {
            for j in 0..4 {
                if i != j {
                    assert!(d.get(i, j).is_zero());
                }
            }
        }
        assert_eq!(s.rank, 3);
    }
}
