//! Independent oracles shared by the integration tests. Nothing here calls the library's
//! Smith normal form or homology code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use hzsplit::abelian::FgAbelian;
use hzsplit::cellhom::ChainComplex;
use hzsplit::intmat::Mat;

pub fn rows(m: &Mat) -> Vec<Vec<BigInt>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).clone()).collect()).collect()
}

/// Rank over Q by exact rational elimination.
pub fn rank_q(a: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigRational>> =
        a.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        let piv = m[rank][c].clone();
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &piv;
                for j in c..ncols {
                    let t = &f * &m[rank][j];
                    m[i][j] -= t;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over F_p.
pub fn rank_mod(a: &[Vec<BigInt>], p: u64) -> usize {
    let pb = BigInt::from(p);
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .map(|r| r.iter().map(|x| x.mod_floor(&pb).try_into().unwrap()).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let inv = |x: u64| -> u64 { (1..p).find(|y| x * y % p == 1).unwrap() };
    let mut rank = 0;
    for c in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let s = inv(m[rank][c]);
        for j in 0..ncols {
            m[rank][j] = m[rank][j] * s % p;
        }
        for i in 0..m.len() {
            if i != rank && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..ncols {
                    m[i][j] = (m[i][j] + (p - f) * m[rank][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Nonzero elementary divisors, by a plain pivot-and-reduce diagonalization followed by
/// gcd/lcm normalization of the diagonal.
pub fn elementary_divisors(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let (r, c) = (m.len(), m.first().map_or(0, |x| x.len()));
    let mut diag = Vec::new();
    let mut t = 0;
    while t < r.min(c) {
        // smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..r {
            for j in t..c {
                if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        for row in m.iter_mut() {
            row.swap(t, bj);
        }
        let mut clean = true;
        for i in t + 1..r {
            let q = m[i][t].div_floor(&m[t][t]);
            if !q.is_zero() {
                for j in t..c {
                    let s = &q * &m[t][j];
                    m[i][j] -= s;
                }
            }
            clean &= m[i][t].is_zero();
        }
        for j in t + 1..c {
            let q = m[t][j].div_floor(&m[t][t]);
            if !q.is_zero() {
                for i in t..r {
                    let s = &q * &m[i][t];
                    m[i][j] -= s;
                }
            }
            clean &= m[t][j].is_zero();
        }
        if clean {
            diag.push(m[t][t].abs());
            t += 1;
        }
    }
    // Normalize to a divisibility chain: repeatedly replace (a, b) by (gcd, lcm).
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            let (a, b) = (diag[i].clone(), diag[j].clone());
            diag[i] = a.gcd(&b);
            diag[j] = a.lcm(&b);
        }
    }
    diag
}

/// Integral homology of a based complex from the oracles above.
pub fn oracle_homology(c: &ChainComplex) -> Vec<FgAbelian> {
    let top = c.top();
    (0..=top)
        .map(|d| {
            let out = rows(&c.d(d as i64));
            let inc = rows(&c.d(d as i64 + 1));
            let rank = c.size(d) - rank_q(&out) - rank_q(&inc);
            let tors: Vec<BigInt> = elementary_divisors(&inc).into_iter().filter(|x| !x.is_one()).collect();
            let mut moduli = tors;
            moduli.extend(std::iter::repeat_n(BigInt::zero(), rank));
            FgAbelian::from_moduli(&moduli)
        })
        .collect()
}

/// Number of invariant factors of ∂_{d+1} divisible by p, read off ranks: rank_Q − rank_{F_p}.
pub fn p_torsion_count(c: &ChainComplex, d: usize, p: u64) -> usize {
    let inc = rows(&c.d(d as i64 + 1));
    rank_q(&inc) - rank_mod(&inc, p)
}

pub fn is_zero_product(a: &Mat, b: &Mat) -> bool {
    if a.cols() == 0 || b.rows() == 0 {
        return true;
    }
    a.mul(b).is_zero()
}
