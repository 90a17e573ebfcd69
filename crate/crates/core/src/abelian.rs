//! Finitely generated abelian groups: canonical invariants, diagonal presentations,
//! subgroups, kernels, quotients and homology with coordinates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::intmat::{snf, Mat, Track};

/// Rank plus invariant factors `d_1 | d_2 | ...`, all `d_i >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FgAbelian {
    pub rank: usize,
    pub invariant_factors: Vec<BigInt>,
}

fn factor_big(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        let mut e = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        if e > 0 {
            out.push((d.clone(), e));
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

impl FgAbelian {
    pub fn zero() -> Self {
        FgAbelian::default()
    }
    pub fn free(rank: usize) -> Self {
        FgAbelian { rank, invariant_factors: vec![] }
    }
    pub fn cyclic(n: u64) -> Self {
        FgAbelian::from_moduli(&[BigInt::from(n)])
    }
    /// From an arbitrary list of cyclic orders (0 meaning Z, 1 ignored).
    pub fn from_moduli(moduli: &[BigInt]) -> Self {
        let mut rank = 0;
        let mut powers: Vec<(BigInt, Vec<BigInt>)> = Vec::new();
        for m in moduli {
            if m.is_zero() {
                rank += 1;
                continue;
            }
            for (p, e) in factor_big(m) {
                let q = num_traits::pow(p.clone(), e as usize);
                match powers.iter_mut().find(|(pp, _)| *pp == p) {
                    Some((_, v)) => v.push(q),
                    None => powers.push((p, vec![q])),
                }
            }
        }
        for (_, v) in powers.iter_mut() {
            v.sort();
            v.reverse();
        }
        let len = powers.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        let mut factors: Vec<BigInt> = (0..len)
            .map(|i| powers.iter().fold(BigInt::one(), |acc, (_, v)| acc * v.get(i).cloned().unwrap_or_else(BigInt::one)))
            .collect();
        factors.reverse();
        FgAbelian { rank, invariant_factors: factors }
    }
    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.invariant_factors.is_empty()
    }
    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().fold(BigInt::one(), |a, b| a * b)
    }
    /// Elementary divisors of the p-primary part, ascending.
    pub fn primary(&self, p: u64) -> Vec<BigInt> {
        let p = BigInt::from(p);
        let mut out = Vec::new();
        for d in &self.invariant_factors {
            let mut d = d.clone();
            let mut q = BigInt::one();
            while (&d % &p).is_zero() {
                d /= &p;
                q *= &p;
            }
            if q > BigInt::one() {
                out.push(q);
            }
        }
        out.sort();
        out
    }
    /// Localization at p: same rank, only p-power torsion.
    pub fn localize(&self, p: u64) -> FgAbelian {
        let mut m = self.primary(p);
        m.extend(std::iter::repeat(BigInt::zero()).take(self.rank));
        FgAbelian::from_moduli(&m)
    }
    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = Vec::new();
        for d in &self.invariant_factors {
            for (p, _) in factor_big(d) {
                let p = p.to_u64().unwrap();
                if !ps.contains(&p) {
                    ps.push(p);
                }
            }
        }
        ps.sort();
        ps
    }
    /// Every torsion element is killed by `n`.
    pub fn torsion_exponent_divides(&self, n: u64) -> bool {
        let n = BigInt::from(n);
        self.invariant_factors.iter().all(|d| (&n % d).is_zero())
    }
    /// Number of cyclic summands in the primary decomposition plus rank.
    pub fn primary_summand_count(&self) -> usize {
        self.rank + self.primes().iter().map(|&p| self.primary(p).len()).sum::<usize>()
    }
    pub fn direct_sum(&self, other: &FgAbelian) -> FgAbelian {
        let mut m: Vec<BigInt> = self.invariant_factors.clone();
        m.extend(other.invariant_factors.iter().cloned());
        m.extend(std::iter::repeat(BigInt::zero()).take(self.rank + other.rank));
        FgAbelian::from_moduli(&m)
    }
    /// Dimension of `self ⊗ F_p`.
    pub fn dim_mod(&self, p: u64) -> usize {
        self.rank + self.primary(p).len()
    }
}

impl fmt::Display for FgAbelian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.invariant_factors {
            parts.push(format!("Z/{d}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for FgAbelian {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FgAbelian", 2)?;
        st.serialize_field("rank", &self.rank)?;
        let f: Vec<String> = self.invariant_factors.iter().map(|d| d.to_string()).collect();
        st.serialize_field("invariant_factors", &f)?;
        st.end()
    }
}

/// A diagonally presented group `⊕ Z/m_i` with `m_i = 0` (free) or `m_i >= 2`.
/// Elements are coordinate vectors, reduced modulo the finite moduli.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbGroup {
    pub moduli: Vec<BigInt>,
}

impl AbGroup {
    pub fn new(moduli: Vec<BigInt>) -> Self {
        assert!(moduli.iter().all(|m| m.is_zero() || *m > BigInt::one()));
        AbGroup { moduli }
    }
    pub fn trivial() -> Self {
        AbGroup { moduli: vec![] }
    }
    pub fn free(n: usize) -> Self {
        AbGroup { moduli: vec![BigInt::zero(); n] }
    }
    pub fn ngens(&self) -> usize {
        self.moduli.len()
    }
    pub fn invariants(&self) -> FgAbelian {
        FgAbelian::from_moduli(&self.moduli)
    }
    pub fn is_trivial(&self) -> bool {
        self.moduli.is_empty()
    }
    pub fn reduce(&self, v: &mut [BigInt]) {
        for (x, m) in v.iter_mut().zip(&self.moduli) {
            if !m.is_zero() {
                *x = x.mod_floor(m);
            }
        }
    }
    pub fn reduce_mat(&self, a: &Mat) -> Mat {
        let mut out = a.clone();
        for i in 0..a.rows() {
            let m = &self.moduli[i];
            if !m.is_zero() {
                for j in 0..a.cols() {
                    out.set(i, j, a.get(i, j).mod_floor(m));
                }
            }
        }
        out
    }
    pub fn is_zero_elem(&self, v: &[BigInt]) -> bool {
        v.iter().zip(&self.moduli).all(|(x, m)| if m.is_zero() { x.is_zero() } else { (x % m).is_zero() })
    }
    /// Diagonal relation matrix of the finite moduli (one column per finite cyclic factor).
    pub fn relation_matrix(&self) -> Mat {
        let fin: Vec<usize> = (0..self.ngens()).filter(|&i| !self.moduli[i].is_zero()).collect();
        let mut m = Mat::zeros(self.ngens(), fin.len());
        for (c, &i) in fin.iter().enumerate() {
            m.set(i, c, self.moduli[i].clone());
        }
        m
    }
    pub fn direct_sum(groups: &[&AbGroup]) -> AbGroup {
        AbGroup { moduli: groups.iter().flat_map(|g| g.moduli.iter().cloned()).collect() }
    }
    /// Two homomorphisms `self -> target` agree.
    pub fn maps_equal(target: &AbGroup, a: &Mat, b: &Mat) -> bool {
        target.reduce_mat(&a.sub(b)).is_zero()
    }
}

/// `Z^n / colspan(rels)` as a diagonal group, with projection from `Z^n` and a lift back.
pub fn quotient_free(n: usize, rels: &Mat) -> (AbGroup, Mat, Mat) {
    assert_eq!(rels.rows(), n);
    let s = snf(rels, Track { u: true, u_inv: true, v: false, v_inv: false });
    let u = s.u.unwrap();
    let ui = s.u_inv.unwrap();
    let mut keep = Vec::new();
    let mut moduli = Vec::new();
    for i in 0..n {
        let d = if i < s.rank { s.diag[i].clone() } else { BigInt::zero() };
        if !d.is_one() {
            keep.push(i);
            moduli.push(d);
        }
    }
    (AbGroup::new(moduli), u.select_rows(&keep), ui.select_cols(&keep))
}

/// A subgroup of an ambient `AbGroup`, generated by given elements.
#[derive(Clone, Debug)]
pub struct SubgroupOf {
    pub group: AbGroup,
    /// Ambient coordinates of the subgroup's generators (columns).
    pub inclusion: Mat,
    gens: Mat,
    u: Mat,
    v: Mat,
    diag: Vec<BigInt>,
    rank: usize,
    proj: Mat,
}

impl SubgroupOf {
    /// Subgroup of `ambient` generated by the columns of `x`.
    pub fn generated(ambient: &AbGroup, x: &Mat) -> SubgroupOf {
        let n = ambient.ngens();
        assert_eq!(x.rows(), n);
        let k = x.cols();
        let m = x.hstack(&ambient.relation_matrix());
        let s = snf(&m, Track { u: true, u_inv: false, v: true, v_inv: false });
        let v = s.v.unwrap();
        let u = s.u.unwrap();
        let kernel_y = v.row_range(0, k).col_range(s.rank, m.cols());
        let (group, proj, lift) = quotient_free(k, &kernel_y);
        let inclusion = ambient.reduce_mat(&x.mul(&lift));
        SubgroupOf { group, inclusion, gens: x.clone(), u, v, diag: s.diag, rank: s.rank, proj }
    }

    /// Coordinates in the subgroup of an ambient element, if it lies in the subgroup.
    pub fn coords(&self, a: &[BigInt]) -> Option<Vec<BigInt>> {
        let ua = self.u.mul_vec(a);
        let mut z = vec![BigInt::zero(); self.v.rows()];
        for (i, val) in ua.iter().enumerate() {
            if i < self.rank {
                let (q, r) = val.div_rem(&self.diag[i]);
                if !r.is_zero() {
                    return None;
                }
                z[i] = q;
            } else if !val.is_zero() {
                return None;
            }
        }
        let w = self.v.mul_vec(&z);
        let y: Vec<BigInt> = w[..self.gens.cols()].to_vec();
        let mut c = self.proj.mul_vec(&y);
        self.group.reduce(&mut c);
        Some(c)
    }

    pub fn contains(&self, a: &[BigInt]) -> bool {
        self.coords(a).is_some()
    }

    /// Matrix (in subgroup coordinates) of ambient elements given as columns; panics if outside.
    pub fn coords_mat(&self, a: &Mat) -> Mat {
        let cols: Vec<Vec<BigInt>> = (0..a.cols())
            .map(|j| self.coords(&a.column(j)).expect("element outside subgroup"))
            .collect();
        Mat::from_columns(&cols, self.group.ngens())
    }
}

/// Kernel of `f: a -> b` (matrix in coordinates) as a subgroup of `a`.
pub fn kernel(a: &AbGroup, b: &AbGroup, f: &Mat) -> SubgroupOf {
    assert_eq!((f.rows(), f.cols()), (b.ngens(), a.ngens()));
    let m = f.hstack(&b.relation_matrix());
    let s = snf(&m, Track { u: false, u_inv: false, v: true, v_inv: false });
    let v = s.v.unwrap();
    let x = v.row_range(0, a.ngens()).col_range(s.rank, m.cols());
    SubgroupOf::generated(a, &x)
}

/// Cokernel of `f: a -> b`: the quotient of `b` by the image, with projection from `b`.
pub fn cokernel(b: &AbGroup, f: &Mat) -> (AbGroup, Mat) {
    let rels = f.hstack(&b.relation_matrix());
    let (g, proj, _) = quotient_free(b.ngens(), &rels);
    (g, proj)
}

/// Homology `ker(out) / im(inc)` at a chain group of rank `n`, with coordinates.
#[derive(Clone, Debug)]
pub struct HomologyGroup {
    pub group: AbGroup,
    /// `coords * z` gives the class of a cycle `z` (then reduce).
    pub coords: Mat,
    /// Columns are representative cycles of the generators.
    pub reps: Mat,
}

impl HomologyGroup {
    pub fn class_of(&self, z: &[BigInt]) -> Vec<BigInt> {
        let mut c = self.coords.mul_vec(z);
        self.group.reduce(&mut c);
        c
    }
}

/// `inc: C_{d+1} -> C_d` (n rows) and `out: C_d -> C_{d-1}` (n columns).
pub fn homology(n: usize, inc: &Mat, out: &Mat) -> HomologyGroup {
    assert_eq!(inc.rows(), n);
    assert_eq!(out.cols(), n);
    let s = snf(out, Track { u: false, u_inv: false, v: true, v_inv: true });
    let v = s.v.unwrap();
    let vi = s.v_inv.unwrap();
    let r = s.rank;
    let kbasis = v.col_range(r, n);
    let kcoords = vi.row_range(r, n);
    let b = kcoords.mul(inc);
    let (group, proj, lift) = quotient_free(n - r, &b);
    HomologyGroup { group, coords: proj.mul(&kcoords), reps: kbasis.mul(&lift) }
}

pub fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

pub fn bigvec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
