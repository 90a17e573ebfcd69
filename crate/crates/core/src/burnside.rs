//! Burnside rings: table of marks, mark homomorphism, products, idempotents and the
//! restriction / transfer / conjugation maps between subgroups.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::group::{PermGroup, Subgroup};
use crate::primes::prime_factors;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BurnsideError {
    #[error("denominator requires inverting {0}, which is not in the allowed prime set")]
    PrimeNotInverted(u64),
    #[error("incompatible subgroups")]
    Incompatible,
}

/// A rational number whose denominator only involves a fixed set of inverted primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SRational {
    value: BigRational,
    primes: BTreeSet<u64>,
}

fn denominator_primes(q: &BigRational) -> Vec<u64> {
    let d = q.denom().to_u64().expect("denominator too large");
    prime_factors(d)
}

impl SRational {
    pub fn new(value: BigRational, primes: &BTreeSet<u64>) -> Result<Self, BurnsideError> {
        for p in denominator_primes(&value) {
            if !primes.contains(&p) {
                return Err(BurnsideError::PrimeNotInverted(p));
            }
        }
        Ok(SRational { value, primes: primes.clone() })
    }
    pub fn integer(n: i64, primes: &BTreeSet<u64>) -> Self {
        SRational { value: BigRational::from_integer(BigInt::from(n)), primes: primes.clone() }
    }
    pub fn value(&self) -> &BigRational {
        &self.value
    }
    pub fn primes(&self) -> &BTreeSet<u64> {
        &self.primes
    }
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
    pub fn is_integer(&self) -> bool {
        self.value.is_integer()
    }
    pub fn add(&self, o: &SRational) -> Result<SRational, BurnsideError> {
        SRational::new(&self.value + &o.value, &self.primes)
    }
    pub fn sub(&self, o: &SRational) -> Result<SRational, BurnsideError> {
        SRational::new(&self.value - &o.value, &self.primes)
    }
    pub fn mul(&self, o: &SRational) -> Result<SRational, BurnsideError> {
        SRational::new(&self.value * &o.value, &self.primes)
    }
    pub fn div_int(&self, d: i64) -> Result<SRational, BurnsideError> {
        SRational::new(&self.value / BigRational::from_integer(BigInt::from(d)), &self.primes)
    }
}

impl fmt::Display for SRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `s[k][h] = |(G/H)^K|` over the classes of the subgroup lattice.
#[derive(Clone, Debug)]
pub struct TableOfMarks {
    pub matrix: Vec<Vec<i64>>,
}

/// Number of cosets gH fixed by K, i.e. `#{g : g^-1 K g ⊆ H} / |H|`.
pub fn fixed_cosets(g: &PermGroup, k: &Subgroup, h: &Subgroup) -> i64 {
    let count = (0..g.order()).filter(|&x| g.conjugate_subgroup(g.inv(x), k).is_subset_of(h)).count();
    (count / h.order()) as i64
}

pub fn marks(g: &PermGroup) -> TableOfMarks {
    let lat = g.lattice();
    let n = lat.len();
    let mut matrix = vec![vec![0i64; n]; n];
    for k in 0..n {
        for h in 0..n {
            matrix[k][h] = fixed_cosets(g, lat.rep(k), lat.rep(h));
        }
    }
    TableOfMarks { matrix }
}

/// An element of A(L) ⊗ Z[S^-1] for a subgroup L of a catalog group, written in the
/// basis {L/K} over the subgroup classes of L (L realized as its own permutation group).
#[derive(Clone, Debug)]
pub struct BurnsideElt {
    pub level: PermGroup,
    pub coeffs: Vec<SRational>,
}

impl BurnsideElt {
    pub fn zero(level: &PermGroup, primes: &BTreeSet<u64>) -> Self {
        let n = level.lattice().len();
        BurnsideElt { level: level.clone(), coeffs: vec![SRational::integer(0, primes); n] }
    }
    /// The basis element {L/K} for the class `k` of L's lattice.
    pub fn basis(level: &PermGroup, k: usize, primes: &BTreeSet<u64>) -> Self {
        let mut e = Self::zero(level, primes);
        e.coeffs[k] = SRational::integer(1, primes);
        e
    }
    pub fn unit(level: &PermGroup, primes: &BTreeSet<u64>) -> Self {
        let top = level.lattice().top();
        Self::basis(level, top, primes)
    }
    fn primes(&self) -> BTreeSet<u64> {
        self.coeffs.first().map(|c| c.primes().clone()).unwrap_or_default()
    }
    pub fn add(&self, o: &BurnsideElt) -> Result<BurnsideElt, BurnsideError> {
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect::<Result<_, _>>()?;
        Ok(BurnsideElt { level: self.level.clone(), coeffs })
    }
    pub fn scale(&self, c: &SRational) -> Result<BurnsideElt, BurnsideError> {
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect::<Result<_, _>>()?;
        Ok(BurnsideElt { level: self.level.clone(), coeffs })
    }
    pub fn coeff_values(&self) -> Vec<BigRational> {
        self.coeffs.iter().map(|c| c.value().clone()).collect()
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Mark homomorphism χ: values χ_K(x) = Σ_H x_H s(K,H).
pub fn mark_hom(x: &BurnsideElt) -> Result<Vec<SRational>, BurnsideError> {
    let tom = marks(&x.level);
    let primes = x.primes();
    let n = tom.matrix.len();
    (0..n)
        .map(|k| {
            let mut s = SRational::integer(0, &primes);
            for h in 0..n {
                if tom.matrix[k][h] != 0 {
                    s = s.add(&x.coeffs[h].mul(&SRational::integer(tom.matrix[k][h], &primes))?)?;
                }
            }
            Ok(s)
        })
        .collect()
}

/// Solve `Σ_H c_H s(K,H) = v_K` by back-substitution from the largest class down.
pub fn from_marks(level: &PermGroup, v: &[SRational]) -> Result<BurnsideElt, BurnsideError> {
    let tom = marks(level);
    let n = v.len();
    let primes = v.first().map(|c| c.primes().clone()).unwrap_or_default();
    let mut c = vec![SRational::integer(0, &primes); n];
    for k in (0..n).rev() {
        let mut rhs = v[k].clone();
        for h in k + 1..n {
            if tom.matrix[k][h] != 0 {
                rhs = rhs.sub(&c[h].mul(&SRational::integer(tom.matrix[k][h], &primes))?)?;
            }
        }
        c[k] = rhs.div_int(tom.matrix[k][k])?;
    }
    Ok(BurnsideElt { level: level.clone(), coeffs: c })
}

pub fn burnside_mul(a: &BurnsideElt, b: &BurnsideElt) -> Result<BurnsideElt, BurnsideError> {
    let xa = mark_hom(a)?;
    let xb = mark_hom(b)?;
    let prod: Vec<SRational> = xa.iter().zip(&xb).map(|(x, y)| x.mul(y)).collect::<Result<_, _>>()?;
    from_marks(&a.level, &prod)
}

/// Primitive idempotents e_H of A(G)[S^-1], one per subgroup class.
pub fn idempotents(g: &PermGroup, primes: &BTreeSet<u64>) -> Result<Vec<BurnsideElt>, BurnsideError> {
    for p in prime_factors(g.order() as u64) {
        if !primes.contains(&p) {
            return Err(BurnsideError::PrimeNotInverted(p));
        }
    }
    let n = g.lattice().len();
    (0..n)
        .map(|h| {
            let v: Vec<SRational> = (0..n).map(|k| SRational::integer((k == h) as i64, primes)).collect();
            from_marks(g, &v)
        })
        .collect()
}

/// Transfer A(L) → A(H) for L ≤ H (both realized on the same points): {L/K} ↦ {H/K}.
pub fn transfer(x: &BurnsideElt, h: &PermGroup) -> Result<BurnsideElt, BurnsideError> {
    let l = &x.level;
    if l.elements().iter().any(|p| h.index_of(p).is_none()) {
        return Err(BurnsideError::Incompatible);
    }
    let primes = x.primes();
    let mut out = BurnsideElt::zero(h, &primes);
    for (k, c) in x.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let ks = h.embed(l, l.lattice().rep(k));
        let kk = h.lattice().class_of(&ks);
        out.coeffs[kk] = out.coeffs[kk].add(c)?;
    }
    Ok(out)
}

/// Restriction A(H) → A(L) for L ≤ H: decompose each H/K into L-orbits.
pub fn restriction(x: &BurnsideElt, l: &PermGroup) -> Result<BurnsideElt, BurnsideError> {
    let h = &x.level;
    if l.elements().iter().any(|p| h.index_of(p).is_none()) {
        return Err(BurnsideError::Incompatible);
    }
    let primes = x.primes();
    let l_in_h = h.embed(l, &l.whole());
    let mut out = BurnsideElt::zero(l, &primes);
    for (k, c) in x.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let krep = h.lattice().rep(k);
        for (q, _) in h.double_coset_orbits(&l_in_h, krep) {
            let q_in_l = l.embed(h, &q);
            let qc = l.lattice().class_of(&q_in_l);
            out.coeffs[qc] = out.coeffs[qc].add(c)?;
        }
    }
    Ok(out)
}

/// Conjugation A(L) → A(gLg^-1) inside the ambient group `g_amb`.
pub fn conjugation(x: &BurnsideElt, g_amb: &PermGroup, g: usize) -> Result<(PermGroup, BurnsideElt), BurnsideError> {
    let l = &x.level;
    let l_in = g_amb.embed(l, &l.whole());
    let target_sub = g_amb.conjugate_subgroup(g, &l_in);
    let target = g_amb.subgroup_as_group(&target_sub, &format!("{}^g", l.name()));
    let primes = x.primes();
    let mut out = BurnsideElt::zero(&target, &primes);
    for (k, c) in x.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let ks = g_amb.embed(l, l.lattice().rep(k));
        let gk = g_amb.conjugate_subgroup(g, &ks);
        let kc = target.lattice().class_of(&target.embed(g_amb, &gk));
        out.coeffs[kc] = out.coeffs[kc].add(c)?;
    }
    Ok((target, out))
}

/// Independent product oracle: decompose G/H × G/K into orbits by enumeration.
pub fn product_by_orbits(g: &PermGroup, h: usize, k: usize) -> Vec<i64> {
    let lat = g.lattice();
    let (hr, kr) = (lat.rep(h), lat.rep(k));
    let mut counts = vec![0i64; lat.len()];
    for (q, _) in g.double_coset_orbits(hr, kr) {
        // orbits of G on G/H × G/K ↔ H-orbits on G/K, with stabilizer H ∩ gKg^-1
        counts[lat.class_of(&q)] += 1;
    }
    counts
}

pub fn rational_to_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Convenience: exact rational from i64 pair.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
