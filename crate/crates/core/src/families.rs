//! Families of subgroups, the prime set a splitting along a family requires, the
//! coefficients c_H, and the sub-Mackey functors M_F and N_F of the Burnside functor.

use std::collections::BTreeSet;

use num_rational::BigRational;
use thiserror::Error;

use crate::burnside::{self, marks, mark_hom, BurnsideElt, BurnsideError, SRational};
use crate::group::{PermGroup, Subgroup};
use crate::primes::prime_factors;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("class set is not closed under subconjugacy (class {0} missing)")]
    NotClosed(usize),
    #[error("coefficient needs prime {0} inverted")]
    PrimeNeeded(u64),
    #[error(transparent)]
    Burnside(#[from] BurnsideError),
}

/// A family, stored as membership over the subgroup classes of `group`.
#[derive(Clone, Debug)]
pub struct Family {
    pub group: PermGroup,
    pub members: Vec<bool>,
}

impl Family {
    pub fn new(group: &PermGroup, members: Vec<bool>) -> Result<Family, FamilyError> {
        let lat = group.lattice();
        assert_eq!(members.len(), lat.len());
        for h in 0..lat.len() {
            if members[h] {
                for k in 0..lat.len() {
                    if lat.subconjugacy[k][h] && !members[k] {
                        return Err(FamilyError::NotClosed(k));
                    }
                }
            }
        }
        Ok(Family { group: group.clone(), members })
    }
    pub fn contains_class(&self, c: usize) -> bool {
        self.members[c]
    }
    pub fn contains(&self, s: &Subgroup) -> bool {
        self.members[self.group.lattice().class_of(s)]
    }
    pub fn union(&self, o: &Family) -> Result<Family, FamilyError> {
        Family::new(&self.group, self.members.iter().zip(&o.members).map(|(a, b)| *a || *b).collect())
    }
    pub fn intersection(&self, o: &Family) -> Result<Family, FamilyError> {
        Family::new(&self.group, self.members.iter().zip(&o.members).map(|(a, b)| *a && *b).collect())
    }
    pub fn member_classes(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i]).collect()
    }
}

/// Subgroups containing no conjugate of `k`.
pub fn family_not_containing(g: &PermGroup, k: &Subgroup) -> Family {
    let lat = g.lattice();
    let kc = lat.class_of(k);
    let members = (0..lat.len()).map(|h| !lat.subconjugacy[kc][h]).collect();
    Family::new(g, members).expect("complement of an up-set is a family")
}

/// Every family of the group (exhaustive over down-closed class sets).
pub fn all_families(g: &PermGroup) -> Vec<Family> {
    let n = g.lattice().len();
    assert!(n <= 12, "exhaustive enumeration limited to 12 classes");
    (0u32..(1 << n))
        .filter_map(|mask| Family::new(g, (0..n).map(|i| mask & (1 << i) != 0).collect()).ok())
        .collect()
}

/// Primes p admitting H ◁ J with H ∈ F, J ∉ F and |J/H| a power of p.
pub fn required_inverted_primes(f: &Family) -> BTreeSet<u64> {
    let g = &f.group;
    let lat = g.lattice();
    let mut out = BTreeSet::new();
    for jc in 0..lat.len() {
        if f.members[jc] {
            continue;
        }
        let j = lat.rep(jc);
        for h in lat.all_subgroups() {
            if !h.is_subset_of(j) || !f.contains(h) || !g.is_normal_in(h, j) {
                continue;
            }
            let idx = (j.order() / h.order()) as u64;
            let ps = prime_factors(idx);
            if ps.len() == 1 {
                out.insert(ps[0]);
            }
        }
    }
    out
}

/// Coefficients c_H (H ∈ F) with Σ_{H∈F} c_H s(K,H) = 1 for every K ∈ F, solved from the
/// largest class down. Returns the coefficients and the primes actually needed.
pub fn solve_c_h(f: &Family, primes: &BTreeSet<u64>) -> Result<(Vec<(usize, BigRational)>, BTreeSet<u64>), FamilyError> {
    let tom = marks(&f.group);
    let mem = f.member_classes();
    let all: BTreeSet<u64> = prime_factors(f.group.order() as u64).into_iter().collect();
    let mut c: Vec<Option<SRational>> = vec![None; tom.matrix.len()];
    for &k in mem.iter().rev() {
        let mut rhs = SRational::integer(1, &all);
        for &h in mem.iter().filter(|&&h| h > k) {
            let s = tom.matrix[k][h];
            if s != 0 {
                rhs = rhs.sub(&c[h].as_ref().unwrap().mul(&SRational::integer(s, &all))?)?;
            }
        }
        c[k] = Some(rhs.div_int(tom.matrix[k][k])?);
    }
    let mut needed = BTreeSet::new();
    let mut out = Vec::new();
    for &k in &mem {
        let v = c[k].as_ref().unwrap().value().clone();
        for p in prime_factors(num_traits::ToPrimitive::to_u64(v.denom()).unwrap()) {
            needed.insert(p);
        }
        out.push((k, v));
    }
    if let Some(&p) = needed.iter().find(|p| !primes.contains(p)) {
        return Err(FamilyError::PrimeNeeded(p));
    }
    Ok((out, needed))
}

/// The generators of M_F at one level L (class index in G's lattice): classes K of L's own
/// lattice whose members lie in F.
#[derive(Clone, Debug)]
pub struct MfLevel {
    pub level_class: usize,
    pub level: PermGroup,
    pub generators: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct MFunctor0 {
    pub family: Family,
    pub levels: Vec<MfLevel>,
}

pub fn mf_functor(f: &Family) -> MFunctor0 {
    let g = &f.group;
    let lat = g.lattice();
    let levels = (0..lat.len())
        .map(|lc| {
            let level = g.subgroup_as_group(lat.rep(lc), &format!("L{lc}"));
            let generators = (0..level.lattice().len())
                .filter(|&k| f.contains(&g.embed(&level, level.lattice().rep(k))))
                .collect();
            MfLevel { level_class: lc, level, generators }
        })
        .collect();
    MFunctor0 { family: f.clone(), levels }
}

/// x ∈ A(L)[S^-1] lies in the span of {L/K}, K ∈ F, iff its marks vanish off F;
/// it lies in the complement span of idempotents e_K (K ∉ F) iff its marks vanish on F.
fn marks_vanish(x: &BurnsideElt, g: &PermGroup, f: &Family, on_family: bool) -> Result<bool, BurnsideError> {
    let chi = mark_hom(x)?;
    let lat = x.level.lattice();
    Ok((0..lat.len()).all(|k| {
        let in_f = f.contains(&g.embed(&x.level, lat.rep(k)));
        in_f != on_family || chi[k].is_zero()
    }))
}

/// Check that M_F and N_F are closed under restriction, transfer and conjugation, for
/// every comparable pair of levels. N_F is only formed when `primes` covers |G|.
pub fn check_mf_closure(f: &Family, primes: &BTreeSet<u64>) -> Result<bool, FamilyError> {
    let g = &f.group;
    let lat = g.lattice();
    let mf = mf_functor(f);
    let full = prime_factors(g.order() as u64).iter().all(|p| primes.contains(p));
    let mut ok = true;
    for big in &mf.levels {
        let nl = big.level.lattice().len();
        let mut m_elems: Vec<BurnsideElt> =
            big.generators.iter().map(|&k| BurnsideElt::basis(&big.level, k, primes)).collect();
        let n_elems: Vec<BurnsideElt> = if full {
            burnside::idempotents(&big.level, primes)?
                .into_iter()
                .enumerate()
                .filter(|(k, _)| !f.contains(&g.embed(&big.level, big.level.lattice().rep(*k))))
                .map(|(_, e)| e)
                .collect()
        } else {
            vec![]
        };
        // direct-sum check at this level
        if full && m_elems.len() + n_elems.len() != nl {
            ok = false;
        }
        for small in &mf.levels {
            if !lat.subconjugacy[small.level_class][big.level_class] {
                continue;
            }
            let srep = lat.rep(small.level_class);
            let brep = lat.rep(big.level_class);
            if !srep.is_subset_of(brep) {
                continue;
            }
            for x in &m_elems {
                ok &= marks_vanish(&burnside::restriction(x, &small.level)?, g, f, false)?;
            }
            for x in &n_elems {
                ok &= marks_vanish(&burnside::restriction(x, &small.level)?, g, f, true)?;
            }
            for &k in &small.generators {
                let x = BurnsideElt::basis(&small.level, k, primes);
                ok &= marks_vanish(&burnside::transfer(&x, &big.level)?, g, f, false)?;
            }
            if full {
                for (k, e) in burnside::idempotents(&small.level, primes)?.into_iter().enumerate() {
                    if !f.contains(&g.embed(&small.level, small.level.lattice().rep(k))) {
                        ok &= marks_vanish(&burnside::transfer(&e, &big.level)?, g, f, true)?;
                    }
                }
            }
        }
        for w in lat.classes[big.level_class].normalizer.elements() {
            for x in m_elems.iter_mut() {
                let (_, y) = burnside::conjugation(x, g, *w)?;
                ok &= marks_vanish(&y, g, f, false)?;
            }
        }
    }
    Ok(ok)
}
