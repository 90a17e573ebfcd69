//! Finite permutation groups, subgroup lattices, Sylow subgroups and coset combinatorics.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::primes::{is_prime, prime_factors};

/// A permutation of `0..degree` in one-line image notation.
pub type Perm = Vec<u16>;

/// Largest group order for which the subgroup lattice is computed.
pub const MAX_LATTICE_ORDER: usize = 10_000;
const TABLE_LIMIT: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("unknown catalog group `{0}`")]
    UnknownCatalog(String),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("group of order {0} is too large for lattice enumeration")]
    TooLarge(usize),
    #[error("element set is not a subgroup")]
    NotSubgroup,
}

/// A subgroup, stored as the sorted list of indices into the ambient element list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    elems: Vec<usize>,
}

impl Subgroup {
    pub fn from_sorted(mut elems: Vec<usize>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        Subgroup { elems }
    }
    pub fn order(&self) -> usize {
        self.elems.len()
    }
    pub fn elements(&self) -> &[usize] {
        &self.elems
    }
    pub fn contains(&self, g: usize) -> bool {
        self.elems.binary_search(&g).is_ok()
    }
    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.elems.len() <= other.elems.len() && self.elems.iter().all(|&g| other.contains(g))
    }
    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        Subgroup { elems: self.elems.iter().copied().filter(|&g| other.contains(g)).collect() }
    }
    pub fn is_trivial(&self) -> bool {
        self.elems.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct SubgroupClass {
    pub representative: Subgroup,
    pub members: Vec<Subgroup>,
    /// `witnesses[i] * representative * witnesses[i]^-1 == members[i]`
    pub witnesses: Vec<usize>,
    pub normalizer: Subgroup,
    pub weyl_order: usize,
}

impl SubgroupClass {
    pub fn order(&self) -> usize {
        self.representative.order()
    }
}

#[derive(Clone, Debug)]
pub struct SubgroupLattice {
    pub classes: Vec<SubgroupClass>,
    /// `subconjugacy[k][h]` is true iff some conjugate of class `k` lies in class `h`.
    pub subconjugacy: Vec<Vec<bool>>,
    lookup: HashMap<Subgroup, (usize, usize)>,
}

impl SubgroupLattice {
    pub fn len(&self) -> usize {
        self.classes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
    /// Class index and member index of an arbitrary subgroup.
    pub fn locate(&self, s: &Subgroup) -> Option<(usize, usize)> {
        self.lookup.get(s).copied()
    }
    pub fn class_of(&self, s: &Subgroup) -> usize {
        self.locate(s).expect("subgroup not in lattice").0
    }
    /// Conjugating element `w` with `w * rep * w^-1 == s`.
    pub fn witness_of(&self, s: &Subgroup) -> usize {
        let (c, m) = self.locate(s).expect("subgroup not in lattice");
        self.classes[c].witnesses[m]
    }
    pub fn rep(&self, c: usize) -> &Subgroup {
        &self.classes[c].representative
    }
    pub fn all_subgroups(&self) -> impl Iterator<Item = &Subgroup> {
        self.classes.iter().flat_map(|c| c.members.iter())
    }
    pub fn subgroup_count(&self) -> usize {
        self.classes.iter().map(|c| c.members.len()).sum()
    }
    pub fn top(&self) -> usize {
        self.classes.len() - 1
    }
}

#[derive(Debug)]
pub struct PermGroup {
    name: String,
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
    table: Option<Vec<u32>>,
    inverse: Vec<usize>,
    orders: Vec<usize>,
    lattice: OnceLock<SubgroupLattice>,
}

impl Clone for PermGroup {
    fn clone(&self) -> Self {
        PermGroup {
            name: self.name.clone(),
            degree: self.degree,
            generators: self.generators.clone(),
            elements: self.elements.clone(),
            index: self.index.clone(),
            table: self.table.clone(),
            inverse: self.inverse.clone(),
            orders: self.orders.clone(),
            lattice: self.lattice.clone(),
        }
    }
}

fn compose(a: &Perm, b: &Perm) -> Perm {
    // (a*b)(x) = a(b(x))
    b.iter().map(|&x| a[x as usize]).collect()
}

fn identity_perm(n: usize) -> Perm {
    (0..n as u16).collect()
}

impl PermGroup {
    /// Closure of the generators; elements sorted lexicographically (identity first).
    pub fn from_generators(name: &str, degree: usize, generators: Vec<Perm>) -> Self {
        for g in &generators {
            assert_eq!(g.len(), degree, "generator has wrong degree");
            let mut seen = vec![false; degree];
            for &x in g {
                assert!(!seen[x as usize], "generator is not a permutation");
                seen[x as usize] = true;
            }
        }
        let id = identity_perm(degree);
        let mut set: HashSet<Perm> = HashSet::new();
        set.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = compose(g, &x);
                if set.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<Perm> = set.into_iter().collect();
        elements.sort();
        let index: HashMap<Perm, usize> =
            elements.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let n = elements.len();
        let table = if n <= TABLE_LIMIT {
            let mut t = vec![0u32; n * n];
            for i in 0..n {
                for j in 0..n {
                    t[i * n + j] = index[&compose(&elements[i], &elements[j])] as u32;
                }
            }
            Some(t)
        } else {
            None
        };
        let inverse: Vec<usize> = elements
            .iter()
            .map(|p| {
                let mut q = vec![0u16; degree];
                for (i, &x) in p.iter().enumerate() {
                    q[x as usize] = i as u16;
                }
                index[&q]
            })
            .collect();
        let mut g = PermGroup {
            name: name.to_string(),
            degree,
            generators,
            elements,
            index,
            table,
            inverse,
            orders: Vec::new(),
            lattice: OnceLock::new(),
        };
        g.orders = (0..n).map(|i| g.compute_order(i)).collect();
        g
    }

    fn compute_order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn order(&self) -> usize {
        self.elements.len()
    }
    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }
    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }
    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }
    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.index.get(p).copied()
    }
    pub fn identity(&self) -> usize {
        0
    }
    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.elements.len() + b] as usize,
            None => self.index[&compose(&self.elements[a], &self.elements[b])],
        }
    }
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }
    /// `g h g^-1`
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }
    pub fn element_order(&self, a: usize) -> usize {
        self.orders[a]
    }
    pub fn power(&self, a: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, a))
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup { elems: (0..self.order()).collect() }
    }
    pub fn trivial(&self) -> Subgroup {
        Subgroup { elems: vec![0] }
    }

    /// Subgroup generated by the given element indices.
    pub fn generate(&self, gens: &[usize]) -> Subgroup {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut out = vec![0usize];
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    out.push(y);
                    queue.push_back(y);
                }
            }
        }
        Subgroup::from_sorted(out)
    }

    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        if !elems.contains(&0) {
            return false;
        }
        let s: HashSet<usize> = elems.iter().copied().collect();
        elems.iter().all(|&a| elems.iter().all(|&b| s.contains(&self.mul(a, b))))
    }

    pub fn subgroup_from_elements(&self, elems: Vec<usize>) -> Result<Subgroup, GroupError> {
        if self.is_subgroup(&elems) {
            Ok(Subgroup::from_sorted(elems))
        } else {
            Err(GroupError::NotSubgroup)
        }
    }

    /// `g S g^-1`
    pub fn conjugate_subgroup(&self, g: usize, s: &Subgroup) -> Subgroup {
        Subgroup::from_sorted(s.elems.iter().map(|&h| self.conj(g, h)).collect())
    }

    pub fn normalizer(&self, s: &Subgroup) -> Subgroup {
        Subgroup::from_sorted(
            (0..self.order()).filter(|&g| self.conjugate_subgroup(g, s) == *s).collect(),
        )
    }

    pub fn is_normal_in(&self, s: &Subgroup, t: &Subgroup) -> bool {
        s.is_subset_of(t) && t.elems.iter().all(|&g| self.conjugate_subgroup(g, s) == *s)
    }

    /// A small generating set, chosen greedily in element order.
    pub fn generating_set(&self, s: &Subgroup) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut cur = self.trivial();
        for &g in &s.elems {
            if !cur.contains(g) {
                gens.push(g);
                cur = self.generate(&gens);
                if cur.order() == s.order() {
                    break;
                }
            }
        }
        gens
    }

    /// Realize a subgroup as a permutation group in its own right (same degree).
    pub fn subgroup_as_group(&self, s: &Subgroup, name: &str) -> PermGroup {
        let gens = self.generating_set(s).into_iter().map(|g| self.elements[g].clone()).collect();
        PermGroup::from_generators(name, self.degree, gens)
    }

    /// Indices in `self` of the elements of another group on the same points.
    pub fn embed(&self, other: &PermGroup, s: &Subgroup) -> Subgroup {
        Subgroup::from_sorted(
            s.elems.iter().map(|&g| self.index_of(&other.elements[g]).expect("not a subgroup")).collect(),
        )
    }

    pub fn lattice(&self) -> &SubgroupLattice {
        self.lattice.get_or_init(|| self.compute_lattice())
    }

    pub fn try_lattice(&self) -> Result<&SubgroupLattice, GroupError> {
        if self.order() > MAX_LATTICE_ORDER {
            return Err(GroupError::TooLarge(self.order()));
        }
        Ok(self.lattice())
    }

    fn compute_lattice(&self) -> SubgroupLattice {
        assert!(self.order() <= MAX_LATTICE_ORDER, "group too large");
        let mut found: HashMap<Subgroup, Vec<usize>> = HashMap::new();
        let mut list: Vec<(Subgroup, Vec<usize>)> = Vec::new();
        let mut cyclic: Vec<(Subgroup, usize)> = Vec::new();
        for g in 0..self.order() {
            let c = self.generate(&[g]);
            if !found.contains_key(&c) {
                found.insert(c.clone(), vec![g]);
                list.push((c.clone(), if g == 0 { vec![] } else { vec![g] }));
                cyclic.push((c, g));
            }
        }
        let mut i = 0;
        while i < list.len() {
            let (a, agens) = list[i].clone();
            for (c, g) in &cyclic {
                if c.is_subset_of(&a) {
                    continue;
                }
                let mut gens = agens.clone();
                gens.push(*g);
                let j = self.generate(&gens);
                if !found.contains_key(&j) {
                    found.insert(j.clone(), gens.clone());
                    list.push((j, gens));
                }
            }
            i += 1;
        }
        let mut remaining: HashSet<Subgroup> = list.into_iter().map(|(s, _)| s).collect();
        let mut all: Vec<Subgroup> = remaining.iter().cloned().collect();
        all.sort_by(|a, b| (a.order(), &a.elems).cmp(&(b.order(), &b.elems)));
        let mut classes = Vec::new();
        for s in all {
            if !remaining.contains(&s) {
                continue;
            }
            // `s` is the least member of its class in (order, elements) order.
            let mut members = Vec::new();
            let mut witnesses = Vec::new();
            for g in 0..self.order() {
                let t = self.conjugate_subgroup(g, &s);
                if remaining.remove(&t) {
                    members.push(t);
                    witnesses.push(g);
                }
            }
            let normalizer = self.normalizer(&s);
            let weyl_order = normalizer.order() / s.order();
            classes.push(SubgroupClass { representative: s, members, witnesses, normalizer, weyl_order });
        }
        let mut lookup = HashMap::new();
        for (ci, c) in classes.iter().enumerate() {
            for (mi, m) in c.members.iter().enumerate() {
                lookup.insert(m.clone(), (ci, mi));
            }
        }
        let n = classes.len();
        let mut subconjugacy = vec![vec![false; n]; n];
        for k in 0..n {
            for h in 0..n {
                let rep = &classes[h].representative;
                subconjugacy[k][h] = classes[k].order() <= rep.order()
                    && rep.order() % classes[k].order() == 0
                    && classes[k].members.iter().any(|m| m.is_subset_of(rep));
            }
        }
        SubgroupLattice { classes, subconjugacy, lookup }
    }

    /// Class of a Sylow p-subgroup (the trivial class when p does not divide the order).
    pub fn sylow(&self, p: u64) -> usize {
        let target = p_part(self.order(), p);
        let lat = self.lattice();
        lat.classes.iter().position(|c| c.order() == target).expect("Sylow subgroup exists")
    }

    /// Subgroup generated by all elements of order prime to p.
    pub fn omega_p(&self, p: u64) -> Subgroup {
        let gens: Vec<usize> =
            (0..self.order()).filter(|&g| self.element_order(g) as u64 % p != 0).collect();
        self.generate(&gens)
    }

    /// Decomposition of G/H into P-orbits: pairs `(Q_i, g_i)` with `Q_i = Stab_P(g_i H)`.
    pub fn double_coset_orbits(&self, p: &Subgroup, h: &Subgroup) -> Vec<(Subgroup, usize)> {
        let n = self.order();
        let coset_id = |g: usize| -> usize { h.elems.iter().map(|&x| self.mul(g, x)).min().unwrap() };
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for g in 0..n {
            let c = coset_id(g);
            if seen[c] {
                continue;
            }
            for &x in &p.elems {
                seen[coset_id(self.mul(x, g))] = true;
            }
            let q: Vec<usize> = p.elems.iter().copied().filter(|&x| coset_id(self.mul(x, g)) == c).collect();
            out.push((Subgroup::from_sorted(q), g));
        }
        out
    }

    /// Some `g` (least index) with `g^-1 A g ⊆ B`.
    pub fn conjugator_into(&self, a: &Subgroup, b: &Subgroup) -> Option<usize> {
        (0..self.order()).find(|&g| self.conjugate_subgroup(self.inv(g), a).is_subset_of(b))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// One-line notation with 1-based points, for display and JSON.
    pub fn perm_one_based(&self, g: usize) -> Vec<usize> {
        self.elements[g].iter().map(|&x| x as usize + 1).collect()
    }

    pub fn to_json(&self) -> GroupJson {
        GroupJson {
            name: self.name.clone(),
            degree: self.degree,
            order: self.order(),
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|&x| x as usize + 1).collect())
                .collect(),
        }
    }

    pub fn lattice_json(&self) -> LatticeJson {
        let lat = self.lattice();
        LatticeJson {
            group: self.to_json(),
            classes: lat
                .classes
                .iter()
                .enumerate()
                .map(|(i, c)| ClassJson {
                    index: i,
                    name: crate::reps::class_name(self, i),
                    order: c.order(),
                    size: c.members.len(),
                    weyl_order: c.weyl_order,
                    representative: c.representative.elems.iter().map(|&g| self.perm_one_based(g)).collect(),
                })
                .collect(),
            subconjugacy: lat.subconjugacy.clone(),
        }
    }
}

pub fn p_part(n: usize, p: u64) -> usize {
    let mut n = n;
    let mut r = 1;
    while n as u64 % p == 0 {
        n /= p as usize;
        r *= p as usize;
    }
    r
}

#[derive(Serialize, Clone, Debug)]
pub struct GroupJson {
    pub name: String,
    pub degree: usize,
    pub order: usize,
    pub generators: Vec<Vec<usize>>,
}

#[derive(Serialize, Clone, Debug)]
pub struct ClassJson {
    pub index: usize,
    pub name: String,
    pub order: usize,
    pub size: usize,
    pub weyl_order: usize,
    pub representative: Vec<Vec<usize>>,
}

#[derive(Serialize, Clone, Debug)]
pub struct LatticeJson {
    pub group: GroupJson,
    pub classes: Vec<ClassJson>,
    pub subconjugacy: Vec<Vec<bool>>,
}

/// Catalog identifiers understood by [`make_group`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CatalogId {
    Cyclic(u64),
    Klein,
    Dihedral(u64),
    A4,
    A5,
}

impl CatalogId {
    pub fn parse(s: &str) -> Result<CatalogId, GroupError> {
        let t: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '{' && *c != '}')
            .collect::<String>()
            .to_ascii_uppercase();
        let err = || GroupError::UnknownCatalog(s.to_string());
        let num = |x: &str| x.parse::<u64>().map_err(|_| err());
        if let Some(r) = t.strip_prefix('C') {
            let n = num(r)?;
            if n == 0 {
                return Err(err());
            }
            return Ok(CatalogId::Cyclic(n));
        }
        if let Some(r) = t.strip_prefix('D') {
            let m = num(r)?;
            if m % 2 != 0 || !is_prime(m / 2) || m / 2 == 2 {
                return Err(GroupError::NotOddPrime(m / 2));
            }
            return Ok(CatalogId::Dihedral(m / 2));
        }
        match t.as_str() {
            "K4" | "V4" => Ok(CatalogId::Klein),
            "A4" => Ok(CatalogId::A4),
            "A5" => Ok(CatalogId::A5),
            _ => Err(err()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            CatalogId::Cyclic(n) => format!("C_{n}"),
            CatalogId::Klein => "K_4".into(),
            CatalogId::Dihedral(p) => format!("D_{}", 2 * p),
            CatalogId::A4 => "A_4".into(),
            CatalogId::A5 => "A_5".into(),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            CatalogId::Cyclic(n) => *n as usize,
            CatalogId::Klein => 4,
            CatalogId::Dihedral(p) => 2 * *p as usize,
            CatalogId::A4 => 12,
            CatalogId::A5 => 60,
        }
    }

    pub fn primes(&self) -> Vec<u64> {
        prime_factors(self.order() as u64)
    }
}

fn cycles_to_perm(degree: usize, cycles: &[&[u16]]) -> Perm {
    let mut p = identity_perm(degree);
    for c in cycles {
        for i in 0..c.len() {
            p[c[i] as usize] = c[(i + 1) % c.len()];
        }
    }
    p
}

/// Build a catalog group as a permutation group with verified order.
pub fn make_group(id: &str) -> Result<PermGroup, GroupError> {
    Ok(make_catalog(CatalogId::parse(id)?))
}

pub fn make_catalog(id: CatalogId) -> PermGroup {
    let name = id.name();
    let g = match id {
        CatalogId::Cyclic(n) => {
            let n = n as usize;
            let gen: Perm = (0..n).map(|i| ((i + 1) % n) as u16).collect();
            PermGroup::from_generators(&name, n, vec![gen])
        }
        CatalogId::Klein => PermGroup::from_generators(
            &name,
            4,
            vec![cycles_to_perm(4, &[&[0, 1], &[2, 3]]), cycles_to_perm(4, &[&[0, 2], &[1, 3]])],
        ),
        CatalogId::Dihedral(p) => {
            let p = p as usize;
            let zeta: Perm = (0..p).map(|i| ((i + 1) % p) as u16).collect();
            let tau: Perm = (0..p).map(|i| ((p - i) % p) as u16).collect();
            PermGroup::from_generators(&name, p, vec![zeta, tau])
        }
        CatalogId::A4 => PermGroup::from_generators(
            &name,
            4,
            vec![cycles_to_perm(4, &[&[0, 1], &[2, 3]]), cycles_to_perm(4, &[&[0, 1, 2]])],
        ),
        CatalogId::A5 => PermGroup::from_generators(
            &name,
            5,
            vec![cycles_to_perm(5, &[&[0, 1, 2]]), cycles_to_perm(5, &[&[0, 1, 2, 3, 4]])],
        ),
    };
    assert_eq!(g.order(), id.order(), "catalog realization has wrong order");
    g
}
