//! Cellular chain complexes of the representation spheres S^{nσ} (C_2), S^{nλ} (C_p) and
//! S^{nV} (K_4, V the sum of the three sign representations), with group actions by
//! signed cell permutations, invariant chains and cochains, and the induced Mackey maps.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::abelian::{homology, AbGroup, FgAbelian, HomologyGroup};
use crate::group::{make_group, PermGroup, Subgroup};
use crate::intmat::{rank_mod_p, Mat};
use crate::reps::{k4_involution_subgroups, kind_of, Kind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CellError {
    #[error("no sphere model for a subgroup of type {0}")]
    UnsupportedSubgroup(String),
    #[error("element {0} is not a supported conjugator for this model")]
    UnsupportedConjugator(usize),
    #[error("generator actions do not define a group action")]
    NotAnAction,
    #[error("boundary squares to a nonzero map in degree {0}")]
    BoundarySquare(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ring {
    Z,
    Fp(u64),
}

/// Based chain complex in degrees `0..=top`; `boundary[d]: C_d -> C_{d-1}`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub ring: Ring,
    pub labels: Vec<Vec<String>>,
    pub boundary: Vec<Mat>,
}

impl ChainComplex {
    pub fn new(ring: Ring, labels: Vec<Vec<String>>, boundary: Vec<Mat>) -> Result<Self, CellError> {
        let boundary = match ring {
            Ring::Z => boundary,
            Ring::Fp(p) => boundary.iter().map(|m| m.reduce_mod(&BigInt::from(p))).collect(),
        };
        let c = ChainComplex { ring, labels, boundary };
        for d in 0..c.labels.len() {
            let b = &c.boundary[d];
            assert_eq!((b.rows(), b.cols()), (c.size(d.wrapping_sub(1)), c.size(d)), "shape in degree {d}");
        }
        for d in 2..c.labels.len() {
            let sq = c.boundary[d - 1].mul(&c.boundary[d]);
            let zero = match ring {
                Ring::Z => sq.is_zero(),
                Ring::Fp(p) => sq.reduce_mod(&BigInt::from(p)).is_zero(),
            };
            if !zero {
                return Err(CellError::BoundarySquare(d));
            }
        }
        Ok(c)
    }
    pub fn top(&self) -> usize {
        self.labels.len() - 1
    }
    pub fn size(&self, d: usize) -> usize {
        self.labels.get(d).map_or(0, |l| l.len())
    }
    /// `∂_d` with empty matrices outside the range.
    pub fn d(&self, d: i64) -> Mat {
        if d >= 1 && (d as usize) < self.labels.len() {
            self.boundary[d as usize].clone()
        } else {
            let rows = if d >= 1 { self.size(d as usize - 1) } else { 0 };
            let cols = if d >= 0 { self.size(d as usize) } else { 0 };
            Mat::zeros(rows, cols)
        }
    }
    fn sz(&self, d: i64) -> usize {
        if d < 0 {
            0
        } else {
            self.size(d as usize)
        }
    }
    pub fn homology_at(&self, d: i64) -> HomologyGroup {
        homology(self.sz(d), &self.d(d + 1), &self.d(d))
    }
    pub fn cohomology_at(&self, d: i64) -> HomologyGroup {
        homology(self.sz(d), &self.d(d).transpose(), &self.d(d + 1).transpose())
    }
    /// Integral homology in every degree (Z complexes only).
    pub fn homology(&self) -> Vec<FgAbelian> {
        assert_eq!(self.ring, Ring::Z);
        (0..=self.top() as i64).map(|d| self.homology_at(d).group.invariants()).collect()
    }
    pub fn cohomology(&self) -> Vec<FgAbelian> {
        assert_eq!(self.ring, Ring::Z);
        (0..=self.top() as i64).map(|d| self.cohomology_at(d).group.invariants()).collect()
    }
    /// Dimensions of homology over F_p.
    pub fn dims_mod(&self, p: u64) -> Vec<usize> {
        let r: Vec<usize> = (0..=self.top() + 1).map(|d| rank_mod_p(&self.d(d as i64), p)).collect();
        (0..=self.top()).map(|d| self.size(d) - r[d] - r[d + 1]).collect()
    }
    pub fn with_ring(&self, ring: Ring) -> Result<ChainComplex, CellError> {
        ChainComplex::new(ring, self.labels.clone(), self.boundary.clone())
    }
}

/// Which sphere family a model realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Sigma,
    Lens(u64),
    Klein,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<ModelKind> {
        let t: String = s.chars().filter(|c| !c.is_whitespace() && *c != '_').collect::<String>().to_lowercase();
        match t.as_str() {
            "c2" | "sigma" => Some(ModelKind::Sigma),
            "k4" => Some(ModelKind::Klein),
            _ => {
                let p: u64 = t.strip_prefix('c')?.parse().ok()?;
                (p > 2 && crate::primes::is_prime(p)).then_some(ModelKind::Lens(p))
            }
        }
    }
    pub fn dim_factor(&self) -> usize {
        match self {
            ModelKind::Sigma => 1,
            ModelKind::Lens(_) => 2,
            ModelKind::Klein => 3,
        }
    }
}

type Key = Vec<usize>;

fn sigma_factor_degree(c: usize) -> usize {
    c.div_ceil(2)
}

fn sigma_factor_boundary(c: usize) -> Vec<(usize, i64)> {
    if c == 0 {
        return vec![];
    }
    let j = sigma_factor_degree(c);
    let primed = c % 2 == 0;
    if j == 1 {
        return vec![(0, 1)];
    }
    let (same, other) = if primed { (2 * (j - 1), 2 * (j - 1) - 1) } else { (2 * (j - 1) - 1, 2 * (j - 1)) };
    let s = if (j - 1) % 2 == 0 { 1 } else { -1 };
    vec![(same, 1), (other, s)]
}

fn sigma_flip(c: usize) -> usize {
    match c {
        0 => 0,
        c if c % 2 == 1 => c + 1,
        c => c - 1,
    }
}

/// Cells of the sphere (nonequivariant basis), boundary, and labels.
#[derive(Clone, Debug)]
pub struct SphereModel {
    pub kind: ModelKind,
    pub n: usize,
    pub cells: Vec<Vec<Key>>,
    index: Vec<HashMap<Key, usize>>,
    pub complex: ChainComplex,
}

fn sigma_label(c: usize) -> String {
    match c {
        0 => "e0".into(),
        c if c % 2 == 1 => format!("e{}", sigma_factor_degree(c)),
        c => format!("e{}'", sigma_factor_degree(c)),
    }
}

impl SphereModel {
    pub fn new(kind: ModelKind, n: usize) -> SphereModel {
        let top = n * kind.dim_factor();
        let mut cells: Vec<Vec<Key>> = vec![vec![]; top + 1];
        match kind {
            ModelKind::Sigma => {
                cells[0].push(vec![0]);
                for c in 1..=2 * n {
                    cells[sigma_factor_degree(c)].push(vec![c]);
                }
            }
            ModelKind::Lens(p) => {
                cells[0].push(vec![0, 0]);
                for t in 1..=2 * n {
                    for i in 0..p as usize {
                        cells[t].push(vec![t, i]);
                    }
                }
            }
            ModelKind::Klein => {
                for a in 0..=2 * n {
                    for b in 0..=2 * n {
                        for c in 0..=2 * n {
                            let d = sigma_factor_degree(a) + sigma_factor_degree(b) + sigma_factor_degree(c);
                            cells[d].push(vec![a, b, c]);
                        }
                    }
                }
            }
        }
        let index: Vec<HashMap<Key, usize>> =
            cells.iter().map(|cs| cs.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect()).collect();
        let mut boundary = vec![Mat::zeros(0, cells[0].len())];
        for d in 1..=top {
            let mut m = Mat::zeros(cells[d - 1].len(), cells[d].len());
            for (j, key) in cells[d].iter().enumerate() {
                for (k2, coef) in Self::cell_boundary(kind, key) {
                    m.add_to(index[d - 1][&k2], j, &BigInt::from(coef));
                }
            }
            boundary.push(m);
        }
        let labels = cells.iter().map(|cs| cs.iter().map(|k| Self::label(kind, k)).collect()).collect();
        let complex = ChainComplex::new(Ring::Z, labels, boundary).expect("sphere boundary squares to zero");
        SphereModel { kind, n, cells, index, complex }
    }

    fn label(kind: ModelKind, k: &Key) -> String {
        match kind {
            ModelKind::Sigma => sigma_label(k[0]),
            ModelKind::Lens(_) if k[0] == 0 => "d".into(),
            ModelKind::Lens(_) => format!("f{},{}", k[0], k[1]),
            ModelKind::Klein => format!("{}^{}^{}", sigma_label(k[0]), sigma_label(k[1]), sigma_label(k[2])),
        }
    }

    fn cell_boundary(kind: ModelKind, k: &Key) -> Vec<(Key, i64)> {
        match kind {
            ModelKind::Sigma => sigma_factor_boundary(k[0]).into_iter().map(|(c, s)| (vec![c], s)).collect(),
            ModelKind::Lens(p) => {
                let (t, i) = (k[0], k[1]);
                let p = p as usize;
                if t == 0 {
                    vec![]
                } else if t == 1 {
                    vec![(vec![0, 0], 1)]
                } else if t % 2 == 0 {
                    vec![(vec![t - 1, (i + 1) % p], 1), (vec![t - 1, i], -1)]
                } else {
                    (0..p).map(|q| (vec![t - 1, q], 1)).collect()
                }
            }
            ModelKind::Klein => {
                let mut out = Vec::new();
                let mut sign = 1i64;
                for pos in 0..3 {
                    for (c, s) in sigma_factor_boundary(k[pos]) {
                        let mut k2 = k.clone();
                        k2[pos] = c;
                        out.push((k2, sign * s));
                    }
                    if sigma_factor_degree(k[pos]) % 2 == 1 {
                        sign = -sign;
                    }
                }
                out
            }
        }
    }

    pub fn top(&self) -> usize {
        self.complex.top()
    }
    pub fn cell_index(&self, d: usize, k: &Key) -> usize {
        self.index[d][k]
    }
}

/// A signed permutation of the cells in every degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellAction(pub Vec<Vec<(usize, i64)>>);

impl CellAction {
    fn identity(m: &SphereModel) -> CellAction {
        CellAction(m.cells.iter().map(|cs| (0..cs.len()).map(|i| (i, 1)).collect()).collect())
    }
    fn from_fn(m: &SphereModel, f: impl Fn(&Key) -> (Key, i64)) -> CellAction {
        CellAction(
            m.cells
                .iter()
                .enumerate()
                .map(|(d, cs)| {
                    cs.iter()
                        .map(|k| {
                            let (k2, s) = f(k);
                            (m.cell_index(d, &k2), s)
                        })
                        .collect()
                })
                .collect(),
        )
    }
    /// `self ∘ other`.
    fn compose(&self, other: &CellAction) -> CellAction {
        CellAction(
            other
                .0
                .iter()
                .zip(&self.0)
                .map(|(o, s)| o.iter().map(|&(i, e)| (s[i].0, s[i].1 * e)).collect())
                .collect(),
        )
    }
    pub fn apply(&self, d: usize, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); v.len()];
        for (i, x) in v.iter().enumerate() {
            if !x.is_zero() {
                let (j, s) = self.0[d][i];
                out[j] += x * s;
            }
        }
        out
    }
    /// Matrix in degree d (columns are images of cells).
    pub fn matrix(&self, d: usize) -> Mat {
        let n = self.0[d].len();
        let mut m = Mat::zeros(n, n);
        for (i, &(j, s)) in self.0[d].iter().enumerate() {
            m.set(j, i, BigInt::from(s));
        }
        m
    }
    fn is_unsigned_fix(&self, d: usize, i: usize) -> bool {
        self.0[d][i] == (i, 1)
    }
}

fn klein_generator(m: &SphereModel, flips: [bool; 3]) -> CellAction {
    CellAction::from_fn(m, |k| {
        let k2: Key = (0..3).map(|i| if flips[i] { sigma_flip(k[i]) } else { k[i] }).collect();
        (k2, 1)
    })
}

/// Factor i moves to position `perm[i]`, with the Koszul sign of reordering.
fn klein_permutation(m: &SphereModel, perm: [usize; 3]) -> CellAction {
    CellAction::from_fn(m, |k| {
        let mut k2 = vec![0; 3];
        for i in 0..3 {
            k2[perm[i]] = k[i];
        }
        let mut s = 1;
        for i in 0..3 {
            for j in i + 1..3 {
                if perm[i] > perm[j] && sigma_factor_degree(k[i]) % 2 == 1 && sigma_factor_degree(k[j]) % 2 == 1 {
                    s = -s;
                }
            }
        }
        (k2, s)
    })
}

fn lens_rotation(m: &SphereModel, p: u64) -> CellAction {
    CellAction::from_fn(m, |k| if k[0] == 0 { (k.clone(), 1) } else { (vec![k[0], (k[1] + 1) % p as usize], 1) })
}

fn lens_reflection(m: &SphereModel, p: u64) -> CellAction {
    let p = p as usize;
    CellAction::from_fn(m, |k| {
        let (t, i) = (k[0], k[1]);
        if t == 0 {
            (k.clone(), 1)
        } else if t % 2 == 1 {
            let j = (t - 1) / 2;
            (vec![t, (p - i) % p], if j % 2 == 0 { 1 } else { -1 })
        } else {
            let j = (t - 2) / 2;
            (vec![t, (2 * p - i - 1) % p], if j % 2 == 1 { 1 } else { -1 })
        }
    })
}

/// A sphere model with an action of a subgroup `acting` of an ambient group, extending the
/// action of the model's base subgroup `base` (C_2, C_p or K_4).
#[derive(Clone, Debug)]
pub struct EquivariantSphere {
    pub group: PermGroup,
    pub base: Subgroup,
    pub acting: Subgroup,
    pub model: SphereModel,
    action: BTreeMap<usize, CellAction>,
}

impl EquivariantSphere {
    pub fn new(g: &PermGroup, base: &Subgroup, acting: &Subgroup, n: usize) -> Result<Self, CellError> {
        let bk = kind_of(g, base).map_err(|_| CellError::UnsupportedSubgroup(format!("order {}", base.order())))?;
        let kind = match bk {
            Kind::C2 => ModelKind::Sigma,
            Kind::Cp(p) => ModelKind::Lens(p),
            Kind::K4 => ModelKind::Klein,
            k => return Err(CellError::UnsupportedSubgroup(k.name())),
        };
        assert!(base.is_subset_of(acting) && g.is_normal_in(base, acting));
        let model = SphereModel::new(kind, n);
        let mut gens: Vec<(usize, CellAction)> = Vec::new();
        let extra: Vec<usize> = acting.elements().iter().copied().filter(|x| !base.contains(*x)).collect();
        match kind {
            ModelKind::Sigma => {
                gens.push((base.elements()[1], klein_like_sigma(&model)));
                if let Some(&x) = extra.first() {
                    return Err(CellError::UnsupportedConjugator(x));
                }
            }
            ModelKind::Lens(p) => {
                let z = base.elements()[1];
                gens.push((z, lens_rotation(&model, p)));
                if let Some(&t) = extra.first() {
                    let zi = g.inv(z);
                    if acting.order() != 2 * p as usize || g.conj(t, z) != zi || g.element_order(t) != 2 {
                        return Err(CellError::UnsupportedConjugator(t));
                    }
                    gens.push((t, lens_reflection(&model, p)));
                }
            }
            ModelKind::Klein => {
                let hs = k4_involution_subgroups(g, base);
                for &h in &base.elements()[1..] {
                    let flips = [!hs[0].contains(h), !hs[1].contains(h), !hs[2].contains(h)];
                    gens.push((h, klein_generator(&model, flips)));
                }
                if !extra.is_empty() {
                    let c = *extra.iter().find(|&&x| g.element_order(x) == 3).ok_or(CellError::UnsupportedConjugator(extra[0]))?;
                    if acting.order() != 12 {
                        return Err(CellError::UnsupportedConjugator(c));
                    }
                    let mut perm = [0usize; 3];
                    for (i, h) in hs.iter().enumerate() {
                        let hc = g.conjugate_subgroup(c, h);
                        perm[i] = hs.iter().position(|x| *x == hc).unwrap();
                    }
                    gens.push((c, klein_permutation(&model, perm)));
                }
            }
        }
        let mut action = BTreeMap::new();
        action.insert(g.identity(), CellAction::identity(&model));
        let mut queue = VecDeque::from([g.identity()]);
        while let Some(x) = queue.pop_front() {
            for (s, a) in &gens {
                let y = g.mul(*s, x);
                let img = a.compose(&action[&x]);
                match action.get(&y) {
                    Some(prev) if *prev != img => return Err(CellError::NotAnAction),
                    Some(_) => {}
                    None => {
                        action.insert(y, img);
                        queue.push_back(y);
                    }
                }
            }
        }
        if action.len() != acting.order() {
            return Err(CellError::NotAnAction);
        }
        // Chain-map check for every element.
        for a in action.values() {
            for d in 1..=model.top() {
                let lhs = model.complex.boundary[d].mul(&a.matrix(d));
                let rhs = a.matrix(d - 1).mul(&model.complex.boundary[d]);
                if lhs != rhs {
                    return Err(CellError::NotAnAction);
                }
            }
        }
        Ok(EquivariantSphere { group: g.clone(), base: base.clone(), acting: acting.clone(), model, action })
    }

    /// The catalog sphere over its own group: S^{nσ} over C_2, S^{nλ} over C_p, S^{nV} over K_4.
    pub fn catalog(kind: ModelKind, n: usize) -> EquivariantSphere {
        let g = match kind {
            ModelKind::Sigma => make_group("C2"),
            ModelKind::Lens(p) => make_group(&format!("C{p}")),
            ModelKind::Klein => make_group("K4"),
        }
        .unwrap();
        let w = g.whole();
        EquivariantSphere::new(&g, &w, &w, n).unwrap()
    }

    /// S^{nλ} with the reflection action of D_2p, or S^{nV} with the A_4 action.
    pub fn with_normalizer(kind: ModelKind, n: usize) -> EquivariantSphere {
        let g = match kind {
            ModelKind::Lens(p) => make_group(&format!("D{}", 2 * p)).unwrap(),
            ModelKind::Klein => make_group("A4").unwrap(),
            ModelKind::Sigma => return Self::catalog(kind, n),
        };
        let lat = g.lattice();
        let base_order = if kind == ModelKind::Klein { 4 } else { g.order() / 2 };
        let base = lat.classes.iter().find(|c| c.order() == base_order).unwrap().representative.clone();
        EquivariantSphere::new(&g, &base, &g.whole(), n).unwrap()
    }

    pub fn action(&self, x: usize) -> Result<&CellAction, CellError> {
        self.action.get(&x).ok_or(CellError::UnsupportedConjugator(x))
    }

    pub fn top(&self) -> usize {
        self.model.top()
    }

    /// Orbits of a subgroup of the base on the cells of degree d; orbit[0] is the least cell.
    pub fn orbits(&self, h: &Subgroup, d: usize) -> Vec<Vec<usize>> {
        let n = self.model.cells.get(d).map_or(0, |c| c.len());
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let mut orb: Vec<usize> = h
                .elements()
                .iter()
                .map(|x| {
                    let (j, s) = self.action[x].0[d][i];
                    assert_eq!(s, 1, "base subgroups act by unsigned permutations");
                    j
                })
                .collect();
            orb.sort();
            orb.dedup();
            for &j in &orb {
                seen[j] = true;
            }
            out.push(orb);
        }
        out
    }

    /// Invariant (co)chain complex at `h` in orbit-sum coordinates.
    pub fn invariant_complex(&self, h: &Subgroup, cochains: bool) -> InvariantComplex {
        let top = self.top();
        let orbits: Vec<Vec<Vec<usize>>> = (0..=top).map(|d| self.orbits(h, d)).collect();
        let mut maps = vec![Mat::zeros(0, orbits[0].len())];
        for d in 1..=top {
            let b = &self.model.complex.boundary[d];
            let m = if cochains {
                // δ_{d-1}: C^{d-1} -> C^d, stored at index d.
                let bt = b.transpose();
                read_orbits(&bt, &orbits[d - 1], &orbits[d])
            } else {
                read_orbits(b, &orbits[d], &orbits[d - 1])
            };
            maps.push(m);
        }
        InvariantComplex { subgroup: h.clone(), cochains, orbits, maps }
    }

    /// The value at `h` in homology degree `a` (chains) or cohomology degree `a` (cochains).
    pub fn level(&self, h: &Subgroup, a: i64, cochains: bool) -> Level {
        let ic = self.invariant_complex(h, cochains);
        let n = ic.size(a);
        let (inc, out) = if cochains { (ic.map_into(a), ic.map_into(a + 1)) } else { (ic.map_into(a + 1), ic.map_into(a)) };
        let hom = if n == 0 { homology(0, &Mat::zeros(0, 0), &Mat::zeros(0, 0)) } else {
            let inc = if inc.cols() == 0 { Mat::zeros(n, 0) } else { inc };
            let out = if out.rows() == 0 { Mat::zeros(0, n) } else { out };
            homology(n, &inc, &out)
        };
        let orbits = if a >= 0 && (a as usize) <= self.top() { ic.orbits[a as usize].clone() } else { vec![] };
        let ncells = if a >= 0 { self.model.cells.get(a as usize).map_or(0, |c| c.len()) } else { 0 };
        Level { subgroup: h.clone(), degree: a, cochains, orbits, ncells, hom }
    }

    /// Restriction from `big` to `small` (small ⊆ big): inclusion of invariants.
    pub fn res_matrix(&self, big: &Level, small: &Level) -> Mat {
        let cols: Vec<Vec<BigInt>> =
            (0..big.group().ngens()).map(|i| small.class_of_full(&big.generator_full(i))).collect();
        Mat::from_columns(&cols, small.group().ngens())
    }

    /// Transfer from `small` to `big`: sum over coset representatives of big/small.
    pub fn tr_matrix(&self, small: &Level, big: &Level) -> Mat {
        let reps = coset_reps(&self.group, &big.subgroup, &small.subgroup);
        let d = small.degree as usize;
        let cols: Vec<Vec<BigInt>> = (0..small.group().ngens())
            .map(|i| {
                let x = small.generator_full(i);
                let mut acc = vec![BigInt::zero(); x.len()];
                for &r in &reps {
                    for (a, b) in acc.iter_mut().zip(self.action[&r].apply(d, &x)) {
                        *a += b;
                    }
                }
                big.class_of_full(&acc)
            })
            .collect();
        Mat::from_columns(&cols, big.group().ngens())
    }

    /// Conjugation by `x` (from the acting group) from level `from` (at H) to `to` (at xHx⁻¹),
    /// times the sign `eps`.
    pub fn conj_matrix(&self, x: usize, eps: i64, from: &Level, to: &Level) -> Result<Mat, CellError> {
        let a = self.action(x)?;
        let d = from.degree as usize;
        let cols: Vec<Vec<BigInt>> = (0..from.group().ngens())
            .map(|i| {
                let v: Vec<BigInt> = a.apply(d, &from.generator_full(i)).into_iter().map(|y| y * eps).collect();
                to.class_of_full(&v)
            })
            .collect();
        Ok(Mat::from_columns(&cols, to.group().ngens()))
    }

    /// Degree of `x` on the underlying sphere (±1), read off the top homology.
    pub fn degree_of(&self, x: usize) -> Result<i64, CellError> {
        let top = self.top();
        let hg = self.model.complex.homology_at(top as i64);
        assert_eq!(hg.group.moduli, vec![BigInt::zero()]);
        let z = hg.reps.column(0);
        let img = self.action(x)?.apply(top, &z);
        let c = hg.class_of(&img);
        Ok(c[0].to_i64().unwrap())
    }

    /// The fixed subcomplex X^K modulo L (K ◁ L ⊆ acting), as an orbit-cell complex.
    pub fn fixed_orbit_complex(&self, k: &Subgroup, l: &Subgroup) -> ChainComplex {
        let top = self.top();
        let mut orbit_of: Vec<HashMap<usize, usize>> = Vec::new();
        let mut labels = Vec::new();
        for d in 0..=top {
            let n = self.model.cells[d].len();
            let fixed: Vec<usize> =
                (0..n).filter(|&i| k.elements().iter().all(|x| self.action[x].is_unsigned_fix(d, i))).collect();
            let mut map = HashMap::new();
            let mut lab = Vec::new();
            for &i in &fixed {
                if map.contains_key(&i) {
                    continue;
                }
                let id = lab.len();
                for x in l.elements() {
                    let (j, s) = self.action[x].0[d][i];
                    assert_eq!(s, 1, "orbit cells must not be reversed by their stabilizers");
                    map.insert(j, id);
                }
                lab.push(self.model.complex.labels[d][i].clone());
            }
            orbit_of.push(map);
            labels.push(lab);
        }
        let mut boundary = vec![Mat::zeros(0, labels[0].len())];
        for d in 1..=top {
            let mut m = Mat::zeros(labels[d - 1].len(), labels[d].len());
            let mut done = vec![false; labels[d].len()];
            let b = &self.model.complex.boundary[d];
            for (&cell, &o) in orbit_of[d].iter().collect::<BTreeMap<_, _>>() {
                if done[o] {
                    continue;
                }
                done[o] = true;
                for r in 0..b.rows() {
                    let v = b.get(r, cell);
                    if !v.is_zero() {
                        let t = *orbit_of[d - 1].get(&r).expect("boundary of a fixed cell is fixed");
                        m.add_to(t, o, v);
                    }
                }
            }
            boundary.push(m);
        }
        ChainComplex::new(Ring::Z, labels, boundary).expect("orbit complex")
    }
}

fn klein_like_sigma(m: &SphereModel) -> CellAction {
    CellAction::from_fn(m, |k| (vec![sigma_flip(k[0])], 1))
}

/// Coefficients of `b·O_j` on the representatives of the target orbits.
fn read_orbits(b: &Mat, src: &[Vec<usize>], dst: &[Vec<usize>]) -> Mat {
    let mut m = Mat::zeros(dst.len(), src.len());
    for (j, o) in src.iter().enumerate() {
        for (i, t) in dst.iter().enumerate() {
            let mut s = BigInt::zero();
            for &c in o {
                s += b.get(t[0], c);
            }
            m.set(i, j, s);
        }
    }
    m
}

/// Left coset representatives of big/small (least element of each coset).
pub fn coset_reps(g: &PermGroup, big: &Subgroup, small: &Subgroup) -> Vec<usize> {
    let mut seen = std::collections::BTreeSet::new();
    let mut reps = Vec::new();
    for &x in big.elements() {
        let coset: Vec<usize> = small.elements().iter().map(|&h| g.mul(x, h)).collect();
        let key = *coset.iter().min().unwrap();
        if seen.insert(key) {
            reps.push(x);
        }
    }
    reps
}

/// Invariant (co)chains at a subgroup in orbit-sum coordinates.
#[derive(Clone, Debug)]
pub struct InvariantComplex {
    pub subgroup: Subgroup,
    pub cochains: bool,
    pub orbits: Vec<Vec<Vec<usize>>>,
    /// Chains: `maps[d] = ∂_d: C_d -> C_{d-1}`. Cochains: `maps[d] = δ: C^{d-1} -> C^d`.
    pub maps: Vec<Mat>,
}

impl InvariantComplex {
    pub fn size(&self, d: i64) -> usize {
        if d < 0 {
            0
        } else {
            self.orbits.get(d as usize).map_or(0, |o| o.len())
        }
    }
    /// For chains the map out of degree d; for cochains the map into degree d.
    fn map_into(&self, d: i64) -> Mat {
        if d >= 1 && (d as usize) < self.maps.len() {
            self.maps[d as usize].clone()
        } else if self.cochains {
            Mat::zeros(self.size(d), self.size(d - 1))
        } else {
            Mat::zeros(self.size(d - 1), self.size(d))
        }
    }
    /// As a plain chain complex (cochains are re-indexed as a chain complex in reverse).
    pub fn as_chain_complex(&self) -> ChainComplex {
        let labels: Vec<Vec<String>> =
            self.orbits.iter().map(|os| os.iter().map(|o| format!("{:?}", o)).collect()).collect();
        assert!(!self.cochains);
        ChainComplex::new(Ring::Z, labels, self.maps.clone()).unwrap()
    }
    pub fn homology_groups(&self) -> Vec<FgAbelian> {
        let top = self.orbits.len() as i64 - 1;
        (0..=top)
            .map(|d| {
                let n = self.size(d);
                if n == 0 {
                    return FgAbelian::zero();
                }
                let (inc, out) =
                    if self.cochains { (self.map_into(d), self.map_into(d + 1)) } else { (self.map_into(d + 1), self.map_into(d)) };
                homology(n, &inc, &out).group.invariants()
            })
            .collect()
    }
}

/// One Mackey level: the (co)homology group at a subgroup with explicit cycle representatives.
#[derive(Clone, Debug)]
pub struct Level {
    pub subgroup: Subgroup,
    pub degree: i64,
    pub cochains: bool,
    pub orbits: Vec<Vec<usize>>,
    pub ncells: usize,
    pub hom: HomologyGroup,
}

impl Level {
    pub fn group(&self) -> &AbGroup {
        &self.hom.group
    }
    pub fn value(&self) -> FgAbelian {
        self.hom.group.invariants()
    }
    pub fn generator_full(&self, i: usize) -> Vec<BigInt> {
        let c = self.hom.reps.column(i);
        let mut v = vec![BigInt::zero(); self.ncells];
        for (o, x) in self.orbits.iter().zip(&c) {
            for &cell in o {
                v[cell] = x.clone();
            }
        }
        v
    }
    pub fn class_of_full(&self, v: &[BigInt]) -> Vec<BigInt> {
        if self.orbits.is_empty() {
            return vec![];
        }
        let coords: Vec<BigInt> = self.orbits.iter().map(|o| v[o[0]].clone()).collect();
        debug_assert!(self.orbits.iter().all(|o| o.iter().all(|&c| v[c] == v[o[0]])), "vector is not invariant");
        self.hom.class_of(&coords)
    }
}

/// The hand-built orbit complex of S^{nV} over K_4: cells (k,l,m), with a second cell
/// λ(k,l,m) when klm ≠ 0, and the explicit boundary formula.
pub fn klein_orbit_complex(n: usize, ring: Ring) -> ChainComplex {
    let mut cells: Vec<Vec<(usize, usize, usize, bool)>> = vec![vec![]; 3 * n + 1];
    for k in 0..=n {
        for l in 0..=n {
            for m in 0..=n {
                cells[k + l + m].push((k, l, m, false));
                if k * l * m != 0 {
                    cells[k + l + m].push((k, l, m, true));
                }
            }
        }
    }
    let idx: Vec<HashMap<(usize, usize, usize, bool), usize>> =
        cells.iter().map(|cs| cs.iter().enumerate().map(|(i, c)| (*c, i)).collect()).collect();
    let sgn = |e: usize| if e % 2 == 0 { 1i64 } else { -1 };
    let mut boundary = vec![Mat::zeros(0, cells[0].len())];
    for d in 1..=3 * n {
        let mut mat = Mat::zeros(cells[d - 1].len(), cells[d].len());
        for (j, &(k, l, m, lam)) in cells[d].iter().enumerate() {
            let idx_ = [k, l, m];
            let zeros = idx_.iter().filter(|&&x| x == 0).count();
            let mut add = |t: [usize; 3], a: i64, b: i64| {
                // a·cell + b·λcell, with λ applied once more if the source is a λ-cell
                let has_l = t[0] * t[1] * t[2] != 0;
                let (a, b) = if lam { (b, a) } else { (a, b) };
                if has_l {
                    if a != 0 {
                        mat.add_to(idx[d - 1][&(t[0], t[1], t[2], false)], j, &BigInt::from(a));
                    }
                    if b != 0 {
                        mat.add_to(idx[d - 1][&(t[0], t[1], t[2], true)], j, &BigInt::from(b));
                    }
                } else if a + b != 0 {
                    mat.add_to(idx[d - 1][&(t[0], t[1], t[2], false)], j, &BigInt::from(a + b));
                }
            };
            let mut prefix = 0usize;
            for pos in 0..3 {
                let x = idx_[pos];
                if x == 0 {
                    continue;
                }
                let mut t = idx_;
                t[pos] = x - 1;
                let s = sgn(prefix);
                prefix += x;
                if zeros == 0 {
                    if x == 1 {
                        add(t, s, 0);
                    } else {
                        add(t, s, s * sgn(x + 1));
                    }
                } else {
                    add(t, s * (1 + sgn(x + 1)), 0);
                }
            }
        }
        boundary.push(mat);
    }
    let labels = cells
        .iter()
        .map(|cs| cs.iter().map(|&(k, l, m, lam)| format!("{}({k},{l},{m})", if lam { "λ" } else { "" })).collect())
        .collect();
    ChainComplex::new(ring, labels, boundary).expect("orbit complex boundary squares to zero")
}

/// The orbit chain complex of a catalog sphere in invariant (orbit-sum) coordinates.
pub fn sphere_complex(kind: ModelKind, n: usize, ring: Ring) -> ChainComplex {
    match kind {
        ModelKind::Klein => klein_orbit_complex(n, ring),
        _ => {
            let s = EquivariantSphere::catalog(kind, n);
            let ic = s.invariant_complex(&s.group.whole(), false);
            let labels: Vec<Vec<String>> =
                ic.orbits.iter().enumerate().map(|(d, os)| os.iter().map(|o| s.model.complex.labels[d][o[0]].clone()).collect()).collect();
            ChainComplex::new(ring, labels, ic.maps).unwrap()
        }
    }
}

/// Integral cohomology of the catalog sphere at the top group, from invariant cochains.
/// (Transposing the orbit-sum chain complex would compute a different dual.)
pub fn sphere_cohomology(kind: ModelKind, n: usize) -> Vec<FgAbelian> {
    let s = EquivariantSphere::catalog(kind, n);
    s.invariant_complex(&s.group.whole(), true).homology_groups()
}

/// Integral homology of the catalog sphere at the top group, from invariant chains.
pub fn sphere_homology(kind: ModelKind, n: usize) -> Vec<FgAbelian> {
    let s = EquivariantSphere::catalog(kind, n);
    s.invariant_complex(&s.group.whole(), false).homology_groups()
}

/// The scalar by which the reflection of D_2p acts on the C_p-level (co)homology of
/// S^{nλ} in degree `d`; `None` when the group is zero or the action is not scalar.
pub fn reflection_scalar(p: u64, n: usize, d: i64, cochains: bool) -> Option<i64> {
    let s = EquivariantSphere::with_normalizer(ModelKind::Lens(p), n);
    let tau = *s.acting.elements().iter().find(|x| !s.base.contains(**x))?;
    let lvl = s.level(&s.base, d, cochains);
    let k = lvl.group().ngens();
    if k == 0 {
        return None;
    }
    let m = s.conj_matrix(tau, 1, &lvl, &lvl).ok()?;
    let id = Mat::identity(k);
    [1i64, -1].into_iter().find(|&c| AbGroup::maps_equal(lvl.group(), &m, &id.scale(&BigInt::from(c))))
}

/// Outcome of the Bockstein comparison between F_2 and integral homology of S^{nV}/K_4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BocksteinReport {
    pub n: usize,
    pub f2_dims: Vec<usize>,
    pub z_homology: Vec<FgAbelian>,
    pub mismatched_degrees: Vec<usize>,
    pub torsion_exponent_two: bool,
}

impl BocksteinReport {
    pub fn is_clean(&self) -> bool {
        self.mismatched_degrees.is_empty() && self.torsion_exponent_two
    }
}

pub fn bockstein_consistency(n: usize) -> BocksteinReport {
    let z = klein_orbit_complex(n, Ring::Z);
    let f2 = z.dims_mod(2);
    let h = z.homology();
    let t = |i: usize| h[i].primary(2).len();
    let mut bad = Vec::new();
    for i in 1..3 * n {
        if f2[i] != h[i].rank + t(i) + t(i - 1) {
            bad.push(i);
        }
    }
    let exp2 = h.iter().all(|g| g.torsion_exponent_divides(2));
    BocksteinReport { n, f2_dims: f2, z_homology: h, mismatched_degrees: bad, torsion_exponent_two: exp2 }
}

/// Sign of `v`'s first nonzero entry, used to normalize generators.
pub fn leading_sign(v: &[BigInt]) -> i64 {
    v.iter().find(|x| !x.is_zero()).map_or(1, |x| if x.is_negative() { -1 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::FgAbelian;
    use num_traits::One;

    fn z() -> FgAbelian {
        FgAbelian::free(1)
    }

    #[test]
    fn underlying_spheres() {
        for kind in [ModelKind::Sigma, ModelKind::Lens(3), ModelKind::Lens(5), ModelKind::Klein] {
            for n in 0..3 {
                let m = SphereModel::new(kind, n);
                let h = m.complex.homology();
                for (d, g) in h.iter().enumerate() {
                    let want = if d == m.top() { z() } else { FgAbelian::zero() };
                    assert_eq!(*g, want, "{kind:?} n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn sigma_invariant_complex() {
        let c = sphere_complex(ModelKind::Sigma, 1, Ring::Z);
        assert_eq!(c.boundary[1].to_i64(), vec![vec![2]]);
        assert_eq!(c.homology(), vec![FgAbelian::cyclic(2), FgAbelian::zero()]);
        let c3 = sphere_complex(ModelKind::Lens(3), 1, Ring::Z);
        assert_eq!(c3.homology(), vec![FgAbelian::cyclic(3), FgAbelian::zero(), z()]);
    }

    #[test]
    fn klein_orbit_complex_matches_model() {
        for n in 1..=3 {
            let s = EquivariantSphere::catalog(ModelKind::Klein, n);
            let ic = s.invariant_complex(&s.group.whole(), false);
            let built = klein_orbit_complex(n, Ring::Z);
            assert_eq!(ic.homology_groups(), built.homology(), "n={n}");
            let co = sphere_cohomology(ModelKind::Klein, n);
            assert_eq!(co[3 * n], z(), "n={n}");
        }
    }

    #[test]
    fn klein_small_values() {
        let c = klein_orbit_complex(1, Ring::Z);
        assert_eq!(c.with_ring(Ring::Fp(2)).unwrap().dims_mod(2), vec![1, 3, 2, 1]);
        let h = c.homology();
        assert_eq!(h[3], z());
        assert_eq!(h[2], FgAbelian::zero());
        assert!(bockstein_consistency(1).is_clean());
    }

    #[test]
    fn klein_coboundary_of_axis_cells() {
        // δ[k,0,0] = (1+(-1)^k)[k+1,0,0] + (-1)^k[k,1,0] + (-1)^k[k,0,1]
        let s = EquivariantSphere::catalog(ModelKind::Klein, 3);
        let co = s.invariant_complex(&s.group.whole(), true);
        let m = &s.model;
        let find = |key: [usize; 3]| {
            let d: usize = key.iter().map(|&c| sigma_factor_degree(c)).sum();
            let cell = m.cell_index(d, &key.to_vec());
            (d, co.orbits[d].iter().position(|o| o.contains(&cell)).unwrap())
        };
        for k in 1..3usize {
            let (d, src) = find([2 * k - 1, 0, 0]);
            let delta = &co.maps[d + 1];
            let sg = if k % 2 == 0 { 1 } else { -1 };
            let (_, a) = find([2 * k + 1, 0, 0]);
            let (_, b) = find([2 * k - 1, 1, 0]);
            let (_, c) = find([2 * k - 1, 0, 1]);
            assert_eq!(delta.get(a, src), &BigInt::from(1 + sg));
            assert_eq!(delta.get(b, src), &BigInt::from(sg));
            assert_eq!(delta.get(c, src), &BigInt::from(sg));
            let nonzero = (0..delta.rows()).filter(|&r| !delta.get(r, src).is_zero()).count();
            assert_eq!(nonzero, if sg == 1 { 3 } else { 2 });
        }
    }

    #[test]
    fn normalizer_actions_are_group_actions() {
        for p in [3u64, 5] {
            let s = EquivariantSphere::with_normalizer(ModelKind::Lens(p), 3);
            assert_eq!(s.action.len(), 2 * p as usize);
        }
        let s = EquivariantSphere::with_normalizer(ModelKind::Klein, 2);
        assert_eq!(s.action.len(), 12);
        for x in s.acting.elements() {
            assert_eq!(s.degree_of(*x).unwrap(), 1);
        }
    }

    #[test]
    fn fixed_orbit_complexes() {
        let s = EquivariantSphere::catalog(ModelKind::Klein, 1);
        let w = s.group.whole();
        let top = s.fixed_orbit_complex(&w, &w);
        assert_eq!(top.homology()[0], z());
        assert!(top.homology()[1..].iter().all(|g| g.is_zero()));
        let e = s.group.trivial();
        let full = s.fixed_orbit_complex(&e, &e);
        assert_eq!(full.homology()[3], z());
        // H_1-fixed points form S^{σ}-like 1-sphere in the factor where H_1 acts trivially.
        let h1 = s.group.lattice().rep(1).clone();
        let c = s.fixed_orbit_complex(&h1, &w);
        assert_eq!(c.size(0), 1);
        assert_eq!(c.size(1), 1);
        assert!(c.homology().iter().all(|g| g.is_zero()));
    }

    #[test]
    fn reflection_scalar_rule() {
        for p in [3, 5] {
            for n in 1..=3usize {
                for d in 0..=2 * n as i64 {
                    for cochains in [false, true] {
                        if let Some(c) = reflection_scalar(p, n, d, cochains) {
                            assert_eq!(c, if d % 4 >= 2 { -1 } else { 1 }, "p={p} n={n} d={d}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tau_on_lens_orbits() {
        for p in [3u64, 5] {
            let s = EquivariantSphere::with_normalizer(ModelKind::Lens(p), 4);
            let tau = *s.acting.elements().iter().find(|x| !s.base.contains(**x)).unwrap();
            for t in 1..=8usize {
                let lvl = s.level(&s.base, t as i64, false);
                let ic = s.invariant_complex(&s.base, false);
                let orbit = ic.orbits[t][0].clone();
                let mut v = vec![BigInt::zero(); s.model.cells[t].len()];
                for c in orbit {
                    v[c] = BigInt::one();
                }
                let img = s.action(tau).unwrap().apply(t, &v);
                let sign = if img[v.iter().position(|x| !x.is_zero()).unwrap()].is_negative() { -1 } else { 1 };
                let want = if t % 4 == 2 || t % 4 == 3 { -1 } else { 1 };
                assert_eq!(sign, want, "p={p} t={t}");
                let _ = lvl;
            }
        }
    }
}
