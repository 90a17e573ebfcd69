//! Mackey functors with levels at every subgroup, and assembly of the Mackey functor
//! H ↦ π_V^H(HZ) from the p-local Sylow models.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::abelian::{cokernel, kernel, AbGroup, FgAbelian, SubgroupOf};
use crate::burnside::{restriction, transfer, BurnsideElt};
use crate::group::{p_part, PermGroup, Subgroup};
use crate::intmat::Mat;
use crate::primes::prime_factors;
use crate::reps::{class_name, VirtualRep};
use crate::splitter::{SplitError, SylowPiece};

#[derive(Debug, Error)]
pub enum MackeyError {
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("p-local pieces disagree at subgroup of order {0}: {1}")]
    Inconsistent(usize, String),
    #[error("the transfer-side top level {got} differs from the computed top level {want}")]
    TransferOracle { got: String, want: String },
}

/// A Mackey functor on the subgroups of a finite group. Levels are diagonal presentations;
/// maps are integer matrices in those coordinates.
#[derive(Clone, Debug)]
pub struct MackeyFunctor {
    pub group: PermGroup,
    pub subgroups: Vec<Subgroup>,
    pub levels: Vec<AbGroup>,
    /// `(h, k)` with subgroups[k] ⊆ subgroups[h]: M(H) → M(K).
    pub res: BTreeMap<(usize, usize), Mat>,
    /// `(k, h)`: M(K) → M(H).
    pub tr: BTreeMap<(usize, usize), Mat>,
    /// `(s, h)` for s a generator of the group: M(H) → M(sHs⁻¹).
    pub conj: BTreeMap<(usize, usize), Mat>,
    index: HashMap<Subgroup, usize>,
    words: Vec<Vec<usize>>,
}

fn generator_words(g: &PermGroup) -> Vec<Vec<usize>> {
    let gens: Vec<usize> = g.generators().iter().map(|p| g.index_of(p).unwrap()).collect();
    let mut words: Vec<Option<Vec<usize>>> = vec![None; g.order()];
    words[g.identity()] = Some(vec![]);
    let mut q = VecDeque::from([g.identity()]);
    while let Some(x) = q.pop_front() {
        for &s in &gens {
            let y = g.mul(s, x);
            if words[y].is_none() {
                let mut w = words[x].clone().unwrap();
                w.push(s);
                words[y] = Some(w);
                q.push_back(y);
            }
        }
    }
    words.into_iter().map(|w| w.unwrap()).collect()
}

fn generator_indices(g: &PermGroup) -> Vec<usize> {
    g.generators().iter().map(|p| g.index_of(p).unwrap()).collect()
}

impl MackeyFunctor {
    /// Build from level data and a rule for each kind of map.
    pub fn from_rules(
        g: &PermGroup,
        levels: impl Fn(&Subgroup) -> AbGroup,
        res: impl Fn(&Subgroup, &Subgroup) -> Mat,
        tr: impl Fn(&Subgroup, &Subgroup) -> Mat,
        conj: impl Fn(usize, &Subgroup) -> Mat,
    ) -> MackeyFunctor {
        let subgroups: Vec<Subgroup> = g.lattice().all_subgroups().cloned().collect();
        let index: HashMap<Subgroup, usize> = subgroups.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let lv: Vec<AbGroup> = subgroups.iter().map(&levels).collect();
        let mut rm = BTreeMap::new();
        let mut tm = BTreeMap::new();
        for (h, hs) in subgroups.iter().enumerate() {
            for (k, ks) in subgroups.iter().enumerate() {
                if ks.is_subset_of(hs) {
                    rm.insert((h, k), lv[k].reduce_mat(&res(hs, ks)));
                    tm.insert((k, h), lv[h].reduce_mat(&tr(ks, hs)));
                }
            }
        }
        let mut cm = BTreeMap::new();
        for s in generator_indices(g) {
            for (h, hs) in subgroups.iter().enumerate() {
                let t = index[&g.conjugate_subgroup(s, hs)];
                cm.insert((s, h), lv[t].reduce_mat(&conj(s, hs)));
            }
        }
        MackeyFunctor { group: g.clone(), subgroups, levels: lv, res: rm, tr: tm, conj: cm, index, words: generator_words(g) }
    }

    pub fn index_of(&self, s: &Subgroup) -> usize {
        self.index[s]
    }

    pub fn level(&self, s: &Subgroup) -> &AbGroup {
        &self.levels[self.index[s]]
    }

    pub fn res_map(&self, h: &Subgroup, k: &Subgroup) -> &Mat {
        &self.res[&(self.index[h], self.index[k])]
    }

    pub fn tr_map(&self, k: &Subgroup, h: &Subgroup) -> &Mat {
        &self.tr[&(self.index[k], self.index[h])]
    }

    /// c_x: M(H) → M(xHx⁻¹) for any element x.
    pub fn conj_map(&self, x: usize, h: &Subgroup) -> Mat {
        let g = &self.group;
        let mut cur = h.clone();
        let mut m = Mat::identity(self.level(h).ngens());
        // x = s_k ⋯ s_1 with the word stored as [s_1, ..., s_k].
        for &s in &self.words[x] {
            let step = &self.conj[&(s, self.index[&cur])];
            cur = g.conjugate_subgroup(s, &cur);
            m = self.level(&cur).reduce_mat(&step.mul(&m));
        }
        m
    }

    pub fn zero(g: &PermGroup) -> MackeyFunctor {
        let z = |_: &Subgroup, _: &Subgroup| Mat::zeros(0, 0);
        MackeyFunctor::from_rules(g, |_| AbGroup::trivial(), z, z, |_, _| Mat::zeros(0, 0))
    }

    /// The constant functor: Z everywhere, identity restrictions, index transfers.
    pub fn constant(g: &PermGroup) -> MackeyFunctor {
        let idx = |k: &Subgroup, h: &Subgroup| Mat::from_i64(1, 1, &[(h.order() / k.order()) as i64]);
        MackeyFunctor::from_rules(g, |_| AbGroup::free(1), |_, _| Mat::identity(1), idx, |_, _| Mat::identity(1))
    }

    /// The dual constant functor: Z everywhere, index restrictions, identity transfers.
    pub fn dual_constant(g: &PermGroup) -> MackeyFunctor {
        let idx = |h: &Subgroup, k: &Subgroup| Mat::from_i64(1, 1, &[(h.order() / k.order()) as i64]);
        MackeyFunctor::from_rules(g, |_| AbGroup::free(1), idx, |_, _| Mat::identity(1), |_, _| Mat::identity(1))
    }

    /// The Burnside functor H ↦ A(H), in the basis {H/K} over the classes of H.
    pub fn burnside(g: &PermGroup) -> MackeyFunctor {
        let none = BTreeSet::new();
        let realize = |s: &Subgroup| g.subgroup_as_group(s, "L");
        let to_col = |x: &BurnsideElt| -> Vec<BigInt> { x.coeff_values().iter().map(|q| q.to_integer()).collect() };
        let level = |s: &Subgroup| AbGroup::free(realize(s).lattice().len());
        let res = |h: &Subgroup, k: &Subgroup| {
            let (hg, kg) = (realize(h), realize(k));
            let cols: Vec<Vec<BigInt>> = (0..hg.lattice().len())
                .map(|c| to_col(&restriction(&BurnsideElt::basis(&hg, c, &none), &kg).unwrap()))
                .collect();
            Mat::from_columns(&cols, kg.lattice().len())
        };
        let tr = |k: &Subgroup, h: &Subgroup| {
            let (hg, kg) = (realize(h), realize(k));
            let cols: Vec<Vec<BigInt>> = (0..kg.lattice().len())
                .map(|c| to_col(&transfer(&BurnsideElt::basis(&kg, c, &none), &hg).unwrap()))
                .collect();
            Mat::from_columns(&cols, hg.lattice().len())
        };
        let conj = |x: usize, h: &Subgroup| {
            let hg = realize(h);
            let tg = realize(&g.conjugate_subgroup(x, h));
            let n = hg.lattice().len();
            let mut m = Mat::zeros(n, n);
            for c in 0..n {
                let ks = g.embed(&hg, hg.lattice().rep(c));
                let img = g.conjugate_subgroup(x, &ks);
                m.set(tg.lattice().class_of(&tg.embed(g, &img)), c, BigInt::one());
            }
            m
        };
        MackeyFunctor::from_rules(g, level, res, tr, conj)
    }

    fn eq_on(&self, target: &Subgroup, a: &Mat, b: &Mat) -> bool {
        AbGroup::maps_equal(self.level(target), a, b)
    }

    /// Every violated axiom, described in words; empty when all hold.
    pub fn check_axioms(&self) -> Vec<String> {
        let g = &self.group;
        let mut bad = Vec::new();
        let subs = &self.subgroups;
        for h in subs {
            let id = Mat::identity(self.level(h).ngens());
            if !self.eq_on(h, self.res_map(h, h), &id) || !self.eq_on(h, self.tr_map(h, h), &id) {
                bad.push(format!("identity at order {}", h.order()));
            }
            for &x in h.elements() {
                if !self.eq_on(h, &self.conj_map(x, h), &id) {
                    bad.push(format!("inner conjugation at order {}", h.order()));
                    break;
                }
            }
        }
        for h in subs {
            for k in subs.iter().filter(|k| k.is_subset_of(h)) {
                for l in subs.iter().filter(|l| l.is_subset_of(k)) {
                    let r = self.res_map(k, l).mul(self.res_map(h, k));
                    if !self.eq_on(l, &r, self.res_map(h, l)) {
                        bad.push(format!("res functoriality {}>{}>{}", h.order(), k.order(), l.order()));
                    }
                    let t = self.tr_map(k, h).mul(self.tr_map(l, k));
                    if !self.eq_on(h, &t, self.tr_map(l, h)) {
                        bad.push(format!("tr functoriality {}<{}<{}", l.order(), k.order(), h.order()));
                    }
                }
                // Naturality with the generators' conjugations.
                for s in generator_indices(g) {
                    let (sh, sk) = (g.conjugate_subgroup(s, h), g.conjugate_subgroup(s, k));
                    let a = self.conj_map(s, k).mul(self.res_map(h, k));
                    let b = self.res_map(&sh, &sk).mul(&self.conj_map(s, h));
                    let c = self.conj_map(s, h).mul(self.tr_map(k, h));
                    let d = self.tr_map(&sk, &sh).mul(&self.conj_map(s, k));
                    if !self.eq_on(&sk, &a, &b) || !self.eq_on(&sh, &c, &d) {
                        bad.push(format!("naturality at {}>{}", h.order(), k.order()));
                    }
                }
            }
        }
        bad.extend(self.check_double_coset(usize::MAX));
        bad
    }

    /// res^H_L ∘ tr^H_K = Σ_{LgK} tr^L_{L∩gKg⁻¹} ∘ c_g ∘ res^K_{g⁻¹Lg∩K}, over up to `limit` triples.
    pub fn check_double_coset(&self, limit: usize) -> Vec<String> {
        let g = &self.group;
        let mut bad = Vec::new();
        let mut count = 0;
        for h in &self.subgroups {
            let inside: Vec<&Subgroup> = self.subgroups.iter().filter(|k| k.is_subset_of(h)).collect();
            for k in &inside {
                for l in &inside {
                    if count >= limit {
                        return bad;
                    }
                    count += 1;
                    let lhs = self.res_map(h, l).mul(self.tr_map(k, h));
                    let mut rhs = Mat::zeros(self.level(l).ngens(), self.level(k).ngens());
                    for x in double_coset_reps(g, h, l, k) {
                        let gk = g.conjugate_subgroup(x, k);
                        let a = l.intersect(&gk);
                        let b = g.conjugate_subgroup(g.inv(x), &a);
                        let term = self.tr_map(&a, l).mul(&self.conj_map(x, &b)).mul(self.res_map(k, &b));
                        rhs = rhs.add(&term);
                    }
                    if !self.eq_on(l, &lhs, &rhs) {
                        bad.push(format!("double coset formula at {}: {} {}", h.order(), k.order(), l.order()));
                    }
                }
            }
        }
        bad
    }

    /// Pairs K ⊆ H where tr ∘ res differs from multiplication by |H:K|.
    pub fn check_cohomological(&self) -> CohomologicalReport {
        let mut violations = Vec::new();
        let mut checked = 0;
        for h in &self.subgroups {
            for k in self.subgroups.iter().filter(|k| k.is_subset_of(h)) {
                checked += 1;
                let tr_res = self.tr_map(k, h).mul(self.res_map(h, k));
                let idx = BigInt::from(h.order() / k.order());
                let want = Mat::identity(self.level(h).ngens()).scale(&idx);
                if !self.eq_on(h, &tr_res, &want) {
                    violations.push((h.order(), k.order()));
                }
            }
        }
        CohomologicalReport { checked, violations }
    }

    /// M(P)/(tr^P_H y ∼ tr^P_{g⁻¹Hg} c_{g⁻¹} y), localized at p, for P the catalog Sylow subgroup.
    pub fn top_level_via_transfers(&self, p: u64) -> FgAbelian {
        let g = &self.group;
        let ps = g.lattice().rep(g.sylow(p)).clone();
        let mp = self.level(&ps).clone();
        let mut rels = Mat::zeros(mp.ngens(), 0);
        for h in self.subgroups.iter().filter(|h| h.is_subset_of(&ps)) {
            for x in 0..g.order() {
                let k = g.conjugate_subgroup(g.inv(x), h);
                if !k.is_subset_of(&ps) {
                    continue;
                }
                // tr_H(y) − tr_K(c_{x⁻¹} y) for y ∈ M(H), where K = x⁻¹Hx.
                let a = self.tr_map(h, &ps).clone();
                let b = self.tr_map(&k, &ps).mul(&self.conj_map(g.inv(x), h));
                rels = rels.hstack(&mp.reduce_mat(&a.sub(&b)));
            }
        }
        let (q, _) = cokernel(&mp, &rels);
        q.invariants().localize(p)
    }

    /// The stable-subgroup and transfer-isomorphism properties at a Sylow subgroup:
    /// im(res^G_P) and the stable subgroup R agree after localizing, and tr^G_P|_R is a
    /// p-local isomorphism.
    pub fn check_stable_subgroup(&self, p: u64) -> bool {
        let g = &self.group;
        let ps = g.lattice().rep(g.sylow(p)).clone();
        let top = g.whole();
        let mp = self.level(&ps).clone();
        if mp.ngens() == 0 {
            return self.level(&top).invariants().localize(p).is_zero();
        }
        let mut targets: Vec<AbGroup> = Vec::new();
        let mut stacked = Mat::zeros(0, mp.ngens());
        for h in self.subgroups.iter().filter(|h| h.is_subset_of(&ps)) {
            for x in 0..g.order() {
                let k = g.conjugate_subgroup(g.inv(x), h);
                if !k.is_subset_of(&ps) {
                    continue;
                }
                let d = self.res_map(&ps, h).sub(&self.conj_map(x, &k).mul(self.res_map(&ps, &k)));
                stacked = stacked.vstack(&d);
                targets.push(self.level(h).clone());
            }
        }
        let refs: Vec<&AbGroup> = targets.iter().collect();
        let r = kernel(&mp, &AbGroup::direct_sum(&refs), &stacked);
        let im = SubgroupOf::generated(&mp, self.res_map(&top, &ps));
        // im ⊆ R with index prime to p.
        let im_in_r = r.coords_mat(&im.inclusion);
        let (quot, _) = cokernel(&r.group, &im_in_r);
        if !quot.invariants().localize(p).is_zero() || quot.invariants().rank != 0 {
            return false;
        }
        // tr restricted to R.
        let t = self.tr_map(&ps, &top).mul(&r.inclusion);
        let mg = self.level(&top);
        let (ck, _) = cokernel(mg, &t);
        let kr = kernel(&r.group, mg, &t);
        ck.invariants().localize(p).is_zero() && kr.group.invariants().localize(p).is_zero()
    }

    /// The diagram over subgroup classes: class representatives, and maps between a
    /// representative and a chosen conjugate of a smaller representative inside it.
    pub fn class_diagram(&self) -> ClassDiagram {
        let g = &self.group;
        let lat = g.lattice();
        let mut levels = Vec::new();
        for c in 0..lat.len() {
            let rep = lat.rep(c);
            levels.push(ClassLevel {
                class: c,
                name: class_name(g, c),
                order: rep.order(),
                value: self.level(rep).invariants().to_string(),
                moduli: self.level(rep).moduli.iter().map(|m| m.to_string()).collect(),
            });
        }
        let mut maps = Vec::new();
        for c in 0..lat.len() {
            for d in 0..lat.len() {
                if c == d || !lat.subconjugacy[d][c] {
                    continue;
                }
                let h = lat.rep(c);
                let k = lat.classes[d].members.iter().find(|m| m.is_subset_of(h)).unwrap();
                // w·rep_d·w⁻¹ = k
                let w = lat.witness_of(k);
                let rep_d = lat.rep(d);
                let res = self.conj_map(g.inv(w), k).mul(self.res_map(h, k));
                let res = self.level(rep_d).reduce_mat(&res);
                let tr = self.level(h).reduce_mat(&self.tr_map(k, h).mul(&self.conj_map(w, rep_d)));
                maps.push(ClassMap { from: c, to: d, index: h.order() / rep_d.order(), res: res.to_i64(), tr: tr.to_i64() });
            }
        }
        ClassDiagram { group: g.name().to_string(), levels, maps }
    }
}

fn double_coset_reps(g: &PermGroup, h: &Subgroup, l: &Subgroup, k: &Subgroup) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    for &x in h.elements() {
        if seen.contains(&x) {
            continue;
        }
        reps.push(x);
        for &a in l.elements() {
            for &b in k.elements() {
                seen.insert(g.mul(g.mul(a, x), b));
            }
        }
    }
    reps
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologicalReport {
    pub checked: usize,
    /// (|H|, |K|) for each failing pair.
    pub violations: Vec<(usize, usize)>,
}

impl CohomologicalReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassLevel {
    pub class: usize,
    pub name: String,
    pub order: usize,
    pub value: String,
    pub moduli: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassMap {
    pub from: usize,
    pub to: usize,
    pub index: usize,
    pub res: Vec<Vec<i64>>,
    pub tr: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassDiagram {
    pub group: String,
    pub levels: Vec<ClassLevel>,
    pub maps: Vec<ClassMap>,
}

impl ClassDiagram {
    pub fn map(&self, from: usize, to: usize) -> Option<&ClassMap> {
        self.maps.iter().find(|m| m.from == from && m.to == to)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.group);
        let w = self.levels.iter().map(|l| l.name.len()).max().unwrap_or(1);
        for l in self.levels.iter().rev() {
            out.push_str(&format!("  {:>w$}  {}\n", l.name, l.value, w = w));
        }
        let fmt = |m: &Vec<Vec<i64>>| {
            let rows: Vec<String> = m.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
            format!("[{}]", rows.join("; "))
        };
        for m in &self.maps {
            let (a, b) = (&self.levels[m.from].name, &self.levels[m.to].name);
            out.push_str(&format!("  {a:>w$} -> {b:<w$}  res {}  tr {}\n", fmt(&m.res), fmt(&m.tr), w = w));
        }
        out
    }
}

/// p-local model data: each p-subgroup Q is carried into the Sylow subgroup P by a fixed
/// element t_Q, and M(Q) is represented by the model level at t_Q Q t_Q⁻¹.
struct World<'a> {
    g: &'a PermGroup,
    piece: SylowPiece,
    carry: HashMap<Subgroup, usize>,
}

impl<'a> World<'a> {
    fn new(g: &'a PermGroup, v: &VirtualRep, p: u64) -> Result<World<'a>, SplitError> {
        let piece = SylowPiece::new(g, v, p)?;
        let mut carry = HashMap::new();
        let order: Vec<usize> = std::iter::once(g.identity()).chain((0..g.order()).filter(|&x| x != g.identity())).collect();
        for q in g.lattice().all_subgroups() {
            if p_part(q.order(), p) != q.order() {
                continue;
            }
            let t = *order.iter().find(|&&x| g.conjugate_subgroup(x, q).is_subset_of(&piece.sylow)).unwrap();
            carry.insert(q.clone(), t);
        }
        Ok(World { g, piece, carry })
    }
    fn bar(&self, q: &Subgroup) -> Subgroup {
        self.g.conjugate_subgroup(self.carry[q], q)
    }
    fn group(&self, q: &Subgroup) -> &AbGroup {
        self.piece.level(&self.bar(q)).group()
    }
    /// c_x: M(Q) → M(xQx⁻¹).
    fn conj(&self, x: usize, q: &Subgroup) -> Result<Mat, SplitError> {
        let g = self.g;
        let xq = g.conjugate_subgroup(x, q);
        let y = g.mul(g.mul(self.carry[&xq], x), g.inv(self.carry[q]));
        self.piece.conj(y, &self.bar(q))
    }
    fn res(&self, q: &Subgroup, q2: &Subgroup) -> Result<Mat, SplitError> {
        let g = self.g;
        let t = self.carry[q];
        let k = g.conjugate_subgroup(t, q2);
        let m = self.piece.res(&self.bar(q), &k);
        let y = g.mul(self.carry[q2], g.inv(t));
        Ok(self.piece.conj(y, &k)?.mul(&m))
    }
    fn tr(&self, q2: &Subgroup, q: &Subgroup) -> Result<Mat, SplitError> {
        let g = self.g;
        let t = self.carry[q];
        let k = g.conjugate_subgroup(t, q2);
        let y = g.mul(t, g.inv(self.carry[q2]));
        Ok(self.piece.tr(&k, &self.bar(q)).mul(&self.piece.conj(y, &self.bar(q2))?))
    }
}

/// The p-local value at one subgroup: stable elements in M(Q) for a Sylow p-subgroup Q of H.
struct PLevel {
    sylow: Subgroup,
    stable: SubgroupOf,
}

fn sylow_of(g: &PermGroup, h: &Subgroup, big: &Subgroup, p: u64) -> Subgroup {
    let n = p_part(h.order(), p);
    let inter = h.intersect(big);
    if inter.order() == n {
        return inter;
    }
    g.lattice().all_subgroups().find(|s| s.order() == n && s.is_subset_of(h)).unwrap().clone()
}

fn subgroups_of<'b>(g: &'b PermGroup, q: &'b Subgroup) -> impl Iterator<Item = &'b Subgroup> + 'b {
    g.lattice().all_subgroups().filter(move |s| s.is_subset_of(q))
}

impl World<'_> {
    fn plevel(&self, h: &Subgroup) -> Result<PLevel, SplitError> {
        let g = self.g;
        let q = sylow_of(g, h, &self.piece.sylow, self.piece.prime);
        let top = self.group(&q).clone();
        let mut rows: Vec<Mat> = Vec::new();
        let mut targets: Vec<AbGroup> = Vec::new();
        for l in subgroups_of(g, &q) {
            for &x in h.elements() {
                let k = g.conjugate_subgroup(g.inv(x), l);
                if !k.is_subset_of(&q) {
                    continue;
                }
                let d = self.res(&q, l)?.sub(&self.conj(x, &k)?.mul(&self.res(&q, &k)?));
                let d = self.group(l).reduce_mat(&d);
                if d.is_zero() || rows.iter().zip(&targets).any(|(m, t)| *m == d && t == self.group(l)) {
                    continue;
                }
                rows.push(d);
                targets.push(self.group(l).clone());
            }
        }
        let stable = if rows.is_empty() || top.ngens() == 0 {
            SubgroupOf::generated(&top, &Mat::identity(top.ngens()))
        } else {
            let refs: Vec<&AbGroup> = targets.iter().collect();
            let mut stacked = Mat::zeros(0, top.ngens());
            for r in &rows {
                stacked = stacked.vstack(r);
            }
            kernel(&top, &AbGroup::direct_sum(&refs), &stacked)
        };
        Ok(PLevel { sylow: q, stable })
    }

    /// M(Q_H) → M(L) for a p-subgroup L ⊆ H: restriction of the element of M(H).
    fn res_to(&self, h: &Subgroup, ql: &PLevel, l: &Subgroup) -> Result<Mat, SplitError> {
        let g = self.g;
        let x = *h.elements().iter().find(|&&x| g.conjugate_subgroup(x, l).is_subset_of(&ql.sylow)).unwrap();
        let xl = g.conjugate_subgroup(x, l);
        Ok(self.conj(g.inv(x), &xl)?.mul(&self.res(&ql.sylow, &xl)?))
    }

    fn level_res(&self, h: &Subgroup, ph: &PLevel, _k: &Subgroup, pk: &PLevel) -> Result<Mat, SplitError> {
        let m = self.res_to(h, ph, &pk.sylow)?.mul(&ph.stable.inclusion);
        Ok(pk.stable.coords_mat(&self.group(&pk.sylow).reduce_mat(&m)))
    }

    fn level_tr(&self, k: &Subgroup, pk: &PLevel, h: &Subgroup, ph: &PLevel) -> Result<Mat, SplitError> {
        let g = self.g;
        let q = &ph.sylow;
        let mut acc = Mat::zeros(self.group(q).ngens(), pk.stable.group.ngens());
        for x in double_coset_reps(g, h, q, k) {
            let a = q.intersect(&g.conjugate_subgroup(x, k));
            let b = g.conjugate_subgroup(g.inv(x), &a);
            let term = self.tr(&a, q)?.mul(&self.conj(x, &b)?).mul(&self.res_to(k, pk, &b)?).mul(&pk.stable.inclusion);
            acc = acc.add(&term);
        }
        Ok(ph.stable.coords_mat(&self.group(q).reduce_mat(&acc)))
    }

    fn level_conj(&self, x: usize, h: &Subgroup, ph: &PLevel, pt: &PLevel) -> Result<Mat, SplitError> {
        let g = self.g;
        let b = g.conjugate_subgroup(g.inv(x), &pt.sylow);
        let m = self.conj(x, &b)?.mul(&self.res_to(h, ph, &b)?).mul(&ph.stable.inclusion);
        Ok(pt.stable.coords_mat(&self.group(&pt.sylow).reduce_mat(&m)))
    }
}

/// Coordinates of the integral level at one subgroup.
struct Layout {
    free: bool,
    /// For each prime: (local coordinate, integral coordinate) for the torsion coordinates.
    torsion: BTreeMap<u64, Vec<(usize, usize)>>,
    /// Local free coordinate per prime, and the unit u with g = u·g_p.
    local_free: BTreeMap<u64, (usize, BigRational)>,
    group: AbGroup,
}

fn valuation(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

fn rational_mod(q: &BigRational, m: &BigInt) -> BigInt {
    let d = q.denom().mod_floor(m);
    let inv = mod_inverse(&d, m);
    (q.numer() * inv).mod_floor(m)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "non-unit denominator");
    e.x.mod_floor(m)
}

/// Assemble H ↦ π_V^H(HZ) on all subgroups of G.
pub fn assemble(g: &PermGroup, v: &VirtualRep) -> Result<MackeyFunctor, MackeyError> {
    let primes = prime_factors(g.order() as u64);
    let subs: Vec<Subgroup> = g.lattice().all_subgroups().cloned().collect();
    let worlds: Vec<World> = primes.iter().map(|&p| World::new(g, v, p)).collect::<Result<_, _>>()?;
    let plevels: Vec<Vec<PLevel>> =
        worlds.iter().map(|w| subs.iter().map(|h| w.plevel(h)).collect::<Result<Vec<_>, _>>()).collect::<Result<_, _>>()?;
    let trivial_idx = subs.iter().position(|s| s.is_trivial()).unwrap();

    // Integral layouts.
    let mut layouts: Vec<Layout> = Vec::new();
    for (i, h) in subs.iter().enumerate() {
        let mut ranks = Vec::new();
        for (wi, w) in worlds.iter().enumerate() {
            let pl = &plevels[wi][i];
            ranks.push(pl.stable.group.moduli.iter().filter(|m| m.is_zero()).count());
            let _ = w;
        }
        if ranks.windows(2).any(|r| r[0] != r[1]) || ranks.first().is_some_and(|&r| r > 1) {
            return Err(MackeyError::Inconsistent(h.order(), format!("free ranks {ranks:?}")));
        }
        let free = ranks.first().is_some_and(|&r| r == 1);
        let mut moduli = Vec::new();
        if free {
            moduli.push(BigInt::zero());
        }
        let mut torsion = BTreeMap::new();
        let mut local_free = BTreeMap::new();
        let mut d = BigInt::one();
        let mut svals = Vec::new();
        for (wi, w) in worlds.iter().enumerate() {
            let p = primes[wi];
            let pl = &plevels[wi][i];
            let mut tors = Vec::new();
            for (j, m) in pl.stable.group.moduli.iter().enumerate() {
                if m.is_zero() {
                    let e = g.trivial();
                    let col = w.res_to(h, pl, &e)?.mul(&pl.stable.inclusion).column(j);
                    let s = col[0].clone();
                    d *= BigInt::from(p).pow(valuation(&s, p));
                    svals.push((p, j, s));
                } else {
                    tors.push((j, moduli.len()));
                    moduli.push(m.clone());
                }
            }
            torsion.insert(p, tors);
        }
        for (p, j, s) in svals {
            local_free.insert(p, (j, BigRational::new(d.clone(), s)));
        }
        layouts.push(Layout { free, torsion, local_free, group: AbGroup::new(moduli) });
    }
    let _ = trivial_idx;

    let glue_map = |a: usize, b: usize, locals: &[Mat]| -> Result<Mat, MackeyError> {
        let (la, lb) = (&layouts[a], &layouts[b]);
        let mut m = Mat::zeros(lb.group.ngens(), la.group.ngens());
        let mut free_coeff: Option<BigRational> = None;
        for (wi, &p) in primes.iter().enumerate() {
            let f = &locals[wi];
            if la.free {
                let (ja, ua) = &la.local_free[&p];
                if lb.free {
                    let (jb, ub) = &lb.local_free[&p];
                    let c = BigRational::from_integer(f.get(*jb, *ja).clone()) * ua / ub;
                    match &free_coeff {
                        Some(prev) if *prev != c => {
                            return Err(MackeyError::Inconsistent(subs[a].order(), format!("free coefficient {prev} vs {c}")))
                        }
                        _ => free_coeff = Some(c),
                    }
                }
                for &(lj, ij) in &lb.torsion[&p] {
                    let q = BigRational::from_integer(f.get(lj, *ja).clone()) * ua;
                    m.set(ij, 0, rational_mod(&q, &lb.group.moduli[ij]));
                }
            }
            for &(lja, ija) in &la.torsion[&p] {
                for &(ljb, ijb) in &lb.torsion[&p] {
                    m.set(ijb, ija, f.get(ljb, lja).mod_floor(&lb.group.moduli[ijb]));
                }
            }
        }
        if let Some(c) = free_coeff {
            if !c.is_integer() {
                return Err(MackeyError::Inconsistent(subs[a].order(), format!("non-integral free coefficient {c}")));
            }
            m.set(0, 0, c.to_integer());
        }
        Ok(m)
    };

    let idx: HashMap<&Subgroup, usize> = subs.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut res = HashMap::new();
    let mut tr = HashMap::new();
    for (hi, h) in subs.iter().enumerate() {
        for (ki, k) in subs.iter().enumerate() {
            if !k.is_subset_of(h) {
                continue;
            }
            let mut lr = Vec::new();
            let mut lt = Vec::new();
            for (wi, w) in worlds.iter().enumerate() {
                lr.push(w.level_res(h, &plevels[wi][hi], k, &plevels[wi][ki])?);
                lt.push(w.level_tr(k, &plevels[wi][ki], h, &plevels[wi][hi])?);
            }
            res.insert((hi, ki), glue_map(hi, ki, &lr)?);
            tr.insert((ki, hi), glue_map(ki, hi, &lt)?);
        }
    }
    let mut conj = HashMap::new();
    for s in generator_indices(g) {
        for (hi, h) in subs.iter().enumerate() {
            let ti = idx[&g.conjugate_subgroup(s, h)];
            let mut lc = Vec::new();
            for (wi, w) in worlds.iter().enumerate() {
                lc.push(w.level_conj(s, h, &plevels[wi][hi], &plevels[wi][ti])?);
            }
            conj.insert((s, hi), glue_map(hi, ti, &lc)?);
        }
    }
    let lv: HashMap<&Subgroup, AbGroup> = subs.iter().zip(&layouts).map(|(s, l)| (s, l.group.clone())).collect();
    Ok(MackeyFunctor::from_rules(
        g,
        |s| lv[s].clone(),
        |h, k| res[&(idx[h], idx[k])].clone(),
        |k, h| tr[&(idx[k], idx[h])].clone(),
        |x, h| conj[&(x, idx[h])].clone(),
    ))
}

/// Whether two functors on the same group have identical levels and maps.
pub fn same_functor(a: &MackeyFunctor, b: &MackeyFunctor) -> bool {
    a.levels == b.levels && a.res == b.res && a.tr == b.tr && a.conj == b.conj
}

/// Small integer entries of a matrix, for display.
pub fn small_entries(m: &Mat) -> Vec<Vec<i64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_i64().unwrap_or(i64::MAX)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;
    use crate::reps::{group_kind, parse_grading};

    fn functor(group: &str, grading: &str) -> MackeyFunctor {
        let g = make_group(group).unwrap();
        let v = parse_grading(group_kind(&g).unwrap(), grading).unwrap();
        assemble(&g, &v).unwrap()
    }

    #[test]
    fn templates_satisfy_axioms() {
        for name in ["C2", "K4", "D6"] {
            let g = make_group(name).unwrap();
            for m in [MackeyFunctor::constant(&g), MackeyFunctor::dual_constant(&g), MackeyFunctor::zero(&g), MackeyFunctor::burnside(&g)] {
                assert!(m.check_axioms().is_empty(), "{name}: {:?}", m.check_axioms());
            }
            assert!(MackeyFunctor::constant(&g).check_cohomological().passes());
            assert!(MackeyFunctor::zero(&g).check_cohomological().passes());
        }
        let c2 = make_group("C2").unwrap();
        let b = MackeyFunctor::burnside(&c2).check_cohomological();
        assert_eq!(b.violations, vec![(2, 1)]);
    }

    #[test]
    fn klein_templates() {
        let g = make_group("K4").unwrap();
        assert!(same_functor(&functor("K4", "V - 3"), &MackeyFunctor::dual_constant(&g)));
        assert!(same_functor(&functor("K4", "3 - V"), &MackeyFunctor::constant(&g)));
    }

    #[test]
    fn dihedral_functor_is_lawful() {
        let m = functor("D6", "1 + s - g");
        assert!(m.check_axioms().is_empty(), "{:?}", m.check_axioms());
        assert!(m.check_cohomological().passes());
        for p in [2, 3] {
            assert_eq!(m.top_level_via_transfers(p), m.level(&m.group.whole()).invariants().localize(p));
            assert!(m.check_stable_subgroup(p));
        }
    }
}

#[cfg(test)]
mod icosahedral {
    use super::*;
    use crate::group::make_group;
    use crate::reps::{group_kind, parse_grading};

    fn diagram(grading: &str) -> (MackeyFunctor, ClassDiagram) {
        let g = make_group("A5").unwrap();
        let v = parse_grading(group_kind(&g).unwrap(), grading).unwrap();
        let m = assemble(&g, &v).unwrap();
        let d = m.class_diagram();
        (m, d)
    }

    fn class(d: &ClassDiagram, name: &str) -> usize {
        d.levels.iter().find(|l| l.name == name).unwrap().class
    }

    #[test]
    fn free_functor_maps() {
        let (m, d) = diagram("-2 + V3 + V4 - V5");
        assert!(d.levels.iter().all(|l| l.value == "Z"));
        let top = class(&d, "A_5");
        let pairs = [("D_6", 10, 1), ("A_4", 5, 1), ("D_10", 2, 3)];
        for (name, r, t) in pairs {
            let map = d.map(top, class(&d, name)).unwrap();
            assert_eq!((map.res[0][0], map.tr[0][0]), (r, t), "{name}");
        }
        assert!(m.check_cohomological().passes());
    }

    #[test]
    fn torsion_functor_maps() {
        let (m, d) = diagram("3 - V3 - V4");
        assert_eq!(m.level(&m.group.whole()).invariants(), FgAbelian::cyclic(30));
        let k4 = class(&d, "K_4");
        assert_eq!(d.levels[k4].value, "Z/2 + Z/2 + Z/2");
        // Each K_4 coordinate goes to the 2-primary coordinate of A_4.
        let map = d.map(class(&d, "A_4"), k4).unwrap();
        let a4 = &d.levels[class(&d, "A_4")].moduli;
        let two = a4.iter().position(|m| m == "2").unwrap();
        for j in 0..3 {
            for (i, row) in map.tr.iter().enumerate() {
                assert_eq!(row[j], i64::from(i == two));
            }
        }
        assert!(m.check_cohomological().passes());
        for p in [2, 3, 5] {
            assert_eq!(m.top_level_via_transfers(p), m.level(&m.group.whole()).invariants().localize(p));
        }
    }
}
