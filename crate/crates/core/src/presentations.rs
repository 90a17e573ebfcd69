//! Graded pieces of the closed-form answers: the C_2 and C_p rings, the D_2p ring, the
//! 3- and 5-local A_5 rings, and the two K_4 cones (subring and kernel descriptions).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::abelian::{AbGroup, FgAbelian, SubgroupOf};
use crate::intmat::{snf, Mat, Track};
use crate::reps::{Kind, VirtualRep};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("grading has {got} coordinates, expected {want}")]
    Arity { got: usize, want: usize },
    #[error("infinitely many labels of family `{0}` in one grading")]
    Unbounded(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Presentation {
    /// π^{C_2} in gradings (a, b) for a + bσ.
    C2,
    /// π^{C_p} in gradings (a, b) for a + bλ.
    Cp(u64),
    /// π^{D_2p} in gradings (k, m, n) for k + mσ + nγ.
    D2p(u64),
    /// 3-local π^{A_5} in gradings (n1, n3, n4, n5).
    A5ThreeLocal,
    /// 5-local π^{A_5} in gradings (n1, n3, n4, n5).
    A5FiveLocal,
    /// π^{K_4} in gradings (a, b) for a + bV, b ≤ 0 (subring description).
    KleinPositive,
    /// π^{K_4} in gradings (a, b) for a + bV, b > 0 (kernel description).
    KleinNegative,
}

impl Presentation {
    pub fn arity(&self) -> usize {
        match self {
            Presentation::C2 | Presentation::Cp(_) | Presentation::KleinPositive | Presentation::KleinNegative => 2,
            Presentation::D2p(_) => 3,
            Presentation::A5ThreeLocal | Presentation::A5FiveLocal => 4,
        }
    }
}

/// One basis label found in a graded piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialLabel {
    pub symbol: String,
    pub grading: Vec<i64>,
    pub group: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Range {
    NonNeg,
    Pos,
    Neg,
    Any,
}

impl Range {
    fn ok(&self, x: i64) -> bool {
        match self {
            Range::NonNeg => x >= 0,
            Range::Pos => x > 0,
            Range::Neg => x < 0,
            Range::Any => true,
        }
    }
    fn bound(&self) -> (Option<i64>, Option<i64>) {
        match self {
            Range::NonNeg => (Some(0), None),
            Range::Pos => (Some(1), None),
            Range::Neg => (None, Some(-1)),
            Range::Any => (None, None),
        }
    }
}

struct Family {
    name: &'static str,
    base: Vec<i64>,
    gens: Vec<(&'static str, Vec<i64>, Range)>,
    /// Group carried by a label with the given exponents (None = the label is zero).
    group: Box<dyn Fn(&[i64]) -> Option<FgAbelian>>,
}

fn z() -> FgAbelian {
    FgAbelian::free(1)
}
fn zmod(n: u64) -> FgAbelian {
    FgAbelian::cyclic(n)
}

fn families(pres: Presentation) -> Vec<Family> {
    match pres {
        Presentation::C2 | Presentation::Cp(_) => {
            let (q, u, a) = match pres {
                Presentation::C2 => (2u64, vec![2, -2], vec![0, -1]),
                Presentation::Cp(p) => (p, vec![2, -1], vec![0, -1]),
                _ => unreachable!(),
            };
            let (un, an) = if q == 2 { ("u_{2σ}", "a_σ") } else { ("u_λ", "a_λ") };
            vec![
                Family {
                    name: "polynomial",
                    base: vec![0, 0],
                    gens: vec![(un, u.clone(), Range::NonNeg), (an, a.clone(), Range::NonNeg)],
                    group: Box::new(move |e| Some(if e[1] == 0 { z() } else { zmod(q) })),
                },
                Family {
                    name: "inverse u",
                    base: vec![0, 0],
                    gens: vec![(un, u.clone(), Range::Neg)],
                    group: Box::new(|_| Some(z())),
                },
                Family {
                    name: "suspended inverses",
                    base: vec![-1, 0],
                    gens: vec![(un, u, Range::Neg), (an, a, Range::Neg)],
                    group: Box::new(move |_| Some(zmod(q))),
                },
            ]
        }
        Presentation::D2p(p) => {
            let u1 = ("u_{γ-σ}", vec![1, 1, -1]);
            let u2 = ("u_{2σ}", vec![2, -2, 0]);
            let asg = ("a_σ", vec![0, -1, 0]);
            let agm = ("a_γ", vec![0, 0, -1]);
            let g = |x: &(&'static str, Vec<i64>), r: Range| (x.0, x.1.clone(), r);
            use Range::*;
            vec![
                Family {
                    name: "polynomial",
                    base: vec![0, 0, 0],
                    gens: vec![g(&u1, NonNeg), g(&u2, NonNeg), g(&asg, NonNeg), g(&agm, NonNeg)],
                    group: Box::new(move |e| match (e[2] > 0, e[3] > 0) {
                        (false, false) => Some(z()),
                        (true, false) => Some(zmod(2)),
                        (false, true) => Some(zmod(p)),
                        (true, true) => None,
                    }),
                },
                Family { name: "2Z u_{2σ}^{-i}", base: vec![0, 0, 0], gens: vec![g(&u1, NonNeg), g(&u2, Neg)], group: Box::new(|_| Some(z())) },
                Family { name: "pZ u_{γ-σ}^{-i}", base: vec![0, 0, 0], gens: vec![g(&u2, NonNeg), g(&u1, Neg)], group: Box::new(|_| Some(z())) },
                Family { name: "2pZ", base: vec![0, 0, 0], gens: vec![g(&u2, Neg), g(&u1, Neg)], group: Box::new(|_| Some(z())) },
                Family {
                    name: "Z/p a_γ^j u_{2σ}^{-k}",
                    base: vec![0, 0, 0],
                    gens: vec![g(&u1, NonNeg), g(&agm, Pos), g(&u2, Neg)],
                    group: Box::new(move |_| Some(zmod(p))),
                },
                Family {
                    name: "Z/2 a_σ^j u_{γ-σ}^{-k}",
                    base: vec![0, 0, 0],
                    gens: vec![g(&u2, NonNeg), g(&asg, Pos), g(&u1, Neg)],
                    group: Box::new(|_| Some(zmod(2))),
                },
                Family {
                    name: "Z/2 Σ^{-1}",
                    base: vec![-1, 0, 0],
                    gens: vec![g(&u1, Any), g(&u2, Neg), g(&asg, Neg)],
                    group: Box::new(|_| Some(zmod(2))),
                },
                Family {
                    name: "Z/p Σ^{-1}",
                    base: vec![-1, 0, 0],
                    gens: vec![g(&u2, Any), g(&u1, Neg), g(&agm, Neg)],
                    group: Box::new(move |_| Some(zmod(p))),
                },
            ]
        }
        Presentation::A5ThreeLocal | Presentation::A5FiveLocal => {
            let (q, l1, l2, u, a) = if pres == Presentation::A5ThreeLocal {
                (
                    3u64,
                    ("u_{V4-V3}", vec![1, 1, -1, 0]),
                    ("u_{2V3-V5}", vec![1, -2, 0, 1]),
                    ("u_{V3}", vec![3, -1, 0, 0]),
                    ("a_{V5-1}", vec![1, 0, 0, -1]),
                )
            } else {
                (
                    5u64,
                    ("u_{V5-V4}", vec![1, 0, 1, -1]),
                    ("u_{2V3-V4}", vec![2, -2, 1, 0]),
                    ("u_{V3}", vec![3, -1, 0, 0]),
                    ("a_{V4}", vec![0, 0, -1, 0]),
                )
            };
            let g = |x: &(&'static str, Vec<i64>), r: Range| (x.0, x.1.clone(), r);
            use Range::*;
            vec![
                Family {
                    name: "polynomial",
                    base: vec![0; 4],
                    gens: vec![g(&l1, Any), g(&l2, Any), g(&u, NonNeg), g(&a, NonNeg)],
                    group: Box::new(move |e| Some(if e[3] == 0 { z() } else { zmod(q) })),
                },
                Family {
                    name: "inverse u",
                    base: vec![0; 4],
                    gens: vec![g(&l1, Any), g(&l2, Any), g(&u, Neg)],
                    group: Box::new(|_| Some(z())),
                },
                Family {
                    name: "suspended inverses",
                    base: vec![-1, 0, 0, 0],
                    gens: vec![g(&l1, Any), g(&l2, Any), g(&u, Neg), g(&a, Neg)],
                    group: Box::new(move |_| Some(zmod(q))),
                },
            ]
        }
        Presentation::KleinPositive | Presentation::KleinNegative => vec![],
    }
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

/// Exponent vectors x with base + G x = target and each x_i in its range.
fn solve_family(f: &Family, target: &[i64]) -> Result<Vec<Vec<i64>>, PresentationError> {
    let c = target.len();
    let e = f.gens.len();
    let mut g = Mat::zeros(c, e);
    for (j, (_, v, _)) in f.gens.iter().enumerate() {
        for i in 0..c {
            g.set(i, j, BigInt::from(v[i]));
        }
    }
    let rhs: Vec<BigInt> = (0..c).map(|i| BigInt::from(target[i] - f.base[i])).collect();
    let s = snf(&g, Track { u: true, u_inv: false, v: true, v_inv: false });
    let (u, v) = (s.u.unwrap(), s.v.unwrap());
    let ur = u.mul_vec(&rhs);
    let mut y = vec![BigInt::zero(); e];
    for i in 0..c {
        if i < s.rank {
            let (q, r) = ur[i].div_rem(&s.diag[i]);
            if !r.is_zero() {
                return Ok(vec![]);
            }
            y[i] = q;
        } else if !ur[i].is_zero() {
            return Ok(vec![]);
        }
    }
    let x0 = v.mul_vec(&y);
    let free: Vec<usize> = (s.rank..e).collect();
    let ranges: Vec<Range> = f.gens.iter().map(|x| x.2).collect();
    let to_i64 = |v: &[BigInt]| v.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<i64>>();
    match free.len() {
        0 => Ok(if to_i64(&x0).iter().zip(&ranges).all(|(x, r)| r.ok(*x)) { vec![to_i64(&x0)] } else { vec![] }),
        1 => {
            let k = v.column(free[0]);
            let (mut lo, mut hi): (Option<BigInt>, Option<BigInt>) = (None, None);
            for i in 0..e {
                let (blo, bhi) = ranges[i].bound();
                if k[i].is_zero() {
                    if !ranges[i].ok(x0[i].to_i64().unwrap()) {
                        return Ok(vec![]);
                    }
                    continue;
                }
                // x0_i + t k_i within [blo, bhi]
                for (bound, is_lower) in [(blo, true), (bhi, false)] {
                    let Some(b) = bound else { continue };
                    let num = BigInt::from(b) - &x0[i];
                    let positive = k[i].is_positive();
                    let t_lower = is_lower == positive;
                    if t_lower {
                        let t = if positive { ceil_div(&num, &k[i]) } else { ceil_div(&-num, &-k[i].clone()) };
                        lo = Some(lo.map_or(t.clone(), |l: BigInt| l.max(t)));
                    } else {
                        let t = if positive { num.div_floor(&k[i]) } else { (-num).div_floor(&-k[i].clone()) };
                        hi = Some(hi.map_or(t.clone(), |h: BigInt| h.min(t)));
                    }
                }
            }
            let (Some(lo), Some(hi)) = (lo, hi) else { return Err(PresentationError::Unbounded(f.name.into())) };
            let mut out = Vec::new();
            let mut t = lo;
            while t <= hi {
                let x: Vec<BigInt> = x0.iter().zip(&k).map(|(a, b)| a + b * &t).collect();
                out.push(to_i64(&x));
                t += 1;
            }
            Ok(out)
        }
        _ => Err(PresentationError::Unbounded(f.name.into())),
    }
}

fn label_symbol(f: &Family, x: &[i64]) -> String {
    let mut s = String::new();
    if f.base.iter().any(|&b| b != 0) {
        s.push_str("Σ^{-1}");
    }
    for ((name, _, _), &e) in f.gens.iter().zip(x) {
        if e == 0 {
            continue;
        }
        if e == 1 {
            s.push_str(name);
        } else if e < 0 {
            s.push_str(&format!("{name}^{{{e}}}"));
        } else {
            s.push_str(&format!("{name}^{e}"));
        }
    }
    if s.is_empty() {
        s.push('1');
    }
    s
}

/// The presentations describing π_V^G for a catalog grading, each with its coordinates.
/// A_5 gets its 3- and 5-local rings; asymmetric K_4 gradings and A_4 get none.
pub fn presentations_for(v: &VirtualRep) -> Vec<(Presentation, Vec<i64>)> {
    let c = &v.coeffs;
    match v.kind {
        Kind::C2 => vec![(Presentation::C2, c.clone())],
        Kind::Cp(p) => vec![(Presentation::Cp(p), c.clone())],
        Kind::Dihedral(p) => vec![(Presentation::D2p(p), c.clone())],
        Kind::A5 => vec![(Presentation::A5ThreeLocal, c.clone()), (Presentation::A5FiveLocal, c.clone())],
        Kind::K4 => match v.k4_symmetric() {
            Some((a, b)) if b <= 0 => vec![(Presentation::KleinPositive, vec![a, b])],
            Some((a, b)) => vec![(Presentation::KleinNegative, vec![a, b])],
            None => vec![],
        },
        Kind::Trivial | Kind::A4 => vec![],
    }
}

/// The graded piece of a presentation at a grading, with the labels found there.
pub fn graded_piece(pres: Presentation, grading: &[i64]) -> Result<(FgAbelian, Vec<MonomialLabel>), PresentationError> {
    if grading.len() != pres.arity() {
        return Err(PresentationError::Arity { got: grading.len(), want: pres.arity() });
    }
    match pres {
        Presentation::KleinPositive => return Ok(klein_positive(grading[0], -grading[1])),
        Presentation::KleinNegative => return Ok(klein_negative(grading[0], grading[1])),
        _ => {}
    }
    let mut total = FgAbelian::zero();
    let mut labels = Vec::new();
    for f in families(pres) {
        for x in solve_family(&f, grading)? {
            if let Some(gp) = (f.group)(&x) {
                labels.push(MonomialLabel { symbol: label_symbol(&f, &x), grading: grading.to_vec(), group: gp.to_string() });
                total = total.direct_sum(&gp);
            }
        }
    }
    Ok((total, labels))
}

/// Exponents (i_1, j_1, i_2, j_2, i_3, j_3) of x_1^{i_1} y_1^{j_1} x_2^{i_2} y_2^{j_2} x_3^{i_3} y_3^{j_3}.
type Mono = [i64; 6];

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut c = [0; 6];
    for i in 0..6 {
        c[i] = a[i] + b[i];
    }
    c
}

fn has_x(m: &Mono) -> bool {
    m[0] > 0 || m[2] > 0 || m[4] > 0
}

/// The relation x_1y_2y_3 + y_1x_2y_3 + y_1y_2x_3.
const REL: [Mono; 3] = [[1, 0, 0, 1, 0, 1], [0, 1, 1, 0, 0, 1], [0, 1, 0, 1, 1, 0]];

type Poly = BTreeMap<Mono, i64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            *out.entry(mono_mul(ma, mb)).or_insert(0) += ca * cb;
        }
    }
    out.retain(|m, c| if has_x(m) { c.rem_euclid(2) != 0 } else { *c != 0 });
    for (m, c) in out.iter_mut() {
        if has_x(m) {
            *c = 1;
        }
    }
    out
}

/// Monomials with i_t + j_t = n and Σ j_t = a.
fn level_monos(n: i64, a: i64) -> Vec<Mono> {
    let mut out = Vec::new();
    for j1 in 0..=n {
        for j2 in 0..=n {
            let j3 = a - j1 - j2;
            if (0..=n).contains(&j3) {
                out.push([n - j1, j1, n - j2, j2, n - j3, j3]);
            }
        }
    }
    out
}

/// Generators of types (1)–(4) at level n (all gradings).
fn klein_generators(n: i64) -> Vec<Poly> {
    let mut out = Vec::new();
    let single = |m: Mono| -> Poly { [(m, 1)].into_iter().collect() };
    let pair = |a: Mono, b: Mono| -> Poly { [(a, 1), (b, 1)].into_iter().collect() };
    let par = |a: i64, b: i64| (a - b).rem_euclid(2) == 0;
    // (1)
    for j1 in 0..=n {
        for j2 in 0..=n {
            for j3 in 0..=n {
                let (i1, i2, i3) = (n - j1, n - j2, n - j3);
                if par(j1, j2) && par(j2, j3) && j1 * j2 * i3 == 0 {
                    out.push(single([i1, j1, i2, j2, i3, j3]));
                }
            }
        }
    }
    // (2) i1+j1 = i2+j2 = j3-1 = n-1
    if n >= 1 {
        let s = n - 1;
        let j3 = n;
        for j1 in 0..=s {
            for j2 in 0..=s {
                let (i1, i2) = (s - j1, s - j2);
                if par(j1, j2) && par(j2, j3) {
                    out.push(pair([i1 + 1, j1, i2, j2 + 1, 0, j3], [i1, j1 + 1, i2 + 1, j2, 0, j3]));
                }
            }
        }
        // (3) i1+j1 = i3+j3 = i2-1
        let i2 = n;
        for j1 in 0..=s {
            for j3 in 0..=s {
                let (i1, i3) = (s - j1, s - j3);
                if j1 % 2 == 0 && j3 % 2 == 0 {
                    out.push(pair([i1 + 1, j1, i2, 0, i3, j3 + 1], [i1, j1 + 1, i2, 0, i3 + 1, j3]));
                }
            }
        }
        // (4) i2+j2 = i3+j3 = i1-1
        let i1 = n;
        for j2 in 0..=s {
            for j3 in 0..=s {
                let (i2, i3) = (s - j2, s - j3);
                if j2 % 2 == 0 && j3 % 2 == 0 {
                    out.push(pair([i1, 0, i2 + 1, j2, i3, j3 + 1], [i1, 0, i2, j2 + 1, i3 + 1, j3]));
                }
            }
        }
    }
    out
}

fn poly_grading(p: &Poly) -> Option<(i64, i64)> {
    let m = p.keys().next()?;
    Some((m[0] + m[1], m[1] + m[3] + m[5]))
}

/// F_2 row reduction: returns reduced rows (pivot-first) of the span.
fn f2_basis(rows: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let mut basis: Vec<Vec<u8>> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for b in &basis {
            let piv = b.iter().position(|&x| x == 1).unwrap();
            if v[piv] == 1 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x ^= y;
                }
            }
        }
        if v.iter().any(|&x| x == 1) {
            let piv = v.iter().position(|&x| x == 1).unwrap();
            for b in basis.iter_mut() {
                if b[piv] == 1 {
                    for (x, y) in b.iter_mut().zip(&v) {
                        *x ^= y;
                    }
                }
            }
            basis.push(v);
        }
    }
    basis
}

fn f2_reduce(v: &[u8], basis: &[Vec<u8>]) -> Vec<u8> {
    let mut v = v.to_vec();
    for b in basis {
        let piv = b.iter().position(|&x| x == 1).unwrap();
        if v[piv] == 1 {
            for (x, y) in v.iter_mut().zip(b) {
                *x ^= y;
            }
        }
    }
    v
}

/// The ambient graded piece of Z[x,y]/(2x_i, r) at level n, grading a.
struct Ambient {
    pure: Option<Mono>,
    xmonos: Vec<Mono>,
    rel_basis: Vec<Vec<u8>>,
    free_coords: Vec<usize>,
}

impl Ambient {
    fn new(n: i64, a: i64) -> Ambient {
        let monos = level_monos(n, a);
        let pure = monos.iter().copied().find(|m| !has_x(m));
        let xmonos: Vec<Mono> = monos.iter().copied().filter(has_x).collect();
        let pos: BTreeMap<Mono, usize> = xmonos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut rels = Vec::new();
        if n >= 1 {
            for m in level_monos(n - 1, a - 2) {
                let mut v = vec![0u8; xmonos.len()];
                for r in &REL {
                    v[pos[&mono_mul(&m, r)]] ^= 1;
                }
                rels.push(v);
            }
        }
        let rel_basis = f2_basis(&rels);
        let pivots: BTreeSet<usize> = rel_basis.iter().map(|b| b.iter().position(|&x| x == 1).unwrap()).collect();
        let free_coords = (0..xmonos.len()).filter(|i| !pivots.contains(i)).collect();
        Ambient { pure, xmonos, rel_basis, free_coords }
    }
    fn torsion_dim(&self) -> usize {
        self.free_coords.len()
    }
    /// (coefficient of the pure-y monomial, reduced F_2 coordinates).
    fn image(&self, p: &Poly) -> (i64, Vec<u8>) {
        let mut v = vec![0u8; self.xmonos.len()];
        let mut c = 0;
        for (m, k) in p {
            if has_x(m) {
                let i = self.xmonos.iter().position(|x| x == m).unwrap();
                v[i] ^= (k.rem_euclid(2)) as u8;
            } else {
                c += k;
            }
        }
        let r = f2_reduce(&v, &self.rel_basis);
        (c, self.free_coords.iter().map(|&i| r[i]).collect())
    }
    fn group(&self) -> AbGroup {
        let mut moduli = Vec::new();
        if self.pure.is_some() {
            moduli.push(BigInt::zero());
        }
        moduli.extend(std::iter::repeat(BigInt::from(2)).take(self.torsion_dim()));
        AbGroup::new(moduli)
    }
    fn column(&self, p: &Poly) -> Vec<BigInt> {
        let (c, w) = self.image(p);
        let mut col = Vec::new();
        if self.pure.is_some() {
            col.push(BigInt::from(c));
        }
        col.extend(w.into_iter().map(BigInt::from));
        col
    }
}

/// Subring pieces of the positive cone up to level `n_max`, by grading (n, a).
pub struct KleinSubring {
    pieces: BTreeMap<(i64, i64), Vec<Poly>>,
}

impl KleinSubring {
    pub fn new(n_max: i64) -> KleinSubring {
        let mut pieces: BTreeMap<(i64, i64), Vec<Poly>> = BTreeMap::new();
        pieces.insert((0, 0), vec![[([0; 6], 1)].into_iter().collect()]);
        for n in 1..=n_max {
            let mut cand: BTreeMap<i64, Vec<Poly>> = BTreeMap::new();
            for g in klein_generators(n) {
                let (_, a) = poly_grading(&g).unwrap();
                cand.entry(a).or_default().push(g);
            }
            for n1 in 1..=n / 2 {
                let n2 = n - n1;
                let left: Vec<(i64, Vec<Poly>)> = pieces.range((n1, i64::MIN)..=(n1, i64::MAX)).map(|(k, v)| (k.1, v.clone())).collect();
                let right: Vec<(i64, Vec<Poly>)> = pieces.range((n2, i64::MIN)..=(n2, i64::MAX)).map(|(k, v)| (k.1, v.clone())).collect();
                for (a1, ps) in &left {
                    for (a2, qs) in &right {
                        for p in ps {
                            for q in qs {
                                let pq = poly_mul(p, q);
                                if !pq.is_empty() {
                                    cand.entry(a1 + a2).or_default().push(pq);
                                }
                            }
                        }
                    }
                }
            }
            for (a, polys) in cand {
                let amb = Ambient::new(n, a);
                // Keep a spanning subset: the pure-y generator (if any) plus F_2-independent rest.
                let pure_gen: Option<Poly> = polys.iter().find(|p| amb.image(p).0.abs() == 1).cloned();
                let mut kept: Vec<Poly> = Vec::new();
                let mut basis: Vec<Vec<u8>> = Vec::new();
                let w0 = pure_gen.as_ref().map(|p| amb.image(p));
                if let Some(p) = &pure_gen {
                    kept.push(p.clone());
                }
                for p in &polys {
                    let (c, w) = amb.image(p);
                    let w = match &w0 {
                        Some((c0, w0)) => w.iter().zip(w0).map(|(x, y)| x ^ (y * ((c * c0).rem_euclid(2)) as u8)).collect(),
                        None => {
                            assert_eq!(c, 0, "pure-y coefficient without a unit generator");
                            w
                        }
                    };
                    let r = f2_reduce(&w, &basis);
                    if r.iter().any(|&x| x == 1) {
                        basis = f2_basis(&[basis.clone(), vec![r]].concat());
                        kept.push(p.clone());
                    }
                }
                if !kept.is_empty() {
                    pieces.insert((n, a), kept);
                }
            }
        }
        KleinSubring { pieces }
    }

    /// The subring piece at level n (grading a - nV) as an abelian group.
    pub fn piece(&self, n: i64, a: i64) -> FgAbelian {
        let Some(polys) = self.pieces.get(&(n, a)) else { return FgAbelian::zero() };
        let amb = Ambient::new(n, a);
        let cols: Vec<Vec<BigInt>> = polys.iter().map(|p| amb.column(p)).collect();
        let g = amb.group();
        let x = Mat::from_columns(&cols, g.ngens());
        SubgroupOf::generated(&g, &x).group.invariants()
    }

    pub fn labels(&self, n: i64, a: i64) -> Vec<String> {
        self.pieces.get(&(n, a)).map_or(vec![], |ps| ps.iter().map(poly_to_string).collect())
    }
}

fn mono_to_string(m: &Mono) -> String {
    let names = ["x_1", "y_1", "x_2", "y_2", "x_3", "y_3"];
    let mut s = String::new();
    for (i, &e) in m.iter().enumerate() {
        match e {
            0 => {}
            1 => s.push_str(names[i]),
            e => s.push_str(&format!("{}^{}", names[i], e)),
        }
    }
    if s.is_empty() {
        "1".into()
    } else {
        s
    }
}

fn poly_to_string(p: &Poly) -> String {
    p.iter().map(|(m, c)| if *c == 1 { mono_to_string(m) } else { format!("{c}{}", mono_to_string(m)) }).collect::<Vec<_>>().join(" + ")
}

/// Subring value at grading a - nV (n ≥ 0).
pub fn klein_positive(a: i64, n: i64) -> (FgAbelian, Vec<MonomialLabel>) {
    if n < 0 || a < 0 || a > 3 * n {
        return (FgAbelian::zero(), vec![]);
    }
    let sub = KleinSubring::new(n);
    let g = sub.piece(n, a);
    let labels = sub
        .labels(n, a)
        .into_iter()
        .map(|s| MonomialLabel { symbol: s, grading: vec![a, -n], group: String::new() })
        .collect();
    (g, labels)
}

/// How the generating set of T is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TReading {
    /// Parameters j_t ≥ 1 and i_t ≥ 0, so every term lies in U.
    Strict,
    /// Parameters j_t ≥ 0; terms falling outside U are dropped.
    Truncated,
    /// Any parameters for which some term lies in U; the other terms are dropped.
    Loose,
}

/// Negative-exponent monomial x^{-i} y^{-j}, stored as (i_1, j_1, i_2, j_2, i_3, j_3).
fn in_u(m: &Mono) -> bool {
    let s = m[0] + m[1];
    m[2] + m[3] == s
        && m[4] + m[5] == s
        && m[1] > 0
        && m[3] > 0
        && m[5] > 0
        && m.iter().all(|&x| x >= 0)
        && (m[0], m[2], m[4]) != (0, 0, 0)
}

/// U together with the i = 0 monomials, which f can reach.
fn in_u_closure(m: &Mono) -> bool {
    in_u(m) || (m[0], m[2], m[4]) == (0, 0, 0) && m[1] > 0 && m[3] > 0 && m[5] > 0
}

fn u_monos(n: i64, a: i64) -> Vec<Mono> {
    level_monos(n, -a).into_iter().filter(in_u).collect()
}

/// Kernel-description value at grading a + nV (n > 0), with a chosen reading of T.
pub fn klein_negative_with(a: i64, n: i64, reading: TReading) -> (FgAbelian, Vec<MonomialLabel>) {
    if n <= 0 {
        return (FgAbelian::zero(), vec![]);
    }
    let mut g = FgAbelian::zero();
    let mut labels = Vec::new();
    if a == -3 * n {
        g = g.direct_sum(&z());
        labels.push(MonomialLabel { symbol: format!("(y_1y_2y_3)^{{-{n}}}"), grading: vec![a, n], group: "Z".into() });
    }
    let src = u_monos(n, a);
    if src.is_empty() {
        return (g, labels);
    }
    let pos: BTreeMap<Mono, usize> = src.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    // T generators at this grading: s = n - 1, Σ j = -a - 1.
    let s = n - 1;
    let jmin = if reading == TReading::Strict { 1 } else { 0 };
    let jmax = if reading == TReading::Loose { n } else { s };
    let mut trows: Vec<Vec<u8>> = Vec::new();
    for j1 in jmin..=jmax {
        for j2 in jmin..=jmax {
            let j3 = -a - 1 - j1 - j2;
            if j3 < jmin || j3 > jmax {
                continue;
            }
            if (j1 - j2).rem_euclid(2) != 0 || (j2 - j3).rem_euclid(2) != 0 {
                continue;
            }
            let (i1, i2, i3) = (s - j1, s - j2, s - j3);
            let terms: [Mono; 3] = [
                [i1, j1 + 1, i2 + 1, j2, i3 + 1, j3],
                [i1 + 1, j1, i2, j2 + 1, i3 + 1, j3],
                [i1 + 1, j1, i2 + 1, j2, i3, j3 + 1],
            ];
            let mut v = vec![0u8; src.len()];
            for t in &terms {
                if in_u(t) {
                    v[pos[t]] ^= 1;
                } else {
                    assert_ne!(reading, TReading::Strict);
                }
            }
            trows.push(v);
        }
    }
    let tb = f2_basis(&trows);
    // f: U(a, n) -> U(a + 2, n - 1), multiplication by x_1y_2y_3 + y_1x_2y_3 + y_1y_2x_3.
    let dst: Vec<Mono> = level_monos(n - 1, -(a + 2)).into_iter().filter(in_u_closure).collect();
    let dpos: BTreeMap<Mono, usize> = dst.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let apply_f = |v: &[u8]| -> Vec<u8> {
        let mut out = vec![0u8; dst.len()];
        for (i, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for r in &REL {
                let mut m = src[i];
                for k in 0..6 {
                    m[k] -= r[k];
                }
                if let Some(&k) = dpos.get(&m) {
                    out[k] ^= 1;
                }
            }
        }
        out
    };
    let images: Vec<Vec<u8>> = tb.iter().map(|b| apply_f(b)).collect();
    let rank = f2_basis(&images).len();
    let dim = tb.len() - rank;
    for _ in 0..dim {
        g = g.direct_sum(&zmod(2));
    }
    if dim > 0 {
        labels.push(MonomialLabel { symbol: format!("ker(f)∩T, dim {dim}"), grading: vec![a, n], group: format!("(Z/2)^{dim}") });
    }
    (g, labels)
}

pub fn klein_negative(a: i64, n: i64) -> (FgAbelian, Vec<MonomialLabel>) {
    klein_negative_with(a, n, TReading::Loose)
}

/// Number of Z/2 summands in the integral homology of S^{nV}/K_4 in degree d (d < 3n),
/// from the dimension formula; degree 3n carries Z.
pub fn klein_homology_count(n: i64, d: i64) -> i64 {
    if d <= n {
        d + 1
    } else if (d - n) % 2 == 0 {
        n + 1 - (d - n) / 2
    } else {
        n - (d - n + 1) / 2
    }
}

/// F_2 dimensions 1, 3, 5, ..., 2n+1, 2n, 2n-1, ..., 1 in degrees 0..=3n.
pub fn klein_f2_dims(n: i64) -> Vec<i64> {
    (0..=3 * n).map(|d| if d <= n { 2 * d + 1 } else { 3 * n + 1 - d }).collect()
}
