//! Real representation catalogs, virtual representations, restriction tables, fixed-point
//! dimensions (from permutation characters), determinant signs and grading strings.

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::group::{PermGroup, Subgroup};
use crate::primes::is_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepError {
    #[error("no restriction data from {0} to {1}")]
    MissingEntry(String, String),
    #[error("subgroup of order {0} is not of a catalog type")]
    UnknownType(usize),
    #[error("cannot parse grading `{0}`: {1}")]
    Parse(String, String),
    #[error("representation belongs to a different catalog")]
    WrongCatalog,
}

/// Isomorphism type of a catalog group or subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Trivial,
    C2,
    /// Cyclic of odd prime order.
    Cp(u64),
    K4,
    /// Dihedral of order 2p, p an odd prime.
    Dihedral(u64),
    A4,
    A5,
}

impl Kind {
    pub fn irrep_names(&self) -> Vec<&'static str> {
        match self {
            Kind::Trivial => vec!["1"],
            Kind::C2 => vec!["1", "s"],
            Kind::Cp(_) => vec!["1", "l"],
            Kind::K4 => vec!["1", "V1", "V2", "V3"],
            Kind::Dihedral(_) => vec!["1", "s", "g"],
            Kind::A4 => vec!["1", "V2", "V3"],
            Kind::A5 => vec!["1", "V3", "V4", "V5"],
        }
    }
    pub fn dims(&self) -> Vec<i64> {
        match self {
            Kind::Trivial => vec![1],
            Kind::C2 => vec![1, 1],
            Kind::Cp(_) => vec![1, 2],
            Kind::K4 => vec![1, 1, 1, 1],
            Kind::Dihedral(_) => vec![1, 1, 2],
            Kind::A4 => vec![1, 2, 3],
            Kind::A5 => vec![1, 3, 4, 5],
        }
    }
    pub fn order(&self) -> usize {
        match self {
            Kind::Trivial => 1,
            Kind::C2 => 2,
            Kind::Cp(p) => *p as usize,
            Kind::K4 => 4,
            Kind::Dihedral(p) => 2 * *p as usize,
            Kind::A4 => 12,
            Kind::A5 => 60,
        }
    }
    pub fn name(&self) -> String {
        match self {
            Kind::Trivial => "e".into(),
            Kind::C2 => "C_2".into(),
            Kind::Cp(p) => format!("C_{p}"),
            Kind::K4 => "K_4".into(),
            Kind::Dihedral(p) => format!("D_{}", 2 * p),
            Kind::A4 => "A_4".into(),
            Kind::A5 => "A_5".into(),
        }
    }
    fn n(&self) -> usize {
        self.irrep_names().len()
    }
}

/// Dimensions of the underlying irreducible representations of A_5. The two
/// three-dimensional ones share one symbol `V3` in gradings.
pub const A5_IRREDUCIBLE_DIMS: [i64; 5] = [1, 3, 3, 4, 5];

/// Isomorphism type of a subgroup, recognized from order and element orders.
pub fn kind_of(g: &PermGroup, s: &Subgroup) -> Result<Kind, RepError> {
    let n = s.order();
    let max_ord = s.elements().iter().map(|&x| g.element_order(x)).max().unwrap_or(1);
    let abelian = s.elements().iter().all(|&a| s.elements().iter().all(|&b| g.mul(a, b) == g.mul(b, a)));
    let k = match n {
        1 => Kind::Trivial,
        2 => Kind::C2,
        4 if max_ord == 2 => Kind::K4,
        12 if !abelian && max_ord == 3 => Kind::A4,
        60 if !abelian && max_ord == 5 => Kind::A5,
        n if is_prime(n as u64) => Kind::Cp(n as u64),
        n if n % 2 == 0 && is_prime(n as u64 / 2) && !abelian => Kind::Dihedral(n as u64 / 2),
        _ => return Err(RepError::UnknownType(n)),
    };
    Ok(k)
}

pub fn group_kind(g: &PermGroup) -> Result<Kind, RepError> {
    kind_of(g, &g.whole())
}

/// Display name of a subgroup class, disambiguated when several classes share a type.
pub fn class_name(g: &PermGroup, i: usize) -> String {
    let lat = g.lattice();
    let base = |c: usize| kind_of(g, lat.rep(c)).map(|k| k.name()).unwrap_or_else(|_| format!("H{}", lat.rep(c).order()));
    let name = base(i);
    let same: Vec<usize> = (0..lat.len()).filter(|&c| base(c) == name).collect();
    if same.len() > 1 {
        let pos = same.iter().position(|&c| c == i).unwrap() + 1;
        format!("{name}#{pos}")
    } else {
        name
    }
}

/// Integer combination of the irreducibles of a catalog.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VirtualRep {
    pub kind: Kind,
    pub coeffs: Vec<i64>,
}

impl VirtualRep {
    pub fn new(kind: Kind, coeffs: Vec<i64>) -> Self {
        assert_eq!(coeffs.len(), kind.n());
        VirtualRep { kind, coeffs }
    }
    pub fn zero(kind: Kind) -> Self {
        VirtualRep { kind, coeffs: vec![0; kind.n()] }
    }
    pub fn trivial(kind: Kind, n: i64) -> Self {
        let mut v = Self::zero(kind);
        v.coeffs[0] = n;
        v
    }
    pub fn irrep(kind: Kind, i: usize) -> Self {
        let mut v = Self::zero(kind);
        v.coeffs[i] = 1;
        v
    }
    pub fn dim(&self) -> i64 {
        self.coeffs.iter().zip(self.kind.dims()).map(|(c, d)| c * d).sum()
    }
    pub fn add(&self, o: &VirtualRep) -> VirtualRep {
        assert_eq!(self.kind, o.kind);
        VirtualRep { kind: self.kind, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }
    pub fn scale(&self, c: i64) -> VirtualRep {
        VirtualRep { kind: self.kind, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }
    /// For K_4: `(a, b)` if the grading is `a + b V` with V the sum of the three signs.
    pub fn k4_symmetric(&self) -> Option<(i64, i64)> {
        if self.kind != Kind::K4 {
            return None;
        }
        let c = &self.coeffs;
        (c[1] == c[2] && c[2] == c[3]).then_some((c[0], c[1]))
    }
}

impl fmt::Display for VirtualRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.kind.irrep_names();
        let mut out = String::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let body = if i == 0 {
                c.abs().to_string()
            } else if c.abs() == 1 {
                names[i].to_string()
            } else {
                format!("{}{}", c.abs(), names[i])
            };
            if out.is_empty() {
                if c < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(if c < 0 { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out}")
    }
}

fn rep(kind: Kind, c: &[i64]) -> VirtualRep {
    VirtualRep::new(kind, c.to_vec())
}

/// The order-2 subgroups of a Klein four group in canonical (sorted) order.
pub fn k4_involution_subgroups(g: &PermGroup, k4: &Subgroup) -> Vec<Subgroup> {
    let mut v: Vec<Subgroup> =
        k4.elements().iter().filter(|&&x| x != 0).map(|&x| g.generate(&[x])).collect();
    v.sort();
    v
}

/// Image of each irreducible of `from` in the catalog of `to`. `factor` selects which
/// order-2 subgroup when restricting K_4 to C_2.
fn table(from: Kind, to: Kind, factor: usize) -> Option<Vec<VirtualRep>> {
    use Kind::*;
    if to == Trivial {
        return Some(from.dims().iter().map(|&d| rep(Trivial, &[d])).collect());
    }
    if from == to {
        return Some((0..from.n()).map(|i| VirtualRep::irrep(from, i)).collect());
    }
    let t = match (from, to) {
        (A5, A4) => vec![rep(A4, &[1, 0, 0]), rep(A4, &[0, 0, 1]), rep(A4, &[1, 0, 1]), rep(A4, &[0, 1, 1])],
        (A5, Dihedral(3)) => {
            let d = Dihedral(3);
            vec![rep(d, &[1, 0, 0]), rep(d, &[0, 1, 1]), rep(d, &[1, 1, 1]), rep(d, &[1, 0, 2])]
        }
        (A5, Dihedral(5)) => {
            let d = Dihedral(5);
            vec![rep(d, &[1, 0, 0]), rep(d, &[0, 1, 1]), rep(d, &[0, 0, 2]), rep(d, &[1, 0, 2])]
        }
        (A5, K4) => vec![rep(K4, &[1, 0, 0, 0]), rep(K4, &[0, 1, 1, 1]), rep(K4, &[1, 1, 1, 1]), rep(K4, &[2, 1, 1, 1])],
        (A5, Cp(3)) => {
            let c = Cp(3);
            vec![rep(c, &[1, 0]), rep(c, &[1, 1]), rep(c, &[2, 1]), rep(c, &[1, 2])]
        }
        (A5, Cp(5)) => {
            let c = Cp(5);
            vec![rep(c, &[1, 0]), rep(c, &[1, 1]), rep(c, &[0, 2]), rep(c, &[1, 2])]
        }
        (A5, C2) => vec![rep(C2, &[1, 0]), rep(C2, &[1, 2]), rep(C2, &[2, 2]), rep(C2, &[3, 2])],
        (A4, K4) => vec![rep(K4, &[1, 0, 0, 0]), rep(K4, &[2, 0, 0, 0]), rep(K4, &[0, 1, 1, 1])],
        (A4, Cp(3)) => {
            let c = Cp(3);
            vec![rep(c, &[1, 0]), rep(c, &[0, 1]), rep(c, &[1, 1])]
        }
        (A4, C2) => vec![rep(C2, &[1, 0]), rep(C2, &[2, 0]), rep(C2, &[1, 2])],
        (Dihedral(_), C2) => vec![rep(C2, &[1, 0]), rep(C2, &[0, 1]), rep(C2, &[1, 1])],
        (Dihedral(p), Cp(q)) if p == q => vec![rep(Cp(p), &[1, 0]), rep(Cp(p), &[1, 0]), rep(Cp(p), &[0, 1])],
        (K4, C2) => {
            let mut v = vec![rep(C2, &[1, 0])];
            for j in 0..3 {
                v.push(if j == factor { rep(C2, &[1, 0]) } else { rep(C2, &[0, 1]) });
            }
            v
        }
        _ => return None,
    };
    Some(t)
}

fn apply_table(v: &VirtualRep, t: &[VirtualRep], to: Kind) -> VirtualRep {
    let mut out = VirtualRep::zero(to);
    for (c, img) in v.coeffs.iter().zip(t) {
        out = out.add(&img.scale(*c));
    }
    out
}

/// Restriction of `v` (a representation of `g`, whose kind must match `v.kind`) to the
/// subgroup `h` of `g`.
pub fn restrict(g: &PermGroup, v: &VirtualRep, h: &Subgroup) -> Result<VirtualRep, RepError> {
    if group_kind(g)? != v.kind {
        return Err(RepError::WrongCatalog);
    }
    let to = kind_of(g, h)?;
    let factor = if v.kind == Kind::K4 && to == Kind::C2 {
        k4_involution_subgroups(g, &g.whole()).iter().position(|s| s == h).unwrap()
    } else {
        0
    };
    let t = table(v.kind, to, factor).ok_or_else(|| RepError::MissingEntry(v.kind.name(), to.name()))?;
    Ok(apply_table(v, &t, to))
}

/// Restriction between catalog kinds without a realized group (K_4 → C_2 uses the first factor).
pub fn restrict_kind(v: &VirtualRep, to: Kind) -> Result<VirtualRep, RepError> {
    let t = table(v.kind, to, 0).ok_or_else(|| RepError::MissingEntry(v.kind.name(), to.name()))?;
    Ok(apply_table(v, &t, to))
}

fn class_with_order(g: &PermGroup, n: usize) -> Subgroup {
    g.lattice().classes.iter().find(|c| c.order() == n).expect("intrinsic subgroup").representative.clone()
}

fn orbit_count(g: &PermGroup, k: &Subgroup, s: &Subgroup) -> Ratio<i64> {
    Ratio::from_integer(g.double_coset_orbits(k, s).len() as i64)
}

/// Fixed-point dimension of each irreducible at `k`, from permutation characters
/// on coset spaces of intrinsically defined subgroups.
pub fn irrep_fixed_dims(g: &PermGroup, k: &Subgroup) -> Result<Vec<i64>, RepError> {
    let kind = group_kind(g)?;
    let one = Ratio::from_integer(1);
    let perm = |s: &Subgroup| orbit_count(g, k, s);
    let e = g.trivial();
    let vals: Vec<Ratio<i64>> = match kind {
        Kind::Trivial => vec![one],
        Kind::C2 => vec![one, perm(&e) - one],
        Kind::Cp(p) => vec![one, (perm(&e) - one) * Ratio::new(2, p as i64 - 1)],
        Kind::K4 => {
            let hs = k4_involution_subgroups(g, &g.whole());
            let mut v = vec![one];
            v.extend(hs.iter().map(|h| perm(h) - one));
            v
        }
        Kind::Dihedral(p) => {
            let cp = class_with_order(g, p as usize);
            let c2 = class_with_order(g, 2);
            vec![one, perm(&cp) - one, (perm(&c2) - one) * Ratio::new(2, p as i64 - 1)]
        }
        Kind::A4 => vec![one, perm(&class_with_order(g, 4)) - one, perm(&class_with_order(g, 3)) - one],
        Kind::A5 => {
            let a4 = class_with_order(g, 12);
            let d10 = class_with_order(g, 10);
            let c5 = class_with_order(g, 5);
            vec![one, (perm(&c5) - perm(&d10)) / Ratio::from_integer(2), perm(&a4) - one, perm(&d10) - one]
        }
    };
    vals.into_iter()
        .map(|r| {
            assert!(r.is_integer(), "non-integral fixed dimension");
            Ok(r.to_integer())
        })
        .collect()
}

pub fn fixed_dim(g: &PermGroup, v: &VirtualRep, k: &Subgroup) -> Result<i64, RepError> {
    if group_kind(g)? != v.kind {
        return Err(RepError::WrongCatalog);
    }
    Ok(irrep_fixed_dims(g, k)?.iter().zip(&v.coeffs).map(|(d, c)| d * c).sum())
}

/// Sign of det(x | v) for an element x of g.
pub fn det_sign(g: &PermGroup, v: &VirtualRep, x: usize) -> Result<i64, RepError> {
    let kind = group_kind(g)?;
    if kind != v.kind {
        return Err(RepError::WrongCatalog);
    }
    let signs: Vec<i64> = match kind {
        Kind::Trivial | Kind::Cp(_) | Kind::A4 | Kind::A5 => vec![1; kind.n()],
        Kind::C2 => vec![1, if x == 0 { 1 } else { -1 }],
        Kind::K4 => {
            let hs = k4_involution_subgroups(g, &g.whole());
            let mut s = vec![1];
            s.extend(hs.iter().map(|h| if h.contains(x) { 1 } else { -1 }));
            s
        }
        Kind::Dihedral(_) => {
            let refl = g.element_order(x) == 2;
            let s = if refl { -1 } else { 1 };
            vec![1, s, s]
        }
    };
    Ok(signs.iter().zip(&v.coeffs).map(|(s, c)| if c % 2 != 0 { *s } else { 1 }).product())
}

/// Gradings of D_2p transported to the two prime-order subgroups: `(k+n) + (m+n)σ` on the
/// C_2 side; `(k+m) + nλ` on the C_p side, together with whether the C_p part vanishes
/// because of the reflection action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum D2pSide {
    C2,
    Cp,
}

pub fn d2p_grade_transport(k: i64, m: i64, n: i64, side: D2pSide) -> ((i64, i64), bool) {
    match side {
        D2pSide::C2 => ((k + n, m + n), false),
        D2pSide::Cp => ((k + m, n), ((k + m).abs() / 2 + m).rem_euclid(2) == 1),
    }
}

fn symbol_table(kind: Kind) -> Vec<(&'static str, Vec<i64>)> {
    let unit = |i: usize| {
        let mut v = vec![0; kind.n()];
        v[i] = 1;
        v
    };
    match kind {
        Kind::Trivial => vec![],
        Kind::C2 => vec![("s", unit(1)), ("sigma", unit(1)), ("σ", unit(1))],
        Kind::Cp(_) => vec![("l", unit(1)), ("lambda", unit(1)), ("λ", unit(1))],
        Kind::K4 => vec![("V", vec![0, 1, 1, 1]), ("V1", unit(1)), ("V2", unit(2)), ("V3", unit(3))],
        Kind::Dihedral(_) => vec![
            ("s", unit(1)),
            ("sigma", unit(1)),
            ("σ", unit(1)),
            ("g", unit(2)),
            ("gamma", unit(2)),
            ("γ", unit(2)),
        ],
        Kind::A4 => vec![("V2", unit(1)), ("V3", unit(2))],
        Kind::A5 => vec![("V3", unit(1)), ("V4", unit(2)), ("V5", unit(3))],
    }
}

/// Parse a grading such as `"k + m*s + n*g"` (D_2p), `"a + b*V3 + c*V4 + d*V5"` (A_5),
/// `"a + b*V"` (K_4), `"a + b*V2 + c*V3"` (A_4), `"a + b*s"` (C_2), `"a + b*l"` (C_p).
/// Whitespace is ignored; `*` is optional between a multiplier and a symbol.
pub fn parse_grading(kind: Kind, text: &str) -> Result<VirtualRep, RepError> {
    let err = |m: &str| RepError::Parse(text.to_string(), m.to_string());
    let s: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty grading"));
    }
    let table = symbol_table(kind);
    let mut out = VirtualRep::zero(kind);
    let mut i = 0;
    while i < s.len() {
        let mut sign = 1i64;
        let mut saw_sign = false;
        while i < s.len() && (s[i] == '+' || s[i] == '-' || s[i] == '−') {
            if s[i] != '+' {
                sign = -sign;
            }
            saw_sign = true;
            i += 1;
        }
        if i > 0 && !saw_sign {
            return Err(err("expected + or -"));
        }
        let start = i;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        let num: Option<i64> = if i > start {
            Some(s[start..i].iter().collect::<String>().parse().map_err(|_| err("bad integer"))?)
        } else {
            None
        };
        let mut starred = false;
        if i < s.len() && s[i] == '*' {
            if num.is_none() {
                return Err(err("`*` without multiplier"));
            }
            starred = true;
            i += 1;
        }
        let nstart = i;
        while i < s.len() && !(s[i] == '+' || s[i] == '-' || s[i] == '−') {
            i += 1;
        }
        let name: String = s[nstart..i].iter().collect();
        let c = sign * num.unwrap_or(1);
        if name.is_empty() {
            if num.is_none() || starred {
                return Err(err("empty term"));
            }
            out.coeffs[0] += c;
        } else {
            let (_, v) = table
                .iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| err(&format!("unknown symbol `{name}` for {}", kind.name())))?;
            for (o, x) in out.coeffs.iter_mut().zip(v) {
                *o += c * x;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::make_group;

    #[test]
    fn parse_examples() {
        let v = parse_grading(Kind::Dihedral(3), "1 + s - g").unwrap();
        assert_eq!(v.coeffs, vec![1, 1, -1]);
        let w = parse_grading(Kind::A5, "V3+V4-V5-2").unwrap();
        assert_eq!(w.coeffs, vec![-2, 1, 1, -1]);
        assert_eq!(parse_grading(Kind::K4, " 3 - V").unwrap().k4_symmetric(), Some((3, -1)));
        assert_eq!(parse_grading(Kind::A5, "-2*V5").unwrap().coeffs, vec![0, 0, 0, -2]);
        assert!(parse_grading(Kind::A5, "2*").is_err());
        assert!(parse_grading(Kind::A5, "V7").is_err());
        assert_eq!(w.to_string(), "-2 + V3 + V4 - V5");
    }

    #[test]
    fn restriction_examples() {
        let a5 = make_group("A5").unwrap();
        let lat = a5.lattice();
        let d10 = lat.classes.iter().find(|c| c.order() == 10).unwrap().representative.clone();
        let v4 = VirtualRep::irrep(Kind::A5, 2);
        assert_eq!(restrict(&a5, &v4, &d10).unwrap().coeffs, vec![0, 0, 2]);
        let k4 = lat.rep(a5.sylow(2)).clone();
        let v5 = VirtualRep::irrep(Kind::A5, 3);
        assert_eq!(restrict(&a5, &v5, &k4).unwrap().coeffs, vec![2, 1, 1, 1]);
    }

    #[test]
    fn fixed_dims() {
        let k4 = make_group("K4").unwrap();
        let h1 = k4.lattice().rep(1).clone();
        let v = parse_grading(Kind::K4, "V").unwrap();
        assert_eq!(fixed_dim(&k4, &v, &h1).unwrap(), 1);
        let a5 = make_group("A5").unwrap();
        assert_eq!(irrep_fixed_dims(&a5, &a5.trivial()).unwrap(), vec![1, 3, 4, 5]);
        assert_eq!(irrep_fixed_dims(&a5, &a5.whole()).unwrap(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn transport() {
        assert_eq!(d2p_grade_transport(1, 1, -1, D2pSide::C2).0, (0, 0));
        assert_eq!(d2p_grade_transport(0, 0, 4, D2pSide::Cp), ((0, 4), false));
        assert!(d2p_grade_transport(0, 1, 0, D2pSide::Cp).1);
    }
}
