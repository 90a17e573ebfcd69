//! p-local splitting: the p-local part of π_V^G is the subgroup of stable elements of the
//! value at a Sylow p-subgroup P, computed from an explicit P-sphere with its N_G(P) action.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::abelian::{kernel, AbGroup, FgAbelian, SubgroupOf};
use crate::cellhom::{CellError, EquivariantSphere, Level, ModelKind};
use crate::group::{PermGroup, Subgroup};
use crate::intmat::Mat;
use crate::primes::prime_factors;
use crate::reps::{det_sign, kind_of, restrict, Kind, RepError, VirtualRep};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("restriction {0} to K_4 is not a multiple of the regular-minus-trivial representation")]
    AsymmetricK4(String),
    #[error("{0} does not divide the group order")]
    PrimeDoesNotDivide(u64),
    #[error("fusion by an element outside N_G(P) between nontrivial subgroups")]
    ForeignFusion,
    #[error("p-local pieces disagree on the free rank: {0:?}")]
    RankMismatch(Vec<(u64, usize)>),
    #[error("stable element fails a fusion constraint")]
    WitnessFailed,
}

/// Restriction of V to a Sylow subgroup, written a + bW with W the model representation.
pub fn sylow_grading(g: &PermGroup, v: &VirtualRep, p_sub: &Subgroup) -> Result<(Kind, i64, i64), SplitError> {
    let r = restrict(g, v, p_sub)?;
    match r.kind {
        Kind::C2 | Kind::Cp(_) => Ok((r.kind, r.coeffs[0], r.coeffs[1])),
        Kind::K4 => r.k4_symmetric().map(|(a, b)| (Kind::K4, a, b)).ok_or_else(|| SplitError::AsymmetricK4(r.to_string())),
        k => Err(CellError::UnsupportedSubgroup(k.name()).into()),
    }
}

/// Model data at one prime: the Sylow sphere, its levels, and the fusion maps.
#[derive(Clone, Debug)]
pub struct SylowPiece {
    pub prime: u64,
    pub rep: VirtualRep,
    pub sylow: Subgroup,
    pub normalizer: Subgroup,
    /// V restricted to P is `a + b W`.
    pub a: i64,
    pub b: i64,
    pub sphere: EquivariantSphere,
    pub degree: i64,
    pub cochains: bool,
    pub levels: BTreeMap<Subgroup, Level>,
}

impl SylowPiece {
    pub fn new(g: &PermGroup, v: &VirtualRep, p: u64) -> Result<SylowPiece, SplitError> {
        if g.order() as u64 % p != 0 {
            return Err(SplitError::PrimeDoesNotDivide(p));
        }
        let lat = g.lattice();
        let sylow = lat.rep(g.sylow(p)).clone();
        Self::at(g, v, p, &sylow)
    }

    /// The piece over a specific Sylow subgroup.
    pub fn at(g: &PermGroup, v: &VirtualRep, p: u64, sylow: &Subgroup) -> Result<SylowPiece, SplitError> {
        let normalizer = g.normalizer(sylow);
        let (_, a, b) = sylow_grading(g, v, sylow)?;
        let cochains = b > 0;
        let degree = if cochains { -a } else { a };
        let sphere = EquivariantSphere::new(g, sylow, &normalizer, b.unsigned_abs() as usize)?;
        let mut levels = BTreeMap::new();
        for h in g.lattice().all_subgroups().filter(|h| h.is_subset_of(sylow)) {
            levels.insert(h.clone(), sphere.level(h, degree, cochains));
        }
        Ok(SylowPiece { prime: p, rep: v.clone(), sylow: sylow.clone(), normalizer, a, b, sphere, degree, cochains, levels })
    }

    pub fn group(&self) -> &PermGroup {
        &self.sphere.group
    }

    pub fn level(&self, h: &Subgroup) -> &Level {
        &self.levels[h]
    }

    pub fn top(&self) -> &Level {
        &self.levels[&self.sylow]
    }

    /// Sign twisting the geometric action of x ∈ N_G(P) on the model.
    pub fn eps(&self, x: usize) -> Result<i64, SplitError> {
        Ok(det_sign(self.group(), &self.rep, x)? * self.sphere.degree_of(x)?)
    }

    /// c_x: M(K) -> M(xKx⁻¹).
    pub fn conj(&self, x: usize, k: &Subgroup) -> Result<Mat, SplitError> {
        let g = self.group();
        let h = g.conjugate_subgroup(x, k);
        let (from, to) = (self.level(k), self.level(&h));
        if self.normalizer.contains(x) {
            return Ok(self.sphere.conj_matrix(x, self.eps(x)?, from, to)?);
        }
        if k.is_trivial() {
            let s = BigInt::from(det_sign(g, &self.rep, x)?);
            let n = from.group().ngens();
            return Ok(Mat::identity(n).scale(&s));
        }
        Err(SplitError::ForeignFusion)
    }

    pub fn res(&self, big: &Subgroup, small: &Subgroup) -> Mat {
        self.sphere.res_matrix(self.level(big), self.level(small))
    }

    pub fn tr(&self, small: &Subgroup, big: &Subgroup) -> Mat {
        self.sphere.tr_matrix(self.level(small), self.level(big))
    }

    /// All fusion constraints res_H − c_x ∘ res_K (xKx⁻¹ = H, K ⊆ P), deduplicated.
    pub fn constraints(&self) -> Result<Vec<(Subgroup, Mat)>, SplitError> {
        let g = self.group();
        let mut out: Vec<(Subgroup, Mat)> = Vec::new();
        for h in self.levels.keys() {
            for x in 0..g.order() {
                let k = g.conjugate_subgroup(g.inv(x), h);
                if !k.is_subset_of(&self.sylow) {
                    continue;
                }
                let lhs = self.res(&self.sylow, h);
                let rhs = self.conj(x, &k)?.mul(&self.res(&self.sylow, &k));
                let d = self.level(h).group().reduce_mat(&lhs.sub(&rhs));
                if d.is_zero() {
                    continue;
                }
                if !out.iter().any(|(hh, m)| hh == h && *m == d) {
                    out.push((h.clone(), d));
                }
            }
        }
        Ok(out)
    }

    /// Stable elements inside M(P).
    pub fn stable(&self) -> Result<SubgroupOf, SplitError> {
        let top = self.top().group().clone();
        let cons = self.constraints()?;
        if top.ngens() == 0 || cons.is_empty() {
            return Ok(SubgroupOf::generated(&top, &Mat::identity(top.ngens())));
        }
        let targets: Vec<&AbGroup> = cons.iter().map(|(h, _)| self.level(h).group()).collect();
        let target = AbGroup::direct_sum(&targets);
        let mut stacked = Mat::zeros(0, top.ngens());
        for (_, m) in &cons {
            stacked = stacked.vstack(m);
        }
        Ok(kernel(&top, &target, &stacked))
    }
}

/// The p-local part of π_V^G.
#[derive(Clone, Debug, Serialize)]
pub struct LocalizedResult {
    pub prime: u64,
    pub value: FgAbelian,
    /// Generators of the stable subgroup as cycle representatives on the cells of the Sylow sphere.
    pub witnesses: Vec<Vec<String>>,
    #[serde(skip)]
    pub stable: SubgroupOf,
}

pub fn localized_homotopy(g: &PermGroup, v: &VirtualRep, p: u64) -> Result<LocalizedResult, SplitError> {
    let piece = SylowPiece::new(g, v, p)?;
    localized_from_piece(&piece)
}

pub fn localized_from_piece(piece: &SylowPiece) -> Result<LocalizedResult, SplitError> {
    let stable = piece.stable()?;
    // Re-check every generator against every constraint.
    let cons = piece.constraints()?;
    for j in 0..stable.inclusion.cols() {
        let x = stable.inclusion.column(j);
        for (h, m) in &cons {
            if !piece.level(h).group().is_zero_elem(&m.mul_vec(&x)) {
                return Err(SplitError::WitnessFailed);
            }
        }
    }
    let top = piece.top();
    let witnesses = (0..stable.inclusion.cols())
        .map(|j| {
            let c = stable.inclusion.column(j);
            let mut full = vec![BigInt::zero(); top.ncells];
            for (i, k) in c.iter().enumerate() {
                for (f, y) in full.iter_mut().zip(top.generator_full(i)) {
                    *f += k * y;
                }
            }
            full.iter().map(|x| x.to_string()).collect()
        })
        .collect();
    Ok(LocalizedResult { prime: piece.prime, value: stable.group.invariants().localize(piece.prime), witnesses, stable })
}

/// Assemble p-local pieces: free ranks must agree; torsion is the union of primary parts.
pub fn glue(pieces: &[LocalizedResult]) -> Result<FgAbelian, SplitError> {
    let ranks: Vec<(u64, usize)> = pieces.iter().map(|p| (p.prime, p.value.rank)).collect();
    if ranks.windows(2).any(|w| w[0].1 != w[1].1) {
        return Err(SplitError::RankMismatch(ranks));
    }
    let mut moduli: Vec<BigInt> = vec![BigInt::zero(); ranks.first().map_or(0, |r| r.1)];
    for p in pieces {
        moduli.extend(p.value.primary(p.prime));
    }
    Ok(FgAbelian::from_moduli(&moduli))
}

#[derive(Clone, Debug, Serialize)]
pub struct Homotopy {
    pub value: FgAbelian,
    pub pieces: Vec<LocalizedResult>,
}

pub fn compute_homotopy(g: &PermGroup, v: &VirtualRep) -> Result<Homotopy, SplitError> {
    if g.order() == 1 {
        let value = if v.dim() == 0 { FgAbelian::free(1) } else { FgAbelian::zero() };
        return Ok(Homotopy { value, pieces: vec![] });
    }
    let pieces = prime_factors(g.order() as u64)
        .into_iter()
        .map(|p| localized_homotopy(g, v, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Homotopy { value: glue(&pieces)?, pieces })
}

/// A_4/K_4-invariants of π^{K_4}_{a+bV}, from the K_4 sphere with its A_4 action
/// (the 3-cycle acts with its degree; det is trivial on A_4).
pub fn klein_weyl_invariants(a: i64, b: i64) -> FgAbelian {
    let sph = EquivariantSphere::with_normalizer(ModelKind::Klein, b.unsigned_abs() as usize);
    let g = &sph.group;
    let k4 = sph.base.clone();
    let cochains = b > 0;
    let degree = if cochains { -a } else { a };
    let lvl = sph.level(&k4, degree, cochains);
    let n = lvl.group().ngens();
    if n == 0 {
        return FgAbelian::zero();
    }
    let c = (0..g.order()).find(|&x| g.element_order(x) == 3).unwrap();
    let eps = sph.degree_of(c).unwrap();
    let m = sph.conj_matrix(c, eps, &lvl, &lvl).unwrap().sub(&Mat::identity(n));
    kernel(lvl.group(), lvl.group(), &m).group.invariants()
}

/// The value at the Sylow subgroup alone (no fusion), for comparisons.
pub fn sylow_value(g: &PermGroup, v: &VirtualRep, p: u64) -> Result<FgAbelian, SplitError> {
    Ok(SylowPiece::new(g, v, p)?.top().value())
}

/// Whether the subgroup is of a kind the models cover.
pub fn model_supported(g: &PermGroup, s: &Subgroup) -> bool {
    matches!(kind_of(g, s), Ok(Kind::C2 | Kind::Cp(_) | Kind::K4 | Kind::Trivial))
}
