//! The verification battery behind `verify`: each case compares a pipeline output with a
//! closed-form ring or an independent oracle.

use serde::Serialize;

use crate::abelian::FgAbelian;
use crate::burnside::marks;
use crate::cellhom::{bockstein_consistency, reflection_scalar};
use crate::families::{all_families, required_inverted_primes, solve_c_h};
use crate::group::make_group;
use crate::mackey::{assemble, ClassDiagram};
use crate::presentations::{graded_piece, klein_f2_dims, Presentation};
use crate::reps::{group_kind, parse_grading, VirtualRep};
use crate::splitter::{compute_homotopy, klein_weyl_invariants, localized_homotopy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Closed-form comparisons and the two Mackey examples.
    Reference,
    /// `Reference` plus complex-level and Burnside-level checks.
    All,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyCase {
    pub id: String,
    pub group: String,
    pub grading: String,
    pub expected: String,
    pub actual: String,
    /// Where the expected value comes from: a closed-form ring or a named oracle.
    pub source: String,
    pub pass: bool,
}

fn case(id: String, group: &str, grading: String, expected: String, actual: String, source: &str) -> VerifyCase {
    let pass = expected == actual;
    VerifyCase { id, group: group.into(), grading, expected, actual, source: source.into(), pass }
}

fn show(r: Result<FgAbelian, impl std::fmt::Display>) -> String {
    match r {
        Ok(g) => g.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

fn homotopy(group: &str, v: &VirtualRep) -> String {
    let g = make_group(group).unwrap();
    show(compute_homotopy(&g, v).map(|h| h.value))
}

fn closed(pres: Presentation, x: &[i64]) -> String {
    show(graded_piece(pres, x).map(|(g, _)| g))
}

fn prime_order(out: &mut Vec<VerifyCase>, r: i64) {
    for (group, pres) in [("C2", Presentation::C2), ("C3", Presentation::Cp(3)), ("C5", Presentation::Cp(5))] {
        let kind = group_kind(&make_group(group).unwrap()).unwrap();
        for a in -r..=r {
            for b in -r..=r {
                let v = VirtualRep::new(kind, vec![a, b]);
                out.push(case(format!("{group}/{a},{b}"), group, v.to_string(), closed(pres, &[a, b]), homotopy(group, &v), "closed-form ring"));
            }
        }
    }
}

fn dihedral(out: &mut Vec<VerifyCase>, r: i64) {
    for p in [3u64, 5] {
        let group = format!("D{}", 2 * p);
        let kind = group_kind(&make_group(&group).unwrap()).unwrap();
        for k in -r..=r {
            for m in -r..=r {
                for n in -r..=r {
                    let v = VirtualRep::new(kind, vec![k, m, n]);
                    let want = closed(Presentation::D2p(p), &[k, m, n]);
                    out.push(case(format!("{group}/{k},{m},{n}"), &group, v.to_string(), want, homotopy(&group, &v), "closed-form ring"));
                }
            }
        }
    }
}

fn klein(out: &mut Vec<VerifyCase>, ra: i64, rb: i64) {
    let kind = group_kind(&make_group("K4").unwrap()).unwrap();
    for a in -ra..=ra {
        for b in -rb..=rb {
            let v = VirtualRep::new(kind, vec![a, b, b, b]);
            let want = if b <= 0 { closed(Presentation::KleinPositive, &[a, b]) } else { closed(Presentation::KleinNegative, &[a, b]) };
            out.push(case(format!("K4/{a},{b}"), "K4", v.to_string(), want, homotopy("K4", &v), "closed-form ring"));
        }
    }
}

/// Fixed A_5 gradings, each compared prime by prime.
pub const ICOSAHEDRAL_SAMPLES: [[i64; 4]; 20] = [
    [0, 1, 0, 0],
    [0, -1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, -1, 0],
    [0, 0, 0, 1],
    [0, 0, 0, -1],
    [1, 1, -1, 0],
    [2, -1, 0, 1],
    [-2, 1, 1, -1],
    [2, 1, -1, 0],
    [-1, 2, 0, -1],
    [1, 0, -2, 1],
    [0, -2, 1, 1],
    [-2, 1, -1, 2],
    [2, -2, 0, -1],
    [1, 0, 2, -2],
    [-1, 2, -2, 0],
    [2, -1, 2, -1],
    [0, 2, 2, -2],
    [-1, -2, -1, 2],
];

fn icosahedral(out: &mut Vec<VerifyCase>) {
    let g = make_group("A5").unwrap();
    let kind = group_kind(&g).unwrap();
    for x in ICOSAHEDRAL_SAMPLES {
        let v = VirtualRep::new(kind, x.to_vec());
        let local = |p: u64| show(localized_homotopy(&g, &v, p).map(|r| r.value));
        let id = |p: u64| format!("A5/{}/{p}", x.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
        out.push(case(id(3), "A5", v.to_string(), closed(Presentation::A5ThreeLocal, &x), local(3), "closed-form 3-local ring"));
        out.push(case(id(5), "A5", v.to_string(), closed(Presentation::A5FiveLocal, &x), local(5), "closed-form 5-local ring"));
        let (n1, n3, n4, n5) = (x[0], x[1], x[2], x[3]);
        let transported = klein_weyl_invariants(n1 + n4 + 2 * n5, n3 + n4 + n5).to_string();
        out.push(case(id(2), "A5", v.to_string(), transported, local(2), "Weyl invariants of the transported K4 grading"));
    }
}

fn diagram(grading: &str) -> Result<ClassDiagram, String> {
    let g = make_group("A5").unwrap();
    let v = parse_grading(group_kind(&g).unwrap(), grading).map_err(|e| e.to_string())?;
    assemble(&g, &v).map(|m| m.class_diagram()).map_err(|e| e.to_string())
}

fn mackey_examples(out: &mut Vec<VerifyCase>) {
    let labels = |d: &ClassDiagram| -> String {
        let find = |n: &str| d.levels.iter().find(|l| l.name == n).unwrap().class;
        let top = find("A_5");
        ["D_6", "A_4", "D_10"]
            .iter()
            .map(|n| {
                let m = d.map(top, find(n)).unwrap();
                format!("{n}: res {} tr {}", m.res[0][0], m.tr[0][0])
            })
            .collect::<Vec<_>>()
            .join("; ")
    };
    let g1 = "-2 + V3 + V4 - V5";
    let actual = diagram(g1).map(|d| labels(&d)).unwrap_or_else(|e| e);
    out.push(case("mackey/free".into(), "A5", g1.into(), "D_6: res 10 tr 1; A_4: res 5 tr 1; D_10: res 2 tr 3".into(), actual, "worked example"));
    let g2 = "3 - V3 - V4";
    let actual = diagram(g2)
        .map(|d| {
            let v = |n: &str| d.levels.iter().find(|l| l.name == n).unwrap().value.clone();
            format!("top {}; K_4 {}", v("A_5"), v("K_4"))
        })
        .unwrap_or_else(|e| e);
    out.push(case("mackey/torsion".into(), "A5", g2.into(), "top Z/30; K_4 Z/2 + Z/2 + Z/2".into(), actual, "worked example"));
}

fn anchors(out: &mut Vec<VerifyCase>) {
    for (group, grading, want) in [("D6", "1+s-g", "Z"), ("A5", "0", "Z"), ("D6", "-s", "Z/2"), ("D10", "-g", "Z/5")] {
        let g = make_group(group).unwrap();
        let v = parse_grading(group_kind(&g).unwrap(), grading).unwrap();
        out.push(case(format!("anchor/{group}/{grading}"), group, grading.into(), want.into(), homotopy(group, &v), "fixed value"));
    }
}

fn complexes(out: &mut Vec<VerifyCase>) {
    for n in 1..=4usize {
        let r = bockstein_consistency(n);
        let dims: Vec<i64> = r.f2_dims.iter().map(|&d| d as i64).collect();
        let want = klein_f2_dims(n as i64);
        out.push(case(format!("klein-f2/{n}"), "K4", format!("{n}V"), format!("{want:?}"), format!("{dims:?}"), "dimension formula"));
        out.push(case(format!("bockstein/{n}"), "K4", format!("{n}V"), "clean".into(), if r.is_clean() { "clean".into() } else { format!("{:?}", r.mismatched_degrees) }, "Bockstein"));
    }
    for p in [3u64, 5] {
        for n in 1..=4usize {
            let mut bad = Vec::new();
            for d in 0..=2 * n as i64 {
                for co in [false, true] {
                    if let Some(c) = reflection_scalar(p, n, d, co) {
                        if c != if d % 4 >= 2 { -1 } else { 1 } {
                            bad.push(d);
                        }
                    }
                }
            }
            out.push(case(format!("reflection/{p}/{n}"), &format!("D{}", 2 * p), format!("{n}g"), "[]".into(), format!("{bad:?}"), "mod-4 rule"));
        }
    }
}

fn burnside_checks(out: &mut Vec<VerifyCase>) {
    for group in ["D6", "D10", "K4", "A4"] {
        let g = make_group(group).unwrap();
        let tom = marks(&g);
        let lat = g.lattice();
        let tri = (0..lat.len()).all(|k| (0..lat.len()).all(|h| (tom.matrix[k][h] != 0) == lat.subconjugacy[k][h]));
        out.push(case(format!("marks/{group}"), group, String::new(), "true".into(), tri.to_string(), "subconjugacy"));
        let mut bad = 0;
        for f in all_families(&g) {
            let req = required_inverted_primes(&f);
            match solve_c_h(&f, &req) {
                Ok((_, used)) if used == req => {}
                _ => bad += 1,
            }
        }
        out.push(case(format!("families/{group}"), group, String::new(), "0".into(), bad.to_string(), "required primes"));
    }
}

pub fn run(suite: Suite) -> Vec<VerifyCase> {
    let mut out = Vec::new();
    anchors(&mut out);
    prime_order(&mut out, 4);
    dihedral(&mut out, 2);
    klein(&mut out, 8, 3);
    icosahedral(&mut out);
    mackey_examples(&mut out);
    if suite == Suite::All {
        complexes(&mut out);
        burnside_checks(&mut out);
    }
    out
}
