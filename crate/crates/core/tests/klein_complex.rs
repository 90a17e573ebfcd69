//! Structure of the orbit complex of S^{nV} over K_4: F_2 cycles, integral homology
//! generators, and cocycles modulo (2, 1+λ).

mod common;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;

use common::{rank_mod, rows};
use hzsplit::cellhom::{klein_orbit_complex, ChainComplex, Ring};

type Cell = (usize, usize, usize, bool);

struct Indexed {
    c: ChainComplex,
    index: Vec<HashMap<Cell, usize>>,
}

fn parse_label(s: &str) -> Cell {
    let lam = s.starts_with('λ');
    let body = s.trim_start_matches('λ').trim_start_matches('(').trim_end_matches(')');
    let v: Vec<usize> = body.split(',').map(|x| x.parse().unwrap()).collect();
    (v[0], v[1], v[2], lam)
}

fn indexed(n: usize) -> Indexed {
    let c = klein_orbit_complex(n, Ring::Z);
    let index = c.labels.iter().map(|ls| ls.iter().enumerate().map(|(i, l)| (parse_label(l), i)).collect()).collect();
    Indexed { c, index }
}

impl Indexed {
    fn degree_vec(&self, d: usize, terms: &[(i64, Cell)]) -> Option<Vec<BigInt>> {
        let mut v = vec![BigInt::from(0); self.c.size(d)];
        for &(coef, cell) in terms {
            let i = *self.index[d].get(&cell)?;
            v[i] += coef;
        }
        Some(v)
    }
    /// (1 + sλ)·cell, which is the bare orbit cell when klm = 0.
    fn lam(&self, s: i64, k: usize, l: usize, m: usize) -> Vec<(i64, Cell)> {
        if k * l * m == 0 {
            vec![(1, (k, l, m, false))]
        } else {
            vec![(1, (k, l, m, false)), (s, (k, l, m, true))]
        }
    }
}

fn mat_times(m: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn f2_rank_of(vs: &[Vec<BigInt>]) -> usize {
    rank_mod(vs, 2)
}

#[test]
fn f2_cycles_are_axis_cells_and_norm_sums() {
    for n in 1..=5usize {
        let ix = indexed(n);
        for d in 0..=3 * n {
            let mut gens = Vec::new();
            for (&(k, l, m, lam), _) in &ix.index[d] {
                if lam {
                    continue;
                }
                gens.push(ix.degree_vec(d, &ix.lam(1, k, l, m)).unwrap());
            }
            let bd = rows(&ix.c.d(d as i64));
            for g in &gens {
                assert!(mat_times(&bd, g).iter().all(|x| x.is_even()), "n={n} d={d}");
            }
            let kernel_dim = ix.c.size(d) - rank_mod(&bd, 2);
            assert_eq!(f2_rank_of(&gens), kernel_dim, "n={n} d={d}");
        }
    }
}

/// The listed integral cycles: each is a cycle, and their F_2 reductions are independent
/// modulo boundaries and as many as the F_2-dimension of the integral classes predicts.
fn listed_generators(ix: &Indexed, n: usize) -> Vec<(usize, Vec<(i64, Cell)>)> {
    let mut out = Vec::new();
    let mut push = |terms: Vec<(i64, Cell)>| {
        let (k, l, m, _) = terms[0].1;
        out.push((k + l + m, terms));
    };
    if n % 2 == 1 {
        let h = (n - 1) / 2;
        for i in 0..=h {
            for j in 0..=h {
                push(ix.lam(-1, 2 * i + 1, 2 * j + 1, n));
                push(vec![(1, (2 * i, 0, 2 * j, false))]);
                push(vec![(1, (0, 2 * i, 2 * j, false))]);
                push(vec![(1, (2 * i + 1, 0, 2 * j, false)), (-1, (2 * i, 0, 2 * j + 1, false))]);
                push(vec![(1, (0, 2 * i + 1, 2 * j, false)), (-1, (0, 2 * i, 2 * j + 1, false))]);
                if i > 0 && j > 0 {
                    let mut t = ix.lam(-1, 2 * i - 1, 2 * j, n);
                    t.extend(ix.lam(-1, 2 * i, 2 * j - 1, n));
                    push(t);
                }
            }
        }
    } else {
        let h = n / 2;
        for i in 0..=h {
            for j in 0..=h {
                push(ix.lam(1, 2 * i, 2 * j, n));
                push(vec![(1, (2 * i, 0, 2 * j, false))]);
                push(vec![(1, (0, 2 * i, 2 * j, false))]);
                if i < h && j < h {
                    let mut t = ix.lam(1, 2 * i + 1, 2 * j, n);
                    t.extend(ix.lam(1, 2 * i, 2 * j + 1, n).into_iter().map(|(c, x)| (-c, x)));
                    push(t);
                    push(vec![(1, (2 * i + 1, 0, 2 * j, false)), (-1, (2 * i, 0, 2 * j + 1, false))]);
                    push(vec![(1, (0, 2 * i + 1, 2 * j, false)), (-1, (0, 2 * i, 2 * j + 1, false))]);
                }
            }
        }
    }
    // Cells listed more than once count once.
    out.sort();
    out.dedup();
    out
}

#[test]
fn listed_integral_generators_span_homology() {
    for n in 1..=5usize {
        let ix = indexed(n);
        let gens = listed_generators(&ix, n);
        let hom = ix.c.homology();
        for d in 0..=3 * n {
            let vs: Vec<Vec<BigInt>> = gens.iter().filter(|(t, _)| *t == d).map(|(_, g)| ix.degree_vec(d, g).unwrap()).collect();
            let bd = rows(&ix.c.d(d as i64));
            for v in &vs {
                assert!(mat_times(&bd, v).iter().all(|x| x == &BigInt::from(0)), "n={n} d={d}: not a cycle");
            }
            // Independence modulo F_2 boundaries.
            let inc = ix.c.d(d as i64 + 1).transpose();
            let im = rows(&inc);
            let mut both = im.clone();
            both.extend(vs.iter().cloned());
            let added = rank_mod(&both, 2) - rank_mod(&im, 2);
            let count = hom[d].rank + hom[d].invariant_factors.len();
            assert_eq!((vs.len(), added), (count, count), "n={n} d={d}");
        }
    }
}

/// F_2 null space of the map with the given rows: a basis of {x : Σ rows·x = 0}.
fn f2_null_space(m: &[Vec<u8>], ncols: usize) -> Vec<Vec<u8>> {
    let mut a: Vec<Vec<u8>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..a.len()).find(|&i| a[i][c] == 1) else { continue };
        a.swap(r, p);
        for i in 0..a.len() {
            if i != r && a[i][c] == 1 {
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x ^= y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u8; ncols];
            v[f] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = a[row][f];
            }
            v
        })
        .collect()
}

fn as_big(v: &[u8]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn in_span(basis: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    rank_mod(&with, 2) == rank_mod(basis, 2)
}

#[test]
fn cocycles_reduce_to_triangle_sums() {
    use hzsplit::abelian::{kernel, AbGroup};
    for n in 1..=4usize {
        let ix = indexed(n);
        for t in 0..3 * n {
            // Triples of degree t and the reduction modulo (2, 1 + λ).
            let mut triples: Vec<(usize, usize, usize)> =
                ix.index[t].keys().filter(|c| !c.3).map(|c| (c.0, c.1, c.2)).collect();
            triples.sort();
            let pos: HashMap<(usize, usize, usize), usize> = triples.iter().enumerate().map(|(i, &x)| (x, i)).collect();
            let reduce = |v: &[BigInt]| -> Vec<BigInt> {
                let mut out = vec![BigInt::from(0); triples.len()];
                for (&(k, l, m, _), &i) in &ix.index[t] {
                    out[pos[&(k, l, m)]] += &v[i];
                }
                out.into_iter().map(|x| x.mod_floor(&BigInt::from(2))).collect()
            };
            // Triangle sums in degree t.
            let get = |k: i64, l: i64, m: i64| -> Option<usize> {
                if [k, l, m].iter().any(|&x| x < 0 || x > n as i64) {
                    return None;
                }
                pos.get(&(k as usize, l as usize, m as usize)).copied()
            };
            let mut span: Vec<Vec<BigInt>> = Vec::new();
            for k in 0..=n as i64 {
                for l in 0..=n as i64 {
                    for m in 0..=n as i64 {
                        let plus = [(2 * k + 1, 2 * l, 2 * m), (2 * k, 2 * l + 1, 2 * m), (2 * k, 2 * l, 2 * m + 1)];
                        let minus = [(2 * k, 2 * l - 1, 2 * m - 1), (2 * k - 1, 2 * l, 2 * m - 1), (2 * k - 1, 2 * l - 1, 2 * m)];
                        for terms in [plus, minus] {
                            let mut v = vec![BigInt::from(0); triples.len()];
                            let mut any = false;
                            for (a, b, c) in terms {
                                if let Some(i) = get(a, b, c) {
                                    v[i] += 1;
                                    any = true;
                                }
                            }
                            if any {
                                span.push(v);
                            }
                        }
                    }
                }
            }
            // Integral cocycles: kernel of the transpose of ∂_{t+1}.
            let delta = ix.c.d(t as i64 + 1).transpose();
            let z = kernel(&AbGroup::free(ix.c.size(t)), &AbGroup::free(ix.c.size(t + 1)), &delta);
            let reduced: Vec<Vec<BigInt>> = (0..z.inclusion.cols()).map(|j| reduce(&z.inclusion.column(j))).collect();
            for r in &reduced {
                assert!(in_span(&span, r), "n={n} t={t}: cocycle reduction outside the triangle span");
            }
            // Every F_2 cocycle in the triangle span lifts.
            let delta_rows = rows(&delta);
            let lift = |x: &[u8]| -> Vec<u8> {
                // δ applied to the unprimed lift, mod 2
                let mut v = vec![BigInt::from(0); ix.c.size(t)];
                for (&(k, l, m, lam), &i) in &ix.index[t] {
                    if !lam {
                        v[i] = BigInt::from(x[pos[&(k, l, m)]]);
                    }
                }
                mat_times(&delta_rows, &v).iter().map(|y| y.mod_floor(&BigInt::from(2)) == BigInt::from(1)).map(u8::from).collect()
            };
            // Coordinates: combinations of span vectors, mapped through δ.
            let span_u8: Vec<Vec<u8>> = span.iter().map(|v| v.iter().map(|x| u8::from(x.is_odd())).collect()).collect();
            let images: Vec<Vec<u8>> = span_u8.iter().map(|v| lift(v)).collect();
            let out_dim = ix.c.size(t + 1);
            let cols: Vec<Vec<u8>> = (0..out_dim).map(|r| images.iter().map(|im| im[r]).collect()).collect();
            for combo in f2_null_space(&cols, span.len()) {
                let mut x = vec![0u8; triples.len()];
                for (c, v) in combo.iter().zip(&span_u8) {
                    if *c == 1 {
                        for (a, b) in x.iter_mut().zip(v) {
                            *a ^= b;
                        }
                    }
                }
                assert!(in_span(&reduced, &as_big(&x)), "n={n} t={t}: F_2 cocycle without integral lift");
            }
        }
    }
}
