use std::io::Write;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hzsplit::burnside::{marks, rational_to_string};
use hzsplit::cellhom::{sphere_complex, ModelKind, Ring};
use hzsplit::families::{all_families, family_not_containing, required_inverted_primes, solve_c_h, Family};
use hzsplit::group::{make_group, PermGroup};
use hzsplit::mackey::assemble;
use hzsplit::presentations::{graded_piece, presentations_for, Presentation};
use hzsplit::reps::{class_name, group_kind, parse_grading, VirtualRep};
use hzsplit::splitter::{compute_homotopy, localized_homotopy};
use hzsplit::suite::{self, Suite};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "hzsplit", about = "RO(G)-graded homotopy of HZ for small finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// π_V^G(HZ), or its p-local part with --prime.
    Compute {
        #[arg(long)]
        group: String,
        #[arg(long, allow_hyphen_values = true)]
        grading: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// The Mackey functor H ↦ π_V^H(HZ) over subgroup classes.
    Mackey {
        #[arg(long)]
        group: String,
        #[arg(long, allow_hyphen_values = true)]
        grading: String,
        #[arg(long)]
        json: bool,
    },
    /// Orbit-cell (co)homology of a catalog sphere S^{nV}/G.
    Cellhom {
        /// C2, Cp (p = 3, 5, ...) or K4.
        #[arg(long)]
        catalog: String,
        #[arg(long)]
        n: usize,
        /// Z or Fp for a prime p.
        #[arg(long, default_value = "Z")]
        coeff: String,
        /// Dump the boundary matrices.
        #[arg(long)]
        emit_complex: bool,
        #[arg(long)]
        json: bool,
    },
    /// Families of subgroups with their required primes and coefficients c_H.
    Families {
        #[arg(long)]
        group: String,
        /// Only the families "no conjugate of K", one per class K.
        #[arg(long)]
        complements: bool,
        #[arg(long)]
        json: bool,
    },
    /// Table of marks.
    Marks {
        #[arg(long)]
        group: String,
        #[arg(long)]
        json: bool,
    },
    /// Run the verification battery.
    Verify {
        #[arg(long, value_enum, default_value = "paper")]
        suite: SuiteArg,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    /// Closed-form rings and the worked Mackey examples.
    Paper,
    /// Adds complex-level and Burnside-level checks.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(group: &str, grading: &str) -> Result<(PermGroup, VirtualRep)> {
    let g = make_group(group).map_err(|e| anyhow!("{e}"))?;
    let kind = group_kind(&g).map_err(|e| anyhow!("{e}"))?;
    let v = parse_grading(kind, grading).map_err(|e| anyhow!("{e}"))?;
    Ok((g, v))
}

/// Write to stdout, ignoring a closed pipe.
fn out(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn emit(json: bool, kind: &str, body: Value, text: String) {
    if json {
        let mut obj = json!({ "schema": kind, "version": SCHEMA_VERSION });
        if let (Some(o), Value::Object(b)) = (obj.as_object_mut(), body) {
            o.extend(b);
        }
        out(&format!("{}\n", serde_json::to_string_pretty(&obj).unwrap()));
    } else {
        out(&text);
    }
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Compute { group, grading, prime, json } => compute(&group, &grading, prime, json),
        Command::Mackey { group, grading, json } => {
            let (g, v) = load(&group, &grading)?;
            let m = assemble(&g, &v).map_err(|e| anyhow!("{e}"))?;
            let d = m.class_diagram();
            let body = json!({ "grading": v.to_string(), "diagram": d });
            emit(json, "mackey", body, d.render());
            Ok(true)
        }
        Command::Cellhom { catalog, n, coeff, emit_complex, json } => cellhom(&catalog, n, &coeff, emit_complex, json),
        Command::Families { group, complements, json } => families(&group, complements, json),
        Command::Marks { group, json } => {
            let g = make_group(&group).map_err(|e| anyhow!("{e}"))?;
            let t = marks(&g);
            let names: Vec<String> = (0..t.matrix.len()).map(|i| class_name(&g, i)).collect();
            let w = t.matrix.iter().flatten().map(|x| x.to_string().len()).chain(names.iter().map(|n| n.len())).max().unwrap_or(1);
            let mut text = format!("{:>w$} ", "");
            for n in &names {
                text.push_str(&format!(" {n:>w$}"));
            }
            text.push('\n');
            for (n, row) in names.iter().zip(&t.matrix) {
                text.push_str(&format!("{n:>w$} "));
                for x in row {
                    text.push_str(&format!(" {x:>w$}"));
                }
                text.push('\n');
            }
            emit(json, "marks", json!({ "group": g.name(), "classes": names, "marks": t.matrix, "lattice": g.lattice_json() }), text);
            Ok(true)
        }
        Command::Verify { suite, json } => {
            let s = match suite {
                SuiteArg::Paper => Suite::Reference,
                SuiteArg::All => Suite::All,
            };
            let cases = suite::run(s);
            let failed: Vec<_> = cases.iter().filter(|c| !c.pass).collect();
            let mut text = String::new();
            for c in &failed {
                text.push_str(&format!("FAIL {}  ({})\n  - expected {}\n  + actual   {}\n", c.id, c.source, c.expected, c.actual));
            }
            text.push_str(&format!("{} cases, {} passed, {} failed\n", cases.len(), cases.len() - failed.len(), failed.len()));
            let body = json!({ "cases": cases, "passed": cases.len() - failed.len(), "failed": failed.len() });
            emit(json, "verify", body, text);
            Ok(failed.is_empty())
        }
    }
}

fn compute(group: &str, grading: &str, prime: Option<u64>, json: bool) -> Result<bool> {
    let (g, v) = load(group, grading)?;
    let (value, pieces) = match prime {
        Some(p) => {
            if g.order() as u64 % p != 0 {
                bail!("{p} does not divide |G| = {}", g.order());
            }
            let r = localized_homotopy(&g, &v, p).map_err(|e| anyhow!("{e}"))?;
            (r.value.clone(), vec![r])
        }
        None => {
            let h = compute_homotopy(&g, &v).map_err(|e| anyhow!("{e}"))?;
            (h.value, h.pieces)
        }
    };
    // Generator names from the closed-form ring that describes this grading, when it agrees.
    let mut generators = Vec::new();
    for (pres, x) in presentations_for(&v) {
        let local = match pres {
            Presentation::A5ThreeLocal => Some(3),
            Presentation::A5FiveLocal => Some(5),
            _ => None,
        };
        if local.is_some() && local != prime {
            continue;
        }
        if let Ok((piece, labels)) = graded_piece(pres, &x) {
            let target = match prime {
                Some(p) => value.localize(p),
                None => value.clone(),
            };
            let piece = match prime {
                Some(p) => piece.localize(p),
                None => piece,
            };
            if piece == target && !piece.is_zero() {
                generators.extend(labels.into_iter().map(|l| l.symbol));
            }
        }
    }
    let mut text = value.to_string();
    if !generators.is_empty() {
        let word = if generators.len() == 1 { "generator" } else { "generators" };
        text.push_str(&format!(", {word} {}", generators.join(", ")));
    }
    text.push('\n');
    let body = json!({
        "group": g.name(),
        "grading": v.to_string(),
        "prime": prime,
        "value": value,
        "generators": generators,
        "pieces": pieces,
    });
    emit(json, "compute", body, text);
    Ok(true)
}

fn parse_ring(s: &str) -> Result<Ring> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("z") {
        return Ok(Ring::Z);
    }
    let p: u64 = t
        .strip_prefix(['F', 'f'])
        .and_then(|r| r.parse().ok())
        .with_context(|| format!("coefficient `{s}` is neither Z nor Fp"))?;
    if !hzsplit::primes::is_prime(p) {
        bail!("{p} is not prime");
    }
    Ok(Ring::Fp(p))
}

fn cellhom(catalog: &str, n: usize, coeff: &str, emit_complex: bool, json: bool) -> Result<bool> {
    let kind = ModelKind::parse(catalog).with_context(|| format!("unknown catalog sphere `{catalog}`"))?;
    let ring = parse_ring(coeff)?;
    let c = sphere_complex(kind, n, ring);
    let groups: Vec<String> = match ring {
        Ring::Z => c.homology().iter().map(|g| g.to_string()).collect(),
        Ring::Fp(p) => c.dims_mod(p).iter().map(|d| if *d == 0 { "0".into() } else { format!("(F{p})^{d}") }).collect(),
    };
    let mut text = String::new();
    for (d, g) in groups.iter().enumerate() {
        text.push_str(&format!("H_{d:<3} {g}\n"));
    }
    let mut body = json!({ "catalog": catalog, "n": n, "coeff": coeff, "homology": groups });
    if emit_complex {
        let mats: Vec<Value> = (1..=c.top())
            .map(|d| {
                let m = c.d(d as i64);
                json!({
                    "degree": d,
                    "rows": m.rows(),
                    "cols": m.cols(),
                    "entries": (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                })
            })
            .collect();
        body["boundary"] = Value::Array(mats);
        body["labels"] = json!(c.labels);
        if !json {
            out(&format!("{}\n", serde_json::to_string_pretty(&body["boundary"]).unwrap()));
        }
    }
    emit(json, "cellhom", body, text);
    Ok(true)
}

fn families(group: &str, complements: bool, json: bool) -> Result<bool> {
    let g = make_group(group).map_err(|e| anyhow!("{e}"))?;
    let lat = g.lattice();
    let fams: Vec<Family> = if complements {
        (0..lat.len()).map(|c| family_not_containing(&g, lat.rep(c))).collect()
    } else {
        all_families(&g)
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for f in &fams {
        let names: Vec<String> = f.member_classes().iter().map(|&c| class_name(&g, c)).collect();
        let req = required_inverted_primes(f);
        let (coeffs, needed, err) = match solve_c_h(f, &req) {
            Ok((c, used)) => (c, Some(used), None),
            Err(e) => {
                ok = false;
                (vec![], None, Some(e.to_string()))
            }
        };
        let cs: Vec<(String, String)> = coeffs.iter().map(|(k, q)| (class_name(&g, *k), rational_to_string(q))).collect();
        text.push_str(&format!("{{{}}}  S = {:?}", names.join(", "), req));
        match &err {
            Some(e) => text.push_str(&format!("  error: {e}\n")),
            None => {
                let body: Vec<String> = cs.iter().map(|(k, q)| format!("c_{k} = {q}")).collect();
                text.push_str(&format!("  {}\n", body.join(", ")));
            }
        }
        rows.push(json!({
            "members": names,
            "required_primes": req,
            "used_primes": needed,
            "coefficients": cs.iter().map(|(k, q)| json!({ "class": k, "value": q })).collect::<Vec<_>>(),
            "error": err,
        }));
    }
    emit(json, "families", json!({ "group": g.name(), "families": rows }), text);
    Ok(ok)
}
