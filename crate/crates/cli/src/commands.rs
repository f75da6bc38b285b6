use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cfk_core::constraints::{
    compile_deformation_constraints, grid_search, linear_eliminate, search_equivalence, AnsatzSpec, Assignment,
    ConstraintSystem, Grid,
};
use cfk_core::deform::{check_deformation_map, check_equivalence, deformed_algebra, graph_embedding_check, ModuleMap};
use cfk_core::structure::{derived_series, is_abelian};
use cfk_core::{Error, Rational};
use cfk_dsl::{parse_full, serialize_algebra, Decl, Document, MatchedDecl, Severity};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::report::{render_table, InputInfo, Report};

/// A parsed input file.
pub struct Loaded {
    pub doc: Document,
    pub input: InputInfo,
    pub params: BTreeMap<String, String>,
    /// Rendered warnings, for stderr.
    pub warnings: Vec<String>,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path, params: &BTreeMap<String, Rational>) -> Result<Loaded, CliError> {
    let src = read(path)?;
    load_str(&src, &file_label(path), params)
}

pub fn load_str(src: &str, label: &str, params: &BTreeMap<String, Rational>) -> Result<Loaded, CliError> {
    let (doc, diags) = parse_full(src, params);
    let rendered = |sev: Severity| -> Vec<String> {
        diags
            .iter()
            .filter(|d| d.severity == sev)
            .map(|d| format!("{label}: {}", d.render(src)))
            .collect()
    };
    let Some(doc) = doc else {
        return Err(CliError::Parse(rendered(Severity::Error).join("\n")));
    };
    // echo the effective parameters, file defaults included
    let params = doc.params().map(|(n, v)| (n.to_string(), v.to_string())).chain(
        params.iter().map(|(n, v)| (n.clone(), v.to_string())),
    );
    Ok(Loaded {
        input: InputInfo {
            file: label.to_string(),
            sha256: digest(src.as_bytes()),
        },
        params: params.collect(),
        warnings: rendered(Severity::Warning),
        doc,
    })
}

fn start(command: &str, loaded: &Loaded) -> Report {
    let mut r = Report::new(command);
    r.input = Some(loaded.input.clone());
    r.params = loaded.params.clone();
    r
}

fn missing(kind: &str, name: &str) -> CliError {
    CliError::Input(format!("no {kind} named `{name}`"))
}

fn pair<'a>(doc: &'a Document, name: &str) -> Result<&'a MatchedDecl, CliError> {
    doc.pair(name).ok_or_else(|| missing("matched pair", name))
}

fn rows(m: &ModuleMap<Rational>) -> Value {
    json!(m.rendered())
}

fn check_algebra(r: &mut Report, name: &str, a: &cfk_core::Algebra) {
    r.check(name, "axioms", &a.check_axioms());
}

fn check_pair(r: &mut Report, m: &MatchedDecl) {
    let mp = &m.pair;
    let full = mp.check_matched_pair();
    r.check(&m.name, "matched pair", &full);
    // the literal compatibility conditions must agree with the bicrossed check
    if let Ok(direct) = mp.check_b1_b2_direct() {
        r.check(&m.name, "b1/b2 direct", &direct);
        let agree = direct.passed() == full.passed();
        let note = (!agree).then(|| {
            format!(
                "convention-mismatch: matched pair {}, direct conditions {}",
                if full.passed() { "passes" } else { "fails" },
                if direct.passed() { "pass" } else { "fail" }
            )
        });
        r.verdict(&m.name, "convention", agree, note);
    }
}

fn check_decl(r: &mut Report, doc: &Document, decl: &Decl, details: bool) -> Result<(), CliError> {
    match decl {
        Decl::Param { .. } => {}
        Decl::Algebra(a) => {
            check_algebra(r, &a.name, &a.algebra);
            if details {
                let (solv, _) = derived_series(&a.algebra, cfk_core::structure::DEFAULT_MAX_DEPTH);
                r.put(
                    "algebras",
                    &a.name,
                    json!({
                        "kind": a.algebra.kind().to_string(),
                        "gens": a.algebra.names(),
                        "table": render_table(&a.algebra),
                        "solvability": solv.to_string(),
                        "abelian": is_abelian(&a.algebra),
                    }),
                );
            }
        }
        Decl::Matched(m) => {
            check_pair(r, m);
            if details {
                r.put("pairs", &m.name, json!({ "bicrossed": render_table(&m.pair.build_bicrossed()) }));
            }
        }
        Decl::Defmap(d) => {
            let mp = &pair(doc, &d.pair)?.pair;
            r.check(&d.name, "deformation map", &check_deformation_map(mp, &d.map));
            let (q_phi, _) = deformed_algebra(mp, &d.map);
            r.check(&d.name, "deformed axioms", &q_phi.check_axioms());
            r.check(&d.name, "graph embedding", &graph_embedding_check(mp, &d.map));
            if details {
                r.put(
                    "defmaps",
                    &d.name,
                    json!({ "map": rows(d.map.map()), "deformed": render_table(&q_phi) }),
                );
            }
        }
        Decl::Morphism(h) => {
            let m = &h.morphism;
            r.check(&h.name, "morphism", &m.check_morphism());
            if details {
                let det = m.map().determinant().map(|d| d.to_string()).unwrap_or_else(|_| "n/a".into());
                r.put(
                    "morphisms",
                    &h.name,
                    json!({
                        "map": rows(m.map()),
                        "determinant": det,
                        "isomorphism": m.is_isomorphism(),
                    }),
                );
            }
        }
        Decl::Equiv(e) => {
            let mp = &pair(doc, &e.pair)?.pair;
            let phi = &doc.defmap(&e.phi).expect("resolved while parsing").map;
            let psi = &doc.defmap(&e.psi).expect("resolved while parsing").map;
            match check_equivalence(mp, phi, psi, &e.alpha) {
                Ok(rep) => r.check(&e.name, "equivalence", &rep),
                Err(err) => r.verdict(&e.name, "equivalence", false, Some(err.to_string())),
            }
        }
    }
    Ok(())
}

/// Every check on every declaration, plus tables and invariants.
pub fn cmd_report(loaded: &Loaded) -> Result<Report, CliError> {
    let mut r = start("report", loaded);
    for decl in &loaded.doc.decls {
        check_decl(&mut r, &loaded.doc, decl, true)?;
    }
    Ok(r)
}

/// Checks the named declarations, or all of them.
pub fn cmd_check(loaded: &Loaded, names: &[String]) -> Result<Report, CliError> {
    let mut r = start("check", loaded);
    for n in names {
        if !loaded.doc.decls.iter().any(|d| d.name() == n) {
            return Err(missing("declaration", n));
        }
    }
    for decl in &loaded.doc.decls {
        if names.is_empty() || names.iter().any(|n| n == decl.name()) {
            check_decl(&mut r, &loaded.doc, decl, false)?;
        }
    }
    Ok(r)
}

/// Builds `R ⋈ Q` and writes it as a `.cfk` algebra once the pair checks out.
pub fn cmd_bicrossed(loaded: &Loaded, pair_name: &str, out: Option<&Path>, name: &str) -> Result<Report, CliError> {
    let mut r = start("bicrossed", loaded);
    let m = pair(&loaded.doc, pair_name)?;
    check_pair(&mut r, m);
    if r.status() == crate::report::Status::Pass {
        let e = m.pair.build_bicrossed();
        r.set("table", json!(render_table(&e)));
        if let Some(out) = out {
            write(out, &serialize_algebra(name, &e))?;
        }
    }
    Ok(r)
}

/// Verifies `φ` and writes `Q_φ`.
pub fn cmd_deform(loaded: &Loaded, pair_name: &str, defmap: &str, out: Option<&Path>, name: &str) -> Result<Report, CliError> {
    let mut r = start("deform", loaded);
    let m = pair(&loaded.doc, pair_name)?;
    let d = loaded.doc.defmap(defmap).ok_or_else(|| missing("defmap", defmap))?;
    if d.pair != m.name {
        return Err(CliError::Input(format!("defmap `{defmap}` is on `{}`, not `{pair_name}`", d.pair)));
    }
    let (q_phi, report) = deformed_algebra(&m.pair, &d.map);
    r.check(defmap, "deformation map", &report);
    if report.passed() {
        r.set("table", json!(render_table(&q_phi)));
        if let Some(out) = out {
            write(out, &serialize_algebra(name, &q_phi))?;
        }
    }
    Ok(r)
}

fn elimination_summary(sys: &ConstraintSystem<Rational>) -> Value {
    match linear_eliminate(sys) {
        Ok(e) => json!({
            "status": "reduced",
            "substitutions": e.substitutions.iter().map(|s| format!("{} = {}", s.var, s.value)).collect::<Vec<_>>(),
            "remaining_unknowns": e.system.unknowns().iter().map(ToString::to_string).collect::<Vec<_>>(),
            "remaining": e.system.polys().iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
        Err(Error::Unsatisfiable(c)) => json!({ "status": "unsatisfiable", "contradiction": c }),
        Err(e) => json!({ "status": "error", "message": e.to_string() }),
    }
}

/// Compiles the deformation-map identity over a uniform degree ansatz.
pub fn cmd_constraints(loaded: &Loaded, pair_name: &str, degree: u32, out: Option<&Path>) -> Result<(Report, String), CliError> {
    let mut r = start("constraints", loaded);
    let mp = &pair(&loaded.doc, pair_name)?.pair;
    let ansatz = AnsatzSpec::uniform(mp.q().rank(), mp.r().rank(), degree);
    let sys = compile_deformation_constraints(mp, &ansatz)?;
    let text = sys.to_json();
    r.set("pair", json!(pair_name));
    r.set("degree", json!(degree));
    r.set("ansatz", json!(ansatz.symbolic_map::<Rational>().rendered()));
    r.set("unknowns", json!(sys.unknowns().len()));
    r.set(
        "equations",
        json!(sys.equations().iter().map(|e| e.poly.to_string()).collect::<Vec<_>>()),
    );
    r.set("elimination", elimination_summary(&sys));
    if let Some(out) = out {
        write(out, &text)?;
    }
    Ok((r, text))
}

fn render_assignment(a: &Assignment<Rational>) -> Value {
    Value::Object(a.iter().map(|(k, v)| (k.to_string(), json!(v.to_string()))).collect())
}

/// Eliminates, then searches the grid `n/d`, `|n| ≤ num`, `1 ≤ d ≤ den`.
pub fn cmd_solve(path: &Path, num: i64, den: i64, cap: usize) -> Result<Report, CliError> {
    let text = read(path)?;
    let sys = ConstraintSystem::<Rational>::from_json(&text).map_err(|e| CliError::Input(e.to_string()))?;
    let mut r = Report::new("solve");
    r.input = Some(InputInfo {
        file: file_label(path),
        sha256: digest(text.as_bytes()),
    });
    r.set("grid", json!({ "num": num, "den": den, "cap": cap }));
    r.set("elimination", elimination_summary(&sys));
    let solutions = match linear_eliminate(&sys) {
        Ok(e) => grid_search(&e.system, num, den, cap)?.iter().map(|s| e.extend(s)).collect(),
        Err(Error::Unsatisfiable(_)) => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    r.set("solution_count", json!(solutions.len()));
    r.set("solutions", Value::Array(solutions.iter().map(render_assignment).collect()));
    Ok(r)
}

/// Checks declared equivalences.
pub fn cmd_equiv(loaded: &Loaded, names: &[String]) -> Result<Report, CliError> {
    let mut r = start("equiv", loaded);
    let equivs: Vec<_> = loaded.doc.equivs().filter(|e| names.is_empty() || names.contains(&e.name)).collect();
    for n in names {
        if loaded.doc.equiv(n).is_none() {
            return Err(missing("equiv", n));
        }
    }
    for e in equivs {
        check_decl(&mut r, &loaded.doc, &Decl::Equiv(e.clone()), false)?;
    }
    Ok(r)
}

/// Bounded search for an equivalence witness.
#[allow(clippy::too_many_arguments)]
pub fn cmd_search(
    loaded: &Loaded,
    pair_name: &str,
    phi: &str,
    psi: &str,
    degree: u32,
    diagonal: bool,
    grid: Grid,
) -> Result<Report, CliError> {
    let mut r = start("search", loaded);
    let mp = &pair(&loaded.doc, pair_name)?.pair;
    let get = |n: &str| {
        loaded
            .doc
            .defmap(n)
            .filter(|d| d.pair == pair_name)
            .ok_or_else(|| missing("defmap on this pair", n))
    };
    let (phi_d, psi_d) = (get(phi)?, get(psi)?);
    let nq = mp.q().rank();
    let ansatz = if diagonal {
        AnsatzSpec::diagonal(nq, degree)
    } else {
        AnsatzSpec::uniform(nq, nq, degree)
    };
    let found = search_equivalence(mp, &phi_d.map, &psi_d.map, &ansatz, grid)?;
    r.set(
        "family",
        json!({
            "shape": if diagonal { "diagonal" } else { "full" },
            "degree": degree,
            "unknowns": found.unknowns,
            "grid": { "num": grid.max_num, "den": grid.max_den, "cap": grid.cap },
        }),
    );
    r.set("grid_solutions", json!(found.solutions.len()));
    r.set("witness", found.witness.as_ref().map_or(Value::Null, rows));
    let subject = format!("{phi} ~ {psi}");
    let note = if found.witness.is_some() {
        "witness found".to_string()
    } else {
        "not found within searched family".to_string()
    };
    r.verdict(&subject, "equivalence search", found.witness.is_some(), Some(note));
    Ok(r)
}

pub fn cmd_morphism(loaded: &Loaded, names: &[String]) -> Result<Report, CliError> {
    let mut r = start("morphism", loaded);
    for n in names {
        if loaded.doc.morphism(n).is_none() {
            return Err(missing("morphism", n));
        }
    }
    for h in loaded.doc.morphisms().filter(|h| names.is_empty() || names.contains(&h.name)) {
        check_decl(&mut r, &loaded.doc, &Decl::Morphism(h.clone()), true)?;
    }
    Ok(r)
}

/// Derived series and solvability of one algebra.
pub fn cmd_structure(loaded: &Loaded, algebra: &str, max_depth: usize) -> Result<Report, CliError> {
    let mut r = start("structure", loaded);
    let a = &loaded.doc.algebra(algebra).ok_or_else(|| missing("algebra", algebra))?.algebra;
    let (solv, series) = derived_series(a, max_depth);
    r.set("algebra", json!(algebra));
    r.set("max_depth", json!(max_depth));
    r.set("solvability", json!(solv.to_string()));
    r.set("abelian", json!(is_abelian(a)));
    r.set(
        "derived_series",
        Value::Array(series.iter().map(|s| json!(s.rendered())).collect()),
    );
    Ok(r)
}
