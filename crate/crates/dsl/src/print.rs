use std::fmt::Write;

use cfk_core::actions::ModuleAction;
use cfk_core::algebra::{ConformalAlgebra, Kind};
use cfk_core::deform::ModuleMap;
use cfk_core::{Poly, Rational};

use crate::document::*;

/// `(c) N + ...` over `names`, skipping zeros; `0` if everything vanishes.
pub fn render_terms(coords: &[Poly], names: &[String]) -> String {
    let terms: Vec<String> = coords
        .iter()
        .zip(names)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, n)| if *c == Poly::one() { n.clone() } else { format!("({c}) {n}") })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn kind_word(kind: Kind) -> &'static str {
    match kind {
        Kind::Lie => "lie",
        Kind::Associative => "assoc",
    }
}

fn write_table(out: &mut String, name: &str, a: &ConformalAlgebra<Rational>) {
    let names = a.names();
    writeln!(out, "algebra {name} : {} {{", kind_word(a.kind())).unwrap();
    writeln!(out, "  gens {};", names.join(", ")).unwrap();
    for i in 0..a.rank() {
        for j in 0..a.rank() {
            let entry = a.entry(i, j);
            if entry.iter().any(|c| !c.is_zero()) {
                writeln!(out, "  [{},{}] = {};", names[i], names[j], render_terms(entry, names)).unwrap();
            }
        }
    }
    out.push_str("}\n");
}

fn write_action(out: &mut String, op: &str, act: &ModuleAction<Rational>, first: &[String], second: &[String], result: &[String]) {
    for (i, f) in first.iter().enumerate() {
        for (j, s) in second.iter().enumerate() {
            let entry = act.entry(i, j);
            if entry.iter().any(|c| !c.is_zero()) {
                writeln!(out, "  {f} {op} {s} = {};", render_terms(entry, result)).unwrap();
            }
        }
    }
}

fn write_map(out: &mut String, m: &ModuleMap<Rational>, src: &[String], tgt: &[String]) {
    for (j, n) in src.iter().enumerate() {
        let row = &m.matrix()[j];
        if row.iter().any(|c| !c.is_zero()) {
            writeln!(out, "  {n} -> {};", render_terms(row, tgt)).unwrap();
        }
    }
    out.push_str("}\n");
}

/// Canonical text for a document; parsing it back yields the same document.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    for (k, decl) in doc.decls.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        match decl {
            Decl::Param { name, value } => writeln!(out, "param {name} = {value};").unwrap(),
            Decl::Algebra(a) => match &a.source {
                AlgebraSource::Table => write_table(&mut out, &a.name, &a.algebra),
                AlgebraSource::Deformed { pair, defmap } => {
                    writeln!(out, "algebra {} = deform {pair} by {defmap};", a.name).unwrap()
                }
                AlgebraSource::Bicrossed { pair } => writeln!(out, "algebra {} = bicrossed {pair};", a.name).unwrap(),
            },
            Decl::Matched(m) => {
                let mp = &m.pair;
                let (rn, qn) = (mp.r().names(), mp.q().names());
                writeln!(out, "matched {} : {} {{", m.name, kind_word(mp.kind())).unwrap();
                writeln!(out, "  R = {};", m.r).unwrap();
                writeln!(out, "  Q = {};", m.q).unwrap();
                write_action(&mut out, "<|", mp.lhd(), qn, rn, qn);
                write_action(&mut out, "|>", mp.rhd(), qn, rn, rn);
                if let Some(act) = mp.lharpoon() {
                    write_action(&mut out, "<~", act, rn, qn, rn);
                }
                if let Some(act) = mp.rharpoon() {
                    write_action(&mut out, "~>", act, rn, qn, qn);
                }
                out.push_str("}\n");
            }
            Decl::Defmap(d) => {
                let mp = doc.pair(&d.pair).expect("defmap refers to a declared pair");
                writeln!(out, "defmap {} on {} {{", d.name, d.pair).unwrap();
                write_map(&mut out, d.map.map(), mp.pair.q().names(), mp.pair.r().names());
            }
            Decl::Morphism(h) => {
                let m = &h.morphism;
                writeln!(out, "morphism {} : {} -> {} {{", h.name, h.source, h.target).unwrap();
                write_map(&mut out, m.map(), m.source().names(), m.target().names());
            }
            Decl::Equiv(e) => {
                let mp = doc.pair(&e.pair).expect("equiv refers to a declared pair");
                let qn = mp.pair.q().names();
                writeln!(out, "equiv {} on {} : {} ~ {} {{", e.name, e.pair, e.phi, e.psi).unwrap();
                write_map(&mut out, &e.alpha, qn, qn);
            }
        }
    }
    out
}

/// Text for a single algebra table, as written by `bicrossed` and `deform`.
pub fn serialize_algebra(name: &str, a: &ConformalAlgebra<Rational>) -> String {
    let mut out = String::new();
    write_table(&mut out, name, a);
    out
}
