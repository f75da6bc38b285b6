use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use cfk_core::actions::{MatchedPair, ModuleAction, Side};
use cfk_core::algebra::{ConformalAlgebra, Kind};
use cfk_core::deform::{deformed_algebra, DeformationMap, ModuleMap, Morphism};
use cfk_core::{Poly, Rational, VarId};

use crate::diagnostic::{Diagnostic, Severity, Span};
use crate::document::*;
use crate::lexer::{lex, Tok, Token};

/// Parsing stops collecting errors after this many.
pub const MAX_DIAGNOSTICS: usize = 50;

pub(crate) const KEYWORDS: &[&str] = &["param", "algebra", "matched", "defmap", "morphism", "equiv"];

/// Parses and resolves a document. `params` bind parameter names and take
/// precedence over `param` declarations in the text.
pub fn parse(src: &str, params: &BTreeMap<String, Rational>) -> Result<Document, Vec<Diagnostic>> {
    let (doc, diags) = parse_full(src, params);
    let errors: Vec<Diagnostic> = diags.into_iter().filter(|d| d.severity == Severity::Error).collect();
    match doc {
        Some(doc) if errors.is_empty() => Ok(doc),
        _ => Err(errors),
    }
}

/// Like [`parse`] but also returns warnings. The document is `None` when
/// any error was reported.
pub fn parse_full(src: &str, params: &BTreeMap<String, Rational>) -> (Option<Document>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let toks = lex(src, &mut diags);
    let mut p = Parser {
        toks,
        pos: 0,
        diags,
        external: params,
        params: BTreeMap::new(),
        used: BTreeSet::new(),
        doc: Document::default(),
        poisoned: BTreeSet::new(),
    };
    p.document();
    for name in params.keys() {
        if !p.used.contains(name) && !p.params.contains_key(name) {
            p.diags.push(Diagnostic {
                severity: Severity::Warning,
                ..Diagnostic::error(format!("parameter `{name}` is given but never used"), Span::new(0, 0))
            });
        }
    }
    let mut diags = p.diags;
    diags.truncate(MAX_DIAGNOSTICS);
    for d in &mut diags {
        d.locate(src);
    }
    let failed = diags.iter().any(|d| d.severity == Severity::Error);
    (if failed { None } else { Some(p.doc) }, diags)
}

/// Marker for a failure that has already been reported.
struct Halt;

type PResult<T> = Result<T, Halt>;

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    external: &'a BTreeMap<String, Rational>,
    params: BTreeMap<String, Rational>,
    used: BTreeSet<String>,
    doc: Document,
    /// Declarations that failed; references to them are not re-reported.
    poisoned: BTreeSet<(&'static str, String)>,
}

fn is_reserved(name: &str) -> bool {
    VarId::parse(name).is_some() || KEYWORDS.contains(&name)
}

fn noun(keyword: &str) -> &'static str {
    match keyword {
        "param" => "a parameter",
        "algebra" => "an algebra",
        "matched" => "a matched pair",
        "defmap" => "a deformation map",
        "morphism" => "a morphism",
        _ => "an equivalence",
    }
}

fn kind_word(kind: Kind) -> &'static str {
    match kind {
        Kind::Lie => "lie",
        Kind::Associative => "assoc",
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek().tok, Tok::Sym(x) if x == s)
    }

    fn at_keyword(&self) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if KEYWORDS.contains(&x.as_str()))
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn error(&mut self, msg: impl Into<String>, span: Span) -> Halt {
        if self.diags.len() < MAX_DIAGNOSTICS {
            self.diags.push(Diagnostic::error(msg, span));
        }
        Halt
    }

    fn expect_sym(&mut self, s: &'static str) -> PResult<Span> {
        if self.at_sym(s) {
            return Ok(self.bump().span);
        }
        let t = self.peek().clone();
        Err(self.error(format!("expected `{s}`, found {}", t.describe()), t.span))
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Span)> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(name) => {
                self.bump();
                Ok((name, t.span))
            }
            _ => Err(self.error(format!("expected {what}, found {}", t.describe()), t.span)),
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<Span> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(x) if x == word => {
                self.bump();
                Ok(t.span)
            }
            _ => Err(self.error(format!("expected `{word}`, found {}", t.describe()), t.span)),
        }
    }

    /// A fresh name for a declaration of kind `keyword`.
    fn decl_name(&mut self, keyword: &'static str) -> PResult<(String, Span)> {
        let (name, span) = self.expect_ident("a name")?;
        if is_reserved(&name) {
            return Err(self.error(format!("`{name}` is reserved"), span));
        }
        let taken = self.doc.decls.iter().any(|d| d.keyword() == keyword && d.name() == name)
            || self.poisoned.contains(&(keyword, name.clone()));
        if taken {
            return Err(self.error(format!("{} `{name}` is already declared", &noun(keyword)[2..].trim_start()), span));
        }
        Ok((name, span))
    }

    fn document(&mut self) {
        while !self.at_eof() && self.diags.len() < MAX_DIAGNOSTICS {
            let t = self.peek().clone();
            let keyword = match &t.tok {
                Tok::Ident(x) => KEYWORDS.iter().find(|k| **k == x.as_str()).copied(),
                _ => None,
            };
            let Some(keyword) = keyword else {
                self.error(
                    format!("expected a declaration (one of {}), found {}", KEYWORDS.join(", "), t.describe()),
                    t.span,
                );
                self.bump();
                self.sync_decl();
                continue;
            };
            self.bump();
            let name = match &self.peek().tok {
                Tok::Ident(n) => Some(n.clone()),
                _ => None,
            };
            let outcome = match keyword {
                "param" => self.param_decl(),
                "algebra" => self.algebra_decl(),
                "matched" => self.matched_decl(),
                "defmap" => self.defmap_decl(),
                "morphism" => self.morphism_decl(),
                _ => self.equiv_decl(),
            };
            match outcome {
                Ok(decl) => self.doc.decls.push(decl),
                Err(Halt) => {
                    if let Some(n) = name {
                        self.poisoned.insert((keyword, n));
                    }
                    self.sync_decl();
                }
            }
        }
    }

    /// Skips to the next declaration keyword outside braces.
    fn sync_decl(&mut self) {
        let mut depth = 0usize;
        while !self.at_eof() {
            if depth == 0 && self.at_keyword() {
                return;
            }
            if self.at_sym("{") {
                depth += 1;
            } else if self.at_sym("}") {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    self.bump();
                    continue;
                }
            }
            self.bump();
        }
    }

    /// Skips past the current statement.
    fn sync_stmt(&mut self) {
        while !self.at_eof() && !self.at_sym("}") && !self.at_keyword() {
            if self.bump().tok == Tok::Sym(";") {
                return;
            }
        }
    }

    /// Runs `stmt` until the closing brace, recovering after each failure.
    fn block(&mut self, mut stmt: impl FnMut(&mut Self) -> PResult<()>) -> PResult<()> {
        let mut ok = true;
        loop {
            if self.at_sym("}") {
                self.bump();
                return if ok { Ok(()) } else { Err(Halt) };
            }
            if self.at_eof() || self.at_keyword() {
                let t = self.peek().clone();
                return Err(self.error(format!("expected `}}`, found {}", t.describe()), t.span));
            }
            if stmt(self).is_err() {
                ok = false;
                self.sync_stmt();
            }
        }
    }

    fn kind(&mut self) -> PResult<Kind> {
        let (w, span) = self.expect_ident("`lie` or `assoc`")?;
        match w.as_str() {
            "lie" => Ok(Kind::Lie),
            "assoc" => Ok(Kind::Associative),
            _ => Err(self.error(format!("expected `lie` or `assoc`, found `{w}`"), span)),
        }
    }

    fn lookup(&mut self, keyword: &'static str, name: &str, span: Span) -> PResult<&Decl> {
        if let Some(k) = self.doc.decls.iter().position(|d| d.keyword() == keyword && d.name() == name) {
            return Ok(&self.doc.decls[k]);
        }
        if self.poisoned.contains(&(keyword, name.to_string())) {
            return Err(Halt);
        }
        let other = self.doc.decls.iter().find(|d| d.name() == name).map(|d| d.keyword());
        Err(match other {
            Some(k) => self.error(format!("`{name}` is {}, not {}", noun(k), noun(keyword)), span),
            None => self.error(format!("unknown {} `{name}`", &noun(keyword)[2..].trim_start()), span),
        })
    }

    fn algebra_ref(&mut self) -> PResult<(String, Arc<ConformalAlgebra<Rational>>)> {
        let (name, span) = self.expect_ident("an algebra name")?;
        match self.lookup("algebra", &name, span)? {
            Decl::Algebra(a) => Ok((name, a.algebra.clone())),
            _ => unreachable!("lookup filters by keyword"),
        }
    }

    fn pair_ref(&mut self) -> PResult<(String, Arc<MatchedPair<Rational>>)> {
        let (name, span) = self.expect_ident("a matched pair name")?;
        match self.lookup("matched", &name, span)? {
            Decl::Matched(a) => Ok((name, a.pair.clone())),
            _ => unreachable!("lookup filters by keyword"),
        }
    }

    fn defmap_ref(&mut self, pair: &str) -> PResult<(String, DeformationMap<Rational>)> {
        let (name, span) = self.expect_ident("a deformation map name")?;
        match self.lookup("defmap", &name, span)? {
            Decl::Defmap(d) if d.pair == pair => Ok((name, d.map.clone())),
            Decl::Defmap(d) => {
                let on = d.pair.clone();
                Err(self.error(format!("defmap `{name}` is on `{on}`, not `{pair}`"), span))
            }
            _ => unreachable!("lookup filters by keyword"),
        }
    }

    fn generator(&mut self, names: &[String], owner: &str) -> PResult<usize> {
        let (name, span) = self.expect_ident("a generator")?;
        match names.iter().position(|n| *n == name) {
            Some(k) => Ok(k),
            None => Err(self.error(format!("`{name}` is not a generator of {owner}"), span)),
        }
    }

    /// Tokens up to (not including) the statement's `;`.
    fn statement_tokens(&mut self) -> Vec<Token> {
        let mut out = Vec::new();
        while !self.at_eof() && !self.at_sym(";") && !self.at_sym("}") && !self.at_keyword() {
            out.push(self.bump());
        }
        out
    }

    /// Parses `term (("+"|"-") term)*` into coordinates over `names`. A term
    /// is an optional polynomial coefficient followed by a generator; `0`
    /// alone stands for zero.
    fn terms(&mut self, names: &[String], owner: &str, allowed: &[VarId]) -> PResult<Vec<Poly>> {
        let toks = self.statement_tokens();
        if toks.is_empty() {
            let t = self.peek().clone();
            return Err(self.error(format!("expected terms, found {}", t.describe()), t.span));
        }
        let mut groups: Vec<(bool, Vec<Token>)> = Vec::new();
        let mut current: (bool, Vec<Token>) = (false, Vec::new());
        let mut depth = 0i32;
        for t in toks {
            match t.tok {
                Tok::Sym("(") => depth += 1,
                Tok::Sym(")") => depth -= 1,
                Tok::Sym(s @ ("+" | "-")) if depth == 0 => {
                    let after_op = matches!(current.1.last().map(|x| &x.tok), Some(Tok::Sym("*" | "/" | "^")));
                    if current.1.is_empty() {
                        current.0 ^= s == "-";
                        continue;
                    }
                    if !current.1.is_empty() && !after_op {
                        groups.push(std::mem::replace(&mut current, (s == "-", Vec::new())));
                        continue;
                    }
                }
                _ => {}
            }
            current.1.push(t);
        }
        groups.push(current);
        let mut coords = vec![Poly::zero(); names.len()];
        let mut failed = false;
        for (negative, group) in groups {
            match self.term(&group, names, owner, allowed) {
                Ok(Some((k, c))) => coords[k] = &coords[k] + &if negative { -c } else { c },
                Ok(None) => {}
                Err(Halt) => failed = true,
            }
        }
        if failed {
            Err(Halt)
        } else {
            Ok(coords)
        }
    }

    fn term(&mut self, group: &[Token], names: &[String], owner: &str, allowed: &[VarId]) -> PResult<Option<(usize, Poly)>> {
        let Some((last, coeff)) = group.split_last() else {
            return Err(self.error("empty term", Span::new(0, 0)));
        };
        let span = group[0].span.to(last.span);
        if group.len() == 1 && last.tok == Tok::Number("0".into()) {
            return Ok(None);
        }
        let name = match &last.tok {
            Tok::Ident(n) if names.contains(n) => n,
            Tok::Ident(n) if !is_reserved(n) && !self.params.contains_key(n) && !self.external.contains_key(n) => {
                return Err(self.error(format!("`{n}` is not a generator of {owner}"), last.span));
            }
            _ => {
                return Err(self.error(format!("term must end with a generator of {owner}"), span));
            }
        };
        let k = names.iter().position(|n| n == name).expect("checked above");
        let coeff = match coeff.split_last() {
            Some((t, rest)) if t.tok == Tok::Sym("*") => rest,
            _ => coeff,
        };
        Ok(Some((k, self.coefficient(coeff, allowed)?)))
    }

    /// Builds a polynomial from tokens, substituting parameters and
    /// inserting `*` between juxtaposed factors.
    fn coefficient(&mut self, toks: &[Token], allowed: &[VarId]) -> PResult<Poly> {
        if toks.is_empty() {
            return Ok(Poly::one());
        }
        let span = toks[0].span.to(toks[toks.len() - 1].span);
        let mut text = String::new();
        let mut prev_atom = false;
        for t in toks {
            let starts_atom = matches!(t.tok, Tok::Ident(_) | Tok::Number(_) | Tok::Sym("("));
            if prev_atom && starts_atom {
                text.push('*');
            }
            match &t.tok {
                Tok::Ident(n) => {
                    if let Some(v) = VarId::parse(n) {
                        if !allowed.contains(&v) {
                            let ok: Vec<String> = allowed.iter().map(|v| v.to_string()).collect();
                            let msg = if ok.is_empty() {
                                format!("`{n}` cannot appear in a constant")
                            } else {
                                format!("`{n}` cannot appear here; allowed variables: {}", ok.join(", "))
                            };
                            return Err(self.error(msg, t.span));
                        }
                        text.push_str(n);
                    } else if let Some(v) = self.external.get(n).or_else(|| self.params.get(n)) {
                        self.used.insert(n.clone());
                        text.push_str(&format!("({v})"));
                    } else {
                        return Err(self.error(format!("unbound parameter `{n}`"), t.span));
                    }
                }
                Tok::Number(s) => text.push_str(s),
                Tok::Sym(s) => text.push_str(s),
                Tok::Eof => {}
            }
            text.push(' ');
            prev_atom = matches!(t.tok, Tok::Ident(_) | Tok::Number(_) | Tok::Sym(")"));
        }
        // positions refer to the rebuilt text, so report the message only
        text.parse::<Poly>().map_err(|e| {
            let msg = match e {
                cfk_core::Error::Parse { msg, .. } => msg,
                other => other.to_string(),
            };
            self.error(format!("invalid coefficient: {msg}"), span)
        })
    }

    fn param_decl(&mut self) -> PResult<Decl> {
        let (name, _) = self.decl_name("param")?;
        self.expect_sym("=")?;
        let toks = self.statement_tokens();
        if toks.is_empty() {
            let t = self.peek().clone();
            return Err(self.error(format!("expected a value, found {}", t.describe()), t.span));
        }
        let value = self.coefficient(&toks, &[])?;
        self.expect_sym(";")?;
        let value = match self.external.get(&name) {
            Some(v) => {
                self.used.insert(name.clone());
                v.clone()
            }
            None => value.constant_term(),
        };
        self.params.insert(name.clone(), value.clone());
        Ok(Decl::Param { name, value })
    }

    fn algebra_decl(&mut self) -> PResult<Decl> {
        let (name, name_span) = self.decl_name("algebra")?;
        if self.at_sym("=") {
            self.bump();
            let (how, how_span) = self.expect_ident("`deform` or `bicrossed`")?;
            let decl = match how.as_str() {
                "deform" => {
                    let (pair_name, pair) = self.pair_ref()?;
                    self.expect_word("by")?;
                    let (defmap, phi) = self.defmap_ref(&pair_name)?;
                    let (algebra, _) = deformed_algebra(&pair, &phi);
                    AlgebraDecl {
                        name,
                        source: AlgebraSource::Deformed { pair: pair_name, defmap },
                        algebra: Arc::new(algebra),
                    }
                }
                "bicrossed" => {
                    let (pair_name, pair) = self.pair_ref()?;
                    if let Some(n) = pair.q().names().iter().find(|n| pair.r().names().contains(n)) {
                        return Err(self.error(format!("generator `{n}` occurs in both R and Q"), name_span));
                    }
                    let algebra = pair.build_bicrossed();
                    AlgebraDecl {
                        name,
                        source: AlgebraSource::Bicrossed { pair: pair_name },
                        algebra: Arc::new(algebra),
                    }
                }
                _ => return Err(self.error(format!("expected `deform` or `bicrossed`, found `{how}`"), how_span)),
            };
            self.expect_sym(";")?;
            return Ok(Decl::Algebra(decl));
        }
        self.expect_sym(":")?;
        let kind = self.kind()?;
        self.expect_sym("{")?;
        self.expect_word("gens")?;
        let mut names: Vec<String> = Vec::new();
        loop {
            let (g, span) = self.expect_ident("a generator name")?;
            if is_reserved(&g) {
                return Err(self.error(format!("`{g}` is reserved"), span));
            }
            if names.contains(&g) {
                return Err(self.error(format!("generator `{g}` is listed twice"), span));
            }
            names.push(g);
            if !self.at_sym(",") {
                break;
            }
            self.bump();
        }
        self.expect_sym(";")?;
        let n = names.len();
        let mut table = vec![vec![vec![Poly::zero(); n]; n]; n];
        let mut seen = BTreeSet::new();
        let owner = format!("`{name}`");
        self.block(|p| {
            let open = p.expect_sym("[")?;
            let i = p.generator(&names, &owner)?;
            p.expect_sym(",")?;
            let j = p.generator(&names, &owner)?;
            let close = p.expect_sym("]")?;
            p.expect_sym("=")?;
            let coords = p.terms(&names, &owner, &[VarId::D, VarId::L1])?;
            p.expect_sym(";")?;
            if !seen.insert((i, j)) {
                return Err(p.error(format!("[{},{}] is given twice", names[i], names[j]), open.to(close)));
            }
            table[i][j] = coords;
            Ok(())
        })?;
        let algebra =
            ConformalAlgebra::new(kind, names, table).map_err(|e| self.error(e.to_string(), name_span))?;
        Ok(Decl::Algebra(AlgebraDecl {
            name,
            source: AlgebraSource::Table,
            algebra: Arc::new(algebra),
        }))
    }

    fn matched_decl(&mut self) -> PResult<Decl> {
        let (name, name_span) = self.decl_name("matched")?;
        self.expect_sym(":")?;
        let kind = self.kind()?;
        self.expect_sym("{")?;
        self.expect_word("R")?;
        self.expect_sym("=")?;
        let r_span = self.peek().span;
        let (r_name, r) = self.algebra_ref()?;
        self.expect_sym(";")?;
        self.expect_word("Q")?;
        self.expect_sym("=")?;
        let q_span = self.peek().span;
        let (q_name, q) = self.algebra_ref()?;
        self.expect_sym(";")?;
        for (alg, alg_name, span) in [(&r, &r_name, r_span), (&q, &q_name, q_span)] {
            if alg.kind() != kind {
                let (want, got) = (kind_word(kind), kind_word(alg.kind()));
                return Err(self.error(format!("expected a {want} algebra, `{alg_name}` is {got}"), span));
            }
        }
        let (nr, nq) = (r.rank(), q.rank());
        let (rn, qn) = (r.names().to_vec(), q.names().to_vec());
        let r_owner = format!("R = `{r_name}`");
        let q_owner = format!("Q = `{q_name}`");
        // ◁ and ▷ take (Q, R); ↼ and ⇀ take (R, Q)
        let mut lhd = vec![vec![vec![Poly::zero(); nq]; nr]; nq];
        let mut rhd = vec![vec![vec![Poly::zero(); nr]; nr]; nq];
        let mut lharpoon = vec![vec![vec![Poly::zero(); nr]; nq]; nr];
        let mut rharpoon = vec![vec![vec![Poly::zero(); nq]; nq]; nr];
        let mut seen = BTreeSet::new();
        self.block(|p| {
            let first_span = p.peek().span;
            let (first_name, _) = p.expect_ident("a generator")?;
            let op_tok = p.bump();
            let op = match op_tok.tok {
                Tok::Sym(s @ ("<|" | "|>" | "<~" | "~>")) => s,
                _ => {
                    return Err(p.error(
                        format!("expected one of `<|`, `|>`, `<~`, `~>`, found {}", op_tok.describe()),
                        op_tok.span,
                    ))
                }
            };
            if kind == Kind::Lie && matches!(op, "<~" | "~>") {
                return Err(p.error(format!("`{op}` only exists for assoc pairs"), op_tok.span));
            }
            let q_first = matches!(op, "<|" | "|>");
            let (first_names, first_owner, second_names, second_owner) = if q_first {
                (&qn, &q_owner, &rn, &r_owner)
            } else {
                (&rn, &r_owner, &qn, &q_owner)
            };
            let Some(i) = first_names.iter().position(|n| *n == first_name) else {
                return Err(p.error(format!("`{first_name}` is not a generator of {first_owner}"), first_span));
            };
            let j = p.generator(second_names, second_owner)?;
            p.expect_sym("=")?;
            let lands_in_q = matches!(op, "<|" | "~>");
            let (out_names, out_owner) = if lands_in_q { (&qn, &q_owner) } else { (&rn, &r_owner) };
            let coords = p.terms(out_names, out_owner, &[VarId::D, VarId::L1])?;
            p.expect_sym(";")?;
            if !seen.insert((op, i, j)) {
                return Err(p.error(format!("{first_name} {op} {} is given twice", second_names[j]), first_span));
            }
            match op {
                "<|" => lhd[i][j] = coords,
                "|>" => rhd[i][j] = coords,
                "<~" => lharpoon[i][j] = coords,
                _ => rharpoon[i][j] = coords,
            }
            Ok(())
        })?;
        let built = (|| {
            let lhd = ModuleAction::new(Side::Right, r.clone(), nq, lhd)?;
            let rhd = ModuleAction::new(Side::Left, q.clone(), nr, rhd)?;
            match kind {
                Kind::Lie => MatchedPair::lie(r.clone(), q.clone(), lhd, rhd),
                Kind::Associative => {
                    let lharpoon = ModuleAction::new(Side::Right, q.clone(), nr, lharpoon)?;
                    let rharpoon = ModuleAction::new(Side::Left, r.clone(), nq, rharpoon)?;
                    MatchedPair::associative(r.clone(), q.clone(), lhd, rhd, lharpoon, rharpoon)
                }
            }
        })();
        let pair = built.map_err(|e| self.error(e.to_string(), name_span))?;
        Ok(Decl::Matched(MatchedDecl {
            name,
            r: r_name,
            q: q_name,
            pair: Arc::new(pair),
        }))
    }

    /// `GEN -> terms;` rows until `}`; rows left out are zero.
    fn map_block(&mut self, src: &[String], src_owner: &str, tgt: &[String], tgt_owner: &str) -> PResult<Vec<Vec<Poly>>> {
        self.expect_sym("{")?;
        let mut matrix = vec![vec![Poly::zero(); tgt.len()]; src.len()];
        let mut seen = BTreeSet::new();
        self.block(|p| {
            let span = p.peek().span;
            let j = p.generator(src, src_owner)?;
            p.expect_sym("->")?;
            let coords = p.terms(tgt, tgt_owner, &[VarId::D])?;
            p.expect_sym(";")?;
            if !seen.insert(j) {
                return Err(p.error(format!("image of `{}` is given twice", src[j]), span));
            }
            matrix[j] = coords;
            Ok(())
        })?;
        Ok(matrix)
    }

    fn defmap_decl(&mut self) -> PResult<Decl> {
        let (name, name_span) = self.decl_name("defmap")?;
        self.expect_word("on")?;
        let (pair_name, pair) = self.pair_ref()?;
        let (qn, rn) = (pair.q().names().to_vec(), pair.r().names().to_vec());
        let matrix = self.map_block(&qn, "Q", &rn, "R")?;
        let map = ModuleMap::new(qn.len(), rn.len(), matrix)
            .and_then(|m| DeformationMap::new(&pair, m))
            .map_err(|e| self.error(e.to_string(), name_span))?;
        Ok(Decl::Defmap(DefmapDecl {
            name,
            pair: pair_name,
            map,
        }))
    }

    fn morphism_decl(&mut self) -> PResult<Decl> {
        let (name, name_span) = self.decl_name("morphism")?;
        self.expect_sym(":")?;
        let (source_name, source) = self.algebra_ref()?;
        self.expect_sym("->")?;
        let (target_name, target) = self.algebra_ref()?;
        let (sn, tn) = (source.names().to_vec(), target.names().to_vec());
        let matrix = self.map_block(&sn, &format!("`{source_name}`"), &tn, &format!("`{target_name}`"))?;
        let morphism = ModuleMap::new(sn.len(), tn.len(), matrix)
            .and_then(|m| Morphism::new(source, target, m))
            .map_err(|e| self.error(e.to_string(), name_span))?;
        Ok(Decl::Morphism(MorphismDecl {
            name,
            source: source_name,
            target: target_name,
            morphism,
        }))
    }

    fn equiv_decl(&mut self) -> PResult<Decl> {
        let (name, name_span) = self.decl_name("equiv")?;
        self.expect_word("on")?;
        let (pair_name, pair) = self.pair_ref()?;
        self.expect_sym(":")?;
        let (phi, _) = self.defmap_ref(&pair_name)?;
        self.expect_sym("~")?;
        let (psi, _) = self.defmap_ref(&pair_name)?;
        let qn = pair.q().names().to_vec();
        let matrix = self.map_block(&qn, "Q", &qn, "Q")?;
        let alpha = ModuleMap::new(qn.len(), qn.len(), matrix).map_err(|e| self.error(e.to_string(), name_span))?;
        Ok(Decl::Equiv(EquivDecl {
            name,
            pair: pair_name,
            phi,
            psi,
            alpha,
        }))
    }
}
