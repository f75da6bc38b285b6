use crate::diagnostic::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.tok {
            Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

// longest first so `->` wins over `-`
const SYMBOLS: &[&str] = &[
    "->", "<|", "|>", "<~", "~>", "[", "]", "(", ")", "{", "}", ",", ";", ":", "=", "+", "-", "*", "/", "^", "~",
];

/// Splits `src` into tokens. Unknown characters become diagnostics and are
/// skipped; the result always ends with `Eof`.
pub(crate) fn lex(src: &str, diags: &mut Vec<Diagnostic>) -> Vec<Token> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < src.len() {
        let c = src[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '#' {
            while i < src.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < src.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                span: Span::new(start, i - start),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < src.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Number(src[start..i].to_string()),
                span: Span::new(start, i - start),
            });
            continue;
        }
        if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            out.push(Token {
                tok: Tok::Sym(sym),
                span: Span::new(i, sym.len()),
            });
            i += sym.len();
            continue;
        }
        diags.push(Diagnostic::error(format!("unexpected character `{c}`"), Span::new(i, c.len_utf8())));
        i += c.len_utf8();
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(src.len(), 0),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        let mut d = Vec::new();
        let toks = lex(src, &mut d);
        assert!(d.is_empty(), "{d:?}");
        toks.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn symbols_and_comments() {
        assert_eq!(
            kinds("W <| L = (d-1) W; # tail\nY->M"),
            vec![
                Tok::Ident("W".into()),
                Tok::Sym("<|"),
                Tok::Ident("L".into()),
                Tok::Sym("="),
                Tok::Sym("("),
                Tok::Ident("d".into()),
                Tok::Sym("-"),
                Tok::Number("1".into()),
                Tok::Sym(")"),
                Tok::Ident("W".into()),
                Tok::Sym(";"),
                Tok::Ident("Y".into()),
                Tok::Sym("->"),
                Tok::Ident("M".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn bad_characters_are_reported_and_skipped() {
        let mut d = Vec::new();
        let toks = lex("a ∂ b", &mut d);
        assert_eq!(toks.len(), 3);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].span, Span::new(2, '∂'.len_utf8()));
    }
}
