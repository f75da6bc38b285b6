use std::fmt;

use thiserror::Error;

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
}

impl Span {
    pub fn new(offset: usize, len: usize) -> Self {
        Span { offset, len }
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        let end = (other.offset + other.len).max(self.offset + self.len);
        Span::new(self.offset, end - self.offset)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A located message. `line` and `col` are 1-based; `col` counts characters.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{severity} at {line}:{col}: {message}")]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
    pub line: usize,
    pub col: usize,
}

impl Diagnostic {
    pub(crate) fn error(message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
            line: 0,
            col: 0,
        }
    }

    pub(crate) fn locate(&mut self, src: &str) {
        let before = &src[..self.span.offset.min(src.len())];
        self.line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |k| k + 1);
        self.col = src[line_start..self.span.offset].chars().count() + 1;
    }

    /// The message followed by the offending line with a caret underline.
    pub fn render(&self, src: &str) -> String {
        let line_text = src.lines().nth(self.line - 1).unwrap_or("");
        let width = src[self.span.offset..(self.span.offset + self.span.len).min(src.len())]
            .chars()
            .count()
            .max(1);
        format!(
            "{self}\n  | {line_text}\n  | {}{}",
            " ".repeat(self.col - 1),
            "^".repeat(width)
        )
    }
}
