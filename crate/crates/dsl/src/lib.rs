//! The `.cfk` text format.
//!
//! A document is a sequence of declarations, each resolved against the ones
//! before it:
//!
//! ```text
//! # Virasoro and its module W(a, b)
//! param a = 1;
//! algebra Vir : lie { gens L; [L,L] = (d + 2*l) L; }
//! algebra Wq : lie { gens W; }
//! matched P : lie {
//!   R = Vir;
//!   Q = Wq;
//!   W <| L = ((a - 1)*d + a*l) W;
//! }
//! defmap phi on P { W -> (3) L; }
//! algebra Q3 = deform P by phi;
//! morphism h : Q3 -> Vir { W -> (3) L; }
//! equiv refl on P : phi ~ phi { W -> W; }
//! ```
//!
//! Polynomials use `d` for ∂ and `l` for λ; maps use `d` only. Parameters
//! are exact rationals substituted while parsing. Omitted brackets, actions
//! and map rows are zero. Action operators `<|`, `|>`, `<~`, `~>` stand for
//! ◁, ▷, ↼, ⇀ with operands in written order.

mod diagnostic;
mod document;
mod lexer;
mod parser;
mod print;

pub use diagnostic::{Diagnostic, Severity, Span};
pub use document::{AlgebraDecl, AlgebraSource, Decl, DefmapDecl, Document, EquivDecl, MatchedDecl, MorphismDecl};
pub use parser::{parse, parse_full, MAX_DIAGNOSTICS};
pub use print::{render_terms, serialize, serialize_algebra};
