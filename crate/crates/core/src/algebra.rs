//! Conformal algebras given by a λ-product table, the sesquilinear product
//! kernel, and the axiom checkers.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::poly::{MultiPoly, VarId};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Lie,
    Associative,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Lie => f.write_str("lie"),
            Kind::Associative => f.write_str("associative"),
        }
    }
}

/// An element of a free module of rank n, with coordinates in `C[∂, λ, μ, …]`.
///
/// Free spectral parameters appear when elements are the results of earlier
/// products; they are carried as plain polynomial variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Element<C> {
    coords: Vec<MultiPoly<C>>,
}

impl<C: Scalar> Element<C> {
    pub fn zero(rank: usize) -> Self {
        Element {
            coords: vec![MultiPoly::zero(); rank],
        }
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut e = Self::zero(rank);
        e.coords[i] = MultiPoly::one();
        e
    }

    pub fn from_coords(coords: Vec<MultiPoly<C>>) -> Self {
        Element { coords }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[MultiPoly<C>] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &MultiPoly<C> {
        &self.coords[i]
    }

    pub fn into_coords(self) -> Vec<MultiPoly<C>> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(MultiPoly::is_zero)
    }

    /// Multiplies every coordinate by `p`.
    pub fn scale(&self, p: &MultiPoly<C>) -> Self {
        Element {
            coords: self.coords.iter().map(|c| c * p).collect(),
        }
    }

    pub fn substitute(&self, v: VarId, r: &MultiPoly<C>) -> Self {
        Element {
            coords: self.coords.iter().map(|c| c.substitute(v, r)).collect(),
        }
    }

    /// `self ⊕ other` in a direct sum with `self`'s basis first.
    pub fn direct_sum(&self, other: &Element<C>) -> Self {
        Element {
            coords: self.coords.iter().chain(&other.coords).cloned().collect(),
        }
    }

    /// Coordinates `start..start + len` as an element of rank `len`.
    pub fn project(&self, start: usize, len: usize) -> Self {
        Element {
            coords: self.coords[start..start + len].to_vec(),
        }
    }

    pub fn rendered(&self) -> Vec<String> {
        self.coords.iter().map(ToString::to_string).collect()
    }
}

impl<C: Scalar> Add for &Element<C> {
    type Output = Element<C>;
    fn add(self, rhs: &Element<C>) -> Element<C> {
        assert_eq!(self.rank(), rhs.rank(), "element rank mismatch");
        Element {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<C: Scalar> Sub for &Element<C> {
    type Output = Element<C>;
    fn sub(self, rhs: &Element<C>) -> Element<C> {
        assert_eq!(self.rank(), rhs.rank(), "element rank mismatch");
        Element {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<C: Scalar> Neg for &Element<C> {
    type Output = Element<C>;
    fn neg(self) -> Element<C> {
        Element {
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }
}

impl<C: Scalar> Add for Element<C> {
    type Output = Element<C>;
    fn add(self, rhs: Element<C>) -> Element<C> {
        &self + &rhs
    }
}

impl<C: Scalar> Sub for Element<C> {
    type Output = Element<C>;
    fn sub(self, rhs: Element<C>) -> Element<C> {
        &self - &rhs
    }
}

impl<C: Scalar> Neg for Element<C> {
    type Output = Element<C>;
    fn neg(self) -> Element<C> {
        -&self
    }
}

impl<C: Scalar> fmt::Display for Element<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rendered().join(", "))
    }
}

/// The sesquilinear evaluation rule shared by products and actions:
///
/// `out_k = Σ_{i,j} x_i[∂ ↦ -s] · y_j[∂ ↦ ∂ + s] · c_ij^k[λ ↦ s]`.
///
/// Nested expressions are evaluated innermost first: an inner result keeps
/// its live ∂, which the outer call rewrites through the substitutions above.
pub(crate) fn sesquilinear<'a, C, F>(
    x: &Element<C>,
    y: &Element<C>,
    s: &MultiPoly<C>,
    out_rank: usize,
    entry: F,
) -> Element<C>
where
    C: Scalar,
    F: Fn(usize, usize) -> &'a [MultiPoly<C>],
{
    let minus_s = -s;
    let shifted = &MultiPoly::var(VarId::D) + s;
    let left: Vec<_> = x
        .coords
        .iter()
        .map(|c| (!c.is_zero()).then(|| c.substitute(VarId::D, &minus_s)))
        .collect();
    let right: Vec<_> = y
        .coords
        .iter()
        .map(|c| (!c.is_zero()).then(|| c.substitute(VarId::D, &shifted)))
        .collect();
    let mut out = Element::zero(out_rank);
    for (i, xi) in left.iter().enumerate() {
        let Some(xi) = xi else { continue };
        for (j, yj) in right.iter().enumerate() {
            let Some(yj) = yj else { continue };
            let structure = entry(i, j);
            if structure.iter().all(MultiPoly::is_zero) {
                continue;
            }
            let factor = xi * yj;
            for (k, c) in structure.iter().enumerate() {
                if !c.is_zero() {
                    out.coords[k] += &(&factor * &c.substitute(VarId::L1, s));
                }
            }
        }
    }
    out
}

pub(crate) fn check_table_vars<C: Scalar>(polys: &[MultiPoly<C>]) -> Result<()> {
    for p in polys {
        if let Some(var) = p.var_outside(&[VarId::D, VarId::L1]) {
            return Err(Error::VariableLeak {
                var,
                allowed: "d and l",
            });
        }
    }
    Ok(())
}

pub(crate) fn check_names(names: &[String]) -> Result<()> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::DuplicateName(n.clone()));
        }
    }
    Ok(())
}

/// One failed instance of an identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation<C> {
    pub identity: String,
    pub indices: Vec<usize>,
    pub residual: Element<C>,
}

/// Outcome of an identity check; it passes iff there are no violations.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport<C> {
    pub violations: Vec<Violation<C>>,
}

impl<C: Scalar> Default for CheckReport<C> {
    fn default() -> Self {
        Self::pass()
    }
}

impl<C: Scalar> CheckReport<C> {
    pub fn pass() -> Self {
        CheckReport {
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records `residual` under `identity` unless it vanishes.
    pub fn record(&mut self, identity: &str, indices: &[usize], residual: Element<C>) {
        if !residual.is_zero() {
            self.violations.push(Violation {
                identity: identity.to_string(),
                indices: indices.to_vec(),
                residual,
            });
        }
    }

    /// Appends another report's violations, prefixing identity names.
    pub fn absorb(&mut self, prefix: &str, other: CheckReport<C>) {
        for mut v in other.violations {
            v.identity = format!("{prefix}{}", v.identity);
            self.violations.push(v);
        }
    }
}

/// A finite conformal algebra: a free `C[∂]`-module with basis `e_0 … e_{n-1}`
/// and products `e_i λ e_j = Σ_k c_ij^k(∂, λ) e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalAlgebra<C> {
    kind: Kind,
    names: Vec<String>,
    table: Vec<Vec<Vec<MultiPoly<C>>>>,
}

impl<C: Scalar> ConformalAlgebra<C> {
    pub fn new(kind: Kind, names: Vec<String>, table: Vec<Vec<Vec<MultiPoly<C>>>>) -> Result<Self> {
        let n = names.len();
        check_names(&names)?;
        if table.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: table.len(),
            });
        }
        for row in &table {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for entry in row {
                if entry.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: entry.len(),
                    });
                }
                check_table_vars(entry)?;
            }
        }
        Ok(ConformalAlgebra { kind, names, table })
    }

    /// The algebra with all products zero.
    pub fn abelian(kind: Kind, names: Vec<String>) -> Result<Self> {
        let n = names.len();
        Self::new(kind, names, vec![vec![vec![MultiPoly::zero(); n]; n]; n])
    }

    /// Replaces the product `e_i λ e_j`.
    pub fn set_product(&mut self, i: usize, j: usize, coords: Vec<MultiPoly<C>>) -> Result<()> {
        if coords.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: coords.len(),
            });
        }
        check_table_vars(&coords)?;
        self.table[i][j] = coords;
        Ok(())
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn entry(&self, i: usize, j: usize) -> &[MultiPoly<C>] {
        &self.table[i][j]
    }

    pub fn basis(&self, i: usize) -> Element<C> {
        Element::basis(self.rank(), i)
    }

    pub fn is_zero_table(&self) -> bool {
        self.table.iter().flatten().flatten().all(MultiPoly::is_zero)
    }

    fn ensure_rank(&self, e: &Element<C>) -> Result<()> {
        if e.rank() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: e.rank(),
            });
        }
        Ok(())
    }

    fn ensure_kind(&self, kind: Kind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: kind,
                found: self.kind,
            });
        }
        Ok(())
    }

    /// `x_s y` extended from the table by sesquilinearity. `s` should be
    /// affine in ∂, λ, μ (`λ`, `λ+μ`, `-λ-∂`, …).
    pub fn product_eval(&self, x: &Element<C>, y: &Element<C>, s: &MultiPoly<C>) -> Result<Element<C>> {
        self.ensure_rank(x)?;
        self.ensure_rank(y)?;
        Ok(self.product(x, y, s))
    }

    pub(crate) fn product(&self, x: &Element<C>, y: &Element<C>, s: &MultiPoly<C>) -> Element<C> {
        sesquilinear(x, y, s, self.rank(), |i, j| self.entry(i, j))
    }

    /// `[a_λ b] + [b_{-λ-∂} a] = 0` on all basis pairs.
    pub fn check_skew_symmetry(&self) -> Result<CheckReport<C>> {
        self.ensure_kind(Kind::Lie)?;
        let (l1, flip) = (lam(), flip_lam());
        let mut report = CheckReport::pass();
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                let (ei, ej) = (self.basis(i), self.basis(j));
                let residual = &self.product(&ei, &ej, &l1) + &self.product(&ej, &ei, &flip);
                report.record("skew-symmetry", &[i, j], residual);
            }
        }
        Ok(report)
    }

    /// `[a_λ[b_μ c]] - [[a_λ b]_{λ+μ} c] - [b_μ[a_λ c]] = 0` on basis triples.
    pub fn check_jacobi(&self) -> Result<CheckReport<C>> {
        self.ensure_kind(Kind::Lie)?;
        let (l1, l2, sum) = (lam(), mu(), &lam() + &mu());
        let n = self.rank();
        let mut report = CheckReport::pass();
        for i in 0..n {
            for j in 0..n {
                let ij = self.product(&self.basis(i), &self.basis(j), &l1);
                for k in 0..n {
                    let (a, b, c) = (self.basis(i), self.basis(j), self.basis(k));
                    let left = self.product(&a, &self.product(&b, &c, &l2), &l1);
                    let mid = self.product(&ij, &c, &sum);
                    let right = self.product(&b, &self.product(&a, &c, &l1), &l2);
                    report.record("jacobi", &[i, j, k], &(&left - &mid) - &right);
                }
            }
        }
        Ok(report)
    }

    /// `(a_λ b)_{λ+μ} c - a_λ(b_μ c) = 0` on basis triples.
    pub fn check_associativity(&self) -> Result<CheckReport<C>> {
        self.ensure_kind(Kind::Associative)?;
        let (l1, l2, sum) = (lam(), mu(), &lam() + &mu());
        let n = self.rank();
        let mut report = CheckReport::pass();
        for i in 0..n {
            for j in 0..n {
                let ij = self.product(&self.basis(i), &self.basis(j), &l1);
                for k in 0..n {
                    let left = self.product(&ij, &self.basis(k), &sum);
                    let right = self.product(
                        &self.basis(i),
                        &self.product(&self.basis(j), &self.basis(k), &l2),
                        &l1,
                    );
                    report.record("associativity", &[i, j, k], &left - &right);
                }
            }
        }
        Ok(report)
    }

    /// Skew-symmetry and Jacobi for Lie algebras, associativity otherwise.
    pub fn check_axioms(&self) -> CheckReport<C> {
        let checked = match self.kind {
            Kind::Lie => self.check_skew_symmetry().and_then(|mut r| {
                r.violations.extend(self.check_jacobi()?.violations);
                Ok(r)
            }),
            Kind::Associative => self.check_associativity(),
        };
        checked.expect("kind matches by construction")
    }
}

pub(crate) fn lam<C: Scalar>() -> MultiPoly<C> {
    MultiPoly::var(VarId::L1)
}

pub(crate) fn mu<C: Scalar>() -> MultiPoly<C> {
    MultiPoly::var(VarId::L2)
}

/// `-λ-∂`
pub(crate) fn flip_lam<C: Scalar>() -> MultiPoly<C> {
    -&(&MultiPoly::var(VarId::L1) + &MultiPoly::var(VarId::D))
}

/// `-μ-∂`
pub(crate) fn flip_mu<C: Scalar>() -> MultiPoly<C> {
    -&(&MultiPoly::var(VarId::L2) + &MultiPoly::var(VarId::D))
}
