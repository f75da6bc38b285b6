//! Sparse multivariate polynomials with exact coefficients.
//!
//! The variables are fixed: `D` is the derivation ∂, `L1` and `L2` are the
//! spectral parameters λ and μ, and `U(k)` are unknown coefficients used by
//! the constraint compiler. Monomials are ordered graded-lexicographically
//! with `D ≺ L1 ≺ L2 ≺ U(0) ≺ U(1) ≺ …`; terms are stored sorted and
//! rendered from the greatest monomial down, so the textual form is canonical.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarId {
    /// The derivation ∂.
    D,
    /// First spectral parameter λ.
    L1,
    /// Second spectral parameter μ.
    L2,
    /// Unknown coefficient `u<k>`.
    U(u32),
}

impl VarId {
    pub fn parse(name: &str) -> Option<VarId> {
        match name {
            "d" => Some(VarId::D),
            "l" => Some(VarId::L1),
            "m" => Some(VarId::L2),
            _ => {
                let digits = name.strip_prefix('u')?;
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                digits.parse().ok().map(VarId::U)
            }
        }
    }

    pub fn is_unknown(self) -> bool {
        matches!(self, VarId::U(_))
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::D => f.write_str("d"),
            VarId::L1 => f.write_str("l"),
            VarId::L2 => f.write_str("m"),
            VarId::U(k) => write!(f, "u{k}"),
        }
    }
}

/// A power product, stored as sorted `(variable, exponent)` pairs with no
/// zero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut acc: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *acc.entry(v).or_insert(0) += e;
        }
        Monomial(acc.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn pairs(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    /// Splits into the part over `vars` and the remaining cofactor.
    pub fn split(&self, vars: &[VarId]) -> (Monomial, Monomial) {
        let (inside, outside): (Vec<_>, Vec<_>) =
            self.0.iter().copied().partition(|(v, _)| vars.contains(v));
        (Monomial(inside), Monomial(outside))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_pairs(self.0.iter().chain(other.0.iter()).copied())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Dense exponent vectors compared left to right in variable order.
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&&(va, ea)), Some(&&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        a.next();
                        b.next();
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial over `C` in the variables [`VarId`].
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Eq> Eq for MultiPoly<C> {}

impl<C: Scalar> Default for MultiPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Scalar> MultiPoly<C> {
    pub fn zero() -> Self {
        MultiPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(C::from_int(n))
    }

    pub fn var(v: VarId) -> Self {
        Self::monomial(Monomial::var(v), C::one())
    }

    pub fn monomial(m: Monomial, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c·m`, keeping the no-zero-coefficient invariant.
    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.is_zero() {
            Some(C::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    /// Coefficient of the constant monomial.
    pub fn constant_term(&self) -> C {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Terms from the greatest monomial down.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> + '_ {
        self.terms.iter().rev()
    }

    pub fn leading(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    /// First variable (in variable order) that is not in `allowed`.
    pub fn var_outside(&self, allowed: &[VarId]) -> Option<VarId> {
        self.vars().into_iter().find(|v| !allowed.contains(v))
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Ring-homomorphic replacement of `v` by `r`.
    pub fn substitute(&self, v: VarId, r: &MultiPoly<C>) -> Self {
        if !self.contains_var(v) {
            return self.clone();
        }
        let mut powers: Vec<MultiPoly<C>> = vec![Self::one()];
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v) as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap() * r;
                powers.push(next);
            }
            let rest = Monomial(m.0.iter().copied().filter(|&(w, _)| w != v).collect());
            for (pm, pc) in &powers[e].terms {
                out.add_term(rest.mul(pm), c.clone() * pc.clone());
            }
        }
        out
    }

    pub fn eval_at(&self, v: VarId, c: &C) -> Self {
        self.substitute(v, &Self::constant(c.clone()))
    }

    /// Substitutes every variable bound in `values`.
    pub fn eval_partial(&self, values: &BTreeMap<VarId, C>) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in &m.0 {
                match values.get(&v) {
                    Some(x) => {
                        for _ in 0..e {
                            coeff = coeff * x.clone();
                        }
                    }
                    None => rest.push((v, e)),
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        out
    }

    /// Full evaluation; `None` when some variable is left unbound.
    pub fn evaluate(&self, values: &BTreeMap<VarId, C>) -> Option<C> {
        self.eval_partial(values).constant_value()
    }

    /// Coefficients of `v⁰, v¹, …` (each free of `v`).
    pub fn coefficient_list(&self, v: VarId) -> Vec<Self> {
        let mut out = vec![Self::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let e = m.exponent(v) as usize;
            let rest = Monomial(m.0.iter().copied().filter(|&(w, _)| w != v).collect());
            out[e].add_term(rest, c.clone());
        }
        out
    }

    /// Collects coefficients with respect to the monomials in `vars`; the
    /// values are polynomials in the remaining variables.
    pub fn split_by(&self, vars: &[VarId]) -> BTreeMap<Monomial, Self> {
        let mut out: BTreeMap<Monomial, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (inside, outside) = m.split(vars);
            out.entry(inside)
                .or_insert_with(Self::zero)
                .add_term(outside, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some((_, c)) => {
                let inv = C::one() / c.clone();
                self.scale(&inv)
            }
        }
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&C) -> C) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

impl<C: Scalar> From<VarId> for MultiPoly<C> {
    fn from(v: VarId) -> Self {
        Self::var(v)
    }
}

impl<C: Scalar> AddAssign<&MultiPoly<C>> for MultiPoly<C> {
    fn add_assign(&mut self, rhs: &MultiPoly<C>) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<C: Scalar> SubAssign<&MultiPoly<C>> for MultiPoly<C> {
    fn sub_assign(&mut self, rhs: &MultiPoly<C>) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl<C: Scalar> Add for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, rhs: &MultiPoly<C>) -> MultiPoly<C> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<C: Scalar> Sub for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn sub(self, rhs: &MultiPoly<C>) -> MultiPoly<C> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<C: Scalar> Mul for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, rhs: &MultiPoly<C>) -> MultiPoly<C> {
        let mut out = MultiPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Scalar> Neg for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn neg(self) -> MultiPoly<C> {
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $f:ident),*) => {$(
        impl<C: Scalar> $tr for MultiPoly<C> {
            type Output = MultiPoly<C>;
            fn $f(self, rhs: MultiPoly<C>) -> MultiPoly<C> {
                (&self).$f(&rhs)
            }
        }
        impl<C: Scalar> $tr<&MultiPoly<C>> for MultiPoly<C> {
            type Output = MultiPoly<C>;
            fn $f(self, rhs: &MultiPoly<C>) -> MultiPoly<C> {
                (&self).$f(rhs)
            }
        }
        impl<C: Scalar> $tr<MultiPoly<C>> for &MultiPoly<C> {
            type Output = MultiPoly<C>;
            fn $f(self, rhs: MultiPoly<C>) -> MultiPoly<C> {
                self.$f(&rhs)
            }
        }
    )*};
}

forward_owned!(Add::add, Sub::sub, Mul::mul);

impl<C: Scalar> Neg for MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn neg(self) -> MultiPoly<C> {
        -&self
    }
}

impl<C: Scalar> Zero for MultiPoly<C> {
    fn zero() -> Self {
        MultiPoly::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<C: Scalar> One for MultiPoly<C> {
    fn one() -> Self {
        MultiPoly::one()
    }
}

impl<C: Scalar> fmt::Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

impl<C: Scalar> FromStr for MultiPoly<C> {
    type Err = Error;

    /// Parses the canonical text form (and any expression over `+ - * / ^`
    /// and parentheses in the variables `d`, `l`, `m`, `u<k>`).
    fn from_str(s: &str) -> Result<Self> {
        let mut p = TextParser { src: s.as_bytes(), pos: 0 };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(out)
    }
}

struct TextParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl TextParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr<C: Scalar>(&mut self) -> Result<MultiPoly<C>> {
        let mut acc = self.term::<C>()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term<C: Scalar>(&mut self) -> Result<MultiPoly<C>> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let divisor = self.factor::<C>()?;
                    match divisor.constant_value() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&(C::one() / c)),
                        Some(_) => {
                            return Err(Error::Parse {
                                pos: at,
                                msg: "division by zero".into(),
                            })
                        }
                        None => {
                            return Err(Error::Parse {
                                pos: at,
                                msg: "division by a non-constant".into(),
                            })
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor<C: Scalar>(&mut self) -> Result<MultiPoly<C>> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.factor::<C>()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("expected exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom<C: Scalar>(&mut self) -> Result<MultiPoly<C>> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let c = C::from_str(text).map_err(|_| self.err("bad number"))?;
                Ok(MultiPoly::constant(c))
            }
            Some(b) if b.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                VarId::parse(name)
                    .map(MultiPoly::var)
                    .ok_or_else(|| Error::Parse {
                        pos: start,
                        msg: format!("unknown variable `{name}`"),
                    })
            }
            _ => Err(self.err("expected a number, variable or `(`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    type P = MultiPoly<Rational>;

    fn p(s: &str) -> P {
        s.parse().unwrap()
    }

    fn d() -> P {
        P::var(VarId::D)
    }
    fn l() -> P {
        P::var(VarId::L1)
    }
    fn m() -> P {
        P::var(VarId::L2)
    }

    #[test]
    fn arithmetic_examples() {
        let a = &d() + &l().scale(&Rational::from_int(2));
        assert_eq!(&a + &(-d()), l().scale(&Rational::from_int(2)));
        assert_eq!((&d() * &l()).to_string(), "d*l");
        assert_eq!((&a * &a).to_string(), "d^2 + 4*d*l + 4*l^2");
    }

    #[test]
    fn substitution_examples() {
        let a = p("d + 2*l");
        let flip = p("-l - d");
        assert_eq!(a.substitute(VarId::L1, &flip), p("-d - 2*l"));
        assert_eq!(
            a.substitute(VarId::L1, &(&l() + &m())).to_string(),
            "d + 2*l + 2*m"
        );
        // ((a-1)d + a l - b) at a = 1, b = 0, then l = 0
        let w = p("(1-1)*d + 1*l - 0");
        assert!(w.eval_at(VarId::L1, &Rational::zero()).is_zero());
    }

    #[test]
    fn coefficient_list_examples() {
        assert_eq!(p("d + 2*l").coefficient_list(VarId::L1), vec![d(), P::int(2)]);
        assert_eq!(p("d^2").coefficient_list(VarId::L1), vec![p("d^2")]);
        assert_eq!(
            p("3*(d + 2*l)").coefficient_list(VarId::L1),
            vec![p("3*d"), P::int(6)]
        );
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("d + 2*l").eval_at(VarId::L1, &Rational::zero()), d());
        assert!(p("l^2 - 1").eval_at(VarId::L1, &Rational::one()).is_zero());
        // 2 k(d) (k(d) - k(0)) with k constant 5
        let k = P::int(5);
        let k0 = k.eval_at(VarId::D, &Rational::zero());
        assert!((&(&P::int(2) * &k) * &(&k - &k0)).is_zero());
    }

    #[test]
    fn rendering() {
        assert_eq!(P::zero().to_string(), "0");
        assert_eq!(p("-d - 2*l").to_string(), "-d - 2*l");
        assert_eq!(p("1/2*d + 3/2*l - 1").to_string(), "1/2*d + 3/2*l - 1");
        assert_eq!(p("u0^2*d + u1").to_string(), "d*u0^2 + u1");
        assert_eq!(p("m*u3 - 7/3").to_string(), "m*u3 - 7/3");
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let mono = |s: &str| p(s).leading().unwrap().0.clone();
        assert!(mono("d^2") > mono("d*l"));
        assert!(mono("d*l") > mono("l^2"));
        assert!(mono("l^2") > mono("d"));
        assert!(mono("d") > mono("l"));
        assert!(mono("l") > mono("m"));
        assert!(mono("m") > mono("u0"));
        assert!(mono("u0") > mono("u1"));
    }

    #[test]
    fn parse_errors() {
        assert!("d +".parse::<P>().is_err());
        assert!("x".parse::<P>().is_err());
        assert!("d / l".parse::<P>().is_err());
        assert!("d / 0".parse::<P>().is_err());
        assert!("d - - ".parse::<P>().is_err());
    }

    #[test]
    fn unary_minus_binds_to_factors() {
        assert_eq!(p("d + -1"), p("d - 1"));
        assert_eq!(p("2*-l"), p("-2*l"));
        assert_eq!(p("-d^2"), -&p("d^2"));
        assert_eq!(p("--d"), p("d"));
    }

    #[test]
    fn split_by_collects_unknown_coefficients() {
        let q = p("u0*d + 2*u1*d + u0*l - 3");
        let parts = q.split_by(&[VarId::D, VarId::L1]);
        assert_eq!(parts[&Monomial::var(VarId::D)], p("u0 + 2*u1"));
        assert_eq!(parts[&Monomial::var(VarId::L1)], p("u0"));
        assert_eq!(parts[&Monomial::one()], P::int(-3));
    }

    fn arb_poly(vars: &'static [VarId]) -> impl Strategy<Value = P> {
        let term = (
            -4i64..=4,
            1i64..=3,
            proptest::collection::vec(0u32..=2, vars.len()),
        );
        proptest::collection::vec(term, 0..5).prop_map(move |terms| {
            P::from_terms(terms.into_iter().map(|(n, den, exps)| {
                (
                    Monomial::from_pairs(vars.iter().copied().zip(exps)),
                    Rational::from_ratio(n, den),
                )
            }))
        })
    }

    const VARS: &[VarId] = &[VarId::D, VarId::L1, VarId::L2, VarId::U(0)];
    const NO_M: &[VarId] = &[VarId::D, VarId::L1, VarId::U(0)];

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(VARS), b in arb_poly(VARS), c in arb_poly(VARS)) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a + &(-&a)).is_zero());
            prop_assert_eq!(&a - &b, &a + &(-&b));
        }

        #[test]
        fn addition_is_canonical(a in arb_poly(VARS), b in arb_poly(VARS)) {
            let ab = &a + &b;
            let ba = &b + &a;
            let lhs: Vec<_> = ab.terms().collect();
            let rhs: Vec<_> = ba.terms().collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn substitution_is_homomorphic(a in arb_poly(VARS), b in arb_poly(VARS), r in arb_poly(VARS)) {
            let s = |x: &P| x.substitute(VarId::L1, &r);
            prop_assert_eq!(s(&(&a * &b)), &s(&a) * &s(&b));
            prop_assert_eq!(s(&(&a + &b)), &s(&a) + &s(&b));
        }

        #[test]
        fn shift_then_clear(a in arb_poly(NO_M)) {
            let shifted = a.substitute(VarId::L1, &(&l() + &m()));
            prop_assert_eq!(shifted.eval_at(VarId::L2, &Rational::zero()), a);
        }

        #[test]
        fn coefficient_list_reassembles(a in arb_poly(VARS)) {
            let parts = a.coefficient_list(VarId::L1);
            let mut back = P::zero();
            for (k, c) in parts.iter().enumerate() {
                prop_assert!(!c.contains_var(VarId::L1));
                back += &(c * &l().pow(k as u32));
            }
            prop_assert_eq!(back, a);
        }

        #[test]
        fn text_round_trip(a in arb_poly(VARS)) {
            prop_assert_eq!(a.to_string().parse::<P>().unwrap(), a);
        }
    }
}
