//! Submodules of free `C[∂]`-modules in Hermite normal form, derived series
//! and solvability.

use std::fmt;

use crate::algebra::{lam, ConformalAlgebra, Element};
use crate::deform::ModuleMap;
use crate::error::{Error, Result};
use crate::poly::{Monomial, MultiPoly, VarId};
use crate::scalar::Scalar;

/// Dense univariate polynomial in ∂, lowest degree first, no trailing zeros.
type Dense<C> = Vec<C>;

fn trim<C: Scalar>(mut p: Dense<C>) -> Dense<C> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn to_dense<C: Scalar>(p: &MultiPoly<C>) -> Dense<C> {
    trim(
        p.coefficient_list(VarId::D)
            .iter()
            .map(|c| c.constant_value().expect("entry is univariate in d"))
            .collect(),
    )
}

fn from_dense<C: Scalar>(p: &[C]) -> MultiPoly<C> {
    MultiPoly::from_terms(
        p.iter()
            .enumerate()
            .map(|(k, c)| (Monomial::from_pairs([(VarId::D, k as u32)]), c.clone())),
    )
}

/// `a - q·b`
fn sub_mul<C: Scalar>(a: &[C], q: &[C], b: &[C]) -> Dense<C> {
    let mut out: Vec<C> = a.to_vec();
    let len = (q.len() + b.len()).saturating_sub(1).max(a.len());
    out.resize(len, C::zero());
    for (i, qi) in q.iter().enumerate() {
        if qi.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() - qi.clone() * bj.clone();
        }
    }
    trim(out)
}

/// Quotient of `a` by nonzero `b`.
fn quotient<C: Scalar>(a: &[C], b: &[C]) -> Dense<C> {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() <= db {
        return Vec::new();
    }
    let mut q = vec![C::zero(); rem.len() - db];
    while rem.len() > db {
        let k = rem.len() - 1 - db;
        let c = rem[rem.len() - 1].clone() / lead.clone();
        for (j, bj) in b.iter().enumerate() {
            rem[k + j] = rem[k + j].clone() - c.clone() * bj.clone();
        }
        q[k] = c;
        rem.pop();
        rem = trim(rem);
    }
    q
}

fn row_sub_mul<C: Scalar>(target: &mut [Dense<C>], q: &[C], source: &[Dense<C>]) {
    if q.is_empty() {
        return;
    }
    for (t, s) in target.iter_mut().zip(source) {
        if !s.is_empty() {
            *t = sub_mul(t, q, s);
        }
    }
}

/// Row Hermite normal form over `C[∂]`: echelon by pivot column, monic
/// pivots, entries above each pivot reduced modulo it, zero rows dropped.
pub fn hermite_normal_form<C: Scalar>(m: &[Vec<MultiPoly<C>>]) -> Result<Vec<Vec<MultiPoly<C>>>> {
    let cols = m.first().map_or(0, Vec::len);
    for row in m {
        if row.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: row.len(),
            });
        }
        for p in row {
            if let Some(var) = p.var_outside(&[VarId::D]) {
                return Err(Error::VariableLeak { var, allowed: "d" });
            }
        }
    }
    let mut rows: Vec<Vec<Dense<C>>> = m.iter().map(|r| r.iter().map(to_dense).collect()).collect();
    let mut r = 0;
    for col in 0..cols {
        loop {
            // smallest-degree nonzero entry at or below row r becomes the pivot
            let best = (r..rows.len())
                .filter(|&i| !rows[i][col].is_empty())
                .min_by_key(|&i| rows[i][col].len());
            let Some(best) = best else { break };
            rows.swap(r, best);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][col].is_empty() {
                    continue;
                }
                let q = quotient(&rows[i][col], &rows[r][col]);
                let pivot = rows[r].clone();
                row_sub_mul(&mut rows[i], &q, &pivot);
                if !rows[i][col].is_empty() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r >= rows.len() || rows[r][col].is_empty() {
            continue;
        }
        let lead = rows[r][col].last().unwrap().clone();
        for p in rows[r].iter_mut() {
            for c in p.iter_mut() {
                *c = c.clone() / lead.clone();
            }
        }
        let pivot = rows[r].clone();
        for row in rows.iter_mut().take(r) {
            let q = quotient(&row[col], &pivot[col]);
            row_sub_mul(row, &q, &pivot);
        }
        r += 1;
    }
    rows.truncate(r);
    Ok(rows.iter().map(|row| row.iter().map(|p| from_dense(p)).collect()).collect())
}

/// A submodule of the free module of rank `ambient_rank`, stored by its
/// canonical generators, so equality of values is equality of submodules.
#[derive(Clone, Debug, PartialEq)]
pub struct Submodule<C> {
    ambient_rank: usize,
    rows: Vec<Vec<MultiPoly<C>>>,
}

fn check_vector<C: Scalar>(n: usize, v: &Element<C>) -> Result<()> {
    if v.rank() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.rank(),
        });
    }
    for p in v.coords() {
        if let Some(var) = p.var_outside(&[VarId::D]) {
            return Err(Error::VariableLeak { var, allowed: "d" });
        }
    }
    Ok(())
}

impl<C: Scalar> Submodule<C> {
    pub fn span(ambient_rank: usize, vectors: &[Element<C>]) -> Result<Self> {
        for v in vectors {
            check_vector(ambient_rank, v)?;
        }
        let rows: Vec<_> = vectors.iter().map(|v| v.coords().to_vec()).collect();
        let rows = if rows.is_empty() { rows } else { hermite_normal_form(&rows)? };
        Ok(Submodule { ambient_rank, rows })
    }

    pub fn zero(ambient_rank: usize) -> Self {
        Submodule {
            ambient_rank,
            rows: Vec::new(),
        }
    }

    pub fn full(ambient_rank: usize) -> Self {
        let rows = (0..ambient_rank)
            .map(|i| {
                (0..ambient_rank)
                    .map(|j| if i == j { MultiPoly::one() } else { MultiPoly::zero() })
                    .collect()
            })
            .collect();
        Submodule { ambient_rank, rows }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// The canonical generators.
    pub fn generators(&self) -> Vec<Element<C>> {
        self.rows.iter().map(|r| Element::from_coords(r.clone())).collect()
    }

    pub fn rows(&self) -> &[Vec<MultiPoly<C>>] {
        &self.rows
    }

    pub fn member(&self, v: &Element<C>) -> Result<bool> {
        check_vector(self.ambient_rank, v)?;
        let mut rest: Vec<Dense<C>> = v.coords().iter().map(to_dense).collect();
        for row in &self.rows {
            let row: Vec<Dense<C>> = row.iter().map(to_dense).collect();
            let col = row.iter().position(|p| !p.is_empty()).expect("canonical rows are nonzero");
            let q = quotient(&rest[col], &row[col]);
            row_sub_mul(&mut rest, &q, &row);
            if !rest[col].is_empty() {
                return Ok(false);
            }
        }
        Ok(rest.iter().all(Vec::is_empty))
    }

    pub fn contains(&self, other: &Submodule<C>) -> Result<bool> {
        for g in other.generators() {
            if !self.member(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn submodule_equals(&self, other: &Submodule<C>) -> Result<bool> {
        if self.ambient_rank != other.ambient_rank {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_rank,
                found: other.ambient_rank,
            });
        }
        Ok(self == other)
    }

    pub fn rendered(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
    }
}

/// The span of all λ-coefficients of `g λ h` over generator pairs of `s`.
pub fn derived_subalgebra<C: Scalar>(a: &ConformalAlgebra<C>, s: &Submodule<C>) -> Result<Submodule<C>> {
    if s.ambient_rank != a.rank() {
        return Err(Error::DimensionMismatch {
            expected: a.rank(),
            found: s.ambient_rank,
        });
    }
    let gens = s.generators();
    let l1 = lam::<C>();
    let mut vectors = Vec::new();
    for g in &gens {
        for h in &gens {
            vectors.extend(lambda_coefficients(&a.product(g, h, &l1)));
        }
    }
    Submodule::span(a.rank(), &vectors)
}

/// Splits an element polynomial in λ into its coefficient vectors.
fn lambda_coefficients<C: Scalar>(x: &Element<C>) -> Vec<Element<C>> {
    let lists: Vec<Vec<MultiPoly<C>>> = x.coords().iter().map(|c| c.coefficient_list(VarId::L1)).collect();
    let top = lists.iter().map(Vec::len).max().unwrap_or(0);
    (0..top)
        .map(|k| Element::from_coords(lists.iter().map(|l| l.get(k).cloned().unwrap_or_else(MultiPoly::zero)).collect()))
        .filter(|e| !e.is_zero())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solvability {
    /// The derived series reaches zero at this step.
    Solvable(usize),
    /// The derived series stabilizes at a nonzero submodule.
    NotSolvable,
    /// Neither happened within the depth limit.
    Unknown,
}

impl fmt::Display for Solvability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Solvability::Solvable(k) => write!(f, "solvable({k})"),
            Solvability::NotSolvable => f.write_str("not_solvable"),
            Solvability::Unknown => f.write_str("unknown"),
        }
    }
}

pub const DEFAULT_MAX_DEPTH: usize = 10;

/// Follows the derived series from the full module.
pub fn is_solvable<C: Scalar>(a: &ConformalAlgebra<C>, max_depth: usize) -> Solvability {
    derived_series(a, max_depth).0
}

/// The verdict together with the computed terms of the derived series.
pub fn derived_series<C: Scalar>(a: &ConformalAlgebra<C>, max_depth: usize) -> (Solvability, Vec<Submodule<C>>) {
    let mut series = vec![Submodule::full(a.rank())];
    for k in 0..=max_depth {
        let cur = &series[k];
        if cur.is_zero() {
            return (Solvability::Solvable(k), series);
        }
        if k == max_depth {
            break;
        }
        let next = derived_subalgebra(a, cur).expect("series stays in the ambient module");
        if next == *cur {
            return (Solvability::NotSolvable, series);
        }
        series.push(next);
    }
    (Solvability::Unknown, series)
}

pub fn is_abelian<C: Scalar>(a: &ConformalAlgebra<C>) -> bool {
    a.is_zero_table()
}

/// The same algebra on the basis `f_i = Σ_j p_ij e_j`; `p` must be unimodular.
pub fn change_basis<C: Scalar>(a: &ConformalAlgebra<C>, p: &ModuleMap<C>) -> Result<ConformalAlgebra<C>> {
    if p.source_rank() != a.rank() {
        return Err(Error::DimensionMismatch {
            expected: a.rank(),
            found: p.source_rank(),
        });
    }
    let inv = p.inverse()?;
    let l1 = lam::<C>();
    let n = a.rank();
    let table = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| inv.apply(&a.product(&p.image(i), &p.image(j), &l1)).into_coords())
                .collect()
        })
        .collect();
    ConformalAlgebra::new(a.kind(), a.names().to_vec(), table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::decompose;
    use crate::algebra::Kind;
    use crate::deform::{deformed_algebra, DeformationMap, Morphism};
    use crate::{Poly, Rational};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    fn rows(rs: &[&[&str]]) -> Vec<Vec<Poly>> {
        rs.iter().map(|r| r.iter().map(|s| p(s)).collect()).collect()
    }

    fn el(cs: &[&str]) -> Element<Rational> {
        Element::from_coords(cs.iter().map(|s| p(s)).collect())
    }

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn vir() -> ConformalAlgebra<Rational> {
        let mut a = ConformalAlgebra::abelian(Kind::Lie, names(&["L"])).unwrap();
        a.set_product(0, 0, vec![p("d + 2*l")]).unwrap();
        a
    }

    fn tilde_q(c: &str) -> ConformalAlgebra<Rational> {
        let mut t = ConformalAlgebra::abelian(Kind::Lie, names(&["Y", "M"])).unwrap();
        t.set_product(0, 0, vec![p("d + 2*l"), p("d + 2*l")]).unwrap();
        t.set_product(0, 1, vec![p("0"), p(&format!("d + 2*({c})"))]).unwrap();
        t.set_product(1, 0, vec![p("0"), p(&format!("-(d + 2*({c}))"))]).unwrap();
        t
    }

    fn sv_q_phi(a: &str, b: &str) -> ConformalAlgebra<Rational> {
        let mut e = ConformalAlgebra::abelian(Kind::Lie, names(&["L", "N", "Y", "M"])).unwrap();
        let at = |k: usize, c: &str| (0..4).map(|i| if i == k { p(c) } else { p("0") }).collect::<Vec<_>>();
        for (i, j, k, c) in [
            (0, 0, 0, "d + 2*l"),
            (0, 2, 2, "d + 3/2*l"),
            (2, 0, 2, "1/2*d + 3/2*l"),
            (0, 3, 3, "d + l"),
            (3, 0, 3, "l"),
            (2, 2, 3, "d + 2*l"),
            (0, 1, 1, "d + l"),
            (1, 0, 1, "l"),
            (3, 1, 3, "-2"),
            (1, 3, 3, "2"),
            (2, 1, 2, "-1"),
            (1, 2, 2, "1"),
        ] {
            e.set_product(i, j, at(k, c)).unwrap();
        }
        let mp = decompose(&e, &[0, 1]).unwrap();
        let g = format!("({a})/2*d + ({b})");
        let m = crate::deform::ModuleMap::new(2, 2, rows(&[&[a, &g], &["0", "0"]])).unwrap();
        deformed_algebra(&mp, &DeformationMap::new(&mp, m).unwrap()).0
    }

    #[test]
    fn hnf_examples() {
        assert_eq!(hermite_normal_form(&rows(&[&["d"], &["d^2"]])).unwrap(), rows(&[&["d"]]));
        assert_eq!(hermite_normal_form(&rows(&[&["2"]])).unwrap(), rows(&[&["1"]]));
        assert_eq!(
            hermite_normal_form(&rows(&[&["0", "1"], &["d", "0"]])).unwrap(),
            rows(&[&["d", "0"], &["0", "1"]])
        );
        // reduction above the pivot
        assert_eq!(
            hermite_normal_form(&rows(&[&["1", "d^2 + 1"], &["0", "2*d"]])).unwrap(),
            rows(&[&["1", "1"], &["0", "d"]])
        );
        assert!(matches!(
            hermite_normal_form(&rows(&[&["l"]])),
            Err(Error::VariableLeak { .. })
        ));
    }

    #[test]
    fn span_and_membership() {
        let full = Submodule::<Rational>::full(1);
        let s = Submodule::span(1, &[el(&["d"]), el(&["2"])]).unwrap();
        assert!(s.submodule_equals(&full).unwrap());
        assert!(Submodule::<Rational>::span(2, &[]).unwrap().is_zero());
        let line = Submodule::span(2, &[el(&["1", "-1"])]).unwrap();
        assert_eq!(line.rows(), rows(&[&["1", "-1"]]).as_slice());
        let dl = Submodule::span(1, &[el(&["d"])]).unwrap();
        assert!(dl.member(&el(&["d^2"])).unwrap());
        assert!(!dl.member(&el(&["1"])).unwrap());
        assert!(dl.member(&el(&["0"])).unwrap());
        assert!(!line.member(&el(&["1", "0"])).unwrap());
        assert!(line.member(&el(&["d", "-d"])).unwrap());
        assert!(matches!(dl.member(&el(&["1", "0"])), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            Submodule::span(1, &[el(&["l"])]),
            Err(Error::VariableLeak { .. })
        ));
    }

    #[test]
    fn derived_subalgebras() {
        let ab = ConformalAlgebra::<Rational>::abelian(Kind::Lie, names(&["a", "b", "c"])).unwrap();
        assert!(derived_subalgebra(&ab, &Submodule::full(3)).unwrap().is_zero());
        assert_eq!(derived_subalgebra(&vir(), &Submodule::full(1)).unwrap(), Submodule::full(1));
        let q01 = sv_q_phi("0", "1");
        let m_line = Submodule::span(2, &[el(&["0", "1"])]).unwrap();
        assert_eq!(derived_subalgebra(&q01, &Submodule::full(2)).unwrap(), m_line);
    }

    #[test]
    fn solvability() {
        let ab = ConformalAlgebra::<Rational>::abelian(Kind::Lie, names(&["a"])).unwrap();
        assert_eq!(is_solvable(&ab, DEFAULT_MAX_DEPTH), Solvability::Solvable(1));
        assert_eq!(is_solvable(&vir(), DEFAULT_MAX_DEPTH), Solvability::NotSolvable);
        assert_eq!(is_solvable(&sv_q_phi("0", "1"), DEFAULT_MAX_DEPTH), Solvability::Solvable(2));
        assert_eq!(is_solvable(&sv_q_phi("0", "0"), DEFAULT_MAX_DEPTH), Solvability::Solvable(2));
        assert_eq!(is_solvable(&sv_q_phi("2", "1"), DEFAULT_MAX_DEPTH), Solvability::NotSolvable);
        assert_eq!(is_solvable(&tilde_q("1"), DEFAULT_MAX_DEPTH), Solvability::NotSolvable);
        assert_eq!(is_solvable(&sv_q_phi("0", "1"), 1), Solvability::Unknown);
        assert_eq!(Solvability::Solvable(2).to_string(), "solvable(2)");
    }

    #[test]
    fn abelian_checks() {
        let ab = ConformalAlgebra::<Rational>::abelian(Kind::Lie, names(&["a", "b", "c"])).unwrap();
        assert!(is_abelian(&ab));
        assert!(!is_abelian(&vir()));
        let mut q0 = ConformalAlgebra::<Rational>::abelian(Kind::Lie, names(&["W"])).unwrap();
        q0.set_product(0, 0, vec![&p("0") * &p("d + 2*l")]).unwrap();
        assert!(is_abelian(&q0));
    }

    #[test]
    fn change_basis_is_an_isomorphism() {
        let a = tilde_q("1");
        let pm = ModuleMap::new(2, 2, rows(&[&["1", "d"], &["0", "-2"]])).unwrap();
        let b = change_basis(&a, &pm).unwrap();
        assert!(b.check_axioms().passed());
        let h = Morphism::new(Arc::new(b), Arc::new(a.clone()), pm).unwrap();
        assert!(h.is_isomorphism());
        let singular = ModuleMap::new(2, 2, rows(&[&["d", "0"], &["0", "1"]])).unwrap();
        assert!(matches!(change_basis(&a, &singular), Err(Error::NotInvertible(_))));
    }

    fn arb_dpoly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec(-3i64..=3, 0..4).prop_map(|cs| {
            Poly::from_terms(
                cs.into_iter()
                    .enumerate()
                    .map(|(k, c)| (Monomial::from_pairs([(VarId::D, k as u32)]), Rational::from_int(c))),
            )
        })
    }

    fn arb_vectors(n: usize) -> impl Strategy<Value = Vec<Element<Rational>>> {
        proptest::collection::vec(proptest::collection::vec(arb_dpoly(), n).prop_map(Element::from_coords), 0..4)
    }

    fn arb_linear() -> impl Strategy<Value = Poly> {
        (-2i64..=2, -2i64..=2).prop_map(|(a, b)| &Poly::int(a) + &(&Poly::int(b) * &Poly::var(VarId::D)))
    }

    /// Unimodular matrices as products of elementary operations.
    fn arb_unimodular() -> impl Strategy<Value = ModuleMap<Rational>> {
        (arb_linear(), arb_linear(), 1i64..=3, proptest::bool::ANY).prop_map(|(x, y, c, swap)| {
            let upper = ModuleMap::new(2, 2, vec![vec![Poly::one(), x], vec![Poly::zero(), Poly::int(c)]]).unwrap();
            let lower = ModuleMap::new(2, 2, vec![vec![Poly::one(), Poly::zero()], vec![y, Poly::one()]]).unwrap();
            let m = upper.then(&lower).unwrap();
            if swap {
                let s = ModuleMap::new(2, 2, rows(&[&["0", "1"], &["1", "0"]])).unwrap();
                m.then(&s).unwrap()
            } else {
                m
            }
        })
    }

    proptest! {
        #[test]
        fn hnf_idempotent_and_row_space_preserving(vs in arb_vectors(3)) {
            let s = Submodule::span(3, &vs).unwrap();
            if !s.is_zero() {
                prop_assert_eq!(hermite_normal_form(s.rows()).unwrap(), s.rows().to_vec());
            }
            for v in &vs {
                prop_assert!(s.member(v).unwrap());
            }
            let back = Submodule::span(3, &vs).unwrap();
            for g in s.generators() {
                prop_assert!(back.member(&g).unwrap());
            }
        }

        #[test]
        fn span_ignores_order(vs in arb_vectors(2)) {
            let mut rev = vs.clone();
            rev.reverse();
            prop_assert_eq!(Submodule::span(2, &vs).unwrap(), Submodule::span(2, &rev).unwrap());
        }

        #[test]
        fn derived_is_monotone(vs in arb_vectors(2), extra in arb_vectors(2)) {
            let a = tilde_q("1");
            let small = Submodule::span(2, &vs).unwrap();
            let mut all = vs.clone();
            all.extend(extra);
            let big = Submodule::span(2, &all).unwrap();
            prop_assert!(big.contains(&small).unwrap());
            let (ds, db) = (derived_subalgebra(&a, &small).unwrap(), derived_subalgebra(&a, &big).unwrap());
            prop_assert!(db.contains(&ds).unwrap());
        }

        #[test]
        fn derived_contains_products_of_arbitrary_elements(vs in arb_vectors(2), x in proptest::collection::vec(arb_dpoly(), 2), y in proptest::collection::vec(arb_dpoly(), 2)) {
            let a = tilde_q("1");
            let s = Submodule::span(2, &vs).unwrap();
            let gens = s.generators();
            // arbitrary elements of S: ∂-combinations of its generators
            let combine = |cs: &[Poly]| gens.iter().zip(cs).fold(Element::zero(2), |acc, (g, c)| &acc + &g.scale(c));
            let (u, v) = (combine(&x), combine(&y));
            let d = derived_subalgebra(&a, &s).unwrap();
            for coeff in lambda_coefficients(&a.product(&u, &v, &lam())) {
                prop_assert!(d.member(&coeff).unwrap());
            }
        }

        #[test]
        fn solvability_survives_basis_change(pm in arb_unimodular(), c in prop::sample::select(vec!["1", "0", "-1/2"])) {
            let a = tilde_q(c);
            let b = change_basis(&a, &pm).unwrap();
            prop_assert_eq!(is_solvable(&b, DEFAULT_MAX_DEPTH), is_solvable(&a, DEFAULT_MAX_DEPTH));
            let q = sv_q_phi("0", "1");
            prop_assert_eq!(is_solvable(&change_basis(&q, &pm).unwrap(), DEFAULT_MAX_DEPTH), Solvability::Solvable(2));
        }
    }
}
