//! Modules over conformal algebras, matched pairs and bicrossed products.

use std::sync::Arc;

use crate::algebra::{
    check_table_vars, flip_lam, flip_mu, lam, mu, sesquilinear, CheckReport, ConformalAlgebra, Element, Kind,
};
use crate::error::{Error, Result};
use crate::poly::{MultiPoly, VarId};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

type Table<C> = Vec<Vec<Vec<MultiPoly<C>>>>;

/// An action of `acting` on a free module of rank `carrier_rank`.
///
/// The table is indexed by operands in written order: `table[a][v]` holds
/// `a_λ v` for a left action and `table[v][a]` holds `v_λ a` for a right one.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleAction<C> {
    side: Side,
    acting: Arc<ConformalAlgebra<C>>,
    carrier_rank: usize,
    table: Table<C>,
}

impl<C: Scalar> ModuleAction<C> {
    pub fn new(side: Side, acting: Arc<ConformalAlgebra<C>>, carrier_rank: usize, table: Table<C>) -> Result<Self> {
        let (rows, cols) = match side {
            Side::Left => (acting.rank(), carrier_rank),
            Side::Right => (carrier_rank, acting.rank()),
        };
        if table.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: table.len(),
            });
        }
        for row in &table {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            for entry in row {
                if entry.len() != carrier_rank {
                    return Err(Error::DimensionMismatch {
                        expected: carrier_rank,
                        found: entry.len(),
                    });
                }
                check_table_vars(entry)?;
            }
        }
        Ok(ModuleAction {
            side,
            acting,
            carrier_rank,
            table,
        })
    }

    pub fn trivial(side: Side, acting: Arc<ConformalAlgebra<C>>, carrier_rank: usize) -> Self {
        let (rows, cols) = match side {
            Side::Left => (acting.rank(), carrier_rank),
            Side::Right => (carrier_rank, acting.rank()),
        };
        let table = vec![vec![vec![MultiPoly::zero(); carrier_rank]; cols]; rows];
        ModuleAction {
            side,
            acting,
            carrier_rank,
            table,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn acting(&self) -> &Arc<ConformalAlgebra<C>> {
        &self.acting
    }

    pub fn carrier_rank(&self) -> usize {
        self.carrier_rank
    }

    pub fn entry(&self, first: usize, second: usize) -> &[MultiPoly<C>] {
        &self.table[first][second]
    }

    pub fn set_entry(&mut self, first: usize, second: usize, coords: Vec<MultiPoly<C>>) -> Result<()> {
        if coords.len() != self.carrier_rank {
            return Err(Error::DimensionMismatch {
                expected: self.carrier_rank,
                found: coords.len(),
            });
        }
        check_table_vars(&coords)?;
        self.table[first][second] = coords;
        Ok(())
    }

    pub fn is_trivial(&self) -> bool {
        self.table.iter().flatten().flatten().all(MultiPoly::is_zero)
    }

    fn operand_ranks(&self) -> (usize, usize) {
        match self.side {
            Side::Left => (self.acting.rank(), self.carrier_rank),
            Side::Right => (self.carrier_rank, self.acting.rank()),
        }
    }

    /// `first_s second`, operands in written order.
    pub fn action_eval(&self, first: &Element<C>, second: &Element<C>, s: &MultiPoly<C>) -> Result<Element<C>> {
        let (r1, r2) = self.operand_ranks();
        for (e, r) in [(first, r1), (second, r2)] {
            if e.rank() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    found: e.rank(),
                });
            }
        }
        Ok(self.act(first, second, s))
    }

    pub(crate) fn act(&self, first: &Element<C>, second: &Element<C>, s: &MultiPoly<C>) -> Element<C> {
        sesquilinear(first, second, s, self.carrier_rank, |i, j| self.entry(i, j))
    }

    /// Checks the module identity for this side and the acting algebra's kind.
    pub fn check_module(&self) -> CheckReport<C> {
        let alg = &*self.acting;
        let (m, n) = (alg.rank(), self.carrier_rank);
        let a = |i| alg.basis(i);
        let v = |k| Element::basis(n, k);
        let (l1, l2, sum) = (lam(), mu(), &lam() + &mu());
        let mut report = CheckReport::pass();
        for i in 0..m {
            for j in 0..m {
                let ij = alg.product(&a(i), &a(j), &l1);
                for k in 0..n {
                    let (name, residual) = match (alg.kind(), self.side) {
                        // [a_λ b]_{λ+μ} v - a_λ(b_μ v) + b_μ(a_λ v)
                        (Kind::Lie, Side::Left) => {
                            let first = self.act(&ij, &v(k), &sum);
                            let second = self.act(&a(i), &self.act(&a(j), &v(k), &l2), &l1);
                            let third = self.act(&a(j), &self.act(&a(i), &v(k), &l1), &l2);
                            ("left module", &(&first - &second) + &third)
                        }
                        // v_μ[a_λ b] - (v_μ a)_{λ+μ} b + (v_μ b)_{-λ-∂} a
                        (Kind::Lie, Side::Right) => {
                            let first = self.act(&v(k), &ij, &l2);
                            let second = self.act(&self.act(&v(k), &a(i), &l2), &a(j), &sum);
                            let third = self.act(&self.act(&v(k), &a(j), &l2), &a(i), &flip_lam());
                            ("right module", &(&first - &second) + &third)
                        }
                        // (a_λ b)_{λ+μ} v - a_λ(b_μ v)
                        (Kind::Associative, Side::Left) => {
                            let first = self.act(&ij, &v(k), &sum);
                            let second = self.act(&a(i), &self.act(&a(j), &v(k), &l2), &l1);
                            ("left module", &first - &second)
                        }
                        // (v_λ a)_{λ+μ} b - v_λ(a_μ b)
                        (Kind::Associative, Side::Right) => {
                            let first = self.act(&self.act(&v(k), &a(i), &l1), &a(j), &sum);
                            let second = self.act(&v(k), &alg.product(&a(i), &a(j), &l2), &l1);
                            ("right module", &first - &second)
                        }
                    };
                    report.record(name, &[i, j, k], residual);
                }
            }
        }
        report
    }

    /// The Lie left action `a_λ v := -v_{-λ-∂} a` of a right action.
    pub fn right_to_left(&self) -> Result<Self> {
        self.convert(Side::Right, Side::Left)
    }

    /// The Lie right action `v_λ a := -a_{-λ-∂} v` of a left action.
    pub fn left_to_right(&self) -> Result<Self> {
        self.convert(Side::Left, Side::Right)
    }

    fn convert(&self, from: Side, to: Side) -> Result<Self> {
        if self.acting.kind() != Kind::Lie {
            return Err(Error::KindMismatch {
                expected: Kind::Lie,
                found: self.acting.kind(),
            });
        }
        if self.side != from {
            return Err(Error::SideMismatch(match from {
                Side::Left => "expected a left action",
                Side::Right => "expected a right action",
            }));
        }
        let flip = flip_lam::<C>();
        let (rows, cols) = self.operand_ranks();
        let table = (0..cols)
            .map(|j| {
                (0..rows)
                    .map(|i| self.table[i][j].iter().map(|c| -&c.substitute(VarId::L1, &flip)).collect())
                    .collect()
            })
            .collect();
        Ok(ModuleAction {
            side: to,
            acting: self.acting.clone(),
            carrier_rank: self.carrier_rank,
            table,
        })
    }
}

/// `(a ⇀_λ v) ◁_{λ+μ} b - a ⇀_λ (v ◁_μ b)` on all basis triples.
pub fn check_bimodule<C: Scalar>(left: &ModuleAction<C>, right: &ModuleAction<C>) -> Result<CheckReport<C>> {
    if left.side != Side::Left || right.side != Side::Right {
        return Err(Error::SideMismatch("bimodule needs a left and a right action"));
    }
    for act in [left, right] {
        if act.acting.kind() != Kind::Associative {
            return Err(Error::KindMismatch {
                expected: Kind::Associative,
                found: act.acting.kind(),
            });
        }
    }
    if left.carrier_rank != right.carrier_rank {
        return Err(Error::DimensionMismatch {
            expected: left.carrier_rank,
            found: right.carrier_rank,
        });
    }
    let n = left.carrier_rank;
    let (l1, l2, sum) = (lam(), mu(), &lam() + &mu());
    let mut report = CheckReport::pass();
    for i in 0..left.acting.rank() {
        let a = left.acting.basis(i);
        for k in 0..n {
            let v = Element::basis(n, k);
            let av = left.act(&a, &v, &l1);
            for j in 0..right.acting.rank() {
                let b = right.acting.basis(j);
                let first = right.act(&av, &b, &sum);
                let second = left.act(&a, &right.act(&v, &b, &l2), &l1);
                report.record("bimodule", &[i, k, j], &first - &second);
            }
        }
    }
    Ok(report)
}

/// A matched pair `(R, Q, ◁, ▷)`, or `(A, Q, ◁, ▷, ↼, ⇀)` in the associative case
/// with `A` stored as `r`.
///
/// `◁: Q × R → Q` and `▷: Q × R → R` in both cases; associative pairs add
/// `↼: R × Q → R` and `⇀: R × Q → Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchedPair<C> {
    kind: Kind,
    r: Arc<ConformalAlgebra<C>>,
    q: Arc<ConformalAlgebra<C>>,
    lhd: ModuleAction<C>,
    rhd: ModuleAction<C>,
    lharpoon: Option<ModuleAction<C>>,
    rharpoon: Option<ModuleAction<C>>,
}

fn expect_action<C: Scalar>(
    act: &ModuleAction<C>,
    side: Side,
    acting: &Arc<ConformalAlgebra<C>>,
    carrier: usize,
    what: &'static str,
) -> Result<()> {
    if act.side != side {
        return Err(Error::SideMismatch(what));
    }
    if act.acting != *acting {
        return Err(Error::SideMismatch(what));
    }
    if act.carrier_rank != carrier {
        return Err(Error::DimensionMismatch {
            expected: carrier,
            found: act.carrier_rank,
        });
    }
    Ok(())
}

impl<C: Scalar> MatchedPair<C> {
    /// `lhd` is a right action of `r` on `Q`, `rhd` a left action of `q` on `R`.
    pub fn lie(
        r: Arc<ConformalAlgebra<C>>,
        q: Arc<ConformalAlgebra<C>>,
        lhd: ModuleAction<C>,
        rhd: ModuleAction<C>,
    ) -> Result<Self> {
        for alg in [&r, &q] {
            if alg.kind() != Kind::Lie {
                return Err(Error::KindMismatch {
                    expected: Kind::Lie,
                    found: alg.kind(),
                });
            }
        }
        expect_action(&lhd, Side::Right, &r, q.rank(), "◁ must be a right action of R on Q")?;
        expect_action(&rhd, Side::Left, &q, r.rank(), "▷ must be a left action of Q on R")?;
        Ok(MatchedPair {
            kind: Kind::Lie,
            r,
            q,
            lhd,
            rhd,
            lharpoon: None,
            rharpoon: None,
        })
    }

    /// `◁`: right `A`-action on `Q`; `▷`: left `Q`-action on `A`;
    /// `↼`: right `Q`-action on `A`; `⇀`: left `A`-action on `Q`.
    pub fn associative(
        a: Arc<ConformalAlgebra<C>>,
        q: Arc<ConformalAlgebra<C>>,
        lhd: ModuleAction<C>,
        rhd: ModuleAction<C>,
        lharpoon: ModuleAction<C>,
        rharpoon: ModuleAction<C>,
    ) -> Result<Self> {
        for alg in [&a, &q] {
            if alg.kind() != Kind::Associative {
                return Err(Error::KindMismatch {
                    expected: Kind::Associative,
                    found: alg.kind(),
                });
            }
        }
        expect_action(&lhd, Side::Right, &a, q.rank(), "◁ must be a right action of A on Q")?;
        expect_action(&rhd, Side::Left, &q, a.rank(), "▷ must be a left action of Q on A")?;
        expect_action(&lharpoon, Side::Right, &q, a.rank(), "↼ must be a right action of Q on A")?;
        expect_action(&rharpoon, Side::Left, &a, q.rank(), "⇀ must be a left action of A on Q")?;
        Ok(MatchedPair {
            kind: Kind::Associative,
            r: a,
            q,
            lhd,
            rhd,
            lharpoon: Some(lharpoon),
            rharpoon: Some(rharpoon),
        })
    }

    /// The pair with every action zero; its bicrossed product is `R ⊕ Q`.
    pub fn trivial(r: Arc<ConformalAlgebra<C>>, q: Arc<ConformalAlgebra<C>>) -> Result<Self> {
        let (nr, nq) = (r.rank(), q.rank());
        let lhd = ModuleAction::trivial(Side::Right, r.clone(), nq);
        let rhd = ModuleAction::trivial(Side::Left, q.clone(), nr);
        match r.kind() {
            Kind::Lie => Self::lie(r, q, lhd, rhd),
            Kind::Associative => {
                let lharpoon = ModuleAction::trivial(Side::Right, q.clone(), nr);
                let rharpoon = ModuleAction::trivial(Side::Left, r.clone(), nq);
                Self::associative(r, q, lhd, rhd, lharpoon, rharpoon)
            }
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn r(&self) -> &Arc<ConformalAlgebra<C>> {
        &self.r
    }

    pub fn q(&self) -> &Arc<ConformalAlgebra<C>> {
        &self.q
    }

    pub fn lhd(&self) -> &ModuleAction<C> {
        &self.lhd
    }

    pub fn rhd(&self) -> &ModuleAction<C> {
        &self.rhd
    }

    pub fn lharpoon(&self) -> Option<&ModuleAction<C>> {
        self.lharpoon.as_ref()
    }

    pub fn rharpoon(&self) -> Option<&ModuleAction<C>> {
        self.rharpoon.as_ref()
    }

    /// `R ⋈ Q` on the basis of `R` followed by the basis of `Q`.
    pub fn build_bicrossed(&self) -> ConformalAlgebra<C> {
        let (nr, nq) = (self.r.rank(), self.q.rank());
        let n = nr + nq;
        let flip = flip_lam::<C>();
        let join = |rp: &[MultiPoly<C>], qp: &[MultiPoly<C>]| -> Vec<MultiPoly<C>> {
            rp.iter().chain(qp).cloned().collect()
        };
        let zero_r = vec![MultiPoly::zero(); nr];
        let zero_q = vec![MultiPoly::zero(); nq];
        let mut table = vec![vec![Vec::new(); n]; n];
        for (i, row) in table.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = match (i < nr, j < nr) {
                    (true, true) => join(self.r.entry(i, j), &zero_q),
                    (false, false) => join(&zero_r, self.q.entry(i - nr, j - nr)),
                    (false, true) => join(self.rhd.entry(i - nr, j), self.lhd.entry(i - nr, j)),
                    (true, false) => match (&self.lharpoon, &self.rharpoon) {
                        (Some(lh), Some(rh)) => join(lh.entry(i, j - nr), rh.entry(i, j - nr)),
                        _ => {
                            // a_λ y = -y_{-λ-∂} a
                            let neg_flip = |c: &MultiPoly<C>| -&c.substitute(VarId::L1, &flip);
                            let rp: Vec<_> = self.rhd.entry(j - nr, i).iter().map(neg_flip).collect();
                            let qp: Vec<_> = self.lhd.entry(j - nr, i).iter().map(neg_flip).collect();
                            join(&rp, &qp)
                        }
                    },
                };
            }
        }
        let names = self.r.names().iter().chain(self.q.names()).cloned().collect();
        ConformalAlgebra::new(self.kind, names, table).expect("bicrossed table is well formed")
    }

    fn components_and_modules(&self) -> CheckReport<C> {
        let mut report = CheckReport::pass();
        report.absorb("R: ", self.r.check_axioms());
        report.absorb("Q: ", self.q.check_axioms());
        report.absorb("◁: ", self.lhd.check_module());
        report.absorb("▷: ", self.rhd.check_module());
        if let (Some(lh), Some(rh)) = (&self.lharpoon, &self.rharpoon) {
            report.absorb("↼: ", lh.check_module());
            report.absorb("⇀: ", rh.check_module());
            report.absorb("⇀◁: ", check_bimodule(rh, &self.lhd).expect("sides fixed at construction"));
            report.absorb("▷↼: ", check_bimodule(&self.rhd, lh).expect("sides fixed at construction"));
        }
        report
    }

    /// Components pass their axioms, every action is a module (and the
    /// bimodule conditions hold in the associative case), and the bicrossed
    /// product passes its axioms.
    pub fn check_matched_pair(&self) -> CheckReport<C> {
        let mut report = self.components_and_modules();
        report.absorb("E: ", self.build_bicrossed().check_axioms());
        report
    }

    /// Evaluates the two compatibility conditions between `◁` and `▷`
    /// directly, together with the component and module checks.
    pub fn check_b1_b2_direct(&self) -> Result<CheckReport<C>> {
        if self.kind != Kind::Lie {
            return Err(Error::KindMismatch {
                expected: Kind::Lie,
                found: self.kind,
            });
        }
        let mut report = self.components_and_modules();
        let (r, q, lhd, rhd) = (&*self.r, &*self.q, &self.lhd, &self.rhd);
        let (l1, l2) = (lam::<C>(), mu::<C>());
        let (fl, fm) = (flip_lam::<C>(), flip_mu::<C>());
        let flip_sum = &fl - &l2;
        for xi in 0..q.rank() {
            let x = q.basis(xi);
            for ai in 0..r.rank() {
                let a = r.basis(ai);
                let xa = rhd.act(&x, &a, &fl);
                let x_lhd_a = lhd.act(&x, &a, &fl);
                for bi in 0..r.rank() {
                    let b = r.basis(bi);
                    // x ▷_{-λ-μ-∂} [a_λ b]
                    let lhs = rhd.act(&x, &r.product(&a, &b, &l1), &flip_sum);
                    let t1 = r.product(&xa, &b, &fm);
                    let t2 = r.product(&a, &rhd.act(&x, &b, &fm), &l1);
                    let t3 = rhd.act(&x_lhd_a, &b, &fm);
                    let t4 = rhd.act(&lhd.act(&x, &b, &fm), &a, &fl);
                    let residual = &(&(&(&lhs - &t1) - &t2) - &t3) + &t4;
                    report.record("B1", &[xi, ai, bi], residual);
                }
                for yi in 0..q.rank() {
                    let y = q.basis(yi);
                    // {x_μ y} ◁_{-λ-∂} a
                    let lhs = lhd.act(&q.product(&x, &y, &l2), &a, &fl);
                    let t1 = q.product(&x, &lhd.act(&y, &a, &fl), &l2);
                    let t2 = q.product(&x_lhd_a, &y, &(&l1 + &l2));
                    let t3 = lhd.act(&x, &rhd.act(&y, &a, &fl), &l2);
                    let t4 = lhd.act(&y, &xa, &flip_sum);
                    let residual = &(&(&(&lhs - &t1) - &t2) - &t3) + &t4;
                    report.record("B2", &[xi, ai, yi], residual);
                }
            }
        }
        Ok(report)
    }
}

/// Splits `e` into a matched pair along `r_basis` (the remaining basis
/// vectors span `Q`), reading every action off the products of `e`.
///
/// Both spans must be subalgebras.
pub fn decompose<C: Scalar>(e: &ConformalAlgebra<C>, r_basis: &[usize]) -> Result<MatchedPair<C>> {
    let n = e.rank();
    for (pos, &i) in r_basis.iter().enumerate() {
        if i >= n || r_basis[..pos].contains(&i) {
            return Err(Error::NotSubalgebra(format!("invalid basis index {i}")));
        }
    }
    let q_basis: Vec<usize> = (0..n).filter(|i| !r_basis.contains(i)).collect();
    let (nr, nq) = (r_basis.len(), q_basis.len());
    let split = |v: &[MultiPoly<C>]| -> (Vec<MultiPoly<C>>, Vec<MultiPoly<C>>) {
        (
            r_basis.iter().map(|&k| v[k].clone()).collect(),
            q_basis.iter().map(|&k| v[k].clone()).collect(),
        )
    };
    let names = |idx: &[usize]| idx.iter().map(|&i| e.names()[i].clone()).collect::<Vec<_>>();
    let is_zero = |v: &[MultiPoly<C>]| v.iter().all(MultiPoly::is_zero);

    let mut r_table = vec![vec![Vec::new(); nr]; nr];
    for (i, &ei) in r_basis.iter().enumerate() {
        for (j, &ej) in r_basis.iter().enumerate() {
            let (rp, qp) = split(e.entry(ei, ej));
            if !is_zero(&qp) {
                return Err(Error::NotSubalgebra(format!(
                    "{} λ {} leaves the first summand",
                    e.names()[ei],
                    e.names()[ej]
                )));
            }
            r_table[i][j] = rp;
        }
    }
    let mut q_table = vec![vec![Vec::new(); nq]; nq];
    for (i, &ei) in q_basis.iter().enumerate() {
        for (j, &ej) in q_basis.iter().enumerate() {
            let (rp, qp) = split(e.entry(ei, ej));
            if !is_zero(&rp) {
                return Err(Error::NotSubalgebra(format!(
                    "{} λ {} leaves the complement",
                    e.names()[ei],
                    e.names()[ej]
                )));
            }
            q_table[i][j] = qp;
        }
    }
    let r = Arc::new(ConformalAlgebra::new(e.kind(), names(r_basis), r_table)?);
    let q = Arc::new(ConformalAlgebra::new(e.kind(), names(&q_basis), q_table)?);

    // x_λ a for x in Q, a in R
    let mut lhd_t = vec![vec![Vec::new(); nr]; nq];
    let mut rhd_t = vec![vec![Vec::new(); nr]; nq];
    for (x, &ex) in q_basis.iter().enumerate() {
        for (a, &ea) in r_basis.iter().enumerate() {
            let (rp, qp) = split(e.entry(ex, ea));
            rhd_t[x][a] = rp;
            lhd_t[x][a] = qp;
        }
    }
    let lhd = ModuleAction::new(Side::Right, r.clone(), nq, lhd_t)?;
    let rhd = ModuleAction::new(Side::Left, q.clone(), nr, rhd_t)?;
    match e.kind() {
        Kind::Lie => MatchedPair::lie(r, q, lhd, rhd),
        Kind::Associative => {
            // a_λ y for a in R, y in Q
            let mut lh_t = vec![vec![Vec::new(); nq]; nr];
            let mut rh_t = vec![vec![Vec::new(); nq]; nr];
            for (a, &ea) in r_basis.iter().enumerate() {
                for (y, &ey) in q_basis.iter().enumerate() {
                    let (rp, qp) = split(e.entry(ea, ey));
                    lh_t[a][y] = rp;
                    rh_t[a][y] = qp;
                }
            }
            let lharpoon = ModuleAction::new(Side::Right, q.clone(), nr, lh_t)?;
            let rharpoon = ModuleAction::new(Side::Left, r.clone(), nq, rh_t)?;
            MatchedPair::associative(r, q, lhd, rhd, lharpoon, rharpoon)
        }
    }
}
