//! Deformation maps, φ-deformed algebras, morphisms and equivalence of
//! deformation maps.

use std::sync::Arc;

use crate::actions::MatchedPair;
use crate::algebra::{flip_lam, lam, CheckReport, ConformalAlgebra, Element, Kind};
use crate::error::{Error, Result};
use crate::poly::{MultiPoly, VarId};
use crate::scalar::Scalar;

/// A `C[∂]`-linear map between free modules; row `j` is the image of basis
/// vector `j`, so `out_k = Σ_j x_j · m_jk`.
///
/// Entries are polynomials in ∂. Maps built by the constraint compiler may
/// also carry unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleMap<C> {
    source_rank: usize,
    target_rank: usize,
    matrix: Vec<Vec<MultiPoly<C>>>,
}

fn check_map_entry<C: Scalar>(p: &MultiPoly<C>, allow_unknowns: bool) -> Result<()> {
    for v in p.vars() {
        let ok = v == VarId::D || (allow_unknowns && v.is_unknown());
        if !ok {
            return Err(Error::VariableLeak {
                var: v,
                allowed: if allow_unknowns { "d and unknowns" } else { "d" },
            });
        }
    }
    Ok(())
}

impl<C: Scalar> ModuleMap<C> {
    pub fn new(source_rank: usize, target_rank: usize, matrix: Vec<Vec<MultiPoly<C>>>) -> Result<Self> {
        Self::build(source_rank, target_rank, matrix, false)
    }

    /// Like [`ModuleMap::new`], but entries may contain unknowns `u<k>`.
    pub fn symbolic(source_rank: usize, target_rank: usize, matrix: Vec<Vec<MultiPoly<C>>>) -> Result<Self> {
        Self::build(source_rank, target_rank, matrix, true)
    }

    fn build(
        source_rank: usize,
        target_rank: usize,
        matrix: Vec<Vec<MultiPoly<C>>>,
        allow_unknowns: bool,
    ) -> Result<Self> {
        if matrix.len() != source_rank {
            return Err(Error::DimensionMismatch {
                expected: source_rank,
                found: matrix.len(),
            });
        }
        for row in &matrix {
            if row.len() != target_rank {
                return Err(Error::DimensionMismatch {
                    expected: target_rank,
                    found: row.len(),
                });
            }
            for p in row {
                check_map_entry(p, allow_unknowns)?;
            }
        }
        Ok(ModuleMap {
            source_rank,
            target_rank,
            matrix,
        })
    }

    pub fn zero(source_rank: usize, target_rank: usize) -> Self {
        ModuleMap {
            source_rank,
            target_rank,
            matrix: vec![vec![MultiPoly::zero(); target_rank]; source_rank],
        }
    }

    pub fn identity(rank: usize) -> Self {
        let mut m = Self::zero(rank, rank);
        for i in 0..rank {
            m.matrix[i][i] = MultiPoly::one();
        }
        m
    }

    /// Diagonal map `e_i ↦ d_i e_i`.
    pub fn diagonal(entries: Vec<MultiPoly<C>>) -> Result<Self> {
        let n = entries.len();
        let mut m = Self::zero(n, n);
        for (i, d) in entries.into_iter().enumerate() {
            check_map_entry(&d, true)?;
            m.matrix[i][i] = d;
        }
        Ok(m)
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn matrix(&self) -> &[Vec<MultiPoly<C>>] {
        &self.matrix
    }

    pub fn entry(&self, j: usize, k: usize) -> &MultiPoly<C> {
        &self.matrix[j][k]
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(MultiPoly::is_zero)
    }

    pub fn apply_map(&self, x: &Element<C>) -> Result<Element<C>> {
        if x.rank() != self.source_rank {
            return Err(Error::DimensionMismatch {
                expected: self.source_rank,
                found: x.rank(),
            });
        }
        Ok(self.apply(x))
    }

    pub(crate) fn apply(&self, x: &Element<C>) -> Element<C> {
        let mut out = vec![MultiPoly::zero(); self.target_rank];
        for (xj, row) in x.coords().iter().zip(&self.matrix) {
            if xj.is_zero() {
                continue;
            }
            for (o, m) in out.iter_mut().zip(row) {
                if !m.is_zero() {
                    *o += &(xj * m);
                }
            }
        }
        Element::from_coords(out)
    }

    /// The image of basis vector `j`.
    pub fn image(&self, j: usize) -> Element<C> {
        Element::from_coords(self.matrix[j].clone())
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ModuleMap<C>) -> Result<Self> {
        if self.target_rank != next.source_rank {
            return Err(Error::DimensionMismatch {
                expected: self.target_rank,
                found: next.source_rank,
            });
        }
        let matrix = self.matrix.iter().map(|row| next.apply(&Element::from_coords(row.clone())).into_coords()).collect();
        Ok(ModuleMap {
            source_rank: self.source_rank,
            target_rank: next.target_rank,
            matrix,
        })
    }

    fn ensure_square(&self) -> Result<()> {
        if self.source_rank != self.target_rank {
            return Err(Error::DimensionMismatch {
                expected: self.source_rank,
                found: self.target_rank,
            });
        }
        Ok(())
    }

    pub fn determinant(&self) -> Result<MultiPoly<C>> {
        self.ensure_square()?;
        Ok(det(&self.matrix))
    }

    /// True iff the determinant is a nonzero constant, i.e. the map is a
    /// module automorphism.
    pub fn is_unimodular(&self) -> bool {
        self.determinant()
            .ok()
            .and_then(|d| d.constant_value())
            .is_some_and(|c| !c.is_zero())
    }

    /// The inverse map, via the adjugate over a constant determinant.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.determinant()?;
        let c = match d.constant_value() {
            Some(c) if !c.is_zero() => c,
            _ => return Err(Error::NotInvertible(d.to_string())),
        };
        let n = self.source_rank;
        let inv_c = C::one() / c;
        let mut matrix = vec![vec![MultiPoly::zero(); n]; n];
        for (i, row) in self.matrix.iter().enumerate() {
            for j in 0..row.len() {
                let cof = det(&minor(&self.matrix, i, j));
                let sign = if (i + j) % 2 == 0 { inv_c.clone() } else { -inv_c.clone() };
                // adj(M)[j][i] = cofactor(i, j)
                matrix[j][i] = cof.scale(&sign);
            }
        }
        Ok(ModuleMap {
            source_rank: n,
            target_rank: n,
            matrix,
        })
    }

    pub fn substitute(&self, v: VarId, r: &MultiPoly<C>) -> Self {
        ModuleMap {
            source_rank: self.source_rank,
            target_rank: self.target_rank,
            matrix: self
                .matrix
                .iter()
                .map(|row| row.iter().map(|p| p.substitute(v, r)).collect())
                .collect(),
        }
    }

    pub fn rendered(&self) -> Vec<Vec<String>> {
        self.matrix.iter().map(|row| row.iter().map(ToString::to_string).collect()).collect()
    }
}

fn minor<C: Scalar>(m: &[Vec<MultiPoly<C>>], row: usize, col: usize) -> Vec<Vec<MultiPoly<C>>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, p)| p.clone()).collect())
        .collect()
}

/// Laplace expansion along the first row; ranks here are small.
pub(crate) fn det<C: Scalar>(m: &[Vec<MultiPoly<C>>]) -> MultiPoly<C> {
    match m.len() {
        0 => MultiPoly::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = MultiPoly::zero();
            for (j, p) in m[0].iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let term = p * &det(&minor(m, 0, j));
                if j % 2 == 0 {
                    acc += &term;
                } else {
                    acc -= &term;
                }
            }
            acc
        }
    }
}

/// A module map `φ: Q → R` for a matched pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationMap<C> {
    map: ModuleMap<C>,
}

impl<C: Scalar> DeformationMap<C> {
    pub fn new(mp: &MatchedPair<C>, map: ModuleMap<C>) -> Result<Self> {
        if map.source_rank != mp.q().rank() {
            return Err(Error::DimensionMismatch {
                expected: mp.q().rank(),
                found: map.source_rank,
            });
        }
        if map.target_rank != mp.r().rank() {
            return Err(Error::DimensionMismatch {
                expected: mp.r().rank(),
                found: map.target_rank,
            });
        }
        Ok(DeformationMap { map })
    }

    pub fn zero(mp: &MatchedPair<C>) -> Self {
        DeformationMap {
            map: ModuleMap::zero(mp.q().rank(), mp.r().rank()),
        }
    }

    pub fn map(&self) -> &ModuleMap<C> {
        &self.map
    }

    pub fn apply_map(&self, x: &Element<C>) -> Result<Element<C>> {
        self.map.apply_map(x)
    }
}

/// A candidate algebra morphism given by its module map.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphism<C> {
    source: Arc<ConformalAlgebra<C>>,
    target: Arc<ConformalAlgebra<C>>,
    map: ModuleMap<C>,
}

impl<C: Scalar> Morphism<C> {
    pub fn new(source: Arc<ConformalAlgebra<C>>, target: Arc<ConformalAlgebra<C>>, map: ModuleMap<C>) -> Result<Self> {
        if source.kind() != target.kind() {
            return Err(Error::KindMismatch {
                expected: source.kind(),
                found: target.kind(),
            });
        }
        if map.source_rank != source.rank() {
            return Err(Error::DimensionMismatch {
                expected: source.rank(),
                found: map.source_rank,
            });
        }
        if map.target_rank != target.rank() {
            return Err(Error::DimensionMismatch {
                expected: target.rank(),
                found: map.target_rank,
            });
        }
        Ok(Morphism { source, target, map })
    }

    pub fn source(&self) -> &Arc<ConformalAlgebra<C>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ConformalAlgebra<C>> {
        &self.target
    }

    pub fn map(&self) -> &ModuleMap<C> {
        &self.map
    }

    pub fn apply_map(&self, x: &Element<C>) -> Result<Element<C>> {
        self.map.apply_map(x)
    }

    /// `h(e_i λ e_j) = h(e_i) λ h(e_j)` on all basis pairs.
    pub fn check_morphism(&self) -> CheckReport<C> {
        let l1 = lam::<C>();
        let mut report = CheckReport::pass();
        for i in 0..self.source.rank() {
            for j in 0..self.source.rank() {
                let src = self.source.product(&self.source.basis(i), &self.source.basis(j), &l1);
                let tgt = self.target.product(&self.map.image(i), &self.map.image(j), &l1);
                report.record("morphism", &[i, j], &self.map.apply(&src) - &tgt);
            }
        }
        report
    }

    /// A morphism whose module map is an automorphism of free modules.
    pub fn is_isomorphism(&self) -> bool {
        self.map.is_unimodular() && self.check_morphism().passed()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Morphism<C>) -> Result<Self> {
        Morphism::new(self.source.clone(), next.target.clone(), self.map.then(&next.map)?)
    }

    pub fn inverse(&self) -> Result<Self> {
        Morphism::new(self.target.clone(), self.source.clone(), self.map.inverse()?)
    }
}

fn ensure_pair_ranks<C: Scalar>(mp: &MatchedPair<C>, phi: &ModuleMap<C>) -> Result<()> {
    if phi.source_rank != mp.q().rank() || phi.target_rank != mp.r().rank() {
        return Err(Error::DimensionMismatch {
            expected: mp.q().rank(),
            found: phi.source_rank,
        });
    }
    Ok(())
}

/// Residuals of the deformation-map identity on every ordered pair of
/// `Q`-basis vectors, in row-major order. `phi` may contain unknowns.
pub fn deformation_residuals<C: Scalar>(mp: &MatchedPair<C>, phi: &ModuleMap<C>) -> Result<Vec<((usize, usize), Element<C>)>> {
    ensure_pair_ranks(mp, phi)?;
    let (r, q, lhd, rhd) = (&**mp.r(), &**mp.q(), mp.lhd(), mp.rhd());
    let (l1, fl) = (lam::<C>(), flip_lam::<C>());
    let mut out = Vec::new();
    for i in 0..q.rank() {
        for j in 0..q.rank() {
            let (x, y) = (q.basis(i), q.basis(j));
            let (px, py) = (phi.image(i), phi.image(j));
            let head = &phi.apply(&q.product(&x, &y, &l1)) - &r.product(&px, &py, &l1);
            let residual = match mp.kind() {
                // φ[xy] - [φx φy] - φ(y◁φx) + φ(x◁φy) - x▷φy + y▷φx
                Kind::Lie => {
                    let a = phi.apply(&lhd.act(&y, &px, &fl));
                    let b = phi.apply(&lhd.act(&x, &py, &l1));
                    let c = rhd.act(&x, &py, &l1);
                    let d = rhd.act(&y, &px, &fl);
                    &(&(&(&head - &a) + &b) - &c) + &d
                }
                // φ(xy) - φxφy - φx↼y - x▷φy + φ(φx⇀y) + φ(x◁φy)
                Kind::Associative => {
                    let lh = mp.lharpoon().expect("associative pair has ↼");
                    let rh = mp.rharpoon().expect("associative pair has ⇀");
                    let a = lh.act(&px, &y, &l1);
                    let b = rhd.act(&x, &py, &l1);
                    let c = phi.apply(&rh.act(&px, &y, &l1));
                    let d = phi.apply(&lhd.act(&x, &py, &l1));
                    &(&(&(&head - &a) - &b) + &c) + &d
                }
            };
            out.push(((i, j), residual));
        }
    }
    Ok(out)
}

pub fn check_deformation_map<C: Scalar>(mp: &MatchedPair<C>, phi: &DeformationMap<C>) -> CheckReport<C> {
    let mut report = CheckReport::pass();
    for ((i, j), residual) in deformation_residuals(mp, &phi.map).expect("ranks checked at construction") {
        report.record("deformation map", &[i, j], residual);
    }
    report
}

/// `x_s y` in the φ-deformation of `Q`; `phi` may contain unknowns.
pub(crate) fn deformed_product<C: Scalar>(
    mp: &MatchedPair<C>,
    phi: &ModuleMap<C>,
    x: &Element<C>,
    y: &Element<C>,
    s: &MultiPoly<C>,
) -> Element<C> {
    let q = &**mp.q();
    let base = q.product(x, y, s);
    let (px, py) = (phi.apply(x), phi.apply(y));
    match mp.kind() {
        // [x y] + x◁_s φ(y) - y◁_{-s-∂} φ(x)
        Kind::Lie => {
            let flip = -&(s + &MultiPoly::var(VarId::D));
            &(&base + &mp.lhd().act(x, &py, s)) - &mp.lhd().act(y, &px, &flip)
        }
        // xy + x◁φ(y) + φ(x)⇀y
        Kind::Associative => {
            let rh = mp.rharpoon().expect("associative pair has ⇀");
            &(&base + &mp.lhd().act(x, &py, s)) + &rh.act(&px, y, s)
        }
    }
}

/// `Q_φ`, together with the deformation-map report for `φ`. The table is
/// produced even when the report fails.
pub fn deformed_algebra<C: Scalar>(mp: &MatchedPair<C>, phi: &DeformationMap<C>) -> (ConformalAlgebra<C>, CheckReport<C>) {
    let q = &**mp.q();
    let l1 = lam::<C>();
    let table = (0..q.rank())
        .map(|i| {
            (0..q.rank())
                .map(|j| deformed_product(mp, &phi.map, &q.basis(i), &q.basis(j), &l1).into_coords())
                .collect()
        })
        .collect();
    let alg = ConformalAlgebra::new(q.kind(), q.names().to_vec(), table).expect("deformed table only uses d and l");
    (alg, check_deformation_map(mp, phi))
}

/// The graph map `x ↦ φ(x) ⊕ x` from `Q` into `R ⋈ Q`.
pub fn graph_map<C: Scalar>(mp: &MatchedPair<C>, phi: &DeformationMap<C>) -> ModuleMap<C> {
    let (nr, nq) = (mp.r().rank(), mp.q().rank());
    let matrix = (0..nq)
        .map(|j| {
            let mut row = phi.map.matrix[j].clone();
            row.extend((0..nq).map(|k| if k == j { MultiPoly::one() } else { MultiPoly::zero() }));
            row
        })
        .collect();
    ModuleMap {
        source_rank: nq,
        target_rank: nr + nq,
        matrix,
    }
}

/// Checks that the graph of `φ` is closed in `R ⋈ Q` and that the graph map
/// is a morphism `Q_φ → R ⋈ Q`.
pub fn graph_embedding_check<C: Scalar>(mp: &MatchedPair<C>, phi: &DeformationMap<C>) -> CheckReport<C> {
    let e = Arc::new(mp.build_bicrossed());
    let (nr, nq) = (mp.r().rank(), mp.q().rank());
    let g = graph_map(mp, phi);
    let l1 = lam::<C>();
    let mut report = CheckReport::pass();
    for i in 0..nq {
        for j in 0..nq {
            let z = e.product(&g.image(i), &g.image(j), &l1);
            // z lies on the graph iff its R part is φ of its Q part
            let residual = &z.project(0, nr) - &phi.map.apply(&z.project(nr, nq));
            report.record("graph closure", &[i, j], residual);
        }
    }
    let (q_phi, _) = deformed_algebra(mp, phi);
    let h = Morphism::new(Arc::new(q_phi), e, g).expect("graph map ranks match");
    report.absorb("graph ", h.check_morphism());
    report
}

/// Residuals of `α([x y]_φ) - [α(x) α(y)]_ψ` on basis pairs; `alpha` may
/// contain unknowns.
pub fn equivalence_residuals<C: Scalar>(
    mp: &MatchedPair<C>,
    phi: &ModuleMap<C>,
    psi: &ModuleMap<C>,
    alpha: &ModuleMap<C>,
) -> Result<Vec<((usize, usize), Element<C>)>> {
    ensure_pair_ranks(mp, phi)?;
    ensure_pair_ranks(mp, psi)?;
    let nq = mp.q().rank();
    if alpha.source_rank != nq || alpha.target_rank != nq {
        return Err(Error::DimensionMismatch {
            expected: nq,
            found: alpha.source_rank,
        });
    }
    let q = &**mp.q();
    let l1 = lam::<C>();
    let mut out = Vec::new();
    for i in 0..nq {
        for j in 0..nq {
            let src = alpha.apply(&deformed_product(mp, phi, &q.basis(i), &q.basis(j), &l1));
            let tgt = deformed_product(mp, psi, &alpha.image(i), &alpha.image(j), &l1);
            out.push(((i, j), &src - &tgt));
        }
    }
    Ok(out)
}

/// Checks that `α` witnesses `φ ≡ ψ`. `α` must be a module automorphism of `Q`.
pub fn check_equivalence<C: Scalar>(
    mp: &MatchedPair<C>,
    phi: &DeformationMap<C>,
    psi: &DeformationMap<C>,
    alpha: &ModuleMap<C>,
) -> Result<CheckReport<C>> {
    if !alpha.is_unimodular() {
        let d = alpha.determinant()?;
        return Err(Error::NotInvertible(d.to_string()));
    }
    let mut report = CheckReport::pass();
    for ((i, j), residual) in equivalence_residuals(mp, &phi.map, &psi.map, alpha)? {
        report.record("equivalence", &[i, j], residual);
    }
    Ok(report)
}
