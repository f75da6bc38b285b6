//! Compiles deformation-map and equivalence identities over a polynomial
//! ansatz into polynomial equations on the unknown coefficients, then
//! simplifies and searches them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::actions::MatchedPair;
use crate::algebra::Element;
use crate::deform::{check_equivalence, deformation_residuals, equivalence_residuals, DeformationMap, ModuleMap};
use crate::error::{Error, Result};
use crate::poly::{Monomial, MultiPoly, VarId};
use crate::scalar::Scalar;

/// Values for unknowns.
pub type Assignment<C> = BTreeMap<VarId, C>;

/// Degree bounds for the entries of a symbolic map. Entry `(j, i)` with bound
/// `d` is `Σ_{k≤d} u_k ∂^k` over fresh unknowns; entries without a bound are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    source_rank: usize,
    target_rank: usize,
    bounds: BTreeMap<(usize, usize), u32>,
}

impl AnsatzSpec {
    pub fn new(source_rank: usize, target_rank: usize, bounds: BTreeMap<(usize, usize), u32>) -> Result<Self> {
        for &(j, i) in bounds.keys() {
            if j >= source_rank || i >= target_rank {
                return Err(Error::OutsideAnsatz(format!(
                    "entry ({j}, {i}) outside a {source_rank}×{target_rank} map"
                )));
            }
        }
        Ok(AnsatzSpec {
            source_rank,
            target_rank,
            bounds,
        })
    }

    /// Every entry bounded by `degree`.
    pub fn uniform(source_rank: usize, target_rank: usize, degree: u32) -> Self {
        let bounds = (0..source_rank)
            .flat_map(|j| (0..target_rank).map(move |i| ((j, i), degree)))
            .collect();
        AnsatzSpec {
            source_rank,
            target_rank,
            bounds,
        }
    }

    /// Diagonal entries of a square map bounded by `degree`.
    pub fn diagonal(rank: usize, degree: u32) -> Self {
        AnsatzSpec {
            source_rank: rank,
            target_rank: rank,
            bounds: (0..rank).map(|i| ((i, i), degree)).collect(),
        }
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn bounds(&self) -> &BTreeMap<(usize, usize), u32> {
        &self.bounds
    }

    pub fn unknown_count(&self) -> usize {
        self.bounds.values().map(|&d| d as usize + 1).sum()
    }

    /// Unknowns of each bounded entry, numbered row-major, constant
    /// coefficient first.
    pub fn layout(&self) -> BTreeMap<(usize, usize), Vec<VarId>> {
        let mut next = 0u32;
        self.bounds
            .iter()
            .map(|(&entry, &d)| {
                let vars = (0..=d).map(|k| VarId::U(next + k)).collect();
                next += d + 1;
                (entry, vars)
            })
            .collect()
    }

    pub fn unknowns(&self) -> Vec<VarId> {
        (0..self.unknown_count() as u32).map(VarId::U).collect()
    }

    pub fn symbolic_map<C: Scalar>(&self) -> ModuleMap<C> {
        let mut matrix = vec![vec![MultiPoly::zero(); self.target_rank]; self.source_rank];
        for ((j, i), vars) in self.layout() {
            matrix[j][i] = vars
                .iter()
                .enumerate()
                .map(|(k, &u)| MultiPoly::monomial(Monomial::from_pairs([(u, 1), (VarId::D, k as u32)]), C::one()))
                .fold(MultiPoly::zero(), |acc, t| acc + t);
        }
        ModuleMap::symbolic(self.source_rank, self.target_rank, matrix).expect("ansatz entries use d and unknowns")
    }

    /// The concrete map for a total assignment.
    pub fn map_from_assignment<C: Scalar>(&self, a: &Assignment<C>) -> Result<ModuleMap<C>> {
        for u in self.unknowns() {
            if !a.contains_key(&u) {
                return Err(Error::MissingUnknown(u));
            }
        }
        let sym = self.symbolic_map::<C>();
        let matrix = sym
            .matrix()
            .iter()
            .map(|row| row.iter().map(|p| p.eval_partial(a)).collect())
            .collect();
        ModuleMap::new(self.source_rank, self.target_rank, matrix)
    }

    /// The coefficients of `m` as an assignment, if `m` fits the ansatz.
    pub fn assignment_of<C: Scalar>(&self, m: &ModuleMap<C>) -> Result<Assignment<C>> {
        if m.source_rank() != self.source_rank || m.target_rank() != self.target_rank {
            return Err(Error::DimensionMismatch {
                expected: self.source_rank,
                found: m.source_rank(),
            });
        }
        let layout = self.layout();
        let mut out = Assignment::new();
        for j in 0..self.source_rank {
            for i in 0..self.target_rank {
                let p = m.entry(j, i);
                let Some(vars) = layout.get(&(j, i)) else {
                    if !p.is_zero() {
                        return Err(Error::OutsideAnsatz(format!("entry ({j}, {i}) must be 0")));
                    }
                    continue;
                };
                let coeffs = p.coefficient_list(VarId::D);
                if coeffs.len() > vars.len() {
                    return Err(Error::OutsideAnsatz(format!(
                        "entry ({j}, {i}) has degree {} above the bound {}",
                        coeffs.len() - 1,
                        vars.len() - 1
                    )));
                }
                for (k, &u) in vars.iter().enumerate() {
                    let c = coeffs.get(k).map_or_else(C::zero, |c| c.constant_term());
                    out.insert(u, c);
                }
            }
        }
        Ok(out)
    }
}

/// Where an equation came from: the basis pair, the output coordinate and
/// the ∂/λ monomial whose coefficient it is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub pair: (usize, usize),
    pub output: usize,
    pub monomial: Monomial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation<C> {
    pub poly: MultiPoly<C>,
    pub provenance: Provenance,
}

/// Polynomial equations `poly = 0` over the unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem<C> {
    unknowns: Vec<VarId>,
    equations: Vec<Equation<C>>,
}

impl<C: Scalar> ConstraintSystem<C> {
    /// Normalizes each equation to be monic, drops zeros and keeps the first
    /// copy of duplicates.
    pub fn new(unknowns: Vec<VarId>, equations: Vec<Equation<C>>) -> Self {
        let mut seen: Vec<MultiPoly<C>> = Vec::new();
        let mut kept = Vec::new();
        for eq in equations {
            let poly = eq.poly.monic();
            if poly.is_zero() || seen.contains(&poly) {
                continue;
            }
            seen.push(poly.clone());
            kept.push(Equation {
                poly,
                provenance: eq.provenance,
            });
        }
        ConstraintSystem {
            unknowns,
            equations: kept,
        }
    }

    pub fn unknowns(&self) -> &[VarId] {
        &self.unknowns
    }

    pub fn equations(&self) -> &[Equation<C>] {
        &self.equations
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn polys(&self) -> Vec<MultiPoly<C>> {
        self.equations.iter().map(|e| e.poly.clone()).collect()
    }

    pub fn verify_assignment(&self, a: &Assignment<C>) -> Result<bool> {
        for &u in &self.unknowns {
            if !a.contains_key(&u) {
                return Err(Error::MissingUnknown(u));
            }
        }
        Ok(self
            .equations
            .iter()
            .all(|e| e.poly.evaluate(a).is_some_and(|v| v.is_zero())))
    }

    pub fn to_json(&self) -> String {
        let doc = SystemDoc {
            unknowns: self.unknowns.iter().map(ToString::to_string).collect(),
            equations: self
                .equations
                .iter()
                .map(|e| EquationDoc {
                    poly: e.poly.to_string(),
                    pair: [e.provenance.pair.0, e.provenance.pair.1],
                    output: e.provenance.output,
                    monomial: e.provenance.monomial.to_string(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("plain document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SystemDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let unknowns = doc
            .unknowns
            .iter()
            .map(|n| match VarId::parse(n) {
                Some(v) if v.is_unknown() => Ok(v),
                _ => Err(Error::Format(format!("`{n}` is not an unknown"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut equations = Vec::new();
        for e in doc.equations {
            let poly: MultiPoly<C> = e.poly.parse()?;
            if let Some(v) = poly.vars().into_iter().find(|v| !unknowns.contains(v)) {
                return Err(Error::Format(format!("equation uses undeclared {v}")));
            }
            let mono: MultiPoly<C> = e.monomial.parse()?;
            let monomial = match mono.leading() {
                Some((m, c)) if mono.len() == 1 && c.is_one() => m.clone(),
                _ => return Err(Error::Format(format!("`{}` is not a monomial", e.monomial))),
            };
            equations.push(Equation {
                poly,
                provenance: Provenance {
                    pair: (e.pair[0], e.pair[1]),
                    output: e.output,
                    monomial,
                },
            });
        }
        Ok(ConstraintSystem { unknowns, equations })
    }
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    unknowns: Vec<String>,
    equations: Vec<EquationDoc>,
}

#[derive(Serialize, Deserialize)]
struct EquationDoc {
    poly: String,
    pair: [usize; 2],
    output: usize,
    monomial: String,
}

fn collect<C: Scalar>(unknowns: Vec<VarId>, residuals: Vec<((usize, usize), Element<C>)>) -> ConstraintSystem<C> {
    let mut equations = Vec::new();
    for (pair, residual) in residuals {
        for (output, coord) in residual.coords().iter().enumerate() {
            for (monomial, poly) in coord.split_by(&[VarId::D, VarId::L1, VarId::L2]) {
                equations.push(Equation {
                    poly,
                    provenance: Provenance { pair, output, monomial },
                });
            }
        }
    }
    ConstraintSystem::new(unknowns, equations)
}

/// Equations on the ansatz coefficients equivalent to `φ` being a
/// deformation map.
pub fn compile_deformation_constraints<C: Scalar>(mp: &MatchedPair<C>, ansatz: &AnsatzSpec) -> Result<ConstraintSystem<C>> {
    if ansatz.source_rank != mp.q().rank() || ansatz.target_rank != mp.r().rank() {
        return Err(Error::DimensionMismatch {
            expected: mp.q().rank(),
            found: ansatz.source_rank,
        });
    }
    let residuals = deformation_residuals(mp, &ansatz.symbolic_map())?;
    Ok(collect(ansatz.unknowns(), residuals))
}

/// Equations on the coefficients of `α` (an ansatz for a square map of `Q`)
/// making `α([x y]_φ) = [α(x) α(y)]_ψ`. Invertibility is not encoded.
pub fn compile_equivalence_constraints<C: Scalar>(
    mp: &MatchedPair<C>,
    phi: &DeformationMap<C>,
    psi: &DeformationMap<C>,
    alpha: &AnsatzSpec,
) -> Result<ConstraintSystem<C>> {
    let residuals = equivalence_residuals(mp, phi.map(), psi.map(), &alpha.symbolic_map())?;
    Ok(collect(alpha.unknowns(), residuals))
}

/// `var := value`, where `value` uses only unknowns that survive elimination.
#[derive(Clone, Debug, PartialEq)]
pub struct Substitution<C> {
    pub var: VarId,
    pub value: MultiPoly<C>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Elimination<C> {
    /// The remaining equations over the surviving unknowns.
    pub system: ConstraintSystem<C>,
    /// Eliminated unknowns whose value came out constant.
    pub assignment: Assignment<C>,
    /// Every eliminated unknown, in elimination order.
    pub substitutions: Vec<Substitution<C>>,
}

impl<C: Scalar> Elimination<C> {
    /// Extends an assignment of the surviving unknowns to all unknowns.
    pub fn extend(&self, survivors: &Assignment<C>) -> Assignment<C> {
        let mut out = survivors.clone();
        for s in &self.substitutions {
            let v = s.value.evaluate(survivors).expect("substitutions only use survivors");
            out.insert(s.var, v);
        }
        out
    }
}

/// An unknown `u` with `poly = c·u + r`, `c` a nonzero constant, `r` free of `u`.
fn affine_unknown<C: Scalar>(poly: &MultiPoly<C>, candidates: &[VarId]) -> Option<(VarId, MultiPoly<C>)> {
    candidates.iter().find_map(|&u| {
        if poly.degree_in(u) != 1 {
            return None;
        }
        let parts = poly.coefficient_list(u);
        let c = parts[1].constant_value()?;
        Some((u, (-&parts[0]).scale(&(C::one() / c))))
    })
}

/// Repeatedly solves equations that are affine in some unknown with a
/// constant coefficient and substitutes the solution everywhere.
pub fn linear_eliminate<C: Scalar>(sys: &ConstraintSystem<C>) -> Result<Elimination<C>> {
    let mut unknowns = sys.unknowns.clone();
    let mut equations = sys.equations.clone();
    let mut records: Vec<Substitution<C>> = Vec::new();
    loop {
        let found = equations
            .iter()
            .enumerate()
            .find_map(|(k, e)| affine_unknown(&e.poly, &unknowns).map(|s| (k, s)));
        let Some((k, (u, value))) = found else { break };
        equations.remove(k);
        let mut next = Vec::new();
        for e in equations {
            let poly = e.poly.substitute(u, &value);
            if let Some(c) = poly.constant_value() {
                if !c.is_zero() {
                    return Err(Error::Unsatisfiable(c.to_string()));
                }
            }
            next.push(Equation {
                poly,
                provenance: e.provenance,
            });
        }
        equations = ConstraintSystem::new(Vec::new(), next).equations;
        unknowns.retain(|&v| v != u);
        records.push(Substitution { var: u, value });
    }
    // later substitutions feed earlier values so all end up over survivors
    for k in (0..records.len()).rev() {
        let (var, value) = (records[k].var, records[k].value.clone());
        for earlier in &mut records[..k] {
            earlier.value = earlier.value.substitute(var, &value);
        }
    }
    let assignment = records
        .iter()
        .filter_map(|s| s.value.constant_value().map(|c| (s.var, c)))
        .collect();
    Ok(Elimination {
        system: ConstraintSystem::new(unknowns, equations),
        assignment,
        substitutions: records,
    })
}

pub const DEFAULT_GRID_CAP: usize = 6;

/// Distinct rationals `n/d` with `|n| ≤ max_num`, `1 ≤ d ≤ max_den`, ascending.
pub fn grid_values<C: Scalar>(max_num: i64, max_den: i64) -> Vec<C> {
    let mut out: Vec<C> = Vec::new();
    for d in 1..=max_den.max(1) {
        for n in -max_num..=max_num {
            out.push(C::from_ratio(n, d));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("grid values are ordered"));
    out.dedup();
    out
}

/// Every grid point over the system's unknowns satisfying all equations, in
/// lexicographic order of (unknown, value).
pub fn grid_search<C: Scalar>(sys: &ConstraintSystem<C>, max_num: i64, max_den: i64, cap: usize) -> Result<Vec<Assignment<C>>> {
    let n = sys.unknowns.len();
    if n > cap {
        return Err(Error::CapExceeded { count: n, cap });
    }
    let values = grid_values::<C>(max_num, max_den);
    // equations become checkable once their last unknown is assigned
    let mut ready: Vec<Vec<&MultiPoly<C>>> = vec![Vec::new(); n.max(1)];
    for e in &sys.equations {
        let last = e
            .poly
            .vars()
            .iter()
            .filter_map(|v| sys.unknowns.iter().position(|u| u == v))
            .max()
            .unwrap_or(0);
        ready[last].push(&e.poly);
    }
    let mut out = Vec::new();
    let mut current = Assignment::new();
    if n == 0 {
        if ready[0].iter().all(|p| p.is_zero()) {
            out.push(current);
        }
        return Ok(out);
    }
    search(&sys.unknowns, &values, &ready, 0, &mut current, &mut out);
    Ok(out)
}

fn search<C: Scalar>(
    unknowns: &[VarId],
    values: &[C],
    ready: &[Vec<&MultiPoly<C>>],
    depth: usize,
    current: &mut Assignment<C>,
    out: &mut Vec<Assignment<C>>,
) {
    if depth == unknowns.len() {
        out.push(current.clone());
        return;
    }
    for v in values {
        current.insert(unknowns[depth], v.clone());
        let ok = ready[depth]
            .iter()
            .all(|p| p.evaluate(current).is_some_and(|x| x.is_zero()));
        if ok {
            search(unknowns, values, ready, depth + 1, current, out);
        }
    }
    current.remove(&unknowns[depth]);
}

/// Grid bounds for [`search_equivalence`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub max_num: i64,
    pub max_den: i64,
    pub cap: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            max_num: 2,
            max_den: 2,
            cap: DEFAULT_GRID_CAP,
        }
    }
}

/// Outcome of a bounded search for an equivalence witness.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceSearch<C> {
    /// Unknown count of the ansatz.
    pub unknowns: usize,
    /// Grid solutions of the compiled system, extended to all unknowns.
    pub solutions: Vec<Assignment<C>>,
    /// The first solution whose map is invertible and passes the check.
    pub witness: Option<ModuleMap<C>>,
}

/// Looks for `α` within `ansatz` witnessing `φ ≡ ψ`: compile, eliminate,
/// grid-search the survivors, keep invertible maps. A `None` witness means
/// none was found within the searched family.
pub fn search_equivalence<C: Scalar>(
    mp: &MatchedPair<C>,
    phi: &DeformationMap<C>,
    psi: &DeformationMap<C>,
    ansatz: &AnsatzSpec,
    grid: Grid,
) -> Result<EquivalenceSearch<C>> {
    let sys = compile_equivalence_constraints(mp, phi, psi, ansatz)?;
    let mut result = EquivalenceSearch {
        unknowns: ansatz.unknown_count(),
        solutions: Vec::new(),
        witness: None,
    };
    let elim = match linear_eliminate(&sys) {
        Ok(e) => e,
        Err(Error::Unsatisfiable(_)) => return Ok(result),
        Err(e) => return Err(e),
    };
    for survivors in grid_search(&elim.system, grid.max_num, grid.max_den, grid.cap)? {
        let full = elim.extend(&survivors);
        let alpha = ansatz.map_from_assignment(&full)?;
        if result.witness.is_none()
            && alpha.is_unimodular()
            && check_equivalence(mp, phi, psi, &alpha)?.passed()
        {
            result.witness = Some(alpha);
        }
        result.solutions.push(full);
    }
    Ok(result)
}

/// Unknowns that occur in some equation.
pub fn constrained_unknowns<C: Scalar>(sys: &ConstraintSystem<C>) -> BTreeSet<VarId> {
    sys.equations.iter().flat_map(|e| e.poly.vars()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{decompose, ModuleAction, Side};
    use crate::algebra::{ConformalAlgebra, Kind};
    use crate::deform::check_deformation_map;
    use crate::{Poly, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn eqs(polys: &[&str]) -> ConstraintSystem<Rational> {
        let polys: Vec<Poly> = polys.iter().map(|s| p(s)).collect();
        let unknowns: BTreeSet<VarId> = polys.iter().flat_map(|q| q.vars()).collect();
        ConstraintSystem::new(
            unknowns.into_iter().collect(),
            polys
                .into_iter()
                .enumerate()
                .map(|(k, poly)| Equation {
                    poly,
                    provenance: Provenance {
                        pair: (k, 0),
                        output: 0,
                        monomial: Monomial::one(),
                    },
                })
                .collect(),
        )
    }

    fn w_pair(a: &str, b: &str) -> MatchedPair<Rational> {
        let mut vir = ConformalAlgebra::abelian(Kind::Lie, names(&["L"])).unwrap();
        vir.set_product(0, 0, vec![p("d + 2*l")]).unwrap();
        let r = Arc::new(vir);
        let q = Arc::new(ConformalAlgebra::abelian(Kind::Lie, names(&["W"])).unwrap());
        let lhd = ModuleAction::new(
            Side::Right,
            r.clone(),
            1,
            vec![vec![vec![p(&format!("({a} - 1)*d + ({a})*l - ({b})"))]]],
        )
        .unwrap();
        let rhd = ModuleAction::trivial(Side::Left, q.clone(), 1);
        MatchedPair::lie(r, q, lhd, rhd).unwrap()
    }

    fn sv_pair() -> MatchedPair<Rational> {
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
        decompose(&e, &[0, 1]).unwrap()
    }

    fn section4_pair() -> MatchedPair<Rational> {
        let mut e = ConformalAlgebra::abelian(Kind::Associative, names(&["e1", "e2", "e3", "e4"])).unwrap();
        let unit = |k: usize| (0..4).map(|i| if i == k { p("1") } else { p("0") }).collect::<Vec<_>>();
        e.set_product(0, 1, unit(0)).unwrap();
        e.set_product(1, 1, unit(1)).unwrap();
        e.set_product(1, 2, unit(2)).unwrap();
        e.set_product(1, 3, unit(3)).unwrap();
        decompose(&e, &[0, 1]).unwrap()
    }

    fn phi(mp: &MatchedPair<Rational>, rows: &[&[&str]]) -> DeformationMap<Rational> {
        let m: Vec<Vec<Poly>> = rows.iter().map(|r| r.iter().map(|s| p(s)).collect()).collect();
        DeformationMap::new(mp, ModuleMap::new(m.len(), m[0].len(), m).unwrap()).unwrap()
    }

    #[test]
    fn ansatz_layout() {
        let a = AnsatzSpec::uniform(2, 2, 1);
        assert_eq!(a.unknown_count(), 8);
        assert_eq!(a.layout()[&(0, 1)], vec![VarId::U(2), VarId::U(3)]);
        let m = a.symbolic_map::<Rational>();
        assert_eq!(m.entry(1, 0), &p("u4 + u5*d"));
        let d = AnsatzSpec::diagonal(2, 0);
        assert_eq!(d.symbolic_map::<Rational>().entry(1, 1), &p("u1"));
        assert!(d.symbolic_map::<Rational>().entry(0, 1).is_zero());
        assert!(AnsatzSpec::new(1, 1, [((0, 1), 0)].into()).is_err());
    }

    #[test]
    fn assignment_map_round_trip() {
        let a = AnsatzSpec::uniform(2, 2, 1);
        let m = ModuleMap::new(2, 2, vec![vec![p("2"), p("d + 1")], vec![p("0"), p("-3*d")]]).unwrap();
        let asg = a.assignment_of(&m).unwrap();
        assert_eq!(asg[&VarId::U(3)], r(1, 1));
        assert_eq!(asg[&VarId::U(7)], r(-3, 1));
        assert_eq!(a.map_from_assignment(&asg).unwrap(), m);
        let too_high = ModuleMap::new(2, 2, vec![vec![p("d^2"), p("0")], vec![p("0"), p("0")]]).unwrap();
        assert!(matches!(a.assignment_of(&too_high), Err(Error::OutsideAnsatz(_))));
        let mut partial = asg.clone();
        partial.remove(&VarId::U(0));
        assert!(matches!(a.map_from_assignment(&partial), Err(Error::MissingUnknown(_))));
    }

    #[test]
    fn w_systems() {
        let sys = compile_deformation_constraints(&w_pair("2", "0"), &AnsatzSpec::uniform(1, 1, 0)).unwrap();
        assert_eq!(sys.polys(), vec![p("u0^2")]);
        let empty = compile_deformation_constraints(&w_pair("1", "3"), &AnsatzSpec::uniform(1, 1, 0)).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.unknowns(), &[VarId::U(0)]);
    }

    #[test]
    fn w_degree_two_forces_constant() {
        let sys = compile_deformation_constraints(&w_pair("1", "0"), &AnsatzSpec::uniform(1, 1, 2)).unwrap();
        let sols = grid_search(&sys, 2, 2, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(sols.len(), 7);
        assert!(sols.iter().all(|s| s[&VarId::U(1)].is_zero() && s[&VarId::U(2)].is_zero()));
        let mut bad = Assignment::new();
        bad.insert(VarId::U(0), r(1, 1));
        bad.insert(VarId::U(1), r(1, 1));
        bad.insert(VarId::U(2), r(0, 1));
        assert!(!sys.verify_assignment(&bad).unwrap());
    }

    #[test]
    fn verify_examples() {
        let sys = eqs(&["u0^2"]);
        assert!(sys.verify_assignment(&[(VarId::U(0), r(0, 1))].into()).unwrap());
        assert!(!sys.verify_assignment(&[(VarId::U(0), r(1, 1))].into()).unwrap());
        assert!(matches!(
            sys.verify_assignment(&Assignment::new()),
            Err(Error::MissingUnknown(VarId::U(0)))
        ));
        let mp = sv_pair();
        let ansatz = AnsatzSpec::uniform(2, 2, 1);
        let sv = compile_deformation_constraints(&mp, &ansatz).unwrap();
        let m = ModuleMap::new(2, 2, vec![vec![p("2"), p("d + 1")], vec![p("0"), p("0")]]).unwrap();
        assert!(sv.verify_assignment(&ansatz.assignment_of(&m).unwrap()).unwrap());
    }

    #[test]
    fn elimination_examples() {
        let e = linear_eliminate(&eqs(&["u1 - 3", "u0*u1"])).unwrap();
        assert!(e.system.is_empty());
        assert_eq!(e.assignment[&VarId::U(1)], r(3, 1));
        assert_eq!(e.assignment[&VarId::U(0)], r(0, 1));
        let stuck = linear_eliminate(&eqs(&["u0^2"])).unwrap();
        assert_eq!(stuck.system.polys(), vec![p("u0^2")]);
        assert!(stuck.substitutions.is_empty());
        assert!(matches!(
            linear_eliminate(&eqs(&["u0 - 1", "u0 - 2"])),
            Err(Error::Unsatisfiable(_))
        ));
        // chained: u0 = u1 + 1, u1 = u2^2 leaves u0 = u2^2 + 1
        let chain = linear_eliminate(&eqs(&["u0 - u1 - 1", "u1 - u2^2"])).unwrap();
        assert_eq!(chain.substitutions[0].value, p("u2^2 + 1"));
        let ext = chain.extend(&[(VarId::U(2), r(2, 1))].into());
        assert_eq!(ext[&VarId::U(0)], r(5, 1));
    }

    #[test]
    fn sv_elimination_leaves_f_and_g() {
        let mp = sv_pair();
        let sys = compile_deformation_constraints(&mp, &AnsatzSpec::uniform(2, 2, 1)).unwrap();
        let e = linear_eliminate(&sys).unwrap();
        // h = u4 + u5 d and k = u6 + u7 d are solved in terms of f and g
        let eliminated: Vec<VarId> = e.substitutions.iter().map(|s| s.var).collect();
        assert_eq!(eliminated, (4..8).map(VarId::U).collect::<Vec<_>>());
        assert_eq!(e.system.unknowns(), &(0..4).map(VarId::U).collect::<Vec<_>>());
        let sols = grid_search(&e.system, 2, 2, DEFAULT_GRID_CAP).unwrap();
        assert!(sols.len() > 1);
        for sol in sols {
            let full = e.extend(&sol);
            assert!(sys.verify_assignment(&full).unwrap());
            // f = a, g = a/2 d + b, h = k = 0
            assert!(full[&VarId::U(1)].is_zero());
            assert_eq!(full[&VarId::U(3)].clone() * r(2, 1), full[&VarId::U(0)]);
            assert!((4..8).all(|k| full[&VarId::U(k)].is_zero()));
        }
    }

    #[test]
    fn grid_examples() {
        let g = grid_values::<Rational>(2, 2);
        assert_eq!(g, vec![r(-2, 1), r(-1, 1), r(-1, 2), r(0, 1), r(1, 2), r(1, 1), r(2, 1)]);
        let w2 = compile_deformation_constraints(&w_pair("2", "0"), &AnsatzSpec::uniform(1, 1, 0)).unwrap();
        assert_eq!(grid_search(&w2, 2, 2, 6).unwrap(), vec![Assignment::from([(VarId::U(0), r(0, 1))])]);
        let w1 = compile_deformation_constraints(&w_pair("1", "0"), &AnsatzSpec::uniform(1, 1, 0)).unwrap();
        assert_eq!(grid_search(&w1, 2, 2, 6).unwrap().len(), 7);
        let big = compile_deformation_constraints(&sv_pair(), &AnsatzSpec::uniform(2, 2, 1)).unwrap();
        assert!(matches!(grid_search(&big, 1, 1, 6), Err(Error::CapExceeded { count: 8, cap: 6 })));
    }

    #[test]
    fn section4_degree_zero_solutions() {
        let mp = section4_pair();
        let ansatz = AnsatzSpec::uniform(2, 2, 0);
        let sys = compile_deformation_constraints(&mp, &ansatz).unwrap();
        let sols = grid_search(&sys, 1, 1, 6).unwrap();
        // φ(e3) = u0 e1 + u1 e2, φ(e4) = u2 e1 + u3 e2
        let brute: Vec<_> = {
            let vals = grid_values::<Rational>(1, 1);
            let mut out = Vec::new();
            for a in &vals {
                for b in &vals {
                    for c in &vals {
                        for d in &vals {
                            if a.clone() * d.clone() == b.clone() * c.clone() {
                                out.push([a.clone(), b.clone(), c.clone(), d.clone()]);
                            }
                        }
                    }
                }
            }
            out
        };
        let got: Vec<_> = sols.iter().map(|s| [0, 1, 2, 3].map(|k| s[&VarId::U(k)].clone())).collect();
        assert_eq!(got, brute);
        assert!(got.contains(&[r(1, 1), r(1, 1), r(1, 1), r(1, 1)]));
        assert!(got.contains(&[r(0, 1), r(1, 1), r(0, 1), r(1, 1)]));
        assert!(!got.contains(&[r(1, 1), r(0, 1), r(0, 1), r(1, 1)]));
    }

    #[test]
    fn json_round_trip() {
        let sys = compile_deformation_constraints(&sv_pair(), &AnsatzSpec::uniform(2, 2, 1)).unwrap();
        let back = ConstraintSystem::<Rational>::from_json(&sys.to_json()).unwrap();
        assert_eq!(back, sys);
        assert!(ConstraintSystem::<Rational>::from_json("{").is_err());
        assert!(ConstraintSystem::<Rational>::from_json(r#"{"unknowns":["d"],"equations":[]}"#).is_err());
    }

    #[test]
    fn compile_is_deterministic() {
        let a = compile_deformation_constraints(&sv_pair(), &AnsatzSpec::uniform(2, 2, 1)).unwrap();
        let b = compile_deformation_constraints(&sv_pair(), &AnsatzSpec::uniform(2, 2, 1)).unwrap();
        assert_eq!(a, b);
        assert!(a.equations().iter().all(|e| e.poly.total_degree() <= 2));
    }

    #[test]
    fn equivalence_search() {
        let mp = sv_pair();
        let phi05 = phi(&mp, &[&["0", "5"], &["0", "0"]]);
        let phi01 = phi(&mp, &[&["0", "1"], &["0", "0"]]);
        let phi00 = phi(&mp, &[&["0", "0"], &["0", "0"]]);
        let grid = Grid {
            max_num: 5,
            max_den: 1,
            cap: 6,
        };
        let found = search_equivalence(&mp, &phi05, &phi01, &AnsatzSpec::diagonal(2, 0), grid).unwrap();
        let witness = found.witness.expect("witness exists");
        assert_eq!(witness.entry(0, 0), &p("5"));
        assert_eq!(witness.entry(1, 1), &p("25"));
        let none = search_equivalence(&mp, &phi01, &phi00, &AnsatzSpec::diagonal(2, 0), grid).unwrap();
        assert!(none.witness.is_none());
        assert!(none
            .solutions
            .iter()
            .all(|s| s[&VarId::U(0)].is_zero() && s[&VarId::U(1)].is_zero()));
        let dense = search_equivalence(&mp, &phi01, &phi00, &AnsatzSpec::uniform(2, 2, 0), Grid { max_num: 2, max_den: 2, cap: 6 }).unwrap();
        assert!(dense.witness.is_none());
    }

    fn small_poly(cs: &[i64]) -> String {
        cs.iter()
            .enumerate()
            .map(|(k, c)| format!("({c})*d^{k}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    proptest! {
        #[test]
        fn compiled_w_system_agrees_with_checker(
            cs in proptest::collection::vec(-2i64..=2, 3), a in 0i64..=2, b in -1i64..=1
        ) {
            let mp = w_pair(&a.to_string(), &b.to_string());
            let ansatz = AnsatzSpec::uniform(1, 1, 2);
            let sys = compile_deformation_constraints(&mp, &ansatz).unwrap();
            let f = phi(&mp, &[&[&small_poly(&cs)]]);
            let asg = ansatz.assignment_of(f.map()).unwrap();
            prop_assert_eq!(sys.verify_assignment(&asg).unwrap(), check_deformation_map(&mp, &f).passed());
        }

        #[test]
        fn compiled_sv_system_agrees_with_checker(
            cs in proptest::collection::vec(-1i64..=1, 8), base in proptest::bool::ANY, a in -2i64..=2, b in -2i64..=2
        ) {
            let mp = sv_pair();
            let ansatz = AnsatzSpec::uniform(2, 2, 1);
            let sys = compile_deformation_constraints(&mp, &ansatz).unwrap();
            // half the cases start from a genuine φ_{a,b} so passes are exercised
            let entries: Vec<String> = if base {
                vec![a.to_string(), format!("{a}/2*d + {b}"), "0".into(), "0".into()]
            } else {
                cs.chunks(2).map(small_poly).collect()
            };
            let f = phi(&mp, &[&[&entries[0], &entries[1]], &[&entries[2], &entries[3]]]);
            let asg = ansatz.assignment_of(f.map()).unwrap();
            prop_assert_eq!(sys.verify_assignment(&asg).unwrap(), check_deformation_map(&mp, &f).passed());
        }

        #[test]
        fn compiled_section4_system_agrees_with_checker(cs in proptest::collection::vec(-1i64..=1, 8)) {
            let mp = section4_pair();
            let ansatz = AnsatzSpec::uniform(2, 2, 1);
            let sys = compile_deformation_constraints(&mp, &ansatz).unwrap();
            let entries: Vec<String> = cs.chunks(2).map(small_poly).collect();
            let f = phi(&mp, &[&[&entries[0], &entries[1]], &[&entries[2], &entries[3]]]);
            let asg = ansatz.assignment_of(f.map()).unwrap();
            prop_assert_eq!(sys.verify_assignment(&asg).unwrap(), check_deformation_map(&mp, &f).passed());
        }

        #[test]
        fn elimination_preserves_solutions(cs in proptest::collection::vec(-2i64..=2, 4)) {
            // a random small system built from products and affine pieces
            let sys = eqs(&[
                &format!("u0 - ({})*u1 - ({})", cs[0], cs[1]),
                &format!("u1*u2 - ({})*u2", cs[2]),
                &format!("u2^2 - ({})*u2", cs[3]),
            ]);
            let all = grid_search(&sys, 2, 1, 6).unwrap();
            match linear_eliminate(&sys) {
                Ok(e) => {
                    let reduced: Vec<_> = grid_search(&e.system, 2, 1, 6).unwrap()
                        .iter()
                        .map(|s| e.extend(s))
                        .filter(|s| s.values().all(|v| grid_values::<Rational>(2, 1).contains(v)))
                        .collect();
                    for s in &reduced {
                        prop_assert!(sys.verify_assignment(s).unwrap());
                    }
                    for s in &all {
                        prop_assert!(reduced.contains(s));
                    }
                }
                Err(_) => prop_assert!(all.is_empty()),
            }
        }
    }
}
