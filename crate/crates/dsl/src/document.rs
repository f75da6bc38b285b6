use std::sync::Arc;

use cfk_core::deform::{DeformationMap, ModuleMap, Morphism};
use cfk_core::{Algebra, Pair, Rational};

/// How an algebra declaration obtains its table.
#[derive(Clone, Debug, PartialEq)]
pub enum AlgebraSource {
    /// Written out bracket by bracket.
    Table,
    /// `Q_φ` for a declared pair and deformation map.
    Deformed { pair: String, defmap: String },
    /// The bicrossed product of a declared pair.
    Bicrossed { pair: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraDecl {
    pub name: String,
    pub source: AlgebraSource,
    pub algebra: Arc<Algebra>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchedDecl {
    pub name: String,
    pub r: String,
    pub q: String,
    pub pair: Arc<Pair>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefmapDecl {
    pub name: String,
    pub pair: String,
    pub map: DeformationMap<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorphismDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub morphism: Morphism<Rational>,
}

/// A claimed equivalence `φ ≡ ψ` witnessed by `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivDecl {
    pub name: String,
    pub pair: String,
    pub phi: String,
    pub psi: String,
    pub alpha: ModuleMap<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Param { name: String, value: Rational },
    Algebra(AlgebraDecl),
    Matched(MatchedDecl),
    Defmap(DefmapDecl),
    Morphism(MorphismDecl),
    Equiv(EquivDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Param { name, .. } => name,
            Decl::Algebra(d) => &d.name,
            Decl::Matched(d) => &d.name,
            Decl::Defmap(d) => &d.name,
            Decl::Morphism(d) => &d.name,
            Decl::Equiv(d) => &d.name,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Decl::Param { .. } => "param",
            Decl::Algebra(_) => "algebra",
            Decl::Matched(_) => "matched",
            Decl::Defmap(_) => "defmap",
            Decl::Morphism(_) => "morphism",
            Decl::Equiv(_) => "equiv",
        }
    }
}

/// Resolved declarations in source order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Document {
    pub decls: Vec<Decl>,
}

impl Document {
    pub fn algebras(&self) -> impl Iterator<Item = &AlgebraDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Algebra(a) => Some(a),
            _ => None,
        })
    }

    pub fn pairs(&self) -> impl Iterator<Item = &MatchedDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Matched(a) => Some(a),
            _ => None,
        })
    }

    pub fn defmaps(&self) -> impl Iterator<Item = &DefmapDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Defmap(a) => Some(a),
            _ => None,
        })
    }

    pub fn morphisms(&self) -> impl Iterator<Item = &MorphismDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Morphism(a) => Some(a),
            _ => None,
        })
    }

    pub fn equivs(&self) -> impl Iterator<Item = &EquivDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Equiv(a) => Some(a),
            _ => None,
        })
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Param { name, value } => Some((name.as_str(), value)),
            _ => None,
        })
    }

    pub fn algebra(&self, name: &str) -> Option<&AlgebraDecl> {
        self.algebras().find(|d| d.name == name)
    }

    pub fn pair(&self, name: &str) -> Option<&MatchedDecl> {
        self.pairs().find(|d| d.name == name)
    }

    pub fn defmap(&self, name: &str) -> Option<&DefmapDecl> {
        self.defmaps().find(|d| d.name == name)
    }

    pub fn morphism(&self, name: &str) -> Option<&MorphismDecl> {
        self.morphisms().find(|d| d.name == name)
    }

    pub fn equiv(&self, name: &str) -> Option<&EquivDecl> {
        self.equivs().find(|d| d.name == name)
    }
}
