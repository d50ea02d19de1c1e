//! Coordinate charts: graded coordinates plus declared coefficient functions.
//!
//! The declaration order of coordinates is the global generator order used
//! for Koszul-sign normalization (declared first = smallest). Coefficient
//! symbols are ordered by declaration as well; that order drives the choice
//! of leading terms in [`crate::relations`].

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;

use crate::error::Error;
use crate::Result;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoordId(pub u16);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u16);

/// A generator of the polynomial algebra. Parity is `degree mod 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coordinate {
    family: String,
    index: Option<u32>,
    degree: u32,
}

impl Coordinate {
    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn index(&self) -> Option<u32> {
        self.index
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }

    /// `x[1]` for indexed families, the bare family name otherwise.
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]", self.family, i),
            None => f.write_str(&self.family),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

/// A contiguous run of index slots that carries a declared symmetry.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexBlock {
    pub start: usize,
    pub len: usize,
    pub kind: Symmetry,
}

/// Declaration of a formal coefficient function such as `pi[I,J](x)`.
///
/// Non-constant symbols are smooth functions of the degree-0 coordinates and
/// acquire derivative multi-indices under differentiation; constant symbols
/// (metrics, structure constants) are annihilated by it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolDecl {
    name: String,
    arity: usize,
    blocks: Vec<IndexBlock>,
    constant: bool,
    inverse_of: Option<String>,
}

impl SymbolDecl {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        SymbolDecl { name: name.into(), arity, blocks: Vec::new(), constant: false, inverse_of: None }
    }

    /// Declares the whole index list symmetric.
    pub fn symmetric(self) -> Self {
        let len = self.arity;
        self.block(0, len, Symmetry::Symmetric)
    }

    /// Declares the whole index list antisymmetric.
    pub fn antisymmetric(self) -> Self {
        let len = self.arity;
        self.block(0, len, Symmetry::Antisymmetric)
    }

    pub fn block(mut self, start: usize, len: usize, kind: Symmetry) -> Self {
        self.blocks.push(IndexBlock { start, len, kind });
        self
    }

    pub fn constant(mut self) -> Self {
        self.constant = true;
        self
    }

    /// Marks this two-index symbol as the matrix inverse of another one.
    /// Only used for presentation (classical rendering).
    pub fn inverse_of(mut self, other: impl Into<String>) -> Self {
        self.inverse_of = Some(other.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn blocks(&self) -> &[IndexBlock] {
        &self.blocks
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn inverse_name(&self) -> Option<&str> {
        self.inverse_of.as_deref()
    }

    fn validate(&self) -> Result<()> {
        let mut used = alloc::vec![false; self.arity];
        for b in &self.blocks {
            if b.len < 2 {
                return Err(Error::SymmetryDeclaration {
                    symbol: self.name.clone(),
                    reason: "a symmetry block needs at least two slots".into(),
                });
            }
            if b.start + b.len > self.arity {
                return Err(Error::SymmetryDeclaration {
                    symbol: self.name.clone(),
                    reason: format!("block {}..{} exceeds arity {}", b.start + 1, b.start + b.len, self.arity),
                });
            }
            for slot in &mut used[b.start..b.start + b.len] {
                if *slot {
                    return Err(Error::SymmetryDeclaration {
                        symbol: self.name.clone(),
                        reason: "overlapping symmetry blocks".into(),
                    });
                }
                *slot = true;
            }
        }
        Ok(())
    }
}

/// An immutable coordinate chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    coords: Vec<Coordinate>,
    symbols: Vec<SymbolDecl>,
    base: Vec<CoordId>,
}

impl Chart {
    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn coord_ids(&self) -> impl Iterator<Item = CoordId> + '_ {
        (0..self.coords.len()).map(|i| CoordId(i as u16))
    }

    pub fn coordinate(&self, id: CoordId) -> &Coordinate {
        &self.coords[id.0 as usize]
    }

    pub fn degree(&self, id: CoordId) -> u32 {
        self.coords[id.0 as usize].degree
    }

    pub fn is_odd(&self, id: CoordId) -> bool {
        self.coords[id.0 as usize].is_odd()
    }

    pub fn find(&self, family: &str, index: Option<u32>) -> Option<CoordId> {
        self.coords
            .iter()
            .position(|c| c.family == family && c.index == index)
            .map(|i| CoordId(i as u16))
    }

    /// Looks a coordinate up by its rendered name (`x[1]`, `xi`).
    pub fn find_by_name(&self, name: &str) -> Option<CoordId> {
        self.coords.iter().position(|c| c.name() == name).map(|i| CoordId(i as u16))
    }

    /// Members of a family in declaration order.
    pub fn family(&self, family: &str) -> Vec<CoordId> {
        self.coord_ids().filter(|&id| self.coordinate(id).family == family).collect()
    }

    pub fn has_family(&self, family: &str) -> bool {
        self.coords.iter().any(|c| c.family == family)
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn symbol_decl(&self, id: SymbolId) -> &SymbolDecl {
        &self.symbols[id.0 as usize]
    }

    pub fn find_symbol(&self, name: &str) -> Option<SymbolId> {
        self.symbols.iter().position(|s| s.name == name).map(|i| SymbolId(i as u16))
    }

    /// Degree-0 coordinates in declaration order. Derivative indices of
    /// coefficient symbols refer to positions in this list (1-based).
    pub fn base_coords(&self) -> &[CoordId] {
        &self.base
    }

    /// 1-based position of a degree-0 coordinate.
    pub fn base_position(&self, id: CoordId) -> Option<u32> {
        self.base.iter().position(|&b| b == id).map(|p| p as u32 + 1)
    }

    pub fn base_coord(&self, position: u32) -> Result<CoordId> {
        if position == 0 || position as usize > self.base.len() {
            return Err(Error::DerivativeIndex { index: position, available: self.base.len() });
        }
        Ok(self.base[position as usize - 1])
    }

    /// Family name used for "functions of x" in classical rendering.
    pub(crate) fn base_family_label(&self) -> String {
        let mut families: Vec<&str> = self.base.iter().map(|&b| self.coordinate(b).family()).collect();
        families.dedup();
        match families.as_slice() {
            [one] => (*one).to_string(),
            _ => "x".to_string(),
        }
    }
}

/// Incremental construction of a [`Chart`].
#[derive(Clone, Debug, Default)]
pub struct ChartBuilder {
    coords: Vec<Coordinate>,
    symbols: Vec<SymbolDecl>,
    names: BTreeSet<String>,
}

impl ChartBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from an existing chart; identifiers of its coordinates and
    /// symbols are preserved.
    pub fn extend(chart: &Chart) -> Self {
        let mut names = BTreeSet::new();
        for c in &chart.coords {
            names.insert(c.family.clone());
        }
        for s in &chart.symbols {
            names.insert(s.name.clone());
        }
        ChartBuilder { coords: chart.coords.clone(), symbols: chart.symbols.clone(), names }
    }

    pub fn coord(&mut self, family: &str, index: Option<u32>, degree: u32) -> Result<CoordId> {
        if self.coords.len() >= u16::MAX as usize {
            return Err(Error::DuplicateName(family.into()));
        }
        let existing: Vec<&Coordinate> = self.coords.iter().filter(|c| c.family == family).collect();
        if existing.is_empty() {
            if self.names.contains(family) {
                return Err(Error::DuplicateName(family.into()));
            }
        } else if existing.iter().any(|c| c.index == index || c.index.is_none() != index.is_none()) {
            let name = Coordinate { family: family.into(), index, degree }.name();
            return Err(Error::DuplicateName(name));
        }
        self.names.insert(family.into());
        self.coords.push(Coordinate { family: family.into(), index, degree });
        Ok(CoordId(self.coords.len() as u16 - 1))
    }

    /// Declares `family[i]` for every `i` in `range`.
    pub fn family(&mut self, family: &str, range: RangeInclusive<u32>, degree: u32) -> Result<Vec<CoordId>> {
        range.map(|i| self.coord(family, Some(i), degree)).collect()
    }

    pub fn symbol(&mut self, decl: SymbolDecl) -> Result<SymbolId> {
        decl.validate()?;
        if !self.names.insert(decl.name.clone()) {
            return Err(Error::DuplicateName(decl.name.clone()));
        }
        self.symbols.push(decl);
        Ok(SymbolId(self.symbols.len() as u16 - 1))
    }

    pub fn build(self) -> Result<Arc<Chart>> {
        for s in &self.symbols {
            if let Some(other) = &s.inverse_of {
                let target = self
                    .symbols
                    .iter()
                    .find(|t| &t.name == other)
                    .ok_or_else(|| Error::UnknownSymbol(other.clone()))?;
                if s.arity != 2 || target.arity != 2 {
                    return Err(Error::SymmetryDeclaration {
                        symbol: s.name.clone(),
                        reason: "inverse pairs must both take two indices".into(),
                    });
                }
            }
        }
        let base = self
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| c.degree == 0)
            .map(|(i, _)| CoordId(i as u16))
            .collect();
        Ok(Arc::new(Chart { coords: self.coords, symbols: self.symbols, base }))
    }
}
