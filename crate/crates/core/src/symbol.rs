//! Formal coefficient functions with concrete indices and derivatives.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use crate::chart::{Chart, SymbolId, Symmetry};
use crate::error::Error;
use crate::Result;

/// A coefficient symbol such as `pi[1,2]` or `d[1,3]H[1,2,3]`.
///
/// Indices are stored canonically (sorted inside each declared symmetry
/// block), derivative positions are sorted. Derivative positions are
/// 1-based indices into [`Chart::base_coords`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sym {
    base: SymbolId,
    indices: Vec<u32>,
    derivs: Vec<u32>,
}

impl Sym {
    /// Canonicalizes the raw data. Returns the symbol with the sign picked up
    /// from antisymmetric reorderings, or `None` when the symbol vanishes
    /// identically.
    pub fn new(chart: &Chart, base: SymbolId, indices: Vec<u32>, derivs: Vec<u32>) -> Result<Option<(Sym, bool)>> {
        let decl = chart.symbol_decl(base);
        if indices.len() != decl.arity() {
            return Err(Error::IndexArity {
                symbol: decl.name().into(),
                expected: decl.arity(),
                found: indices.len(),
            });
        }
        let available = chart.base_coords().len();
        for &d in &derivs {
            if d == 0 || d as usize > available {
                return Err(Error::DerivativeIndex { index: d, available });
            }
        }
        Ok(Self::canonical(chart, base, indices, derivs))
    }

    /// Looks the base symbol up by name.
    pub fn named(chart: &Chart, name: &str, indices: &[u32], derivs: &[u32]) -> Result<Option<(Sym, bool)>> {
        let base = chart.find_symbol(name).ok_or_else(|| Error::UnknownSymbol(name.into()))?;
        Self::new(chart, base, indices.to_vec(), derivs.to_vec())
    }

    fn canonical(chart: &Chart, base: SymbolId, mut indices: Vec<u32>, mut derivs: Vec<u32>) -> Option<(Sym, bool)> {
        let decl = chart.symbol_decl(base);
        if decl.is_constant() && !derivs.is_empty() {
            return None;
        }
        let mut negative = false;
        for block in decl.blocks() {
            let slots = &mut indices[block.start..block.start + block.len];
            match block.kind {
                Symmetry::Symmetric => slots.sort_unstable(),
                Symmetry::Antisymmetric => {
                    // insertion sort, counting transpositions
                    for i in 1..slots.len() {
                        let mut j = i;
                        while j > 0 && slots[j - 1] > slots[j] {
                            slots.swap(j - 1, j);
                            negative = !negative;
                            j -= 1;
                        }
                    }
                    if slots.windows(2).any(|w| w[0] == w[1]) {
                        return None;
                    }
                }
            }
        }
        derivs.sort_unstable();
        Some((Sym { base, indices, derivs }, negative))
    }

    pub fn base(&self) -> SymbolId {
        self.base
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn derivs(&self) -> &[u32] {
        &self.derivs
    }

    /// `∂/∂x^position` of this symbol, `None` if it is constant.
    pub fn derivative(&self, chart: &Chart, position: u32) -> Option<Sym> {
        if chart.symbol_decl(self.base).is_constant() {
            return None;
        }
        let mut derivs = self.derivs.clone();
        let at = derivs.partition_point(|&d| d <= position);
        derivs.insert(at, position);
        Some(Sym { base: self.base, indices: self.indices.clone(), derivs })
    }

    pub fn is_constant(&self, chart: &Chart) -> bool {
        chart.symbol_decl(self.base).is_constant()
    }

    /// Canonical text: `d[1,2]H[1,2,3]`, `pi[1,2]`, `f`.
    pub fn render(&self, chart: &Chart) -> String {
        let mut out = String::new();
        if !self.derivs.is_empty() {
            out.push('d');
            push_list(&mut out, &self.derivs);
        }
        out.push_str(chart.symbol_decl(self.base).name());
        if !self.indices.is_empty() {
            push_list(&mut out, &self.indices);
        }
        out
    }
}

fn push_list(out: &mut String, items: &[u32]) {
    out.push('[');
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push(']');
}

/// Symbols compare by declaration rank of the base, then derivative order,
/// then indices, then derivative positions. Relations use this order to
/// choose leading terms, so higher derivatives dominate lower ones.
impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base
            .cmp(&other.base)
            .then(self.derivs.len().cmp(&other.derivs.len()))
            .then_with(|| self.indices.cmp(&other.indices))
            .then_with(|| self.derivs.cmp(&other.derivs))
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
