//! Side conditions on coefficient symbols and reduction modulo them.
//!
//! A relation rewrites a product of symbols (its leading monomial) into a
//! polynomial of strictly smaller symbol products. Symbol products are
//! compared as multisets: sort descending, then compare lexicographically
//! with a proper prefix counting as smaller. That order is well founded and
//! compatible with multiplication, so exhaustive rewriting terminates.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{One, Zero};

use crate::chart::Chart;
use crate::error::Error;
use crate::poly::{same_chart, Monomial, Poly, Scalar};
use crate::render::render_factors;
use crate::symbol::Sym;
use crate::Result;

fn cmp_products(a: &[Sym], b: &[Sym]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

/// `lead = replacement` with `lead` a product of coefficient symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    lead: Vec<Sym>,
    replacement: Poly,
}

impl Relation {
    /// `lead` must be a single symbol product (any nonzero coefficient is
    /// divided out); `replacement` must consist of symbols only, each term
    /// smaller than the lead.
    pub fn new(lead: &Poly, replacement: &Poly) -> Result<Relation> {
        let chart = lead.chart();
        if !same_chart(chart, replacement.chart()) {
            return Err(Error::ChartMismatch);
        }
        let mut terms = lead.terms();
        let (m, c) = match (terms.next(), terms.next()) {
            (Some(t), None) => t,
            _ => return Err(Error::Relation(format!("leading side `{lead}` must be a single term"))),
        };
        if !m.gens().is_empty() || m.funcs().is_empty() {
            return Err(Error::Relation(format!("leading side `{lead}` must be a product of coefficient symbols")));
        }
        let inv = Scalar::one() / c.clone();
        Self::checked(chart, m.funcs().to_vec(), replacement.scale(&inv))
    }

    /// Turns `poly = 0` into a rule, using its largest symbol product as lead.
    pub fn from_zero(poly: &Poly) -> Result<Relation> {
        let chart = poly.chart();
        let (m, c) = poly
            .terms()
            .max_by(|a, b| cmp_products(a.0.funcs(), b.0.funcs()))
            .ok_or_else(|| Error::Relation("`0 = 0` carries no information".into()))?;
        if !m.gens().is_empty() {
            return Err(Error::Relation(format!("`{poly}` involves coordinates, not only coefficient symbols")));
        }
        let lead = Poly::monomial(chart, m.clone(), c.clone());
        let rest = &lead - poly;
        Self::new(&lead, &rest)
    }

    fn checked(chart: &Arc<Chart>, lead: Vec<Sym>, replacement: Poly) -> Result<Relation> {
        for (m, _) in replacement.terms() {
            let lead_text = || render_factors(&Monomial::from_sorted(chart, lead.clone(), Vec::new()).unwrap(), chart);
            if !m.gens().is_empty() {
                return Err(Error::Relation(format!(
                    "replacement for `{}` involves coordinates",
                    lead_text()
                )));
            }
            if cmp_products(m.funcs(), &lead) != Ordering::Less {
                return Err(Error::RelationOrder { lead: lead_text(), term: render_factors(m, chart) });
            }
        }
        Ok(Relation { lead, replacement })
    }

    pub fn lead(&self) -> &[Sym] {
        &self.lead
    }

    pub fn replacement(&self) -> &Poly {
        &self.replacement
    }

    /// The relation written as `lead - replacement`.
    pub fn as_zero(&self) -> Poly {
        let chart = self.replacement.chart();
        let lead = Monomial::from_sorted(chart, self.lead.clone(), Vec::new()).expect("lead is sorted");
        Poly::monomial(chart, lead, Scalar::one()) - &self.replacement
    }

    pub fn render(&self) -> String {
        let chart = self.replacement.chart();
        let lead = Monomial::from_sorted(chart, self.lead.clone(), Vec::new()).expect("lead is sorted");
        format!("{} = {}", render_factors(&lead, chart), self.replacement)
    }

    /// If `funcs` contains the lead as a sub-multiset, the remaining symbols.
    fn divides(&self, funcs: &[Sym]) -> Option<Vec<Sym>> {
        let mut rest = Vec::with_capacity(funcs.len());
        let mut it = self.lead.iter().peekable();
        for f in funcs {
            if it.peek() == Some(&f) {
                it.next();
            } else {
                rest.push(f.clone());
            }
        }
        it.peek().is_none().then_some(rest)
    }
}

/// An ordered list of relations on one chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationSet {
    chart: Arc<Chart>,
    relations: Vec<Relation>,
}

impl RelationSet {
    pub fn new(chart: &Arc<Chart>) -> Self {
        RelationSet { chart: chart.clone(), relations: Vec::new() }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn push(&mut self, relation: Relation) -> Result<()> {
        if !same_chart(&self.chart, relation.replacement.chart()) {
            return Err(Error::ChartMismatch);
        }
        self.relations.push(relation);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Relation>>(&mut self, relations: I) -> Result<()> {
        for r in relations {
            self.push(r)?;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Relation> {
        self.relations.iter()
    }

    /// Re-expresses every relation on another chart (matching by name).
    pub fn transfer(&self, target: &Arc<Chart>) -> Result<RelationSet> {
        let mut out = RelationSet::new(target);
        for r in &self.relations {
            out.push(Relation::from_zero(&r.as_zero().transfer(target)?)?)?;
        }
        Ok(out)
    }

    /// Normal form under exhaustive rewriting; the first matching relation
    /// in declaration order is applied.
    pub fn reduce(&self, p: &Poly) -> Poly {
        if self.relations.is_empty() {
            return p.clone();
        }
        let chart = p.chart();
        let mut work: BTreeMap<Monomial, Scalar> = p.clone().into_terms();
        let mut done = Poly::zero(chart);
        while let Some((m, c)) = work.pop_last() {
            let hit = self.relations.iter().find_map(|r| r.divides(m.funcs()).map(|rest| (r, rest)));
            let Some((r, rest)) = hit else {
                done.add_term(m, c);
                continue;
            };
            let outer = Monomial::from_sorted(chart, rest, m.gens().to_vec()).expect("sub-multiset stays sorted");
            for (rm, rc) in r.replacement.terms() {
                let (prod, negative) = outer.mul(rm, chart).expect("replacement has no generators");
                debug_assert!(!negative);
                let v = &c * rc;
                match work.entry(prod) {
                    alloc::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(v);
                    }
                    alloc::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() += v;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                }
            }
        }
        done
    }
}

/// Closedness of a totally antisymmetric symbol `H[I1..Ik]` read as the
/// components of a k-form on the degree-0 coordinates: for every increasing
/// (k+1)-tuple, `sum_j (-1)^j d[I_j]H[I_0..^I_j..I_k] = 0`.
pub fn closedness_relations(chart: &Arc<Chart>, name: &str) -> Result<Vec<Relation>> {
    let base = chart.find_symbol(name).ok_or_else(|| Error::UnknownSymbol(name.into()))?;
    let decl = chart.symbol_decl(base);
    let k = decl.arity();
    let dim = chart.base_coords().len() as u32;
    let mut out = Vec::new();
    let mut tuple: Vec<u32> = (1..=k as u32 + 1).collect();
    if tuple.len() as u32 > dim {
        return Ok(out);
    }
    loop {
        let mut poly = Poly::zero(chart);
        for j in 0..tuple.len() {
            let mut rest = tuple.clone();
            let i = rest.remove(j);
            let term = Poly::func(chart, name, &rest, &[i])?;
            if j % 2 == 0 {
                poly += &term;
            } else {
                poly -= &term;
            }
        }
        if !poly.is_zero() {
            out.push(Relation::from_zero(&poly)?);
        }
        // next increasing tuple in lexicographic order
        let mut pos = tuple.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            let limit = dim - (tuple.len() - 1 - pos) as u32;
            if tuple[pos] < limit {
                tuple[pos] += 1;
                for q in pos + 1..tuple.len() {
                    tuple[q] = tuple[q - 1] + 1;
                }
                break;
            }
        }
    }
}
