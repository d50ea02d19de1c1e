//! Current functions and the algebraic/anomalous split of their commutators.
//!
//! For current functions `J1`, `J2` on a QP pair the commutator of the
//! induced currents is fixed by two target-space polynomials:
//!
//! * the algebraic part, the coefficient of `δ(σ - σ')`, given by the derived
//!   bracket `{{J1, Θ}, J2}` restricted to the small manifold;
//! * the anomaly (Schwinger term), the coefficient of the derivative of the
//!   delta function, given by the big bracket `{J1, J2}` restricted likewise.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::chart::{Chart, CoordId};
use crate::error::{EntryError, Error};
use crate::poly::{Poly, Scalar};
use crate::qp::QPPair;
use crate::Result;

/// A function of degree at most `n` on the big manifold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurrentFunction {
    poly: Poly,
}

impl CurrentFunction {
    pub fn new(poly: Poly, n: u32) -> Result<Self> {
        let degree = poly.max_degree();
        if degree > n {
            return Err(Error::CurrentDegree { degree, bound: n });
        }
        Ok(CurrentFunction { poly })
    }

    /// Checks the bound against the pair's `n`.
    pub fn on(pair: &QPPair, poly: Poly) -> Result<Self> {
        Self::new(poly, pair.n())
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurrentCommutator {
    /// `{{J1, Θ}, J2}` on the small manifold, reduced.
    pub algebraic: Poly,
    /// `{J1, J2}` on the small manifold, reduced.
    pub anomaly: Poly,
    /// `{{J1, Θ}, J2}` before restriction.
    pub algebraic_unrestricted: Poly,
    /// `{J1, J2}` before restriction.
    pub anomaly_unrestricted: Poly,
}

pub fn current_commutator(pair: &QPPair, j1: &CurrentFunction, j2: &CurrentFunction) -> Result<CurrentCommutator> {
    commutator_with(pair, j1, j2, true)
}

/// As [`current_commutator`] but without reduction modulo the relations.
pub fn current_commutator_unreduced(
    pair: &QPPair,
    j1: &CurrentFunction,
    j2: &CurrentFunction,
) -> Result<CurrentCommutator> {
    commutator_with(pair, j1, j2, false)
}

fn commutator_with(pair: &QPPair, j1: &CurrentFunction, j2: &CurrentFunction, reduce: bool) -> Result<CurrentCommutator> {
    let n = pair.n();
    for j in [j1, j2] {
        let degree = j.poly.max_degree();
        if degree > n {
            return Err(Error::CurrentDegree { degree, bound: n });
        }
    }
    let big = pair.big();
    let derived = big.derived_bracket(&j1.poly, &j2.poly)?;
    let anomaly = big.bracket(&j1.poly, &j2.poly)?;
    let finish = |p: &Poly| -> Result<Poly> {
        let r = pair.restrict(p)?;
        Ok(if reduce { big.reduce(&r) } else { r })
    };
    Ok(CurrentCommutator {
        algebraic: finish(&derived)?,
        anomaly: finish(&anomaly)?,
        algebraic_unrestricted: if reduce { big.reduce(&derived) } else { derived },
        anomaly_unrestricted: if reduce { big.reduce(&anomaly) } else { anomaly },
    })
}

/// Twists every element by the pair's `α`. The elements must span a
/// commutative subspace (pairwise vanishing big bracket), so that the twisted
/// currents carry no anomaly.
pub fn twist_current_basis(pair: &QPPair, basis: &[CurrentFunction], max_order: usize) -> Result<Vec<CurrentFunction>> {
    let big = pair.big();
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i..] {
            let c = big.reduce(&big.bracket(&a.poly, &b.poly)?);
            if !c.is_zero() {
                return Err(Error::NotCommuting { left: a.poly.render(), right: b.poly.render(), value: c.render() });
            }
        }
    }
    basis
        .iter()
        .map(|j| {
            let t = pair.twist(&j.poly, max_order)?;
            CurrentFunction::on(pair, t.value)
        })
        .collect()
}

pub struct CommutatorTable {
    size: usize,
    entries: Vec<CurrentCommutator>,
}

impl CommutatorTable {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> &CurrentCommutator {
        &self.entries[row * self.size + col]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &CurrentCommutator)> {
        self.entries.iter().enumerate().map(move |(k, c)| (k / self.size, k % self.size, c))
    }

    /// Assembles a table from externally computed entries (row-major).
    pub fn from_entries(size: usize, entries: Vec<CurrentCommutator>) -> Self {
        assert_eq!(entries.len(), size * size, "table needs size^2 entries");
        CommutatorTable { size, entries }
    }
}

/// All pairwise commutators; failures are collected rather than stopping at
/// the first one.
pub fn commutator_table(pair: &QPPair, currents: &[CurrentFunction]) -> Result<CommutatorTable> {
    let mut entries = Vec::with_capacity(currents.len() * currents.len());
    let mut failures = Vec::new();
    for (row, a) in currents.iter().enumerate() {
        for (col, b) in currents.iter().enumerate() {
            match current_commutator(pair, a, b) {
                Ok(c) => entries.push(c),
                Err(error) => failures.push(EntryError { row, col, error }),
            }
        }
    }
    if failures.is_empty() {
        Ok(CommutatorTable { size: currents.len(), entries })
    } else {
        Err(Error::Table(failures))
    }
}

/// Classical text form of a current function: every Lagrangian coordinate
/// `ℓ` is written through the differentials `dw` of the small coordinates,
/// inverting `{w, Θ} = sum M[w][ℓ] ℓ`. Non-constant coefficients are shown
/// as functions of the base, e.g. `a[1](x) dx[1] + u[1](x) p[1]`.
///
/// Purely presentational; the output is not meant to be parsed.
pub fn render_classical(j: &CurrentFunction, pair: &QPPair) -> String {
    let chart = pair.chart();
    let replacements = differential_forms(pair);
    let base = chart.base_family_label();
    if j.poly.is_zero() {
        return "0".into();
    }
    // terms are rendered first and signed afterwards, since a replacement
    // such as `-dx` flips the sign of the term it lands in
    let mut rendered: Vec<(bool, String)> = Vec::new();
    for (m, c) in j.poly.terms() {
        let mut parts: Vec<String> = Vec::new();
        let magnitude = c.abs();
        if !magnitude.is_one() || m.is_one() {
            parts.push(format!("{magnitude}"));
        }
        for s in m.funcs() {
            let mut t = s.render(chart);
            if !s.is_constant(chart) {
                t.push_str(&format!("({base})"));
            }
            parts.push(t);
        }
        let mut flip = false;
        for &(z, e) in m.gens() {
            let text = match replacements.get(&z) {
                Some((r, neg)) => {
                    flip ^= *neg && e % 2 == 1;
                    r.clone()
                }
                None => chart.coordinate(z).name(),
            };
            for _ in 0..e {
                parts.push(text.clone());
            }
        }
        rendered.push((c.is_negative() != flip, parts.join(" ")));
    }
    let mut out = String::new();
    for (k, (negative, text)) in rendered.into_iter().enumerate() {
        out.push_str(match (k, negative) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        out.push_str(&text);
    }
    out
}

/// Replacement text for each Lagrangian coordinate, with a flag for an
/// overall minus sign.
fn differential_forms(pair: &QPPair) -> BTreeMap<CoordId, (String, bool)> {
    let chart = pair.chart();
    let big = pair.big();
    let lag = pair.lagrangian();
    // M[w][ℓ] as polynomials in the coefficient symbols
    let mut m: BTreeMap<(CoordId, CoordId), Poly> = BTreeMap::new();
    for &w in pair.surviving() {
        let Ok(v) = big.bracket(&Poly::coord(chart, w), big.theta()) else { continue };
        let v = big.reduce(&v);
        for (mono, c) in v.terms() {
            if let [(z, 1)] = mono.gens() {
                if lag.contains(z) {
                    let (funcs, _) = mono.split();
                    let entry = m.entry((w, *z)).or_insert_with(|| Poly::zero(chart));
                    *entry += &Poly::monomial(chart, funcs, c.clone());
                }
            }
        }
    }
    m.retain(|_, v| !v.is_zero());
    let mut out = BTreeMap::new();
    let mut degrees: Vec<u32> = lag.iter().map(|&z| chart.degree(z)).collect();
    degrees.sort_unstable();
    degrees.dedup();
    for d in degrees {
        let cols: Vec<CoordId> = lag.iter().copied().filter(|&z| chart.degree(z) == d).collect();
        let rows: Vec<CoordId> =
            pair.surviving().iter().copied().filter(|&w| cols.iter().any(|&l| m.contains_key(&(w, l)))).collect();
        if rows.len() != cols.len() || rows.is_empty() {
            continue;
        }
        let get = |w: CoordId, l: CoordId| m.get(&(w, l)).cloned().unwrap_or_else(|| Poly::zero(chart));
        let inverse = rational_inverse(chart, &rows, &cols, &get).or_else(|| symbolic_inverse(chart, &rows, &cols, &get));
        let Some(inverse) = inverse else { continue };
        for (b, &l) in cols.iter().enumerate() {
            let terms: Vec<(String, bool)> = rows
                .iter()
                .enumerate()
                .filter_map(|(a, &w)| {
                    inverse[b][a].as_ref().map(|(coef, neg)| {
                        let dw = format!("d{}", chart.coordinate(w));
                        (if coef.is_empty() { dw } else { format!("{coef} {dw}") }, *neg)
                    })
                })
                .collect();
            let mut text = String::new();
            for (k, (t, neg)) in terms.iter().enumerate() {
                text.push_str(match (k, neg) {
                    (0, true) => "-",
                    (0, false) => "",
                    (_, true) => " - ",
                    (_, false) => " + ",
                });
                text.push_str(t);
            }
            if let [(single, true)] = terms.as_slice() {
                out.insert(l, (single.clone(), true));
                continue;
            }
            if terms.len() > 1 {
                text = format!("({text})");
            }
            out.insert(l, (text, false));
        }
    }
    out
}

/// Entries of an inverse matrix as (coefficient text, negative) pairs.
type InverseText = Vec<Vec<Option<(String, bool)>>>;

fn rational_inverse(
    _chart: &Chart,
    rows: &[CoordId],
    cols: &[CoordId],
    get: &dyn Fn(CoordId, CoordId) -> Poly,
) -> Option<InverseText> {
    let n = rows.len();
    let mut a: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    for &w in rows {
        let mut row = Vec::with_capacity(2 * n);
        for &l in cols {
            let p = get(w, l);
            let mut terms = p.terms();
            let v = match (terms.next(), terms.next()) {
                (None, _) => Scalar::zero(),
                (Some((m, c)), None) if m.is_one() => c.clone(),
                _ => return None,
            };
            row.push(v);
        }
        a.push(row);
    }
    // Gauss-Jordan on [A | I]
    for (i, row) in a.iter_mut().enumerate() {
        row.extend((0..n).map(|k| if k == i { Scalar::one() } else { Scalar::zero() }));
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = Scalar::one() / a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                let pivot = a[col].clone();
                for (entry, p) in a[r].iter_mut().zip(&pivot) {
                    *entry -= &factor * p;
                }
            }
        }
    }
    // inverse[b][a] = (A^{-1})[b][a], A indexed [w][ℓ]
    Some(
        (0..n)
            .map(|b| {
                (0..n)
                    .map(|r| {
                        let v = &a[b][n + r];
                        (!v.is_zero()).then(|| {
                            let mag = v.abs();
                            (if mag.is_one() { String::new() } else { format!("{mag}") }, v.is_negative())
                        })
                    })
                    .collect()
            })
            .collect(),
    )
}

/// Handles `M = c * S` for a two-index symbol `S` with a declared inverse.
fn symbolic_inverse(
    chart: &Chart,
    rows: &[CoordId],
    cols: &[CoordId],
    get: &dyn Fn(CoordId, CoordId) -> Poly,
) -> Option<InverseText> {
    let mut common: Option<(crate::chart::SymbolId, Scalar)> = None;
    for &w in rows {
        for &l in cols {
            let p = get(w, l);
            for (m, c) in p.terms() {
                let [s] = m.funcs() else { return None };
                if !m.gens().is_empty() || s.indices().len() != 2 {
                    return None;
                }
                match &common {
                    None => common = Some((s.base(), c.clone())),
                    Some((b, k)) if *b == s.base() && k == c => {}
                    _ => return None,
                }
            }
        }
    }
    let (base, c) = common?;
    let name = chart.symbol_decl(base).name();
    let inverse = chart
        .symbol_decl(base)
        .inverse_name()
        .map(String::from)
        .or_else(|| chart.symbols().iter().find(|s| s.inverse_name() == Some(name)).map(|s| s.name().into()))?;
    let factor = Scalar::one() / c;
    let mag = factor.abs();
    let prefix = if mag.is_one() { String::new() } else { format!("{mag} ") };
    let idx = |z: CoordId| chart.coordinate(z).index().unwrap_or(1);
    Some(
        cols.iter()
            .map(|&l| {
                rows.iter()
                    .map(|&w| Some((format!("{prefix}{inverse}[{},{}]", idx(l), idx(w)), factor.is_negative())))
                    .collect()
            })
            .collect(),
    )
}
