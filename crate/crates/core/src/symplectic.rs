//! Constant graded symplectic structures and their Poisson brackets.
//!
//! # Sign convention
//!
//! A structure of degree `N` is a constant table `P[i][j] = {z_i, z_j}` on
//! generators, nonzero only when `|z_i| + |z_j| = N`, graded antisymmetric:
//!
//! ```text
//! P[j][i] = -(-1)^(|z_i||z_j|) P[i][j]
//! ```
//!
//! and the bracket of arbitrary polynomials is
//!
//! ```text
//! {f, g} = sum_(i,j) (f ∂/∂z_i from the right) P[i][j] (∂/∂z_j g from the left)
//! ```
//!
//! This is the only place the convention is fixed. It yields a bracket of
//! degree `-N` satisfying graded antisymmetry, both Leibniz rules and the
//! graded Jacobi identity with exponents `(|f|-N)(|g|-N)` etc. A Darboux pair
//! `(a, b, s)` means `{a, b} = s`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::chart::{Chart, CoordId};
use crate::error::Error;
use crate::mutation::{self, Mutation};
use crate::poly::{same_chart, Poly, Side};
use crate::Result;

/// A pairing block used to assemble a structure.
///
/// `weights[a][b]` is `{left[a], right[b]}`. When `left == right` the block
/// pairs a family with itself (e.g. `k^{AB} η_A η_B`-type metrics).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub left: Vec<CoordId>,
    pub right: Vec<CoordId>,
    pub weights: Vec<Vec<Poly>>,
}

impl Block {
    /// `{a, b} = sign`.
    pub fn pair(chart: &Arc<Chart>, a: CoordId, b: CoordId, sign: i8) -> Block {
        Block { left: alloc::vec![a], right: alloc::vec![b], weights: alloc::vec![alloc::vec![Poly::int(chart, sign as i64)]] }
    }

    pub fn weighted(left: Vec<CoordId>, right: Vec<CoordId>, weights: Vec<Vec<Poly>>) -> Block {
        Block { left, right, weights }
    }

    pub fn self_paired(coords: Vec<CoordId>, weights: Vec<Vec<Poly>>) -> Block {
        Block { left: coords.clone(), right: coords, weights }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticStructure {
    chart: Arc<Chart>,
    degree: u32,
    table: BTreeMap<(CoordId, CoordId), Poly>,
}

impl SymplecticStructure {
    /// Darboux pairs `(a, b, s)` with `{a, b} = s`, `s = ±1`.
    pub fn darboux(chart: &Arc<Chart>, pairs: &[(CoordId, CoordId, i8)], degree: u32) -> Result<Self> {
        let mut blocks = Vec::with_capacity(pairs.len());
        for &(a, b, s) in pairs {
            if s != 1 && s != -1 {
                return Err(Error::Weight(format!("for ({}, {}) must be +1 or -1", chart.coordinate(a), chart.coordinate(b))));
            }
            blocks.push(Block::pair(chart, a, b, s));
        }
        Self::new(chart, degree, blocks)
    }

    pub fn new(chart: &Arc<Chart>, degree: u32, blocks: Vec<Block>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut table = BTreeMap::new();
        for block in &blocks {
            let own = block.left == block.right;
            let members: Vec<CoordId> =
                if own { block.left.clone() } else { block.left.iter().chain(&block.right).copied().collect() };
            for &z in &members {
                if !seen.insert(z) {
                    return Err(Error::DuplicatePairing(chart.coordinate(z).name()));
                }
            }
            if block.weights.len() != block.left.len() || block.weights.iter().any(|r| r.len() != block.right.len()) {
                return Err(Error::Weight("matrix shape does not match the block".into()));
            }
            for (a, &za) in block.left.iter().enumerate() {
                for (b, &zb) in block.right.iter().enumerate() {
                    let w = &block.weights[a][b];
                    if !same_chart(chart, w.chart()) {
                        return Err(Error::ChartMismatch);
                    }
                    if w.is_zero() {
                        continue;
                    }
                    if own && table.contains_key(&(za, zb)) {
                        continue;
                    }
                    let mirror = mirror_weight(chart, za, zb, w);
                    if own && block.weights[b][a] != mirror {
                        return Err(Error::Weight(format!(
                            "self-pairing of `{}` is not graded antisymmetric",
                            chart.coordinate(za)
                        )));
                    }
                    table.insert((za, zb), w.clone());
                    table.insert((zb, za), mirror);
                }
            }
        }
        for z in chart.coord_ids() {
            if !seen.contains(&z) {
                return Err(Error::Unpaired(chart.coordinate(z).name()));
            }
        }
        Self::from_table(chart, degree, table)
    }

    /// Validates a complete generator table `{z_i, z_j}`.
    pub fn from_table(chart: &Arc<Chart>, degree: u32, table: BTreeMap<(CoordId, CoordId), Poly>) -> Result<Self> {
        let mut table = table;
        table.retain(|_, v| !v.is_zero());
        for (&(a, b), w) in &table {
            let (da, db) = (chart.degree(a), chart.degree(b));
            if da + db != degree {
                return Err(Error::DegreeSum {
                    left: chart.coordinate(a).name(),
                    right: chart.coordinate(b).name(),
                    sum: da + db,
                    degree,
                });
            }
            let constant = w.terms().all(|(m, _)| m.gens().is_empty() && m.funcs().iter().all(|s| s.is_constant(chart)));
            if !constant {
                return Err(Error::Weight(format!(
                    "{{{}, {}}} = {w} is not constant",
                    chart.coordinate(a),
                    chart.coordinate(b)
                )));
            }
            let back = table.get(&(b, a)).cloned().unwrap_or_else(|| Poly::zero(chart));
            if back != mirror_weight(chart, a, b, w) {
                return Err(Error::Weight(format!(
                    "table is not graded antisymmetric at ({}, {})",
                    chart.coordinate(a),
                    chart.coordinate(b)
                )));
            }
        }
        for z in chart.coord_ids() {
            if !table.keys().any(|&(a, _)| a == z) {
                return Err(Error::Unpaired(chart.coordinate(z).name()));
            }
        }
        // every degree class pairs nondegenerately with its complement
        let mut classes: BTreeMap<u32, Vec<CoordId>> = BTreeMap::new();
        for z in chart.coord_ids() {
            classes.entry(chart.degree(z)).or_default().push(z);
        }
        for (&d, rows) in &classes {
            if 2 * d > degree {
                continue;
            }
            let cols = classes.get(&(degree - d)).cloned().unwrap_or_default();
            if cols.len() != rows.len() {
                return Err(Error::Degenerate(format!(
                    "{} coordinates of degree {d} against {} of degree {}",
                    rows.len(),
                    cols.len(),
                    degree - d
                )));
            }
            let m: Vec<Vec<Poly>> = rows
                .iter()
                .map(|&r| cols.iter().map(|&c| table.get(&(r, c)).cloned().unwrap_or_else(|| Poly::zero(chart))).collect())
                .collect();
            if determinant(chart, &m).is_zero() {
                return Err(Error::Degenerate(format!("pairing of degree-{d} coordinates is singular")));
            }
        }
        Ok(SymplecticStructure { chart: chart.clone(), degree, table })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    /// The degree `N` of the symplectic form; the bracket has degree `-N`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Nonzero generator brackets `{z_i, z_j}`.
    pub fn table(&self) -> &BTreeMap<(CoordId, CoordId), Poly> {
        &self.table
    }

    pub fn generator_bracket(&self, a: CoordId, b: CoordId) -> Poly {
        self.table.get(&(a, b)).cloned().unwrap_or_else(|| Poly::zero(&self.chart))
    }

    /// Coordinates with a nonzero bracket against `z`.
    pub fn partners(&self, z: CoordId) -> Vec<CoordId> {
        self.table.keys().filter(|k| k.0 == z).map(|k| k.1).collect()
    }

    pub fn bracket(&self, f: &Poly, g: &Poly) -> Result<Poly> {
        if !same_chart(&self.chart, f.chart()) || !same_chart(&self.chart, g.chart()) {
            return Err(Error::ChartMismatch);
        }
        let mut right: BTreeMap<CoordId, Poly> = BTreeMap::new();
        let mut left: BTreeMap<CoordId, Poly> = BTreeMap::new();
        let mut out = Poly::zero(&self.chart);
        if f.is_zero() || g.is_zero() {
            return Ok(out);
        }
        for (&(i, j), w) in &self.table {
            let fi = right.entry(i).or_insert_with(|| f.partial(i, Side::Right));
            if fi.is_zero() {
                continue;
            }
            let gj = left.entry(j).or_insert_with(|| g.partial(j, Side::Left));
            if gj.is_zero() {
                continue;
            }
            out += &(&*fi * w * &*gj);
        }
        if mutation::active(Mutation::FlipBracketSign) {
            out = -out;
        }
        Ok(out)
    }
}

fn mirror_weight(chart: &Chart, a: CoordId, b: CoordId, w: &Poly) -> Poly {
    if (chart.degree(a) * chart.degree(b)) % 2 == 1 {
        w.clone()
    } else {
        -w
    }
}

/// Laplace expansion; fine for the small blocks that occur here.
pub(crate) fn determinant(chart: &Arc<Chart>, m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one(chart);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut out = Poly::zero(chart);
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, v)| v.clone()).collect())
            .collect();
        let t = &m[0][c] * determinant(chart, &minor);
        if c % 2 == 0 {
            out += &t;
        } else {
            out -= &t;
        }
    }
    out
}
