//! Homological functions, twisting, QP pairs and their obstructions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::chart::{Chart, ChartBuilder, CoordId};
use crate::error::Error;
use crate::mutation::{self, Mutation};
use crate::poly::{same_chart, scalar, Poly, Scalar};
use crate::relations::RelationSet;
use crate::symplectic::{Block, SymplecticStructure};
use crate::Result;

pub const DEFAULT_MAX_TWIST_ORDER: usize = 16;

/// An obstruction polynomial before and after reduction modulo relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstruction {
    pub raw: Poly,
    pub reduced: Poly,
}

impl Obstruction {
    pub fn vanishes(&self) -> bool {
        self.reduced.is_zero()
    }
}

/// Result of `e^{δ_α} f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Twisted {
    pub value: Poly,
    /// Highest order with a nonzero term (0 if `{f, α} = 0`).
    pub order: usize,
    /// Set when `α` does not have the degree of the structure.
    pub warning: Option<String>,
}

/// `e^{δ_α} f = f + {f,α} + 1/2 {{f,α},α} + ...`, summed until a term
/// vanishes. Fails if the term of order `max_order + 1` is still nonzero.
pub fn twist(structure: &SymplecticStructure, f: &Poly, alpha: &Poly, max_order: usize) -> Result<Twisted> {
    if max_order == 0 {
        return Err(Error::InvalidMaxOrder);
    }
    let warning = match alpha.homogeneous_degree() {
        Ok(Some(d)) if d != structure.degree() => {
            Some(format!("alpha has degree {d}, the structure has degree {}", structure.degree()))
        }
        Err(_) => Some("alpha is not homogeneous".into()),
        _ => None,
    };
    let mut value = f.clone();
    let mut term = f.clone();
    for k in 1..=max_order + 1 {
        term = structure.bracket(&term, alpha)?;
        if !mutation::active(Mutation::DropFactorial) {
            term = term.scale(&(Scalar::from_integer(1.into()) / scalar(k as i64)));
        }
        if term.is_zero() {
            return Ok(Twisted { value, order: k - 1, warning });
        }
        if k == max_order + 1 {
            break;
        }
        value += &term;
    }
    Err(Error::TwistNotTerminating { max_order })
}

/// A symplectic structure with a homological function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPManifold {
    structure: SymplecticStructure,
    theta: Poly,
    relations: RelationSet,
}

impl QPManifold {
    /// Only the degree of `theta` is checked here; see [`Self::check_master`].
    pub fn new(structure: SymplecticStructure, theta: Poly, relations: RelationSet) -> Result<Self> {
        if !same_chart(structure.chart(), theta.chart()) || !same_chart(structure.chart(), relations.chart()) {
            return Err(Error::ChartMismatch);
        }
        let expected = structure.degree() + 1;
        match theta.homogeneous_degree() {
            Ok(Some(d)) if d != expected => {
                return Err(Error::DegreeMismatch { context: "theta".into(), expected, found: d })
            }
            Err(_) => return Err(Error::Inhomogeneous("theta".into())),
            _ => {}
        }
        Ok(QPManifold { structure, theta, relations })
    }

    pub fn structure(&self) -> &SymplecticStructure {
        &self.structure
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.structure.chart()
    }

    pub fn theta(&self) -> &Poly {
        &self.theta
    }

    pub fn relations(&self) -> &RelationSet {
        &self.relations
    }

    pub fn degree(&self) -> u32 {
        self.structure.degree()
    }

    pub fn bracket(&self, f: &Poly, g: &Poly) -> Result<Poly> {
        self.structure.bracket(f, g)
    }

    pub fn reduce(&self, p: &Poly) -> Poly {
        self.relations.reduce(p)
    }

    fn obstruction(&self, raw: Poly) -> Obstruction {
        let reduced = self.relations.reduce(&raw);
        Obstruction { raw, reduced }
    }

    /// `{Θ, Θ}`; zero after reduction means the structure is QP.
    pub fn check_master(&self) -> Result<Obstruction> {
        Ok(self.obstruction(self.bracket(&self.theta, &self.theta)?))
    }

    /// `{{f, Θ}, g}` on the big manifold, unrestricted.
    pub fn derived_bracket(&self, f: &Poly, g: &Poly) -> Result<Poly> {
        let q = self.bracket(f, &self.theta)?;
        self.bracket(&q, g)
    }

    pub fn twist(&self, f: &Poly, alpha: &Poly, max_order: usize) -> Result<Twisted> {
        twist(&self.structure, f, alpha, max_order)
    }

    /// `{e^{δ_α}Θ, e^{δ_α}Θ}`, which vanishes whenever `{Θ, Θ}` does.
    pub fn twist_preserves_qp(&self, alpha: &Poly, max_order: usize) -> Result<Obstruction> {
        let t = self.twist(&self.theta, alpha, max_order)?.value;
        Ok(self.obstruction(self.bracket(&t, &t)?))
    }

    /// Same structure and relations with `Θ` replaced by `e^{δ_α}Θ`.
    pub fn twisted(&self, alpha: &Poly, max_order: usize) -> Result<QPManifold> {
        let t = self.twist(&self.theta, alpha, max_order)?.value;
        QPManifold::new(self.structure.clone(), t, self.relations.clone())
    }
}

/// A big QP manifold with a Lagrangian section and a canonical-function
/// candidate. The small manifold is the Lagrangian's complement and carries
/// the structure induced by the derived bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPPair {
    big: QPManifold,
    lagrangian: Vec<CoordId>,
    surviving: Vec<CoordId>,
    alpha: Poly,
    small_structure: SymplecticStructure,
}

impl QPPair {
    pub fn new(big: QPManifold, lagrangian: Vec<CoordId>, alpha: Poly) -> Result<Self> {
        let chart = big.chart().clone();
        if !same_chart(&chart, alpha.chart()) {
            return Err(Error::ChartMismatch);
        }
        let set: BTreeSet<CoordId> = lagrangian.iter().copied().collect();
        if set.len() != lagrangian.len() {
            return Err(Error::Lagrangian("a coordinate is listed twice".into()));
        }
        let total = chart.coords().len();
        if 2 * set.len() != total {
            return Err(Error::Lagrangian(format!("{} of {} coordinates; a Lagrangian takes half", set.len(), total)));
        }
        for &a in &set {
            for &b in &set {
                if !big.structure().generator_bracket(a, b).is_zero() {
                    return Err(Error::Lagrangian(format!(
                        "`{}` and `{}` are conjugate",
                        chart.coordinate(a),
                        chart.coordinate(b)
                    )));
                }
            }
        }
        for &z in &set {
            if alpha.contains(z) {
                return Err(Error::AlphaNotFiberConstant(chart.coordinate(z).name()));
            }
        }
        match alpha.homogeneous_degree() {
            Ok(Some(d)) if d != big.degree() => {
                return Err(Error::DegreeMismatch { context: "alpha".into(), expected: big.degree(), found: d })
            }
            Err(_) => return Err(Error::Inhomogeneous("alpha".into())),
            _ => {}
        }
        let surviving: Vec<CoordId> = chart.coord_ids().filter(|z| !set.contains(z)).collect();
        let small_chart = small_chart(&chart, &surviving)?;
        let mut table = BTreeMap::new();
        for &a in &surviving {
            for &b in &surviving {
                let v = big.derived_bracket(&Poly::coord(&chart, a), &Poly::coord(&chart, b))?;
                let v = big.reduce(&v.set_zero(&lagrangian)?);
                if v.is_zero() {
                    continue;
                }
                let small = v.transfer(&small_chart).map_err(|e| Error::Degenerate(format!("{e}")))?;
                let (sa, sb) = (small_index(&chart, &small_chart, a), small_index(&chart, &small_chart, b));
                table.insert((sa, sb), small);
            }
        }
        let small_structure =
            SymplecticStructure::from_table(&small_chart, big.degree() - 1, table).map_err(|e| match e {
                Error::Degenerate(m) => Error::Degenerate(m),
                other => Error::Degenerate(format!("{other}")),
            })?;
        let mut lagrangian = lagrangian;
        lagrangian.sort();
        Ok(QPPair { big, lagrangian, surviving, alpha, small_structure })
    }

    pub fn big(&self) -> &QPManifold {
        &self.big
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.big.chart()
    }

    pub fn lagrangian(&self) -> &[CoordId] {
        &self.lagrangian
    }

    pub fn surviving(&self) -> &[CoordId] {
        &self.surviving
    }

    pub fn alpha(&self) -> &Poly {
        &self.alpha
    }

    /// Degree `n` of the small manifold (the big one has degree `n + 1`).
    pub fn n(&self) -> u32 {
        self.big.degree() - 1
    }

    pub fn small_structure(&self) -> &SymplecticStructure {
        &self.small_structure
    }

    pub fn small_chart(&self) -> &Arc<Chart> {
        self.small_structure.chart()
    }

    /// Sets the Lagrangian coordinates to zero (stays on the big chart).
    pub fn restrict(&self, p: &Poly) -> Result<Poly> {
        p.set_zero(&self.lagrangian)
    }

    /// Restriction followed by transfer to the small chart.
    pub fn to_small(&self, p: &Poly) -> Result<Poly> {
        self.restrict(p)?.transfer(self.small_chart())
    }

    /// `e^{δ_α}Θ` restricted to the Lagrangian; zero after reduction
    /// certifies that `α` is a canonical function.
    pub fn check_canonical(&self, max_order: usize) -> Result<Obstruction> {
        let t = self.big.twist(self.big.theta(), &self.alpha, max_order)?;
        Ok(self.big.obstruction(self.restrict(&t.value)?))
    }

    pub fn twist(&self, f: &Poly, max_order: usize) -> Result<Twisted> {
        self.big.twist(f, &self.alpha, max_order)
    }
}

fn small_chart(big: &Chart, surviving: &[CoordId]) -> Result<Arc<Chart>> {
    let mut b = ChartBuilder::new();
    for &z in surviving {
        let c = big.coordinate(z);
        b.coord(c.family(), c.index(), c.degree())?;
    }
    for s in big.symbols() {
        b.symbol(s.clone())?;
    }
    b.build()
}

fn small_index(big: &Chart, small: &Chart, z: CoordId) -> CoordId {
    let c = big.coordinate(z);
    small.find(c.family(), c.index()).expect("surviving coordinate is in the small chart")
}

/// How one family of small coordinates is lifted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftFamily {
    pub family: String,
    pub conjugate: String,
    /// Two-index constant symbol `W` with `{z[a], z*[b]} = W[a,b]`;
    /// `None` means the identity pairing.
    pub weight: Option<String>,
}

impl LiftFamily {
    pub fn new(family: &str, conjugate: &str) -> Self {
        LiftFamily { family: family.into(), conjugate: conjugate.into(), weight: None }
    }

    pub fn weighted(family: &str, conjugate: &str, weight: &str) -> Self {
        LiftFamily { family: family.into(), conjugate: conjugate.into(), weight: Some(weight.into()) }
    }
}

/// `T*[n+1]M` over a small graded manifold `M` of degree `n`.
#[derive(Clone, Debug)]
pub struct CotangentLift {
    pub chart: Arc<Chart>,
    pub structure: SymplecticStructure,
    /// The conjugate (fiber) coordinates.
    pub lagrangian: Vec<CoordId>,
    pub n: u32,
}

/// Adds a conjugate of degree `n + 1 - d` for every small coordinate of
/// degree `d`, paired as `{z, z*} = 1` (or by the family's weight).
pub fn cotangent_lift(small: &Chart, n: u32, families: &[LiftFamily]) -> Result<CotangentLift> {
    let mut b = ChartBuilder::extend(small);
    let mut conj: Vec<(Vec<CoordId>, Vec<CoordId>, Option<String>)> = Vec::new();
    let mut covered = BTreeSet::new();
    for fam in families {
        let members = small.family(&fam.family);
        if members.is_empty() {
            return Err(Error::UnknownCoordinate(fam.family.clone()));
        }
        let mut conjugates = Vec::with_capacity(members.len());
        for &z in &members {
            covered.insert(z);
            let c = small.coordinate(z);
            if c.degree() > n {
                return Err(Error::DegreeMismatch {
                    context: format!("coordinate `{c}` of the small manifold"),
                    expected: n,
                    found: c.degree(),
                });
            }
            conjugates.push(b.coord(&fam.conjugate, c.index(), n + 1 - c.degree())?);
        }
        conj.push((members, conjugates, fam.weight.clone()));
    }
    if let Some(z) = small.coord_ids().find(|z| !covered.contains(z)) {
        return Err(Error::Unpaired(small.coordinate(z).name()));
    }
    let chart = b.build()?;
    let mut blocks = Vec::new();
    let mut lagrangian = Vec::new();
    for (members, conjugates, weight) in conj {
        lagrangian.extend(conjugates.iter().copied());
        match weight {
            None => {
                for (&z, &w) in members.iter().zip(&conjugates) {
                    blocks.push(Block::pair(&chart, z, w, 1));
                }
            }
            Some(sym) => {
                let index = |z: CoordId| chart.coordinate(z).index().unwrap_or(1);
                let mut weights = Vec::with_capacity(members.len());
                for &a in &members {
                    let mut row = Vec::with_capacity(conjugates.len());
                    for &c in &conjugates {
                        row.push(Poly::func(&chart, &sym, &[index(a), index(c)], &[])?);
                    }
                    weights.push(row);
                }
                blocks.push(Block::weighted(members, conjugates, weights));
            }
        }
    }
    let structure = SymplecticStructure::new(&chart, n + 1, blocks)?;
    Ok(CotangentLift { chart, structure, lagrangian, n })
}

impl CotangentLift {
    /// Validates the master equation and assembles the pair.
    pub fn qp_pair(&self, theta: Poly, relations: RelationSet, alpha: Poly) -> Result<QPPair> {
        let big = QPManifold::new(self.structure.clone(), theta, relations)?;
        let master = big.check_master()?;
        if !master.vanishes() {
            return Err(Error::MasterEquation(master.reduced.render()));
        }
        QPPair::new(big, self.lagrangian.clone(), alpha)
    }
}
