//! Graded-commutative polynomials with exact rational coefficients.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::chart::{Chart, CoordId};
use crate::error::Error;
use crate::mutation::{self, Mutation};
use crate::symbol::Sym;
use crate::Result;

pub type Scalar = BigRational;

pub(crate) fn scalar(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// Product of coefficient symbols and a sign-normalized word of generators.
///
/// Generators are sorted by chart order with odd exponents at most 1;
/// coefficient symbols form a sorted multiset. Monomials order by generator
/// word first, then by symbols.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    gens: Vec<(CoordId, u32)>,
    funcs: Vec<Sym>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds a monomial from already normalized parts.
    pub fn from_sorted(chart: &Chart, funcs: Vec<Sym>, gens: Vec<(CoordId, u32)>) -> Result<Self> {
        let sorted = gens.windows(2).all(|w| w[0].0 < w[1].0) && funcs.windows(2).all(|w| w[0] <= w[1]);
        let exps_ok = gens.iter().all(|&(z, e)| e >= 1 && (e == 1 || !chart.is_odd(z)));
        if !sorted || !exps_ok {
            return Err(Error::Inhomogeneous("monomial parts are not normalized".into()));
        }
        Ok(Monomial { gens, funcs })
    }

    pub fn gens(&self) -> &[(CoordId, u32)] {
        &self.gens
    }

    pub fn funcs(&self) -> &[Sym] {
        &self.funcs
    }

    pub fn is_one(&self) -> bool {
        self.gens.is_empty() && self.funcs.is_empty()
    }

    pub fn degree(&self, chart: &Chart) -> u32 {
        self.gens.iter().map(|&(z, e)| chart.degree(z) * e).sum()
    }

    pub fn exponent(&self, z: CoordId) -> u32 {
        self.gens.iter().find(|g| g.0 == z).map_or(0, |g| g.1)
    }

    /// Normalized product; the flag is the Koszul sign (`true` = negative).
    pub fn mul(&self, other: &Monomial, chart: &Chart) -> Option<(Monomial, bool)> {
        let a = &self.gens;
        let b = &other.gens;
        // odd generators of `a` at positions >= i
        let mut odd_after = alloc::vec![0u32; a.len() + 1];
        for i in (0..a.len()).rev() {
            odd_after[i] = odd_after[i + 1] + chart.is_odd(a[i].0) as u32;
        }
        let mut gens = Vec::with_capacity(a.len() + b.len());
        let mut swaps = 0u32;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                gens.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                if chart.is_odd(b[j].0) {
                    swaps += odd_after[i];
                }
                gens.push(b[j]);
                j += 1;
            } else {
                let z = a[i].0;
                if chart.is_odd(z) {
                    return None;
                }
                gens.push((z, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
        let mut funcs = Vec::with_capacity(self.funcs.len() + other.funcs.len());
        let (mut i, mut j) = (0, 0);
        while i < self.funcs.len() || j < other.funcs.len() {
            if j == other.funcs.len() || (i < self.funcs.len() && self.funcs[i] <= other.funcs[j]) {
                funcs.push(self.funcs[i].clone());
                i += 1;
            } else {
                funcs.push(other.funcs[j].clone());
                j += 1;
            }
        }
        let negative = swaps % 2 == 1 && !mutation::active(Mutation::DropKoszulSign);
        Some((Monomial { gens, funcs }, negative))
    }

    /// Splits into its symbol part and generator part.
    pub(crate) fn split(&self) -> (Monomial, Monomial) {
        (
            Monomial { gens: Vec::new(), funcs: self.funcs.clone() },
            Monomial { gens: self.gens.clone(), funcs: Vec::new() },
        )
    }

    pub(crate) fn with_funcs(&self, funcs: Vec<Sym>) -> Monomial {
        Monomial { gens: self.gens.clone(), funcs }
    }
}

/// Which side a coordinate derivative acts from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A normalized polynomial over a fixed [`Chart`].
///
/// Terms are kept in a sorted map without zero coefficients, so equality of
/// values is equality of polynomials. Arithmetic operators panic when the
/// operands live on different charts; the `checked_*` methods report
/// [`Error::ChartMismatch`] instead.
#[derive(Clone, Debug)]
pub struct Poly {
    chart: Arc<Chart>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        same_chart(&self.chart, &other.chart) && self.terms == other.terms
    }
}

impl Eq for Poly {}

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Poly {
    pub fn zero(chart: &Arc<Chart>) -> Self {
        Poly { chart: chart.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(chart: &Arc<Chart>, c: Scalar) -> Self {
        Self::monomial(chart, Monomial::one(), c)
    }

    pub fn int(chart: &Arc<Chart>, n: i64) -> Self {
        Self::constant(chart, scalar(n))
    }

    pub fn one(chart: &Arc<Chart>) -> Self {
        Self::int(chart, 1)
    }

    pub fn monomial(chart: &Arc<Chart>, m: Monomial, c: Scalar) -> Self {
        let mut p = Self::zero(chart);
        p.add_term(m, c);
        p
    }

    pub fn coord(chart: &Arc<Chart>, z: CoordId) -> Self {
        Self::monomial(chart, Monomial { gens: alloc::vec![(z, 1)], funcs: Vec::new() }, Scalar::one())
    }

    /// A coordinate given by its rendered name, e.g. `x[1]` or `xi`.
    pub fn var(chart: &Arc<Chart>, name: &str) -> Result<Self> {
        let z = chart.find_by_name(name).ok_or_else(|| Error::UnknownCoordinate(name.into()))?;
        Ok(Self::coord(chart, z))
    }

    /// The coefficient symbol `name[indices]` differentiated along `derivs`.
    pub fn func(chart: &Arc<Chart>, name: &str, indices: &[u32], derivs: &[u32]) -> Result<Self> {
        Ok(match Sym::named(chart, name, indices, derivs)? {
            Some((s, negative)) => Self::sym(chart, s, negative),
            None => Self::zero(chart),
        })
    }

    pub(crate) fn sym(chart: &Arc<Chart>, s: Sym, negative: bool) -> Self {
        let c = if negative { -Scalar::one() } else { Scalar::one() };
        Self::monomial(chart, Monomial { gens: Vec::new(), funcs: alloc::vec![s] }, c)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `Ok(None)` for the zero polynomial, which is homogeneous of every degree.
    pub fn homogeneous_degree(&self) -> Result<Option<u32>> {
        let mut degree = None;
        for m in self.terms.keys() {
            let d = m.degree(&self.chart);
            match degree {
                None => degree = Some(d),
                Some(e) if e != d => return Err(Error::Inhomogeneous(self.to_string())),
                _ => {}
            }
        }
        Ok(degree)
    }

    /// Largest degree among the terms (0 for the zero polynomial).
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree(&self.chart)).max().unwrap_or(0)
    }

    pub fn is_odd_degree(&self) -> bool {
        self.max_degree() % 2 == 1
    }

    /// True when some term contains `z`.
    pub fn contains(&self, z: CoordId) -> bool {
        self.terms.keys().any(|m| m.exponent(z) > 0)
    }

    fn check(&self, other: &Poly) -> Result<()> {
        if same_chart(&self.chart, &other.chart) {
            Ok(())
        } else {
            Err(Error::ChartMismatch)
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut out = Poly::zero(&self.chart);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, negative)) = ma.mul(mb, &self.chart) {
                    let c = ca * cb;
                    out.add_term(m, if negative { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.chart);
        }
        Poly { chart: self.chart.clone(), terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// One-sided derivative by a generator. For degree-0 coordinates the
    /// coefficient symbols are differentiated as well.
    pub fn partial(&self, z: CoordId, side: Side) -> Poly {
        let chart = &self.chart;
        let z_odd = chart.is_odd(z);
        let position = chart.base_position(z);
        let mut out = Poly::zero(chart);
        for (m, c) in &self.terms {
            if let Some(k) = m.gens.iter().position(|g| g.0 == z) {
                let e = m.gens[k].1;
                let mut gens = m.gens.clone();
                if e == 1 {
                    gens.remove(k);
                } else {
                    gens[k].1 -= 1;
                }
                let mut coeff = c * scalar(e as i64);
                if z_odd {
                    let passed = match side {
                        Side::Left => &m.gens[..k],
                        Side::Right => &m.gens[k + 1..],
                    };
                    let odd = passed.iter().filter(|g| chart.is_odd(g.0)).count();
                    if odd % 2 == 1 {
                        coeff = -coeff;
                    }
                }
                out.add_term(Monomial { gens, funcs: m.funcs.clone() }, coeff);
            }
            if let Some(pos) = position {
                for k in 0..m.funcs.len() {
                    if k > 0 && m.funcs[k] == m.funcs[k - 1] {
                        continue;
                    }
                    let Some(d) = m.funcs[k].derivative(chart, pos) else { continue };
                    let multiplicity = m.funcs[k..].iter().take_while(|f| **f == m.funcs[k]).count();
                    let mut funcs = m.funcs.clone();
                    funcs[k] = d;
                    funcs.sort();
                    out.add_term(m.with_funcs(funcs), c * scalar(multiplicity as i64));
                }
            }
        }
        out
    }

    /// Simultaneous substitution of generators.
    ///
    /// Each value must be zero or homogeneous of the coordinate's degree.
    /// Degree-0 coordinates can only be moved when no non-constant
    /// coefficient symbol is present, because those depend on them.
    pub fn substitute(&self, assignment: &BTreeMap<CoordId, Poly>) -> Result<Poly> {
        let chart = &self.chart;
        for (&z, value) in assignment {
            self.check(value)?;
            if let Some(d) = value.homogeneous_degree()? {
                if d != chart.degree(z) {
                    return Err(Error::DegreeMismatch {
                        context: alloc::format!("value for `{}`", chart.coordinate(z)),
                        expected: chart.degree(z),
                        found: d,
                    });
                }
            }
            if chart.degree(z) == 0 && *value != Poly::coord(chart, z) && self.has_varying_symbols() {
                return Err(Error::BaseSubstitution(chart.coordinate(z).name()));
            }
        }
        let mut out = Poly::zero(chart);
        for (m, c) in &self.terms {
            let (funcs, _) = m.split();
            let mut acc = Poly::monomial(chart, funcs, c.clone());
            for &(z, e) in &m.gens {
                let factor = match assignment.get(&z) {
                    Some(v) => v.clone(),
                    None => Poly::coord(chart, z),
                };
                for _ in 0..e {
                    acc = acc.checked_mul(&factor)?;
                    if acc.is_zero() {
                        break;
                    }
                }
                if acc.is_zero() {
                    break;
                }
            }
            out = out.checked_add(&acc)?;
        }
        Ok(out)
    }

    /// Sets the listed generators to zero.
    pub fn set_zero(&self, coords: &[CoordId]) -> Result<Poly> {
        let chart = &self.chart;
        if coords.iter().any(|&z| chart.degree(z) == 0) {
            let map = coords.iter().map(|&z| (z, Poly::zero(chart))).collect();
            return self.substitute(&map);
        }
        let mut out = Poly::zero(chart);
        for (m, c) in &self.terms {
            if !coords.iter().any(|&z| m.exponent(z) > 0) {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        Ok(out)
    }

    fn has_varying_symbols(&self) -> bool {
        self.terms.keys().any(|m| m.funcs.iter().any(|s| !s.is_constant(&self.chart)))
    }

    /// Re-expresses the polynomial on another chart, matching coordinates
    /// and symbols by name.
    pub fn transfer(&self, target: &Arc<Chart>) -> Result<Poly> {
        if same_chart(&self.chart, target) {
            return Ok(Poly { chart: target.clone(), terms: self.terms.clone() });
        }
        let src = &self.chart;
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(target, c.clone());
            for s in &m.funcs {
                let decl = src.symbol_decl(s.base());
                let base = target.find_symbol(decl.name()).ok_or_else(|| Error::UnknownSymbol(decl.name().into()))?;
                let mut derivs = Vec::with_capacity(s.derivs().len());
                for &d in s.derivs() {
                    let coord = src.coordinate(src.base_coord(d)?);
                    let id = target
                        .find(coord.family(), coord.index())
                        .ok_or_else(|| Error::UnknownCoordinate(coord.name()))?;
                    derivs.push(target.base_position(id).ok_or_else(|| Error::UnknownCoordinate(coord.name()))?);
                }
                let factor = match Sym::new(target, base, s.indices().to_vec(), derivs)? {
                    Some((t, negative)) => Poly::sym(target, t, negative),
                    None => Poly::zero(target),
                };
                acc = acc.checked_mul(&factor)?;
            }
            for &(z, e) in &m.gens {
                let coord = src.coordinate(z);
                let id = target
                    .find(coord.family(), coord.index())
                    .ok_or_else(|| Error::UnknownCoordinate(coord.name()))?;
                if target.degree(id) != coord.degree() {
                    return Err(Error::DegreeMismatch {
                        context: alloc::format!("coordinate `{coord}`"),
                        expected: coord.degree(),
                        found: target.degree(id),
                    });
                }
                let g = Poly::coord(target, id);
                for _ in 0..e {
                    acc = acc.checked_mul(&g)?;
                }
            }
            out = out.checked_add(&acc)?;
        }
        Ok(out)
    }

    /// Canonical text form; parses back to the same polynomial.
    pub fn render(&self) -> String {
        crate::render::render_poly(self)
    }

    pub(crate) fn into_terms(self) -> BTreeMap<Monomial, Scalar> {
        self.terms
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.$checked(rhs).expect("operands live on different coordinate charts")
            }
        }
        impl $trait<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
        impl $trait<Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        assert!(same_chart(&self.chart, &rhs.chart), "operands live on different coordinate charts");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        assert!(same_chart(&self.chart, &rhs.chart), "operands live on different coordinate charts");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{ChartBuilder, SymbolDecl};

    fn chart() -> Arc<Chart> {
        let mut b = ChartBuilder::new();
        b.family("x", 1..=2, 0).unwrap();
        b.family("q", 1..=2, 1).unwrap();
        b.family("p", 1..=2, 1).unwrap();
        b.symbol(SymbolDecl::new("pi", 2).antisymmetric()).unwrap();
        b.symbol(SymbolDecl::new("H", 3).antisymmetric()).unwrap();
        b.symbol(SymbolDecl::new("a", 1)).unwrap();
        b.symbol(SymbolDecl::new("b", 1)).unwrap();
        b.build().unwrap()
    }

    fn v(c: &Arc<Chart>, n: &str) -> Poly {
        Poly::var(c, n).unwrap()
    }

    #[test]
    fn odd_square_and_koszul() {
        let c = chart();
        let q1 = v(&c, "q[1]");
        let q2 = v(&c, "q[2]");
        assert!((&q1 * &q1).is_zero());
        assert_eq!((&q2 * &q1).render(), "-q[1]*q[2]");
        assert_eq!((&q1 * &q2).render(), "q[1]*q[2]");
        let x1 = v(&c, "x[1]");
        assert_eq!((&x1 * &x1 * &q1).render(), "x[1]^2*q[1]");
    }

    #[test]
    fn collected_product() {
        let c = chart();
        let a = |i| Poly::func(&c, "a", &[i], &[]).unwrap();
        let b = |i| Poly::func(&c, "b", &[i], &[]).unwrap();
        let q = |i| v(&c, &alloc::format!("q[{i}]"));
        let left = a(1) * q(1) + a(2) * q(2);
        let right = b(1) * q(1) + b(2) * q(2);
        assert_eq!((left * right).render(), "a[1]*b[2]*q[1]*q[2] - a[2]*b[1]*q[1]*q[2]");
    }

    #[test]
    fn partial_signs() {
        let c = chart();
        let q1 = c.find_by_name("q[1]").unwrap();
        let q2 = c.find_by_name("q[2]").unwrap();
        let f = v(&c, "q[1]") * v(&c, "q[2]");
        assert_eq!(f.partial(q1, Side::Left).render(), "q[2]");
        assert_eq!(f.partial(q2, Side::Left).render(), "-q[1]");
        assert_eq!(f.partial(q2, Side::Right).render(), "q[1]");
    }

    #[test]
    fn partial_of_pi_pp() {
        let c = chart();
        let half = Scalar::new(BigInt::from(1), BigInt::from(2));
        let mut alpha = Poly::zero(&c);
        for i in 1..=2u32 {
            for j in 1..=2u32 {
                let t = Poly::func(&c, "pi", &[i, j], &[]).unwrap()
                    * v(&c, &alloc::format!("p[{i}]"))
                    * v(&c, &alloc::format!("p[{j}]"));
                alpha += &t.scale(&half);
            }
        }
        let p1 = c.find_by_name("p[1]").unwrap();
        assert_eq!(alpha.partial(p1, Side::Left).render(), "pi[1,2]*p[2]");
    }

    #[test]
    fn partial_product_rule() {
        let c = chart();
        let f = Poly::func(&c, "H", &[1, 2, 3], &[]);
        // arity-3 symbol with only two base coordinates is fine: indices are free labels
        let f = f.unwrap() * v(&c, "x[1]");
        let x1 = c.find_by_name("x[1]").unwrap();
        assert_eq!(f.partial(x1, Side::Left).render(), "H[1,2,3] + d[1]H[1,2,3]*x[1]");
    }

    #[test]
    fn substitution() {
        let c = chart();
        let q1 = c.find_by_name("q[1]").unwrap();
        let f = v(&c, "q[1]") + Poly::func(&c, "pi", &[1, 2], &[]).unwrap() * v(&c, "p[2]");
        let map = [(q1, Poly::zero(&c))].into_iter().collect();
        assert_eq!(f.substitute(&map).unwrap().render(), "pi[1,2]*p[2]");
        let x1 = c.find_by_name("x[1]").unwrap();
        let bad = [(x1, Poly::zero(&c))].into_iter().collect();
        assert!(matches!(f.substitute(&bad), Err(Error::BaseSubstitution(_))));
        let wrong = [(q1, v(&c, "x[1]"))].into_iter().collect();
        assert!(matches!(f.substitute(&wrong), Err(Error::DegreeMismatch { .. })));
    }
}
