//! Elaboration of a parsed session into engine objects.
//!
//! Two passes: the first collects coordinates, index ranges, symbols and an
//! optional cotangent lift into a chart; the second walks the remaining
//! declarations in order. Commands are collected into a plan and run later,
//! so they may refer to anything declared in the file.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use qpcurrent_core::{
    closedness_relations, cotangent_lift, Block, Chart, ChartBuilder, CoordId, CotangentLift, Error, LiftFamily, Poly,
    QPManifold, QPPair, Relation, RelationSet, Scalar, SymbolDecl, SymplecticStructure, Symmetry,
    DEFAULT_MAX_TWIST_ORDER,
};

use crate::dsl::ast::*;
use crate::dsl::span::{Diagnostic, Span};

#[derive(Clone, Debug)]
pub struct Options {
    pub max_twist_order: usize,
    /// Reduce results modulo the declared relations.
    pub reduce: bool,
    /// Worker threads for commutator tables (1 = sequential).
    pub jobs: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { max_twist_order: DEFAULT_MAX_TWIST_ORDER, reduce: true, jobs: 1 }
    }
}

/// A named family of current functions, keyed by their index tuples.
#[derive(Clone, Debug, Default)]
pub struct CurrentFamily {
    pub members: BTreeMap<Vec<u32>, Poly>,
}

#[derive(Clone, Debug)]
pub struct PlannedCommand {
    pub command: Command,
    pub span: Span,
}

/// Everything a session declares, plus the commands to run.
pub struct Session {
    pub chart: Arc<Chart>,
    indices: BTreeMap<String, Range>,
    degree: Option<(u32, Span)>,
    blocks: Vec<Block>,
    paired: BTreeMap<CoordId, Span>,
    lift: Option<CotangentLift>,
    structure: Option<SymplecticStructure>,
    theta: Option<Poly>,
    alpha: Option<Poly>,
    lagrangian: Option<Vec<CoordId>>,
    pub relations: RelationSet,
    pub currents: BTreeMap<String, CurrentFamily>,
    qp: Option<QPManifold>,
    pair: Option<QPPair>,
    /// Why a lifted pair could not be formed (the master equation fails).
    pair_error: Option<String>,
    /// Span of the first statement that forced the QP data to be assembled.
    frozen: Option<Span>,
    pub plan: Vec<PlannedCommand>,
    pub options: Options,
}

/// Values of the index variables in scope.
pub type Bindings = BTreeMap<String, u32>;

fn err(span: Span, e: impl std::fmt::Display) -> Diagnostic {
    Diagnostic::new(span, e.to_string())
}

/// Parses and elaborates `source` in one step.
pub fn load(source: &str, options: Options) -> Result<Session, Vec<Diagnostic>> {
    elaborate(&crate::dsl::parse(source)?, options)
}

/// Elaborates a parsed session. All diagnostics of both passes are returned
/// together on failure.
pub fn elaborate(ast: &crate::dsl::ast::Session, options: Options) -> Result<Session, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let (chart, indices, lift) = build_chart(ast)?;
    let relations = RelationSet::new(&chart);
    let mut s = Session {
        structure: lift.as_ref().map(|l| l.structure.clone()),
        degree: None,
        lagrangian: lift.as_ref().map(|l| l.lagrangian.clone()),
        chart,
        indices,
        blocks: Vec::new(),
        paired: BTreeMap::new(),
        lift,
        theta: None,
        alpha: None,
        relations,
        currents: BTreeMap::new(),
        qp: None,
        pair: None,
        pair_error: None,
        frozen: None,
        plan: Vec::new(),
        options,
    };
    for stmt in &ast.stmts {
        if let Err(d) = s.declare(stmt) {
            diags.push(d);
        }
    }
    if diags.is_empty() {
        if let Err(d) = s.finish() {
            diags.push(d);
        }
    }
    if diags.is_empty() {
        Ok(s)
    } else {
        Err(diags)
    }
}

type ChartParts = (Arc<Chart>, BTreeMap<String, Range>, Option<CotangentLift>);

fn build_chart(ast: &crate::dsl::ast::Session) -> Result<ChartParts, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut b = ChartBuilder::new();
    let mut indices = BTreeMap::new();
    let mut lift: Option<(&Stmt, u32, &[LiftItem])> = None;
    for stmt in &ast.stmts {
        match &stmt.kind {
            StmtKind::Coord { specs, degree } => {
                for spec in specs {
                    let r = match spec.range {
                        Some(r) => b.family(&spec.name.name, r.lo..=r.hi, *degree).map(|_| ()),
                        None => b.coord(&spec.name.name, None, *degree).map(|_| ()),
                    };
                    if let Err(e) = r {
                        diags.push(err(spec.name.span, e));
                    }
                }
            }
            StmtKind::Index { names, range } => {
                for n in names {
                    indices.insert(n.name.clone(), *range);
                }
            }
            StmtKind::Symbol { name, arity, attrs } => match symbol_decl(name, *arity, attrs) {
                Ok(decl) => {
                    if let Err(e) = b.symbol(decl) {
                        diags.push(err(stmt.span, e));
                    }
                }
                Err(d) => diags.push(d),
            },
            StmtKind::Lift { n, items } => {
                if lift.is_some() {
                    diags.push(Diagnostic::new(stmt.span, "only one `lift` is allowed"));
                } else {
                    lift = Some((stmt, *n, items));
                }
            }
            _ => {}
        }
    }
    let inverse_spans: Vec<(String, Span)> = ast
        .stmts
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Symbol { attrs, .. } => attrs.iter().find_map(|a| match a {
                SymAttr::Inverse(n) => Some((n.name.clone(), n.span)),
                _ => None,
            }),
            _ => None,
        })
        .collect();
    let chart = match b.build() {
        Ok(c) => c,
        Err(e) => {
            let span = match &e {
                Error::UnknownSymbol(n) => inverse_spans.iter().find(|(m, _)| m == n).map(|x| x.1),
                _ => None,
            };
            diags.push(err(span.unwrap_or_default(), e));
            return Err(diags);
        }
    };
    if !diags.is_empty() {
        return Err(diags);
    }
    let lift = match lift {
        None => None,
        Some((stmt, n, items)) => {
            let families: Vec<LiftFamily> = items
                .iter()
                .map(|i| match &i.weight {
                    Some(w) => LiftFamily::weighted(&i.family.name, &i.conjugate.name, &w.name),
                    None => LiftFamily::new(&i.family.name, &i.conjugate.name),
                })
                .collect();
            match cotangent_lift(&chart, n, &families) {
                Ok(l) => Some(l),
                Err(e) => {
                    let span = match &e {
                        Error::UnknownCoordinate(f) => {
                            items.iter().find(|i| &i.family.name == f).map(|i| i.family.span).unwrap_or(stmt.span)
                        }
                        _ => stmt.span,
                    };
                    return Err(vec![err(span, e)]);
                }
            }
        }
    };
    let chart = lift.as_ref().map(|l| l.chart.clone()).unwrap_or(chart);
    Ok((chart, indices, lift))
}

fn symbol_decl(name: &Ident, arity: u32, attrs: &[SymAttr]) -> Result<SymbolDecl, Diagnostic> {
    let mut decl = SymbolDecl::new(&name.name, arity as usize);
    for a in attrs {
        match a {
            SymAttr::Symmetry { antisym, positions, span } => {
                let kind = if *antisym { Symmetry::Antisymmetric } else { Symmetry::Symmetric };
                let (start, len) = match positions {
                    Some(r) => (r.lo as usize - 1, (r.hi - r.lo + 1) as usize),
                    None => (0, arity as usize),
                };
                if len < 2 || start + len > arity as usize {
                    return Err(Diagnostic::new(
                        *span,
                        format!("symmetry needs at least two of the {arity} index slots of `{}`", name.name),
                    ));
                }
                decl = decl.block(start, len, kind);
            }
            SymAttr::Const => decl = decl.constant(),
            SymAttr::Inverse(other) => decl = decl.inverse_of(&other.name),
        }
    }
    Ok(decl)
}

impl Session {
    pub fn structure(&self) -> Option<&SymplecticStructure> {
        self.structure.as_ref()
    }

    pub fn qp(&self) -> Option<&QPManifold> {
        self.qp.as_ref()
    }

    pub fn pair(&self) -> Option<&QPPair> {
        self.pair.as_ref()
    }

    pub fn theta(&self) -> Option<&Poly> {
        self.theta.as_ref()
    }

    fn declare(&mut self, stmt: &Stmt) -> Result<(), Diagnostic> {
        let span = stmt.span;
        match &stmt.kind {
            StmtKind::Coord { .. } | StmtKind::Index { .. } | StmtKind::Symbol { .. } | StmtKind::Lift { .. } => Ok(()),
            StmtKind::Degree(n) => {
                if self.lift.is_some() {
                    return Err(Diagnostic::new(span, "`degree` conflicts with `lift`, which fixes the degree"));
                }
                if self.degree.is_some() {
                    return Err(Diagnostic::new(span, "the degree is already declared"));
                }
                if self.structure.is_some() {
                    return Err(self.too_late(span, "the degree"));
                }
                self.degree = Some((*n, span));
                Ok(())
            }
            StmtKind::Pair { left, right, modifier } => self.pair_stmt(span, left, right, modifier.as_ref()),
            StmtKind::Lagrangian(names) => {
                if self.lift.is_some() {
                    return Err(Diagnostic::new(span, "`lagrangian` conflicts with `lift`, which fixes the Lagrangian"));
                }
                if self.lagrangian.is_some() {
                    return Err(Diagnostic::new(span, "the Lagrangian is already declared"));
                }
                self.check_open(span, "the Lagrangian")?;
                let mut coords = Vec::new();
                for n in names {
                    let members = self.family(&n.name);
                    if members.is_empty() {
                        return Err(Diagnostic::new(n.span, format!("unknown coordinate family `{}`", n.name)));
                    }
                    coords.extend(members);
                }
                self.lagrangian = Some(coords);
                Ok(())
            }
            StmtKind::Theta(e) => {
                if self.theta.is_some() {
                    return Err(Diagnostic::new(span, "theta is already declared"));
                }
                self.check_open(span, "theta")?;
                let v = self.eval(e, &Bindings::new())?;
                self.theta = Some(v);
                Ok(())
            }
            StmtKind::Alpha(e) => {
                if self.alpha.is_some() {
                    return Err(Diagnostic::new(span, "alpha is already declared"));
                }
                self.check_open(span, "alpha")?;
                let v = self.eval(e, &Bindings::new())?;
                self.alpha = Some(v);
                Ok(())
            }
            StmtKind::Relation { binder, lhs, rhs } => {
                self.check_open(span, "a relation")?;
                for env in self.assignments(binder)? {
                    let mut p = self.eval(lhs, &env)?;
                    if let Some(r) = rhs {
                        p = p - self.eval(r, &env)?;
                    }
                    // reduce by what is already known so that dependent
                    // instances collapse instead of clashing
                    let p = self.relations.reduce(&p);
                    if p.is_zero() {
                        continue;
                    }
                    let rel = Relation::from_zero(&p).map_err(|e| err(span, e))?;
                    self.relations.push(rel).map_err(|e| err(span, e))?;
                }
                Ok(())
            }
            StmtKind::Closed(name) => {
                self.check_open(span, "a relation")?;
                let rels = closedness_relations(&self.chart, &name.name).map_err(|e| err(name.span, e))?;
                self.relations.extend(rels).map_err(|e| err(span, e))
            }
            StmtKind::Current { name, binder, expr, twisted } => {
                let mut family = CurrentFamily::default();
                let envs = self.assignments(binder)?;
                for env in envs {
                    let key: Vec<u32> = binder.iter().map(|v| env[&v.name.name]).collect();
                    let mut p = self.eval(expr, &env)?;
                    if *twisted {
                        self.freeze(span)?;
                        let pair = self.require_pair(span)?;
                        p = pair.twist(&p, self.options.max_twist_order).map_err(|e| err(span, e))?.value;
                    }
                    family.members.insert(key, p);
                }
                if *twisted {
                    self.freeze(span)?;
                    let pair = self.require_pair(span)?;
                    let basis: Vec<Poly> = family.members.values().cloned().collect();
                    check_commuting(pair, &basis, span)?;
                }
                self.currents.insert(name.name.clone(), family);
                Ok(())
            }
            StmtKind::Command(c) => {
                self.plan.push(PlannedCommand { command: c.clone(), span });
                Ok(())
            }
        }
    }

    fn too_late(&self, span: Span, what: &str) -> Diagnostic {
        Diagnostic::new(span, format!("{what} is declared after the structure was already used"))
    }

    fn check_open(&self, span: Span, what: &str) -> Result<(), Diagnostic> {
        match self.frozen {
            Some(_) => Err(Diagnostic::new(span, format!("{what} is declared after the QP data was already used"))),
            None => Ok(()),
        }
    }

    fn family(&self, name: &str) -> Vec<CoordId> {
        let members = self.chart.family(name);
        if members.is_empty() {
            self.chart.find(name, None).into_iter().collect()
        } else {
            members
        }
    }

    fn pair_stmt(&mut self, span: Span, left: &Ident, right: &Ident, modifier: Option<&PairMod>) -> Result<(), Diagnostic> {
        if self.lift.is_some() {
            return Err(Diagnostic::new(span, "`pair` conflicts with `lift`, which fixes the pairing"));
        }
        if self.structure.is_some() {
            return Err(self.too_late(span, "a pairing"));
        }
        let l = self.family(&left.name);
        let r = self.family(&right.name);
        if l.is_empty() {
            return Err(Diagnostic::new(left.span, format!("unknown coordinate family `{}`", left.name)));
        }
        if r.is_empty() {
            return Err(Diagnostic::new(right.span, format!("unknown coordinate family `{}`", right.name)));
        }
        let mut members: Vec<CoordId> = l.iter().chain(&r).copied().collect();
        members.sort();
        members.dedup();
        for &z in &members {
            if self.paired.contains_key(&z) {
                return Err(Diagnostic::new(
                    span,
                    format!("coordinate `{}` appears in more than one pairing", self.chart.coordinate(z)),
                ));
            }
        }
        for z in members {
            self.paired.insert(z, span);
        }
        let idx = |z: CoordId| self.chart.coordinate(z).index().unwrap_or(1);
        match modifier {
            Some(PairMod::Weight(w)) => {
                let mut weights = Vec::with_capacity(l.len());
                for &a in &l {
                    let mut row = Vec::with_capacity(r.len());
                    for &b in &r {
                        row.push(Poly::func(&self.chart, &w.name, &[idx(a), idx(b)], &[]).map_err(|e| err(w.span, e))?);
                    }
                    weights.push(row);
                }
                self.blocks.push(if left.name == right.name {
                    Block::self_paired(l, weights)
                } else {
                    Block::weighted(l, r, weights)
                });
            }
            _ => {
                let sign = match modifier {
                    Some(PairMod::Sign(s)) => *s as i8,
                    _ => 1,
                };
                if left.name == right.name {
                    return Err(Diagnostic::new(span, "a family paired with itself needs a `weight`"));
                }
                if l.len() != r.len() {
                    return Err(Diagnostic::new(
                        span,
                        format!("`{}` has {} members but `{}` has {}", left.name, l.len(), right.name, r.len()),
                    ));
                }
                for (&a, &b) in l.iter().zip(&r) {
                    if idx(a) != idx(b) {
                        return Err(Diagnostic::new(
                            span,
                            format!("index ranges of `{}` and `{}` differ", left.name, right.name),
                        ));
                    }
                    self.blocks.push(Block::pair(&self.chart, a, b, sign));
                }
            }
        }
        Ok(())
    }

    /// The symplectic structure, assembled on first use.
    fn require_structure(&mut self, span: Span) -> Result<&SymplecticStructure, Diagnostic> {
        if self.structure.is_none() {
            let Some((degree, _)) = self.degree else {
                return Err(Diagnostic::new(span, "no symplectic structure: declare `degree` and `pair`, or `lift`"));
            };
            let s = SymplecticStructure::new(&self.chart, degree, self.blocks.clone()).map_err(|e| err(span, e))?;
            self.structure = Some(s);
        }
        Ok(self.structure.as_ref().expect("just built"))
    }

    /// Assembles the QP manifold (and pair, when a Lagrangian is known) and
    /// forbids further changes to theta, alpha, the Lagrangian or relations.
    fn freeze(&mut self, span: Span) -> Result<(), Diagnostic> {
        if self.frozen.is_some() {
            return Ok(());
        }
        self.frozen = Some(span);
        let structure = self.require_structure(span)?.clone();
        let Some(theta) = self.theta.clone() else {
            return Ok(());
        };
        let alpha = self.alpha.clone().unwrap_or_else(|| Poly::zero(&self.chart));
        if let Some(lift) = &self.lift {
            // the big manifold stays usable for `master` even when no pair forms
            let big = QPManifold::new(structure, theta.clone(), self.relations.clone()).map_err(|e| err(span, e))?;
            match lift.qp_pair(theta, self.relations.clone(), alpha) {
                Ok(pair) => self.pair = Some(pair),
                Err(e @ Error::MasterEquation(_)) => self.pair_error = Some(e.to_string()),
                Err(e) => return Err(err(span, e)),
            }
            self.qp = Some(big);
            return Ok(());
        }
        let qp = QPManifold::new(structure, theta, self.relations.clone()).map_err(|e| err(span, e))?;
        if let Some(l) = &self.lagrangian {
            self.pair = Some(QPPair::new(qp.clone(), l.clone(), alpha).map_err(|e| err(span, e))?);
        }
        self.qp = Some(qp);
        Ok(())
    }

    /// Assembles the QP data for the command plan. Sessions without a
    /// symplectic structure are left alone; their commands report what is
    /// missing.
    fn finish(&mut self) -> Result<(), Diagnostic> {
        if self.structure.is_none() && self.degree.is_none() {
            return Ok(());
        }
        let span = self.plan.first().map(|c| c.span).unwrap_or_default();
        self.freeze(span)
    }

    pub fn require_qp(&self, span: Span) -> Result<&QPManifold, Diagnostic> {
        self.qp.as_ref().ok_or_else(|| Diagnostic::new(span, "this needs `theta`"))
    }

    pub fn require_pair(&self, span: Span) -> Result<&QPPair, Diagnostic> {
        if self.qp.is_none() {
            return Err(Diagnostic::new(span, "this needs `theta` and a Lagrangian"));
        }
        self.pair.as_ref().ok_or_else(|| match &self.pair_error {
            Some(e) => Diagnostic::new(span, e.clone()),
            None => Diagnostic::new(span, "this needs a Lagrangian (`lagrangian` or `lift`)"),
        })
    }

    pub fn require_structure_ref(&self, span: Span) -> Result<&SymplecticStructure, Diagnostic> {
        self.structure.as_ref().ok_or_else(|| Diagnostic::new(span, "no symplectic structure"))
    }

    fn range_of(&self, v: &BindVar) -> Result<Range, Diagnostic> {
        match v.range {
            Some(r) => Ok(r),
            None => self.indices.get(&v.name.name).copied().ok_or_else(|| {
                Diagnostic::new(v.name.span, format!("index `{}` has no range; declare it with `index`", v.name.name))
            }),
        }
    }

    /// Every assignment of the binder's variables, first variable slowest.
    fn assignments(&self, binder: &[BindVar]) -> Result<Vec<Bindings>, Diagnostic> {
        let mut out = vec![Bindings::new()];
        for v in binder {
            let r = self.range_of(v)?;
            let mut next = Vec::with_capacity(out.len() * (r.hi - r.lo + 1) as usize);
            for env in &out {
                for i in r.lo..=r.hi {
                    let mut e = env.clone();
                    e.insert(v.name.name.clone(), i);
                    next.push(e);
                }
            }
            out = next;
        }
        Ok(out)
    }

    fn index_values(&self, idx: &[Index], env: &Bindings) -> Result<Vec<u32>, Diagnostic> {
        idx.iter()
            .map(|i| match i {
                Index::Lit(n) => Ok(*n),
                Index::Var(v) => env
                    .get(&v.name)
                    .copied()
                    .ok_or_else(|| Diagnostic::new(v.span, format!("index `{}` is not bound here", v.name))),
            })
            .collect()
    }

    /// Evaluates an expression during the declaration pass, assembling the
    /// structure or QP data when the expression needs it.
    fn eval(&mut self, e: &Expr, env: &Bindings) -> Result<Poly, Diagnostic> {
        if needs_structure(e) {
            self.require_structure(e.span)?;
        }
        if needs_pair(e) {
            self.freeze(e.span)?;
        }
        self.evaluate(e, env)
    }

    /// Parses and evaluates a closed expression such as `{x[1], theta}`.
    pub fn evaluate_str(&self, text: &str) -> Result<Poly, Diagnostic> {
        let e = crate::dsl::parse_expr(text).map_err(|mut d| d.remove(0))?;
        self.evaluate(&e, &Bindings::new())
    }

    /// Evaluates an expression against the current state.
    pub fn evaluate(&self, e: &Expr, env: &Bindings) -> Result<Poly, Diagnostic> {
        let chart = &self.chart;
        let span = e.span;
        Ok(match &e.kind {
            ExprKind::Int(n) => Poly::constant(chart, Scalar::from_integer((*n).into())),
            ExprKind::Name { name, indices, derivs } => self.name(name, indices.as_deref(), derivs.as_deref(), env, span)?,
            ExprKind::Theta => self.theta.clone().ok_or_else(|| Diagnostic::new(span, "theta is not declared yet"))?,
            ExprKind::Alpha => self.alpha.clone().ok_or_else(|| Diagnostic::new(span, "alpha is not declared yet"))?,
            ExprKind::Neg(inner) => -self.evaluate(inner, env)?,
            ExprKind::Binary(op, a, b) => {
                let x = self.evaluate(a, env)?;
                let y = self.evaluate(b, env)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        let c = constant_value(&y)
                            .ok_or_else(|| Diagnostic::new(b.span, "can only divide by a numeric constant"))?;
                        if c.is_zero() {
                            return Err(Diagnostic::new(b.span, "division by zero"));
                        }
                        x.scale(&(Scalar::one() / c))
                    }
                }
            }
            ExprKind::Pow(base, n) => {
                let x = self.evaluate(base, env)?;
                let mut acc = Poly::one(chart);
                for _ in 0..*n {
                    acc = acc * &x;
                }
                acc
            }
            ExprKind::Bracket(a, b) => {
                let s = self.require_structure_ref(span)?;
                let x = self.evaluate(a, env)?;
                let y = self.evaluate(b, env)?;
                s.bracket(&x, &y).map_err(|er| err(span, er))?
            }
            ExprKind::Sum(vars, body) => {
                for v in vars {
                    if env.contains_key(&v.name.name) {
                        return Err(Diagnostic::new(v.name.span, format!("index `{}` is already bound", v.name.name)));
                    }
                }
                let mut acc = Poly::zero(chart);
                for local in self.assignments(vars)? {
                    let mut full = env.clone();
                    full.extend(local);
                    acc += &self.evaluate(body, &full)?;
                }
                acc
            }
            ExprKind::Restrict(inner) => {
                let pair = self.require_pair(span)?;
                pair.restrict(&self.evaluate(inner, env)?).map_err(|er| err(span, er))?
            }
            ExprKind::Twist(inner) => {
                let pair = self.require_pair(span)?;
                let x = self.evaluate(inner, env)?;
                pair.twist(&x, self.options.max_twist_order).map_err(|er| err(span, er))?.value
            }
        })
    }

    fn name(
        &self,
        name: &Ident,
        indices: Option<&[Index]>,
        derivs: Option<&[Index]>,
        env: &Bindings,
        span: Span,
    ) -> Result<Poly, Diagnostic> {
        let chart = &self.chart;
        let idx = match indices {
            Some(i) => self.index_values(i, env)?,
            None => Vec::new(),
        };
        if chart.find_symbol(&name.name).is_some() {
            let d = match derivs {
                Some(d) => self.index_values(d, env)?,
                None => Vec::new(),
            };
            return Poly::func(chart, &name.name, &idx, &d).map_err(|e| err(span, e));
        }
        if derivs.is_some() {
            return Err(Diagnostic::new(span, format!("`d[..]` applies to coefficient symbols, not to `{}`", name.name)));
        }
        if chart.has_family(&name.name) {
            let z = match (indices, idx.as_slice()) {
                (None, []) => chart.find(&name.name, None),
                (Some(_), [i]) => chart.find(&name.name, Some(*i)),
                _ => return Err(Diagnostic::new(span, format!("coordinate `{}` takes exactly one index", name.name))),
            };
            return z
                .map(|z| Poly::coord(chart, z))
                .ok_or_else(|| Diagnostic::new(span, format!("no coordinate `{}{}`", name.name, index_suffix(&idx))));
        }
        if let Some(f) = self.currents.get(&name.name) {
            return f
                .members
                .get(&idx)
                .cloned()
                .ok_or_else(|| Diagnostic::new(span, format!("no current `{}{}`", name.name, index_suffix(&idx))));
        }
        if self.indices.contains_key(&name.name) || env.contains_key(&name.name) {
            return Err(Diagnostic::new(span, format!("index `{}` is not a value", name.name)));
        }
        Err(Diagnostic::new(name.span, format!("unknown name `{}`", name.name)))
    }
}

fn index_suffix(idx: &[u32]) -> String {
    if idx.is_empty() {
        String::new()
    } else {
        format!("[{}]", idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
    }
}

fn constant_value(p: &Poly) -> Option<Scalar> {
    let mut terms = p.terms();
    match (terms.next(), terms.next()) {
        (None, _) => Some(Scalar::zero()),
        (Some((m, c)), None) if m.is_one() => Some(c.clone()),
        _ => None,
    }
}

fn check_commuting(pair: &QPPair, basis: &[Poly], span: Span) -> Result<(), Diagnostic> {
    let big = pair.big();
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i..] {
            let c = big.reduce(&big.bracket(a, b).map_err(|e| err(span, e))?);
            if !c.is_zero() {
                return Err(Diagnostic::new(span, format!("twisted basis elements `{a}` and `{b}` do not commute: {c}")));
            }
        }
    }
    Ok(())
}

fn walk(e: &Expr, f: &mut dyn FnMut(&Expr) -> bool) -> bool {
    if f(e) {
        return true;
    }
    match &e.kind {
        ExprKind::Neg(a) | ExprKind::Pow(a, _) | ExprKind::Sum(_, a) | ExprKind::Restrict(a) | ExprKind::Twist(a) => walk(a, f),
        ExprKind::Binary(_, a, b) | ExprKind::Bracket(a, b) => walk(a, f) || walk(b, f),
        _ => false,
    }
}

fn needs_structure(e: &Expr) -> bool {
    walk(e, &mut |x| matches!(x.kind, ExprKind::Bracket(..)))
}

fn needs_pair(e: &Expr) -> bool {
    walk(e, &mut |x| matches!(x.kind, ExprKind::Restrict(_) | ExprKind::Twist(_)))
}
