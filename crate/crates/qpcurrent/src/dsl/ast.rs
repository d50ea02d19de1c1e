//! Syntax tree of a `.qp` session. Every node keeps the span it came from.

use super::span::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Range {
    pub lo: u32,
    pub hi: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    pub stmts: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordSpec {
    pub name: Ident,
    pub range: Option<Range>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymAttr {
    /// `sym` or `antisym`, optionally restricted to 1-based positions.
    Symmetry { antisym: bool, positions: Option<Range>, span: Span },
    Const,
    Inverse(Ident),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairMod {
    Sign(i64),
    Weight(Ident),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftItem {
    pub family: Ident,
    pub conjugate: Ident,
    pub weight: Option<Ident>,
}

/// `I`, or `I = 1..3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BindVar {
    pub name: Ident,
    pub range: Option<Range>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Coord { specs: Vec<CoordSpec>, degree: u32 },
    Index { names: Vec<Ident>, range: Range },
    Symbol { name: Ident, arity: u32, attrs: Vec<SymAttr> },
    Degree(u32),
    Pair { left: Ident, right: Ident, modifier: Option<PairMod> },
    Lift { n: u32, items: Vec<LiftItem> },
    Lagrangian(Vec<Ident>),
    Theta(Expr),
    Alpha(Expr),
    Relation { binder: Vec<BindVar>, lhs: Expr, rhs: Option<Expr> },
    Closed(Ident),
    /// `current` (as written) or `basis` (twisted by `alpha`).
    Current { name: Ident, binder: Vec<BindVar>, expr: Expr, twisted: bool },
    Command(Command),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Bracket(Expr, Expr),
    Derived(Expr, Expr),
    Twist(Expr, Option<Expr>),
    Master,
    Canonical,
    Preserves(Option<Expr>),
    Commutator(Expr, Expr),
    Table(Vec<Ident>),
    Render(Expr),
    Show(Expr),
    Small,
}

impl Command {
    pub fn keyword(&self) -> &'static str {
        match self {
            Command::Bracket(..) => "bracket",
            Command::Derived(..) => "derived",
            Command::Twist(..) => "twist",
            Command::Master => "master",
            Command::Canonical => "canonical",
            Command::Preserves(..) => "preserves",
            Command::Commutator(..) => "commutator",
            Command::Table(..) => "table",
            Command::Render(..) => "render",
            Command::Show(..) => "show",
            Command::Small => "small",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Index {
    Lit(u32),
    Var(Ident),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(u64),
    /// A coordinate, coefficient symbol or current. `derivs` is the `d[..]`
    /// prefix (only meaningful for symbols).
    Name { name: Ident, indices: Option<Vec<Index>>, derivs: Option<Vec<Index>> },
    Theta,
    Alpha,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Bracket(Box<Expr>, Box<Expr>),
    Sum(Vec<BindVar>, Box<Expr>),
    Restrict(Box<Expr>),
    Twist(Box<Expr>),
}

/// Words that cannot name coordinates, symbols or currents.
pub const RESERVED: &[&str] = &["theta", "alpha", "sum", "restrict", "twist", "d"];
