//! Abstract syntax of `.thy` theory documents.

use crate::diag::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub name: String,
    pub base_dim: usize,
    pub coords: Vec<String>,
    pub fields: Vec<FieldDecl>,
    pub consts: Vec<String>,
    pub metric: MetricDecl,
    pub target_metrics: Vec<TargetMetricDecl>,
    pub defs: Vec<DefDecl>,
    pub generators: Vec<GeneratorDecl>,
    pub lagrangian: ExprAst,
    pub lagrangian_span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldStructure {
    Scalar(usize),
    Covector,
    Sym2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub structure: FieldStructure,
    pub variational: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricDecl {
    None,
    FixedMinkowski,
    Parametric(String),
    Variational(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetMetricDecl {
    pub name: String,
    pub field: String,
    pub span: Span,
}

/// `def NAME[i, j] := EXPR;` — an index-pattern abbreviation whose slots
/// range over the base dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: ExprAst,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamDecl {
    /// A single scalar jet parameter.
    Scalar(String),
    /// A gauge scalar of the base coordinates, carried by its jet values.
    Gauge(String),
    /// An affine base flow a^mu + b^mu_nu x^nu with free a, b.
    Affine(String),
    /// A family with one upper index of the given range.
    Vector { name: String, dim: usize },
    /// An antisymmetric family NAME[a, b] with a < b below the given range.
    Antisym { name: String, dim: usize },
}

impl ParamDecl {
    pub fn name(&self) -> &str {
        match self {
            ParamDecl::Scalar(n)
            | ParamDecl::Gauge(n)
            | ParamDecl::Affine(n)
            | ParamDecl::Vector { name: n, .. }
            | ParamDecl::Antisym { name: n, .. } => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseSpec {
    /// One expression per base dimension.
    Exprs(Vec<ExprAst>),
    /// The full affine family of the named affine parameter.
    Affine(String, Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberRule {
    pub field: String,
    pub indices: Vec<IdxAst>,
    pub rhs: ExprAst,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorDecl {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub symmetry: bool,
    pub base: BaseSpec,
    pub fibers: Vec<FiberRule>,
    pub span: Span,
}

/// One index slot as written: a variable or a literal, upper or lower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxAst {
    Var { name: String, up: bool },
    Lit { value: usize, up: bool },
}

impl IdxAst {
    pub fn up(&self) -> bool {
        match self {
            IdxAst::Var { up, .. } | IdxAst::Lit { up, .. } => *up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprAst {
    Int(i64),
    Neg(Box<ExprAst>),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, i32),
    Sqrt(Box<ExprAst>),
    /// `name` or `name[indices]`: coordinates, constants, fields, metric
    /// symbols, parameter families, built-ins (`eps`, `delta`, `sqrtdetg`).
    Atom {
        name: String,
        indices: Vec<IdxAst>,
        span: Span,
    },
    /// `d(target[indices], mu)` / `dd(target[indices], mu, nu)`.
    Jet {
        target: String,
        tindices: Vec<IdxAst>,
        jets: Vec<IdxAst>,
        span: Span,
    },
    /// `db(flow, ^mu, nu)` — the linear coefficient of an affine flow.
    FlowB {
        flow: String,
        upper: IdxAst,
        lower: IdxAst,
        span: Span,
    },
}

impl ExprAst {
    pub fn span(&self) -> Span {
        match self {
            ExprAst::Atom { span, .. }
            | ExprAst::Jet { span, .. }
            | ExprAst::FlowB { span, .. } => *span,
            ExprAst::Neg(b) | ExprAst::Sqrt(b) | ExprAst::Pow(b, _) => b.span(),
            ExprAst::Add(a, _) | ExprAst::Sub(a, _) | ExprAst::Mul(a, _) | ExprAst::Div(a, _) => {
                a.span()
            }
            ExprAst::Int(_) => Span::default(),
        }
    }
}
