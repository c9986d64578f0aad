//! Recursive-descent parser for `.thy` documents. The parser recovers at
//! statement boundaries so a single run can report several errors.

use crate::ast::*;
use crate::diag::{Diagnostic, Span};
use crate::lexer::{lex, TokKind, Token};

pub fn parse(source: &str) -> Result<Document, Vec<Diagnostic>> {
    let (tokens, mut diags) = lex(source);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
    };
    let doc = p.document();
    diags.extend(p.diags);
    match doc {
        Some(d) if diags.is_empty() => Ok(d),
        _ => {
            if diags.is_empty() {
                diags.push(Diagnostic::error(Span::default(), "malformed theory document"));
            }
            Err(diags)
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek2(&self) -> &Token {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn at(&self, kind: TokKind) -> bool {
        self.peek().kind == kind
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.at(TokKind::Ident) && self.peek().text == kw
    }

    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(span, msg));
    }

    fn expect(&mut self, kind: TokKind, what: &str) -> Option<Token> {
        if self.at(kind) {
            Some(self.bump())
        } else {
            let t = self.peek().clone();
            self.error(t.span, format!("expected {what}, found `{}`", display(&t)));
            None
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Option<Token> {
        if self.at_kw(kw) {
            Some(self.bump())
        } else {
            let t = self.peek().clone();
            self.error(t.span, format!("expected `{kw}`, found `{}`", display(&t)));
            None
        }
    }

    fn ident(&mut self, what: &str) -> Option<String> {
        self.expect(TokKind::Ident, what).map(|t| t.text)
    }

    fn int(&mut self, what: &str) -> Option<usize> {
        let t = self.expect(TokKind::Int, what)?;
        t.text.parse().ok()
    }

    /// Skips to just past the next `;`, or stops before `}` / end of input.
    fn recover(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek().kind {
                TokKind::Eof => return,
                TokKind::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                TokKind::RBrace if depth == 0 => return,
                TokKind::LBrace => {
                    depth += 1;
                    self.bump();
                }
                TokKind::RBrace => {
                    depth -= 1;
                    self.bump();
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn document(&mut self) -> Option<Document> {
        if self.at(TokKind::Eof) {
            self.error(self.peek().span, "missing theory declaration");
            return None;
        }
        self.expect_kw("theory")?;
        let name = self.ident("theory name")?;
        self.expect(TokKind::LBrace, "`{`")?;

        let mut base: Option<(usize, Vec<String>)> = None;
        let mut fields = Vec::new();
        let mut consts = Vec::new();
        let mut metric = MetricDecl::None;
        let mut metric_seen = false;
        let mut target_metrics = Vec::new();
        let mut defs = Vec::new();
        let mut generators = Vec::new();
        let mut lagrangian: Option<(ExprAst, Span)> = None;

        while !self.at(TokKind::RBrace) && !self.at(TokKind::Eof) {
            let t = self.peek().clone();
            let ok = match t.text.as_str() {
                "base" if t.kind == TokKind::Ident => {
                    if let Some(b) = self.base_decl() {
                        if base.is_some() {
                            self.error(t.span, "duplicate `base` declaration");
                        }
                        base = Some(b);
                        true
                    } else {
                        false
                    }
                }
                "field" | "param" if t.kind == TokKind::Ident => {
                    if let Some(f) = self.field_decl() {
                        if fields.iter().any(|g: &FieldDecl| g.name == f.name) {
                            self.error(f.span, format!("duplicate field `{}`", f.name));
                        }
                        fields.push(f);
                        true
                    } else {
                        false
                    }
                }
                "const" if t.kind == TokKind::Ident => {
                    self.bump();
                    if let Some(n) = self.ident("constant name") {
                        consts.push(n);
                        self.expect(TokKind::Semi, "`;`").is_some()
                    } else {
                        false
                    }
                }
                "metric" if t.kind == TokKind::Ident => {
                    if let Some(m) = self.metric_decl() {
                        if metric_seen {
                            self.error(t.span, "duplicate `metric` declaration");
                        }
                        metric = m;
                        metric_seen = true;
                        true
                    } else {
                        false
                    }
                }
                "target" if t.kind == TokKind::Ident => {
                    if let Some(tm) = self.target_metric_decl() {
                        target_metrics.push(tm);
                        true
                    } else {
                        false
                    }
                }
                "def" if t.kind == TokKind::Ident => {
                    if let Some(d) = self.def_decl() {
                        if defs.iter().any(|e: &DefDecl| e.name == d.name) {
                            self.error(d.span, format!("duplicate definition `{}`", d.name));
                        }
                        defs.push(d);
                        true
                    } else {
                        false
                    }
                }
                "generator" if t.kind == TokKind::Ident => {
                    if let Some(g) = self.generator_decl() {
                        if generators.iter().any(|h: &GeneratorDecl| h.name == g.name) {
                            self.error(g.span, format!("duplicate generator `{}`", g.name));
                        }
                        generators.push(g);
                        true
                    } else {
                        false
                    }
                }
                "lagrangian" if t.kind == TokKind::Ident => {
                    self.bump();
                    match self.expr() {
                        Some(e) => {
                            if lagrangian.is_some() {
                                self.error(t.span, "duplicate `lagrangian` declaration");
                            }
                            lagrangian = Some((e, t.span));
                            self.expect(TokKind::Semi, "`;`").is_some()
                        }
                        None => false,
                    }
                }
                _ => {
                    self.error(
                        t.span,
                        format!("unexpected token `{}` at start of declaration", display(&t)),
                    );
                    false
                }
            };
            if !ok {
                self.recover();
            }
        }
        self.expect(TokKind::RBrace, "`}`");

        // an omitted clause is only reported when nothing else went wrong;
        // after an error the omission is usually a consequence, not a cause
        let base = match base {
            Some(b) => b,
            None => {
                if self.diags.is_empty() {
                    self.error(Span::default(), "missing `base` declaration");
                }
                return None;
            }
        };
        let (lagrangian, lagrangian_span) = match lagrangian {
            Some(l) => l,
            None => {
                if self.diags.is_empty() {
                    self.error(Span::default(), "missing `lagrangian` declaration");
                }
                return None;
            }
        };
        Some(Document {
            name,
            base_dim: base.0,
            coords: base.1,
            fields,
            consts,
            metric,
            target_metrics,
            defs,
            generators,
            lagrangian,
            lagrangian_span,
        })
    }

    fn base_decl(&mut self) -> Option<(usize, Vec<String>)> {
        self.bump(); // base
        self.expect_kw("dim")?;
        let dim = self.int("base dimension")?;
        self.expect_kw("coords")?;
        self.expect(TokKind::LParen, "`(`")?;
        let mut coords = Vec::new();
        loop {
            coords.push(self.ident("coordinate name")?);
            if self.at(TokKind::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(TokKind::RParen, "`)`")?;
        self.expect(TokKind::Semi, "`;`")?;
        Some((dim, coords))
    }

    fn field_decl(&mut self) -> Option<FieldDecl> {
        let kw = self.bump(); // field | param
        let span = kw.span;
        let name = self.ident("field name")?;
        self.expect(TokKind::Colon, "`:`")?;
        let st = self.ident("field structure (scalar, covector or sym2)")?;
        let structure = match st.as_str() {
            "scalar" => {
                self.expect(TokKind::LBracket, "`[`")?;
                let d = self.int("target dimension")?;
                self.expect(TokKind::RBracket, "`]`")?;
                FieldStructure::Scalar(d)
            }
            "covector" => FieldStructure::Covector,
            "sym2" => FieldStructure::Sym2,
            other => {
                self.error(span, format!("unknown field structure `{other}`"));
                return None;
            }
        };
        let mut variational = kw.text == "field";
        if self.at_kw("variational") {
            self.bump();
            variational = true;
        } else if self.at_kw("parametric") {
            self.bump();
            variational = false;
        }
        self.expect(TokKind::Semi, "`;`")?;
        Some(FieldDecl {
            name,
            structure,
            variational,
            span,
        })
    }

    fn metric_decl(&mut self) -> Option<MetricDecl> {
        self.bump(); // metric
        let kind = self.ident("metric kind")?;
        let m = match kind.as_str() {
            "none" => MetricDecl::None,
            "fixed" => {
                self.expect_kw("minkowski")?;
                MetricDecl::FixedMinkowski
            }
            "parametric" => MetricDecl::Parametric(self.ident("metric field name")?),
            "variational" => MetricDecl::Variational(self.ident("metric field name")?),
            other => {
                let span = self.peek().span;
                self.error(span, format!("unknown metric kind `{other}`"));
                return None;
            }
        };
        self.expect(TokKind::Semi, "`;`")?;
        Some(m)
    }

    fn target_metric_decl(&mut self) -> Option<TargetMetricDecl> {
        let kw = self.bump(); // target
        self.expect_kw("metric")?;
        let name = self.ident("target metric name")?;
        self.expect_kw("on")?;
        let field = self.ident("field name")?;
        self.expect(TokKind::Semi, "`;`")?;
        Some(TargetMetricDecl {
            name,
            field,
            span: kw.span,
        })
    }

    fn def_decl(&mut self) -> Option<DefDecl> {
        let kw = self.bump(); // def
        let name = self.ident("definition name")?;
        let lb = self.expect(TokKind::LBracket, "`[`")?;
        let mut params = Vec::new();
        loop {
            params.push(self.ident("index name")?);
            if self.at(TokKind::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        if !self.at(TokKind::RBracket) {
            self.error(lb.span, "unbalanced index bracket");
            return None;
        }
        self.bump();
        self.expect(TokKind::Assign, "`:=`")?;
        let body = self.expr()?;
        self.expect(TokKind::Semi, "`;`")?;
        Some(DefDecl {
            name,
            params,
            body,
            span: kw.span,
        })
    }

    fn param_decl(&mut self) -> Option<ParamDecl> {
        let kind = self.ident("parameter kind")?;
        match kind.as_str() {
            "scalar" => Some(ParamDecl::Scalar(self.ident("parameter name")?)),
            "gauge" => Some(ParamDecl::Gauge(self.ident("parameter name")?)),
            "affine" => Some(ParamDecl::Affine(self.ident("parameter name")?)),
            "vector" => {
                let name = self.ident("parameter name")?;
                self.expect(TokKind::Colon, "`:`")?;
                self.expect(TokKind::Caret, "`^`")?;
                let dim = self.int("index range")?;
                Some(ParamDecl::Vector { name, dim })
            }
            "antisym" => {
                let name = self.ident("parameter name")?;
                self.expect(TokKind::Colon, "`:`")?;
                let dim = self.int("index range")?;
                Some(ParamDecl::Antisym { name, dim })
            }
            other => {
                let span = self.peek().span;
                self.error(span, format!("unknown jet-parameter kind `{other}`"));
                None
            }
        }
    }

    fn generator_decl(&mut self) -> Option<GeneratorDecl> {
        let kw = self.bump(); // generator
        let name = self.ident("generator name")?;
        self.expect(TokKind::LParen, "`(`")?;
        self.expect_kw("params")?;
        self.expect(TokKind::Colon, "`:`")?;
        let mut params = Vec::new();
        loop {
            params.push(self.param_decl()?);
            if self.at(TokKind::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(TokKind::RParen, "`)`")?;
        let mut symmetry = false;
        if self.at_kw("symmetry") {
            self.bump();
            symmetry = true;
        }
        self.expect(TokKind::LBrace, "`{`")?;
        let mut base: Option<BaseSpec> = None;
        let mut fibers = Vec::new();
        while !self.at(TokKind::RBrace) && !self.at(TokKind::Eof) {
            let t = self.peek().clone();
            let ok = if self.at_kw("base") {
                self.bump();
                self.expect(TokKind::Colon, "`:`").is_some() && {
                    if self.at_kw("affine") && self.peek2().kind == TokKind::Ident {
                        let span = self.bump().span;
                        let flow = self.ident("affine parameter name");
                        match flow {
                            Some(f) => {
                                base = Some(BaseSpec::Affine(f, span));
                                self.expect(TokKind::Semi, "`;`").is_some()
                            }
                            None => false,
                        }
                    } else {
                        let mut exprs = Vec::new();
                        let mut good = true;
                        loop {
                            match self.expr() {
                                Some(e) => exprs.push(e),
                                None => {
                                    good = false;
                                    break;
                                }
                            }
                            if self.at(TokKind::Comma) {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                        if good {
                            base = Some(BaseSpec::Exprs(exprs));
                            self.expect(TokKind::Semi, "`;`").is_some()
                        } else {
                            false
                        }
                    }
                }
            } else if self.at_kw("fiber") {
                self.bump();
                self.fiber_rule().map(|r| fibers.push(r)).is_some()
            } else {
                self.error(
                    t.span,
                    format!("expected `base` or `fiber`, found `{}`", display(&t)),
                );
                false
            };
            if !ok {
                self.recover();
            }
        }
        self.expect(TokKind::RBrace, "`}`")?;
        let base = match base {
            Some(b) => b,
            None => {
                self.error(kw.span, format!("generator `{name}` has no `base` clause"));
                return None;
            }
        };
        Some(GeneratorDecl {
            name,
            params,
            symmetry,
            base,
            fibers,
            span: kw.span,
        })
    }

    fn fiber_rule(&mut self) -> Option<FiberRule> {
        self.expect(TokKind::Colon, "`:`")?;
        let field_tok = self.expect(TokKind::Ident, "field name")?;
        let indices = if self.at(TokKind::LBracket) {
            self.index_list()?
        } else {
            Vec::new()
        };
        self.expect(TokKind::Arrow, "`->`")?;
        let rhs = self.expr()?;
        self.expect(TokKind::Semi, "`;`")?;
        Some(FiberRule {
            field: field_tok.text,
            indices,
            rhs,
            span: field_tok.span,
        })
    }

    /// Parses `[ idx, idx, ... ]`, reporting an unbalanced bracket at the
    /// opening bracket's span.
    fn index_list(&mut self) -> Option<Vec<IdxAst>> {
        let lb = self.expect(TokKind::LBracket, "`[`")?;
        let mut out = Vec::new();
        loop {
            out.push(self.index()?);
            if self.at(TokKind::Comma) {
                self.bump();
            } else {
                break;
            }
        }
        if !self.at(TokKind::RBracket) {
            self.error(lb.span, "unbalanced index bracket");
            return None;
        }
        self.bump();
        Some(out)
    }

    fn index(&mut self) -> Option<IdxAst> {
        let up = if self.at(TokKind::Caret) {
            self.bump();
            true
        } else {
            false
        };
        let t = self.peek().clone();
        match t.kind {
            TokKind::Ident => {
                self.bump();
                Some(IdxAst::Var { name: t.text, up })
            }
            TokKind::Int => {
                self.bump();
                Some(IdxAst::Lit {
                    value: t.text.parse().ok()?,
                    up,
                })
            }
            _ => {
                self.error(t.span, format!("expected an index, found `{}`", display(&t)));
                None
            }
        }
    }

    // ----- expressions -----

    fn expr(&mut self) -> Option<ExprAst> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokKind::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = ExprAst::Add(Box::new(lhs), Box::new(rhs));
                }
                TokKind::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = ExprAst::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Some(lhs),
            }
        }
    }

    fn term(&mut self) -> Option<ExprAst> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                TokKind::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = ExprAst::Mul(Box::new(lhs), Box::new(rhs));
                }
                TokKind::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = ExprAst::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Some(lhs),
            }
        }
    }

    fn unary(&mut self) -> Option<ExprAst> {
        if self.at(TokKind::Minus) {
            self.bump();
            let e = self.unary()?;
            Some(ExprAst::Neg(Box::new(e)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Option<ExprAst> {
        let base = self.primary()?;
        if self.at(TokKind::Caret) {
            self.bump();
            let neg = if self.at(TokKind::Minus) {
                self.bump();
                true
            } else {
                false
            };
            let k = self.int("integer exponent")? as i32;
            Some(ExprAst::Pow(Box::new(base), if neg { -k } else { k }))
        } else {
            Some(base)
        }
    }

    fn primary(&mut self) -> Option<ExprAst> {
        let t = self.peek().clone();
        match t.kind {
            TokKind::Int => {
                self.bump();
                Some(ExprAst::Int(t.text.parse().ok()?))
            }
            TokKind::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(TokKind::RParen, "`)`")?;
                Some(e)
            }
            TokKind::Ident => match t.text.as_str() {
                "sqrt" => {
                    self.bump();
                    self.expect(TokKind::LParen, "`(`")?;
                    let e = self.expr()?;
                    self.expect(TokKind::RParen, "`)`")?;
                    Some(ExprAst::Sqrt(Box::new(e)))
                }
                "d" | "dd" => {
                    let order = if t.text == "dd" { 2 } else { 1 };
                    self.bump();
                    self.expect(TokKind::LParen, "`(`")?;
                    let target = self.ident("field or gauge-parameter name")?;
                    let tindices = if self.at(TokKind::LBracket) {
                        self.index_list()?
                    } else {
                        Vec::new()
                    };
                    let mut jets = Vec::new();
                    for _ in 0..order {
                        self.expect(TokKind::Comma, "`,`")?;
                        jets.push(self.index()?);
                    }
                    self.expect(TokKind::RParen, "`)`")?;
                    Some(ExprAst::Jet {
                        target,
                        tindices,
                        jets,
                        span: t.span,
                    })
                }
                "db" => {
                    self.bump();
                    self.expect(TokKind::LParen, "`(`")?;
                    let flow = self.ident("affine parameter name")?;
                    self.expect(TokKind::Comma, "`,`")?;
                    let upper = self.index()?;
                    self.expect(TokKind::Comma, "`,`")?;
                    let lower = self.index()?;
                    self.expect(TokKind::RParen, "`)`")?;
                    Some(ExprAst::FlowB {
                        flow,
                        upper,
                        lower,
                        span: t.span,
                    })
                }
                _ => {
                    self.bump();
                    let indices = if self.at(TokKind::LBracket) {
                        self.index_list()?
                    } else {
                        Vec::new()
                    };
                    Some(ExprAst::Atom {
                        name: t.text,
                        indices,
                        span: t.span,
                    })
                }
            },
            _ => {
                self.error(
                    t.span,
                    format!("expected an expression, found `{}`", display(&t)),
                );
                None
            }
        }
    }
}

fn display(t: &Token) -> String {
    if t.kind == TokKind::Eof {
        "end of input".into()
    } else {
        t.text.clone()
    }
}
