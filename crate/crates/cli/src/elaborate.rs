//! Index-notation elaborator: turns a parsed theory document into an engine
//! `Theory`, implementing the Einstein summation convention with explicit
//! variance. A repeated index appearing once up and once down is summed over
//! its slot range; scalar-multiplet labels are variance-free and sum on
//! plain repetition. Raising a lower tensor slot inserts the declared
//! inverse-metric symbols and is forbidden without a declared metric.

use std::collections::{BTreeMap, HashMap, HashSet};

use multiphase_core::expr::rat;
use multiphase_core::jets::{jet_charts, BundleSpec, FieldSpec};
use multiphase_core::symbol::{self, IndexTag, SymbolId};
use multiphase_core::theories::{
    affine_flow, epsilon_sign, minkowski_diag, register_gauge_scalar, register_metric_calculus,
    register_target_metric, AffineFlow, GaugeScalar, MetricCalculus,
};
use multiphase_core::variational::{LagrangianDensity, MetricKind, Theory};
use multiphase_core::{Expr, GeneratorFamily, JetCharts, SymbolData, SymbolKind};

use crate::ast::*;
use crate::diag::{Diagnostic, Span};

/// An elaborated theory plus frontend-only annotations.
#[derive(Debug, Clone)]
pub struct ElabTheory {
    pub theory: Theory,
    /// Parallel to `theory.generators`: true for generators declared as
    /// symmetries, whose Lagrangian variation must be a null divergence.
    pub symmetry: Vec<bool>,
}

pub fn elaborate(doc: &Document) -> Result<ElabTheory, Vec<Diagnostic>> {
    let mut diags = Vec::new();

    if doc.coords.len() != doc.base_dim {
        diags.push(Diagnostic::error(
            Span::default(),
            format!(
                "base dimension is {} but {} coordinate names are declared",
                doc.base_dim,
                doc.coords.len()
            ),
        ));
        return Err(diags);
    }
    let mut fields = Vec::new();
    for f in &doc.fields {
        fields.push(match &f.structure {
            FieldStructure::Scalar(d) => FieldSpec::scalar(&f.name, *d, f.variational),
            FieldStructure::Covector => FieldSpec::covector(&f.name, f.variational),
            FieldStructure::Sym2 => FieldSpec::sym2(&f.name, f.variational),
        });
    }
    let spec = match BundleSpec::new(doc.base_dim, fields) {
        Ok(s) => s,
        Err(e) => {
            diags.push(Diagnostic::error(Span::default(), format!("{e}")));
            return Err(diags);
        }
    };
    let jc = jet_charts(&spec);

    // metric and derived-symbol registration
    let mut extras: HashMap<SymbolId, Expr> = HashMap::new();
    let mut metric_ctx = MetricCtx::None;
    let metric_kind = match &doc.metric {
        MetricDecl::None => MetricKind::None,
        MetricDecl::FixedMinkowski => {
            metric_ctx = MetricCtx::Minkowski(minkowski_diag(doc.base_dim));
            MetricKind::FixedMinkowski
        }
        MetricDecl::Parametric(name) => {
            match doc.fields.iter().find(|f| &f.name == name) {
                Some(f) if !f.variational && f.structure == FieldStructure::Sym2 => {
                    let mc = register_metric_calculus(&jc, name);
                    extras.extend(mc.extras.clone());
                    metric_ctx = MetricCtx::Parametric(mc);
                }
                _ => diags.push(Diagnostic::error(
                    Span::default(),
                    format!("parametric metric `{name}` must be a parametric sym2 field"),
                )),
            }
            MetricKind::Parametric(name.clone())
        }
        MetricDecl::Variational(name) => {
            match doc.fields.iter().find(|f| &f.name == name) {
                Some(f) if f.variational && f.structure == FieldStructure::Sym2 => {}
                _ => diags.push(Diagnostic::error(
                    Span::default(),
                    format!("variational metric `{name}` must be a variational sym2 field"),
                )),
            }
            MetricKind::Variational(name.clone())
        }
    };

    let mut targets: HashMap<String, (String, usize)> = HashMap::new();
    for tm in &doc.target_metrics {
        match doc.fields.iter().find(|f| f.name == tm.field) {
            Some(f) => match f.structure {
                FieldStructure::Scalar(d) => {
                    extras.extend(register_target_metric(&jc, &tm.name, &tm.field));
                    targets.insert(tm.name.clone(), (tm.field.clone(), d));
                }
                _ => diags.push(Diagnostic::error(
                    tm.span,
                    format!("target metric `{}` must live over a scalar multiplet", tm.name),
                )),
            },
            None => diags.push(Diagnostic::error(
                tm.span,
                format!("target metric field `{}` is not declared", tm.field),
            )),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let mut defs: HashMap<String, &DefDecl> = HashMap::new();
    for d in &doc.defs {
        defs.insert(d.name.clone(), d);
    }

    let base_ctx = Ctx {
        jc: &jc,
        doc,
        metric: &metric_ctx,
        consts: doc
            .consts
            .iter()
            .map(|n| (n.clone(), symbol::scalar_parameter(n)))
            .collect(),
        gauges: HashMap::new(),
        affines: HashMap::new(),
        vectors: HashMap::new(),
        antisyms: HashMap::new(),
        targets: &targets,
        defs: &defs,
    };

    // lagrangian
    let lag = match eval_closed(&doc.lagrangian, &base_ctx, &HashMap::new()) {
        Ok(e) => e,
        Err(d) => {
            diags.push(d);
            Expr::zero()
        }
    };

    // generators
    let mut generators = Vec::new();
    let mut symmetry = Vec::new();
    for g in &doc.generators {
        match elaborate_generator(g, &base_ctx) {
            Ok(fam) => {
                generators.push(fam);
                symmetry.push(g.symmetry);
            }
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let parametrized = doc.fields.iter().any(|f| !f.variational)
        || matches!(doc.metric, MetricDecl::Variational(_))
        || !doc.target_metrics.is_empty();

    Ok(ElabTheory {
        theory: Theory {
            name: doc.name.clone(),
            charts: jc,
            lagrangian: LagrangianDensity::new(lag),
            generators,
            parametrized,
            metric: metric_kind,
            section_extras: extras,
        },
        symmetry,
    })
}

enum MetricCtx {
    None,
    Minkowski(Vec<Expr>),
    Parametric(MetricCalculus),
}

struct Ctx<'a> {
    jc: &'a JetCharts,
    doc: &'a Document,
    metric: &'a MetricCtx,
    consts: HashMap<String, SymbolId>,
    gauges: HashMap<String, GaugeScalar>,
    affines: HashMap<String, AffineFlow>,
    vectors: HashMap<String, Vec<SymbolId>>,
    antisyms: HashMap<String, (usize, HashMap<(usize, usize), SymbolId>)>,
    targets: &'a HashMap<String, (String, usize)>,
    defs: &'a HashMap<String, &'a DefDecl>,
}

fn elaborate_generator(g: &GeneratorDecl, base_ctx: &Ctx) -> Result<GeneratorFamily, Diagnostic> {
    let jc = base_ctx.jc;
    let n = jc.dim();
    let mut ctx = Ctx {
        jc,
        doc: base_ctx.doc,
        metric: base_ctx.metric,
        consts: base_ctx.consts.clone(),
        gauges: HashMap::new(),
        affines: HashMap::new(),
        vectors: HashMap::new(),
        antisyms: HashMap::new(),
        targets: base_ctx.targets,
        defs: base_ctx.defs,
    };
    let mut jet_parameters = Vec::new();
    for p in &g.params {
        match p {
            ParamDecl::Scalar(name) => {
                let s = symbol::scalar_parameter(name);
                ctx.consts.insert(name.clone(), s);
                jet_parameters.push(s);
            }
            ParamDecl::Gauge(name) => {
                let gs = register_gauge_scalar(jc, name);
                jet_parameters.extend(gs.params.iter().copied());
                ctx.gauges.insert(name.clone(), gs);
            }
            ParamDecl::Affine(name) => {
                let flow = affine_flow(jc);
                jet_parameters.extend(flow.params.iter().copied());
                ctx.affines.insert(name.clone(), flow);
            }
            ParamDecl::Vector { name, dim } => {
                let syms: Vec<SymbolId> = (0..*dim)
                    .map(|a| symbol::parameter(name, vec![IndexTag::up(a as u8)]))
                    .collect();
                jet_parameters.extend(syms.iter().copied());
                ctx.vectors.insert(name.clone(), syms);
            }
            ParamDecl::Antisym { name, dim } => {
                let mut table = HashMap::new();
                for a in 0..*dim {
                    for b in a + 1..*dim {
                        let s = symbol::parameter(
                            name,
                            vec![IndexTag::down(a as u8), IndexTag::down(b as u8)],
                        );
                        jet_parameters.push(s);
                        table.insert((a, b), s);
                    }
                }
                ctx.antisyms.insert(name.clone(), (*dim, table));
            }
        }
    }

    let base = match &g.base {
        BaseSpec::Affine(name, span) => match ctx.affines.get(name) {
            Some(flow) => flow.base.clone(),
            None => {
                return Err(Diagnostic::error(
                    *span,
                    format!("affine parameter `{name}` is not declared in this generator"),
                ))
            }
        },
        BaseSpec::Exprs(exprs) => {
            if exprs.len() != n {
                return Err(Diagnostic::error(
                    g.span,
                    format!(
                        "generator `{}` base clause has {} components; the base dimension is {n}",
                        g.name,
                        exprs.len()
                    ),
                ));
            }
            let mut out = Vec::new();
            for e in exprs {
                out.push(eval_closed(e, &ctx, &HashMap::new())?);
            }
            out
        }
    };

    let mut fam = GeneratorFamily::new(&g.name, base);
    let mut covered: HashSet<SymbolId> = HashSet::new();
    for rule in &g.fibers {
        let fidx = match ctx.doc.fields.iter().position(|f| f.name == rule.field) {
            Some(i) => i,
            None => {
                return Err(Diagnostic::error(
                    rule.span,
                    format!("fiber rule names undeclared field `{}`", rule.field),
                ))
            }
        };
        let arity = match ctx.doc.fields[fidx].structure {
            FieldStructure::Scalar(_) | FieldStructure::Covector => 1,
            FieldStructure::Sym2 => 2,
        };
        if rule.indices.len() != arity {
            return Err(Diagnostic::error(
                rule.span,
                format!(
                    "field `{}` takes {arity} component index(es), {} given",
                    rule.field,
                    rule.indices.len()
                ),
            ));
        }
        let mut matched = false;
        for entry in jc.field_entries(&rule.field) {
            let mut env: HashMap<String, usize> = HashMap::new();
            let mut ok = true;
            for (slot, tag) in rule.indices.iter().zip(&entry.comp) {
                match slot {
                    IdxAst::Lit { value, .. } => {
                        if *value != tag.value as usize {
                            ok = false;
                            break;
                        }
                    }
                    IdxAst::Var { name, .. } => match env.get(name) {
                        Some(v) if *v != tag.value as usize => {
                            ok = false;
                            break;
                        }
                        _ => {
                            env.insert(name.clone(), tag.value as usize);
                        }
                    },
                }
            }
            if !ok {
                continue;
            }
            matched = true;
            if !covered.insert(entry.y) {
                return Err(Diagnostic::error(
                    rule.span,
                    format!(
                        "component of `{}` receives more than one fiber rule",
                        rule.field
                    ),
                ));
            }
            let rhs = eval_closed(&rule.rhs, &ctx, &env)?;
            fam.set_fiber(entry.y, rhs);
        }
        if !matched {
            return Err(Diagnostic::error(
                rule.span,
                format!("fiber rule matches no component of `{}`", rule.field),
            ));
        }
    }
    fam.jet_parameters = jet_parameters;
    Ok(fam)
}

// ----- index bookkeeping -----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Base,
    Label,
}

#[derive(Debug, Clone)]
struct Occ {
    count: usize,
    ups: usize,
    downs: usize,
    class: Class,
    range: usize,
    span: Span,
}

type OccMap = BTreeMap<String, Occ>;

#[derive(Debug, Clone, Copy)]
struct Slot {
    class: Class,
    range: usize,
}

enum Head<'a> {
    SqrtDetG,
    Eps,
    Delta,
    Coord(usize),
    Const(SymbolId),
    GaugeValue(&'a GaugeScalar),
    Metric,
    TargetMetric { name: String, dim: usize },
    Field(usize),
    VectorP(&'a Vec<SymbolId>),
    AntisymP(&'a (usize, HashMap<(usize, usize), SymbolId>)),
    Def(&'a DefDecl),
}

fn resolve_head<'a>(ctx: &'a Ctx, name: &str, span: Span) -> Result<Head<'a>, Diagnostic> {
    if name == "sqrtdetg" {
        return Ok(Head::SqrtDetG);
    }
    if name == "eps" {
        return Ok(Head::Eps);
    }
    if name == "delta" {
        return Ok(Head::Delta);
    }
    if let Some(i) = ctx.doc.coords.iter().position(|c| c == name) {
        return Ok(Head::Coord(i));
    }
    if let Some(s) = ctx.consts.get(name) {
        return Ok(Head::Const(*s));
    }
    if let Some(gs) = ctx.gauges.get(name) {
        return Ok(Head::GaugeValue(gs));
    }
    match ctx.metric {
        MetricCtx::Minkowski(_) if name == "g" => return Ok(Head::Metric),
        MetricCtx::Parametric(mc) if name == mc.name => return Ok(Head::Metric),
        _ => {}
    }
    if let Some((_, d)) = ctx.targets.get(name) {
        return Ok(Head::TargetMetric {
            name: name.to_string(),
            dim: *d,
        });
    }
    if let Some(i) = ctx.doc.fields.iter().position(|f| f.name == name) {
        return Ok(Head::Field(i));
    }
    if let Some(v) = ctx.vectors.get(name) {
        return Ok(Head::VectorP(v));
    }
    if let Some(a) = ctx.antisyms.get(name) {
        return Ok(Head::AntisymP(a));
    }
    if let Some(d) = ctx.defs.get(name) {
        return Ok(Head::Def(d));
    }
    Err(Diagnostic::error(span, format!("unknown identifier `{name}`"))
        .with_hint("declare fields, constants and jet parameters before use"))
}

fn head_slots(ctx: &Ctx, head: &Head, arity: usize, span: Span) -> Result<Vec<Slot>, Diagnostic> {
    let n = ctx.jc.dim();
    let base = Slot {
        class: Class::Base,
        range: n,
    };
    let expect = |k: usize, slots: Vec<Slot>| -> Result<Vec<Slot>, Diagnostic> {
        if arity == k {
            Ok(slots)
        } else {
            Err(Diagnostic::error(
                span,
                format!("expected {k} index(es) here, found {arity}"),
            ))
        }
    };
    match head {
        Head::SqrtDetG | Head::Coord(_) | Head::Const(_) | Head::GaugeValue(_) => {
            expect(0, vec![])
        }
        Head::Eps => expect(n, vec![base; n]),
        Head::Delta | Head::Metric => expect(2, vec![base; 2]),
        Head::TargetMetric { dim, .. } => expect(
            2,
            vec![
                Slot {
                    class: Class::Label,
                    range: *dim,
                };
                2
            ],
        ),
        Head::Field(i) => match ctx.doc.fields[*i].structure {
            FieldStructure::Scalar(d) => expect(
                1,
                vec![Slot {
                    class: Class::Label,
                    range: d,
                }],
            ),
            FieldStructure::Covector => expect(1, vec![base]),
            FieldStructure::Sym2 => expect(2, vec![base; 2]),
        },
        Head::VectorP(v) => expect(
            1,
            vec![Slot {
                class: Class::Label,
                range: v.len(),
            }],
        ),
        Head::AntisymP((d, _)) => expect(
            2,
            vec![
                Slot {
                    class: Class::Label,
                    range: *d,
                };
                2
            ],
        ),
        Head::Def(d) => expect(d.params.len(), vec![base; d.params.len()]),
    }
}

fn record_slots(
    map: &mut OccMap,
    slots: &[Slot],
    indices: &[IdxAst],
    bound: &HashSet<String>,
    span: Span,
) -> Result<(), Diagnostic> {
    for (slot, idx) in slots.iter().zip(indices) {
        match idx {
            IdxAst::Lit { value, .. } => {
                if *value >= slot.range {
                    return Err(Diagnostic::error(
                        span,
                        format!("index {value} out of range 0..{}", slot.range),
                    ));
                }
            }
            IdxAst::Var { name, up } => {
                if bound.contains(name) {
                    continue;
                }
                let e = map.entry(name.clone()).or_insert(Occ {
                    count: 0,
                    ups: 0,
                    downs: 0,
                    class: slot.class,
                    range: slot.range,
                    span,
                });
                if e.count > 0 && (e.class != slot.class || e.range != slot.range) {
                    return Err(Diagnostic::error(
                        span,
                        format!("index `{name}` is used with inconsistent ranges"),
                    ));
                }
                e.count += 1;
                if *up {
                    e.ups += 1;
                } else {
                    e.downs += 1;
                }
            }
        }
    }
    Ok(())
}

/// Closes every index pair completable at the current (product) level and
/// validates the variance rule. Returns the closed variables.
fn close_pairs(map: &mut OccMap) -> Result<Vec<(String, usize)>, Diagnostic> {
    let mut closed = Vec::new();
    let keys: Vec<String> = map.keys().cloned().collect();
    for k in keys {
        let occ = map[&k].clone();
        if occ.count == 2 {
            if occ.class == Class::Base && !(occ.ups == 1 && occ.downs == 1) {
                let dir = if occ.ups == 2 { "up" } else { "down" };
                return Err(Diagnostic::error(
                    occ.span,
                    format!("summed base index `{k}` appears twice {dir}"),
                )
                .with_hint("contract through an explicit metric factor instead"));
            }
            closed.push((k.clone(), occ.range));
            map.remove(&k);
        } else if occ.count > 2 {
            return Err(Diagnostic::error(
                occ.span,
                format!("index `{k}` appears more than twice in a product"),
            ));
        }
    }
    Ok(closed)
}

/// Free-occurrence analysis below one AST node; pairs completed at product
/// nodes are removed from the returned map.
fn occurrences(ast: &ExprAst, ctx: &Ctx, bound: &HashSet<String>) -> Result<OccMap, Diagnostic> {
    match ast {
        ExprAst::Int(_) => Ok(OccMap::new()),
        ExprAst::Neg(a) => occurrences(a, ctx, bound),
        ExprAst::Sqrt(a) => {
            let m = occurrences(a, ctx, bound)?;
            if let Some((k, occ)) = m.into_iter().next() {
                return Err(Diagnostic::error(
                    occ.span,
                    format!("index `{k}` is not closed inside sqrt(...)"),
                ));
            }
            Ok(OccMap::new())
        }
        ExprAst::Pow(a, k) => {
            let m = occurrences(a, ctx, bound)?;
            if !m.is_empty() && *k != 1 {
                let (name, occ) = m.into_iter().next().unwrap();
                return Err(Diagnostic::error(
                    occ.span,
                    format!("index `{name}` under a power; write the product explicitly"),
                ));
            }
            Ok(m)
        }
        ExprAst::Add(a, b) | ExprAst::Sub(a, b) => {
            let ma = occurrences(a, ctx, bound)?;
            let mb = occurrences(b, ctx, bound)?;
            let same = ma.len() == mb.len()
                && ma.iter().all(|(k, o)| {
                    mb.get(k).map_or(false, |p| {
                        o.count == p.count
                            && o.ups == p.ups
                            && o.downs == p.downs
                            && o.range == p.range
                    })
                });
            if !same {
                let span = ast.span();
                return Err(Diagnostic::error(
                    span,
                    "free indices differ between the branches of a sum",
                )
                .with_hint("every addend must carry the same free indices with the same variance"));
            }
            Ok(ma)
        }
        ExprAst::Mul(a, b) => {
            let ma = occurrences(a, ctx, bound)?;
            let mb = occurrences(b, ctx, bound)?;
            let mut m = ma;
            for (k, o) in mb {
                match m.get_mut(&k) {
                    Some(e) => {
                        if e.class != o.class || e.range != o.range {
                            return Err(Diagnostic::error(
                                o.span,
                                format!("index `{k}` is used with inconsistent ranges"),
                            ));
                        }
                        e.count += o.count;
                        e.ups += o.ups;
                        e.downs += o.downs;
                    }
                    None => {
                        m.insert(k, o);
                    }
                }
            }
            close_pairs(&mut m)?;
            Ok(m)
        }
        ExprAst::Div(a, b) => {
            let mb = occurrences(b, ctx, bound)?;
            if let Some((k, occ)) = mb.into_iter().next() {
                return Err(Diagnostic::error(
                    occ.span,
                    format!("index `{k}` is not closed inside a denominator"),
                ));
            }
            occurrences(a, ctx, bound)
        }
        ExprAst::Atom { name, indices, span } => {
            let head = resolve_head(ctx, name, *span)?;
            let slots = head_slots(ctx, &head, indices.len(), *span)?;
            let mut m = OccMap::new();
            record_slots(&mut m, &slots, indices, bound, *span)?;
            Ok(m)
        }
        ExprAst::Jet {
            target,
            tindices,
            jets,
            span,
        } => {
            let head = resolve_head(ctx, target, *span)?;
            let slots = head_slots(ctx, &head, tindices.len(), *span)?;
            let mut m = OccMap::new();
            record_slots(&mut m, &slots, tindices, bound, *span)?;
            let jet_slots = vec![
                Slot {
                    class: Class::Base,
                    range: ctx.jc.dim(),
                };
                jets.len()
            ];
            record_slots(&mut m, &jet_slots, jets, bound, *span)?;
            Ok(m)
        }
        ExprAst::FlowB { upper, lower, span, .. } => {
            let slots = vec![
                Slot {
                    class: Class::Base,
                    range: ctx.jc.dim(),
                };
                2
            ];
            let mut m = OccMap::new();
            record_slots(
                &mut m,
                &slots,
                &[upper.clone(), lower.clone()],
                bound,
                *span,
            )?;
            Ok(m)
        }
    }
}

// ----- evaluation -----

/// Evaluates an expression whose index variables must all close; any pair
/// still open at the root is summed there, and leftover indices are an
/// error.
fn eval_closed(
    ast: &ExprAst,
    ctx: &Ctx,
    env: &HashMap<String, usize>,
) -> Result<Expr, Diagnostic> {
    let bound: HashSet<String> = env.keys().cloned().collect();
    let mut map = occurrences(ast, ctx, &bound)?;
    let closed = close_pairs(&mut map)?;
    if let Some((k, occ)) = map.iter().next() {
        return Err(Diagnostic::error(
            occ.span,
            format!("free index `{k}` does not pair up"),
        )
        .with_hint("a summed index must appear exactly twice, once up and once down"));
    }
    sum_over(ast, ctx, env, &closed)
}

fn sum_over(
    ast: &ExprAst,
    ctx: &Ctx,
    env: &HashMap<String, usize>,
    vars: &[(String, usize)],
) -> Result<Expr, Diagnostic> {
    match vars.split_first() {
        None => eval(ast, ctx, env),
        Some(((name, range), rest)) => {
            let mut acc = Expr::zero();
            for v in 0..*range {
                let mut env2 = env.clone();
                env2.insert(name.clone(), v);
                acc = acc.add_ref(&sum_over(ast, ctx, &env2, rest)?);
            }
            Ok(acc)
        }
    }
}

fn eval(ast: &ExprAst, ctx: &Ctx, env: &HashMap<String, usize>) -> Result<Expr, Diagnostic> {
    match ast {
        ExprAst::Int(k) => Ok(Expr::int(*k)),
        ExprAst::Neg(a) => Ok(eval(a, ctx, env)?.neg_ref()),
        ExprAst::Add(a, b) => Ok(eval(a, ctx, env)?.add_ref(&eval(b, ctx, env)?)),
        ExprAst::Sub(a, b) => Ok(eval(a, ctx, env)?.sub_ref(&eval(b, ctx, env)?)),
        ExprAst::Sqrt(a) => Ok(eval(a, ctx, env)?.sqrt()),
        ExprAst::Pow(a, k) => Ok(eval(a, ctx, env)?.pow(*k)),
        ExprAst::Mul(a, b) => {
            let bound: HashSet<String> = env.keys().cloned().collect();
            let ma = occurrences(a, ctx, &bound)?;
            let mb = occurrences(b, ctx, &bound)?;
            let mut m = ma;
            for (k, o) in mb {
                match m.get_mut(&k) {
                    Some(e) => {
                        e.count += o.count;
                        e.ups += o.ups;
                        e.downs += o.downs;
                    }
                    None => {
                        m.insert(k, o);
                    }
                }
            }
            let closed = close_pairs(&mut m)?;
            if closed.is_empty() {
                Ok(eval(a, ctx, env)?.mul_ref(&eval(b, ctx, env)?))
            } else {
                sum_over(ast, ctx, env, &closed).map_err(|d| d)
            }
        }
        ExprAst::Div(a, b) => {
            let num = eval(a, ctx, env)?;
            let den = eval(b, ctx, env)?;
            invert(&den, ast.span()).map(|inv| num.mul_ref(&inv))
        }
        ExprAst::Atom { name, indices, span } => eval_atom(ctx, env, name, indices, *span),
        ExprAst::Jet {
            target,
            tindices,
            jets,
            span,
        } => eval_jet(ctx, env, target, tindices, jets, *span),
        ExprAst::FlowB {
            flow,
            upper,
            lower,
            span,
        } => {
            let f = ctx.affines.get(flow).ok_or_else(|| {
                Diagnostic::error(
                    *span,
                    format!("`{flow}` is not a declared affine parameter"),
                )
            })?;
            if !upper.up() || lower.up() {
                return Err(Diagnostic::error(
                    *span,
                    "db(flow, ^mu, nu) takes one upper and one lower index",
                ));
            }
            let u = idx_value(upper, env, ctx.jc.dim(), *span)?;
            let l = idx_value(lower, env, ctx.jc.dim(), *span)?;
            Ok(Expr::sym(f.b[u][l]))
        }
    }
}

/// Special case of the `Mul` evaluator: sub-sums already decided; evaluate
/// the two factors directly with every index bound.
fn idx_value(
    idx: &IdxAst,
    env: &HashMap<String, usize>,
    range: usize,
    span: Span,
) -> Result<usize, Diagnostic> {
    let v = match idx {
        IdxAst::Lit { value, .. } => *value,
        IdxAst::Var { name, .. } => *env.get(name).ok_or_else(|| {
            Diagnostic::error(span, format!("unbound index variable `{name}`"))
        })?,
    };
    if v >= range {
        return Err(Diagnostic::error(
            span,
            format!("index {v} out of range 0..{range}"),
        ));
    }
    Ok(v)
}

fn eval_atom(
    ctx: &Ctx,
    env: &HashMap<String, usize>,
    name: &str,
    indices: &[IdxAst],
    span: Span,
) -> Result<Expr, Diagnostic> {
    let head = resolve_head(ctx, name, span)?;
    let slots = head_slots(ctx, &head, indices.len(), span)?;
    let vals: Vec<usize> = indices
        .iter()
        .zip(&slots)
        .map(|(i, s)| idx_value(i, env, s.range, span))
        .collect::<Result<_, _>>()?;
    let n = ctx.jc.dim();
    match head {
        Head::SqrtDetG => match ctx.metric {
            MetricCtx::Parametric(mc) => Ok(mc.sdet_expr()),
            MetricCtx::Minkowski(_) => Ok(Expr::one()),
            MetricCtx::None => Err(Diagnostic::error(
                span,
                "`sqrtdetg` requires a declared metric",
            )),
        },
        Head::Eps => {
            if indices.iter().any(|i| !i.up()) {
                return Err(Diagnostic::error(
                    span,
                    "`eps` carries upper indices only",
                ));
            }
            Ok(Expr::int(epsilon_sign(&vals)))
        }
        Head::Delta => Ok(if vals[0] == vals[1] {
            Expr::one()
        } else {
            Expr::zero()
        }),
        Head::Coord(i) => Ok(Expr::sym(ctx.jc.x_sym(i))),
        Head::Const(s) => Ok(Expr::sym(s)),
        Head::GaugeValue(gs) => Ok(Expr::sym(gs.value)),
        Head::Metric => {
            let ups: Vec<bool> = indices.iter().map(|i| i.up()).collect();
            if ups[0] != ups[1] {
                return Err(Diagnostic::error(
                    span,
                    "metric indices must be both upper or both lower",
                ));
            }
            match ctx.metric {
                MetricCtx::Minkowski(eta) => Ok(if vals[0] == vals[1] {
                    eta[vals[0]].clone()
                } else {
                    Expr::zero()
                }),
                MetricCtx::Parametric(mc) => Ok(if ups[0] {
                    mc.gi_expr(vals[0], vals[1])
                } else {
                    mc.g_expr(vals[0], vals[1])
                }),
                MetricCtx::None => unreachable!("metric head without metric"),
            }
        }
        Head::TargetMetric { name, .. } => {
            if indices.iter().any(|i| i.up()) {
                return Err(Diagnostic::error(
                    span,
                    "target-metric indices are lower labels",
                ));
            }
            Ok(Expr::sym(symbol::intern(SymbolData {
                kind: SymbolKind::Metric,
                name,
                indices: vec![
                    IndexTag::down(vals[0] as u8),
                    IndexTag::down(vals[1] as u8),
                ],
            })))
        }
        Head::Field(fidx) => {
            let f = &ctx.doc.fields[fidx];
            match f.structure {
                FieldStructure::Scalar(_) => {
                    if indices[0].up() {
                        return Err(Diagnostic::error(
                            span,
                            "scalar-multiplet labels are written without variance",
                        ));
                    }
                    Ok(Expr::sym(ctx.jc.field_entries(&f.name)[vals[0]].y))
                }
                FieldStructure::Covector => {
                    let tag = IndexTag::down(vals[0] as u8);
                    if !indices[0].up() {
                        Ok(Expr::sym(ctx.jc.entry(&f.name, &[tag]).y))
                    } else {
                        // raise through the declared inverse metric
                        let mut acc = Expr::zero();
                        for c in 0..n {
                            let gi = inverse_metric_entry(ctx, vals[0], c, span)?;
                            let yc = ctx.jc.entry(&f.name, &[IndexTag::down(c as u8)]).y;
                            acc = acc.add_ref(&gi.mul_ref(&Expr::sym(yc)));
                        }
                        Ok(acc)
                    }
                }
                FieldStructure::Sym2 => {
                    if indices.iter().any(|i| i.up()) {
                        return Err(Diagnostic::error(
                            span,
                            "raising a sym2 field must be written out explicitly",
                        ));
                    }
                    Ok(Expr::sym(
                        ctx.jc
                            .entry(
                                &f.name,
                                &[
                                    IndexTag::down(vals[0] as u8),
                                    IndexTag::down(vals[1] as u8),
                                ],
                            )
                            .y,
                    ))
                }
            }
        }
        Head::VectorP(syms) => {
            if !indices[0].up() {
                return Err(Diagnostic::error(
                    span,
                    format!("`{name}` carries one upper index"),
                ));
            }
            Ok(Expr::sym(syms[vals[0]]))
        }
        Head::AntisymP((_, table)) => {
            if indices.iter().any(|i| i.up()) {
                return Err(Diagnostic::error(
                    span,
                    format!("`{name}` carries two lower indices"),
                ));
            }
            let (a, b) = (vals[0], vals[1]);
            use std::cmp::Ordering;
            match a.cmp(&b) {
                Ordering::Less => Ok(Expr::sym(table[&(a, b)])),
                Ordering::Greater => Ok(Expr::sym(table[&(b, a)]).neg_ref()),
                Ordering::Equal => Ok(Expr::zero()),
            }
        }
        Head::Def(def) => eval_def(ctx, def, indices, &vals, span),
    }
}

fn inverse_metric_entry(
    ctx: &Ctx,
    a: usize,
    b: usize,
    span: Span,
) -> Result<Expr, Diagnostic> {
    match ctx.metric {
        MetricCtx::Minkowski(eta) => Ok(if a == b { eta[a].clone() } else { Expr::zero() }),
        MetricCtx::Parametric(mc) => Ok(mc.gi_expr(a, b)),
        MetricCtx::None => Err(Diagnostic::error(
            span,
            "raising an index requires a declared metric",
        )),
    }
}

fn eval_def(
    ctx: &Ctx,
    def: &DefDecl,
    indices: &[IdxAst],
    vals: &[usize],
    span: Span,
) -> Result<Expr, Diagnostic> {
    // raise written-upper slots through the inverse metric, one at a time
    if let Some(pos) = indices.iter().position(|i| i.up()) {
        let n = ctx.jc.dim();
        let mut acc = Expr::zero();
        for c in 0..n {
            let gi = inverse_metric_entry(ctx, vals[pos], c, span)?;
            let mut idx2 = indices.to_vec();
            idx2[pos] = IdxAst::Lit {
                value: c,
                up: false,
            };
            let mut vals2 = vals.to_vec();
            vals2[pos] = c;
            acc = acc.add_ref(&gi.mul_ref(&eval_def(ctx, def, &idx2, &vals2, span)?));
        }
        return Ok(acc);
    }
    let env: HashMap<String, usize> = def
        .params
        .iter()
        .cloned()
        .zip(vals.iter().copied())
        .collect();
    eval_closed(&def.body, ctx, &env)
}

fn eval_jet(
    ctx: &Ctx,
    env: &HashMap<String, usize>,
    target: &str,
    tindices: &[IdxAst],
    jets: &[IdxAst],
    span: Span,
) -> Result<Expr, Diagnostic> {
    let n = ctx.jc.dim();
    let jvals: Vec<usize> = jets
        .iter()
        .map(|i| idx_value(i, env, n, span))
        .collect::<Result<_, _>>()?;
    if jets.iter().any(|i| i.up()) {
        return Err(Diagnostic::error(
            span,
            "jet indices of d(...)/dd(...) are lower",
        ));
    }
    let head = resolve_head(ctx, target, span)?;
    match head {
        Head::GaugeValue(gs) => {
            if !tindices.is_empty() {
                return Err(Diagnostic::error(
                    span,
                    format!("gauge parameter `{target}` takes no component indices"),
                ));
            }
            Ok(match jvals.len() {
                1 => Expr::sym(gs.d1[jvals[0]]),
                _ => Expr::sym(gs.d2[jvals[0]][jvals[1]]),
            })
        }
        Head::Field(fidx) => {
            let f = &ctx.doc.fields[fidx];
            if !f.variational {
                return Err(Diagnostic::error(
                    span,
                    format!(
                        "`{}` is parametric; parametric fields carry no jet coordinates",
                        f.name
                    ),
                )
                .with_hint("only variational fields may appear under d(...)"));
            }
            if tindices.iter().any(|i| i.up()) {
                return Err(Diagnostic::error(
                    span,
                    "component indices under d(...) are lower",
                ));
            }
            let slots = head_slots(ctx, &head, tindices.len(), span)?;
            let vals: Vec<usize> = tindices
                .iter()
                .zip(&slots)
                .map(|(i, s)| idx_value(i, env, s.range, span))
                .collect::<Result<_, _>>()?;
            let entry = match f.structure {
                FieldStructure::Scalar(_) => ctx.jc.field_entries(&f.name)[vals[0]],
                FieldStructure::Covector => {
                    ctx.jc.entry(&f.name, &[IndexTag::down(vals[0] as u8)])
                }
                FieldStructure::Sym2 => ctx.jc.entry(
                    &f.name,
                    &[
                        IndexTag::down(vals[0] as u8),
                        IndexTag::down(vals[1] as u8),
                    ],
                ),
            };
            Ok(match jvals.len() {
                1 => Expr::sym(entry.v[jvals[0]]),
                _ => Expr::sym(entry.w[jvals[0]][jvals[1]]),
            })
        }
        Head::Metric => Err(Diagnostic::error(
            span,
            format!("`{target}` is parametric background data; parametric fields carry no jet coordinates"),
        )
        .with_hint("only variational fields may appear under d(...)")),
        _ => Err(Diagnostic::error(
            span,
            format!("`{target}` is not a field or gauge parameter"),
        )),
    }
}

/// Inverts a single-term expression (a monomial, possibly with square-root
/// factors); anything else cannot appear in a denominator.
fn invert(e: &Expr, span: Span) -> Result<Expr, Diagnostic> {
    if let Some(c) = e.as_constant() {
        if c == rat(0, 1) {
            return Err(Diagnostic::error(span, "division by zero"));
        }
        return Ok(Expr::rational(rat(1, 1) / c));
    }
    if e.terms.len() != 1 {
        return Err(Diagnostic::error(
            span,
            "denominators must be a single invertible product",
        )
        .with_hint("multiply by an explicit inverse power instead"));
    }
    let term = &e.terms[0];
    let mut out = Expr::rational(rat(1, 1) / term.coeff.clone());
    for f in &term.mon.factors {
        let base = match &f.atom {
            multiphase_core::expr::Atom::Sym(s) => Expr::sym(*s),
            multiphase_core::expr::Atom::Sqrt(r) => (**r).clone().sqrt(),
        };
        out = out.mul_ref(&base.pow(-f.exp));
    }
    Ok(out)
}
