//! A catalog of worked field theories: particle mechanics, the
//! relativistic particle, vacuum electromagnetism on fixed and parametric
//! backgrounds, abelian Chern-Simons theory and the bosonic string.
//!
//! Also provides the reusable registration helpers for metric calculus
//! (inverse-metric and determinant derivative rules, plus their
//! section-level twins) and gauge scalar functions with jet chains.

use std::collections::HashMap;

use crate::expr::{rat, Expr};
use crate::jets::{jet_charts, BundleSpec, FieldSpec, JetCharts};
use crate::symbol::{self, IndexTag, SymbolData, SymbolId, SymbolKind};
use crate::symmetry::GeneratorFamily;
use crate::variational::{LagrangianDensity, MetricKind, Theory};

/// One shipped theory with a stable key for the command line.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub key: String,
    pub description: String,
    pub theory: Theory,
}

/// Sign of a permutation of 0..n given as an index tuple; 0 on repeats.
pub fn epsilon_sign(idx: &[usize]) -> i64 {
    let n = idx.len();
    let mut sign = 1i64;
    for i in 0..n {
        for j in i + 1..n {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Diagonal Minkowski signature (−, +, …, +) as rational entries.
pub fn minkowski_diag(dim: usize) -> Vec<Expr> {
    (0..dim)
        .map(|i| if i == 0 { Expr::int(-1) } else { Expr::one() })
        .collect()
}

/// Symbols and section twins of a parametric metric field, with all
/// differentiation rules registered.
#[derive(Debug, Clone)]
pub struct MetricCalculus {
    pub name: String,
    pub dim: usize,
    /// Chart-level metric component symbols, full matrix.
    pub g: Vec<Vec<SymbolId>>,
    /// Chart-level inverse metric symbols, full matrix.
    pub gi: Vec<Vec<SymbolId>>,
    /// Chart-level √(−det g) scalar.
    pub sdet: SymbolId,
    /// Section-level twins of the above.
    pub tg: Vec<Vec<SymbolId>>,
    pub tgi: Vec<Vec<SymbolId>>,
    pub tsdet: SymbolId,
    /// First section jets g_{αβ,σ} as xjet symbols, indexed [α][β][σ].
    pub jets: Vec<Vec<Vec<SymbolId>>>,
    /// Substitution resolving chart-level derived symbols to twins.
    pub extras: HashMap<SymbolId, Expr>,
}

impl MetricCalculus {
    pub fn g_expr(&self, a: usize, b: usize) -> Expr {
        Expr::sym(self.g[a][b])
    }
    pub fn gi_expr(&self, a: usize, b: usize) -> Expr {
        Expr::sym(self.gi[a][b])
    }
    pub fn sdet_expr(&self) -> Expr {
        Expr::sym(self.sdet)
    }
}

fn inverse_rule(gi: &[Vec<SymbolId>], mu: usize, nu: usize, a: usize, b: usize) -> Expr {
    if a == b {
        Expr::sym(gi[mu][a]).mul_ref(&Expr::sym(gi[nu][a])).neg_ref()
    } else {
        Expr::sym(gi[mu][a])
            .mul_ref(&Expr::sym(gi[nu][b]))
            .add_ref(&Expr::sym(gi[mu][b]).mul_ref(&Expr::sym(gi[nu][a])))
            .neg_ref()
    }
}

fn sdet_rule(sdet: SymbolId, gi: &[Vec<SymbolId>], a: usize, b: usize) -> Expr {
    let base = Expr::sym(sdet).mul_ref(&Expr::sym(gi[a][b]));
    if a == b {
        base.scale(&rat(1, 2))
    } else {
        base
    }
}

/// Registers the derivative calculus of a parametric metric field of the
/// given name on the charts: ∂g^{μν}/∂g_{αβ} and ∂√(−det g)/∂g_{αβ} at
/// chart level, the same rules for the section twins, and the twin chain
/// rules with respect to the base coordinates.
pub fn register_metric_calculus(jc: &JetCharts, name: &str) -> MetricCalculus {
    let n = jc.dim();
    let entries = jc.field_entries(name);
    let mut g = vec![vec![SymbolId(u32::MAX as u32); n]; n];
    let mut tg = g.clone();
    let mut jets = vec![vec![vec![SymbolId(0); n]; n]; n];
    for e in &entries {
        let (a, b) = (e.comp[0].value as usize, e.comp[1].value as usize);
        g[a][b] = e.y;
        g[b][a] = e.y;
        let t = e.section_sym.expect("parametric field twin");
        tg[a][b] = t;
        tg[b][a] = t;
        for s in 0..n {
            jets[a][b][s] = e.xjet[s];
            jets[b][a][s] = e.xjet[s];
        }
    }
    let mk_inv = |nm: &str, mu: usize, nu: usize| {
        symbol::intern(SymbolData {
            kind: SymbolKind::InverseMetric,
            name: nm.into(),
            indices: vec![IndexTag::up(mu as u8), IndexTag::up(nu as u8)],
        })
    };
    let mut gi = vec![vec![SymbolId(0); n]; n];
    let mut tgi = vec![vec![SymbolId(0); n]; n];
    let tname = format!("{name}~");
    for mu in 0..n {
        for nu in 0..n {
            gi[mu][nu] = mk_inv(name, mu, nu);
            tgi[mu][nu] = mk_inv(&tname, mu, nu);
        }
    }
    let sdet = symbol::intern(SymbolData {
        kind: SymbolKind::DerivedScalar,
        name: format!("sdet:{name}"),
        indices: vec![],
    });
    let tsdet = symbol::intern(SymbolData {
        kind: SymbolKind::DerivedScalar,
        name: format!("sdet:{tname}"),
        indices: vec![],
    });

    for a in 0..n {
        for b in a..n {
            for mu in 0..n {
                for nu in mu..n {
                    symbol::register_diff_rule(
                        gi[mu][nu],
                        g[a][b],
                        inverse_rule(&gi, mu, nu, a, b),
                    );
                    symbol::register_diff_rule(
                        tgi[mu][nu],
                        tg[a][b],
                        inverse_rule(&tgi, mu, nu, a, b),
                    );
                }
            }
            symbol::register_diff_rule(sdet, g[a][b], sdet_rule(sdet, &gi, a, b));
            symbol::register_diff_rule(tsdet, tg[a][b], sdet_rule(tsdet, &tgi, a, b));
        }
    }
    // twin chain rules with respect to the base coordinates
    for s in 0..n {
        for mu in 0..n {
            for nu in mu..n {
                let mut acc = Expr::zero();
                for a in 0..n {
                    for b in a..n {
                        acc = acc.add_ref(
                            &inverse_rule(&tgi, mu, nu, a, b).mul_ref(&Expr::sym(jets[a][b][s])),
                        );
                    }
                }
                symbol::register_diff_rule(tgi[mu][nu], jc.x_sym(s), acc);
            }
        }
        let mut acc = Expr::zero();
        for a in 0..n {
            for b in a..n {
                acc = acc.add_ref(&sdet_rule(tsdet, &tgi, a, b).mul_ref(&Expr::sym(jets[a][b][s])));
            }
        }
        symbol::register_diff_rule(tsdet, jc.x_sym(s), acc);
    }

    let mut extras = HashMap::new();
    for mu in 0..n {
        for nu in mu..n {
            extras.insert(gi[mu][nu], Expr::sym(tgi[mu][nu]));
        }
    }
    extras.insert(sdet, Expr::sym(tsdet));

    MetricCalculus {
        name: name.into(),
        dim: n,
        g,
        gi,
        sdet,
        tg,
        tgi,
        tsdet,
        jets,
        extras,
    }
}

/// A gauge scalar function of the base coordinates, carried by its jet
/// parameters with chain rules registered up to third order.
#[derive(Debug, Clone)]
pub struct GaugeScalar {
    pub value: SymbolId,
    pub d1: Vec<SymbolId>,
    pub d2: Vec<Vec<SymbolId>>,
    pub params: Vec<SymbolId>,
}

pub fn register_gauge_scalar(jc: &JetCharts, name: &str) -> GaugeScalar {
    let n = jc.dim();
    let value = symbol::scalar_parameter(name);
    let mut params = vec![value];
    let mut d1 = Vec::new();
    for a in 0..n {
        d1.push(symbol::parameter(name, vec![IndexTag::down(a as u8)]));
    }
    let jet = |idx: Vec<u8>| {
        // fully symmetric jet indices: sort before interning
        let mut idx = idx;
        idx.sort_unstable();
        symbol::intern(SymbolData {
            kind: SymbolKind::Parameter,
            name: name.into(),
            indices: idx.into_iter().map(IndexTag::down).collect(),
        })
    };
    let mut d2 = vec![vec![SymbolId(0); n]; n];
    for a in 0..n {
        symbol::register_diff_rule(value, jc.x_sym(a), Expr::sym(d1[a]));
        params.push(d1[a]);
        for b in 0..n {
            d2[a][b] = jet(vec![a as u8, b as u8]);
            symbol::register_diff_rule(d1[a], jc.x_sym(b), Expr::sym(d2[a][b]));
        }
    }
    for a in 0..n {
        for b in a..n {
            params.push(d2[a][b]);
            for c in 0..n {
                let d3 = jet(vec![a as u8, b as u8, c as u8]);
                symbol::register_diff_rule(d2[a][b], jc.x_sym(c), Expr::sym(d3));
                if c >= b {
                    params.push(d3);
                }
            }
        }
    }
    GaugeScalar {
        value,
        d1,
        d2,
        params,
    }
}

/// An affine family of base diffeomorphism generators
/// ξ^μ = a^μ + b^μ_ν x^ν with free parameters a, b.
#[derive(Debug, Clone)]
pub struct AffineFlow {
    pub a: Vec<SymbolId>,
    pub b: Vec<Vec<SymbolId>>,
    pub base: Vec<Expr>,
    pub params: Vec<SymbolId>,
}

pub fn affine_flow(jc: &JetCharts) -> AffineFlow {
    let n = jc.dim();
    let mut a = Vec::new();
    let mut b = vec![vec![SymbolId(0); n]; n];
    let mut params = Vec::new();
    for mu in 0..n {
        let am = symbol::parameter("xia", vec![IndexTag::up(mu as u8)]);
        a.push(am);
        params.push(am);
        for nu in 0..n {
            b[mu][nu] = symbol::parameter(
                "xib",
                vec![IndexTag::up(mu as u8), IndexTag::down(nu as u8)],
            );
            params.push(b[mu][nu]);
        }
    }
    let mut base = Vec::new();
    for mu in 0..n {
        let mut e = Expr::sym(a[mu]);
        for nu in 0..n {
            e = e.add_ref(&Expr::sym(b[mu][nu]).mul_ref(&Expr::sym(jc.x_sym(nu))));
        }
        base.push(e);
    }
    AffineFlow { a, b, base, params }
}

/// n coupled oscillators: L = ½ Σ_a (q̇^a)² − ½ Σ_a (q^a)², with time
/// translation and rotation generators.
pub fn make_particle_mechanics(n: usize) -> Theory {
    let spec = BundleSpec::new(1, vec![FieldSpec::scalar("q", n, true)]).unwrap();
    let jc = jet_charts(&spec);
    let ents: Vec<_> = jc.field_entries("q").into_iter().cloned().collect();
    let mut l = Expr::zero();
    for e in &ents {
        l = l.add_ref(&Expr::sym(e.v[0]).pow(2).scale(&rat(1, 2)));
        l = l.sub_ref(&Expr::sym(e.y).pow(2).scale(&rat(1, 2)));
    }
    let mut gens = Vec::new();
    let mut time = GeneratorFamily::new("time", vec![Expr::one()]);
    let tp = symbol::scalar_parameter("tshift");
    time.base[0] = Expr::sym(tp);
    time.jet_parameters.push(tp);
    gens.push(time);
    if n >= 2 {
        let mut rot = GeneratorFamily::vertical("rotation", 1);
        let mut params = Vec::new();
        let mut fiber = vec![Expr::zero(); n];
        for a in 0..n {
            for b in a + 1..n {
                let w = symbol::parameter(
                    "wq",
                    vec![IndexTag::down(a as u8), IndexTag::down(b as u8)],
                );
                params.push(w);
                fiber[a] = fiber[a].add_ref(&Expr::sym(w).mul_ref(&Expr::sym(ents[b].y)));
                fiber[b] = fiber[b].sub_ref(&Expr::sym(w).mul_ref(&Expr::sym(ents[a].y)));
            }
        }
        for (a, e) in ents.iter().enumerate() {
            rot.set_fiber(e.y, fiber[a].clone());
        }
        rot.jet_parameters = params;
        gens.push(rot);
    }
    Theory {
        name: "mechanics".into(),
        charts: jc,
        lagrangian: LagrangianDensity::new(l),
        generators: gens,
        parametrized: false,
        metric: MetricKind::None,
        section_extras: HashMap::new(),
    }
}

/// The free relativistic particle in Minkowski space:
/// L = −m √(−η_{AB} q̇^A q̇^B), reparametrization-covariant.
pub fn make_relativistic_particle() -> Theory {
    let spec = BundleSpec::new(1, vec![FieldSpec::scalar("q", 4, true)]).unwrap();
    let jc = jet_charts(&spec);
    let ents: Vec<_> = jc.field_entries("q").into_iter().cloned().collect();
    let eta = minkowski_diag(4);
    let m = symbol::scalar_parameter("m");
    // radicand −η_{AB} v^A v^B = (v⁰)² − Σ_i (v^i)²
    let mut rad = Expr::zero();
    for (a, e) in ents.iter().enumerate() {
        rad = rad.sub_ref(&eta[a].mul_ref(&Expr::sym(e.v[0]).pow(2)));
    }
    let l = Expr::sym(m).mul_ref(&rad.sqrt()).neg_ref();

    let mut gens = Vec::new();
    // worldline reparametrization ξ^τ = f(τ)
    let f = register_gauge_scalar(&jc, "repf");
    let mut repar = GeneratorFamily::new("reparametrization", vec![Expr::sym(f.value)]);
    repar.jet_parameters = f.params.clone();
    gens.push(repar);
    // spacetime translations
    let mut trans = GeneratorFamily::vertical("translation", 1);
    for (a, e) in ents.iter().enumerate() {
        let c = symbol::parameter("cq", vec![IndexTag::up(a as u8)]);
        trans.set_fiber(e.y, Expr::sym(c));
        trans.jet_parameters.push(c);
    }
    gens.push(trans);
    // Lorentz rotations/boosts: ξ^A = Σ_{a<b} w_{ab}(δ^A_b η_{ac}q^c − δ^A_a η_{bc}q^c)
    let mut lor = GeneratorFamily::vertical("lorentz", 1);
    let mut fiber = vec![Expr::zero(); 4];
    for a in 0..4 {
        for b in a + 1..4 {
            let w = symbol::parameter(
                "wl",
                vec![IndexTag::down(a as u8), IndexTag::down(b as u8)],
            );
            lor.jet_parameters.push(w);
            fiber[b] = fiber[b].add_ref(&Expr::sym(w).mul_ref(&eta[a].mul_ref(&Expr::sym(ents[a].y))));
            fiber[a] = fiber[a].sub_ref(&Expr::sym(w).mul_ref(&eta[b].mul_ref(&Expr::sym(ents[b].y))));
        }
    }
    for (a, e) in ents.iter().enumerate() {
        lor.set_fiber(e.y, fiber[a].clone());
    }
    gens.push(lor);

    Theory {
        name: "relativistic-particle".into(),
        charts: jc,
        lagrangian: LagrangianDensity::new(l),
        generators: gens,
        parametrized: false,
        metric: MetricKind::FixedMinkowski,
        section_extras: HashMap::new(),
    }
}

fn field_strength(jc: &JetCharts, field: &str, mu: usize, nu: usize) -> Expr {
    // F_{μν} = ∂_μ A_ν − ∂_ν A_μ
    let a_nu = jc.entry(field, &[IndexTag::down(nu as u8)]);
    let a_mu = jc.entry(field, &[IndexTag::down(mu as u8)]);
    Expr::sym(a_nu.v[mu]).sub_ref(&Expr::sym(a_mu.v[nu]))
}

/// Vacuum electromagnetism in four dimensions. With `parametric_metric`
/// the spacetime metric enters as a parametric background field g_{μν};
/// otherwise the metric is fixed Minkowski.
pub fn make_maxwell(parametric_metric: bool) -> Theory {
    let n = 4usize;
    let mut fields = vec![FieldSpec::covector("A", true)];
    if parametric_metric {
        fields.push(FieldSpec::sym2("g", false));
    }
    let spec = BundleSpec::new(n, fields).unwrap();
    let jc = jet_charts(&spec);

    let (l, extras, mc) = if parametric_metric {
        let mc = register_metric_calculus(&jc, "g");
        let mut l = Expr::zero();
        for mu in 0..n {
            for nu in 0..n {
                for al in 0..n {
                    for be in 0..n {
                        let c = mc
                            .gi_expr(mu, al)
                            .mul_ref(&mc.gi_expr(nu, be))
                            .mul_ref(&field_strength(&jc, "A", mu, nu))
                            .mul_ref(&field_strength(&jc, "A", al, be));
                        l = l.sub_ref(&c.scale(&rat(1, 4)));
                    }
                }
            }
        }
        let l = l.mul_ref(&mc.sdet_expr());
        (l, mc.extras.clone(), Some(mc))
    } else {
        let eta = minkowski_diag(n);
        let mut l = Expr::zero();
        for mu in 0..n {
            for nu in 0..n {
                let c = eta[mu]
                    .mul_ref(&eta[nu])
                    .mul_ref(&field_strength(&jc, "A", mu, nu).pow(2));
                l = l.sub_ref(&c.scale(&rat(1, 4)));
            }
        }
        (l, HashMap::new(), None)
    };

    let a_ents: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
    let mut gens = Vec::new();
    // gauge transformations A_ν → A_ν + χ_{,ν}
    let chi = register_gauge_scalar(&jc, "chi");
    let mut gauge = GeneratorFamily::vertical("gauge", n);
    for (nu, e) in a_ents.iter().enumerate() {
        gauge.set_fiber(e.y, Expr::sym(chi.d1[nu]));
    }
    gauge.jet_parameters = chi.params.clone();
    gens.push(gauge);
    // affine spacetime diffeomorphisms
    let flow = affine_flow(&jc);
    let mut diffeo = GeneratorFamily::new("diffeo", flow.base.clone());
    for (nu, e) in a_ents.iter().enumerate() {
        // (ξA)_ν = −A_μ ξ^μ_{,ν}
        let mut c = Expr::zero();
        for mu in 0..n {
            c = c.sub_ref(&Expr::sym(a_ents[mu].y).mul_ref(&Expr::sym(flow.b[mu][nu])));
        }
        diffeo.set_fiber(e.y, c);
    }
    if let Some(mc) = &mc {
        for e in jc.field_entries("g") {
            let (s, r) = (e.comp[0].value as usize, e.comp[1].value as usize);
            // (ξg)_{σρ} = −(g_{σμ} ξ^μ_{,ρ} + g_{ρμ} ξ^μ_{,σ})
            let mut c = Expr::zero();
            for mu in 0..n {
                c = c.sub_ref(&mc.g_expr(s, mu).mul_ref(&Expr::sym(flow.b[mu][r])));
                c = c.sub_ref(&mc.g_expr(r, mu).mul_ref(&Expr::sym(flow.b[mu][s])));
            }
            diffeo.set_fiber(e.y, c);
        }
    }
    diffeo.jet_parameters = flow.params.clone();
    gens.push(diffeo);

    Theory {
        name: if parametric_metric {
            "maxwell-curved".into()
        } else {
            "maxwell".into()
        },
        charts: jc,
        lagrangian: LagrangianDensity::new(l),
        generators: gens,
        parametrized: parametric_metric,
        metric: if parametric_metric {
            MetricKind::Parametric("g".into())
        } else {
            MetricKind::FixedMinkowski
        },
        section_extras: extras,
    }
}

/// Abelian Chern-Simons theory in three dimensions:
/// L = ε^{μνσ} A_μ ∂_ν A_σ (metric independent).
pub fn make_chern_simons() -> Theory {
    let n = 3usize;
    let spec = BundleSpec::new(n, vec![FieldSpec::covector("A", true)]).unwrap();
    let jc = jet_charts(&spec);
    let a_ents: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
    let mut l = Expr::zero();
    for mu in 0..n {
        for nu in 0..n {
            for s in 0..n {
                let sign = epsilon_sign(&[mu, nu, s]);
                if sign == 0 {
                    continue;
                }
                // ε^{μνσ} A_μ v_{σν} with v_{σν} = ∂_ν A_σ
                let term = Expr::sym(a_ents[mu].y).mul_ref(&Expr::sym(a_ents[s].v[nu]));
                l = if sign > 0 {
                    l.add_ref(&term)
                } else {
                    l.sub_ref(&term)
                };
            }
        }
    }
    let mut gens = Vec::new();
    let chi = register_gauge_scalar(&jc, "cschi");
    let mut gauge = GeneratorFamily::vertical("gauge", n);
    for (nu, e) in a_ents.iter().enumerate() {
        gauge.set_fiber(e.y, Expr::sym(chi.d1[nu]));
    }
    gauge.jet_parameters = chi.params.clone();
    gens.push(gauge);
    let flow = affine_flow(&jc);
    let mut diffeo = GeneratorFamily::new("diffeo", flow.base.clone());
    for (nu, e) in a_ents.iter().enumerate() {
        let mut c = Expr::zero();
        for mu in 0..n {
            c = c.sub_ref(&Expr::sym(a_ents[mu].y).mul_ref(&Expr::sym(flow.b[mu][nu])));
        }
        diffeo.set_fiber(e.y, c);
    }
    diffeo.jet_parameters = flow.params.clone();
    gens.push(diffeo);

    Theory {
        name: "chern-simons".into(),
        charts: jc,
        lagrangian: LagrangianDensity::new(l),
        generators: gens,
        parametrized: false,
        metric: MetricKind::None,
        section_extras: HashMap::new(),
    }
}

/// Registers a target-space metric family `name`_{AB} over the components
/// of the scalar field family `field`, with free first-order Taylor
/// coefficients d`name`_{ABC} as the registered derivatives, plus the
/// section-level twins chained through the base coordinates. Returns the
/// substitution mapping the chart-level symbols to their twins.
pub fn register_target_metric(
    jc: &JetCharts,
    name: &str,
    field: &str,
) -> HashMap<SymbolId, Expr> {
    let p_ents: Vec<_> = jc.field_entries(field).into_iter().cloned().collect();
    let d = p_ents.len();
    let n = jc.dim();
    let twin_field = format!("{field}~");
    let g_sym = |a: usize, b: usize| {
        symbol::intern(SymbolData {
            kind: SymbolKind::Metric,
            name: name.into(),
            indices: vec![IndexTag::down(a as u8), IndexTag::down(b as u8)],
        })
    };
    let tg_sym = |a: usize, b: usize| {
        symbol::intern(SymbolData {
            kind: SymbolKind::Metric,
            name: format!("{name}~"),
            indices: vec![IndexTag::down(a as u8), IndexTag::down(b as u8)],
        })
    };
    let taylor = |a: usize, b: usize, c: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        symbol::parameter(
            &format!("d{name}"),
            vec![
                IndexTag::down(a as u8),
                IndexTag::down(b as u8),
                IndexTag::down(c as u8),
            ],
        )
    };
    let mut extras = HashMap::new();
    for a in 0..d {
        for b in a..d {
            extras.insert(g_sym(a, b), Expr::sym(tg_sym(a, b)));
            for (c, pe) in p_ents.iter().enumerate() {
                symbol::register_diff_rule(g_sym(a, b), pe.y, Expr::sym(taylor(a, b, c)));
                // section-level twin: same Taylor data against the field twin
                symbol::register_diff_rule(
                    tg_sym(a, b),
                    symbol::parameter(&twin_field, pe.comp.clone()),
                    Expr::sym(taylor(a, b, c)),
                );
            }
            for mu in 0..n {
                let mut acc = Expr::zero();
                for (c, pe) in p_ents.iter().enumerate() {
                    let mut idx = pe.comp.clone();
                    idx.push(IndexTag::down(mu as u8));
                    let jet = symbol::parameter(&twin_field, idx);
                    acc = acc.add_ref(&Expr::sym(taylor(a, b, c)).mul_ref(&Expr::sym(jet)));
                }
                symbol::register_diff_rule(tg_sym(a, b), jc.x_sym(mu), acc);
            }
        }
    }
    extras
}

/// The bosonic string: worldsheet fields φ^A into a d-dimensional target
/// with metric G_{AB}(φ), and a variational worldsheet metric h_{μν}
/// (whose momenta vanish and whose field equation is the conformal one):
/// L = −½ √|h| h^{μν} G_{AB} ∂_μφ^A ∂_νφ^B.
pub fn make_polyakov_string(d: usize) -> Theory {
    let n = 2usize;
    let spec = BundleSpec::new(
        n,
        vec![FieldSpec::scalar("phi", d, true), FieldSpec::sym2("h", true)],
    )
    .unwrap();
    let jc = jet_charts(&spec);
    let p_ents: Vec<_> = jc.field_entries("phi").into_iter().cloned().collect();
    let h_ents: Vec<_> = jc.field_entries("h").into_iter().cloned().collect();
    let mut h = vec![vec![Expr::zero(); n]; n];
    for e in &h_ents {
        let (a, b) = (e.comp[0].value as usize, e.comp[1].value as usize);
        h[a][b] = Expr::sym(e.y);
        h[b][a] = Expr::sym(e.y);
    }
    // Lorentzian worldsheet: det h < 0, S = √(−det h) = √|h|
    let det = h[0][0].mul_ref(&h[1][1]).sub_ref(&h[0][1].pow(2));
    let s = det.neg_ref().sqrt();
    // h^{μν} = adj^{μν} / det = −adj^{μν} S^{-2}
    let adj = [
        [h[1][1].clone(), h[0][1].neg_ref()],
        [h[0][1].neg_ref(), h[0][0].clone()],
    ];
    // target metric G_{AB}(φ) with first-order Taylor rules
    let extras = register_target_metric(&jc, "G", "phi");
    let g_sym = |a: usize, b: usize| {
        symbol::intern(SymbolData {
            kind: SymbolKind::Metric,
            name: "G".into(),
            indices: vec![IndexTag::down(a as u8), IndexTag::down(b as u8)],
        })
    };
    // L = ½ adj^{μν} S^{-1} G_{AB} v^A_μ v^B_ν  (= −½ √|h| h^{μν} G_{AB} v^A_μ v^B_ν)
    let s_inv = s.pow(-1);
    let mut l = Expr::zero();
    for mu in 0..n {
        for nu in 0..n {
            for a in 0..d {
                for b in 0..d {
                    let c = adj[mu][nu]
                        .mul_ref(&Expr::sym(g_sym(a, b)))
                        .mul_ref(&Expr::sym(p_ents[a].v[mu]))
                        .mul_ref(&Expr::sym(p_ents[b].v[nu]));
                    l = l.add_ref(&c.scale(&rat(1, 2)));
                }
            }
        }
    }
    let l = l.mul_ref(&s_inv);

    let mut gens = Vec::new();
    // worldsheet diffeomorphisms
    let flow = affine_flow(&jc);
    let mut diffeo = GeneratorFamily::new("diffeo", flow.base.clone());
    for e in &h_ents {
        let (sg, r) = (e.comp[0].value as usize, e.comp[1].value as usize);
        let mut c = Expr::zero();
        for mu in 0..n {
            c = c.sub_ref(&h[sg][mu].mul_ref(&Expr::sym(flow.b[mu][r])));
            c = c.sub_ref(&h[r][mu].mul_ref(&Expr::sym(flow.b[mu][sg])));
        }
        diffeo.set_fiber(e.y, c);
    }
    diffeo.jet_parameters = flow.params.clone();
    gens.push(diffeo);
    // Weyl rescaling (λh)_{σρ} = 2λ h_{σρ}
    let lam = symbol::scalar_parameter("weyl");
    let mut weyl = GeneratorFamily::vertical("weyl", n);
    for e in &h_ents {
        weyl.set_fiber(e.y, Expr::int(2).mul_ref(&Expr::sym(lam)).mul_ref(&Expr::sym(e.y)));
    }
    weyl.jet_parameters.push(lam);
    gens.push(weyl);
    // target translations
    let mut trans = GeneratorFamily::vertical("translation", n);
    for (a, e) in p_ents.iter().enumerate() {
        let c = symbol::parameter("cphi", vec![IndexTag::up(a as u8)]);
        trans.set_fiber(e.y, Expr::sym(c));
        trans.jet_parameters.push(c);
    }
    gens.push(trans);

    Theory {
        name: "string".into(),
        charts: jc,
        lagrangian: LagrangianDensity::new(l),
        generators: gens,
        parametrized: true,
        metric: MetricKind::Variational("h".into()),
        section_extras: extras,
    }
}

/// All shipped theories.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            key: "mechanics".into(),
            description: "coupled oscillators on a one-dimensional base".into(),
            theory: make_particle_mechanics(3),
        },
        CatalogEntry {
            key: "relativistic-particle".into(),
            description: "free relativistic particle, reparametrization-covariant".into(),
            theory: make_relativistic_particle(),
        },
        CatalogEntry {
            key: "maxwell".into(),
            description: "vacuum electromagnetism on fixed Minkowski space".into(),
            theory: make_maxwell(false),
        },
        CatalogEntry {
            key: "maxwell-curved".into(),
            description: "vacuum electromagnetism on a parametric metric background".into(),
            theory: make_maxwell(true),
        },
        CatalogEntry {
            key: "chern-simons".into(),
            description: "abelian Chern-Simons theory in three dimensions".into(),
            theory: make_chern_simons(),
        },
        CatalogEntry {
            key: "string".into(),
            description: "bosonic string with parametric worldsheet metric".into(),
            theory: make_polyakov_string(3),
        },
    ]
}
