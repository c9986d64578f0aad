//! Derivation reports: a human-readable text rendering and a structured
//! document with stable keys whose expressions round-trip to identical
//! canonical form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num::BigRational;
use serde::{Deserialize, Serialize};

use multiphase_core::expr::Atom;
use multiphase_core::symbol;
use multiphase_core::variational::{
    cartan_form, euler_lagrange, legendre,
};
use multiphase_core::symmetry::{
    divergence_identity, lagrangian_momentum_map, noether_current, vertical_transitivity,
};
use multiphase_core::{DiffForm, Expr, SymbolData, Theory};

pub const SCHEMA_VERSION: u32 = 1;

// ----- structured expressions -----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum JsonAtom {
    Sym(SymbolData),
    Sqrt(JsonExpr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonFactor {
    pub atom: JsonAtom,
    pub exp: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonTerm {
    /// Exact rational coefficient, rendered `numer/denom`.
    pub coeff: String,
    pub factors: Vec<JsonFactor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonExpr {
    pub terms: Vec<JsonTerm>,
}

pub fn expr_to_json(e: &Expr) -> JsonExpr {
    JsonExpr {
        terms: e
            .terms
            .iter()
            .map(|t| JsonTerm {
                coeff: t.coeff.to_string(),
                factors: t
                    .mon
                    .factors
                    .iter()
                    .map(|f| JsonFactor {
                        atom: match &f.atom {
                            Atom::Sym(s) => JsonAtom::Sym(symbol::symbol_data(*s)),
                            Atom::Sqrt(r) => JsonAtom::Sqrt(expr_to_json(r)),
                        },
                        exp: f.exp,
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn json_to_expr(j: &JsonExpr) -> Result<Expr, String> {
    let mut out = Expr::zero();
    for t in &j.terms {
        let coeff =
            BigRational::from_str(&t.coeff).map_err(|e| format!("bad coefficient: {e}"))?;
        let mut term = Expr::rational(coeff);
        for f in &t.factors {
            let base = match &f.atom {
                JsonAtom::Sym(d) => Expr::sym(symbol::intern(d.clone())),
                JsonAtom::Sqrt(r) => json_to_expr(r)?.sqrt(),
            };
            term = term.mul_ref(&base.pow(f.exp));
        }
        out = out.add_ref(&term);
    }
    Ok(out)
}

// ----- structured differential forms -----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonFormTerm {
    /// Coordinate symbols of the wedge monomial, in chart order.
    pub basis: Vec<SymbolData>,
    pub coeff: JsonExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonForm {
    pub chart: String,
    pub degree: usize,
    pub terms: Vec<JsonFormTerm>,
}

pub fn form_to_json(f: &DiffForm) -> JsonForm {
    JsonForm {
        chart: f.chart.label.clone(),
        degree: f.degree,
        terms: f
            .terms
            .iter()
            .map(|(key, coeff)| JsonFormTerm {
                basis: key
                    .iter()
                    .map(|&i| symbol::symbol_data(f.chart.coords[i as usize]))
                    .collect(),
                coeff: expr_to_json(coeff),
            })
            .collect(),
    }
}

/// Reconstructs the coefficient expressions of a serialized form, keyed by
/// the interned basis symbols.
pub fn json_form_coeffs(
    f: &JsonForm,
) -> Result<Vec<(Vec<multiphase_core::SymbolId>, Expr)>, String> {
    f.terms
        .iter()
        .map(|t| {
            Ok((
                t.basis.iter().map(|d| symbol::intern(d.clone())).collect(),
                json_to_expr(&t.coeff)?,
            ))
        })
        .collect()
}

// ----- report document -----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityJson {
    pub transitive: bool,
    pub rank: usize,
    pub fiber_dim: usize,
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResultJson {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub theory: String,
    pub multimomenta: BTreeMap<String, JsonExpr>,
    pub covariant_hamiltonian: JsonExpr,
    pub cartan_form: JsonForm,
    pub euler_lagrange: Vec<JsonExpr>,
    pub momentum_map: BTreeMap<String, JsonForm>,
    pub noether_current: BTreeMap<String, JsonForm>,
    pub divergence_residual: BTreeMap<String, JsonExpr>,
    pub vertical_transitivity: Option<TransitivityJson>,
    pub check_results: Vec<CheckResultJson>,
}

/// Runs the full derivation pipeline on an elaborated theory.
pub fn derive_report(theory: &Theory, seed: u64) -> Report {
    let jc = &theory.charts;
    let leg = legendre(jc, &theory.lagrangian);
    let mut multimomenta = BTreeMap::new();
    for (p, e) in &leg.momenta {
        multimomenta.insert(format!("{p}"), expr_to_json(e));
    }
    let els = euler_lagrange(jc, &theory.lagrangian);

    let mut momentum_map = BTreeMap::new();
    let mut current = BTreeMap::new();
    let mut residual = BTreeMap::new();
    let phi = generic_section_with_extras(theory);
    for g in &theory.generators {
        momentum_map.insert(
            g.name.clone(),
            form_to_json(&lagrangian_momentum_map(jc, &theory.lagrangian, g)),
        );
        current.insert(
            g.name.clone(),
            form_to_json(&noether_current(jc, &theory.lagrangian, g, &phi)),
        );
        let di = divergence_identity(jc, &theory.lagrangian, g, &theory.section_extras);
        residual.insert(g.name.clone(), expr_to_json(&di.residual));
    }

    let transitivity = vertical_transitivity(jc, &theory.generators, 5, seed)
        .ok()
        .map(|r| TransitivityJson {
            transitive: r.transitive,
            rank: r.rank,
            fiber_dim: r.fiber_dim,
            witness: r.witness,
        });

    Report {
        schema_version: SCHEMA_VERSION,
        theory: theory.name.clone(),
        multimomenta,
        covariant_hamiltonian: expr_to_json(&leg.hamiltonian),
        cartan_form: form_to_json(&cartan_form(jc, &theory.lagrangian)),
        euler_lagrange: els.iter().map(expr_to_json).collect(),
        momentum_map,
        noether_current: current,
        divergence_residual: residual,
        vertical_transitivity: transitivity,
        check_results: Vec::new(),
    }
}

pub fn generic_section_with_extras(theory: &Theory) -> multiphase_core::SymbolicSection {
    let mut phi = theory.charts.generic_section();
    for (&k, v) in &theory.section_extras {
        phi.comps.insert(k, v.clone());
    }
    phi
}

// ----- display text -----

/// Human-readable rendering of a derivation report's source data.
pub fn render_text(theory: &Theory) -> String {
    let jc = &theory.charts;
    let mut s = String::new();
    let _ = writeln!(s, "theory: {}", theory.name);
    let _ = writeln!(s, "lagrangian: {}", theory.lagrangian.l);
    let leg = legendre(jc, &theory.lagrangian);
    let _ = writeln!(s, "\nmultimomenta:");
    let mut keys: Vec<_> = leg.momenta.iter().collect();
    keys.sort_by_key(|(p, _)| format!("{p}"));
    for (p, e) in keys {
        let _ = writeln!(s, "  {p} = {e}");
    }
    let _ = writeln!(s, "\ncovariant hamiltonian:\n  p = {}", leg.hamiltonian);
    let _ = writeln!(s, "\ncartan form:\n{}", cartan_form(jc, &theory.lagrangian));
    let _ = writeln!(s, "\neuler–lagrange expressions:");
    for (entry, el) in jc.variational_entries().zip(euler_lagrange(jc, &theory.lagrangian)) {
        let _ = writeln!(s, "  δ/δ{}: {}", Expr::sym(entry.y), el);
    }
    for g in &theory.generators {
        let _ = writeln!(s, "\ngenerator {}:", g.name);
        let _ = writeln!(
            s,
            "  momentum map:\n{}",
            lagrangian_momentum_map(jc, &theory.lagrangian, g)
        );
        let di = divergence_identity(jc, &theory.lagrangian, g, &theory.section_extras);
        let _ = writeln!(
            s,
            "  divergence identity residual: {}",
            if di.residual.is_zero() { "0" } else { "nonzero" }
        );
    }
    s
}
