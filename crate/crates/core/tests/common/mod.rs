//! Shared helpers for the integration suites: seeded random polynomials
//! and sections over a jet-chart catalog entry.
#![allow(dead_code)] // not every suite uses every helper

use multiphase_core::expr::{rat, Expr};
use multiphase_core::jets::JetCharts;
use multiphase_core::symbol::SymbolId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random polynomial of total degree ≤ 2 in the given symbols with small
/// rational coefficients.
pub fn rand_poly(r: &mut ChaCha8Rng, syms: &[SymbolId]) -> Expr {
    let mut out = Expr::int(r.gen_range(-3i64..=3));
    for (i, &s) in syms.iter().enumerate() {
        let c = r.gen_range(-3i64..=3);
        if c != 0 {
            out = out.add_ref(&Expr::sym(s).scale(&rat(c, 2)));
        }
        for &t in &syms[i..] {
            let c = r.gen_range(-2i64..=2);
            if c != 0 {
                out = out.add_ref(&Expr::sym(s).mul_ref(&Expr::sym(t)).scale(&rat(c, 3)));
            }
        }
    }
    out
}

/// Random polynomial components for every non-base coordinate of a chart
/// over the base coordinates: a symbolic section of chart → X.
pub fn rand_section_comps(jc: &JetCharts, chart_coords: &[SymbolId], r: &mut ChaCha8Rng) -> Vec<Expr> {
    let xs: Vec<SymbolId> = (0..jc.dim()).map(|mu| jc.x_sym(mu)).collect();
    chart_coords
        .iter()
        .map(|&c| {
            if xs.contains(&c) {
                Expr::sym(c)
            } else {
                rand_poly(r, &xs)
            }
        })
        .collect()
}
