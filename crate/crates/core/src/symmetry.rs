//! Symmetry generators, covariant momentum maps, Noether currents and the
//! identities relating them: the divergence identity along sections, the
//! bracket/equivariance structure on the multiphase space, and vertical
//! transitivity of a generator family.

use std::collections::HashMap;

use crate::error::{JetError, SampleError, SymmetryError};
use crate::expr::Expr;
use crate::geometry::{exterior_d, interior, lie_derivative, pullback, DiffForm, VectorField};
use crate::jets::{FiberEntry, JetCharts, SymbolicSection};
use crate::numcheck;
use crate::symbol::SymbolId;
use crate::variational::{
    cartan_form, euler_lagrange, legendre, omega_l, volume_coefficient, LagrangianDensity,
    MetricKind, Theory,
};

/// Applies a substitution to every coefficient of a form.
fn substitute_form(f: &DiffForm, sub: &HashMap<SymbolId, Expr>) -> DiffForm {
    let mut out = DiffForm::zero(&f.chart, f.degree);
    for (t, c) in &f.terms {
        out.insert(t.clone(), c.substitute(sub));
    }
    out
}

/// A family of infinitesimal symmetry generators on Y, parametrized by free
/// jet parameters (constants of a Lie algebra, values and derivatives of
/// gauge functions, and so on).
///
/// The base components ξ^μ are expressions in the base coordinates (and jet
/// parameters); the fiber components ξ^A are keyed by fiber coordinate and
/// may depend on base and fiber coordinates. A missing fiber entry means a
/// vanishing component.
#[derive(Debug, Clone)]
pub struct GeneratorFamily {
    pub name: String,
    pub base: Vec<Expr>,
    pub fiber: HashMap<SymbolId, Expr>,
    pub jet_parameters: Vec<SymbolId>,
}

impl GeneratorFamily {
    pub fn new(name: &str, base: Vec<Expr>) -> Self {
        GeneratorFamily {
            name: name.into(),
            base,
            fiber: HashMap::new(),
            jet_parameters: Vec::new(),
        }
    }

    pub fn vertical(name: &str, dim: usize) -> Self {
        GeneratorFamily::new(name, vec![Expr::zero(); dim])
    }

    pub fn set_fiber(&mut self, y: SymbolId, e: Expr) {
        self.fiber.insert(y, e);
    }

    pub fn fiber_component(&self, y: SymbolId) -> Expr {
        self.fiber.get(&y).cloned().unwrap_or_else(Expr::zero)
    }

    /// The generator as a vector field on Y.
    pub fn on_y(&self, jc: &JetCharts) -> VectorField {
        let mut v = VectorField::zero(&jc.y);
        for mu in 0..jc.dim() {
            v.comps[mu] = self.base[mu].clone();
        }
        for entry in &jc.entries {
            v.set(entry.y, self.fiber_component(entry.y));
        }
        v
    }
}

/// The variation δ_ξL of a Lagrangian density under a generator: the jet
/// prolongation of ξ applied to L plus L times the base divergence of ξ.
/// All derivatives are partials on J¹Y; registered jet-parameter chains
/// (gauge functions, parametric-field section jets) contribute through the
/// explicit x-derivative.
pub fn variation_of_l(jc: &JetCharts, lag: &LagrangianDensity, gen: &GeneratorFamily) -> Expr {
    let mut out = Expr::zero();
    for mu in 0..jc.dim() {
        out = out.add_ref(&lag.l.diff(jc.x_sym(mu)).mul_ref(&gen.base[mu]));
        out = out.add_ref(&lag.l.mul_ref(&gen.base[mu].diff(jc.x_sym(mu))));
    }
    for entry in &jc.entries {
        let xi_a = gen.fiber_component(entry.y);
        if !xi_a.is_zero() {
            out = out.add_ref(&lag.l.diff(entry.y).mul_ref(&xi_a));
        }
    }
    for entry in jc.variational_entries() {
        let xi_a = gen.fiber_component(entry.y);
        for mu in 0..jc.dim() {
            let dl_dv = lag.l.diff(entry.v[mu]);
            if dl_dv.is_zero() {
                continue;
            }
            // prolonged velocity component:
            //   ∂_μ ξ^A + v^B_μ ∂_B ξ^A − v^A_ν ∂_μ ξ^ν
            let mut c = xi_a.diff(jc.x_sym(mu));
            for other in jc.variational_entries() {
                let d = xi_a.diff(other.y);
                if !d.is_zero() {
                    c = c.add_ref(&d.mul_ref(&Expr::sym(other.v[mu])));
                }
            }
            for other in jc.parametric_entries() {
                let d = xi_a.diff(other.y);
                if !d.is_zero() {
                    c = c.add_ref(&d.mul_ref(&Expr::sym(other.xjet[mu])));
                }
            }
            for nu in 0..jc.dim() {
                c = c.sub_ref(
                    &Expr::sym(entry.v[nu]).mul_ref(&gen.base[nu].diff(jc.x_sym(mu))),
                );
            }
            out = out.add_ref(&dl_dv.mul_ref(&c));
        }
    }
    out
}

/// Covariant momentum map J(ξ) on Z by the coordinate formula:
/// (p_A^μ ξ^A + p ξ^μ) dⁿx_μ − p_A^μ ξ^ν dy^A ∧ dⁿ⁻¹x_{μν}.
pub fn momentum_map(jc: &JetCharts, gen: &GeneratorFamily) -> DiffForm {
    let n1 = jc.dim();
    let mut out = DiffForm::zero(&jc.z, n1 - 1);
    for mu in 0..n1 {
        let mut coeff = Expr::sym(jc.p).mul_ref(&gen.base[mu]);
        for entry in jc.variational_entries() {
            coeff = coeff.add_ref(
                &Expr::sym(entry.p[mu]).mul_ref(&gen.fiber_component(entry.y)),
            );
        }
        out = out.add(&jc.dnx(&jc.z, mu).scale(&coeff)).expect("map add");
    }
    if n1 >= 2 {
        for entry in jc.variational_entries() {
            let dy = DiffForm::d_coord(&jc.z, entry.y);
            for mu in 0..n1 {
                for nu in 0..n1 {
                    if nu == mu {
                        continue;
                    }
                    let coeff = Expr::sym(entry.p[mu]).mul_ref(&gen.base[nu]).neg_ref();
                    let term = crate::geometry::wedge(&dy, &jc.dn1x(&jc.z, mu, nu))
                        .expect("map wedge")
                        .scale(&coeff);
                    out = out.add(&term).expect("map add");
                }
            }
        }
    }
    out
}

/// J(ξ) computed as the interior product ξ_Z ⨼ Θ for an arbitrary vector
/// field on Z.
pub fn momentum_map_contraction(jc: &JetCharts, xi_z: &VectorField) -> DiffForm {
    interior(xi_z, &jc.canonical_theta()).expect("theta contraction")
}

/// Lagrangian momentum map J^L(ξ) on J¹Y as the Legendre pullback of the
/// coordinate formula on Z.
pub fn lagrangian_momentum_map(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    gen: &GeneratorFamily,
) -> DiffForm {
    let leg = legendre(jc, lag);
    pullback(&leg.map, &momentum_map(jc, gen)).expect("legendre pullback")
}

/// J^L(ξ) computed as j¹ξ ⨼ Θ_L.
pub fn lagrangian_momentum_map_contraction(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    gen: &GeneratorFamily,
) -> Result<DiffForm, JetError> {
    let j1xi = jc.prolong_vector(&gen.on_y(jc))?;
    Ok(interior(&j1xi, &cartan_form(jc, lag)).expect("cartan contraction"))
}

/// The Lie derivative of a section component along the generator:
/// (£_ξ φ)^A = φ^A_{,ν} ξ^ν − ξ^A ∘ φ.
pub fn lie_derivative_of_section(
    jc: &JetCharts,
    gen: &GeneratorFamily,
    phi: &SymbolicSection,
    entry: &FiberEntry,
) -> Expr {
    let comp = phi
        .comps
        .get(&entry.y)
        .cloned()
        .unwrap_or_else(|| Expr::sym(entry.y));
    let mut out = Expr::zero();
    for nu in 0..jc.dim() {
        out = out.add_ref(&comp.diff(jc.x_sym(nu)).mul_ref(&gen.base[nu]));
    }
    out.sub_ref(&gen.fiber_component(entry.y).substitute(&phi.comps))
}

/// Noether current of a section by the direct coordinate formula:
/// [(∂L/∂v^A_μ)(ξ^A∘φ − φ^A_{,ν}ξ^ν) + L ξ^μ] ∘ j¹φ · dⁿx_μ on X.
pub fn noether_current(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    gen: &GeneratorFamily,
    phi: &SymbolicSection,
) -> DiffForm {
    let sub = jc.prolong_section(phi).substitution();
    let mut out = DiffForm::zero(&jc.x, jc.dim() - 1);
    for mu in 0..jc.dim() {
        let mut coeff = lag.l.substitute(&sub).mul_ref(&gen.base[mu]);
        for entry in jc.variational_entries() {
            let pm = lag.l.diff(entry.v[mu]).substitute(&sub);
            if pm.is_zero() {
                continue;
            }
            let comp = phi
                .comps
                .get(&entry.y)
                .cloned()
                .unwrap_or_else(|| Expr::sym(entry.y));
            let mut bracket = gen.fiber_component(entry.y).substitute(&phi.comps);
            for nu in 0..jc.dim() {
                bracket = bracket.sub_ref(&comp.diff(jc.x_sym(nu)).mul_ref(&gen.base[nu]));
            }
            coeff = coeff.add_ref(&pm.mul_ref(&bracket));
        }
        // a second pass through the section map resolves derived symbols
        // (inverse metrics, determinant scalars) to their section-level twins
        coeff = coeff.substitute(&phi.comps);
        out = out.add(&jc.dnx(&jc.x, mu).scale(&coeff)).expect("current add");
    }
    out
}

/// Noether current computed as (j¹φ)* J^L(ξ).
pub fn noether_current_pullback(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    gen: &GeneratorFamily,
    phi: &SymbolicSection,
) -> DiffForm {
    let jl = lagrangian_momentum_map(jc, lag, gen);
    let pulled = pullback(&jc.prolong_section(phi), &jl).expect("section pullback");
    substitute_form(&pulled, &phi.comps)
}

/// Both sides of the divergence identity along the generic section:
/// d[(j¹φ)*J^L(ξ)] = {Σ_A δL/δφ^A (£_ξφ)^A + Σ_u (∂L/∂u)(£_ξu) + δ_ξL}∘j²φ
/// as volume coefficients on X.
#[derive(Debug, Clone)]
pub struct DivergenceIdentity {
    pub lhs: Expr,
    pub rhs: Expr,
    pub residual: Expr,
}

pub fn divergence_identity(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    gen: &GeneratorFamily,
    extras: &HashMap<SymbolId, Expr>,
) -> DivergenceIdentity {
    let mut phi = jc.generic_section();
    for (&k, v) in extras {
        phi.comps.insert(k, v.clone());
    }
    let current = noether_current_pullback(jc, lag, gen, &phi);
    let lhs = volume_coefficient(jc, &exterior_d(&current));

    let sub = jc.prolong_section_2(&phi).substitution();
    let els = euler_lagrange(jc, lag);
    let mut rhs = Expr::zero();
    for (entry, el) in jc.variational_entries().zip(&els) {
        let lie = lie_derivative_of_section(jc, gen, &phi, entry);
        rhs = rhs.add_ref(&el.substitute(&sub).substitute(&phi.comps).mul_ref(&lie));
    }
    for entry in jc.parametric_entries() {
        let dl_du = lag.l.diff(entry.y).substitute(&sub).substitute(&phi.comps);
        if dl_du.is_zero() {
            continue;
        }
        let lie = lie_derivative_of_section(jc, gen, &phi, entry);
        rhs = rhs.add_ref(&dl_du.mul_ref(&lie));
    }
    rhs = rhs.add_ref(
        &variation_of_l(jc, lag, gen)
            .substitute(&sub)
            .substitute(&phi.comps),
    );
    let residual = lhs.sub_ref(&rhs);
    DivergenceIdentity { lhs, rhs, residual }
}

/// The multiphase bracket {J(ξ), J(ζ)} = ζ_Z ⨼ (ξ_Z ⨼ Ω).
pub fn momentum_bracket(jc: &JetCharts, xi_z: &VectorField, zeta_z: &VectorField) -> DiffForm {
    let inner = interior(xi_z, &jc.canonical_omega()).expect("omega contraction");
    interior(zeta_z, &inner).expect("omega contraction")
}

/// Residual of the bracket identity for canonically lifted generators:
/// {J(ξ), J(ζ)} − d(ξ_Z ⨼ ζ_Z ⨼ Θ) − [ζ, ξ]_Z ⨼ Θ. Vanishes identically.
pub fn bracket_identity_residual(
    jc: &JetCharts,
    xi_y: &VectorField,
    zeta_y: &VectorField,
) -> Result<DiffForm, JetError> {
    let xi_z = jc.lift_vector_to_z(xi_y)?;
    let zeta_z = jc.lift_vector_to_z(zeta_y)?;
    let theta = jc.canonical_theta();
    let lhs = momentum_bracket(jc, &xi_z, &zeta_z);
    let exact = exterior_d(
        &interior(&xi_z, &interior(&zeta_z, &theta).expect("contraction"))
            .expect("contraction"),
    );
    let br_z = jc.lift_vector_to_z(&zeta_y.bracket(xi_y))?;
    let jbr = interior(&br_z, &theta).expect("contraction");
    Ok(lhs.sub(&exact).expect("sub").sub(&jbr).expect("sub"))
}

/// Infinitesimal equivariance defect {J(ξ), J(ζ)} − J([ζ, ξ]): equals the
/// exact term d(ξ_Z ⨼ ζ_Z ⨼ Θ); a nonzero value witnesses non-equivariance.
pub fn equivariance_residual(
    jc: &JetCharts,
    xi_y: &VectorField,
    zeta_y: &VectorField,
) -> Result<DiffForm, JetError> {
    let xi_z = jc.lift_vector_to_z(xi_y)?;
    let zeta_z = jc.lift_vector_to_z(zeta_y)?;
    let theta = jc.canonical_theta();
    let lhs = momentum_bracket(jc, &xi_z, &zeta_z);
    let br_z = jc.lift_vector_to_z(&zeta_y.bracket(xi_y))?;
    let jbr = interior(&br_z, &theta).expect("contraction");
    Ok(lhs.sub(&jbr).expect("sub"))
}

/// The bracket of Lagrangian momentum maps on J¹Y:
/// {J^L(ξ), J^L(ζ)} = j¹ζ ⨼ (j¹ξ ⨼ Ω_L).
pub fn lagrangian_momentum_bracket(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    xi: &GeneratorFamily,
    zeta: &GeneratorFamily,
) -> Result<DiffForm, JetError> {
    let j1xi = jc.prolong_vector(&xi.on_y(jc))?;
    let j1zeta = jc.prolong_vector(&zeta.on_y(jc))?;
    let inner = interior(&j1xi, &omega_l(jc, lag)).expect("omega_l contraction");
    Ok(interior(&j1zeta, &inner).expect("omega_l contraction"))
}

/// Equivariance defect of the Lagrangian momentum maps:
/// {J^L(ξ), J^L(ζ)} − J^L([ζ, ξ]). A nonzero value is a cocycle witnessing
/// non-equivariance of the momentum map.
pub fn lagrangian_equivariance_residual(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    xi: &GeneratorFamily,
    zeta: &GeneratorFamily,
) -> Result<DiffForm, JetError> {
    let br = zeta.on_y(jc).bracket(&xi.on_y(jc));
    let j1br = jc.prolong_vector(&br)?;
    let jbr = interior(&j1br, &cartan_form(jc, lag)).expect("cartan contraction");
    Ok(lagrangian_momentum_bracket(jc, lag, xi, zeta)?
        .sub(&jbr)
        .expect("sub"))
}

/// Residuals of the Legendre covariance condition T𝔽ℒ ∘ j¹ξ = ξ_Z ∘ 𝔽ℒ,
/// one per Z coordinate. Zero for symmetries of the Lagrangian.
pub fn legendre_equivariance_residuals(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    gen: &GeneratorFamily,
) -> Result<Vec<Expr>, JetError> {
    let leg = legendre(jc, lag);
    let xi_y = gen.on_y(jc);
    let j1xi = jc.prolong_vector(&xi_y)?;
    let xi_z = jc.lift_vector_to_z(&xi_y)?;
    let sub = leg.map.substitution();
    let mut out = Vec::with_capacity(jc.z.dim());
    for k in 0..jc.z.dim() {
        let mut pushed = Expr::zero();
        for (j, &s) in jc.j1.coords.iter().enumerate() {
            let d = leg.map.comps[k].diff(s);
            if !d.is_zero() {
                pushed = pushed.add_ref(&d.mul_ref(&j1xi.comps[j]));
            }
        }
        out.push(pushed.sub_ref(&xi_z.comps[k].substitute(&sub)));
    }
    Ok(out)
}

/// £_{j¹ξ} Θ_L: vanishes exactly when the generator preserves the Cartan
/// form.
pub fn cartan_invariance(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    gen: &GeneratorFamily,
) -> Result<DiffForm, JetError> {
    let j1xi = jc.prolong_vector(&gen.on_y(jc))?;
    Ok(lie_derivative(&j1xi, &cartan_form(jc, lag)).expect("lie derivative"))
}

/// Verdict of the vertical-transitivity test: do the fiber components of
/// the generator families span the vertical tangent space at sampled
/// points?
#[derive(Debug, Clone)]
pub struct TransitivityReport {
    pub transitive: bool,
    pub rank: usize,
    pub fiber_dim: usize,
    /// Coefficients of an unspanned vertical direction (per fiber entry,
    /// chart order), present when the span is deficient.
    pub witness: Option<Vec<f64>>,
}

/// Numeric rank of the map (jet parameters) → (vertical vectors ξ^A ∂_A)
/// at sampled chart points.
pub fn vertical_transitivity(
    jc: &JetCharts,
    gens: &[GeneratorFamily],
    samples: usize,
    seed: u64,
) -> Result<TransitivityReport, SampleError> {
    let mut params: Vec<SymbolId> = Vec::new();
    for g in gens {
        for &p in &g.jet_parameters {
            if !params.contains(&p) {
                params.push(p);
            }
        }
    }
    // ∂ξ^A/∂param, one row per fiber entry
    let mut rows: Vec<Vec<Expr>> = Vec::new();
    for entry in &jc.entries {
        let mut total = Expr::zero();
        for g in gens {
            total = total.add_ref(&g.fiber_component(entry.y));
        }
        rows.push(params.iter().map(|&p| total.diff(p)).collect());
    }
    let fiber_dim = rows.len();
    let mut syms: Vec<SymbolId> = Vec::new();
    for row in &rows {
        for e in row {
            for s in e.symbols() {
                if !syms.contains(&s) {
                    syms.push(s);
                }
            }
        }
    }
    syms.sort();

    let mut worst_rank = fiber_dim.min(params.len());
    let mut witness = None;
    for k in 0..samples.max(1) {
        let bind = numcheck::sample_point(&syms, seed.wrapping_add(k as u64), 0)?;
        let mut m = vec![vec![0.0f64; params.len()]; fiber_dim];
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                m[i][j] = e.eval(&bind)?;
            }
        }
        let (rank, null) = row_rank_and_conull(&m);
        if rank < worst_rank {
            worst_rank = rank;
            witness = null;
        }
        if rank < fiber_dim && witness.is_none() {
            witness = row_rank_and_conull(&m).1;
        }
    }
    Ok(TransitivityReport {
        transitive: worst_rank == fiber_dim && fiber_dim > 0,
        rank: worst_rank,
        fiber_dim,
        witness: if worst_rank == fiber_dim { None } else { witness },
    })
}

/// Row rank of a matrix and, if deficient, a unit vector orthogonal to the
/// column space (a left null vector).
fn row_rank_and_conull(m: &[Vec<f64>]) -> (usize, Option<Vec<f64>>) {
    let rows = m.len();
    if rows == 0 {
        return (0, None);
    }
    let cols = m[0].len();
    // Eliminate on [M | I] row-wise; unreduced identity rows give left null
    // vectors.
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..rows).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..cols {
        let mut piv = None;
        let mut best = 1e-9;
        for r in rank..rows {
            if a[r][col].abs() > best {
                best = a[r][col].abs();
                piv = Some(r);
            }
        }
        let Some(p) = piv else { continue };
        a.swap(rank, p);
        let d = a[rank][col];
        for c in 0..cols + rows {
            a[rank][c] /= d;
        }
        for r in 0..rows {
            if r != rank {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..cols + rows {
                        a[r][c] -= f * a[rank][c];
                    }
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    if rank == rows {
        (rank, None)
    } else {
        let w: Vec<f64> = a[rank][cols..].to_vec();
        let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let w = if norm > 0.0 {
            w.iter().map(|x| x / norm).collect()
        } else {
            w
        };
        (rank, Some(w))
    }
}

/// Stress-energy-momentum tensor density of a theory with a parametric
/// metric: 𝔗^{σρ} = ∂L/∂g_{σρ}, the derivative taken in the full-matrix
/// sense (off-diagonal symbol derivatives carry a factor ½ because the
/// interned symbol stands for both index orders).
pub fn stress_energy(theory: &Theory) -> Result<Vec<((u8, u8), Expr)>, SymmetryError> {
    let MetricKind::Parametric(name) = &theory.metric else {
        return Err(SymmetryError::NoParametricMetric);
    };
    let mut out = Vec::new();
    for entry in theory.charts.field_entries(name) {
        let (s, r) = (entry.comp[0].value, entry.comp[1].value);
        let mut t = theory.lagrangian.l.diff(entry.y);
        if s != r {
            t = t.scale(&crate::expr::rat(1, 2));
        }
        out.push(((s, r), t));
    }
    Ok(out)
}
