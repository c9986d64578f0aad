//! The Lagrangian side: covariant Legendre transform, Cartan form,
//! Euler-Lagrange derivative and the section-level identities.

use std::collections::HashMap;

use crate::error::SymmetryError;
use crate::expr::Expr;
use crate::geometry::{exterior_d, interior, pullback, wedge, ChartMap, DiffForm, VectorField};
use crate::jets::{JetCharts, SymbolicSection};
use crate::symmetry::GeneratorFamily;

/// A first-order Lagrangian density L(x, y, v) dⁿ⁺¹x on J¹Y.
#[derive(Debug, Clone)]
pub struct LagrangianDensity {
    pub l: Expr,
}

impl LagrangianDensity {
    pub fn new(l: Expr) -> Self {
        LagrangianDensity { l }
    }
}

/// How the theory carries its spacetime metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricKind {
    FixedMinkowski,
    Parametric(String),
    Variational(String),
    None,
}

/// A complete theory: bundle charts, Lagrangian, symmetry generators.
#[derive(Debug, Clone)]
pub struct Theory {
    pub name: String,
    pub charts: JetCharts,
    pub lagrangian: LagrangianDensity,
    pub generators: Vec<GeneratorFamily>,
    pub parametrized: bool,
    pub metric: MetricKind,
    /// Substitutions applied along sections in addition to the chart maps:
    /// derived symbols (inverse metric, determinant scalars) mapped to their
    /// section-level twins.
    pub section_extras: HashMap<crate::symbol::SymbolId, Expr>,
}

impl Theory {
    pub fn generator(&self, name: &str) -> Option<&GeneratorFamily> {
        self.generators.iter().find(|g| g.name == name)
    }
}

/// Output of the covariant Legendre transform.
#[derive(Debug, Clone)]
pub struct Legendre {
    /// p_A^μ = ∂L/∂v^A_μ, keyed by the multimomentum symbol.
    pub momenta: HashMap<crate::symbol::SymbolId, Expr>,
    /// p = L − p_A^μ v^A_μ.
    pub hamiltonian: Expr,
    /// The fiber-preserving map 𝔽ℒ : J¹Y → Z.
    pub map: ChartMap,
}

/// Covariant Legendre transform of a Lagrangian density.
pub fn legendre(jc: &JetCharts, lag: &LagrangianDensity) -> Legendre {
    let mut momenta = HashMap::new();
    let mut hamiltonian = lag.l.clone();
    for entry in jc.variational_entries() {
        for mu in 0..jc.dim() {
            let pm = lag.l.diff(entry.v[mu]);
            hamiltonian = hamiltonian.sub_ref(&pm.mul_ref(&Expr::sym(entry.v[mu])));
            momenta.insert(entry.p[mu], pm);
        }
    }
    let mut comps = Vec::with_capacity(jc.z.dim());
    for &c in &jc.z.coords {
        if c == jc.p {
            comps.push(hamiltonian.clone());
        } else if let Some(e) = momenta.get(&c) {
            comps.push(e.clone());
        } else {
            comps.push(Expr::sym(c));
        }
    }
    Legendre {
        momenta,
        hamiltonian,
        map: ChartMap::new(&jc.j1, &jc.z, comps),
    }
}

/// Cartan form Θ_L = (∂L/∂v^A_μ) dy^A ∧ dⁿx_μ + p dⁿ⁺¹x on J¹Y, built
/// by the direct coordinate formula.
pub fn cartan_form(jc: &JetCharts, lag: &LagrangianDensity) -> DiffForm {
    let leg = legendre(jc, lag);
    let mut theta = jc.volume(&jc.j1).scale(&leg.hamiltonian);
    for entry in jc.variational_entries() {
        let dy = DiffForm::d_coord(&jc.j1, entry.y);
        for mu in 0..jc.dim() {
            let term = wedge(&dy, &jc.dnx(&jc.j1, mu))
                .expect("cartan wedge")
                .scale(&leg.momenta[&entry.p[mu]]);
            theta = theta.add(&term).expect("cartan add");
        }
    }
    theta
}

/// Cartan form computed as the 𝔽ℒ-pullback of the canonical Θ on Z.
pub fn cartan_form_via_pullback(jc: &JetCharts, lag: &LagrangianDensity) -> DiffForm {
    let leg = legendre(jc, lag);
    pullback(&leg.map, &jc.canonical_theta()).expect("legendre pullback")
}

/// Ω_L = −dΘ_L on J¹Y.
pub fn omega_l(jc: &JetCharts, lag: &LagrangianDensity) -> DiffForm {
    exterior_d(&cartan_form(jc, lag)).neg()
}

/// Euler-Lagrange expressions δL/δy^A = ∂L/∂y^A − D_μ(∂L/∂v^A_μ) on J²Y,
/// one per variational fiber coordinate (in chart order).
pub fn euler_lagrange(jc: &JetCharts, lag: &LagrangianDensity) -> Vec<Expr> {
    let mut out = Vec::new();
    for entry in jc.variational_entries() {
        let mut e = lag.l.diff(entry.y);
        for mu in 0..jc.dim() {
            e = e.sub_ref(&jc.total_derivative(&lag.l.diff(entry.v[mu]), mu));
        }
        out.push(e);
    }
    out
}

/// Coefficient of dⁿ⁺¹x in (j¹φ)*(j¹V ⨼ Ω_L) for a vertical V on Y.
pub fn el_via_cartan(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    phi: &SymbolicSection,
    v: &VectorField,
) -> Expr {
    for mu in 0..jc.dim() {
        assert!(v.comps[mu].is_zero(), "V must be vertical");
    }
    let j1v = jc.prolong_vector(v).expect("vertical fields are projectable");
    let contracted = interior(&j1v, &omega_l(jc, lag)).expect("contraction");
    let pulled = pullback(&jc.prolong_section(phi), &contracted).expect("section pullback");
    volume_coefficient(jc, &pulled)
}

/// The EL residual contracted against V, evaluated on j²φ: the right side
/// of the intrinsic variational identity.
pub fn el_residual_contraction(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    phi: &SymbolicSection,
    v: &VectorField,
) -> Expr {
    let els = euler_lagrange(jc, lag);
    let j2 = jc.prolong_section_2(phi);
    let sub = j2.substitution();
    let mut acc = Expr::zero();
    for (entry, el) in jc.variational_entries().zip(&els) {
        let pos = jc.y.position(entry.y).unwrap();
        let va = v.comps[pos].substitute(&sub);
        // el is δL/δy = ∂L/∂y − D(∂L/∂v); the contraction convention is
        // V^A (D_μ ∂L/∂v − ∂L/∂y) = −V^A · el
        acc = acc.sub_ref(&va.mul_ref(&el.substitute(&sub)));
    }
    acc
}

/// Coefficient of (j¹φ)*Θ_L on the volume form: equals L ∘ j¹φ.
pub fn lagrangian_reconstruction(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    phi: &SymbolicSection,
) -> Expr {
    let pulled =
        pullback(&jc.prolong_section(phi), &cartan_form(jc, lag)).expect("section pullback");
    volume_coefficient(jc, &pulled)
}

/// Vector fields admitted by the tangency lemma: either the image of a base
/// vector field under T(j¹φ), or a field vertical over Y (v-components only).
pub enum Lemma32Witness {
    /// w on X; the witness is W = T(j¹φ)·w.
    Tangent(VectorField),
    /// W on J¹Y with components only along the multivelocities.
    Vertical(VectorField),
}

/// Evaluates (j¹φ)*(W ⨼ Ω_L); zero for both admitted classes.
pub fn lemma32_check(
    jc: &JetCharts,
    lag: &LagrangianDensity,
    phi: &SymbolicSection,
    w: &Lemma32Witness,
) -> Result<DiffForm, SymmetryError> {
    let section = jc.prolong_section(phi);
    let field = match w {
        Lemma32Witness::Tangent(base) => {
            assert_eq!(base.chart, jc.x);
            // W^k = Σ_μ w^μ ∂(section comps_k)/∂x^μ, expressed in x
            let mut out = VectorField::zero(&jc.j1);
            for k in 0..jc.j1.dim() {
                let mut c = Expr::zero();
                for mu in 0..jc.dim() {
                    c = c.add_ref(&base.comps[mu].mul_ref(&section.comps[k].diff(jc.x_sym(mu))));
                }
                out.comps[k] = c;
            }
            out
        }
        Lemma32Witness::Vertical(field) => {
            assert_eq!(field.chart, jc.j1);
            for (k, &c) in jc.j1.coords.iter().enumerate() {
                let is_velocity = jc
                    .variational_entries()
                    .any(|e| e.v.contains(&c));
                if !is_velocity && !field.comps[k].is_zero() {
                    return Err(SymmetryError::WNotInEitherClass);
                }
            }
            field.clone()
        }
    };
    let contracted = interior(&field, &omega_l(jc, lag)).expect("contraction");
    Ok(pullback(&section, &contracted).expect("section pullback"))
}

/// Extracts the coefficient of the full volume tuple of an (n+1)-form on X.
pub fn volume_coefficient(jc: &JetCharts, f: &DiffForm) -> Expr {
    assert_eq!(f.degree, jc.dim());
    let tuple: Vec<u8> = (0..jc.dim() as u8).collect();
    f.terms.get(&tuple).cloned().unwrap_or_else(Expr::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equal_symbolic, rat};
    use crate::jets::{jet_charts, BundleSpec, FieldSpec};
    use crate::symbol::scalar_parameter;

    fn mech() -> (JetCharts, LagrangianDensity) {
        let spec = BundleSpec::new(1, vec![FieldSpec::scalar("q", 2, true)]).unwrap();
        let jc = jet_charts(&spec);
        // L = ½ (v⁰)² + ½ (v¹)² − q⁰ q¹
        let e0 = jc.entries[0].clone();
        let e1 = jc.entries[1].clone();
        let l = Expr::sym(e0.v[0])
            .pow(2)
            .scale(&rat(1, 2))
            .add_ref(&Expr::sym(e1.v[0]).pow(2).scale(&rat(1, 2)))
            .sub_ref(&Expr::sym(e0.y).mul_ref(&Expr::sym(e1.y)));
        (jc, LagrangianDensity::new(l))
    }

    #[test]
    fn legendre_mechanics() {
        let (jc, lag) = mech();
        let leg = legendre(&jc, &lag);
        let e0 = jc.entries[0].clone();
        assert_eq!(leg.momenta[&e0.p[0]], Expr::sym(e0.v[0]));
        // p = L − p_A v^A = −½v² − ... − q⁰q¹ (minus the energy)
        let expect = Expr::sym(e0.y)
            .mul_ref(&Expr::sym(jc.entries[1].y))
            .neg_ref()
            .sub_ref(&Expr::sym(e0.v[0]).pow(2).scale(&rat(1, 2)))
            .sub_ref(&Expr::sym(jc.entries[1].v[0]).pow(2).scale(&rat(1, 2)));
        assert!(equal_symbolic(&leg.hamiltonian, &expect));
    }

    #[test]
    fn cartan_two_routes_agree() {
        let (jc, lag) = mech();
        assert_eq!(cartan_form(&jc, &lag), cartan_form_via_pullback(&jc, &lag));
    }

    #[test]
    fn euler_lagrange_mechanics() {
        let (jc, lag) = mech();
        let els = euler_lagrange(&jc, &lag);
        let e0 = jc.entries[0].clone();
        let e1 = jc.entries[1].clone();
        // δL/δq⁰ = −q¹ − w⁰₀₀
        let expect0 = Expr::sym(e1.y).neg_ref().sub_ref(&Expr::sym(e0.w[0][0]));
        assert!(equal_symbolic(&els[0], &expect0));
    }

    #[test]
    fn el_no_velocity_dependence() {
        let jc = jet_charts(&BundleSpec::new(1, vec![FieldSpec::scalar("q", 1, true)]).unwrap());
        let q = jc.entries[0].y;
        let lag = LagrangianDensity::new(Expr::sym(q).pow(3));
        let els = euler_lagrange(&jc, &lag);
        assert!(equal_symbolic(&els[0], &Expr::int(3).mul_ref(&Expr::sym(q).pow(2))));
    }

    #[test]
    fn el_via_cartan_matches_residual() {
        let (jc, lag) = mech();
        // arbitrary symbolic section q^A = c_A t²
        let mut phi = SymbolicSection::default();
        let t = jc.x_sym(0);
        for (a, e) in jc.entries.iter().enumerate() {
            let c = scalar_parameter(&format!("vc{a}"));
            phi.set(e.y, Expr::sym(c).mul_ref(&Expr::sym(t).pow(2)));
        }
        let mut v = VectorField::zero(&jc.y);
        for e in &jc.entries {
            v.set(e.y, Expr::sym(scalar_parameter(&format!("vv{}", e.y))));
        }
        let lhs = el_via_cartan(&jc, &lag, &phi, &v);
        let rhs = el_residual_contraction(&jc, &lag, &phi, &v);
        assert!(equal_symbolic(&lhs, &rhs), "lhs={lhs} rhs={rhs}");
    }

    #[test]
    fn reconstruction() {
        let (jc, lag) = mech();
        let mut phi = SymbolicSection::default();
        let t = jc.x_sym(0);
        for (a, e) in jc.entries.iter().enumerate() {
            phi.set(e.y, Expr::sym(t).pow((a + 1) as i32));
        }
        let lhs = lagrangian_reconstruction(&jc, &lag, &phi);
        let sub = jc.prolong_section(&phi).substitution();
        let rhs = lag.l.substitute(&sub);
        assert!(equal_symbolic(&lhs, &rhs));
    }

    #[test]
    fn lemma32_both_classes() {
        let (jc, lag) = mech();
        let mut phi = SymbolicSection::default();
        let t = jc.x_sym(0);
        for (a, e) in jc.entries.iter().enumerate() {
            phi.set(e.y, Expr::sym(t).pow((a + 2) as i32));
        }
        let mut base = VectorField::zero(&jc.x);
        base.comps[0] = Expr::sym(t);
        let r1 = lemma32_check(&jc, &lag, &phi, &Lemma32Witness::Tangent(base)).unwrap();
        assert!(r1.is_zero(), "tangent case: {r1}");
        let mut vert = VectorField::zero(&jc.j1);
        for e in &jc.entries {
            vert.set(e.v[0], Expr::sym(t).pow(2));
        }
        let r2 = lemma32_check(&jc, &lag, &phi, &Lemma32Witness::Vertical(vert)).unwrap();
        assert!(r2.is_zero(), "vertical case: {r2}");
        // a field with a y-component is rejected
        let mut bad = VectorField::zero(&jc.j1);
        bad.set(jc.entries[0].y, Expr::one());
        assert!(lemma32_check(&jc, &lag, &phi, &Lemma32Witness::Vertical(bad)).is_err());
    }
}
