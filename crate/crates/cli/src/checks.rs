//! Verification suites run by `multiphase check`. Each suite returns one
//! outcome per check; any failed outcome makes the command exit nonzero.

use multiphase_core::equal_symbolic;
use multiphase_core::geometry::{exterior_d, interior, pullback, wedge, ChartMap, DiffForm};
use multiphase_core::numcheck::{equal_numeric, Plan};
use multiphase_core::symmetry::{
    bracket_identity_residual, divergence_identity, momentum_map, momentum_map_contraction,
    variation_of_l, vertical_transitivity,
};
use multiphase_core::variational::{
    cartan_form, cartan_form_via_pullback, el_residual_contraction, el_via_cartan,
    euler_lagrange, legendre, volume_coefficient, LagrangianDensity,
};
use multiphase_core::{Expr, Theory};

use crate::elaborate::ElabTheory;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(suite: &str, name: String, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            suite: suite.into(),
            name,
            passed,
            detail: detail.into(),
        }
    }
}

pub const SUITES: &[&str] = &[
    "forms",
    "legendre",
    "noether",
    "bracket",
    "transitivity",
    "all",
];

pub fn run_suite(et: &ElabTheory, suite: &str, plan: &Plan) -> Vec<CheckOutcome> {
    match suite {
        "forms" => forms_suite(&et.theory, plan),
        "legendre" => legendre_suite(&et.theory),
        "noether" => noether_suite(et, plan),
        "bracket" => bracket_suite(&et.theory),
        "transitivity" => transitivity_suite(&et.theory, plan),
        _ => {
            let mut out = forms_suite(&et.theory, plan);
            out.extend(legendre_suite(&et.theory));
            out.extend(noether_suite(et, plan));
            out.extend(bracket_suite(&et.theory));
            out.extend(transitivity_suite(&et.theory, plan));
            out
        }
    }
}

fn form_vanishes(f: &DiffForm) -> bool {
    f.terms.values().all(|c| c.is_zero())
}

// ----- forms: the canonical multisymplectic structure -----

fn forms_suite(theory: &Theory, plan: &Plan) -> Vec<CheckOutcome> {
    let jc = &theory.charts;
    let mut out = Vec::new();

    // Ω agrees with its coordinate formula term by term
    let mut expect = wedge(&DiffForm::d_coord(&jc.z, jc.p), &jc.volume(&jc.z))
        .unwrap()
        .neg();
    for e in jc.variational_entries() {
        for mu in 0..jc.dim() {
            let term = wedge(
                &wedge(
                    &DiffForm::d_coord(&jc.z, e.y),
                    &DiffForm::d_coord(&jc.z, e.p[mu]),
                )
                .unwrap(),
                &jc.dnx(&jc.z, mu),
            )
            .unwrap();
            expect = expect.add(&term).unwrap();
        }
    }
    let omega = jc.canonical_omega();
    out.push(CheckOutcome::new(
        "forms",
        "omega-coordinate-formula".into(),
        omega == expect,
        "Ω = −dΘ matches its coordinate expansion termwise",
    ));

    // the dual pairing is affine in the momenta with the jet velocities
    // as coefficients
    let pairing = jc.dual_pairing();
    let mut affine_ok = equal_symbolic(&pairing.diff(jc.p), &Expr::one());
    for e in jc.variational_entries() {
        for mu in 0..jc.dim() {
            affine_ok &= equal_symbolic(&pairing.diff(e.p[mu]), &Expr::sym(e.v[mu]));
        }
    }
    out.push(CheckOutcome::new(
        "forms",
        "dual-pairing-affine".into(),
        affine_ok,
        "⟨z, j¹φ⟩ is affine in (p, p_A^μ)",
    ));

    // σ*Θ reproduces the pairing along random sections
    let theta = jc.canonical_theta();
    let mut pullback_ok = true;
    let mut detail = String::from("σ*Θ equals the pairing volume form on random sections");
    for k in 0..plan.samples.min(20).max(3) {
        let comps: Vec<Expr> = match random_section_comps(jc, plan.seed.wrapping_add(k as u64)) {
            Ok(c) => c,
            Err(e) => {
                pullback_ok = false;
                detail = format!("sampling failed: {e}");
                break;
            }
        };
        let sigma = ChartMap::new(&jc.x, &jc.z, comps.clone());
        let pulled = pullback(&sigma, &theta).unwrap();
        let mut pairing = comps[jc.z.position(jc.p).unwrap()].clone();
        for e in jc.variational_entries() {
            let phi_a = &comps[jc.z.position(e.y).unwrap()];
            for mu in 0..jc.dim() {
                pairing = pairing.add_ref(
                    &comps[jc.z.position(e.p[mu]).unwrap()].mul_ref(&phi_a.diff(jc.x_sym(mu))),
                );
            }
        }
        if !volume_coefficient(jc, &pulled).sub_ref(&pairing).is_zero() {
            pullback_ok = false;
            detail = "σ*Θ differs from the pairing volume form".into();
            break;
        }
    }
    out.push(CheckOutcome::new(
        "forms",
        "section-pullback-pairing".into(),
        pullback_ok,
        detail,
    ));
    out
}

/// Random polynomial section components of Z → X, degree ≤ 2 in the base
/// coordinates with small integer coefficients.
fn random_section_comps(
    jc: &multiphase_core::JetCharts,
    seed: u64,
) -> Result<Vec<Expr>, String> {
    let n = jc.dim();
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 7) as i64 - 3
    };
    let mut comps = Vec::new();
    for &c in &jc.z.coords {
        if let Some(mu) = (0..n).find(|&m| jc.x_sym(m) == c) {
            comps.push(Expr::sym(jc.x_sym(mu)));
            continue;
        }
        let mut e = Expr::int(next());
        for mu in 0..n {
            let x = Expr::sym(jc.x_sym(mu));
            e = e.add_ref(&x.mul_ref(&Expr::int(next())));
            e = e.add_ref(&x.mul_ref(&x).mul_ref(&Expr::int(next())));
        }
        comps.push(e);
    }
    Ok(comps)
}

// ----- legendre: the fiber transform and the Cartan form -----

fn legendre_suite(theory: &Theory) -> Vec<CheckOutcome> {
    let jc = &theory.charts;
    let lag = &theory.lagrangian;
    let mut out = Vec::new();

    let direct = cartan_form(jc, lag);
    let pulled = cartan_form_via_pullback(jc, lag);
    out.push(CheckOutcome::new(
        "legendre",
        "cartan-route-agreement".into(),
        form_vanishes(&direct.sub(&pulled).unwrap()),
        "Θ_L by coordinate formula equals (𝔽ℒ)*Θ",
    ));

    let leg = legendre(jc, lag);
    let mut ham = lag.l.clone();
    for e in jc.variational_entries() {
        for mu in 0..jc.dim() {
            ham = ham.sub_ref(&leg.momenta[&e.p[mu]].mul_ref(&Expr::sym(e.v[mu])));
        }
    }
    out.push(CheckOutcome::new(
        "legendre",
        "hamiltonian-relation".into(),
        equal_symbolic(&ham, &leg.hamiltonian),
        "p∘𝔽ℒ = L − p_A^μ v^A_μ",
    ));

    // the Euler–Lagrange expressions agree along both routes, tested by
    // contracting against each vertical coordinate direction on a generic
    // section
    let phi = crate::report::generic_section_with_extras(theory);
    let mut agree = true;
    for entry in jc.variational_entries() {
        let mut v = multiphase_core::geometry::VectorField::zero(&jc.y);
        v.set(entry.y, Expr::one());
        let via = el_via_cartan(jc, lag, &phi, &v);
        let direct = el_residual_contraction(jc, lag, &phi, &v);
        agree &= equal_symbolic(&via, &direct);
    }
    out.push(CheckOutcome::new(
        "legendre",
        "el-via-cartan".into(),
        agree,
        "variational derivative equals the Cartan-form contraction route",
    ));
    out
}

// ----- noether: momentum maps and the divergence identity -----

fn noether_suite(et: &ElabTheory, plan: &Plan) -> Vec<CheckOutcome> {
    let theory = &et.theory;
    let jc = &theory.charts;
    let lag = &theory.lagrangian;
    let mut out = Vec::new();
    for (gen, &is_sym) in theory.generators.iter().zip(&et.symmetry) {
        let xi_z = match jc.lift_vector_to_z(&gen.on_y(jc)) {
            Ok(v) => v,
            Err(e) => {
                out.push(CheckOutcome::new(
                    "noether",
                    format!("{}:lift", gen.name),
                    false,
                    format!("canonical lift failed: {e}"),
                ));
                continue;
            }
        };
        let coord = momentum_map(jc, gen);
        let contraction = momentum_map_contraction(jc, &xi_z);
        out.push(CheckOutcome::new(
            "noether",
            format!("{}:momentum-map-routes", gen.name),
            form_vanishes(&coord.sub(&contraction).unwrap()),
            "coordinate formula equals ξ_Z ⨼ Θ",
        ));
        let dj = exterior_d(&contraction);
        let rhs = interior(&xi_z, &jc.canonical_omega()).unwrap();
        out.push(CheckOutcome::new(
            "noether",
            format!("{}:defining-property", gen.name),
            form_vanishes(&dj.sub(&rhs).unwrap()),
            "dJ(ξ) = ξ_Z ⨼ Ω",
        ));

        let di = divergence_identity(jc, lag, gen, &theory.section_extras);
        let div_ok = di.residual.is_zero() || equal_numeric(&di.residual, &Expr::zero(), plan);
        out.push(CheckOutcome::new(
            "noether",
            format!("{}:divergence-identity", gen.name),
            div_ok,
            if div_ok {
                "the divergence identity holds along generic sections".to_string()
            } else {
                "the divergence identity fails along generic sections".to_string()
            },
        ));

        if is_sym {
            let (ok, detail) = quasi_symmetry(theory, gen);
            out.push(CheckOutcome::new(
                "noether",
                format!("{}:declared-symmetry", gen.name),
                ok,
                detail,
            ));
        }
    }
    out
}

/// A declared symmetry must vary the Lagrangian by a null divergence, so
/// that the divergence identity yields an on-shell conservation law. The
/// variation is a null divergence exactly when the Euler operator
/// annihilates it.
pub fn quasi_symmetry(theory: &Theory, gen: &multiphase_core::GeneratorFamily) -> (bool, String) {
    let jc = &theory.charts;
    let dl = variation_of_l(jc, &theory.lagrangian, gen);
    if dl.is_zero() {
        return (true, "the Lagrangian is strictly invariant".into());
    }
    // cancellations through square-root factors are invisible to the
    // canonical form; test strict invariance numerically as well
    let plan = Plan::new(40, 1e-9, 10_411);
    if equal_numeric(&dl, &Expr::zero(), &plan) {
        return (true, "the Lagrangian is strictly invariant".into());
    }
    let els = euler_lagrange(jc, &LagrangianDensity::new(dl));
    if els.iter().all(|e| e.is_zero()) {
        return (
            true,
            "the Lagrangian varies by a null divergence (quasi-symmetry)".into(),
        );
    }
    if els.iter().all(|e| equal_numeric(e, &Expr::zero(), &plan)) {
        (
            true,
            "the Lagrangian varies by a null divergence (quasi-symmetry)".into(),
        )
    } else {
        (
            false,
            "declared symmetry fails: the Lagrangian variation is not a null \
             divergence, so the divergence identity does not reduce to an \
             on-shell conservation law for this generator"
                .into(),
        )
    }
}

// ----- bracket: the multiphase bracket identity for canonical lifts -----

fn bracket_suite(theory: &Theory) -> Vec<CheckOutcome> {
    let jc = &theory.charts;
    let mut out = Vec::new();
    let gens = &theory.generators;
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            let name = format!("{}*{}", gens[i].name, gens[j].name);
            let res = if jc.dim() >= 2 {
                bracket_identity_residual(jc, &gens[i].on_y(jc), &gens[j].on_y(jc))
            } else {
                // over a one-dimensional base Θ is a 1-form, the exact term
                // ξ_Z ⨼ ζ_Z ⨼ Θ vanishes by degree, and the identity reads
                // {J(ξ), J(ζ)} = J([ζ, ξ])
                bracket_residual_dim_one(jc, &gens[i].on_y(jc), &gens[j].on_y(jc))
            };
            match res {
                Ok(f) => out.push(CheckOutcome::new(
                    "bracket",
                    name,
                    form_vanishes(&f),
                    "{J(ξ),J(ζ)} − d(ξ_Z⨼ζ_Z⨼Θ) − J([ζ,ξ]) = 0",
                )),
                Err(e) => out.push(CheckOutcome::new(
                    "bracket",
                    name,
                    false,
                    format!("lift failed: {e}"),
                )),
            }
        }
    }
    if out.is_empty() {
        out.push(CheckOutcome::new(
            "bracket",
            "no-pairs".into(),
            true,
            "fewer than two generators; nothing to bracket",
        ));
    }
    out
}

fn bracket_residual_dim_one(
    jc: &multiphase_core::JetCharts,
    xi_y: &multiphase_core::geometry::VectorField,
    zeta_y: &multiphase_core::geometry::VectorField,
) -> Result<DiffForm, multiphase_core::error::JetError> {
    use multiphase_core::geometry::interior;
    use multiphase_core::symmetry::momentum_bracket;
    let xi_z = jc.lift_vector_to_z(xi_y)?;
    let zeta_z = jc.lift_vector_to_z(zeta_y)?;
    let lhs = momentum_bracket(jc, &xi_z, &zeta_z);
    let br_z = jc.lift_vector_to_z(&zeta_y.bracket(xi_y))?;
    let jbr = interior(&br_z, &jc.canonical_theta()).expect("contraction");
    Ok(lhs.sub(&jbr).expect("degree match"))
}

// ----- transitivity: stability of the vertical-span verdict -----

fn transitivity_suite(theory: &Theory, plan: &Plan) -> Vec<CheckOutcome> {
    let jc = &theory.charts;
    let mut verdicts = Vec::new();
    for k in 0..3u64 {
        match vertical_transitivity(jc, &theory.generators, 5, plan.seed.wrapping_add(k)) {
            Ok(r) => verdicts.push(r),
            Err(e) => {
                return vec![CheckOutcome::new(
                    "transitivity",
                    "verdict".into(),
                    false,
                    format!("sampling failed: {e}"),
                )]
            }
        }
    }
    let first = verdicts[0].transitive;
    let stable = verdicts.iter().all(|r| r.transitive == first);
    let witness_ok = verdicts
        .iter()
        .all(|r| r.transitive != r.witness.is_some() || r.fiber_dim == 0);
    let detail = if first {
        format!(
            "gauge directions span the {}-dimensional fiber at sampled points (stable over 3 seeds)",
            verdicts[0].fiber_dim
        )
    } else {
        format!(
            "vertical span has rank {} < fiber dimension {}; an unspanned direction is reported (stable over 3 seeds)",
            verdicts[0].rank, verdicts[0].fiber_dim
        )
    };
    vec![CheckOutcome::new(
        "transitivity",
        "verdict".into(),
        stable && witness_ok,
        detail,
    )]
}

