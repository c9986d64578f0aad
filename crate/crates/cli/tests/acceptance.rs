//! Acceptance gate: the nine primary criteria, one test and one printed
//! pass/fail line per criterion.  Each criterion re-derives its expected
//! values from independent closed forms or numeric oracles rather than
//! trusting the engine's own output.

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multiphase_cli::elaborate::{elaborate, ElabTheory};
use multiphase_cli::parse;
use multiphase_core::expr::{rat, Expr};
use multiphase_core::geometry::{
    exterior_d, interior, lie_derivative, pullback, wedge, ChartMap, DiffForm, VectorField,
};
use multiphase_core::jets::{jet_charts, BundleSpec, FieldSpec, SymbolicSection};
use multiphase_core::numcheck::{self, equal_numeric, finite_difference_check, Plan};
use multiphase_core::symbol::{self, IndexTag, SymbolData, SymbolId, SymbolKind};
use multiphase_core::symmetry::{
    bracket_identity_residual, divergence_identity, lagrangian_equivariance_residual,
    lie_derivative_of_section, momentum_map, momentum_map_contraction, noether_current,
    variation_of_l, vertical_transitivity, GeneratorFamily,
};
use multiphase_core::theories::{
    catalog, epsilon_sign, make_chern_simons, make_maxwell, make_polyakov_string,
    make_relativistic_particle, minkowski_diag, register_gauge_scalar, register_metric_calculus,
};
use multiphase_core::variational::{
    cartan_form, cartan_form_via_pullback, euler_lagrange, legendre, volume_coefficient,
};
use multiphase_core::{equal_symbolic, JetCharts, LagrangianDensity, Theory};

// ----- shared helpers -----

fn criterion(n: usize, label: &str, body: impl FnOnce()) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("criterion {n} ({label}): pass"),
        Err(e) => {
            println!("criterion {n} ({label}): fail");
            std::panic::resume_unwind(e);
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_poly(r: &mut ChaCha8Rng, syms: &[SymbolId]) -> Expr {
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

fn rand_section_comps(jc: &JetCharts, chart_coords: &[SymbolId], r: &mut ChaCha8Rng) -> Vec<Expr> {
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

fn form_vanishes(f: &DiffForm) -> bool {
    f.terms.values().all(|c| equal_symbolic(c, &Expr::zero()))
}

fn field_strength(jc: &JetCharts, mu: usize, nu: usize) -> Expr {
    let a_nu = jc.entry("A", &[IndexTag::down(nu as u8)]);
    let a_mu = jc.entry("A", &[IndexTag::down(mu as u8)]);
    Expr::sym(a_nu.v[mu]).sub_ref(&Expr::sym(a_mu.v[nu]))
}

/// Sum of two generator families over the same charts.
fn combine(a: &GeneratorFamily, b: &GeneratorFamily, name: &str) -> GeneratorFamily {
    let mut out = GeneratorFamily::new(
        name,
        a.base
            .iter()
            .zip(&b.base)
            .map(|(x, y)| x.add_ref(y))
            .collect(),
    );
    let mut keys: Vec<_> = a.fiber.keys().chain(b.fiber.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    for y in keys {
        out.set_fiber(y, a.fiber_component(y).add_ref(&b.fiber_component(y)));
    }
    out.jet_parameters = a.jet_parameters.clone();
    out.jet_parameters.extend(b.jet_parameters.iter().copied());
    out
}

/// A gauge family dA = dχ over a scalar of the given name.
fn gauge_family(jc: &JetCharts, name: &str) -> GeneratorFamily {
    let chi = register_gauge_scalar(jc, name);
    let mut g = GeneratorFamily::new(name, vec![Expr::zero(); jc.dim()]);
    for (nu, e) in jc.field_entries("A").iter().enumerate() {
        g.set_fiber(e.y, Expr::sym(chi.d1[nu]));
    }
    g
}

// ----- criterion 1: canonical structure -----

#[test]
fn criterion_1_canonical_structure() {
    criterion(1, "canonical multisymplectic structure", || {
        let mut r = rng(2024);
        for entry in catalog() {
            let jc = &entry.theory.charts;

            // Ω against its coordinate formula, termwise
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
            assert_eq!(jc.canonical_omega(), expect, "chart {}", entry.key);

            // the dual pairing is affine in the momenta with jet coefficients
            let pairing = jc.dual_pairing();
            assert_eq!(pairing.diff(jc.p), Expr::one());
            for e in jc.variational_entries() {
                for mu in 0..jc.dim() {
                    assert_eq!(pairing.diff(e.p[mu]), Expr::sym(e.v[mu]), "{}", entry.key);
                }
            }

            // σ*Θ equals the pairing along 20 random polynomial sections
            let theta = jc.canonical_theta();
            for _ in 0..20 {
                let comps = rand_section_comps(jc, &jc.z.coords, &mut r);
                let sigma = ChartMap::new(&jc.x, &jc.z, comps.clone());
                let pulled = pullback(&sigma, &theta).unwrap();
                let mut pairing = comps[jc.z.position(jc.p).unwrap()].clone();
                for e in jc.variational_entries() {
                    let phi_a = &comps[jc.z.position(e.y).unwrap()];
                    for mu in 0..jc.dim() {
                        pairing = pairing.add_ref(
                            &comps[jc.z.position(e.p[mu]).unwrap()]
                                .mul_ref(&phi_a.diff(jc.x_sym(mu))),
                        );
                    }
                }
                let lhs = volume_coefficient(jc, &pulled);
                assert!(lhs.sub_ref(&pairing).is_zero(), "chart {}", entry.key);
            }
        }
    });
}

// ----- criterion 2: Legendre transform and Cartan form -----

/// Third construction of the Cartan form: the contact decomposition
/// Θ_L = L dⁿ⁺¹x + p_A^μ (dy^A − v^A_ν dx^ν) ∧ dⁿx_μ.
fn cartan_form_contact(jc: &JetCharts, lag: &LagrangianDensity) -> DiffForm {
    let leg = legendre(jc, lag);
    let mut theta = jc.volume(&jc.j1).scale(&lag.l);
    for e in jc.variational_entries() {
        for mu in 0..jc.dim() {
            let mut contact = DiffForm::d_coord(&jc.j1, e.y);
            for nu in 0..jc.dim() {
                contact = contact
                    .sub(&DiffForm::d_coord(&jc.j1, jc.x_sym(nu)).scale(&Expr::sym(e.v[nu])))
                    .unwrap();
            }
            let term = wedge(&contact, &jc.dnx(&jc.j1, mu))
                .unwrap()
                .scale(&leg.momenta[&e.p[mu]]);
            theta = theta.add(&term).unwrap();
        }
    }
    theta
}

#[test]
fn criterion_2_legendre_and_cartan() {
    criterion(2, "Legendre transform and Cartan form", || {
        for entry in catalog() {
            let jc = &entry.theory.charts;
            let lag = &entry.theory.lagrangian;
            let direct = cartan_form(jc, lag);
            let pulled = cartan_form_via_pullback(jc, lag);
            let contact = cartan_form_contact(jc, lag);
            assert!(form_vanishes(&direct.sub(&pulled).unwrap()), "{}", entry.key);
            assert!(form_vanishes(&direct.sub(&contact).unwrap()), "{}", entry.key);

            // the affine-dual component satisfies p∘FL = L − p_A^μ v^A_μ
            let leg = legendre(jc, lag);
            let mut pairing = Expr::zero();
            for e in jc.variational_entries() {
                for mu in 0..jc.dim() {
                    pairing =
                        pairing.add_ref(&leg.momenta[&e.p[mu]].mul_ref(&Expr::sym(e.v[mu])));
                }
            }
            assert!(
                equal_symbolic(&leg.hamiltonian, &lag.l.sub_ref(&pairing)),
                "{}: Legendre affine component",
                entry.key
            );
        }

        // triple agreement on 20 random second-order mechanics Lagrangians
        let spec = BundleSpec::new(1, vec![FieldSpec::scalar("q", 2, true)]).unwrap();
        let jc = jet_charts(&spec);
        let mut syms = vec![jc.x_sym(0)];
        for e in jc.variational_entries() {
            syms.push(e.y);
            syms.push(e.v[0]);
        }
        let mut r = rng(41);
        for _ in 0..20 {
            let lag = LagrangianDensity::new(rand_poly(&mut r, &syms));
            let direct = cartan_form(&jc, &lag);
            assert_eq!(direct, cartan_form_via_pullback(&jc, &lag));
            assert!(direct.sub(&cartan_form_contact(&jc, &lag)).unwrap().is_zero());
        }

        // closed-form multimomenta for flat electromagnetism: p^{νμ} = F^{νμ}
        let th = make_maxwell(false);
        let jc = &th.charts;
        let eta = minkowski_diag(4);
        let leg = legendre(jc, &th.lagrangian);
        let a: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
        for nu in 0..4 {
            for mu in 0..4 {
                let expect = eta[nu].mul_ref(&eta[mu]).mul_ref(&field_strength(jc, nu, mu));
                assert!(
                    equal_symbolic(&leg.momenta[&a[nu].p[mu]], &expect),
                    "momentum ({nu},{mu})"
                );
            }
        }
    });
}

// ----- criterion 3: Euler-Lagrange regressions -----

#[test]
fn criterion_3_euler_lagrange_regressions() {
    criterion(3, "Euler-Lagrange closed forms and curved oracle", || {
        // Chern-Simons flatness: δL/δA_τ = ε^{τμν} F_{μν}
        let th = make_chern_simons();
        let jc = &th.charts;
        let els = euler_lagrange(jc, &th.lagrangian);
        for tau in 0..3 {
            let mut expect = Expr::zero();
            for mu in 0..3 {
                for nu in 0..3 {
                    let sign = epsilon_sign(&[tau, mu, nu]);
                    if sign == 0 {
                        continue;
                    }
                    let f = field_strength(jc, mu, nu);
                    expect = if sign > 0 {
                        expect.add_ref(&f)
                    } else {
                        expect.sub_ref(&f)
                    };
                }
            }
            assert!(equal_symbolic(&els[tau], &expect), "τ={tau}");
        }

        // flat electromagnetism: δL/δA_ν = −s_ν s_μ (A_{μ,νμ} − A_{ν,μμ})
        let th = make_maxwell(false);
        let jc = &th.charts;
        let eta = minkowski_diag(4);
        let a: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
        let els = euler_lagrange(jc, &th.lagrangian);
        for nu in 0..4 {
            let mut expect = Expr::zero();
            for mu in 0..4 {
                let d = Expr::sym(a[mu].w[nu][mu]).sub_ref(&Expr::sym(a[nu].w[mu][mu]));
                expect = expect.sub_ref(&eta[nu].mul_ref(&eta[mu]).mul_ref(&d));
            }
            assert!(equal_symbolic(&els[nu], &expect), "ν={nu}");
        }

        curved_maxwell_christoffel_oracle();
        string_conformal_and_harmonic();
        geodesic_up_to_factor();
    });
}

fn curved_maxwell_christoffel_oracle() {
    // δL/δA_ν = −√−g F^{νμ}{}_{;μ}, verified numerically with Christoffel
    // symbols assembled from the sampled metric jets
    let th = make_maxwell(true);
    let jc = &th.charts;
    let mc = register_metric_calculus(jc, "g");
    let a: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
    let els = euler_lagrange(jc, &th.lagrangian);

    let mut symset: HashSet<_> = els.iter().flat_map(|e| e.symbols()).collect();
    symset.insert(mc.sdet);
    for i in 0..4 {
        for j in 0..4 {
            symset.insert(mc.g[i][j]);
            symset.insert(mc.gi[i][j]);
            for sdx in 0..4 {
                symset.insert(mc.jets[i][j][sdx]);
            }
        }
    }
    for e in &a {
        for mu in 0..4 {
            for nu in 0..4 {
                symset.insert(e.w[mu][nu]);
            }
            symset.insert(e.v[mu]);
        }
    }
    let mut syms: Vec<_> = symset.into_iter().collect();
    syms.sort();

    let n = 4usize;
    let tol = 1e-9;
    for k in 0..20u64 {
        let bind = numcheck::sample_point(&syms, 7 + k, 0).unwrap();
        let val = |e: &Expr| e.eval(&bind).unwrap();
        let gi: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| val(&mc.gi_expr(i, j))).collect())
            .collect();
        let sdet = val(&mc.sdet_expr());
        let dg = |al: usize, be: usize, s: usize| val(&Expr::sym(mc.jets[al][be][s]));
        let f = |al: usize, be: usize| val(&field_strength(jc, al, be));
        let df = |al: usize, be: usize, s: usize| {
            val(&Expr::sym(a[be].w[al][s])) - val(&Expr::sym(a[al].w[be][s]))
        };
        let mut gamma = vec![vec![vec![0.0; n]; n]; n];
        for la in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let mut acc = 0.0;
                    for rh in 0..n {
                        acc += 0.5
                            * gi[la][rh]
                            * (dg(rh, nu, mu) + dg(rh, mu, nu) - dg(mu, nu, rh));
                    }
                    gamma[la][mu][nu] = acc;
                }
            }
        }
        let fup = |nu: usize, mu: usize| -> f64 {
            let mut acc = 0.0;
            for al in 0..n {
                for be in 0..n {
                    acc += gi[nu][al] * gi[mu][be] * f(al, be);
                }
            }
            acc
        };
        let dfup = |nu: usize, mu: usize, s: usize| -> f64 {
            let mut acc = 0.0;
            for al in 0..n {
                for be in 0..n {
                    let mut dgi_na = 0.0;
                    let mut dgi_mb = 0.0;
                    for la in 0..n {
                        for rh in 0..n {
                            dgi_na -= gi[nu][la] * gi[al][rh] * dg(la, rh, s);
                            dgi_mb -= gi[mu][la] * gi[be][rh] * dg(la, rh, s);
                        }
                    }
                    acc += dgi_na * gi[mu][be] * f(al, be)
                        + gi[nu][al] * dgi_mb * f(al, be)
                        + gi[nu][al] * gi[mu][be] * df(al, be, s);
                }
            }
            acc
        };
        for nu in 0..n {
            let mut covdiv = 0.0;
            for mu in 0..n {
                covdiv += dfup(nu, mu, mu);
                for la in 0..n {
                    covdiv += gamma[nu][mu][la] * fup(la, mu);
                    covdiv += gamma[mu][mu][la] * fup(nu, la);
                }
            }
            let expect = -sdet * covdiv;
            let got = val(&els[nu]);
            let dev = (got - expect).abs() / (1.0 + got.abs() + expect.abs());
            assert!(dev <= tol, "ν={nu} sample {k}: engine {got} oracle {expect}");
        }
    }
}

fn string_conformal_and_harmonic() {
    let th = make_polyakov_string(3);
    let jc = &th.charts;
    let p_ents: Vec<_> = jc.field_entries("phi").into_iter().cloned().collect();
    let h_ents: Vec<_> = jc.field_entries("h").into_iter().cloned().collect();
    let els = euler_lagrange(jc, &th.lagrangian);
    let order: Vec<_> = jc.variational_entries().map(|e| e.y).collect();
    let el_of = |y| els[order.iter().position(|&o| o == y).unwrap()].clone();

    let mut h = vec![vec![Expr::zero(); 2]; 2];
    for e in &h_ents {
        let (a, b) = (e.comp[0].value as usize, e.comp[1].value as usize);
        h[a][b] = Expr::sym(e.y);
        h[b][a] = Expr::sym(e.y);
    }
    let det = h[0][0].mul_ref(&h[1][1]).sub_ref(&h[0][1].pow(2));
    let s = det.neg_ref().sqrt();
    let adj = [
        [h[1][1].clone(), h[0][1].neg_ref()],
        [h[0][1].neg_ref(), h[0][0].clone()],
    ];
    let hinv = |mu: usize, nu: usize| adj[mu][nu].mul_ref(&s.pow(-2)).neg_ref();
    let g_sym = |a: usize, b: usize| {
        symbol::intern(SymbolData {
            kind: SymbolKind::Metric,
            name: "G".into(),
            indices: vec![IndexTag::down(a as u8), IndexTag::down(b as u8)],
        })
    };
    let gvv = |mu: usize, nu: usize| {
        let mut acc = Expr::zero();
        for a in 0..3 {
            for b in 0..3 {
                acc = acc.add_ref(
                    &Expr::sym(g_sym(a, b))
                        .mul_ref(&Expr::sym(p_ents[a].v[mu]))
                        .mul_ref(&Expr::sym(p_ents[b].v[nu])),
                );
            }
        }
        acc
    };
    let mut trace = Expr::zero();
    for mu in 0..2 {
        for nu in 0..2 {
            trace = trace.add_ref(&hinv(mu, nu).mul_ref(&gvv(mu, nu)));
        }
    }

    // conformal pair: δL/δh_{αβ} = ½√|h| h^{μα}h^{νβ}(G_{AB}v^A_μv^B_ν − ½h_{μν}·trace)
    for e in &h_ents {
        let (al, be) = (e.comp[0].value as usize, e.comp[1].value as usize);
        let mut expect = Expr::zero();
        for mu in 0..2 {
            for nu in 0..2 {
                let core = gvv(mu, nu).sub_ref(&h[mu][nu].mul_ref(&trace).scale(&rat(1, 2)));
                expect = expect.add_ref(&hinv(mu, al).mul_ref(&hinv(nu, be)).mul_ref(&core));
            }
        }
        let mut expect = expect.mul_ref(&s).scale(&rat(1, 2));
        if al != be {
            // the interned symbol stands for both index orders
            expect = expect.scale(&rat(2, 1));
        }
        assert!(equal_symbolic(&el_of(e.y), &expect), "conformal ({al},{be})");
    }

    // harmonic map: δL/δφ^A = ∂L/∂φ^A + D_μ(√|h| h^{μν} G_{AB} v^B_ν)
    let taylor = |a: usize, b: usize, c: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        symbol::parameter(
            "dG",
            vec![
                IndexTag::down(a as u8),
                IndexTag::down(b as u8),
                IndexTag::down(c as u8),
            ],
        )
    };
    for (ai, e) in p_ents.iter().enumerate() {
        let mut src = Expr::zero();
        for mu in 0..2 {
            for nu in 0..2 {
                for b in 0..3 {
                    for c in 0..3 {
                        src = src.add_ref(
                            &hinv(mu, nu)
                                .mul_ref(&Expr::sym(taylor(b, c, ai)))
                                .mul_ref(&Expr::sym(p_ents[b].v[mu]))
                                .mul_ref(&Expr::sym(p_ents[c].v[nu])),
                        );
                    }
                }
            }
        }
        let src = src.mul_ref(&s).scale(&rat(-1, 2));
        let mut expect = src;
        for mu in 0..2 {
            let mut pm = Expr::zero();
            for nu in 0..2 {
                for b in 0..3 {
                    pm = pm.add_ref(
                        &hinv(mu, nu)
                            .mul_ref(&Expr::sym(g_sym(ai, b)))
                            .mul_ref(&Expr::sym(p_ents[b].v[nu])),
                    );
                }
            }
            let pm = pm.mul_ref(&s).neg_ref();
            expect = expect.sub_ref(&jc.total_derivative(&pm, mu));
        }
        assert!(equal_symbolic(&el_of(e.y), &expect), "harmonic φ^{ai}");
    }
}

fn geodesic_up_to_factor() {
    // δL/δq^A = factor · (η_{AB}w^B ‖v‖² + η_{AB}v^B η_{CD}v^C w^D),
    // factor = −m ‖v‖^{-3}
    let th = make_relativistic_particle();
    let jc = &th.charts;
    let els = euler_lagrange(jc, &th.lagrangian);
    let ents: Vec<_> = jc.field_entries("q").into_iter().cloned().collect();
    let eta = minkowski_diag(4);
    let m = symbol::scalar_parameter("m");
    let mut rad = Expr::zero();
    let mut vdotw = Expr::zero();
    for (a, e) in ents.iter().enumerate() {
        rad = rad.sub_ref(&eta[a].mul_ref(&Expr::sym(e.v[0]).pow(2)));
        vdotw = vdotw.add_ref(
            &eta[a].mul_ref(&Expr::sym(e.v[0])).mul_ref(&Expr::sym(e.w[0][0])),
        );
    }
    let factor = Expr::sym(m).mul_ref(&rad.sqrt().pow(-3)).neg_ref();
    println!("geodesic overall factor: -m·‖v‖⁻³ = {factor}");
    for (a, e) in ents.iter().enumerate() {
        let geo = eta[a]
            .mul_ref(&Expr::sym(e.w[0][0]))
            .mul_ref(&rad)
            .add_ref(&eta[a].mul_ref(&Expr::sym(e.v[0])).mul_ref(&vdotw));
        assert!(equal_symbolic(&els[a], &factor.mul_ref(&geo)), "A={a}");
    }
}

// ----- criterion 4: covariant momentum maps -----

#[test]
fn criterion_4_momentum_maps() {
    criterion(4, "covariant momentum maps", || {
        for entry in catalog() {
            let jc = &entry.theory.charts;
            let theta = jc.canonical_theta();
            let omega = jc.canonical_omega();
            for gen in &entry.theory.generators {
                let xi_z = jc.lift_vector_to_z(&gen.on_y(jc)).unwrap();
                let coord = momentum_map(jc, gen);
                let contraction = momentum_map_contraction(jc, &xi_z);
                assert!(
                    form_vanishes(&coord.sub(&contraction).unwrap()),
                    "{}/{}: route mismatch",
                    entry.key,
                    gen.name
                );
                let dj = exterior_d(&contraction);
                let rhs = interior(&xi_z, &omega).unwrap();
                assert!(
                    form_vanishes(&dj.sub(&rhs).unwrap()),
                    "{}/{}: dJ ≠ ξ_Z⨼Ω",
                    entry.key,
                    gen.name
                );
                let lt = lie_derivative(&xi_z, &theta).unwrap();
                assert!(form_vanishes(&lt), "{}/{}: £Θ ≠ 0", entry.key, gen.name);
            }
        }
        em_momentum_map_closed_form();
        parametrized_em_momentum_map_closed_form();
        chern_simons_momentum_map_closed_form();
        string_momentum_map_closed_form();
    });
}

fn xib(tau: usize, nu: usize) -> Expr {
    Expr::sym(symbol::parameter(
        "xib",
        vec![IndexTag::up(tau as u8), IndexTag::down(nu as u8)],
    ))
}

fn em_momentum_map_closed_form() {
    // gauge χ on a fixed background: J(χ) = 𝔉^{νμ} χ_{,ν} d³x_μ
    let th = make_maxwell(false);
    let jc = &th.charts;
    let chi = register_gauge_scalar(jc, "chi");
    let gauge = th.generator("gauge").unwrap();
    let j = momentum_map(jc, gauge);
    let a: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
    let mut expect = DiffForm::zero(&jc.z, 3);
    for mu in 0..4 {
        let mut coeff = Expr::zero();
        for nu in 0..4 {
            coeff = coeff.add_ref(&Expr::sym(a[nu].p[mu]).mul_ref(&Expr::sym(chi.d1[nu])));
        }
        expect = expect.add(&jc.dnx(&jc.z, mu).scale(&coeff)).unwrap();
    }
    assert!(form_vanishes(&j.sub(&expect).unwrap()));
}

fn parametrized_em_momentum_map_closed_form() {
    // (ξ,χ): (−𝔉^{νμ}A_τ ξ^τ_{,ν} + 𝔉^{νμ}χ_{,ν} + p ξ^μ) d³x_μ
    //        − 𝔉^{τμ} ξ^ν dA_τ ∧ d²x_{μν}
    let th = make_maxwell(true);
    let jc = &th.charts;
    let chi = register_gauge_scalar(jc, "chi");
    let gauge = th.generator("gauge").unwrap();
    let diffeo = th.generator("diffeo").unwrap();
    let both = combine(gauge, diffeo, "gauge+diffeo");
    let j = momentum_map(jc, &both);

    let a: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
    let mut expect = DiffForm::zero(&jc.z, 3);
    for mu in 0..4 {
        let mut coeff = Expr::sym(jc.p).mul_ref(&diffeo.base[mu]);
        for nu in 0..4 {
            let mut fib = Expr::sym(chi.d1[nu]);
            for tau in 0..4 {
                fib = fib.sub_ref(&Expr::sym(a[tau].y).mul_ref(&xib(tau, nu)));
            }
            coeff = coeff.add_ref(&Expr::sym(a[nu].p[mu]).mul_ref(&fib));
        }
        expect = expect.add(&jc.dnx(&jc.z, mu).scale(&coeff)).unwrap();
    }
    for tau in 0..4 {
        let da = DiffForm::d_coord(&jc.z, a[tau].y);
        for mu in 0..4 {
            for nu in 0..4 {
                if nu == mu {
                    continue;
                }
                let coeff = Expr::sym(a[tau].p[mu]).mul_ref(&diffeo.base[nu]).neg_ref();
                let term = wedge(&da, &jc.dn1x(&jc.z, mu, nu)).unwrap().scale(&coeff);
                expect = expect.add(&term).unwrap();
            }
        }
    }
    assert!(form_vanishes(&j.sub(&expect).unwrap()));
}

fn chern_simons_momentum_map_closed_form() {
    // (−p^{νμ}A_τ ξ^τ_{,ν} + p^{νμ}χ_{,ν} + p ξ^μ) d²x_μ − p^{τμ}ξ^ν dA_τ ∧ d¹x_{μν}
    let th = make_chern_simons();
    let jc = &th.charts;
    let chi = register_gauge_scalar(jc, "cschi");
    let both = combine(
        th.generator("gauge").unwrap(),
        th.generator("diffeo").unwrap(),
        "gauge+diffeo",
    );
    let diffeo = th.generator("diffeo").unwrap();
    let j = momentum_map(jc, &both);
    let a: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
    let mut expect = DiffForm::zero(&jc.z, 2);
    for mu in 0..3 {
        let mut coeff = Expr::sym(jc.p).mul_ref(&diffeo.base[mu]);
        for nu in 0..3 {
            let mut fib = Expr::sym(chi.d1[nu]);
            for tau in 0..3 {
                fib = fib.sub_ref(&Expr::sym(a[tau].y).mul_ref(&xib(tau, nu)));
            }
            coeff = coeff.add_ref(&Expr::sym(a[nu].p[mu]).mul_ref(&fib));
        }
        expect = expect.add(&jc.dnx(&jc.z, mu).scale(&coeff)).unwrap();
    }
    for tau in 0..3 {
        let da = DiffForm::d_coord(&jc.z, a[tau].y);
        for mu in 0..3 {
            for nu in 0..3 {
                if nu == mu {
                    continue;
                }
                let coeff = Expr::sym(a[tau].p[mu]).mul_ref(&diffeo.base[nu]).neg_ref();
                let term = wedge(&da, &jc.dn1x(&jc.z, mu, nu)).unwrap().scale(&coeff);
                expect = expect.add(&term).unwrap();
            }
        }
    }
    assert!(form_vanishes(&j.sub(&expect).unwrap()));
}

fn string_momentum_map_closed_form() {
    // [q^{σρμ}(2λh_{σρ} − h_{σν}ξ^ν_{,ρ} − h_{ρν}ξ^ν_{,σ}) + p ξ^μ] d¹x_μ
    //   − (p_A^μ ξ^ν dφ^A + q^{σρμ} ξ^ν dh_{σρ}) ∧ d⁰x_{μν},
    // with no ∂/∂φ^A component in the generator
    let th = make_polyakov_string(3);
    let jc = &th.charts;
    let diffeo = th.generator("diffeo").unwrap();
    let weyl = th.generator("weyl").unwrap();
    let both = combine(diffeo, weyl, "diffeo+weyl");
    for e in jc.field_entries("phi") {
        assert!(both.fiber_component(e.y).is_zero());
    }
    let j = momentum_map(jc, &both);
    let mut expect = DiffForm::zero(&jc.z, 1);
    for mu in 0..2 {
        let mut coeff = Expr::sym(jc.p).mul_ref(&both.base[mu]);
        for e in jc.field_entries("h") {
            coeff = coeff.add_ref(&Expr::sym(e.p[mu]).mul_ref(&both.fiber_component(e.y)));
        }
        expect = expect.add(&jc.dnx(&jc.z, mu).scale(&coeff)).unwrap();
    }
    for e in jc.variational_entries() {
        let dy = DiffForm::d_coord(&jc.z, e.y);
        for mu in 0..2 {
            for nu in 0..2 {
                if nu == mu {
                    continue;
                }
                let coeff = Expr::sym(e.p[mu]).mul_ref(&both.base[nu]).neg_ref();
                let term = wedge(&dy, &jc.dn1x(&jc.z, mu, nu)).unwrap().scale(&coeff);
                expect = expect.add(&term).unwrap();
            }
        }
    }
    assert!(form_vanishes(&j.sub(&expect).unwrap()));
}

// ----- criterion 5: Noether currents and the divergence identity -----

#[test]
fn criterion_5_noether() {
    criterion(5, "Noether currents and divergence identity", || {
        // the identity for every built-in generator; the curved case needs
        // the inverse-metric relation and falls back to the seeded oracle
        for entry in catalog() {
            let th = &entry.theory;
            for gen in &th.generators {
                let ident =
                    divergence_identity(&th.charts, &th.lagrangian, gen, &th.section_extras);
                if ident.residual.is_zero() || equal_symbolic(&ident.lhs, &ident.rhs) {
                    continue;
                }
                let plan = Plan::new(20, 1e-9, 7);
                let rep = numcheck::verify_identity(&ident.lhs, &ident.rhs, &plan).unwrap();
                assert!(
                    rep.pass,
                    "{}/{}: divergence identity, max deviation {}",
                    entry.key, gen.name, rep.max_deviation
                );
            }
        }

        // 20 randomized polynomial Lagrangians with random affine generators
        let spec = BundleSpec::new(2, vec![FieldSpec::scalar("f", 1, true)]).unwrap();
        let jc = jet_charts(&spec);
        let e = jc.entries[0].clone();
        let mut syms = vec![jc.x_sym(0), jc.x_sym(1), e.y];
        syms.extend(e.v.iter().copied());
        let mut r = rng(99);
        for k in 0..20 {
            let lag = LagrangianDensity::new(rand_poly(&mut r, &syms));
            let mut gen = GeneratorFamily::new(
                &format!("rand{k}"),
                (0..2)
                    .map(|_| rand_poly(&mut r, &[jc.x_sym(0), jc.x_sym(1)]))
                    .collect(),
            );
            gen.set_fiber(e.y, rand_poly(&mut r, &syms[..3]));
            let ident = divergence_identity(&jc, &lag, &gen, &HashMap::new());
            assert!(
                ident.residual.is_zero() || equal_symbolic(&ident.lhs, &ident.rhs),
                "instance {k}"
            );
        }

        on_shell_conservation();
        maxwell_converse_recovers_field_equations();
        string_converse_is_only_the_contracted_equation();
    });
}

fn on_shell_conservation() {
    // Maxwell on a linear potential: the field equations hold and the gauge
    // current is closed exactly
    let th = make_maxwell(false);
    let jc = &th.charts;
    let mut phi = SymbolicSection::default();
    let a: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
    for (nu, e) in a.iter().enumerate() {
        let mut comp = Expr::zero();
        for mu in 0..4 {
            let c = symbol::parameter(
                "clin",
                vec![IndexTag::down(nu as u8), IndexTag::down(mu as u8)],
            );
            comp = comp.add_ref(&Expr::sym(c).mul_ref(&Expr::sym(jc.x_sym(mu))));
        }
        phi.set(e.y, comp);
    }
    let sub = jc.prolong_section_2(&phi).substitution();
    for el in euler_lagrange(jc, &th.lagrangian) {
        assert!(el.substitute(&sub).is_zero());
    }
    let gauge = th.generator("gauge").unwrap();
    let current = noether_current(jc, &th.lagrangian, gauge, &phi);
    assert!(form_vanishes(&exterior_d(&current)));

    // Chern-Simons on a pure-gauge potential A = dψ
    let cs = make_chern_simons();
    let jcc = &cs.charts;
    let ac: Vec<_> = jcc.field_entries("A").into_iter().cloned().collect();
    let mut psi = Expr::zero();
    for mu in 0..3 {
        for nu in mu..3 {
            let c = symbol::parameter(
                "cpsi",
                vec![IndexTag::down(mu as u8), IndexTag::down(nu as u8)],
            );
            psi = psi.add_ref(
                &Expr::sym(c)
                    .mul_ref(&Expr::sym(jcc.x_sym(mu)))
                    .mul_ref(&Expr::sym(jcc.x_sym(nu))),
            );
        }
    }
    let mut flat = SymbolicSection::default();
    for (nu, e) in ac.iter().enumerate() {
        flat.set(e.y, psi.diff(jcc.x_sym(nu)));
    }
    let sub = jcc.prolong_section_2(&flat).substitution();
    for el in euler_lagrange(jcc, &cs.lagrangian) {
        assert!(el.substitute(&sub).is_zero());
    }
    let both = combine(
        cs.generator("gauge").unwrap(),
        cs.generator("diffeo").unwrap(),
        "gauge+diffeo",
    );
    let current = noether_current(jcc, &cs.lagrangian, &both, &flat);
    assert!(form_vanishes(&exterior_d(&current)));
}

fn maxwell_converse_recovers_field_equations() {
    // the divergence is linear in the jet data of χ: the second-jet
    // coefficients cancel and the χ_{,ν} coefficient is −δL/δA_ν ∘ j²A
    let th = make_maxwell(false);
    let jc = &th.charts;
    let chi = register_gauge_scalar(jc, "chi");
    let gauge = th.generator("gauge").unwrap();
    let ident = divergence_identity(&th.charts, &th.lagrangian, gauge, &th.section_extras);
    let lhs = &ident.lhs;
    assert!(lhs.diff(chi.value).is_zero());
    for mu in 0..4 {
        for nu in 0..4 {
            assert!(lhs.diff(chi.d2[mu][nu]).is_zero(), "χ_{{,{mu}{nu}}} survives");
        }
    }
    let phi = jc.generic_section();
    let sub = jc.prolong_section_2(&phi).substitution();
    let els = euler_lagrange(jc, &th.lagrangian);
    for nu in 0..4 {
        let coeff = lhs.diff(chi.d1[nu]);
        let el = els[nu].substitute(&sub).neg_ref();
        assert!(equal_symbolic(&coeff, &el), "ν={nu}");
    }
}

fn string_converse_is_only_the_contracted_equation() {
    // pointwise the parameters λ, a^ν, b^ν_ρ are free; their coefficients
    // involve only δL/δh, plus — for a^ν — the contracted combination
    // (δL/δφ^A) φ^A_{,ν}, not the full harmonic-map system
    let th = make_polyakov_string(3);
    let jc = &th.charts;
    let diffeo = th.generator("diffeo").unwrap();
    let weyl = th.generator("weyl").unwrap();
    let both = combine(diffeo, weyl, "diffeo+weyl");
    assert!(
        variation_of_l(jc, &th.lagrangian, &both)
            .substitute(&th.section_extras)
            .is_zero()
            || equal_symbolic(&variation_of_l(jc, &th.lagrangian, &both), &Expr::zero())
    );

    let ident = divergence_identity(jc, &th.lagrangian, &both, &th.section_extras);
    let at_origin: HashMap<_, _> = (0..2).map(|mu| (jc.x_sym(mu), Expr::zero())).collect();
    let lhs0 = ident.lhs.substitute(&at_origin);

    let mut phi = jc.generic_section();
    for (&k, v) in &th.section_extras {
        phi.comps.insert(k, v.clone());
    }
    let sub = jc.prolong_section_2(&phi).substitution();
    let els = euler_lagrange(jc, &th.lagrangian);
    let order: Vec<_> = jc.variational_entries().cloned().collect();
    let on_shell: Vec<Expr> = els
        .iter()
        .map(|e| e.substitute(&sub).substitute(&phi.comps))
        .collect();

    let lam = symbol::scalar_parameter("weyl");
    let b_sym = |tau: usize, nu: usize| {
        symbol::parameter("xib", vec![IndexTag::up(tau as u8), IndexTag::down(nu as u8)])
    };
    let a_sym = |nu: usize| symbol::parameter("xia", vec![IndexTag::up(nu as u8)]);

    let mut expected_lam = Expr::zero();
    for (e, el) in order.iter().zip(&on_shell) {
        let fib = both.fiber_component(e.y);
        let lie = fib.substitute(&phi.comps).diff(lam).neg_ref();
        expected_lam = expected_lam.add_ref(&el.mul_ref(&lie));
        if jc.field_entries("phi").iter().any(|p| p.y == e.y) {
            assert!(lie.is_zero());
        }
    }
    assert!(equal_symbolic(&lhs0.diff(lam), &expected_lam), "λ coefficient");

    for tau in 0..2 {
        for nu in 0..2 {
            let b = b_sym(tau, nu);
            let mut expected = Expr::zero();
            for (e, el) in order.iter().zip(&on_shell) {
                let lie = lie_derivative_of_section(jc, &both, &phi, e);
                let dlie = lie.substitute(&at_origin).diff(b);
                if jc.field_entries("phi").iter().any(|p| p.y == e.y) {
                    assert!(dlie.is_zero(), "φ enters the b-coefficient");
                }
                expected = expected.add_ref(&el.mul_ref(&dlie));
            }
            assert!(equal_symbolic(&lhs0.diff(b), &expected), "b^{tau}_{nu}");
        }
    }

    for nu in 0..2 {
        let a = a_sym(nu);
        let mut expected = Expr::zero();
        for (e, el) in order.iter().zip(&on_shell) {
            let lie = lie_derivative_of_section(jc, &both, &phi, e);
            let dlie = lie.substitute(&at_origin).diff(a);
            expected = expected.add_ref(&el.mul_ref(&dlie));
            if jc.field_entries("phi").iter().any(|p| p.y == e.y) {
                let comp = phi.comps[&e.y].clone();
                assert!(equal_symbolic(
                    &dlie,
                    &comp.diff(jc.x_sym(nu)).substitute(&at_origin)
                ));
            }
        }
        assert!(equal_symbolic(&lhs0.diff(a), &expected), "a^{nu}");
    }
}

// ----- criterion 6: bracket identity and equivariance -----

#[test]
fn criterion_6_brackets_and_equivariance() {
    criterion(6, "bracket identity and equivariance", || {
        let th = make_maxwell(false);
        let jc = &th.charts;
        let translation = |mu: usize| {
            let mut v = VectorField::zero(&jc.y);
            v.set(jc.x_sym(mu), Expr::one());
            v
        };
        let a = gauge_family(jc, "chi").on_y(jc);
        let b = gauge_family(jc, "chib").on_y(jc);
        let t0 = translation(0);
        let t1 = translation(1);

        // {J(ξ), J(ζ)} = d(ξ_Z ⨼ ζ_Z ⨼ Θ) + J([ζ, ξ]) exactly
        for (x, z) in [(&a, &b), (&t0, &t1), (&a, &t0), (&b, &t1)] {
            let res = bracket_identity_residual(jc, x, z).unwrap();
            assert!(form_vanishes(&res));
        }

        // £_{ζ_Z} J(ξ) = J([ζ, ξ]) for canonical lifts
        let theta = jc.canonical_theta();
        for (xi_y, zeta_y) in [(&a, &b), (&t0, &t1), (&a, &t1)] {
            let xi_z = jc.lift_vector_to_z(xi_y).unwrap();
            let zeta_z = jc.lift_vector_to_z(zeta_y).unwrap();
            let j_xi = interior(&xi_z, &theta).unwrap();
            let lhs = lie_derivative(&zeta_z, &j_xi).unwrap();
            let br_z = jc.lift_vector_to_z(&zeta_y.bracket(xi_y)).unwrap();
            let rhs = interior(&br_z, &theta).unwrap();
            assert!(form_vanishes(&lhs.sub(&rhs).unwrap()));
        }

        // Chern-Simons gauge cocycle: the defect is the closed form
        // 2 ε^{μνσ} χ_{,ν} χ'_{,σ} d²x_μ, witnessed numerically
        let cs = make_chern_simons();
        let jcc = &cs.charts;
        let g1 = gauge_family(jcc, "cschi");
        let g2 = gauge_family(jcc, "cschib");
        let chi1 = register_gauge_scalar(jcc, "cschi");
        let chi2 = register_gauge_scalar(jcc, "cschib");
        let res = lagrangian_equivariance_residual(jcc, &cs.lagrangian, &g1, &g2).unwrap();
        assert!(!form_vanishes(&res), "cocycle unexpectedly vanished");

        let mut expect = DiffForm::zero(&jcc.j1, 2);
        for mu in 0..3 {
            let mut coeff = Expr::zero();
            for nu in 0..3 {
                for sg in 0..3 {
                    let sign = epsilon_sign(&[mu, nu, sg]);
                    if sign != 0 {
                        let term = Expr::sym(chi1.d1[nu])
                            .mul_ref(&Expr::sym(chi2.d1[sg]))
                            .scale(&rat(2 * sign as i64, 1));
                        coeff = coeff.add_ref(&term);
                    }
                }
            }
            expect = expect.add(&jcc.dnx(&jcc.j1, mu).scale(&coeff)).unwrap();
        }
        assert!(form_vanishes(&res.sub(&expect).unwrap()));

        let coeff = res.terms.values().find(|c| !c.is_zero()).unwrap();
        let syms = coeff.symbols();
        let bind = numcheck::sample_point(&syms, 13, 0).unwrap();
        let value = coeff.eval(&bind).unwrap();
        assert!(value.abs() > 1e-6, "witness value {value}");
        println!("non-equivariance witness: |defect| = {} at a sampled point", value.abs());
    });
}

// ----- criterion 7: vertical transitivity -----

#[test]
fn criterion_7_transitivity() {
    criterion(7, "vertical transitivity", || {
        // electromagnetism acts transitively on its fiber directions
        for parametric in [false, true] {
            let th = make_maxwell(parametric);
            for seed in 0..10 {
                let rep = vertical_transitivity(&th.charts, &th.generators, 6, seed).unwrap();
                assert!(rep.transitive, "parametric={parametric} seed={seed}");
                assert_eq!(rep.rank, rep.fiber_dim);
                assert!(rep.witness.is_none());
            }
        }

        // the string's diffeomorphism and Weyl families miss exactly the
        // target directions φ^A, stably across seeds
        let th = make_polyakov_string(3);
        let jc = &th.charts;
        let gens: Vec<_> = th
            .generators
            .iter()
            .filter(|g| g.name != "translation")
            .cloned()
            .collect();
        let entries: Vec<_> = jc.variational_entries().cloned().collect();
        let phi_rows: Vec<usize> = entries
            .iter()
            .enumerate()
            .filter(|(_, e)| jc.field_entries("phi").iter().any(|p| p.y == e.y))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(phi_rows.len(), 3);
        for seed in 0..10 {
            let rep = vertical_transitivity(jc, &gens, 6, seed).unwrap();
            assert!(!rep.transitive, "seed={seed}");
            assert_eq!(rep.fiber_dim - rep.rank, 3, "seed={seed}");
            let w = rep.witness.as_ref().expect("witness direction");
            assert_eq!(w.len(), entries.len());
            let phi_mass: f64 = phi_rows.iter().map(|&i| w[i].abs()).sum();
            let h_mass: f64 = w
                .iter()
                .enumerate()
                .filter(|(i, _)| !phi_rows.contains(i))
                .map(|(_, v)| v.abs())
                .sum();
            assert!(phi_mass > 1e-6, "seed={seed}: witness has no φ component");
            assert!(h_mass < 1e-9 * (1.0 + phi_mass), "seed={seed}: witness leaks");
        }

        // restoring the target translations restores transitivity
        for seed in 0..10 {
            let rep = vertical_transitivity(jc, &th.generators, 6, seed).unwrap();
            assert!(rep.transitive, "seed={seed}");
        }
    });
}

// ----- criterion 8: numeric oracles -----

/// Symbols of `e` for which a difference quotient is a faithful oracle.
fn fd_symbols(e: &Expr) -> Vec<SymbolId> {
    let syms = e.symbols();
    syms.iter()
        .copied()
        .filter(|&s| {
            if symbol::symbol_data(s).kind == SymbolKind::BaseCoord {
                return false;
            }
            !syms.iter().any(|&a| {
                a != s
                    && symbol::diff_rule(a, s).is_some()
                    && !matches!(
                        symbol::symbol_data(a).kind,
                        SymbolKind::InverseMetric | SymbolKind::DerivedScalar
                    )
            })
        })
        .collect()
}

fn forms_equal_numeric(a: &DiffForm, b: &DiffForm, plan: &Plan, what: &str) {
    let diff = a.sub(b).unwrap();
    for (k, c) in &diff.terms {
        assert!(
            equal_numeric(c, &Expr::zero(), plan),
            "{what}: component {k:?} differs numerically"
        );
    }
}

#[test]
fn criterion_8_numeric_oracles() {
    criterion(8, "finite-difference and tight numeric oracles", || {
        // every pointwise derivative against a central difference quotient
        let plan = Plan::new(50, 1e-6, 11);
        for entry in catalog() {
            let jc = &entry.theory.charts;
            let leg = legendre(jc, &entry.theory.lagrangian);
            let mut exprs = vec![entry.theory.lagrangian.l.clone(), leg.hamiltonian.clone()];
            for e in jc.variational_entries() {
                for mu in 0..jc.dim() {
                    exprs.push(leg.momenta[&e.p[mu]].clone());
                }
            }
            for expr in &exprs {
                if expr.is_zero() {
                    continue;
                }
                for s in fd_symbols(expr) {
                    let rep = finite_difference_check(expr, s, &plan).unwrap();
                    assert!(
                        rep.pass,
                        "{}: ∂/∂{} deviates by {}",
                        entry.key, s, rep.max_deviation
                    );
                }
            }
        }

        // every exact equality replayed numerically at 1e-12
        let plan = Plan::new(20, 1e-12, 23);
        for entry in catalog() {
            let th = &entry.theory;
            let jc = &th.charts;

            let omega = jc.canonical_omega();
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
            forms_equal_numeric(&omega, &expect, &plan, &format!("{} Ω", entry.key));

            let direct = cartan_form(jc, &th.lagrangian);
            let pulled = cartan_form_via_pullback(jc, &th.lagrangian);
            forms_equal_numeric(&direct, &pulled, &plan, &format!("{} Θ_L", entry.key));

            for gen in &th.generators {
                let xi_z = jc.lift_vector_to_z(&gen.on_y(jc)).unwrap();
                let coord = momentum_map(jc, gen);
                let contraction = momentum_map_contraction(jc, &xi_z);
                forms_equal_numeric(
                    &coord,
                    &contraction,
                    &plan,
                    &format!("{}/{} J routes", entry.key, gen.name),
                );
                let dj = exterior_d(&contraction);
                let rhs = interior(&xi_z, &omega).unwrap();
                forms_equal_numeric(&dj, &rhs, &plan, &format!("{}/{} dJ", entry.key, gen.name));

                let ident = divergence_identity(jc, &th.lagrangian, gen, &th.section_extras);
                assert!(
                    equal_numeric(&ident.lhs, &ident.rhs, &plan),
                    "{}/{}: divergence identity",
                    entry.key,
                    gen.name
                );
            }
        }

        // flat electromagnetic equalities at the same tolerance
        let plan = Plan::new(20, 1e-12, 29);
        let th = make_maxwell(false);
        let jc = &th.charts;
        let gauge = th.generator("gauge").unwrap();
        assert!(equal_numeric(
            &variation_of_l(jc, &th.lagrangian, gauge),
            &Expr::zero(),
            &plan
        ));
        let a: Vec<_> = jc.field_entries("A").into_iter().cloned().collect();
        let eta = |mu: usize| if mu == 0 { rat(-1, 1) } else { rat(1, 1) };
        let els = euler_lagrange(jc, &th.lagrangian);
        for (nu, el) in els.iter().enumerate() {
            let mut expect = Expr::zero();
            for mu in 0..4 {
                let d = Expr::sym(a[mu].w[nu][mu]).sub_ref(&Expr::sym(a[nu].w[mu][mu]));
                expect = expect.sub_ref(&d.scale(&(eta(nu) * eta(mu))));
            }
            assert!(equal_numeric(el, &expect, &plan), "EL_{nu}");
        }
        let chib = gauge_family(jc, "chib");
        let res = bracket_identity_residual(jc, &gauge.on_y(jc), &chib.on_y(jc)).unwrap();
        forms_equal_numeric(&res, &DiffForm::zero(&jc.z, 3), &plan, "bracket identity");
    });
}

// ----- criterion 9: frontend -----

fn example(name: &str) -> &'static str {
    multiphase_cli::examples::find(name).expect("example exists")
}

fn catalog_theory(key: &str) -> Theory {
    catalog()
        .into_iter()
        .find(|e| e.key == key)
        .expect("catalog key")
        .theory
}

/// Structural agreement of an elaborated theory with a catalog entry.
fn assert_matches_catalog(et: &ElabTheory, expect: &Theory) {
    let jc = &et.theory.charts;
    assert_eq!(jc.z.coords, expect.charts.z.coords, "chart mismatch");
    assert!(
        equal_symbolic(&et.theory.lagrangian.l, &expect.lagrangian.l),
        "lagrangian mismatch"
    );
    assert_eq!(et.theory.metric, expect.metric);
    assert_eq!(et.theory.parametrized, expect.parametrized);
    assert_eq!(et.theory.generators.len(), expect.generators.len());
    for (g, e) in et.theory.generators.iter().zip(&expect.generators) {
        for (x, y) in g.base.iter().zip(&e.base) {
            assert!(equal_symbolic(x, y), "{}: base mismatch", g.name);
        }
        for entry in &jc.entries {
            assert!(
                equal_symbolic(&g.fiber_component(entry.y), &e.fiber_component(entry.y)),
                "{}: fiber mismatch",
                g.name
            );
        }
        let pa: HashSet<_> = g.jet_parameters.iter().copied().collect();
        let pb: HashSet<_> = e.jet_parameters.iter().copied().collect();
        assert_eq!(pa, pb, "{}: jet parameter mismatch", g.name);
    }
    let ka: HashSet<_> = et.theory.section_extras.keys().copied().collect();
    let kb: HashSet<_> = expect.section_extras.keys().copied().collect();
    assert_eq!(ka, kb, "section extras mismatch");
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multiphase"))
}

fn temp_theory(file: &str, src: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("multiphase-acceptance-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(file);
    std::fs::write(&p, src).unwrap();
    p
}

#[test]
fn criterion_9_frontend() {
    criterion(9, "frontend and end-to-end binary checks", || {
        let pairs = [
            ("mechanics.thy", "mechanics"),
            ("particle.thy", "relativistic-particle"),
            ("maxwell.thy", "maxwell"),
            ("chern_simons.thy", "chern-simons"),
            ("polyakov.thy", "string"),
        ];
        for (file, key) in pairs {
            let src = example(file);
            let doc = parse(src).unwrap_or_else(|d| panic!("{file}: {d:?}"));
            let et = elaborate(&doc).unwrap_or_else(|d| panic!("{file}: {d:?}"));
            assert_matches_catalog(&et, &catalog_theory(key));

            let p = temp_theory(file, src);
            let out = bin().args(["check", "--suite", "all"]).arg(&p).output().unwrap();
            assert!(
                out.status.success(),
                "{file}: exit {:?}\nstdout:\n{}\nstderr:\n{}",
                out.status.code(),
                String::from_utf8_lossy(&out.stdout),
                String::from_utf8_lossy(&out.stderr)
            );
        }

        // a flipped interior sign in the field-strength definition must make
        // the Noether suite fail with a diagnostic naming the broken identity
        let src = example("maxwell.thy").replace("- d(A[mu],nu)", "+ d(A[mu],nu)");
        assert_ne!(src, example("maxwell.thy"), "corruption must apply");
        let p = temp_theory("maxwell_corrupt.thy", &src);
        let out = bin().args(["check", "--suite", "noether"]).arg(&p).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "want verification-failure exit");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(
            stderr.contains("divergence identity"),
            "stderr should name the divergence identity:\n{stderr}"
        );
    });
}
