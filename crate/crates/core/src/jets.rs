//! Jet bundles and the multiphase space.
//!
//! From a bundle description this module builds the charts for Y, J¹Y, J²Y
//! and Z, the canonical forms Θ and Ω on Z, jet prolongations of sections,
//! vector fields and automorphisms, and the canonical lifts to Z.
//!
//! Parametric (non-variational) fields contribute fiber coordinates but no
//! multivelocities and no multimomenta; their dependence on the base is
//! carried by registered jet parameters `u_{,μ}` so that differentiation
//! with respect to `x^μ` picks up the chain terms automatically.

use std::collections::HashMap;

use crate::error::JetError;
use crate::expr::Expr;
use crate::geometry::{interior, wedge, Chart, ChartMap, DiffForm, VectorField};
use crate::symbol::{self, IndexTag, SymbolData, SymbolId, SymbolKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexStructure {
    /// Scalar or scalar multiplet into a target of the given dimension.
    Scalar { target_dim: usize },
    /// One lower base index (e.g. an electromagnetic potential A_ν).
    Covector,
    /// Two symmetric lower base indices (a metric-type field).
    Sym2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub name: String,
    pub structure: IndexStructure,
    pub variational: bool,
}

impl FieldSpec {
    pub fn scalar(name: &str, target_dim: usize, variational: bool) -> Self {
        FieldSpec {
            name: name.into(),
            structure: IndexStructure::Scalar { target_dim },
            variational,
        }
    }
    pub fn covector(name: &str, variational: bool) -> Self {
        FieldSpec {
            name: name.into(),
            structure: IndexStructure::Covector,
            variational,
        }
    }
    pub fn sym2(name: &str, variational: bool) -> Self {
        FieldSpec {
            name: name.into(),
            structure: IndexStructure::Sym2,
            variational,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleSpec {
    /// Dimension n+1 of the base space X.
    pub base_dim: usize,
    pub fields: Vec<FieldSpec>,
}

impl BundleSpec {
    pub fn new(base_dim: usize, fields: Vec<FieldSpec>) -> Result<Self, JetError> {
        let mut names = std::collections::HashSet::new();
        for f in &fields {
            if !names.insert(f.name.clone()) {
                return Err(JetError::DuplicateFieldName(f.name.clone()));
            }
        }
        assert!(
            fields.iter().any(|f| f.variational),
            "bundle needs at least one variational field"
        );
        assert!((1..=4).contains(&base_dim), "base dimension must be 1..=4");
        Ok(BundleSpec { base_dim, fields })
    }

    /// Component multi-indices of a field, in chart order.
    pub fn components(&self, f: &FieldSpec) -> Vec<Vec<IndexTag>> {
        match f.structure {
            IndexStructure::Scalar { target_dim } => {
                if target_dim == 1 {
                    vec![vec![]]
                } else {
                    (0..target_dim).map(|a| vec![IndexTag::up(a as u8)]).collect()
                }
            }
            IndexStructure::Covector => (0..self.base_dim)
                .map(|nu| vec![IndexTag::down(nu as u8)])
                .collect(),
            IndexStructure::Sym2 => {
                let mut out = Vec::new();
                for s in 0..self.base_dim {
                    for r in s..self.base_dim {
                        out.push(vec![IndexTag::down(s as u8), IndexTag::down(r as u8)]);
                    }
                }
                out
            }
        }
    }
}

/// Per-component symbol bookkeeping for one fiber coordinate.
#[derive(Debug, Clone)]
pub struct FiberEntry {
    pub field: usize,
    pub comp: Vec<IndexTag>,
    pub variational: bool,
    pub y: SymbolId,
    /// v^A_μ, indexed by μ (empty for parametric fields).
    pub v: Vec<SymbolId>,
    /// w^A_{μν}, indexed by (μ, ν) (empty for parametric fields).
    pub w: Vec<Vec<SymbolId>>,
    /// p_A^μ, indexed by μ (empty for parametric fields).
    pub p: Vec<SymbolId>,
    /// x-jet parameters u_{,μ} (parametric fields only).
    pub xjet: Vec<SymbolId>,
    /// Section-value twin symbol for parametric fields: a free parameter
    /// `u~` standing for the field evaluated along a section, with the
    /// registered chain ∂u~/∂x^μ = u_{,μ}. The fiber coordinate itself
    /// stays an independent chart symbol, so partial derivatives on Y,
    /// J¹Y and Z are unaffected.
    pub section_sym: Option<SymbolId>,
}

/// The charts of a bundle: X, Y, J¹Y, J²Y and Z, plus symbol tables.
#[derive(Debug, Clone)]
pub struct JetCharts {
    pub spec: BundleSpec,
    pub x: Chart,
    pub y: Chart,
    pub j1: Chart,
    pub j2: Chart,
    pub z: Chart,
    pub entries: Vec<FiberEntry>,
    /// The covariant Hamiltonian coordinate p on Z.
    pub p: SymbolId,
}

fn sym2_sorted(comp: &[IndexTag]) -> Vec<IndexTag> {
    let mut c = comp.to_vec();
    if c.len() == 2 && c[0].value > c[1].value {
        c.swap(0, 1);
    }
    c
}

impl JetCharts {
    pub fn x_sym(&self, mu: usize) -> SymbolId {
        self.x.coords[mu]
    }

    pub fn dim(&self) -> usize {
        self.spec.base_dim
    }

    pub fn entry(&self, field_name: &str, comp: &[IndexTag]) -> &FiberEntry {
        let fidx = self
            .spec
            .fields
            .iter()
            .position(|f| f.name == field_name)
            .expect("unknown field");
        let is_sym2 = matches!(self.spec.fields[fidx].structure, IndexStructure::Sym2);
        let comp = if is_sym2 { sym2_sorted(comp) } else { comp.to_vec() };
        self.entries
            .iter()
            .find(|e| e.field == fidx && e.comp == comp)
            .expect("unknown field component")
    }

    pub fn field_entries(&self, field_name: &str) -> Vec<&FiberEntry> {
        let fidx = self
            .spec
            .fields
            .iter()
            .position(|f| f.name == field_name)
            .expect("unknown field");
        self.entries.iter().filter(|e| e.field == fidx).collect()
    }

    pub fn variational_entries(&self) -> impl Iterator<Item = &FiberEntry> {
        self.entries.iter().filter(|e| e.variational)
    }

    pub fn parametric_entries(&self) -> impl Iterator<Item = &FiberEntry> {
        self.entries.iter().filter(|e| !e.variational)
    }

    /// Volume form dⁿ⁺¹x on any chart whose first n+1 coordinates are x^μ.
    pub fn volume(&self, chart: &Chart) -> DiffForm {
        let mut f = DiffForm::zero(chart, self.dim());
        f.insert((0..self.dim() as u8).collect(), Expr::one());
        f
    }

    /// dⁿx_μ = ∂_μ ⨼ dⁿ⁺¹x.
    pub fn dnx(&self, chart: &Chart, mu: usize) -> DiffForm {
        let mut v = VectorField::zero(chart);
        v.comps[mu] = Expr::one();
        interior(&v, &self.volume(chart)).expect("volume contraction")
    }

    /// dⁿ⁻¹x_{μν} = ∂_ν ⨼ ∂_μ ⨼ dⁿ⁺¹x.
    pub fn dn1x(&self, chart: &Chart, mu: usize, nu: usize) -> DiffForm {
        let mut v = VectorField::zero(chart);
        v.comps[nu] = Expr::one();
        interior(&v, &self.dnx(chart, mu)).expect("volume contraction")
    }

    /// Total derivative D_μ of an expression in J¹Y symbols; the result
    /// lives on J²Y. Registered rules supply parametric-field and jet-
    /// parameter chain terms through the explicit ∂/∂x^μ part.
    pub fn total_derivative(&self, e: &Expr, mu: usize) -> Expr {
        let mut out = e.diff(self.x_sym(mu));
        for entry in self.parametric_entries() {
            out = out.add_ref(&Expr::sym(entry.xjet[mu]).mul_ref(&e.diff(entry.y)));
        }
        for entry in self.variational_entries() {
            out = out.add_ref(&Expr::sym(entry.v[mu]).mul_ref(&e.diff(entry.y)));
            for nu in 0..self.dim() {
                out = out.add_ref(&Expr::sym(entry.w[mu][nu]).mul_ref(&e.diff(entry.v[nu])));
            }
        }
        out
    }

    /// First jet prolongation of a section as a chart map X → J¹Y.
    pub fn prolong_section(&self, phi: &SymbolicSection) -> ChartMap {
        let mut comps = Vec::with_capacity(self.j1.dim());
        for &c in &self.j1.coords {
            comps.push(self.section_value(phi, c));
        }
        ChartMap::new(&self.x, &self.j1, comps)
    }

    fn section_value(&self, phi: &SymbolicSection, coord: SymbolId) -> Expr {
        if self.x.coords.contains(&coord) {
            return Expr::sym(coord);
        }
        for entry in &self.entries {
            if entry.y == coord {
                return phi.comps.get(&coord).cloned().unwrap_or_else(|| Expr::sym(coord));
            }
            if let Some(mu) = entry.v.iter().position(|&v| v == coord) {
                let base = phi
                    .comps
                    .get(&entry.y)
                    .cloned()
                    .unwrap_or_else(|| Expr::sym(entry.y));
                return base.diff(self.x_sym(mu));
            }
        }
        panic!("coordinate not in J1Y chart");
    }

    /// Extends a prolonged section to J²Y (second jets by differentiation).
    pub fn prolong_section_2(&self, phi: &SymbolicSection) -> ChartMap {
        let mut comps = Vec::with_capacity(self.j2.dim());
        for &c in &self.j2.coords {
            let mut val = None;
            for entry in &self.entries {
                for mu in 0..entry.w.len() {
                    for nu in mu..self.dim() {
                        if entry.w[mu][nu] == c {
                            let base = phi
                                .comps
                                .get(&entry.y)
                                .cloned()
                                .unwrap_or_else(|| Expr::sym(entry.y));
                            val = Some(base.diff(self.x_sym(mu)).diff(self.x_sym(nu)));
                        }
                    }
                }
            }
            comps.push(val.unwrap_or_else(|| self.section_value(phi, c)));
        }
        ChartMap::new(&self.x, &self.j2, comps)
    }

    fn check_projectable(&self, v: &VectorField) -> Result<(), JetError> {
        for mu in 0..self.dim() {
            let comp = &v.comps[mu];
            for entry in &self.entries {
                if comp.depends_on(entry.y) {
                    return Err(JetError::NotProjectable(format!("{}", entry.y)));
                }
            }
        }
        Ok(())
    }

    /// Jet prolongation j¹V of a projectable vector field on Y.
    pub fn prolong_vector(&self, v: &VectorField) -> Result<VectorField, JetError> {
        assert_eq!(v.chart, self.y, "vector field must live on Y");
        self.check_projectable(v)?;
        let mut out = VectorField::zero(&self.j1);
        for mu in 0..self.dim() {
            out.comps[mu] = v.comps[mu].clone();
        }
        for entry in &self.entries {
            let pos = self.y.position(entry.y).unwrap();
            out.set(entry.y, v.comps[pos].clone());
        }
        for entry in self.variational_entries() {
            let pos = self.y.position(entry.y).unwrap();
            let va = &v.comps[pos];
            for mu in 0..self.dim() {
                // ∂_μ V^A (with registered parametric chains) + ∂_B V^A v^B_μ
                // − v^A_ν ∂_μ V^ν
                let mut c = va.diff(self.x_sym(mu));
                for other in self.variational_entries() {
                    let opos = self.y.position(other.y).unwrap();
                    let _ = opos;
                    c = c.add_ref(&va.diff(other.y).mul_ref(&Expr::sym(other.v[mu])));
                }
                for nu in 0..self.dim() {
                    c = c.sub_ref(
                        &Expr::sym(entry.v[nu]).mul_ref(&v.comps[nu].diff(self.x_sym(mu))),
                    );
                }
                out.set(entry.v[mu], c);
            }
        }
        Ok(out)
    }

    /// Jet prolongation of a bundle automorphism η_Y (with inverse) covering
    /// the base map given by its first n+1 components.
    pub fn prolong_automorphism(&self, eta: &ChartMap) -> Result<ChartMap, JetError> {
        assert_eq!(eta.source, self.y);
        assert_eq!(eta.target, self.y);
        let inv = eta
            .inverse
            .as_ref()
            .expect("automorphism needs an inverse")
            .clone();
        let fwd = self.prolong_one_way(&eta.comps, &inv);
        let bwd = self.prolong_one_way(&inv, &eta.comps);
        Ok(ChartMap::new(&self.j1, &self.j1, fwd).with_inverse(bwd))
    }

    fn prolong_one_way(&self, comps: &[Expr], inv: &[Expr]) -> Vec<Expr> {
        let n1 = self.dim();
        // K^ν_μ = ∂_μ(η_X^{-1})^ν evaluated at η_X(x)
        let base_sub: HashMap<SymbolId, Expr> = self
            .x
            .coords
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, comps[i].clone()))
            .collect();
        let mut k = vec![vec![Expr::zero(); n1]; n1];
        for nu in 0..n1 {
            for mu in 0..n1 {
                k[nu][mu] = inv[nu].diff(self.x_sym(mu)).substitute(&base_sub);
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(self.j1.dim());
        for &c in &self.j1.coords {
            let pos_y = self.y.position(c);
            if let Some(p) = pos_y {
                out.push(comps[p].clone());
                continue;
            }
            // velocity coordinate: find entry and μ
            let mut val = None;
            for entry in self.variational_entries() {
                if let Some(mu) = entry.v.iter().position(|&v| v == c) {
                    let ypos = self.y.position(entry.y).unwrap();
                    let eta_a = &comps[ypos];
                    let mut acc = Expr::zero();
                    for nu in 0..n1 {
                        // ∂_ν η^A + ∂_B η^A v^B_ν
                        let mut dnu = eta_a.diff(self.x_sym(nu));
                        for other in self.variational_entries() {
                            dnu = dnu.add_ref(
                                &eta_a.diff(other.y).mul_ref(&Expr::sym(other.v[nu])),
                            );
                        }
                        acc = acc.add_ref(&dnu.mul_ref(&k[nu][mu]));
                    }
                    val = Some(acc);
                }
            }
            out.push(val.expect("J1Y coordinate"));
        }
        out
    }

    /// Canonical (n+1)-form Θ = p_A^μ dy^A ∧ dⁿx_μ + p dⁿ⁺¹x on Z.
    pub fn canonical_theta(&self) -> DiffForm {
        let mut theta = self.volume(&self.z).scale(&Expr::sym(self.p));
        for entry in self.variational_entries() {
            let dy = DiffForm::d_coord(&self.z, entry.y);
            for mu in 0..self.dim() {
                let term = wedge(&dy, &self.dnx(&self.z, mu))
                    .expect("theta wedge")
                    .scale(&Expr::sym(entry.p[mu]));
                theta = theta.add(&term).expect("theta add");
            }
        }
        theta
    }

    /// Ω = −dΘ on Z.
    pub fn canonical_omega(&self) -> DiffForm {
        crate::geometry::exterior_d(&self.canonical_theta()).neg()
    }

    /// Canonical lift of a projectable vector field on Y to Z.
    pub fn lift_vector_to_z(&self, v: &VectorField) -> Result<VectorField, JetError> {
        assert_eq!(v.chart, self.y, "vector field must live on Y");
        self.check_projectable(v)?;
        let n1 = self.dim();
        let mut out = VectorField::zero(&self.z);
        for mu in 0..n1 {
            out.comps[mu] = v.comps[mu].clone();
        }
        for entry in &self.entries {
            let pos = self.y.position(entry.y).unwrap();
            out.set(entry.y, v.comps[pos].clone());
        }
        // divergence ∂_ν V^ν
        let mut div = Expr::zero();
        for nu in 0..n1 {
            div = div.add_ref(&v.comps[nu].diff(self.x_sym(nu)));
        }
        // p-component: −p ∂_νV^ν − p_B^ν ∂_νV^B
        let mut pc = Expr::sym(self.p).mul_ref(&div).neg_ref();
        for entry in self.variational_entries() {
            let pos = self.y.position(entry.y).unwrap();
            for nu in 0..n1 {
                pc = pc.sub_ref(
                    &Expr::sym(entry.p[nu]).mul_ref(&v.comps[pos].diff(self.x_sym(nu))),
                );
            }
        }
        out.set(self.p, pc);
        // momentum components: p_A^ν ∂_νV^μ − p_B^μ ∂_AV^B − p_A^μ ∂_νV^ν
        for entry in self.variational_entries() {
            for mu in 0..n1 {
                let mut c = Expr::zero();
                for nu in 0..n1 {
                    c = c.add_ref(
                        &Expr::sym(entry.p[nu]).mul_ref(&v.comps[mu].diff(self.x_sym(nu))),
                    );
                }
                for other in self.variational_entries() {
                    let opos = self.y.position(other.y).unwrap();
                    c = c.sub_ref(
                        &Expr::sym(other.p[mu]).mul_ref(&v.comps[opos].diff(entry.y)),
                    );
                }
                c = c.sub_ref(&Expr::sym(entry.p[mu]).mul_ref(&div));
                out.set(entry.p[mu], c);
            }
        }
        Ok(out)
    }

    /// Canonical lift of a bundle automorphism to Z: η_Z(z) = (η_Y^{-1})*z.
    pub fn lift_automorphism_to_z(&self, eta: &ChartMap) -> Result<ChartMap, JetError> {
        assert_eq!(eta.source, self.y);
        assert_eq!(eta.target, self.y);
        let inv = eta
            .inverse
            .as_ref()
            .expect("automorphism needs an inverse")
            .clone();
        let fwd = self.lift_one_way(&eta.comps, &inv);
        let bwd = self.lift_one_way(&inv, &eta.comps);
        Ok(ChartMap::new(&self.z, &self.z, fwd).with_inverse(bwd))
    }

    fn lift_one_way(&self, comps: &[Expr], inv: &[Expr]) -> Vec<Expr> {
        let n1 = self.dim();
        let eta_sub: HashMap<SymbolId, Expr> = self
            .y
            .coords
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, comps[i].clone()))
            .collect();
        // Jacobian of the base map and its determinant
        let mut jac = vec![vec![Expr::zero(); n1]; n1];
        for nu in 0..n1 {
            for mu in 0..n1 {
                jac[nu][mu] = comps[nu].diff(self.x_sym(mu));
            }
        }
        let jdet = det(&jac);
        let jinv = jdet.pow(-1);
        let vents: Vec<&FiberEntry> = self.variational_entries().collect();
        let mut out = Vec::with_capacity(self.z.dim());
        for &c in &self.z.coords {
            if let Some(pos) = self.y.position(c) {
                out.push(comps[pos].clone());
                continue;
            }
            if c == self.p {
                // (p + ∂_ν(η^{-1})^A p_A^μ ∂_μ η_X^ν) J^{-1}
                let mut acc = Expr::sym(self.p);
                for entry in &vents {
                    let ypos = self.y.position(entry.y).unwrap();
                    for nu in 0..n1 {
                        let dinv = inv[ypos].diff(self.x_sym(nu)).substitute(&eta_sub);
                        if dinv.is_zero() {
                            continue;
                        }
                        for mu in 0..n1 {
                            acc = acc.add_ref(
                                &dinv
                                    .mul_ref(&Expr::sym(entry.p[mu]))
                                    .mul_ref(&jac[nu][mu]),
                            );
                        }
                    }
                }
                out.push(acc.mul_ref(&jinv));
                continue;
            }
            // momentum coordinate p_A^μ
            let mut val = None;
            for entry in &vents {
                if let Some(mu) = entry.p.iter().position(|&pm| pm == c) {
                    let mut acc = Expr::zero();
                    for other in &vents {
                        let opos = self.y.position(other.y).unwrap();
                        let dinv = inv[opos].diff(entry.y).substitute(&eta_sub);
                        if dinv.is_zero() {
                            continue;
                        }
                        for nu in 0..n1 {
                            acc = acc.add_ref(
                                &dinv
                                    .mul_ref(&Expr::sym(other.p[nu]))
                                    .mul_ref(&jac[mu][nu]),
                            );
                        }
                    }
                    val = Some(acc.mul_ref(&jinv));
                }
            }
            out.push(val.expect("Z coordinate"));
        }
        out
    }

    /// A fully generic symbolic section: each variational fiber coordinate
    /// becomes an independent jet-parameter symbol `u` with registered
    /// x-derivative chains `∂u/∂x^μ = u_{,μ}`, `∂u_{,μ}/∂x^ν = u_{,μν}`
    /// (symmetric) and the chain truncated at second order. Parametric
    /// fields keep their own fiber symbols, whose jets are already wired.
    pub fn generic_section(&self) -> SymbolicSection {
        let mut phi = SymbolicSection::default();
        for entry in self.variational_entries() {
            let f = &self.spec.fields[entry.field];
            let name = format!("{}~", f.name);
            let u = symbol::parameter(&name, entry.comp.clone());
            for mu in 0..self.dim() {
                let mut i1 = entry.comp.clone();
                i1.push(IndexTag::down(mu as u8));
                let u1 = symbol::parameter(&name, i1.clone());
                symbol::register_diff_rule(u, self.x_sym(mu), Expr::sym(u1));
                for nu in 0..self.dim() {
                    let mut i2 = i1.clone();
                    i2.push(IndexTag::down(nu as u8));
                    let u2 = symbol::intern_symmetric_tail(
                        SymbolData {
                            kind: SymbolKind::Parameter,
                            name: name.clone(),
                            indices: i2,
                        },
                        2,
                    );
                    symbol::register_diff_rule(u1, self.x_sym(nu), Expr::sym(u2));
                }
            }
            phi.set(entry.y, Expr::sym(u));
        }
        for entry in self.parametric_entries() {
            phi.set(entry.y, Expr::sym(entry.section_sym.unwrap()));
        }
        phi
    }

    /// The affine dual pairing p + p_A^μ v^A_μ as an expression over the
    /// combined Z and J¹Y symbols.
    pub fn dual_pairing(&self) -> Expr {
        let mut acc = Expr::sym(self.p);
        for entry in self.variational_entries() {
            for mu in 0..self.dim() {
                acc = acc.add_ref(&Expr::sym(entry.p[mu]).mul_ref(&Expr::sym(entry.v[mu])));
            }
        }
        acc
    }
}

/// Symbolic section of Y → X: an expression in base coordinates for each
/// fiber coordinate (missing entries mean "keep the fiber symbol", which is
/// how parametric background fields are carried along).
#[derive(Debug, Clone, Default)]
pub struct SymbolicSection {
    pub comps: HashMap<SymbolId, Expr>,
}

impl SymbolicSection {
    pub fn set(&mut self, y: SymbolId, e: Expr) {
        self.comps.insert(y, e);
    }
}

/// Determinant by Laplace expansion (small symbolic matrices only).
pub fn det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 0 {
        return Expr::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Expr::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Expr>> = (1..n)
            .map(|i| {
                (0..n)
                    .filter(|&k| k != j)
                    .map(|k| m[i][k].clone())
                    .collect()
            })
            .collect();
        let cof = m[0][j].mul_ref(&det(&minor));
        acc = if j % 2 == 0 {
            acc.add_ref(&cof)
        } else {
            acc.sub_ref(&cof)
        };
    }
    acc
}

/// Builds all charts and registers the parametric-field jet rules.
pub fn jet_charts(spec: &BundleSpec) -> JetCharts {
    let n1 = spec.base_dim;
    let x_syms: Vec<SymbolId> = (0..n1).map(|mu| symbol::base_coord(mu as u8)).collect();

    let mut entries: Vec<FiberEntry> = Vec::new();
    for (fidx, f) in spec.fields.iter().enumerate() {
        let fiber_kind = match f.structure {
            IndexStructure::Sym2 => SymbolKind::Metric,
            _ => SymbolKind::FiberCoord,
        };
        for comp in spec.components(f) {
            let y = symbol::intern(SymbolData {
                kind: fiber_kind,
                name: f.name.clone(),
                indices: comp.clone(),
            });
            let mut entry = FiberEntry {
                field: fidx,
                comp: comp.clone(),
                variational: f.variational,
                y,
                v: vec![],
                w: vec![],
                p: vec![],
                xjet: vec![],
                section_sym: None,
            };
            if f.variational {
                for mu in 0..n1 {
                    let mut vi = comp.clone();
                    vi.push(IndexTag::down(mu as u8));
                    entry.v.push(symbol::intern(SymbolData {
                        kind: SymbolKind::MultiVelocity,
                        name: f.name.clone(),
                        indices: vi,
                    }));
                }
                for mu in 0..n1 {
                    let mut row = Vec::new();
                    for nu in 0..n1 {
                        let mut wi = comp.clone();
                        wi.push(IndexTag::down(mu as u8));
                        wi.push(IndexTag::down(nu as u8));
                        row.push(symbol::intern(SymbolData {
                            kind: SymbolKind::SecondVelocity,
                            name: f.name.clone(),
                            indices: wi,
                        }));
                    }
                    entry.w.push(row);
                }
                for mu in 0..n1 {
                    let mut pi: Vec<IndexTag> = comp
                        .iter()
                        .map(|t| IndexTag {
                            value: t.value,
                            up: !t.up,
                        })
                        .collect();
                    pi.push(IndexTag::up(mu as u8));
                    entry.p.push(symbol::intern(SymbolData {
                        kind: SymbolKind::MultiMomentum,
                        name: f.name.clone(),
                        indices: pi,
                    }));
                }
            } else {
                // Section-value twin u~ and its x-jet parameters u_{,μ},
                // u_{,μν}, chained by registered rules and truncated at
                // second order.
                let pname = format!("{}~", f.name);
                // Sym2 twins keep the metric kind so numeric sampling draws
                // them as nondegenerate Lorentzian matrices and binds the
                // twin inverse/determinant symbols consistently.
                let u0 = if matches!(f.structure, IndexStructure::Sym2) {
                    symbol::intern(SymbolData {
                        kind: SymbolKind::Metric,
                        name: pname.clone(),
                        indices: comp.clone(),
                    })
                } else {
                    symbol::parameter(&pname, comp.clone())
                };
                entry.section_sym = Some(u0);
                for mu in 0..n1 {
                    let mut i1 = comp.clone();
                    i1.push(IndexTag::down(mu as u8));
                    let u1 = symbol::parameter(&pname, i1.clone());
                    symbol::register_diff_rule(u0, x_syms[mu], Expr::sym(u1));
                    for nu in 0..n1 {
                        let mut i2 = i1.clone();
                        i2.push(IndexTag::down(nu as u8));
                        let u2 = symbol::intern_symmetric_tail(
                            SymbolData {
                                kind: SymbolKind::Parameter,
                                name: pname.clone(),
                                indices: i2,
                            },
                            2,
                        );
                        symbol::register_diff_rule(u1, x_syms[nu], Expr::sym(u2));
                    }
                    entry.xjet.push(u1);
                }
            }
            entries.push(entry);
        }
    }

    let p = symbol::intern(SymbolData {
        kind: SymbolKind::CovariantHamiltonian,
        name: "p".into(),
        indices: vec![],
    });

    let x = Chart::new("X", x_syms.clone());
    let mut y_coords = x_syms.clone();
    y_coords.extend(entries.iter().map(|e| e.y));
    let y = Chart::new("Y", y_coords.clone());

    let mut j1_coords = y_coords.clone();
    for e in &entries {
        j1_coords.extend(e.v.iter().copied());
    }
    let j1 = Chart::new("J1Y", j1_coords.clone());

    let mut j2_coords = j1_coords.clone();
    for e in &entries {
        for mu in 0..e.w.len() {
            for nu in mu..n1 {
                j2_coords.push(e.w[mu][nu]);
            }
        }
    }
    let j2 = Chart::new("J2Y", j2_coords);

    let mut z_coords = y_coords;
    z_coords.push(p);
    for e in &entries {
        z_coords.extend(e.p.iter().copied());
    }
    let z = Chart::new("Z", z_coords);

    JetCharts {
        spec: spec.clone(),
        x,
        y,
        j1,
        j2,
        z,
        entries,
        p,
    }
}
