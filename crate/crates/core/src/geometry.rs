//! Charts and exterior calculus.
//!
//! A `DiffForm` is stored sparsely: wedge monomials are strictly increasing
//! tuples of coordinate positions, and the sign of any permuted insertion is
//! tracked by permutation parity. The orientation convention is
//! `vol = dx^0 ∧ dx^1 ∧ … ∧ dx^n`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::GeomError;
use crate::expr::Expr;
use crate::symbol::SymbolId;

/// An ordered coordinate system; base coordinates come first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    pub label: String,
    pub coords: Vec<SymbolId>,
}

impl Chart {
    pub fn new(label: &str, coords: Vec<SymbolId>) -> Self {
        let mut seen = std::collections::HashSet::new();
        for c in &coords {
            assert!(seen.insert(*c), "duplicate coordinate in chart {label}");
        }
        Chart {
            label: label.into(),
            coords,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn position(&self, s: SymbolId) -> Option<usize> {
        self.coords.iter().position(|&c| c == s)
    }
}

/// Exterior form with `Expr` coefficients on a chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffForm {
    pub chart: Chart,
    pub degree: usize,
    pub terms: BTreeMap<Vec<u8>, Expr>,
}

impl DiffForm {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        DiffForm {
            chart: chart.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: &Chart, e: Expr) -> Self {
        let mut f = DiffForm::zero(chart, 0);
        f.insert(vec![], e);
        f
    }

    /// The coordinate differential `d coord` as a 1-form.
    pub fn d_coord(chart: &Chart, s: SymbolId) -> Self {
        let pos = chart
            .position(s)
            .expect("coordinate not in chart") as u8;
        let mut f = DiffForm::zero(chart, 1);
        f.insert(vec![pos], Expr::one());
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff` on the wedge monomial given by `tuple` (any order, no
    /// repeats), folding in the permutation sign; drops zero results.
    pub fn insert(&mut self, mut tuple: Vec<u8>, coeff: Expr) {
        assert_eq!(tuple.len(), self.degree, "tuple length != form degree");
        if coeff.is_zero() {
            return;
        }
        // repeated index → zero
        let mut sorted = tuple.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return;
        }
        // bubble-sort parity
        let mut sign = 1i64;
        let n = tuple.len();
        for i in 0..n {
            for j in 0..n.saturating_sub(1 + i) {
                if tuple[j] > tuple[j + 1] {
                    tuple.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        let add = if sign == 1 { coeff } else { coeff.neg_ref() };
        let entry = self
            .terms
            .entry(tuple)
            .or_insert_with(Expr::zero);
        *entry = entry.add_ref(&add);
        // prune
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn add(&self, other: &DiffForm) -> Result<DiffForm, GeomError> {
        self.check_chart(&other.chart)?;
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.insert(t.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<DiffForm, GeomError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffForm {
        DiffForm {
            chart: self.chart.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.clone(), c.neg_ref()))
                .collect(),
        }
    }

    pub fn scale(&self, e: &Expr) -> DiffForm {
        let mut out = DiffForm::zero(&self.chart, self.degree);
        for (t, c) in &self.terms {
            out.insert(t.clone(), c.mul_ref(e));
        }
        out
    }

    fn check_chart(&self, other: &Chart) -> Result<(), GeomError> {
        if self.chart != *other {
            return Err(GeomError::ChartMismatch(
                self.chart.label.clone(),
                other.label.clone(),
            ));
        }
        Ok(())
    }
}

/// Graded-antisymmetric product.
pub fn wedge(a: &DiffForm, b: &DiffForm) -> Result<DiffForm, GeomError> {
    a.check_chart(&b.chart)?;
    let degree = a.degree + b.degree;
    let mut out = DiffForm::zero(&a.chart, degree);
    if degree > a.chart.dim() {
        return Ok(out);
    }
    for (ta, ca) in &a.terms {
        for (tb, cb) in &b.terms {
            let mut tuple = ta.clone();
            tuple.extend_from_slice(tb);
            out.insert(tuple, ca.mul_ref(cb));
        }
    }
    Ok(out)
}

/// Exterior derivative.
pub fn exterior_d(a: &DiffForm) -> DiffForm {
    let mut out = DiffForm::zero(&a.chart, a.degree + 1);
    if a.degree + 1 > a.chart.dim() {
        return out;
    }
    for (t, c) in &a.terms {
        for (i, &s) in a.chart.coords.iter().enumerate() {
            let dc = c.diff(s);
            if dc.is_zero() {
                continue;
            }
            let mut tuple = Vec::with_capacity(t.len() + 1);
            tuple.push(i as u8);
            tuple.extend_from_slice(t);
            out.insert(tuple, dc);
        }
    }
    out
}

/// Vector field on a chart; components aligned with the chart coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    pub chart: Chart,
    pub comps: Vec<Expr>,
}

impl VectorField {
    pub fn zero(chart: &Chart) -> Self {
        VectorField {
            chart: chart.clone(),
            comps: vec![Expr::zero(); chart.dim()],
        }
    }

    pub fn component(&self, s: SymbolId) -> Expr {
        match self.chart.position(s) {
            Some(i) => self.comps[i].clone(),
            None => Expr::zero(),
        }
    }

    pub fn set(&mut self, s: SymbolId, e: Expr) {
        let i = self.chart.position(s).expect("coordinate not in chart");
        self.comps[i] = e;
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.chart, other.chart);
        VectorField {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add_ref(b))
                .collect(),
        }
    }

    /// Lie bracket [v, w] of vector fields on the same chart.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.chart, other.chart);
        let mut comps = Vec::with_capacity(self.chart.dim());
        for k in 0..self.chart.dim() {
            let mut c = Expr::zero();
            for (i, &s) in self.chart.coords.iter().enumerate() {
                c = c.add_ref(&self.comps[i].mul_ref(&other.comps[k].diff(s)));
                c = c.sub_ref(&other.comps[i].mul_ref(&self.comps[k].diff(s)));
            }
            comps.push(c);
        }
        VectorField {
            chart: self.chart.clone(),
            comps,
        }
    }
}

/// Interior product `v ⨼ a`.
pub fn interior(v: &VectorField, a: &DiffForm) -> Result<DiffForm, GeomError> {
    if a.degree == 0 {
        return Err(GeomError::DegreeZero);
    }
    if v.chart != a.chart {
        return Err(GeomError::ChartMismatch(
            v.chart.label.clone(),
            a.chart.label.clone(),
        ));
    }
    let mut out = DiffForm::zero(&a.chart, a.degree - 1);
    for (t, c) in &a.terms {
        for (k, &idx) in t.iter().enumerate() {
            let comp = &v.comps[idx as usize];
            if comp.is_zero() {
                continue;
            }
            let mut rest: Vec<u8> = t.clone();
            rest.remove(k);
            let coeff = if k % 2 == 0 {
                c.mul_ref(comp)
            } else {
                c.mul_ref(comp).neg_ref()
            };
            out.insert(rest, coeff);
        }
    }
    Ok(out)
}

/// Cartan formula `£_v a = v ⨼ da + d(v ⨼ a)`.
pub fn lie_derivative(v: &VectorField, a: &DiffForm) -> Result<DiffForm, GeomError> {
    let first = interior(v, &exterior_d(a))?;
    if a.degree == 0 {
        return Ok(first);
    }
    let second = exterior_d(&interior(v, a)?);
    first.add(&second)
}

/// Smooth map between charts given by component expressions; the i-th
/// component is the i-th target coordinate written in source coordinates.
#[derive(Debug, Clone)]
pub struct ChartMap {
    pub source: Chart,
    pub target: Chart,
    pub comps: Vec<Expr>,
    pub inverse: Option<Vec<Expr>>,
}

impl ChartMap {
    pub fn new(source: &Chart, target: &Chart, comps: Vec<Expr>) -> Self {
        assert_eq!(comps.len(), target.dim(), "one component per target coordinate");
        ChartMap {
            source: source.clone(),
            target: target.clone(),
            comps,
            inverse: None,
        }
    }

    pub fn identity(chart: &Chart) -> Self {
        let comps: Vec<Expr> = chart.coords.iter().map(|&c| Expr::sym(c)).collect();
        ChartMap {
            source: chart.clone(),
            target: chart.clone(),
            comps: comps.clone(),
            inverse: Some(comps),
        }
    }

    pub fn with_inverse(mut self, inv: Vec<Expr>) -> Self {
        assert_eq!(inv.len(), self.source.dim());
        self.inverse = Some(inv);
        self
    }

    /// Substitution map sending each target coordinate to its component.
    pub fn substitution(&self) -> HashMap<SymbolId, Expr> {
        self.target
            .coords
            .iter()
            .zip(&self.comps)
            .map(|(&s, e)| (s, e.clone()))
            .collect()
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &ChartMap) -> ChartMap {
        assert_eq!(other.target, self.source, "charts do not compose");
        let sub = other.substitution_into_source();
        let comps: Vec<Expr> = self.comps.iter().map(|e| e.substitute(&sub)).collect();
        let inverse = match (&self.inverse, &other.inverse) {
            (Some(si), Some(_)) => {
                // (self ∘ other)^{-1} = other^{-1} ∘ self^{-1}
                let inv_sub: HashMap<SymbolId, Expr> = self
                    .target
                    .coords
                    .iter()
                    .zip(si)
                    .map(|(&s, e)| (s, e.clone()))
                    .collect();
                // si maps target coords of self back to source coords of self
                // = target coords of other; then apply other's inverse.
                let oth_inv = other.inverse.as_ref().unwrap();
                let mid_sub: HashMap<SymbolId, Expr> = self
                    .source
                    .coords
                    .iter()
                    .zip(oth_inv)
                    .map(|(&s, e)| (s, e.clone()))
                    .collect();
                Some(
                    self.source
                        .coords
                        .iter()
                        .zip(si)
                        .map(|(_, e)| e.substitute(&inv_sub).substitute(&mid_sub))
                        .collect::<Vec<_>>(),
                )
            }
            _ => None,
        };
        let mut m = ChartMap::new(&other.source, &self.target, comps);
        m.inverse = inverse;
        m
    }

    fn substitution_into_source(&self) -> HashMap<SymbolId, Expr> {
        self.substitution()
    }
}

/// Pullback of a form on the target of `m` to its source.
pub fn pullback(m: &ChartMap, a: &DiffForm) -> Result<DiffForm, GeomError> {
    if a.chart != m.target {
        return Err(GeomError::ChartMismatch(
            a.chart.label.clone(),
            m.target.label.clone(),
        ));
    }
    let sub = m.substitution();
    let mut out = DiffForm::zero(&m.source, a.degree);
    if a.degree > m.source.dim() {
        return Ok(out);
    }
    // Pulled-back coordinate differentials, computed once per target coord.
    let mut pulled_d: Vec<Option<DiffForm>> = vec![None; m.target.dim()];
    for (t, c) in &a.terms {
        let mut acc = DiffForm::scalar(&m.source, c.substitute(&sub));
        for &idx in t {
            let df = pulled_d[idx as usize].get_or_insert_with(|| {
                let comp = &m.comps[idx as usize];
                let mut f = DiffForm::zero(&m.source, 1);
                for (j, &s) in m.source.coords.iter().enumerate() {
                    let d = comp.diff(s);
                    if !d.is_zero() {
                        f.insert(vec![j as u8], d);
                    }
                }
                f
            });
            acc = wedge(&acc, df)?;
            if acc.is_zero() {
                break;
            }
        }
        if acc.degree == a.degree {
            out = out.add(&acc)?;
        }
    }
    Ok(out)
}

/// Pushforward of a vector field along a map with known inverse: the
/// components of `m_* v` on the target chart.
pub fn pushforward(m: &ChartMap, v: &VectorField) -> Result<VectorField, GeomError> {
    if v.chart != m.source {
        return Err(GeomError::ChartMismatch(
            v.chart.label.clone(),
            m.source.label.clone(),
        ));
    }
    let inv = m.inverse.as_ref().ok_or(GeomError::MissingInverse)?;
    // (m_* v)^k(target) = (∂ comps_k / ∂ source_j · v^j) ∘ m^{-1}
    let inv_sub: HashMap<SymbolId, Expr> = m
        .source
        .coords
        .iter()
        .zip(inv)
        .map(|(&s, e)| (s, e.clone()))
        .collect();
    let mut comps = Vec::with_capacity(m.target.dim());
    for k in 0..m.target.dim() {
        let mut c = Expr::zero();
        for (j, &s) in m.source.coords.iter().enumerate() {
            c = c.add_ref(&m.comps[k].diff(s).mul_ref(&v.comps[j]));
        }
        comps.push(c.substitute(&inv_sub));
    }
    Ok(VectorField {
        chart: m.target.clone(),
        comps,
    })
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for &i in t {
                write!(f, " ∧ d{}", self.chart.coords[i as usize])?;
            }
        }
        Ok(())
    }
}
