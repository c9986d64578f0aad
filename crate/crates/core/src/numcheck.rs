//! Numeric oracles: deterministic sampling of chart points, identity
//! verification, and central finite-difference checks of symbolic
//! derivatives.
//!
//! Metric-kind symbols are sampled as LᵀηL with a well-conditioned L and
//! η = diag(−1, 1, …, 1), so determinants stay negative and square roots
//! of −det g stay real. Inverse-metric and √−det-g symbols of the same
//! family are bound to the exact numeric inverse and determinant, keeping
//! the registered differentiation rules and the samples consistent.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{EvalError, SampleError};
use crate::expr::Expr;
use crate::symbol::{self, SymbolData, SymbolId, SymbolKind};

/// A deterministic verification plan.
#[derive(Debug, Clone, Copy)]
pub struct Plan {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Plan {
    pub fn new(samples: usize, tol: f64, seed: u64) -> Self {
        Plan { samples, tol, seed }
    }
}

impl Default for Plan {
    fn default() -> Self {
        Plan {
            samples: 20,
            tol: 1e-9,
            seed: 7,
        }
    }
}

/// Outcome of a numeric comparison.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub pass: bool,
    pub samples_run: usize,
    pub max_deviation: f64,
}

/// One metric family appearing in a symbol set.
#[derive(Debug, Clone)]
struct MetricFamily {
    name: String,
    dim: usize,
    has_inverse: bool,
    has_sqrtdet: bool,
}

fn metric_families(symbols: &[SymbolId]) -> Vec<MetricFamily> {
    let mut fams: HashMap<String, MetricFamily> = HashMap::new();
    for &s in symbols {
        let d = symbol::symbol_data(s);
        match d.kind {
            SymbolKind::Metric | SymbolKind::InverseMetric => {
                let dim_seen = d
                    .indices
                    .iter()
                    .rev()
                    .take(2)
                    .map(|t| t.value as usize + 1)
                    .max()
                    .unwrap_or(1);
                let fam = fams.entry(d.name.clone()).or_insert(MetricFamily {
                    name: d.name.clone(),
                    dim: 0,
                    has_inverse: false,
                    has_sqrtdet: false,
                });
                fam.dim = fam.dim.max(dim_seen.max(2));
                if d.kind == SymbolKind::InverseMetric {
                    fam.has_inverse = true;
                }
            }
            SymbolKind::DerivedScalar => {
                if let Some(name) = d.name.strip_prefix("sdet:") {
                    let fam = fams.entry(name.to_string()).or_insert(MetricFamily {
                        name: name.to_string(),
                        dim: 0,
                        has_inverse: false,
                        has_sqrtdet: false,
                    });
                    fam.has_sqrtdet = true;
                }
            }
            _ => {}
        }
    }
    let mut v: Vec<MetricFamily> = fams.into_values().filter(|f| f.dim > 0 || f.has_sqrtdet).collect();
    for f in &mut v {
        if f.dim == 0 {
            f.dim = 4;
        }
    }
    v.sort_by(|a, b| a.name.cmp(&b.name));
    v
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn mat_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-14 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

fn mat_inv(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv = vec![vec![0.0; n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(piv, col);
        inv.swap(piv, col);
        let d = a[col][col];
        for c in 0..n {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for c in 0..n {
                    a[r][c] -= f * a[col][c];
                    inv[r][c] -= f * inv[col][c];
                }
            }
        }
    }
    Some(inv)
}

/// Binds every symbol of a metric family from an explicit matrix.
fn bind_metric_family(
    fam: &MetricFamily,
    m: &[Vec<f64>],
    bind: &mut HashMap<SymbolId, f64>,
) -> Result<(), SampleError> {
    use crate::symbol::IndexTag;
    let n = fam.dim;
    let det = mat_det(m);
    for s in 0..n {
        for r in s..n {
            let id = symbol::intern(SymbolData {
                kind: SymbolKind::Metric,
                name: fam.name.clone(),
                indices: vec![IndexTag::down(s as u8), IndexTag::down(r as u8)],
            });
            bind.insert(id, m[s][r]);
        }
    }
    if fam.has_inverse {
        let inv = mat_inv(m).ok_or(SampleError::DegenerateSample(1))?;
        for s in 0..n {
            for r in s..n {
                let id = symbol::intern(SymbolData {
                    kind: SymbolKind::InverseMetric,
                    name: fam.name.clone(),
                    indices: vec![IndexTag::up(s as u8), IndexTag::up(r as u8)],
                });
                bind.insert(id, inv[s][r]);
            }
        }
    }
    if fam.has_sqrtdet {
        if -det <= 1e-9 {
            return Err(SampleError::DegenerateSample(1));
        }
        let id = symbol::intern(SymbolData {
            kind: SymbolKind::DerivedScalar,
            name: format!("sdet:{}", fam.name),
            indices: vec![],
        });
        bind.insert(id, (-det).sqrt());
    }
    Ok(())
}

fn draw_metric(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    // L = I + 0.2 R keeps the condition number small; M = Lᵀ η L
    let n = dim;
    let mut l = vec![vec![0.0; n]; n];
    for (i, row) in l.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = if i == j { 1.0 } else { 0.0 };
            *e += 0.2 * rng.gen_range(-1.0..1.0);
        }
    }
    let mut eta_l = l.clone();
    for j in 0..n {
        eta_l[0][j] = -l[0][j];
    }
    let lt: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| l[j][i]).collect()).collect();
    mat_mul(&lt, &eta_l)
}

/// Draws one deterministic assignment for the given symbols; `attempt`
/// perturbs the stream so retries get fresh numbers.
pub fn sample_point(
    symbols: &[SymbolId],
    seed: u64,
    attempt: u64,
) -> Result<HashMap<SymbolId, f64>, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E3779B9).wrapping_add(attempt));
    let mut bind: HashMap<SymbolId, f64> = HashMap::new();
    let fams = metric_families(symbols);
    for fam in &fams {
        let m = draw_metric(&mut rng, fam.dim);
        if mat_det(&m).abs() < 1e-3 {
            return Err(SampleError::DegenerateSample(1));
        }
        bind_metric_family(fam, &m, &mut bind)?;
    }
    let mut rest: Vec<SymbolId> = symbols
        .iter()
        .copied()
        .filter(|s| !bind.contains_key(s))
        .collect();
    rest.sort();
    rest.dedup();
    for s in rest {
        bind.insert(s, rng.gen_range(-1.0..1.0));
    }
    Ok(bind)
}

/// Draws a sample, retrying on degenerate draws, and returns it along with
/// the metric families so dependents can be rebuilt after perturbations.
fn robust_sample(
    symbols: &[SymbolId],
    seed: u64,
    exprs: &[&Expr],
) -> Result<HashMap<SymbolId, f64>, SampleError> {
    let mut last = SampleError::DegenerateSample(0);
    for attempt in 0..100 {
        match sample_point(symbols, seed, attempt) {
            Ok(bind) => {
                // reject draws where any expression is non-evaluable
                // (e.g. a square root turning negative)
                let mut ok = true;
                for e in exprs {
                    match e.eval(&bind) {
                        Ok(v) if v.is_finite() => {}
                        Ok(_) => {
                            ok = false;
                        }
                        Err(EvalError::NegativeRadicand(_)) => {
                            ok = false;
                        }
                        Err(err) => return Err(SampleError::Eval(err)),
                    }
                    if !ok {
                        break;
                    }
                }
                if ok {
                    return Ok(bind);
                }
                last = SampleError::DegenerateSample(attempt as usize + 1);
            }
            Err(SampleError::DegenerateSample(_)) => {
                last = SampleError::DegenerateSample(attempt as usize + 1);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn union_symbols(exprs: &[&Expr]) -> Vec<SymbolId> {
    let mut set: HashSet<SymbolId> = HashSet::new();
    for e in exprs {
        set.extend(e.symbols());
    }
    let mut v: Vec<SymbolId> = set.into_iter().collect();
    v.sort();
    v
}

/// Compares two expressions at sampled points with relative tolerance
/// tol · (1 + |a| + |b|).
pub fn verify_identity(a: &Expr, b: &Expr, plan: &Plan) -> Result<CheckReport, SampleError> {
    let symbols = union_symbols(&[a, b]);
    let mut max_dev: f64 = 0.0;
    for k in 0..plan.samples {
        let bind = robust_sample(&symbols, plan.seed.wrapping_add(k as u64), &[a, b])?;
        let va = a.eval(&bind)?;
        let vb = b.eval(&bind)?;
        let dev = (va - vb).abs() / (1.0 + va.abs() + vb.abs());
        max_dev = max_dev.max(dev);
    }
    Ok(CheckReport {
        pass: max_dev <= plan.tol,
        samples_run: plan.samples,
        max_deviation: max_dev,
    })
}

/// True iff a and b agree numerically at every sampled point.
pub fn equal_numeric(a: &Expr, b: &Expr, plan: &Plan) -> bool {
    matches!(verify_identity(a, b, plan), Ok(r) if r.pass)
}

/// Central finite-difference check of ∂e/∂s against the symbolic
/// derivative, step h = 1e−5. Perturbing a metric symbol rebuilds the
/// bound inverse and determinant so the rules and the difference quotient
/// see the same perturbation.
pub fn finite_difference_check(
    e: &Expr,
    s: SymbolId,
    plan: &Plan,
) -> Result<CheckReport, SampleError> {
    let h = 1e-5;
    let sym_d = e.diff(s);
    let mut symbols = union_symbols(&[e, &sym_d]);
    if !symbols.contains(&s) {
        symbols.push(s);
        symbols.sort();
    }
    let data = symbol::symbol_data(s);
    // difference quotients degrade near a square-root branch point, so
    // samples keep every radicand away from zero by a fixed margin
    let radicands = {
        let mut r = e.radicands();
        for extra in sym_d.radicands() {
            if !r.contains(&extra) {
                r.push(extra);
            }
        }
        r
    };
    let mut max_dev: f64 = 0.0;
    for k in 0..plan.samples {
        let mut bind = robust_sample(&symbols, plan.seed.wrapping_add(k as u64), &[e, &sym_d])?;
        let mut retry = 0u64;
        while radicands
            .iter()
            .any(|r| matches!(r.eval(&bind), Ok(v) if v.abs() < 0.05))
        {
            retry += 1;
            if retry > 200 {
                return Err(SampleError::DegenerateSample(retry as usize));
            }
            bind = robust_sample(
                &symbols,
                plan.seed
                    .wrapping_add(k as u64)
                    .wrapping_add(retry.wrapping_mul(7919)),
                &[e, &sym_d],
            )?;
        }
        let eval_at = |delta: f64| -> Result<f64, SampleError> {
            let mut b = bind.clone();
            let base = *b.get(&s).unwrap_or(&0.0);
            b.insert(s, base + delta);
            if data.kind == SymbolKind::Metric {
                // rebuild dependents of the perturbed metric matrix
                let fams = metric_families(&symbols);
                if let Some(fam) = fams.iter().find(|f| f.name == data.name) {
                    let n = fam.dim;
                    let mut m = vec![vec![0.0; n]; n];
                    for sidx in 0..n {
                        for r in sidx..n {
                            let id = symbol::intern(SymbolData {
                                kind: SymbolKind::Metric,
                                name: fam.name.clone(),
                                indices: vec![
                                    crate::symbol::IndexTag::down(sidx as u8),
                                    crate::symbol::IndexTag::down(r as u8),
                                ],
                            });
                            let v = *b.get(&id).unwrap_or(&0.0);
                            m[sidx][r] = v;
                            m[r][sidx] = v;
                        }
                    }
                    bind_metric_family(fam, &m, &mut b)?;
                }
            }
            Ok(e.eval(&b)?)
        };
        let plus = eval_at(h)?;
        let minus = eval_at(-h)?;
        let fd = (plus - minus) / (2.0 * h);
        let sv = sym_d.eval(&bind)?;
        let dev = (fd - sv).abs() / (1.0 + fd.abs() + sv.abs());
        max_dev = max_dev.max(dev);
    }
    Ok(CheckReport {
        pass: max_dev <= plan.tol,
        samples_run: plan.samples,
        max_deviation: max_dev,
    })
}
