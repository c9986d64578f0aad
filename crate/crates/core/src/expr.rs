//! Canonical symbolic expressions.
//!
//! An `Expr` is always held in canonical form: a sorted sum of monomials
//! with exact rational coefficients, where a monomial is a sorted product of
//! atoms raised to nonzero integer powers. Atoms are interned symbols or
//! square roots of canonical expressions; a `Sqrt` factor with exponent `k`
//! stands for `radicand^(k/2)`, and even positive powers are expanded away
//! on construction. Equal values in this fragment therefore compare equal
//! structurally, which is what every identity check in the crate relies on.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::EvalError;
use crate::symbol::{self, SymbolId};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Sym(SymbolId),
    Sqrt(Box<Expr>),
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Atom::Sym(a), Atom::Sym(b)) => a.cmp(b),
            (Atom::Sym(_), Atom::Sqrt(_)) => Ordering::Less,
            (Atom::Sqrt(_), Atom::Sym(_)) => Ordering::Greater,
            (Atom::Sqrt(a), Atom::Sqrt(b)) => a.cmp(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub atom: Atom,
    pub exp: i32,
}

/// Sorted product of atoms with nonzero exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub factors: Vec<Factor>,
}

impl Monomial {
    fn unit() -> Self {
        Monomial { factors: vec![] }
    }

    fn single(atom: Atom, exp: i32) -> Self {
        if exp == 0 {
            Monomial::unit()
        } else {
            Monomial {
                factors: vec![Factor { atom, exp }],
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub mon: Monomial,
    pub coeff: Rat,
}

/// Canonical symbolic expression; see the module docs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Expr {
    pub terms: Vec<Term>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr { terms: vec![] }
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Self {
        Expr::rational(rat(n, 1))
    }

    pub fn rational(r: Rat) -> Self {
        if r.is_zero() {
            Expr::zero()
        } else {
            Expr {
                terms: vec![Term {
                    mon: Monomial::unit(),
                    coeff: r,
                }],
            }
        }
    }

    pub fn sym(s: SymbolId) -> Self {
        Expr {
            terms: vec![Term {
                mon: Monomial::single(Atom::Sym(s), 1),
                coeff: Rat::one(),
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if the expression is a rational constant.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 && self.terms[0].mon.factors.is_empty() {
            return Some(self.terms[0].coeff.clone());
        }
        None
    }

    fn from_terms(terms: Vec<Term>) -> Self {
        let mut map: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for t in terms {
            let entry = map.entry(t.mon).or_insert_with(Rat::zero);
            *entry += t.coeff;
        }
        Expr {
            terms: map
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(mon, coeff)| Term { mon, coeff })
                .collect(),
        }
    }

    pub fn add_ref(&self, other: &Expr) -> Expr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Expr::from_terms(terms)
    }

    pub fn neg_ref(&self) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    mon: t.mon.clone(),
                    coeff: -t.coeff.clone(),
                })
                .collect(),
        }
    }

    pub fn sub_ref(&self, other: &Expr) -> Expr {
        self.add_ref(&other.neg_ref())
    }

    pub fn scale(&self, r: &Rat) -> Expr {
        if r.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    mon: t.mon.clone(),
                    coeff: &t.coeff * r,
                })
                .collect(),
        }
    }

    pub fn mul_ref(&self, other: &Expr) -> Expr {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.extend(mul_terms(a, b).terms);
            }
        }
        Expr::from_terms(terms)
    }

    /// Integer power; negative exponents invert (atomically for sums).
    pub fn pow(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k < 0 {
            return self.invert().pow(-k);
        }
        let mut acc = Expr::one();
        let mut base = self.clone();
        let mut k = k as u32;
        loop {
            if k & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.mul_ref(&base);
        }
        acc
    }

    fn invert(&self) -> Expr {
        if let Some(c) = self.as_constant() {
            assert!(!c.is_zero(), "division by zero expression");
            return Expr::rational(c.recip());
        }
        if self.terms.len() == 1 {
            let t = &self.terms[0];
            let mon = Monomial {
                factors: t
                    .mon
                    .factors
                    .iter()
                    .map(|f| Factor {
                        atom: f.atom.clone(),
                        exp: -f.exp,
                    })
                    .collect(),
            };
            return Expr {
                terms: vec![Term {
                    mon,
                    coeff: t.coeff.recip(),
                }],
            };
        }
        // 1/sum kept atomic as Sqrt(sum)^(-2).
        Expr {
            terms: vec![Term {
                mon: Monomial::single(Atom::Sqrt(Box::new(self.clone())), -2),
                coeff: Rat::one(),
            }],
        }
    }

    /// Square root within the canonical fragment. Perfect-square factors of a
    /// single-term radicand and square rational content are extracted.
    pub fn sqrt(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = self.as_constant() {
            let (s, rest) = sqrt_rational(&c);
            if rest.is_one() {
                return Expr::rational(s);
            }
            let radicand = Expr::rational(rest);
            return Expr {
                terms: vec![Term {
                    mon: Monomial::single(Atom::Sqrt(Box::new(radicand)), 1),
                    coeff: s,
                }],
            };
        }
        if self.terms.len() == 1 {
            let t = &self.terms[0];
            let (s, rest_c) = sqrt_rational(&t.coeff);
            let mut outer = Monomial::unit();
            let mut inner = Monomial::unit();
            for f in &t.mon.factors {
                let q = f.exp.div_euclid(2);
                let r = f.exp.rem_euclid(2);
                if q != 0 {
                    outer.factors.push(Factor {
                        atom: f.atom.clone(),
                        exp: q,
                    });
                }
                if r != 0 {
                    inner.factors.push(Factor {
                        atom: f.atom.clone(),
                        exp: r,
                    });
                }
            }
            let inner_expr = Expr {
                terms: vec![Term {
                    mon: inner,
                    coeff: rest_c.clone(),
                }],
            };
            let mut result_mon = outer;
            if !(rest_c.is_one() && inner_expr.as_constant().map_or(true, |c| c.is_one())) {
                if inner_expr.as_constant().map_or(false, |c| c.is_one()) {
                    // nothing left under the root
                } else {
                    result_mon.factors.push(Factor {
                        atom: Atom::Sqrt(Box::new(inner_expr)),
                        exp: 1,
                    });
                    result_mon.factors.sort();
                }
            }
            // The outer part may contain even sqrt powers needing expansion.
            let raw = Expr {
                terms: vec![Term {
                    mon: Monomial::unit(),
                    coeff: s,
                }],
            };
            return raw.mul_ref(&Expr {
                terms: vec![Term {
                    mon: result_mon,
                    coeff: Rat::one(),
                }],
            });
        }
        // Multi-term radicand: pull square content, keep the rest atomic.
        let content = self.content();
        let (s, _rest) = sqrt_rational(&content);
        let radicand = self.scale(&(Rat::one() / (&s * &s)));
        Expr {
            terms: vec![Term {
                mon: Monomial::single(Atom::Sqrt(Box::new(radicand)), 1),
                coeff: s,
            }],
        }
    }

    /// Positive rational content (gcd of coefficient magnitudes).
    fn content(&self) -> Rat {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for t in &self.terms {
            num_gcd = num::integer::gcd(num_gcd, t.coeff.numer().abs());
            den_lcm = num::integer::lcm(den_lcm, t.coeff.denom().clone());
        }
        if num_gcd.is_zero() {
            Rat::one()
        } else {
            Rat::new(num_gcd, den_lcm)
        }
    }

    /// Partial derivative with respect to an interned symbol, honoring
    /// registered derivation rules for derived scalars and jet chains.
    pub fn diff(&self, s: SymbolId) -> Expr {
        let mut acc: Vec<Term> = Vec::new();
        for t in &self.terms {
            for (i, f) in t.mon.factors.iter().enumerate() {
                let datom = match &f.atom {
                    Atom::Sym(a) => {
                        if *a == s {
                            Expr::one()
                        } else {
                            match symbol::diff_rule(*a, s) {
                                Some(rule) => rule,
                                None => continue,
                            }
                        }
                    }
                    Atom::Sqrt(r) => {
                        let dr = r.diff(s);
                        if dr.is_zero() {
                            continue;
                        }
                        // d/ds r^(1/2) = (1/2) r^(-1/2) dr; the exponent shift
                        // is folded in below, so just contribute dr/2 here and
                        // shift the factor power by -2 (i.e. one sqrt power).
                        dr.scale(&rat(1, 2))
                    }
                };
                let (shift, chain_coeff) = match &f.atom {
                    Atom::Sym(_) => (1, rat(f.exp as i64, 1)),
                    Atom::Sqrt(_) => (2, rat(f.exp as i64, 1)),
                };
                // rest = term / atom^shift-of-one-power, times exp
                let mut rest_mon = Monomial::unit();
                for (j, g) in t.mon.factors.iter().enumerate() {
                    let exp = if i == j { g.exp - shift } else { g.exp };
                    if exp != 0 {
                        rest_mon.factors.push(Factor {
                            atom: g.atom.clone(),
                            exp,
                        });
                    }
                }
                rest_mon.factors.sort();
                let rest = Expr {
                    terms: vec![Term {
                        mon: rest_mon,
                        coeff: &t.coeff * chain_coeff,
                    }],
                };
                // Normalize possible even sqrt powers produced by the shift.
                let rest = Expr::one().mul_ref(&rest);
                acc.extend(rest.mul_ref(&datom).terms);
            }
        }
        Expr::from_terms(acc)
    }

    /// Simultaneous substitution followed by canonicalization.
    pub fn substitute(&self, map: &HashMap<SymbolId, Expr>) -> Expr {
        let mut acc: Vec<Term> = Vec::new();
        for t in &self.terms {
            let mut term_val = Expr::rational(t.coeff.clone());
            for f in &t.mon.factors {
                let base = match &f.atom {
                    Atom::Sym(s) => match map.get(s) {
                        Some(e) => e.clone(),
                        None => Expr::sym(*s),
                    },
                    Atom::Sqrt(r) => r.substitute(map).sqrt(),
                };
                term_val = term_val.mul_ref(&base.pow(f.exp));
            }
            acc.extend(term_val.terms);
        }
        Expr::from_terms(acc)
    }

    /// All distinct radicands appearing under square roots, recursively.
    pub fn radicands(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = Vec::new();
        for t in &self.terms {
            for f in &t.mon.factors {
                if let Atom::Sqrt(r) = &f.atom {
                    if !out.contains(r) {
                        out.push((**r).clone());
                    }
                    for inner in r.radicands() {
                        if !out.contains(&inner) {
                            out.push(inner);
                        }
                    }
                }
            }
        }
        out
    }

    /// All symbols appearing in the expression (including inside radicands).
    pub fn symbols(&self) -> Vec<SymbolId> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_symbols(&self, out: &mut Vec<SymbolId>) {
        for t in &self.terms {
            for f in &t.mon.factors {
                match &f.atom {
                    Atom::Sym(s) => out.push(*s),
                    Atom::Sqrt(r) => r.collect_symbols(out),
                }
            }
        }
    }

    pub fn depends_on(&self, s: SymbolId) -> bool {
        self.symbols().contains(&s)
    }

    /// Numeric evaluation at an assignment of all free symbols.
    pub fn eval(&self, bind: &HashMap<SymbolId, f64>) -> Result<f64, EvalError> {
        let mut total = 0.0;
        for t in &self.terms {
            let mut v = rat_to_f64(&t.coeff);
            for f in &t.mon.factors {
                let base = match &f.atom {
                    Atom::Sym(s) => *bind
                        .get(s)
                        .ok_or(EvalError::UnboundSymbol(format!("{s}")))?,
                    Atom::Sqrt(r) => {
                        let rv = r.eval(bind)?;
                        if rv < -1e-12 {
                            return Err(EvalError::NegativeRadicand(rv));
                        }
                        rv.max(0.0).sqrt()
                    }
                };
                v *= base.powi(f.exp);
            }
            total += v;
        }
        Ok(total)
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    let n = r.numer();
    let d = r.denom();
    num_bigint_to_f64(n) / num_bigint_to_f64(d)
}

fn num_bigint_to_f64(b: &BigInt) -> f64 {
    use num::ToPrimitive;
    b.to_f64().unwrap_or(f64::NAN)
}

/// Largest s with s^2 dividing r (positive part); returns (s, r / s^2).
fn sqrt_rational(r: &Rat) -> (Rat, Rat) {
    let (sn, rn) = sqrt_int(r.numer());
    let (sd, rd) = sqrt_int(r.denom());
    (Rat::new(sn, sd), Rat::new(rn, rd))
}

fn sqrt_int(b: &BigInt) -> (BigInt, BigInt) {
    use num::ToPrimitive;
    let neg = b.is_negative();
    let mag = b.abs();
    let Some(mut n) = mag.to_u64() else {
        return (BigInt::one(), b.clone());
    };
    let mut s: u64 = 1;
    let mut p: u64 = 2;
    while p * p <= n {
        while n % (p * p) == 0 {
            n /= p * p;
            s *= p;
        }
        p += 1;
    }
    let rest = BigInt::from(n) * if neg { -BigInt::one() } else { BigInt::one() };
    (BigInt::from(s), rest)
}

fn mul_terms(a: &Term, b: &Term) -> Expr {
    let mut factors: Vec<Factor> = Vec::with_capacity(a.mon.factors.len() + b.mon.factors.len());
    let mut i = 0;
    let mut j = 0;
    let fa = &a.mon.factors;
    let fb = &b.mon.factors;
    while i < fa.len() && j < fb.len() {
        match fa[i].atom.cmp(&fb[j].atom) {
            Ordering::Less => {
                factors.push(fa[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                factors.push(fb[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                let exp = fa[i].exp + fb[j].exp;
                if exp != 0 {
                    factors.push(Factor {
                        atom: fa[i].atom.clone(),
                        exp,
                    });
                }
                i += 1;
                j += 1;
            }
        }
    }
    factors.extend_from_slice(&fa[i..]);
    factors.extend_from_slice(&fb[j..]);

    // Expand even positive sqrt powers into the polynomial part.
    let mut pending = Expr::one();
    let mut kept: Vec<Factor> = Vec::with_capacity(factors.len());
    for f in factors {
        if let Atom::Sqrt(r) = &f.atom {
            if f.exp > 0 && f.exp % 2 == 0 {
                pending = pending.mul_ref(&r.pow(f.exp / 2));
                continue;
            }
        }
        kept.push(f);
    }
    let base = Expr {
        terms: vec![Term {
            mon: Monomial { factors: kept },
            coeff: &a.coeff * &b.coeff,
        }],
    };
    if pending.as_constant().map_or(false, |c| c.is_one()) {
        base
    } else {
        base.mul_ref(&pending)
    }
}

/// Canonicalization is the identity on this representation; exposed for
/// API symmetry and for use as an explicit normalization point.
pub fn canonicalize(e: &Expr) -> Expr {
    e.clone()
}

/// Decides equality by cancellation; rationalizes away negative powers
/// (multiplying through by their atoms) when plain subtraction is not enough.
pub fn equal_symbolic(a: &Expr, b: &Expr) -> bool {
    let mut d = a.sub_ref(b);
    if d.is_zero() {
        return true;
    }
    for _ in 0..10 {
        let mut mult: Option<(Atom, i32)> = None;
        'outer: for t in &d.terms {
            for f in &t.mon.factors {
                if f.exp < 0 {
                    mult = Some((f.atom.clone(), -f.exp));
                    break 'outer;
                }
            }
        }
        let Some((atom, exp)) = mult else { break };
        let m = Expr {
            terms: vec![Term {
                mon: Monomial::single(atom, exp),
                coeff: Rat::one(),
            }],
        };
        d = d.mul_ref(&m);
        if d.is_zero() {
            return true;
        }
    }
    d.is_zero()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let c = &t.coeff;
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let show_coeff = !mag.is_one() || t.mon.factors.is_empty();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            for (k, fac) in t.mon.factors.iter().enumerate() {
                if show_coeff || k > 0 {
                    write!(f, "*")?;
                }
                match &fac.atom {
                    Atom::Sym(s) => write!(f, "{s}")?,
                    Atom::Sqrt(r) => write!(f, "sqrt({r})")?,
                }
                if fac.exp != 1 {
                    write!(f, "^{}", fac.exp)?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.add_ref(rhs)
    }
}
impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        self.add_ref(&rhs)
    }
}
impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.sub_ref(rhs)
    }
}
impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self.sub_ref(&rhs)
    }
}
impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.mul_ref(rhs)
    }
}
impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        self.mul_ref(&rhs)
    }
}
impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}
impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.neg_ref()
    }
}
