//! Interned chart symbols.
//!
//! Every coordinate, momentum, metric component and jet parameter is an
//! interned symbol. Interning resolves declared index symmetries (second
//! multivelocities `w^A_{mu nu}`, metric components `g_{sig rho}`) by
//! sorting the symmetric index pair, so the symmetrized variants map to a
//! single id. The table is global and safe for concurrent interning.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    /// Base coordinate `x^mu`.
    BaseCoord,
    /// Fiber coordinate `y^A` (field component).
    FiberCoord,
    /// Multivelocity `v^A_mu`.
    MultiVelocity,
    /// Second multivelocity `w^A_{mu nu}`, symmetric in the base pair.
    SecondVelocity,
    /// Multimomentum `p_A^mu`.
    MultiMomentum,
    /// The covariant Hamiltonian coordinate `p`.
    CovariantHamiltonian,
    /// Metric component `g_{sig rho}`, symmetric.
    Metric,
    /// Inverse metric component `g^{sig rho}`, symmetric.
    InverseMetric,
    /// Registered derived scalar (e.g. `sqrt(-det g)`), differentiated by rule.
    DerivedScalar,
    /// Free parameter (jet data of gauge functions, generic-section jets, ...).
    Parameter,
}

/// One index slot on a symbol: a concrete value and a variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexTag {
    pub value: u8,
    pub up: bool,
}

impl IndexTag {
    pub fn up(value: u8) -> Self {
        IndexTag { value, up: true }
    }
    pub fn down(value: u8) -> Self {
        IndexTag { value, up: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolData {
    pub kind: SymbolKind,
    pub name: String,
    pub indices: Vec<IndexTag>,
}

/// Interned symbol handle; ordering is the interning order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub(crate) u32);

struct Interner {
    data: Vec<SymbolData>,
    ids: HashMap<SymbolData, SymbolId>,
}

struct Registry {
    interner: Interner,
    /// (symbol, wrt) -> d symbol / d wrt, for derived scalars and jet chains.
    diff_rules: HashMap<(SymbolId, SymbolId), Expr>,
}

static REGISTRY: OnceLock<RwLock<Registry>> = OnceLock::new();

fn registry() -> &'static RwLock<Registry> {
    REGISTRY.get_or_init(|| {
        RwLock::new(Registry {
            interner: Interner {
                data: Vec::new(),
                ids: HashMap::new(),
            },
            diff_rules: HashMap::new(),
        })
    })
}

/// Sorts the trailing symmetric index pair where the kind demands it.
fn normalize(mut data: SymbolData) -> SymbolData {
    let sym_tail = match data.kind {
        SymbolKind::SecondVelocity | SymbolKind::Metric | SymbolKind::InverseMetric => 2,
        _ => 0,
    };
    if sym_tail == 2 && data.indices.len() >= 2 {
        let n = data.indices.len();
        let tail = &mut data.indices[n - 2..];
        if tail[0].value > tail[1].value {
            tail.swap(0, 1);
        }
    }
    data
}

pub fn intern(data: SymbolData) -> SymbolId {
    let data = normalize(data);
    {
        let reg = registry().read().unwrap();
        if let Some(&id) = reg.interner.ids.get(&data) {
            return id;
        }
    }
    let mut reg = registry().write().unwrap();
    if let Some(&id) = reg.interner.ids.get(&data) {
        return id;
    }
    let id = SymbolId(reg.interner.data.len() as u32);
    reg.interner.data.push(data.clone());
    reg.interner.ids.insert(data, id);
    id
}

/// Interns with an explicit symmetric tail (for parameter jets like `chi_{,nu sig}`).
pub fn intern_symmetric_tail(mut data: SymbolData, tail: usize) -> SymbolId {
    if tail >= 2 && data.indices.len() >= tail {
        let n = data.indices.len();
        data.indices[n - tail..].sort();
    }
    intern(data)
}

pub fn symbol_data(id: SymbolId) -> SymbolData {
    registry().read().unwrap().interner.data[id.0 as usize].clone()
}

pub fn symbol_kind(id: SymbolId) -> SymbolKind {
    registry().read().unwrap().interner.data[id.0 as usize].kind
}

/// Looks up an interned symbol without creating it.
pub fn lookup(data: &SymbolData) -> Option<SymbolId> {
    let data = normalize(data.clone());
    registry().read().unwrap().interner.ids.get(&data).copied()
}

pub fn register_diff_rule(sym: SymbolId, wrt: SymbolId, derivative: Expr) {
    registry()
        .write()
        .unwrap()
        .diff_rules
        .insert((sym, wrt), derivative);
}

pub fn diff_rule(sym: SymbolId, wrt: SymbolId) -> Option<Expr> {
    registry().read().unwrap().diff_rules.get(&(sym, wrt)).cloned()
}

/// All registered rule partners of `sym` (symbols it depends on).
pub fn rule_dependencies(sym: SymbolId) -> Vec<SymbolId> {
    let reg = registry().read().unwrap();
    reg.diff_rules
        .keys()
        .filter(|(s, _)| *s == sym)
        .map(|(_, w)| *w)
        .collect()
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let data = symbol_data(*self);
        let prefix = match data.kind {
            SymbolKind::MultiVelocity => "d",
            SymbolKind::SecondVelocity => "dd",
            SymbolKind::MultiMomentum => "p",
            _ => "",
        };
        write!(f, "{}{}", prefix, data.name)?;
        if !data.indices.is_empty() {
            let mut cur_up: Option<bool> = None;
            for tag in &data.indices {
                if cur_up != Some(tag.up) {
                    write!(f, "{}", if tag.up { "^" } else { "_" })?;
                    cur_up = Some(tag.up);
                }
                write!(f, "{}", tag.value)?;
            }
        }
        Ok(())
    }
}

// Convenience constructors used throughout the crate.

pub fn base_coord(mu: u8) -> SymbolId {
    intern(SymbolData {
        kind: SymbolKind::BaseCoord,
        name: "x".into(),
        indices: vec![IndexTag::up(mu)],
    })
}

pub fn fiber_coord(name: &str, indices: Vec<IndexTag>) -> SymbolId {
    intern(SymbolData {
        kind: SymbolKind::FiberCoord,
        name: name.into(),
        indices,
    })
}

pub fn parameter(name: &str, indices: Vec<IndexTag>) -> SymbolId {
    intern(SymbolData {
        kind: SymbolKind::Parameter,
        name: name.into(),
        indices,
    })
}

pub fn scalar_parameter(name: &str) -> SymbolId {
    parameter(name, vec![])
}
