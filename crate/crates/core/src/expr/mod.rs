//! Immutable, hash-consed symbolic expressions over state variables and
//! parameters.
//!
//! Every [`Expr`] is built through smart constructors that keep the tree in a
//! light canonical form: sums and products are flattened and sorted, constants
//! are folded, like terms and like powers are collected. Structurally
//! identical trees are interned to the same allocation, so equality is a
//! pointer comparison and shared subtrees are shared in memory.

mod diff;
mod eval;
mod field;
mod parse;
mod print;

pub use eval::{EvalError, Tape};
pub use field::{FieldError, Point, VectorField};
pub use parse::{parse_expression, parse_vector_field, ParseError};
pub use print::ExprDisplay;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, LazyLock, Mutex, Weak};

/// A reference to one of the two kinds of independent symbols a field has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// State variable `x_i` (0-based).
    Var(usize),
    /// Parameter `alpha_i` (0-based).
    Param(usize),
}

/// Node payload of an expression.
#[derive(Debug, Clone)]
pub enum ExprKind {
    Const(f64),
    Var(usize),
    Param(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Neg(Expr),
    Quotient(Expr, Expr),
    Pow(Expr, i32),
}

#[derive(Debug)]
struct Node {
    id: u64,
    hash: u64,
    vars: u64,
    params: u64,
    kind: ExprKind,
}

/// Shared handle to an interned expression node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    Var(usize),
    Param(usize),
    Sum(Vec<u64>),
    Product(Vec<u64>),
    Neg(u64),
    Quotient(u64, u64),
    Pow(u64, i32),
}

struct Interner {
    map: HashMap<Key, Weak<Node>>,
    purge_at: usize,
}

static INTERNER: LazyLock<Mutex<Interner>> = LazyLock::new(|| {
    Mutex::new(Interner {
        map: HashMap::new(),
        purge_at: 1 << 16,
    })
});

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn mix(mut h: u64, v: u64) -> u64 {
    h ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

fn bit(i: usize) -> u64 {
    if i < 64 {
        1 << i
    } else {
        u64::MAX
    }
}

fn normalize_const(c: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c
    }
}

fn intern(kind: ExprKind) -> Expr {
    let key = match &kind {
        ExprKind::Const(c) => Key::Const(c.to_bits()),
        ExprKind::Var(i) => Key::Var(*i),
        ExprKind::Param(i) => Key::Param(*i),
        ExprKind::Sum(ch) => Key::Sum(ch.iter().map(Expr::id).collect()),
        ExprKind::Product(ch) => Key::Product(ch.iter().map(Expr::id).collect()),
        ExprKind::Neg(e) => Key::Neg(e.id()),
        ExprKind::Quotient(n, d) => Key::Quotient(n.id(), d.id()),
        ExprKind::Pow(b, k) => Key::Pow(b.id(), *k),
    };
    let mut guard = INTERNER.lock().unwrap_or_else(|p| p.into_inner());
    if let Some(existing) = guard.map.get(&key).and_then(Weak::upgrade) {
        return Expr(existing);
    }
    let (hash, vars, params) = summarize(&kind);
    let node = Arc::new(Node {
        id: NEXT_ID.fetch_add(1, AtomicOrdering::Relaxed),
        hash,
        vars,
        params,
        kind,
    });
    guard.map.insert(key, Arc::downgrade(&node));
    if guard.map.len() >= guard.purge_at {
        guard.map.retain(|_, w| w.strong_count() > 0);
        guard.purge_at = (guard.map.len() * 2).max(1 << 16);
    }
    Expr(node)
}

fn summarize(kind: &ExprKind) -> (u64, u64, u64) {
    let fold = |tag: u64, ch: &[Expr]| {
        let mut h = mix(0, tag);
        let mut vars = 0;
        let mut params = 0;
        for c in ch {
            h = mix(h, c.0.hash);
            vars |= c.0.vars;
            params |= c.0.params;
        }
        (h, vars, params)
    };
    match kind {
        ExprKind::Const(c) => (mix(mix(0, 1), c.to_bits()), 0, 0),
        ExprKind::Var(i) => (mix(mix(0, 2), *i as u64), bit(*i), 0),
        ExprKind::Param(i) => (mix(mix(0, 3), *i as u64), 0, bit(*i)),
        ExprKind::Sum(ch) => fold(4, ch),
        ExprKind::Product(ch) => fold(5, ch),
        ExprKind::Neg(e) => fold(6, std::slice::from_ref(e)),
        ExprKind::Quotient(n, d) => fold(7, &[n.clone(), d.clone()]),
        ExprKind::Pow(b, k) => {
            let (h, v, p) = fold(8, std::slice::from_ref(b));
            (mix(h, *k as i64 as u64), v, p)
        }
    }
}

impl Expr {
    pub fn kind(&self) -> &ExprKind {
        &self.0.kind
    }

    /// Unique id of the interned node. Equal ids imply structural equality.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Deterministic structural hash, stable across runs.
    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub fn constant(c: f64) -> Expr {
        intern(ExprKind::Const(normalize_const(c)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(i: usize) -> Expr {
        intern(ExprKind::Var(i))
    }

    pub fn param(i: usize) -> Expr {
        intern(ExprKind::Param(i))
    }

    pub fn symbol(s: Symbol) -> Expr {
        match s {
            Symbol::Var(i) => Expr::var(i),
            Symbol::Param(i) => Expr::param(i),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.kind() {
            ExprKind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// Whether the expression syntactically contains `s`.
    pub fn depends_on(&self, s: Symbol) -> bool {
        match s {
            Symbol::Var(i) => self.0.vars & bit(i) != 0,
            Symbol::Param(i) => self.0.params & bit(i) != 0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.0.vars == 0 && self.0.params == 0
    }

    /// Number of distinct nodes in the expression DAG.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if seen.insert(e.id()) {
                stack.extend(e.children());
            }
        }
        seen.len()
    }

    pub fn children(&self) -> Vec<Expr> {
        match self.kind() {
            ExprKind::Const(_) | ExprKind::Var(_) | ExprKind::Param(_) => Vec::new(),
            ExprKind::Sum(ch) | ExprKind::Product(ch) => ch.clone(),
            ExprKind::Neg(e) | ExprKind::Pow(e, _) => vec![e.clone()],
            ExprKind::Quotient(n, d) => vec![n.clone(), d.clone()],
        }
    }

    /// Canonical sum of `terms`.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut flat = Vec::new();
        for t in terms {
            match t.kind() {
                ExprKind::Sum(ch) => flat.extend(ch.iter().cloned()),
                _ => flat.push(t),
            }
        }
        let mut constant = 0.0;
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut collected: Vec<(Expr, f64)> = Vec::new();
        for t in flat {
            let (c, rest) = split_coefficient(&t);
            match rest {
                None => constant += c,
                Some(rest) => match index.get(&rest.id()) {
                    Some(&k) => collected[k].1 += c,
                    None => {
                        index.insert(rest.id(), collected.len());
                        collected.push((rest, c));
                    }
                },
            }
        }
        let mut out: Vec<Expr> = collected
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(rest, c)| rest.scale(c))
            .collect();
        // scaling may hand back a sum when distributing over one
        if out.iter().any(|t| matches!(t.kind(), ExprKind::Sum(_))) {
            if constant != 0.0 {
                out.push(Expr::constant(constant));
            }
            return Expr::sum(out);
        }
        if constant != 0.0 {
            out.push(Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => {
                out.sort_by(canonical_cmp);
                intern(ExprKind::Sum(out))
            }
        }
    }

    /// Canonical product of `factors`.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut coef = 1.0;
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut powers: Vec<(Expr, i32)> = Vec::new();
        let mut stack: Vec<(Expr, i32)> = factors.into_iter().map(|f| (f, 1)).collect();
        stack.reverse();
        while let Some((f, k)) = stack.pop() {
            match f.kind() {
                ExprKind::Const(c) => coef *= c.powi(k),
                ExprKind::Product(ch) => {
                    for c in ch.iter().rev() {
                        stack.push((c.clone(), k));
                    }
                }
                ExprKind::Neg(e) => {
                    if k % 2 != 0 {
                        coef = -coef;
                    }
                    stack.push((e.clone(), k));
                }
                ExprKind::Pow(b, j) => stack.push((b.clone(), j * k)),
                _ => match index.get(&f.id()) {
                    Some(&i) => powers[i].1 += k,
                    None => {
                        index.insert(f.id(), powers.len());
                        powers.push((f, k));
                    }
                },
            }
        }
        if coef == 0.0 {
            return Expr::zero();
        }
        let mut out: Vec<Expr> = powers
            .into_iter()
            .filter(|(_, k)| *k != 0)
            .map(|(b, k)| if k == 1 { b } else { intern(ExprKind::Pow(b, k)) })
            .collect();
        out.sort_by(canonical_cmp);
        let body = match out.len() {
            0 => return Expr::constant(coef),
            1 => out.pop().unwrap(),
            _ => intern(ExprKind::Product(out)),
        };
        body.scale(coef)
    }

    /// `c * self`, distributing the coefficient over a top-level sum.
    fn scale(&self, c: f64) -> Expr {
        if c == 1.0 {
            return self.clone();
        }
        if c == 0.0 {
            return Expr::zero();
        }
        match self.kind() {
            ExprKind::Const(v) => Expr::constant(c * v),
            ExprKind::Sum(ch) => Expr::sum(ch.iter().map(|t| t.scale(c))),
            _ => {
                let (c0, rest) = split_coefficient(self);
                let c = c * c0;
                let rest = rest.expect("non-constant term");
                if c == 1.0 {
                    rest
                } else if c == -1.0 {
                    intern(ExprKind::Neg(rest))
                } else {
                    let mut ch = vec![Expr::constant(c)];
                    match rest.kind() {
                        ExprKind::Product(fs) => ch.extend(fs.iter().cloned()),
                        _ => ch.push(rest),
                    }
                    intern(ExprKind::Product(ch))
                }
            }
        }
    }

    pub fn neg(&self) -> Expr {
        self.scale(-1.0)
    }

    pub fn pow(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return self.clone();
        }
        match self.kind() {
            ExprKind::Const(c) => Expr::constant(c.powi(k)),
            ExprKind::Pow(b, j) => b.pow(j * k),
            ExprKind::Product(_) | ExprKind::Neg(_) => pow_of_product(self, k),
            ExprKind::Quotient(n, d) if k > 0 => Expr::quotient(&n.pow(k), &d.pow(k)),
            _ => intern(ExprKind::Pow(self.clone(), k)),
        }
    }

    /// `num / den`, stored as `num * den^-1` unless `den` is a literal zero.
    pub fn quotient(num: &Expr, den: &Expr) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        if den.is_zero() {
            return intern(ExprKind::Quotient(num.clone(), den.clone()));
        }
        Expr::product([num.clone(), den.pow(-1)])
    }

    /// Rebuild bottom-up through the smart constructors.
    ///
    /// Trees are normalized on construction, so this is idempotent and
    /// mostly returns `self`; it exists for trees assembled from pieces
    /// that were normalized under different neighbours.
    pub fn simplify(&self) -> Expr {
        self.map_leaves(&mut HashMap::new(), &|_| None)
    }

    /// Replace parameters by constants where `values[i]` is `Some`.
    pub fn substitute_params(&self, values: &[Option<f64>]) -> Expr {
        self.map_leaves(&mut HashMap::new(), &|kind| match kind {
            ExprKind::Param(i) => values.get(*i).copied().flatten().map(Expr::constant),
            _ => None,
        })
    }

    /// Re-index parameters: parameter `i` becomes `Param(map[i])`.
    pub fn remap_params(&self, map: &[usize]) -> Expr {
        self.map_leaves(&mut HashMap::new(), &|kind| match kind {
            ExprKind::Param(i) => Some(Expr::param(map[*i])),
            _ => None,
        })
    }

    fn map_leaves(
        &self,
        memo: &mut HashMap<u64, Expr>,
        leaf: &dyn Fn(&ExprKind) -> Option<Expr>,
    ) -> Expr {
        if let Some(done) = memo.get(&self.id()) {
            return done.clone();
        }
        let out = match self.kind() {
            ExprKind::Const(_) | ExprKind::Var(_) | ExprKind::Param(_) => {
                leaf(self.kind()).unwrap_or_else(|| self.clone())
            }
            ExprKind::Sum(ch) => Expr::sum(ch.iter().map(|c| c.map_leaves(memo, leaf)).collect::<Vec<_>>()),
            ExprKind::Product(ch) => {
                Expr::product(ch.iter().map(|c| c.map_leaves(memo, leaf)).collect::<Vec<_>>())
            }
            ExprKind::Neg(e) => e.map_leaves(memo, leaf).neg(),
            ExprKind::Quotient(n, d) => {
                let n = n.map_leaves(memo, leaf);
                let d = d.map_leaves(memo, leaf);
                Expr::quotient(&n, &d)
            }
            ExprKind::Pow(b, k) => b.map_leaves(memo, leaf).pow(*k),
        };
        memo.insert(self.id(), out.clone());
        out
    }
}

/// `(c * f1 * f2 ...)^k` expanded factorwise through the product collector.
fn pow_of_product(base: &Expr, k: i32) -> Expr {
    let factors: Vec<Expr> = match base.kind() {
        ExprKind::Product(ch) => ch.clone(),
        ExprKind::Neg(e) => vec![Expr::constant(-1.0), e.clone()],
        _ => vec![base.clone()],
    };
    Expr::product(factors.into_iter().map(|f| f.pow(k)).collect::<Vec<_>>())
}

/// Split a term into `(coefficient, rest)`; `rest` is `None` for constants.
fn split_coefficient(t: &Expr) -> (f64, Option<Expr>) {
    match t.kind() {
        ExprKind::Const(c) => (*c, None),
        ExprKind::Neg(e) => {
            let (c, rest) = split_coefficient(e);
            (-c, rest)
        }
        ExprKind::Product(ch) => match ch[0].as_const() {
            Some(c) => {
                let rest = if ch.len() == 2 {
                    ch[1].clone()
                } else {
                    intern(ExprKind::Product(ch[1..].to_vec()))
                };
                (c, Some(rest))
            }
            None => (1.0, Some(t.clone())),
        },
        _ => (1.0, Some(t.clone())),
    }
}

fn kind_rank(k: &ExprKind) -> u8 {
    match k {
        ExprKind::Const(_) => 0,
        ExprKind::Param(_) => 1,
        ExprKind::Var(_) => 2,
        ExprKind::Pow(..) => 3,
        ExprKind::Neg(_) => 4,
        ExprKind::Quotient(..) => 5,
        ExprKind::Product(_) => 6,
        ExprKind::Sum(_) => 7,
    }
}

/// Total, run-independent order on expressions used to sort sum and product
/// children.
pub fn canonical_cmp(a: &Expr, b: &Expr) -> Ordering {
    if a.id() == b.id() {
        return Ordering::Equal;
    }
    let (ka, kb) = (a.kind(), b.kind());
    kind_rank(ka).cmp(&kind_rank(kb)).then_with(|| match (ka, kb) {
        (ExprKind::Const(x), ExprKind::Const(y)) => x.total_cmp(y),
        (ExprKind::Param(x), ExprKind::Param(y)) | (ExprKind::Var(x), ExprKind::Var(y)) => x.cmp(y),
        (ExprKind::Pow(x, i), ExprKind::Pow(y, j)) => canonical_cmp(x, y).then(i.cmp(j)),
        _ => a
            .structural_hash()
            .cmp(&b.structural_hash())
            .then_with(|| {
                let (ca, cb) = (a.children(), b.children());
                for (x, y) in ca.iter().zip(&cb) {
                    let o = canonical_cmp(x, y);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                ca.len().cmp(&cb.len())
            }),
    })
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.id() == other.id()
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ExprDisplay::anonymous(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ExprDisplay::anonymous(self))
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $body(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $body(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $body(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $body(self, &rhs)
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $body(&self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $body(self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $body(&Expr::constant(self), &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $body(&Expr::constant(self), rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Expr, b: &Expr| Expr::sum([a.clone(), b.clone()]));
binop!(Sub, sub, |a: &Expr, b: &Expr| Expr::sum([a.clone(), b.neg()]));
binop!(Mul, mul, |a: &Expr, b: &Expr| Expr::product([a.clone(), b.clone()]));
binop!(Div, div, |a: &Expr, b: &Expr| Expr::quotient(a, b));

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
