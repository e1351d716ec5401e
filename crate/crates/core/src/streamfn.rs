//! Stream functions: maps `F: M → N` paired with an incremental update `ΔF`.
//!
//! `ΔF(p, a)` is the extra output produced when the input `p` is extended by
//! `a`. A valid pair satisfies
//!
//! - `F(p·a) = F(p)·ΔF(p, a)`
//! - `ΔF(p, ε) = ε`
//! - `ΔF(p, a·b) = ΔF(p, a)·ΔF(p·a, b)`

use std::sync::Arc;

use crate::algebra::laws::{sample_mixed, shrink, witness, LawReport};
use crate::algebra::monoid::{BinFn, Carrier, MonoidKind, UnFn};
use crate::algebra::{Hom, Monoid};
use crate::error::{precondition, Error, Result};
use crate::processor::Processor;
use crate::sample;
use crate::state::StateElement;
use crate::value::Value;

#[derive(Clone)]
pub struct StreamFunction {
    name: String,
    source: Monoid,
    target: Monoid,
    apply: UnFn,
    update: BinFn,
}

pub const LAW_INCREMENT: &str = "incremental output";
pub const LAW_UPDATE_IDENTITY: &str = "update on identity";
pub const LAW_UPDATE_PRODUCT: &str = "update on products";

impl StreamFunction {
    pub fn new(name: impl Into<String>, source: Monoid, target: Monoid, apply: UnFn, update: BinFn) -> Self {
        StreamFunction { name: name.into(), source, target, apply, update }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn source(&self) -> &Monoid {
        &self.source
    }
    pub fn target(&self) -> &Monoid {
        &self.target
    }
    pub fn apply(&self, x: &Value) -> Value {
        (self.apply)(x)
    }
    pub fn update(&self, p: &Value, a: &Value) -> Value {
        (self.update)(p, a)
    }

    /// A homomorphism is a stream function with `ΔF(p, b) = F(b)`.
    pub fn from_homomorphism(h: &Hom) -> Self {
        let (f, g) = (h.func(), h.func());
        StreamFunction::new(h.name(), h.source().clone(), h.target().clone(), f, Arc::new(move |_, b| g(b)))
    }

    /// Same function with a different update.
    pub fn with_update(&self, name: impl Into<String>, update: BinFn) -> Self {
        StreamFunction { name: name.into(), update, ..self.clone() }
    }
}

fn fails_increment(f: &StreamFunction, x: &[Value]) -> bool {
    let (p, a) = (&x[0], &x[1]);
    let lhs = f.apply(&f.source.mul(p, a));
    let rhs = f.target.mul(&f.apply(p), &f.update(p, a));
    !f.target.eq(&lhs, &rhs)
}

fn fails_update_identity(f: &StreamFunction, x: &[Value]) -> bool {
    !f.target.is_identity(&f.update(&x[0], &f.source.identity()))
}

fn fails_update_product(f: &StreamFunction, x: &[Value]) -> bool {
    let (p, a, b) = (&x[0], &x[1], &x[2]);
    let lhs = f.update(p, &f.source.mul(a, b));
    let rhs = f.target.mul(&f.update(p, a), &f.update(&f.source.mul(p, a), b));
    !f.target.eq(&lhs, &rhs)
}

/// Seeded check of the three stream-function laws.
pub fn check_stream_function(f: &StreamFunction, budget: usize, seed: u64) -> LawReport {
    let mut rng = sample::rng(seed);
    let mut report = LawReport::new(f.name());
    let m = &f.source;
    type Check = fn(&StreamFunction, &[Value]) -> bool;
    let laws: [(&str, usize, Check); 3] = [
        (LAW_INCREMENT, 2, fails_increment),
        (LAW_UPDATE_IDENTITY, 1, fails_update_identity),
        (LAW_UPDATE_PRODUCT, 3, fails_update_product),
    ];
    for _ in 0..budget {
        report.cases += 1;
        let xs: Vec<Value> = (0..3).map(|_| sample_mixed(m, &mut rng)).collect();
        for (law, arity, fails) in laws {
            if report.has_failure(law) || !fails(f, &xs[..arity]) {
                continue;
            }
            let small = shrink(&vec![m; arity], xs[..arity].to_vec(), |w| fails(f, w));
            let names = ["p", "a", "b"];
            let entries: Vec<(&str, &Value)> = small.iter().enumerate().map(|(i, v)| (names[i], v)).collect();
            report.record(law, witness(&entries));
        }
    }
    report
}

/// The generic decomposition: state is the input seen so far,
/// `f(m) = s ↦ (s·m, ΔF(s, m))`, starting from `(ε, F(ε))`.
pub fn generic_decompose(f: &StreamFunction) -> Processor {
    let space = f.source.carrier();
    let (src, upd) = (f.source.clone(), f.update.clone());
    let out = f.target.clone();
    let sm = crate::state::state_monoid(&space, &out);
    let hom = Hom::new(
        format!("dec({})", f.name),
        f.source.clone(),
        sm,
        Arc::new(move |m| {
            let (src, upd, m) = (src.clone(), upd.clone(), m.clone());
            Value::Fun(StateElement::from_fn(&out, move |s| (src.mul(s, &m), upd(s, &m))))
        }),
    );
    let init_out = f.apply(&f.source.identity());
    Processor::new(format!("dec({})", f.name), space, hom, f.source.identity(), init_out)
        .expect("generic decomposition is well typed")
}

fn first_failure(f: &StreamFunction, law: &str, budget: usize, seed: u64) -> Option<Error> {
    let r = check_stream_function(f, budget, seed);
    r.failures
        .iter()
        .find(|c| c.law == law)
        .map(|c| Error::Rejected(format!("{}: {} fails at {}", f.name(), c.law, c.witness)))
}

/// For a left-cancellative target the update is determined by the
/// increment law alone; the remaining laws are re-verified.
pub fn completion_for_left_cancellative(f: &StreamFunction, budget: usize, seed: u64) -> Result<StreamFunction> {
    if !f.target.flags().left_cancellative {
        return Err(precondition(format!("completion of {}", f.name()), "a left-cancellative target"));
    }
    if let Some(e) = first_failure(f, LAW_INCREMENT, budget, seed) {
        return Err(e);
    }
    let r = check_stream_function(f, budget, sample::derive(seed, 1));
    match r.failures.first() {
        None => Ok(f.clone()),
        Some(c) => Err(Error::Rejected(format!("{}: {} fails at {}", f.name(), c.law, c.witness))),
    }
}

/// For a commutative idempotent target, `ΔF'(p, a) = F(p)·ΔF(p, a)` for
/// `a ≠ ε` (and `ε` otherwise) satisfies all three laws.
pub fn completion_for_idempotent(f: &StreamFunction, budget: usize, seed: u64) -> Result<StreamFunction> {
    let fl = f.target.flags();
    if !(fl.idempotent && fl.commutative) {
        return Err(precondition(format!("completion of {}", f.name()), "a commutative idempotent target"));
    }
    if let Some(e) = first_failure(f, LAW_INCREMENT, budget, seed) {
        return Err(e);
    }
    let (src, tgt, apply, upd) = (f.source.clone(), f.target.clone(), f.apply.clone(), f.update.clone());
    let completed = f.with_update(
        format!("{}'", f.name()),
        Arc::new(move |p, a| if src.is_identity(a) { tgt.identity() } else { tgt.mul(&apply(p), &upd(p, a)) }),
    );
    let r = check_stream_function(&completed, budget, sample::derive(seed, 1));
    match r.failures.first() {
        None => Ok(completed),
        Some(c) => Err(Error::Rejected(format!("{}: {} fails at {}", completed.name(), c.law, c.witness))),
    }
}

/// Feedback semantics of `F: M × U → N × U` on a list of batches:
/// `x₀ = F(ε)`, `yᵢ = (mᵢ, uᵢ₋₁)`, `xᵢ = ΔF(y₁⋯yᵢ₋₁, yᵢ)`, output `[n₀, …, n_k]`.
pub fn loop_semantics(f: &StreamFunction, batches: &[Value]) -> Result<Value> {
    if !matches!(f.source.kind(), MonoidKind::Product(..)) || !matches!(f.target.kind(), MonoidKind::Product(..)) {
        return Err(precondition(format!("loop of {}", f.name()), "product source and target"));
    }
    let (n0, mut u) = f.apply(&f.source.identity()).into_pair();
    let mut outs = vec![n0];
    let mut prefix = f.source.identity();
    for m in batches {
        let y = Value::pair(m.clone(), u);
        let (n, u2) = f.update(&prefix, &y).into_pair();
        prefix = f.source.mul(&prefix, &y);
        outs.push(n);
        u = u2;
    }
    Ok(Value::List(outs))
}

/// Every `Δ` fails for set difference `F((A, B)) = A \ B` at
/// `p = ({a}, ∅)`, `n = (∅, {a})`: `F(p·n) = ∅` while `F(p) = {a}`, and no
/// union with `{a}` is empty. Returns that witness after checking it.
pub fn set_difference_refutation(universe: &Carrier) -> Option<(Value, Value)> {
    let a = universe.enumeration()?.first()?.clone();
    let empty = Value::set([]);
    let p = Value::pair(Value::set([a.clone()]), empty.clone());
    let n = Value::pair(empty.clone(), Value::set([a]));
    let diff = |x: &Value| {
        let (l, r) = x.as_pair();
        Value::Set(l.as_set().difference(r.as_set()).cloned().collect())
    };
    let pn = Value::pair(
        Value::Set(p.as_pair().0.as_set() | n.as_pair().0.as_set()),
        Value::Set(p.as_pair().1.as_set() | n.as_pair().1.as_set()),
    );
    let fp = diff(&p);
    // F(p)·x ⊇ F(p) ≠ ∅ = F(p·n) for every x.
    (diff(&pn) == empty && !fp.as_set().is_empty()).then_some((p, n))
}
