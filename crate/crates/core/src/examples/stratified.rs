//! Stratified set difference. Input strata are `(A, B)` pairs of positive and
//! negative facts; stratum `k` outputs `A_k \ B_{k-1}`, so a negative fact
//! only takes effect once its stratum is closed.
//!
//! Two models: strata separated by ticks in `T[Set × Set]`, and strata as
//! entries of a list.

use std::sync::Arc;

use crate::algebra::monoid::{list, product, set, Carrier, Monoid};
use crate::algebra::ticked::{inject, strata, tick, ticked};
use crate::processor::Processor;
use crate::state::StateElement;
use crate::streamfn::StreamFunction;
use crate::value::{Segment, Value};

pub fn facts() -> Carrier {
    Carrier::ints(0, 5)
}

pub fn fact_sets() -> Monoid {
    set(facts())
}

pub fn stratum() -> Monoid {
    let s = fact_sets();
    product(&s, &s)
}

fn diff(a: &Value, b: &Value) -> Value {
    Value::Set(a.as_set().difference(b.as_set()).cloned().collect())
}

fn states() -> Carrier {
    let s = fact_sets();
    let s2 = s.clone();
    Carrier::new(
        "(Set[Int[0..5]] × (Set[Int[0..5]] × Bool))",
        crate::value::Shape::pair(s.shape().clone(), crate::value::Shape::pair(s.shape().clone(), crate::value::Shape::Bool)),
        Arc::new(move |rng| {
            Value::pair(
                s2.sample(rng),
                Value::pair(s2.sample(rng), Value::Bool(crate::sample::coin(rng, 0.5))),
            )
        }),
    )
}

/// `T[Set × Set] ⇝ T[Set]`. State is `(B_{k-1}, (B_k so far, just ticked))`;
/// the flag keeps a repeated tick from closing an empty stratum.
pub fn ticked_processor() -> Processor {
    let input = ticked(&stratum());
    let out_set = fact_sets();
    let output = ticked(&out_set);
    let o = output.clone();
    Processor::on_elements(
        "stratified-diff",
        &input,
        &output,
        states(),
        Value::pair(Value::set([]), Value::pair(Value::set([]), Value::Bool(false))),
        output.identity(),
        move |v| {
            let mut acc = StateElement::identity(&o);
            for seg in v.as_segments() {
                let (s1, seg) = (out_set.clone(), seg.clone());
                acc = acc.then(&StateElement::from_fn(&o, move |st| {
                    let (prev, rest) = st.as_pair();
                    let (cur, ticked_) = rest.as_pair();
                    match &seg {
                        Segment::Tick if ticked_.as_bool() => (st.clone(), tick()),
                        Segment::Tick => {
                            (Value::pair(cur.clone(), Value::pair(Value::set([]), Value::Bool(true))), tick())
                        }
                        Segment::Elem(ab) => {
                            let (a, b) = ab.as_pair();
                            let cur2 = s1.mul(cur, b);
                            let emitted = inject(&s1, diff(a, prev));
                            (Value::pair(prev.clone(), Value::pair(cur2, Value::Bool(false))), emitted)
                        }
                    }
                }));
            }
            acc
        },
    )
    .expect("typed")
}

/// Direct evaluation of the ticked model from its strata.
pub fn ticked_oracle(v: &Value) -> Value {
    let s = stratum();
    let out = fact_sets();
    let mut segs = Vec::new();
    let mut prev_neg = Value::set([]);
    for (k, st) in strata(&s, v).into_iter().enumerate() {
        if k > 0 {
            segs.push(Segment::Tick);
        }
        let (a, b) = st.as_pair();
        segs.push(Segment::Elem(diff(a, &prev_neg)));
        prev_neg = b.clone();
    }
    crate::algebra::ticked::normalize(&out, segs)
}

pub fn ticked_fn() -> StreamFunction {
    ticked_processor().stream_function()
}

/// `List[Set × Set] ⇝ List[Set]`, state is the previous negative set.
pub fn list_processor() -> Processor {
    let input = list(stratum().carrier());
    let output = list(fact_sets().carrier());
    Processor::on_atoms("stratified-diff-list", &input, &output, fact_sets().carrier(), Value::set([]), Value::List(vec![]), |ab, prev| {
        let (a, b) = ab.as_pair();
        (b.clone(), Value::List(vec![diff(a, prev)]))
    })
    .expect("typed")
}

fn list_from(prev: &Value, xs: &[Value]) -> Vec<Value> {
    let mut prev = prev.clone();
    xs.iter()
        .map(|ab| {
            let (a, b) = ab.as_pair();
            let d = diff(a, &prev);
            prev = b.clone();
            d
        })
        .collect()
}

/// `G` with `ΔG(p, a)` computed from the last negative set of `p`.
pub fn list_fn() -> StreamFunction {
    let input = list(stratum().carrier());
    let output = list(fact_sets().carrier());
    StreamFunction::new(
        "stratified-diff-list",
        input,
        output,
        Arc::new(|x| Value::List(list_from(&Value::set([]), x.as_list()))),
        Arc::new(|p, a| {
            let prev = p.as_list().last().map(|ab| ab.as_pair().1.clone()).unwrap_or_else(|| Value::set([]));
            Value::List(list_from(&prev, a.as_list()))
        }),
    )
}

/// Strata as a ticked word `(A₁,B₁) ⊤ (A₂,B₂) ⊤ …`.
pub fn strata_to_ticked(xs: &[Value]) -> Value {
    let s = stratum();
    let mut segs = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            segs.push(Segment::Tick);
        }
        segs.push(Segment::Elem(x.clone()));
    }
    crate::algebra::ticked::normalize(&s, segs)
}

/// List output rendered in the ticked model.
pub fn sets_to_ticked(xs: &[Value]) -> Value {
    let out = fact_sets();
    let mut segs = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            segs.push(Segment::Tick);
        }
        segs.push(Segment::Elem(x.clone()));
    }
    crate::algebra::ticked::normalize(&out, segs)
}
