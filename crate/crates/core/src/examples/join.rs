//! Incremental self-join of edge sets.
//!
//! The unfused pipeline computes all pairs and then filters them; the fused
//! processor filters each increment before it is emitted; the partitioned
//! processor runs two joins on hash buckets of the input and merges.

use std::sync::Arc;

use crate::algebra::monoid::{product, set, Carrier, Monoid};
use crate::algebra::{embed, tensor_product, Hom};
use crate::error::{Error, Result};
use crate::processor::{eval_pushed, fuse, par, pure, seq, Processor};
use crate::state::push_hom;
use crate::streamfn::{generic_decompose, StreamFunction};
use crate::value::Value;

pub type Pred = Arc<dyn Fn(&Value, &Value) -> bool + Send + Sync>;
pub type Bucket = Arc<dyn Fn(&Value) -> u64 + Send + Sync>;

/// Join predicate plus the two bucket functions used for partitioning.
/// Partitioning is sound when `hash_a(a) ≠ hash_b(b)` implies `¬pred(a, b)`.
#[derive(Clone)]
pub struct JoinConfig {
    pub vertices: i64,
    pub pred: Pred,
    pub hash_a: Bucket,
    pub hash_b: Bucket,
}

fn endpoints(e: &Value) -> (i64, i64) {
    let (a, b) = e.as_pair();
    (a.as_int(), b.as_int())
}

impl JoinConfig {
    /// Paths of length two: `(x, y)` joins `(y', z)` when `y = y'`, with
    /// buckets by the parity of the shared vertex.
    pub fn paths(vertices: i64) -> Self {
        JoinConfig {
            vertices,
            pred: Arc::new(|a, b| endpoints(a).1 == endpoints(b).0),
            hash_a: Arc::new(|a| endpoints(a).1.rem_euclid(2) as u64),
            hash_b: Arc::new(|b| endpoints(b).0.rem_euclid(2) as u64),
        }
    }

    /// Same predicate, but buckets that disagree with it.
    pub fn paths_with_bad_buckets(vertices: i64) -> Self {
        JoinConfig {
            hash_a: Arc::new(|a| endpoints(a).0.rem_euclid(2) as u64),
            ..JoinConfig::paths(vertices)
        }
    }

    pub fn edges(&self) -> Carrier {
        let c = Carrier::edges(self.vertices);
        let all = c.enumeration().unwrap().to_vec();
        Carrier::finite(format!("Edge{}", self.vertices), c.shape().clone(), all)
    }

    pub fn edge_sets(&self) -> Monoid {
        set(self.edges())
    }

    pub fn input(&self) -> Monoid {
        let e = self.edge_sets();
        product(&e, &e)
    }

    pub fn pairs_monoid(&self) -> Monoid {
        let e = self.edge_sets();
        tensor_product(&e, &e).expect("edge sets are commutative and presented")
    }

    /// Exhaustive check of the bucket condition over the edge universe.
    pub fn validate(&self) -> Result<()> {
        let all = self.edges().enumeration().unwrap().to_vec();
        for a in &all {
            for b in &all {
                if (self.hash_a)(a) != (self.hash_b)(b) && (self.pred)(a, b) {
                    return Err(Error::Rejected(format!("buckets separate joinable edges {a} and {b}")));
                }
            }
        }
        Ok(())
    }
}

/// `Pairs((m, n)) = m ⊗ n` with
/// `ΔPairs((m, n), (m', n')) = m⊗n' + m'⊗n + m'⊗n'`.
pub fn pairs_fn(cfg: &JoinConfig) -> StreamFunction {
    let t = cfg.pairs_monoid();
    let (t1, t2) = (t.clone(), t.clone());
    StreamFunction::new(
        "pairs",
        cfg.input(),
        t,
        Arc::new(move |x| {
            let (m, n) = x.as_pair();
            embed(&t1, m, n)
        }),
        Arc::new(move |p, d| {
            let (m, n) = p.as_pair();
            let (m2, n2) = d.as_pair();
            t2.mconcat(vec![embed(&t2, m, n2), embed(&t2, m2, n), embed(&t2, m2, n2)])
        }),
    )
}

/// `Pairs` offered as a homomorphism; it is not one.
pub fn pairs_as_hom(cfg: &JoinConfig) -> Hom {
    let f = pairs_fn(cfg);
    let f1 = f.clone();
    Hom::new("pairs", f.source().clone(), f.target().clone(), Arc::new(move |x| f1.apply(x)))
}

pub fn pairs_processor(cfg: &JoinConfig) -> Processor {
    generic_decompose(&pairs_fn(cfg)).renamed("pairs")
}

/// Keeps the pairs that satisfy the join predicate.
pub fn filter_hom(cfg: &JoinConfig) -> Hom {
    let t = cfg.pairs_monoid();
    let pred = cfg.pred.clone();
    Hom::new(
        "filter",
        t.clone(),
        t,
        Arc::new(move |x| {
            Value::Set(
                x.as_set()
                    .iter()
                    .filter(|ab| {
                        let (a, b) = ab.as_pair();
                        pred(a, b)
                    })
                    .cloned()
                    .collect(),
            )
        }),
    )
}

/// Splits `(m, n)` into the even and odd buckets of each side.
pub fn split_hom(cfg: &JoinConfig) -> Hom {
    let inp = cfg.input();
    let (ha, hb) = (cfg.hash_a.clone(), cfg.hash_b.clone());
    let part = |s: &Value, h: &Bucket, k: u64| Value::Set(s.as_set().iter().filter(|e| h(e) == k).cloned().collect());
    Hom::new(
        "split",
        inp.clone(),
        product(&inp, &inp),
        Arc::new(move |x| {
            let (m, n) = x.as_pair();
            Value::pair(
                Value::pair(part(m, &ha, 0), part(n, &hb, 0)),
                Value::pair(part(m, &ha, 1), part(n, &hb, 1)),
            )
        }),
    )
}

/// `pairs ; pure filter`.
pub fn unfused_join(cfg: &JoinConfig) -> Processor {
    seq(&pairs_processor(cfg), &pure(&filter_hom(cfg))).expect("typed").renamed("pairs;filter")
}

/// `(f_pairs ; filter_*) ; eval_{filter_*} pairs`, fused into one processor.
pub fn join_processor(cfg: &JoinConfig) -> Processor {
    let pairs = pairs_processor(cfg);
    let filter = filter_hom(cfg);
    let pushed = push_hom(&filter, pairs.states());
    let f = Hom::compose(pairs.hom(), &pushed).expect("typed");
    let ev = eval_pushed(&pairs, &filter).expect("typed");
    fuse(&f, &ev).expect("typed").renamed("join")
}

/// `pure split ; (join × join) ; pure merge`.
pub fn partitioned_join(cfg: &JoinConfig) -> Processor {
    let j = join_processor(cfg);
    let merge = Hom::merge(&cfg.pairs_monoid()).expect("commutative");
    let p = seq(&pure(&split_hom(cfg)), &par(&j, &j)).expect("typed");
    seq(&p, &pure(&merge)).expect("typed").renamed("partitioned-join")
}

/// Nested-loop reference: every `(a, b)` with `a ∈ m`, `b ∈ n`, `pred(a, b)`.
pub fn nested_loop_join(cfg: &JoinConfig, input: &Value) -> Value {
    let (m, n) = input.as_pair();
    let mut out = std::collections::BTreeSet::new();
    for a in m.as_set() {
        for b in n.as_set() {
            if (cfg.pred)(a, b) {
                out.insert(Value::pair(a.clone(), b.clone()));
            }
        }
    }
    Value::Set(out)
}

/// Every edge set over `vertices`, paired with itself.
pub fn all_self_inputs(cfg: &JoinConfig) -> Vec<Value> {
    let edges = cfg.edges().enumeration().unwrap().to_vec();
    assert!(edges.len() <= 20, "too many edge subsets to enumerate");
    (0u32..1 << edges.len())
        .map(|mask| {
            let s = Value::Set(edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e.clone()).collect());
            Value::pair(s.clone(), s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_homomorphism;

    fn e(a: i64, b: i64) -> Value {
        Value::pair(Value::Int(a), Value::Int(b))
    }

    #[test]
    fn paths_on_a_triangle() {
        let cfg = JoinConfig::paths(3);
        let s = Value::set([e(0, 1), e(1, 2)]);
        let x = Value::pair(s.clone(), s);
        let want = Value::set([Value::pair(e(0, 1), e(1, 2))]);
        assert_eq!(nested_loop_join(&cfg, &x), want);
        assert_eq!(unfused_join(&cfg).run(&x), want);
        assert_eq!(join_processor(&cfg).run(&x), want);
        assert_eq!(partitioned_join(&cfg).run(&x), want);
    }

    #[test]
    fn fused_join_only_stores_filtered_increments() {
        let cfg = JoinConfig::paths(3);
        let j = join_processor(&cfg);
        let mut s = j.session();
        let first = Value::pair(Value::set([e(0, 1)]), Value::set([]));
        let second = Value::pair(Value::set([]), Value::set([e(1, 2), e(2, 0)]));
        assert!(s.feed(&first).as_set().is_empty());
        assert_eq!(s.feed(&second), Value::set([Value::pair(e(0, 1), e(1, 2))]));
    }

    #[test]
    fn pairs_is_not_a_homomorphism() {
        let r = check_homomorphism(&pairs_as_hom(&JoinConfig::paths(3)), 200, 1);
        assert!(r.has_failure("preserves products"));
    }

    #[test]
    fn bucket_validation() {
        assert!(JoinConfig::paths(4).validate().is_ok());
        assert!(JoinConfig::paths_with_bad_buckets(4).validate().is_err());
    }
}
