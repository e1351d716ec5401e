//! Tensor product of commutative, generator-presented monoids.
//!
//! An element is a canonical collection of atom pairs `(a, b)`, one per
//! generator pair. If either factor is idempotent every pure tensor is
//! idempotent too, so the collection is a set; otherwise it is a multiset.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::algebra::monoid::{Flags, Monoid, MonoidKind};
use crate::error::{precondition, Result};
use crate::sample;
use crate::value::{Shape, Value};

fn set_mode(m: &Monoid, n: &Monoid) -> bool {
    m.flags().idempotent || n.flags().idempotent
}

pub fn tensor_product(m: &Monoid, n: &Monoid) -> Result<Monoid> {
    for f in [m, n] {
        if !f.flags().commutative {
            return Err(precondition(format!("tensor factor {}", f.name()), "a commutative monoid"));
        }
        if !f.has_atoms() {
            return Err(precondition(format!("tensor factor {}", f.name()), "a generator presentation"));
        }
    }
    let sets = set_mode(m, n);
    let atom_shape = Shape::pair(atom_shape(m), atom_shape(n));
    let shape = if sets { Shape::set(atom_shape) } else { Shape::Bag(Box::new(atom_shape)) };
    let identity = if sets { Value::Set(BTreeSet::new()) } else { Value::Bag(BTreeMap::new()) };
    let (ms, ns) = (m.clone(), n.clone());
    let sampler = Arc::new(move |rng: &mut sample::Rng| {
        let terms = 1 + sample::below(rng, 2);
        let mut acc: Option<Value> = None;
        for _ in 0..terms {
            let e = embed_with(&ms, &ns, sets, &ms.sample(rng), &ns.sample(rng));
            acc = Some(match acc {
                None => e,
                Some(a) => sum(sets, &a, &e),
            });
        }
        acc.unwrap()
    });
    let (mg, ng) = (m.clone(), n.clone());
    let b = Monoid::builder(
        format!("({} ⊗ {})", m.name(), n.name()),
        shape,
        identity,
        Arc::new(move |a, b| sum(sets, a, b)),
        sampler,
    )
    .kind(MonoidKind::Tensor(m.clone(), n.clone()))
    .flags(Flags { commutative: true, idempotent: sets, left_cancellative: !sets, group: false })
    .generators(Arc::new(move |rng| {
        embed_with(&mg, &ng, sets, &mg.sample_generator(rng), &ng.sample_generator(rng))
    }))
    .atoms(Arc::new(move |v| atoms_of(sets, v)), Arc::new(move |x| single(sets, x.clone())))
    .factor(Arc::new(move |v| atoms_of(sets, v).into_iter().map(|x| single(sets, x)).collect()));
    Ok(b.build())
}

fn atom_shape(m: &Monoid) -> Shape {
    match m.kind() {
        MonoidKind::List(c) | MonoidKind::Set(c) | MonoidKind::Bag(c) => c.shape().clone(),
        MonoidKind::Tensor(a, b) => Shape::pair(atom_shape(a), atom_shape(b)),
        _ => m.shape().clone(),
    }
}

fn single(sets: bool, x: Value) -> Value {
    if sets {
        Value::set([x])
    } else {
        crate::algebra::monoid::bag_of([x])
    }
}

fn atoms_of(sets: bool, v: &Value) -> Vec<Value> {
    if sets {
        v.as_set().iter().cloned().collect()
    } else {
        v.as_bag().iter().flat_map(|(x, n)| std::iter::repeat_n(x.clone(), *n as usize)).collect()
    }
}

fn sum(sets: bool, a: &Value, b: &Value) -> Value {
    if sets {
        let mut out = a.as_set().clone();
        out.extend(b.as_set().iter().cloned());
        Value::Set(out)
    } else {
        let mut out = a.as_bag().clone();
        for (x, n) in b.as_bag() {
            *out.entry(x.clone()).or_insert(0) += n;
        }
        Value::Bag(out)
    }
}

fn embed_with(m: &Monoid, n: &Monoid, sets: bool, x: &Value, y: &Value) -> Value {
    let xs = m.atoms(x).expect("atoms");
    let ys = n.atoms(y).expect("atoms");
    if sets {
        Value::Set(xs.iter().flat_map(|a| ys.iter().map(move |b| Value::pair(a.clone(), b.clone()))).collect())
    } else {
        let mut out = BTreeMap::new();
        for a in &xs {
            for b in &ys {
                *out.entry(Value::pair(a.clone(), b.clone())).or_insert(0u64) += 1;
            }
        }
        Value::Bag(out)
    }
}

/// The bilinear embedding `(m, n) ↦ m ⊗ n` into the tensor monoid `t`.
pub fn embed(t: &Monoid, m: &Value, n: &Value) -> Value {
    match t.kind() {
        MonoidKind::Tensor(a, b) => embed_with(a, b, set_mode(a, b), m, n),
        _ => panic!("{} is not a tensor product", t.name()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::monoid::{bag, bag_of, int_add, list, set, Carrier};

    fn s(xs: &[i64]) -> Value {
        Value::set(xs.iter().map(|x| Value::Int(*x)))
    }

    #[test]
    fn rejects_non_commutative_and_non_presented() {
        let c = Carrier::ints(0, 3);
        assert!(tensor_product(&list(c.clone()), &set(c.clone())).is_err());
        assert!(tensor_product(&int_add(), &set(c)).is_err());
    }

    #[test]
    fn set_mode_embedding_is_cartesian() {
        let c = Carrier::ints(0, 3);
        let t = tensor_product(&set(c.clone()), &set(c)).unwrap();
        let e = embed(&t, &s(&[1, 2]), &s(&[3]));
        assert_eq!(e, Value::set([Value::pair(Value::Int(1), Value::Int(3)), Value::pair(Value::Int(2), Value::Int(3))]));
        assert!(t.is_identity(&embed(&t, &s(&[]), &s(&[1]))));
    }

    #[test]
    fn bag_mode_counts_multiply() {
        let c = Carrier::ints(0, 3);
        let t = tensor_product(&bag(c.clone()), &bag(c)).unwrap();
        let x = bag_of([Value::Int(1), Value::Int(1)]);
        let y = bag_of([Value::Int(2), Value::Int(2), Value::Int(2)]);
        let e = embed(&t, &x, &y);
        assert_eq!(e.as_bag().values().copied().collect::<Vec<_>>(), vec![6]);
    }

    #[test]
    fn one_idempotent_factor_forces_set_mode() {
        let c = Carrier::ints(0, 3);
        let t = tensor_product(&set(c.clone()), &bag(c)).unwrap();
        assert!(t.flags().idempotent);
    }
}
