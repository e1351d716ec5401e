//! Processors of shape `M × U ⇝ N × U` for `loop`.

use std::sync::Arc;

use crate::algebra::monoid::{int_add, product, set, Carrier, Monoid};
use crate::algebra::Hom;
use crate::processor::{loop_, pure, Processor};
use crate::state::StateElement;
use crate::value::Value;

/// `F(m, u) = (u, u + m)` on `ℤ × ℤ`, a homomorphism.
pub fn swap_add_hom() -> Hom {
    let z = int_add();
    let zz = product(&z, &z);
    Hom::new(
        "swap-add",
        zz.clone(),
        zz,
        Arc::new(|x| {
            let (m, u) = x.as_pair();
            Value::pair(u.clone(), Value::Int(u.as_int() + m.as_int()))
        }),
    )
}

pub fn swap_add() -> Processor {
    pure(&swap_add_hom())
}

pub fn swap_add_loop() -> Processor {
    loop_(&swap_add()).expect("typed").renamed("loop swap-add")
}

/// Largest fact plus one; successors at or past it are not fed back.
pub const REACH_LIMIT: i64 = 7;

pub fn reach_facts() -> Carrier {
    Carrier::ints(0, REACH_LIMIT)
}

pub fn reach_sets() -> Monoid {
    set(reach_facts())
}

/// `Set × Set ⇝ Set × Set`. Each round takes new seed facts and the
/// previous round's feedback, emits the facts not seen before and feeds
/// back their successors. State is the set of facts seen.
pub fn successor_closure() -> Processor {
    let s = reach_sets();
    let ss = product(&s, &s);
    let o = ss.clone();
    Processor::on_elements("successors", &ss, &ss, s.carrier(), Value::set([]), ss.identity(), move |x| {
        let (m, u) = x.as_pair();
        let incoming: std::collections::BTreeSet<Value> = m.as_set() | u.as_set();
        StateElement::from_fn(&o, move |seen| {
            let fresh: std::collections::BTreeSet<Value> = incoming.difference(seen.as_set()).cloned().collect();
            let next = fresh.iter().map(|v| v.as_int() + 1).filter(|v| *v < REACH_LIMIT).map(Value::Int);
            let seen2 = Value::Set(seen.as_set() | &fresh);
            (seen2, Value::pair(Value::Set(fresh.clone()), Value::set(next)))
        })
    })
    .expect("typed")
}

pub fn successor_loop() -> Processor {
    loop_(&successor_closure()).expect("typed").renamed("loop successors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streamfn::loop_semantics;

    #[test]
    fn swap_add_on_three_ones() {
        assert_eq!(swap_add_loop().run(&Value::ints([1, 1, 1])), Value::ints([0, 0, 1, 2]));
        assert_eq!(swap_add_loop().run(&Value::ints([])), Value::ints([0]));
    }

    #[test]
    fn successors_reach_one_level_per_round() {
        let e = Value::set([]);
        let batches = vec![Value::set([Value::Int(2)]), e.clone(), e.clone()];
        let out = successor_loop().run(&Value::List(batches.clone()));
        let want = Value::List(vec![e, Value::set([Value::Int(2)]), Value::set([Value::Int(3)]), Value::set([Value::Int(4)])]);
        assert_eq!(out, want);
        let sem = loop_semantics(&successor_closure().stream_function(), &batches).unwrap();
        assert_eq!(sem, want);
    }
}
