//! Running sums over integer lists.

use std::sync::Arc;

use crate::algebra::monoid::{list, Carrier};
use crate::algebra::Monoid;
use crate::processor::Processor;
use crate::streamfn::StreamFunction;
use crate::value::Value;

pub fn int_list() -> Monoid {
    list(Carrier::int())
}

fn running(start: i64, xs: &[Value]) -> Vec<i64> {
    xs.iter()
        .scan(start, |acc, x| {
            *acc += x.as_int();
            Some(*acc)
        })
        .collect()
}

/// `prefixSum` with `ΔprefixSum(xs, ys) = [Σxs + y | y ∈ prefixSum(ys)]`.
pub fn prefix_sum_fn() -> StreamFunction {
    let l = int_list();
    StreamFunction::new(
        "prefix-sum",
        l.clone(),
        l,
        Arc::new(|x| Value::ints(running(0, x.as_list()))),
        Arc::new(|p, a| {
            let base: i64 = p.as_list().iter().map(Value::as_int).sum();
            Value::ints(running(base, a.as_list()))
        }),
    )
}

/// State is the running total.
pub fn prefix_sum_processor() -> Processor {
    let l = int_list();
    Processor::on_atoms("prefix-sum", &l, &l, Carrier::int(), Value::Int(0), Value::ints([]), |a, s| {
        let t = s.as_int() + a.as_int();
        (Value::Int(t), Value::ints([t]))
    })
    .expect("prefix sum is well typed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{out, st};

    #[test]
    fn update_matches_worked_value() {
        let f = prefix_sum_fn();
        assert_eq!(f.update(&Value::ints([1]), &Value::ints([2, 3])), Value::ints([3, 6]));
        assert_eq!(f.apply(&Value::ints([1, 2, 3])), Value::ints([1, 3, 6]));
    }

    #[test]
    fn decomposition_of_one_two_three() {
        let p = prefix_sum_processor();
        let alpha = p.hom().apply(&Value::ints([1, 2, 3]));
        assert_eq!(st(&alpha, &Value::Int(0)), Value::Int(6));
        assert_eq!(out(&alpha, &Value::Int(0)), Value::ints([1, 3, 6]));
    }
}
