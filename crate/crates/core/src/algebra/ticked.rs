//! `T[M]`: the free product of `M` with the two-element join semilattice.
//!
//! Elements are kept in alternating normal form. Adjacent `M` segments are
//! multiplied, identity segments vanish and adjacent ticks collapse, since
//! `⊤ ∨ ⊤ = ⊤`.

use std::sync::Arc;

use crate::algebra::monoid::{Flags, Monoid, MonoidKind};
use crate::sample;
use crate::value::{Segment, Shape, Value};

/// Appends one segment, restoring normal form.
pub fn push_segment(m: &Monoid, out: &mut Vec<Segment>, seg: Segment) {
    match seg {
        Segment::Tick => {
            if !matches!(out.last(), Some(Segment::Tick)) {
                out.push(Segment::Tick);
            }
        }
        Segment::Elem(x) => {
            if m.is_identity(&x) {
                return;
            }
            if let Some(Segment::Elem(y)) = out.last() {
                let z = m.mul(y, &x);
                out.pop();
                if !m.is_identity(&z) {
                    out.push(Segment::Elem(z));
                }
            } else {
                out.push(Segment::Elem(x));
            }
        }
    }
}

pub fn normalize(m: &Monoid, segs: impl IntoIterator<Item = Segment>) -> Value {
    let mut out = Vec::new();
    for s in segs {
        push_segment(m, &mut out, s);
    }
    Value::Ticked(out)
}

pub fn tick() -> Value {
    Value::Ticked(vec![Segment::Tick])
}

/// The embedding `M → T[M]`.
pub fn inject(m: &Monoid, x: Value) -> Value {
    normalize(m, [Segment::Elem(x)])
}

pub fn ticked(m: &Monoid) -> Monoid {
    let (mp, ms, mn, mg) = (m.clone(), m.clone(), m.clone(), m.clone());
    let mut b = Monoid::builder(
        format!("T[{}]", m.name()),
        Shape::Ticked(Box::new(m.shape().clone())),
        Value::Ticked(vec![]),
        Arc::new(move |a, b| {
            let mut out = a.as_segments().to_vec();
            for s in b.as_segments() {
                push_segment(&mp, &mut out, s.clone());
            }
            Value::Ticked(out)
        }),
        Arc::new(move |rng| {
            let n = sample::word_len(rng);
            normalize(
                &ms,
                (0..n).map(|_| {
                    if sample::coin(rng, 0.3) {
                        Segment::Tick
                    } else {
                        Segment::Elem(ms.sample(rng))
                    }
                }),
            )
        }),
    )
    .kind(MonoidKind::Ticked(m.clone()))
    .flags(Flags::default())
    .normalize(Arc::new(move |v| normalize(&mn, v.as_segments().iter().cloned())))
    .generators(Arc::new(move |rng| {
        if sample::coin(rng, 0.3) {
            tick()
        } else {
            inject(&mg, mg.sample_generator(rng))
        }
    }));
    let mf = m.clone();
    b = b.factor(Arc::new(move |v| {
        let mut out = Vec::new();
        for s in v.as_segments() {
            match s {
                Segment::Tick => out.push(tick()),
                Segment::Elem(x) => match mf.factor(x) {
                    Some(gens) => out.extend(gens.into_iter().map(|g| Value::Ticked(vec![Segment::Elem(g)]))),
                    None => out.push(Value::Ticked(vec![Segment::Elem(x.clone())])),
                },
            }
        }
        out
    }));
    // Runs of `M` segments between ticks are concatenated in one go.
    let mc = m.clone();
    b = b.concat(Arc::new(move |items| {
        let mut out = Vec::new();
        let mut run = Vec::new();
        for v in items {
            let Value::Ticked(segs) = v else { unreachable!("ticked value") };
            for s in segs {
                match s {
                    Segment::Elem(x) => run.push(x),
                    Segment::Tick => {
                        if !run.is_empty() {
                            push_segment(&mc, &mut out, Segment::Elem(mc.mconcat(std::mem::take(&mut run))));
                        }
                        push_segment(&mc, &mut out, Segment::Tick);
                    }
                }
            }
        }
        if !run.is_empty() {
            push_segment(&mc, &mut out, Segment::Elem(mc.mconcat(run)));
        }
        Value::Ticked(out)
    }));
    let me = m.clone();
    b = b.equal(Arc::new(move |a, b| {
        let (a, b) = (a.as_segments(), b.as_segments());
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| match (x, y) {
                (Segment::Tick, Segment::Tick) => true,
                (Segment::Elem(x), Segment::Elem(y)) => me.eq(x, y),
                _ => false,
            })
    }));
    b.build()
}

/// Splits a ticked element into its strata: the `M` contents between ticks.
/// A leading or trailing tick yields an identity stratum at that end.
pub fn strata(m: &Monoid, v: &Value) -> Vec<Value> {
    let mut out = vec![m.identity()];
    for s in v.as_segments() {
        match s {
            Segment::Tick => out.push(m.identity()),
            Segment::Elem(x) => *out.last_mut().unwrap() = x.clone(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::monoid::{int_add, list};
    use crate::algebra::monoid::Carrier;

    fn l(xs: &[i64]) -> Segment {
        Segment::Elem(Value::ints(xs.iter().copied()))
    }

    #[test]
    fn adjacent_segments_merge_and_ticks_collapse() {
        let m = list(Carrier::int());
        let v = normalize(&m, [l(&[1]), l(&[2]), Segment::Tick, l(&[]), Segment::Tick, l(&[3])]);
        assert_eq!(v, Value::Ticked(vec![l(&[1, 2]), Segment::Tick, l(&[3])]));
    }

    #[test]
    fn cancellation_inside_a_group_exposes_tick_collapse() {
        let z = int_add();
        let t = ticked(&z);
        let a = normalize(&z, [Segment::Tick, Segment::Elem(Value::Int(2))]);
        let b = normalize(&z, [Segment::Elem(Value::Int(-2)), Segment::Tick]);
        assert_eq!(t.mul(&a, &b), tick());
    }

    #[test]
    fn strata_split_on_ticks() {
        let m = list(Carrier::int());
        let v = normalize(&m, [Segment::Tick, l(&[1]), Segment::Tick]);
        assert_eq!(strata(&m, &v), vec![Value::ints([]), Value::ints([1]), Value::ints([])]);
    }
}
