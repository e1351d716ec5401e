//! Building processors from homomorphisms and from other processors.

use std::sync::Arc;

use crate::algebra::monoid::{self, MonoidKind};
use crate::algebra::Hom;
use crate::error::{precondition, Error, Result};
use crate::processor::Processor;
use crate::state::{state_monoid, unit_space, StateElement};
use crate::value::Value;

/// `pure f = ({∗}, ∗ ↦ (∗, f(a)), ∗, ε)`.
pub fn pure(h: &Hom) -> Processor {
    let out = h.target().clone();
    let sm = state_monoid(&unit_space(), &out);
    let f = h.func();
    let hom = Hom::new(
        format!("pure({})", h.name()),
        h.source().clone(),
        sm,
        Arc::new(move |m| {
            let n = f(m);
            Value::Fun(StateElement::from_fn(&out, move |s| (s.clone(), n.clone())))
        }),
    );
    Processor::new(format!("pure({})", h.name()), unit_space(), hom, Value::Unit, h.target().identity())
        .expect("pure processors are well typed")
}

/// `eval σ = (S, id, s_ε, o_ε)`, a processor `State[S, N] ⇝ N`.
pub fn eval(p: &Processor) -> Processor {
    let id = Hom::identity(p.state_monoid());
    Processor::new(format!("eval({})", p.name()), p.states().clone(), id, p.init_state().clone(), p.init_output().clone())
        .expect("eval is well typed")
}

/// `eval_{g_*} σ = (S, id, s_ε, ε)`, a processor `State[S, P] ⇝ P` where
/// `g: N → P`.
pub fn eval_pushed(p: &Processor, g: &Hom) -> Result<Processor> {
    p.output().expect_same(g.source())?;
    let sm = state_monoid(p.states(), g.target());
    Processor::new(
        format!("eval[{}_*]({})", g.name(), p.name()),
        p.states().clone(),
        Hom::identity(&sm),
        p.init_state().clone(),
        g.target().identity(),
    )
}

/// `(S, f;g, s_ε, o_ε)` for `f: L → M` and `σ = (S, g, s_ε, o_ε)`.
pub fn fuse(f: &Hom, p: &Processor) -> Result<Processor> {
    let h = Hom::compose(f, p.hom())?;
    Processor::new(format!("{};{}", f.name(), p.name()), p.states().clone(), h, p.init_state().clone(), p.init_output().clone())
}

/// Sequential composition `σ ; τ`.
pub fn seq(p: &Processor, q: &Processor) -> Result<Processor> {
    p.output().expect_same(q.input())?;
    let states = p.states().product(q.states());
    let out = q.output().clone();
    let sm = state_monoid(&states, &out);
    let (p1, q1) = (p.clone(), q.clone());
    let hom = Hom::new(
        format!("{};{}", p.name(), q.name()),
        p.input().clone(),
        sm,
        Arc::new(move |m| {
            let (p1, q1, m) = (p1.clone(), q1.clone(), m.clone());
            Value::Fun(StateElement::from_fn(&q1.output().clone(), move |st| {
                let (s, t) = st.as_pair();
                let (s2, n) = p1.step(s, &m);
                let (t2, o) = q1.step(t, &n);
                (Value::pair(s2, t2), o)
            }))
        }),
    );
    let (t_n, p_n) = q.step(q.init_state(), p.init_output());
    Processor::new(
        format!("({} ; {})", p.name(), q.name()),
        states,
        hom,
        Value::pair(p.init_state().clone(), t_n),
        out.mul(q.init_output(), &p_n),
    )
}

/// Parallel composition `σ × τ` on product inputs.
pub fn par(p: &Processor, q: &Processor) -> Processor {
    par_with(p, q, false)
}

/// Like [`par`]; with `concurrent` the halves of each step run on the rayon
/// pool. Results are paired in a fixed order either way.
pub fn par_with(p: &Processor, q: &Processor, concurrent: bool) -> Processor {
    let states = p.states().product(q.states());
    let out = monoid::product(p.output(), q.output());
    let sm = state_monoid(&states, &out);
    let (p1, q1, o1) = (p.clone(), q.clone(), out.clone());
    let hom = Hom::new(
        format!("{}×{}", p.name(), q.name()),
        monoid::product(p.input(), q.input()),
        sm,
        Arc::new(move |mn| {
            let (p1, q1, mn) = (p1.clone(), q1.clone(), mn.clone());
            Value::Fun(StateElement::from_fn(&o1, move |st| {
                let (s, t) = st.as_pair();
                let (m, n) = mn.as_pair();
                let ((s2, a), (t2, b)) = if concurrent {
                    rayon::join(|| p1.step(s, m), || q1.step(t, n))
                } else {
                    (p1.step(s, m), q1.step(t, n))
                };
                (Value::pair(s2, t2), Value::pair(a, b))
            }))
        }),
    );
    Processor::new(
        format!("({} × {})", p.name(), q.name()),
        states,
        hom,
        Value::pair(p.init_state().clone(), q.init_state().clone()),
        Value::pair(p.init_output().clone(), q.init_output().clone()),
    )
    .expect("parallel composition is well typed")
}

/// `loop σ` for `σ: M × U ⇝ N × U` with `o_ε = (n₀, u₀)`: a processor
/// `List[M] ⇝ List[N]` that feeds each round's `U` output into the next.
pub fn loop_(p: &Processor) -> Result<Processor> {
    let (m, u) = match p.input().kind() {
        MonoidKind::Product(m, u) => (m.clone(), u.clone()),
        _ => return Err(precondition(format!("loop of {}", p.name()), "a product input M × U")),
    };
    let n = match p.output().kind() {
        MonoidKind::Product(n, u2) => {
            u.expect_same(u2).map_err(|_| Error::MonoidMismatch {
                expected: u.name().into(),
                found: u2.name().into(),
            })?;
            n.clone()
        }
        _ => return Err(precondition(format!("loop of {}", p.name()), "a product output N × U")),
    };
    let (n0, u0) = p.init_output().clone().into_pair();
    let states = p.states().product(&u.carrier());
    let input = monoid::list(m.carrier());
    let output = monoid::list(n.carrier());
    let p1 = p.clone();
    Processor::on_atoms(
        format!("loop({})", p.name()),
        &input,
        &output,
        states,
        Value::pair(p.init_state().clone(), u0),
        Value::List(vec![n0]),
        move |batch, su| {
            let (s, u) = su.as_pair();
            let (s2, nu) = p1.step(s, &Value::pair(batch.clone(), u.clone()));
            let (n, u2) = nu.into_pair();
            (Value::pair(s2, u2), Value::List(vec![n]))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::monoid::{int_add, list, product, Carrier};

    fn doubler() -> Hom {
        let l = list(Carrier::int());
        Hom::new("double", l.clone(), l, Arc::new(|x| Value::ints(x.as_list().iter().map(|v| 2 * v.as_int()))))
    }

    fn psum() -> Processor {
        let l = list(Carrier::int());
        Processor::on_atoms("psum", &l, &l, Carrier::int(), Value::Int(0), Value::ints([]), |a, s| {
            let t = s.as_int() + a.as_int();
            (Value::Int(t), Value::ints([t]))
        })
        .unwrap()
    }

    #[test]
    fn pure_applies_the_hom() {
        let p = pure(&doubler());
        assert_eq!(p.run(&Value::ints([1, 2])), Value::ints([2, 4]));
        assert!(p.states().is_singleton());
    }

    #[test]
    fn seq_threads_outputs() {
        let p = seq(&pure(&doubler()), &psum()).unwrap();
        assert_eq!(p.run(&Value::ints([1, 2, 3])), Value::ints([2, 6, 12]));
    }

    #[test]
    fn seq_initial_output_feeds_downstream() {
        let l = list(Carrier::int());
        let seeded = Processor::on_atoms("seeded", &l, &l, Carrier::unit(), Value::Unit, Value::ints([10]), |a, s| {
            (s.clone(), Value::List(vec![a.clone()]))
        })
        .unwrap();
        let p = seq(&seeded, &psum()).unwrap();
        assert_eq!(p.run(&Value::ints([])), Value::ints([10]));
        assert_eq!(p.run(&Value::ints([1])), Value::ints([10, 11]));
    }

    #[test]
    fn eval_runs_state_elements() {
        let p = psum();
        let e = eval(&p);
        let alpha = p.hom().apply(&Value::ints([1, 2]));
        assert_eq!(e.run(&alpha), p.run(&Value::ints([1, 2])));
    }

    #[test]
    fn par_is_componentwise_and_concurrency_is_invisible() {
        let a = par(&psum(), &pure(&doubler()));
        let b = par_with(&psum(), &pure(&doubler()), true);
        let x = Value::pair(Value::ints([1, 2]), Value::ints([3]));
        let want = Value::pair(Value::ints([1, 3]), Value::ints([6]));
        assert_eq!(a.run(&x), want);
        assert_eq!(b.run(&x), want);
    }

    #[test]
    fn loop_feeds_back() {
        let z = int_add();
        let zz = product(&z, &z);
        let f = Hom::new(
            "swap-add",
            zz.clone(),
            zz,
            Arc::new(|x| {
                let (m, u) = x.as_pair();
                Value::pair(u.clone(), Value::Int(u.as_int() + m.as_int()))
            }),
        );
        let l = loop_(&pure(&f)).unwrap();
        assert_eq!(l.run(&Value::ints([1, 1, 1])), Value::ints([0, 0, 1, 2]));
        assert_eq!(l.run(&Value::ints([])), Value::ints([0]));
        assert!(loop_(&psum()).is_err());
    }
}
