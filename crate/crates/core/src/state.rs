//! The state monoid `State[S, M]`: functions `S → S × M` under threaded
//! composition.
//!
//! An element is stored as a binary tree of step functions, so products are
//! O(1) and running an element is an iterative walk of its leaves.

use std::fmt;
use std::sync::Arc;

use crate::algebra::monoid::{Carrier, Flags, Monoid, MonoidKind, StateSpace};
use crate::algebra::Hom;
use crate::sample::{self, Rng};
use crate::value::{Shape, Value};

pub type StepFn = Arc<dyn Fn(&Value) -> (Value, Value) + Send + Sync>;

enum Chain {
    Empty,
    Leaf(StepFn),
    Node(Arc<Chain>, Arc<Chain>),
}

// Long products build deep trees; dismantle them without recursion.
impl Drop for Chain {
    fn drop(&mut self) {
        fn detach(c: &mut Chain, stack: &mut Vec<Arc<Chain>>) {
            if let Chain::Node(l, r) = c {
                stack.push(std::mem::replace(l, Arc::new(Chain::Empty)));
                stack.push(std::mem::replace(r, Arc::new(Chain::Empty)));
            }
        }
        let mut stack = Vec::new();
        detach(self, &mut stack);
        while let Some(c) = stack.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(c) {
                detach(&mut inner, &mut stack);
            }
        }
    }
}

#[derive(Clone)]
pub struct StateElement {
    output: Monoid,
    chain: Arc<Chain>,
}

impl fmt::Debug for StateElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateElement(→ {})", self.output)
    }
}

impl StateElement {
    pub fn identity(output: &Monoid) -> Self {
        StateElement { output: output.clone(), chain: Arc::new(Chain::Empty) }
    }

    pub fn from_fn(output: &Monoid, f: impl Fn(&Value) -> (Value, Value) + Send + Sync + 'static) -> Self {
        StateElement { output: output.clone(), chain: Arc::new(Chain::Leaf(Arc::new(f))) }
    }

    pub fn output(&self) -> &Monoid {
        &self.output
    }

    /// `self ⊙ other`: run `self`, then `other` from the state it leaves.
    pub fn then(&self, other: &StateElement) -> StateElement {
        match (&*self.chain, &*other.chain) {
            (Chain::Empty, _) => other.clone(),
            (_, Chain::Empty) => self.clone(),
            _ => StateElement {
                output: self.output.clone(),
                chain: Arc::new(Chain::Node(self.chain.clone(), other.chain.clone())),
            },
        }
    }

    pub fn run(&self, s: &Value) -> (Value, Value) {
        let mut state = s.clone();
        let mut outs = Vec::new();
        let mut stack: Vec<&Chain> = vec![&self.chain];
        while let Some(c) = stack.pop() {
            match c {
                Chain::Empty => {}
                Chain::Leaf(f) => {
                    let (s2, o) = f(&state);
                    state = s2;
                    outs.push(o);
                }
                Chain::Node(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        (state, self.output.mconcat(outs))
    }

    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.chain) as *const () as usize
    }
}

/// `st(α)(s)`.
pub fn st(alpha: &Value, s: &Value) -> Value {
    alpha.as_fun().run(s).0
}

/// `out(α)(s)`.
pub fn out(alpha: &Value, s: &Value) -> Value {
    alpha.as_fun().run(s).1
}

/// Push-forward `g_*(α) = s ↦ (s', g(a))` where `(s', a) = α(s)`.
pub fn push_forward(g: &Hom, alpha: &Value) -> Value {
    let a = alpha.as_fun().clone();
    let gf = g.func();
    Value::Fun(StateElement::from_fn(g.target(), move |s| {
        let (s2, o) = a.run(s);
        (s2, gf(&o))
    }))
}

/// `g_*` as a homomorphism `State[S, N] → State[S, P]`.
pub fn push_hom(g: &Hom, space: &StateSpace) -> Hom {
    let g1 = g.clone();
    Hom::new(
        format!("{}_*", g.name()),
        state_monoid(space, g.source()),
        state_monoid(space, g.target()),
        Arc::new(move |a| push_forward(&g1, a)),
    )
}

/// Largest enumeration probed exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

/// States at which extensional equality is tested: all of them when the
/// space is finite and small, otherwise `samples` seeded draws.
pub fn probe_states(space: &StateSpace, samples: usize, seed: u64) -> Vec<Value> {
    match space.enumeration() {
        Some(all) if all.len() <= EXHAUSTIVE_LIMIT => all.to_vec(),
        _ => {
            let mut rng = sample::rng(seed);
            (0..samples).map(|_| space.sample(&mut rng)).collect()
        }
    }
}

/// First probe state on which `α` and `β` disagree, if any.
pub fn ext_counterexample(
    space: &StateSpace,
    output: &Monoid,
    alpha: &Value,
    beta: &Value,
    samples: usize,
    seed: u64,
) -> Option<Value> {
    let (a, b) = (alpha.as_fun(), beta.as_fun());
    probe_states(space, samples, seed).into_iter().find(|s| {
        let (sa, oa) = a.run(s);
        let (sb, ob) = b.run(s);
        !(space.eq(&sa, &sb) && output.eq(&oa, &ob))
    })
}

pub fn ext_equal(space: &StateSpace, output: &Monoid, alpha: &Value, beta: &Value, samples: usize, seed: u64) -> bool {
    ext_counterexample(space, output, alpha, beta, samples, seed).is_none()
}

/// Probe count used by the monoid's own equality on infinite state spaces.
pub const EQ_SAMPLES: usize = 24;
const EQ_SEED: u64 = 0x57a7e;

fn value_hash(v: &Value) -> u64 {
    sample::label(&v.to_string())
}

/// A pseudo-random function `S → S × N`, fixed by `seed`.
pub fn random_element(space: &StateSpace, output: &Monoid, seed: u64) -> StateElement {
    let (sp, o) = (space.clone(), output.clone());
    StateElement::from_fn(output, move |s| {
        let mut r = sample::rng(sample::derive(seed, value_hash(s)));
        let s2 = if sample::coin(&mut r, 0.25) { s.clone() } else { sp.sample(&mut r) };
        let n = if sample::coin(&mut r, 0.2) { o.identity() } else { o.sample(&mut r) };
        (s2, n)
    })
}

fn sample_element(space: &StateSpace, output: &Monoid, rng: &mut Rng) -> StateElement {
    let k = sample::below(rng, 3);
    let mut acc = StateElement::identity(output);
    for _ in 0..=k {
        let seed = rand::Rng::gen::<u64>(rng);
        acc = acc.then(&random_element(space, output, seed));
    }
    acc
}

/// `State[S, N]` with extensional equality over probe states of `S`.
pub fn state_monoid(space: &StateSpace, output: &Monoid) -> Monoid {
    let (sp, o) = (space.clone(), output.clone());
    let (sp2, o2) = (space.clone(), output.clone());
    let (sp3, o3) = (space.clone(), output.clone());
    Monoid::builder(
        format!("State[{}, {}]", space.name(), output.name()),
        Shape::Fun,
        Value::Fun(StateElement::identity(output)),
        Arc::new(|a, b| Value::Fun(a.as_fun().then(b.as_fun()))),
        Arc::new(move |rng| Value::Fun(sample_element(&sp, &o, rng))),
    )
    .kind(MonoidKind::State(space.clone(), output.clone()))
    .flags(Flags::default())
    .equal(Arc::new(move |a, b| ext_equal(&sp2, &o2, a, b, EQ_SAMPLES, EQ_SEED)))
    .generators(Arc::new(move |rng| {
        let seed = rand::Rng::gen::<u64>(rng);
        Value::Fun(random_element(&sp3, &o3, seed))
    }))
    .build()
}

/// The singleton state space `{∗}` used by stateless processors.
pub fn unit_space() -> StateSpace {
    Carrier::unit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::laws::check_monoid_laws;
    use crate::algebra::monoid::{int_add, list};

    fn counter(out: &Monoid) -> StateElement {
        StateElement::from_fn(out, |s| {
            let n = s.as_int();
            (Value::Int(n + 1), Value::ints([n]))
        })
    }

    #[test]
    fn product_threads_state_and_multiplies_outputs() {
        let out = list(Carrier::int());
        let a = counter(&out);
        let ab = a.then(&a).then(&a);
        assert_eq!(ab.run(&Value::Int(5)), (Value::Int(8), Value::ints([5, 6, 7])));
        assert_eq!(StateElement::identity(&out).run(&Value::Int(2)), (Value::Int(2), Value::ints([])));
    }

    #[test]
    fn deep_chains_do_not_recurse() {
        let out = int_add();
        let inc = StateElement::from_fn(&out, |s| (Value::Int(s.as_int() + 1), Value::Int(1)));
        let mut acc = StateElement::identity(&out);
        for _ in 0..100_000 {
            acc = acc.then(&inc);
        }
        assert_eq!(acc.run(&Value::Int(0)), (Value::Int(100_000), Value::Int(100_000)));
    }

    #[test]
    fn state_monoid_laws_hold_extensionally() {
        let m = state_monoid(&Carrier::ints(0, 3), &list(Carrier::bits()));
        let r = check_monoid_laws(&m, 300, 9);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn push_forward_maps_output_only() {
        let out = list(Carrier::int());
        let len = Hom::new("len", out.clone(), int_add(), Arc::new(|x| Value::Int(x.as_list().len() as i64)));
        let a = Value::Fun(counter(&out).then(&counter(&out)));
        let pushed = push_forward(&len, &a);
        assert_eq!(st(&pushed, &Value::Int(0)), Value::Int(2));
        assert_eq!(super::out(&pushed, &Value::Int(0)), Value::Int(2));
    }

    #[test]
    fn extensional_equality_distinguishes() {
        let out = list(Carrier::int());
        let space = Carrier::ints(0, 3);
        let a = Value::Fun(counter(&out));
        let b = Value::Fun(counter(&out).then(&StateElement::identity(&out)));
        let c = Value::Fun(counter(&out).then(&counter(&out)));
        assert!(ext_equal(&space, &out, &a, &b, 8, 1));
        assert!(!ext_equal(&space, &out, &a, &c, 8, 1));
    }
}
