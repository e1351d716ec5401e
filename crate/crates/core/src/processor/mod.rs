//! Stream processors: a state space `S`, a homomorphism `f: M → State[S, N]`,
//! an initial state `s_ε` and an initial output `o_ε`.
//!
//! Running `m` produces `o_ε · out(f(m)(s_ε))`. Feeding chunks one at a time
//! through a [`Session`] produces the same total for every factorisation.

pub mod combinators;
pub mod equiv;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value as Json;

use crate::algebra::monoid::{MonoidKind, StateSpace};
use crate::algebra::{Hom, Monoid};
use crate::error::{precondition, Error, Result};
use crate::state::{state_monoid, StateElement};
use crate::streamfn::StreamFunction;
use crate::value::Value;

pub use combinators::{eval, eval_pushed, fuse, loop_, par, pure, seq};
pub use equiv::{equiv_check, EquivVerdict, InputGen, Status};

#[derive(Clone)]
pub struct Processor {
    name: String,
    states: StateSpace,
    hom: Hom,
    init_state: Value,
    init_output: Value,
    output: Monoid,
}

impl fmt::Debug for Processor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Processor({}: {} ⇝ {})", self.name, self.input(), self.output)
    }
}

impl Processor {
    /// `hom` must land in `State[states, N]`; `N` becomes the output monoid.
    pub fn new(
        name: impl Into<String>,
        states: StateSpace,
        hom: Hom,
        init_state: Value,
        init_output: Value,
    ) -> Result<Processor> {
        let name = name.into();
        let output = match hom.target().kind() {
            MonoidKind::State(s, n) if s.name() == states.name() => n.clone(),
            _ => {
                return Err(Error::MonoidMismatch {
                    expected: format!("State[{}, _]", states.name()),
                    found: hom.target().name().into(),
                })
            }
        };
        Ok(Processor { name, states, hom, init_state, init_output, output })
    }

    /// A processor whose homomorphism is given per atom of the input, e.g.
    /// per list entry, and extended to words by threading state.
    pub fn on_atoms(
        name: impl Into<String>,
        input: &Monoid,
        output: &Monoid,
        states: StateSpace,
        init_state: Value,
        init_output: Value,
        step: impl Fn(&Value, &Value) -> (Value, Value) + Send + Sync + 'static,
    ) -> Result<Processor> {
        if !input.has_atoms() {
            return Err(precondition(format!("atom-wise processor on {}", input.name()), "a generator presentation"));
        }
        let name = name.into();
        let sm = state_monoid(&states, output);
        let step = Arc::new(step);
        let (inp, out) = (input.clone(), output.clone());
        let hom = Hom::new(
            name.clone(),
            input.clone(),
            sm,
            Arc::new(move |m| {
                let mut acc = StateElement::identity(&out);
                for a in inp.atoms(m).unwrap() {
                    let step = step.clone();
                    acc = acc.then(&StateElement::from_fn(&out, move |s| step(&a, s)));
                }
                Value::Fun(acc)
            }),
        );
        Processor::new(name, states, hom, init_state, init_output)
    }

    /// A processor whose homomorphism maps each input element to a state
    /// element directly.
    pub fn on_elements(
        name: impl Into<String>,
        input: &Monoid,
        output: &Monoid,
        states: StateSpace,
        init_state: Value,
        init_output: Value,
        f: impl Fn(&Value) -> StateElement + Send + Sync + 'static,
    ) -> Result<Processor> {
        let name = name.into();
        let sm = state_monoid(&states, output);
        let hom = Hom::new(name.clone(), input.clone(), sm, Arc::new(move |m| Value::Fun(f(m))));
        Processor::new(name, states, hom, init_state, init_output)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn renamed(mut self, name: impl Into<String>) -> Processor {
        self.name = name.into();
        self
    }
    pub fn input(&self) -> &Monoid {
        self.hom.source()
    }
    pub fn output(&self) -> &Monoid {
        &self.output
    }
    pub fn states(&self) -> &StateSpace {
        &self.states
    }
    pub fn hom(&self) -> &Hom {
        &self.hom
    }
    pub fn state_monoid(&self) -> &Monoid {
        self.hom.target()
    }
    pub fn init_state(&self) -> &Value {
        &self.init_state
    }
    pub fn init_output(&self) -> &Value {
        &self.init_output
    }

    /// `f(a)(s)`.
    pub fn step(&self, s: &Value, a: &Value) -> (Value, Value) {
        self.hom.apply(a).as_fun().run(s)
    }

    /// `⟦P⟧(m) = o_ε · out(f(m)(s_ε))`.
    pub fn run(&self, m: &Value) -> Value {
        let (_, o) = self.step(&self.init_state, m);
        self.output.mul(&self.init_output, &o)
    }

    /// Final state after consuming `m` from `s_ε`.
    pub fn final_state(&self, m: &Value) -> Value {
        self.step(&self.init_state, m).0
    }

    pub fn session(&self) -> Session<'_> {
        Session {
            proc: self,
            state: self.init_state.clone(),
            total: self.init_output.clone(),
            records: Vec::new(),
        }
    }

    /// The stream function this processor computes, with
    /// `ΔF(p, a) = out(f(a)(st(f(p))(s_ε)))`.
    pub fn stream_function(&self) -> StreamFunction {
        let (p1, p2) = (self.clone(), self.clone());
        StreamFunction::new(
            format!("⟦{}⟧", self.name),
            self.input().clone(),
            self.output.clone(),
            Arc::new(move |m| p1.run(m)),
            Arc::new(move |p, a| {
                let (sp, _) = p2.step(&p2.init_state, p);
                p2.step(&sp, a).1
            }),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub chunk: Json,
    pub increment: Json,
    pub state_digest: String,
}

/// Chunk-by-chunk execution of a processor.
pub struct Session<'a> {
    proc: &'a Processor,
    state: Value,
    total: Value,
    records: Vec<(Value, Value)>,
}

impl Session<'_> {
    /// Consumes one chunk and returns the output it adds.
    pub fn feed(&mut self, chunk: &Value) -> Value {
        let (s, o) = self.proc.step(&self.state, chunk);
        self.state = s;
        self.total = self.proc.output.mul(&self.total, &o);
        self.records.push((chunk.clone(), o.clone()));
        o
    }

    pub fn state(&self) -> &Value {
        &self.state
    }

    /// `o_ε` times every increment so far.
    pub fn total(&self) -> &Value {
        &self.total
    }

    pub fn steps(&self) -> usize {
        self.records.len()
    }

    /// Trace lines for `(chunk, increment)` pairs, with the digest of the
    /// state reached after replaying each prefix.
    pub fn trace(&self) -> Result<Vec<StepRecord>> {
        let mut s = self.proc.init_state.clone();
        let mut out = Vec::with_capacity(self.records.len());
        for (chunk, inc) in &self.records {
            s = self.proc.step(&s, chunk).0;
            out.push(StepRecord {
                chunk: self.proc.input().encode(chunk)?,
                increment: self.proc.output.encode(inc)?,
                state_digest: s.digest(),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::monoid::{int_add, list, Carrier};

    fn prefix_sum() -> Processor {
        let l = list(Carrier::int());
        Processor::on_atoms("psum", &l, &l, Carrier::int(), Value::Int(0), Value::ints([]), |a, s| {
            let t = s.as_int() + a.as_int();
            (Value::Int(t), Value::ints([t]))
        })
        .unwrap()
    }

    #[test]
    fn run_and_sessions_agree() {
        let p = prefix_sum();
        let whole = p.run(&Value::ints([1, 2, 3]));
        assert_eq!(whole, Value::ints([1, 3, 6]));
        let mut s = p.session();
        assert_eq!(s.feed(&Value::ints([1])), Value::ints([1]));
        assert_eq!(s.feed(&Value::ints([2, 3])), Value::ints([3, 6]));
        assert_eq!(s.total(), &whole);
        assert_eq!(s.state(), &Value::Int(6));
        assert_eq!(s.trace().unwrap().len(), 2);
    }

    #[test]
    fn new_rejects_mismatched_state_space() {
        let p = prefix_sum();
        let err = Processor::new("bad", Carrier::bits(), p.hom().clone(), Value::Int(0), Value::ints([]));
        assert!(err.is_err());
    }

    #[test]
    fn induced_update_is_incremental_output() {
        let f = prefix_sum().stream_function();
        assert_eq!(f.update(&Value::ints([1]), &Value::ints([2, 3])), Value::ints([3, 6]));
        let z = int_add();
        assert!(Processor::on_atoms("x", &z, &z, Carrier::int(), Value::Int(0), Value::Int(0), |_, s| {
            (s.clone(), Value::Int(0))
        })
        .is_err());
    }
}
