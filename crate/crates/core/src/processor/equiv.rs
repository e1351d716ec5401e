//! Observational equivalence of processors and the per-processor soundness
//! suite.
//!
//! Two processors are equivalent when they denote the same stream function.
//! Checks compare whole-input runs and chunked runs, over every input of a
//! finite generator or over seeded samples.

use std::sync::Arc;

use serde::Serialize;
use serde_json::Value as Json;

use crate::algebra::laws::{check_homomorphism, sample_mixed, shrink, witness, LawReport};
use crate::algebra::monoid::SampleFn;
use crate::algebra::{Hom, Monoid};
use crate::error::Result;
use crate::processor::Processor;
use crate::sample::{self, Rng};
use crate::streamfn::check_stream_function;
use crate::value::Value;

/// Source of test inputs.
#[derive(Clone)]
pub enum InputGen {
    Finite(Arc<Vec<Value>>),
    Sampled(SampleFn),
}

impl InputGen {
    pub fn from_monoid(m: &Monoid) -> InputGen {
        let m = m.clone();
        InputGen::Sampled(Arc::new(move |rng| sample_mixed(&m, rng)))
    }

    pub fn finite(values: Vec<Value>) -> InputGen {
        InputGen::Finite(Arc::new(values))
    }

    pub fn sampled(f: impl Fn(&mut Rng) -> Value + Send + Sync + 'static) -> InputGen {
        InputGen::Sampled(Arc::new(f))
    }

    fn inputs(&self, budget: usize, rng: &mut Rng) -> (Vec<Value>, bool) {
        match self {
            InputGen::Finite(v) => (v.to_vec(), true),
            InputGen::Sampled(f) => ((0..budget).map(|_| f(rng)).collect(), false),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Equivalent,
    NotEquivalent,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivVerdict {
    pub status: Status,
    pub cases: usize,
    pub exhaustive: bool,
    pub witness: Option<Json>,
}

impl EquivVerdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Equivalent
    }
}

/// Largest generator count whose compositions are all enumerated.
const ALL_COMPOSITIONS_UP_TO: usize = 5;

/// Ways of cutting `x` into consecutive chunks whose product is `x`: every
/// composition for short inputs, otherwise per-generator plus `extra`
/// seeded cuts. The whole input as one chunk is always first.
pub fn factorizations(m: &Monoid, x: &Value, extra: usize, rng: &mut Rng) -> Vec<Vec<Value>> {
    let mut out = vec![vec![x.clone()]];
    let Some(gens) = m.factor(x) else { return out };
    if gens.len() <= 1 {
        return out;
    }
    let cut = |mask: &[bool]| -> Vec<Value> {
        let mut chunks = Vec::new();
        let mut cur = vec![gens[0].clone()];
        for (i, g) in gens.iter().enumerate().skip(1) {
            if mask[i - 1] {
                chunks.push(m.mconcat(std::mem::take(&mut cur)));
            }
            cur.push(g.clone());
        }
        chunks.push(m.mconcat(cur));
        chunks
    };
    let n = gens.len() - 1;
    if gens.len() <= ALL_COMPOSITIONS_UP_TO {
        for bits in 1u32..(1 << n) {
            let mask: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            out.push(cut(&mask));
        }
    } else {
        out.push(cut(&vec![true; n]));
        for _ in 0..extra {
            let mask: Vec<bool> = (0..n).map(|_| sample::coin(rng, 0.3)).collect();
            out.push(cut(&mask));
        }
    }
    out
}

/// Output of `p` when fed `chunks` one at a time.
pub fn run_chunked(p: &Processor, chunks: &[Value]) -> Value {
    let mut s = p.session();
    for c in chunks {
        s.feed(c);
    }
    s.total().clone()
}

fn chunks_json(chunks: &[Value]) -> Json {
    Json::Array(chunks.iter().map(Value::to_json_lossy).collect())
}

/// Compares `p` and `q` on whole inputs and on chunked factorisations of
/// each input. Stops at the first disagreement, shrinking the input.
pub fn equiv_check(p: &Processor, q: &Processor, gen: &InputGen, budget: usize, seed: u64) -> Result<EquivVerdict> {
    p.input().expect_same(q.input())?;
    p.output().expect_same(q.output())?;
    let mut rng = sample::rng(seed);
    let (inputs, exhaustive) = gen.inputs(budget, &mut rng);
    let (inp, out) = (p.input(), p.output());
    let whole_differs = |x: &[Value]| !out.eq(&p.run(&x[0]), &q.run(&x[0]));
    let mut cases = 0;
    for x in inputs {
        cases += 1;
        if whole_differs(std::slice::from_ref(&x)) {
            let small = shrink(&[inp], vec![x], whole_differs).remove(0);
            let (a, b) = (p.run(&small), q.run(&small));
            return Ok(EquivVerdict {
                status: Status::NotEquivalent,
                cases,
                exhaustive,
                witness: Some(witness(&[("input", &small), ("left", &a), ("right", &b)])),
            });
        }
        let whole = p.run(&x);
        for chunks in factorizations(inp, &x, 1, &mut rng).into_iter().skip(1) {
            for (side, proc_) in [("left", p), ("right", q)] {
                let got = run_chunked(proc_, &chunks);
                if !out.eq(&got, &whole) {
                    let mut w = witness(&[("input", &x), ("chunked", &got), ("whole", &whole)]);
                    w["chunks"] = chunks_json(&chunks);
                    w["side"] = Json::from(side);
                    return Ok(EquivVerdict { status: Status::NotEquivalent, cases, exhaustive, witness: Some(w) });
                }
            }
        }
    }
    Ok(EquivVerdict { status: Status::Equivalent, cases, exhaustive, witness: None })
}

pub const LAW_STREAMING: &str = "chunked runs agree";

/// Every factorisation of each sampled input yields the whole-input output.
pub fn check_streaming(p: &Processor, gen: &InputGen, budget: usize, seed: u64) -> LawReport {
    let mut rng = sample::rng(seed);
    let mut report = LawReport::new(format!("{} streaming", p.name()));
    let (inputs, _) = gen.inputs(budget, &mut rng);
    for x in inputs {
        report.cases += 1;
        let whole = p.run(&x);
        for chunks in factorizations(p.input(), &x, 2, &mut rng).into_iter().skip(1) {
            let got = run_chunked(p, &chunks);
            if !p.output().eq(&got, &whole) {
                let mut w = witness(&[("input", &x), ("chunked", &got), ("whole", &whole)]);
                w["chunks"] = chunks_json(&chunks);
                report.record(LAW_STREAMING, w);
                return report;
            }
        }
    }
    report
}

/// Soundness suite: the homomorphism into the state monoid, the laws of
/// the induced stream function, and chunked determinism.
pub fn check_processor(p: &Processor, budget: usize, seed: u64) -> LawReport {
    let mut report = LawReport::new(p.name());
    let hom = check_homomorphism(p.hom(), budget, sample::derive(seed, 1));
    report.merge(prefixed("hom", hom));
    report.merge(prefixed("stream", check_stream_function(&p.stream_function(), budget, sample::derive(seed, 2))));
    let gen = InputGen::from_monoid(p.input());
    report.merge(check_streaming(p, &gen, budget, sample::derive(seed, 3)));
    report
}

fn prefixed(tag: &str, mut r: LawReport) -> LawReport {
    for f in &mut r.failures {
        f.law = format!("{tag}: {}", f.law);
    }
    r
}

/// `⟦σ⟧` packaged as a candidate homomorphism.
pub fn denotation_hom(p: &Processor) -> Hom {
    let p1 = p.clone();
    Hom::new(format!("⟦{}⟧", p.name()), p.input().clone(), p.output().clone(), Arc::new(move |m| p1.run(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::monoid::{list, Carrier};
    use crate::processor::{pure, seq};

    fn psum(name: &str, offset: i64) -> Processor {
        let l = list(Carrier::ints(-3, 3));
        let out = list(Carrier::int());
        Processor::on_atoms(name, &l, &out, Carrier::int(), Value::Int(0), Value::ints([]), move |a, s| {
            let t = s.as_int() + a.as_int();
            (Value::Int(t), Value::ints([t + offset]))
        })
        .unwrap()
    }

    #[test]
    fn all_compositions_for_short_inputs() {
        let l = list(Carrier::int());
        let mut r = sample::rng(0);
        let f = factorizations(&l, &Value::ints([1, 2, 3]), 0, &mut r);
        assert_eq!(f.len(), 4);
        for chunks in f {
            assert_eq!(l.mconcat(chunks), Value::ints([1, 2, 3]));
        }
    }

    #[test]
    fn detects_and_shrinks_difference() {
        let v = equiv_check(&psum("a", 0), &psum("b", 1), &InputGen::from_monoid(&list(Carrier::ints(-3, 3))), 200, 1)
            .unwrap();
        assert_eq!(v.status, Status::NotEquivalent);
        let w = v.witness.unwrap();
        assert_eq!(w["input"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn processor_equals_itself_after_identity() {
        let p = psum("a", 0);
        let id = pure(&Hom::identity(p.input()));
        let q = seq(&id, &p).unwrap();
        let v = equiv_check(&p, &q, &InputGen::from_monoid(p.input()), 300, 2).unwrap();
        assert!(v.holds());
        assert_eq!(v.cases, 300);
    }

    #[test]
    fn soundness_suite_passes_for_prefix_sums() {
        let r = check_processor(&psum("a", 0), 300, 3);
        assert!(r.passed(), "{:?}", r.failures);
    }

    #[test]
    fn stateful_denotation_is_not_a_homomorphism() {
        let r = check_homomorphism(&denotation_hom(&psum("a", 0)), 300, 4);
        assert!(!r.passed());
    }
}
