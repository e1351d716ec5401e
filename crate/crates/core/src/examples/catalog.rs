//! Everything the law suites run over, grouped by scope.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value as Json;

use crate::algebra::laws::{check_homomorphism, check_monoid_laws, LawReport};
use crate::algebra::monoid::{bag, bool_or, int_add, list, product, set, Carrier, Monoid};
use crate::algebra::{ticked, Hom};
use crate::error::{Error, Result};
use crate::processor::equiv::check_streaming;
use crate::processor::pure;
use crate::repr::{check_collapse, check_embedding, collapse_hom, defunctionalize, table_monoid, tabulate};
use crate::sample;
use crate::state::state_monoid;
use crate::streamfn::{check_stream_function, set_difference_refutation, StreamFunction};
use crate::value::{Shape, Value};

use super::{adder, feedback, join, prefix, registry, stratified, tcp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    All,
    Monoids,
    Homs,
    Streamfns,
    Processors,
    Embeddings,
}

impl FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scope> {
        Ok(match s {
            "all" => Scope::All,
            "monoids" => Scope::Monoids,
            "homs" => Scope::Homs,
            "streamfns" => Scope::Streamfns,
            "processors" => Scope::Processors,
            "embeddings" => Scope::Embeddings,
            _ => return Err(Error::UnknownRef(s.into())),
        })
    }
}

pub fn monoids() -> Vec<Monoid> {
    let bits = list(Carrier::bits());
    let paths = join::JoinConfig::paths(3);
    vec![
        int_add(),
        bool_or(),
        bits.clone(),
        list(Carrier::int()),
        set(Carrier::ints(0, 5)),
        bag(Carrier::ints(0, 3)),
        product(&int_add(), &bool_or()),
        paths.input(),
        paths.pairs_monoid(),
        ticked(&bits),
        ticked(&stratified::fact_sets()),
        state_monoid(&Carrier::bits(), &bits),
        table_monoid(&Carrier::bits(), &bits).expect("bits are enumerable"),
        adder::adder_input(),
        tcp::data(),
        tcp::pack(),
        tcp::re(),
    ]
}

/// `(a, b) ↦ a - b` posing as a monoid; associativity fails.
pub fn broken_monoid() -> Monoid {
    Monoid::builder(
        "IntSub",
        Shape::Int,
        Value::Int(0),
        Arc::new(|a, b| Value::Int(a.as_int() - b.as_int())),
        Arc::new(|rng| Value::Int(sample::small_int(rng, -9, 9))),
    )
    .build()
}

pub fn homs() -> Vec<Hom> {
    let paths = join::JoinConfig::paths(3);
    let double = Hom::new("double", int_add(), int_add(), Arc::new(|x| Value::Int(2 * x.as_int())));
    vec![
        join::filter_hom(&paths),
        join::split_hom(&paths),
        Hom::merge(&paths.pairs_monoid()).expect("commutative"),
        feedback::swap_add_hom(),
        Hom::map_list(&double),
        double,
        Hom::flatten(&list(Carrier::int())).expect("list"),
        prefix::prefix_sum_processor().hom().clone(),
        adder::adder_processor().hom().clone(),
        stratified::list_processor().hom().clone(),
        join::pairs_processor(&paths).hom().clone(),
    ]
}

pub fn stream_functions() -> Vec<StreamFunction> {
    let paths = join::JoinConfig::paths(3);
    vec![
        prefix::prefix_sum_fn(),
        join::pairs_fn(&paths),
        stratified::ticked_fn(),
        stratified::list_fn(),
        StreamFunction::from_homomorphism(&join::filter_hom(&paths)),
    ]
}

fn seed_for(seed: u64, subject: &str) -> u64 {
    sample::derive(seed, sample::label(subject))
}

fn tagged(tag: &str, mut r: LawReport) -> LawReport {
    r.subject = format!("{tag} {}", r.subject);
    r
}

/// Runs every suite in `scope`, one report per subject, in a fixed order.
pub fn run_suite(scope: Scope, budget: usize, seed: u64) -> Vec<LawReport> {
    let on = |s: Scope| scope == Scope::All || scope == s;
    let mut out = Vec::new();
    if on(Scope::Monoids) {
        for m in monoids() {
            out.push(tagged("monoid", check_monoid_laws(&m, budget, seed_for(seed, m.name()))));
        }
    }
    if on(Scope::Homs) {
        for h in homs() {
            out.push(tagged("hom", check_homomorphism(&h, budget, seed_for(seed, h.name()))));
        }
    }
    if on(Scope::Streamfns) {
        for f in stream_functions() {
            out.push(tagged("streamfn", check_stream_function(&f, budget, seed_for(seed, f.name()))));
        }
    }
    if on(Scope::Processors) {
        out.extend(processor_suite(budget, seed));
    }
    if on(Scope::Embeddings) {
        out.extend(embedding_suite(budget, seed));
    }
    out
}

/// Soundness of every registered example: its denotation satisfies the
/// stream-function laws and chunked runs agree with whole runs. Examples
/// are checked concurrently; reports keep registry order.
pub fn processor_suite(budget: usize, seed: u64) -> Vec<LawReport> {
    registry()
        .into_par_iter()
        .map(|ex| {
            let s = seed_for(seed, ex.name);
            let mut r = LawReport::new(format!("processor {}", ex.name));
            r.merge(check_stream_function(&ex.processor.stream_function(), budget, sample::derive(s, 1)));
            r.merge(check_streaming(&ex.processor, &ex.inputs, budget, sample::derive(s, 2)));
            r
        })
        .collect()
}

pub fn embedding_suite(budget: usize, seed: u64) -> Vec<LawReport> {
    let f = adder::adder_processor().hom().clone();
    let paths = join::JoinConfig::paths(3);
    let defun = defunctionalize(&f, &adder::adder_tag_table()).expect("table covers every pair");
    let table = tabulate(&f).expect("carry is enumerable");
    let collapse = collapse_hom(pure(&join::filter_hom(&paths)).hom()).expect("pure state is trivial");
    vec![
        tagged("embedding", check_embedding(&defun, &f, budget, seed_for(seed, "defunctionalize"))),
        tagged("embedding", check_embedding(&table, &f, budget, seed_for(seed, "tabulate"))),
        tagged("embedding", check_collapse(&collapse, budget, seed_for(seed, "collapse"))),
    ]
}

/// A check that must find a counterexample.
#[derive(Clone, Debug, Serialize)]
pub struct Refutation {
    pub claim: String,
    pub witness: Option<Json>,
}

impl Refutation {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

pub fn refutations(budget: usize, seed: u64) -> Vec<Refutation> {
    let paths = join::JoinConfig::paths(3);
    let pairs = check_homomorphism(&join::pairs_as_hom(&paths), budget, seed_for(seed, "pairs"));
    let diff = set_difference_refutation(&Carrier::ints(0, 3));
    vec![
        Refutation { claim: "Pairs is not a homomorphism".into(), witness: pairs.failures.first().map(|f| f.witness.clone()) },
        Refutation {
            claim: "set difference is not a stream function".into(),
            witness: diff.map(|(p, n)| serde_json::json!({ "p": p.to_json_lossy(), "n": n.to_json_lossy() })),
        },
    ]
}
