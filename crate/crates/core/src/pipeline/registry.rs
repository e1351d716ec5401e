//! Name resolution for terms, and the denotation of a term as a processor.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value as Json};

use crate::algebra::laws::{sample_mixed, witness};
use crate::algebra::monoid::{int_add, product, Carrier, Monoid, MonoidKind};
use crate::algebra::Hom;
use crate::error::{precondition, Error, Result};
use crate::examples::feedback::{reach_sets, successor_closure, swap_add_hom};
use crate::examples::inverse::{derivative, integral};
use crate::examples::join::{filter_hom, join_processor, pairs_processor, split_hom, JoinConfig};
use crate::examples::prefix::{int_list, prefix_sum_processor};
use crate::processor::{eval, eval_pushed, fuse, loop_, par, pure, seq, Processor};
use crate::sample;
use crate::state::push_hom;
use crate::value::Value;

use super::term::{HomExpr, ProcExpr, Term};

/// Samples used when registering a splitter.
pub const SPLITTER_CHECKS: usize = 256;

#[derive(Clone, Default)]
pub struct Registry {
    homs: BTreeMap<String, Hom>,
    procs: BTreeMap<String, Processor>,
    splitters: BTreeMap<String, Hom>,
    monoids: BTreeMap<String, Monoid>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    pub fn add_monoid(&mut self, m: &Monoid) {
        if let MonoidKind::Product(a, b) = m.kind() {
            let (a, b) = (a.clone(), b.clone());
            self.add_monoid(&a);
            self.add_monoid(&b);
        }
        self.monoids.entry(m.name().to_string()).or_insert_with(|| m.clone());
    }

    pub fn add_hom(&mut self, h: Hom) -> &mut Self {
        self.add_monoid(h.source());
        self.add_monoid(h.target());
        self.homs.insert(h.name().to_string(), h);
        self
    }

    pub fn add_processor(&mut self, p: Processor) -> &mut Self {
        self.add_monoid(p.input());
        self.add_monoid(p.output());
        self.procs.insert(p.name().to_string(), p);
        self
    }

    /// Registers `split: M → M × M` after checking `merge(split(x)) = x` on
    /// samples of a commutative `M`.
    pub fn add_splitter(&mut self, name: &str, h: Hom) -> Result<&mut Self> {
        let m = h.source().clone();
        let merge = Hom::merge(&m)?;
        h.target().expect_same(merge.source())?;
        let mut rng = sample::rng(sample::derive(sample::DEFAULT_SEED, sample::label(name)));
        for _ in 0..SPLITTER_CHECKS {
            let x = sample_mixed(&m, &mut rng);
            let back = merge.apply(&h.apply(&x));
            if !m.eq(&back, &x) {
                let w = witness(&[("input", &x), ("merged", &back)]);
                return Err(Error::Rejected(format!("splitter {name} does not merge back: {w}")));
            }
        }
        self.add_monoid(&m);
        self.splitters.insert(name.to_string(), h);
        Ok(self)
    }

    pub fn hom(&self, name: &str) -> Result<&Hom> {
        self.homs.get(name).ok_or_else(|| Error::UnknownRef(name.into()))
    }
    pub fn processor(&self, name: &str) -> Result<&Processor> {
        self.procs.get(name).ok_or_else(|| Error::UnknownRef(name.into()))
    }
    pub fn splitter(&self, name: &str) -> Result<&Hom> {
        self.splitters.get(name).ok_or_else(|| Error::UnknownRef(name.into()))
    }
    pub fn monoid(&self, name: &str) -> Result<&Monoid> {
        self.monoids.get(name).ok_or_else(|| Error::UnknownRef(name.into()))
    }

    /// Names of splitters whose monoid is `m`.
    pub fn splitters_for(&self, m: &Monoid) -> Vec<String> {
        self.splitters.iter().filter(|(_, h)| h.source().same(m)).map(|(k, _)| k.clone()).collect()
    }

    pub fn names(&self) -> Json {
        json!({
            "homs": self.homs.keys().collect::<Vec<_>>(),
            "processors": self.procs.keys().collect::<Vec<_>>(),
            "splitters": self.splitters.keys().collect::<Vec<_>>(),
            "monoids": self.monoids.keys().collect::<Vec<_>>(),
        })
    }

    pub fn hom_expr(&self, e: &HomExpr) -> Result<Hom> {
        match e {
            HomExpr::Named(s) => self.hom(s).cloned(),
            HomExpr::Id(m) => Ok(Hom::identity(self.monoid(m)?)),
            HomExpr::Compose(f, g) => Hom::compose(&self.hom_expr(f)?, &self.hom_expr(g)?),
            HomExpr::Prod(f, g) => Ok(Hom::product(&self.hom_expr(f)?, &self.hom_expr(g)?)),
            HomExpr::Map(f) => Ok(Hom::map_list(&self.hom_expr(f)?)),
            HomExpr::Push(g, p) => Ok(push_hom(&self.hom_expr(g)?, self.proc_expr(p)?.states())),
            HomExpr::HomOf(p) => Ok(self.proc_expr(p)?.hom().clone()),
        }
    }

    pub fn proc_expr(&self, e: &ProcExpr) -> Result<Processor> {
        match e {
            ProcExpr::Named(s) => self.processor(s).cloned(),
            ProcExpr::Fused(f, p) => fuse(&self.hom_expr(f)?, &self.proc_expr(p)?),
            ProcExpr::Eval(p, None) => Ok(eval(&self.proc_expr(p)?)),
            ProcExpr::Eval(p, Some(g)) => eval_pushed(&self.proc_expr(p)?, &self.hom_expr(g)?),
        }
    }

    /// Folds the term into processor combinators.
    pub fn denote(&self, t: &Term) -> Result<Processor> {
        match t {
            Term::Pure(h) => Ok(pure(&self.hom_expr(h)?)),
            Term::Stateful(p) => self.proc_expr(p),
            Term::Eval(p, g) => self.proc_expr(&ProcExpr::eval(p.clone(), g.clone())),
            Term::Seq(ts) => {
                let mut it = ts.iter();
                let first = it.next().ok_or_else(|| precondition("an empty sequence", "at least one term"))?;
                let mut acc = self.denote(first)?;
                for t in it {
                    acc = seq(&acc, &self.denote(t)?)?;
                }
                Ok(acc)
            }
            Term::Par(a, b) => Ok(par(&self.denote(a)?, &self.denote(b)?)),
            Term::Loop(b) => loop_(&self.denote(b)?),
            Term::Split(s) => Ok(pure(self.splitter(s)?)),
            Term::Merge(m) => Ok(pure(&Hom::merge(self.monoid(m)?)?)),
        }
    }

    /// Input and output monoid names of `t`.
    pub fn signature(&self, t: &Term) -> Result<(String, String)> {
        let p = self.denote(t)?;
        Ok((p.input().name().to_string(), p.output().name().to_string()))
    }

    /// The JSON tree with `monoids: [input, output]` on every node.
    pub fn annotate(&self, t: &Term) -> Result<Json> {
        let (i, o) = self.signature(t)?;
        let mut j = t.to_json();
        j["children"] = Json::Array(t.children().into_iter().map(|c| self.annotate(c)).collect::<Result<_>>()?);
        j["monoids"] = json!([i, o]);
        Ok(j)
    }

    /// Parses a term and checks any monoid annotations it carries.
    pub fn parse(&self, j: &Json) -> Result<Term> {
        let t = Term::from_json(j)?;
        self.check_annotations(&t, j)?;
        Ok(t)
    }

    fn check_annotations(&self, t: &Term, j: &Json) -> Result<()> {
        let (i, o) = self.signature(t)?;
        if let Some(ann) = j.get("monoids").and_then(Json::as_array) {
            for (want, got) in ann.iter().zip([&i, &o]) {
                let want = want.as_str().unwrap_or_default();
                if want != got {
                    return Err(Error::MonoidMismatch { expected: want.into(), found: got.clone() });
                }
            }
        }
        let empty = vec![];
        let kids = j.get("children").and_then(Json::as_array).unwrap_or(&empty);
        // Nested sequences are flattened on parse, so only check children
        // when the shapes still line up.
        if kids.len() == t.children().len() {
            for (c, cj) in t.children().into_iter().zip(kids) {
                self.check_annotations(c, cj)?;
            }
        }
        Ok(())
    }
}

fn int_hom(name: &str, f: fn(i64) -> i64) -> Hom {
    let z = int_add();
    Hom::new(name, z.clone(), z, Arc::new(move |x| Value::Int(f(x.as_int()))))
}

/// `Set → Set` keeping the elements that satisfy `keep`.
fn set_filter(name: &str, m: &Monoid, keep: fn(&Value) -> bool) -> Hom {
    Hom::new(name, m.clone(), m.clone(), Arc::new(move |x| Value::Set(x.as_set().iter().filter(|v| keep(v)).cloned().collect())))
}

/// Splits the pairs of `E ⊗ E` by the parity of the shared vertex.
fn pair_parity(cfg: &JoinConfig) -> Hom {
    let t = cfg.pairs_monoid();
    let tt = product(&t, &t);
    let bucket = |x: &Value, k: i64| {
        Value::Set(x.as_set().iter().filter(|ab| ab.as_pair().0.as_pair().1.as_int().rem_euclid(2) == k).cloned().collect())
    };
    Hom::new("pair-parity", t, tt, Arc::new(move |x| Value::pair(bucket(x, 0), bucket(x, 1))))
}

/// Prefix sum that starts by emitting `0`; its initial output is not `ε`.
fn shifted_sum() -> Processor {
    let l = int_list();
    Processor::on_atoms("shifted-sum", &l, &l, Carrier::int(), Value::Int(0), Value::ints([0]), |a, s| {
        let t = s.as_int() + a.as_int();
        (Value::Int(t), Value::ints([t]))
    })
    .expect("typed")
}

impl Registry {
    /// The join pipeline for `cfg` together with the integer-list, loop and
    /// set examples.
    pub fn corpus(cfg: &JoinConfig) -> Result<Registry> {
        let mut r = Registry::new();
        let z = int_add();
        r.add_processor(pairs_processor(cfg))
            .add_processor(join_processor(cfg))
            .add_hom(filter_hom(cfg))
            .add_processor(prefix_sum_processor())
            .add_processor(shifted_sum())
            .add_processor(integral(&z)?)
            .add_processor(derivative(&z)?)
            .add_processor(successor_closure())
            .add_hom(swap_add_hom())
            .add_hom(int_hom("double", |x| 2 * x))
            .add_hom(int_hom("negate", |x| -x))
            .add_hom(set_filter("evens", &reach_sets(), |v| v.as_int() % 2 == 0));
        r.add_splitter("parity", split_hom(cfg))?;
        r.add_splitter("pair-parity", pair_parity(cfg))?;
        Ok(r)
    }

    pub fn standard() -> Registry {
        Registry::corpus(&JoinConfig::paths(4)).expect("the shipped corpus registers")
    }
}

/// Named terms the rules are exercised on.
pub fn corpus_terms() -> Vec<(&'static str, Term)> {
    let pairs = ProcExpr::named("pairs");
    let filter = HomExpr::named("filter");
    let double = || Term::Pure(HomExpr::map(HomExpr::named("double")));
    let evens = || Term::Pure(HomExpr::map(HomExpr::named("evens")));
    vec![
        ("pairs;filter", Term::seq(vec![Term::stateful("pairs"), Term::pure("filter")])),
        (
            "decomposed-join",
            Term::seq(vec![Term::Pure(HomExpr::hom_of(pairs.clone())), Term::eval("pairs"), Term::pure("filter")]),
        ),
        (
            "exchanged-join",
            Term::seq(vec![
                Term::Pure(HomExpr::hom_of(pairs.clone())),
                Term::Pure(HomExpr::push(filter.clone(), pairs.clone())),
                Term::Eval(pairs, Some(filter)),
            ]),
        ),
        ("join", Term::stateful("join")),
        ("filter", Term::pure("filter")),
        ("double;double", Term::Pure(HomExpr::compose(HomExpr::map(HomExpr::named("double")), HomExpr::map(HomExpr::named("double"))))),
        ("double;prefix-sum", Term::seq(vec![double(), Term::stateful("prefix-sum")])),
        ("prefix-sum;double", Term::seq(vec![Term::stateful("prefix-sum"), double()])),
        ("integral;derivative", Term::seq(vec![Term::stateful("integral"), Term::stateful("derivative")])),
        ("prefix-sum×double", Term::par(Term::stateful("prefix-sum"), double())),
        ("double;loop swap-add", Term::seq(vec![double(), Term::loop_(Term::pure("swap-add"))])),
        ("loop swap-add;double", Term::seq(vec![Term::loop_(Term::pure("swap-add")), double()])),
        ("evens;loop successors", Term::seq(vec![evens(), Term::loop_(Term::stateful("successors"))])),
        ("loop successors;evens", Term::seq(vec![Term::loop_(Term::stateful("successors")), evens()])),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::join::nested_loop_join;

    #[test]
    fn every_corpus_term_denotes() {
        let r = Registry::standard();
        for (name, t) in corpus_terms() {
            let j = r.annotate(&t).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(r.parse(&j).unwrap(), t, "{name}");
        }
    }

    #[test]
    fn unfused_join_matches_nested_loops() {
        let cfg = JoinConfig::paths(3);
        let r = Registry::corpus(&cfg).unwrap();
        let p = r.denote(&corpus_terms()[0].1).unwrap();
        let e = |a: i64, b: i64| Value::pair(Value::Int(a), Value::Int(b));
        let x = Value::pair(Value::set([e(0, 1), e(1, 2)]), Value::set([e(1, 2), e(2, 0)]));
        assert_eq!(p.run(&x), nested_loop_join(&cfg, &x));
    }

    #[test]
    fn bad_annotation_is_rejected() {
        let r = Registry::standard();
        let mut j = r.annotate(&Term::stateful("prefix-sum")).unwrap();
        j["monoids"][0] = json!("List[Bit]");
        assert!(matches!(r.parse(&j), Err(Error::MonoidMismatch { .. })));
        assert_eq!(r.denote(&Term::pure("nope")).err(), Some(Error::UnknownRef("nope".into())));
    }

    #[test]
    fn splitter_must_merge_back() {
        let cfg = JoinConfig::paths(3);
        let m = cfg.input();
        // Copying into both halves merges back on sets but not on sums.
        let both = Hom::new("both", m.clone(), product(&m, &m), Arc::new(|x| Value::pair(x.clone(), x.clone())));
        assert!(Registry::new().add_splitter("both", both).is_ok());
        let z = int_add();
        let dup = Hom::new("dup", z.clone(), product(&z, &z), Arc::new(|x| Value::pair(x.clone(), x.clone())));
        assert!(Registry::new().add_splitter("dup", dup).is_err());
    }
}
