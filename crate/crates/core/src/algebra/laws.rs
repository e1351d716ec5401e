//! Seeded property checks for monoid and homomorphism laws.
//!
//! Every check samples `budget` cases from a generator seeded with `seed`,
//! records the first failure of each law and shrinks its witness by dropping
//! generators while the law still fails.

use serde::Serialize;
use serde_json::{Map, Value as Json};

use crate::algebra::hom::Hom;
use crate::algebra::monoid::Monoid;
use crate::sample::{self, Rng};
use crate::value::Value;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Counterexample {
    pub law: String,
    pub witness: Json,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LawReport {
    pub subject: String,
    pub cases: usize,
    pub failures: Vec<Counterexample>,
}

impl LawReport {
    pub fn new(subject: impl Into<String>) -> Self {
        LawReport { subject: subject.into(), cases: 0, failures: vec![] }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn has_failure(&self, law: &str) -> bool {
        self.failures.iter().any(|f| f.law == law)
    }

    pub fn passed_law(&self, law: &str) -> bool {
        !self.has_failure(law)
    }

    /// Records a failure unless this law already has one.
    pub fn record(&mut self, law: &str, witness: Json) {
        if !self.has_failure(law) {
            self.failures.push(Counterexample { law: law.into(), witness });
        }
    }

    pub fn merge(&mut self, other: LawReport) {
        self.cases += other.cases;
        for f in other.failures {
            if !self.has_failure(&f.law) {
                self.failures.push(f);
            }
        }
    }
}

/// Named witness values rendered as a JSON object.
pub fn witness(entries: &[(&str, &Value)]) -> Json {
    let mut m = Map::new();
    for (k, v) in entries {
        m.insert((*k).to_string(), v.to_json_lossy());
    }
    Json::Object(m)
}

/// Mostly full samples, with identities and single generators mixed in.
pub fn sample_mixed(m: &Monoid, rng: &mut Rng) -> Value {
    let r = sample::below(rng, 10);
    match r {
        0 => m.identity(),
        1 | 2 => m.sample_generator(rng),
        _ => m.sample(rng),
    }
}

/// Shrinks each component of `xs` by removing generators while `fails`
/// still holds. Components whose monoid has no factorisation are left alone.
pub fn shrink(monoids: &[&Monoid], xs: Vec<Value>, fails: impl Fn(&[Value]) -> bool) -> Vec<Value> {
    let mut cur = xs;
    let mut budget = 400usize;
    let mut improved = true;
    while improved && budget > 0 {
        improved = false;
        'outer: for i in 0..cur.len() {
            let Some(gens) = monoids[i].factor(&cur[i]) else { continue };
            if gens.is_empty() {
                continue;
            }
            let mut candidates = vec![monoids[i].identity()];
            if gens.len() > 2 {
                let half = gens.len() / 2;
                candidates.push(monoids[i].mconcat(gens[..half].to_vec()));
                candidates.push(monoids[i].mconcat(gens[half..].to_vec()));
            }
            for j in 0..gens.len() {
                let mut g = gens.clone();
                g.remove(j);
                candidates.push(monoids[i].mconcat(g));
            }
            for c in candidates {
                if budget == 0 {
                    break 'outer;
                }
                budget -= 1;
                if c == cur[i] {
                    continue;
                }
                let mut trial = cur.clone();
                trial[i] = c;
                if fails(&trial) {
                    cur = trial;
                    improved = true;
                    break 'outer;
                }
            }
        }
    }
    cur
}

/// Identity, associativity and whichever flags the monoid claims.
pub fn check_monoid_laws(m: &Monoid, budget: usize, seed: u64) -> LawReport {
    let mut rng = sample::rng(seed);
    let mut report = LawReport::new(m.name());
    let e = m.identity();
    let flags = m.flags();
    type Law = (&'static str, usize, Box<dyn Fn(&[Value]) -> bool>);
    let laws: Vec<Law> = {
        let mut v: Vec<Law> = Vec::new();
        let (m1, e1) = (m.clone(), e.clone());
        v.push(("left identity", 1, Box::new(move |x| !m1.eq(&m1.mul(&e1, &x[0]), &x[0]))));
        let (m1, e1) = (m.clone(), e.clone());
        v.push(("right identity", 1, Box::new(move |x| !m1.eq(&m1.mul(&x[0], &e1), &x[0]))));
        let m1 = m.clone();
        v.push((
            "associativity",
            3,
            Box::new(move |x| {
                let l = m1.mul(&m1.mul(&x[0], &x[1]), &x[2]);
                let r = m1.mul(&x[0], &m1.mul(&x[1], &x[2]));
                !m1.eq(&l, &r)
            }),
        ));
        if flags.commutative {
            let m1 = m.clone();
            v.push(("commutativity", 2, Box::new(move |x| !m1.eq(&m1.mul(&x[0], &x[1]), &m1.mul(&x[1], &x[0])))));
        }
        if flags.idempotent {
            let m1 = m.clone();
            v.push(("idempotence", 1, Box::new(move |x| !m1.eq(&m1.mul(&x[0], &x[0]), &x[0]))));
        }
        if flags.left_cancellative {
            let m1 = m.clone();
            v.push((
                "left cancellation",
                3,
                Box::new(move |x| m1.eq(&m1.mul(&x[0], &x[1]), &m1.mul(&x[0], &x[2])) && !m1.eq(&x[1], &x[2])),
            ));
        }
        if flags.group || m.has_inverse() {
            let (m1, e1) = (m.clone(), e.clone());
            v.push((
                "inverse",
                1,
                Box::new(move |x| match m1.inverse(&x[0]) {
                    None => true,
                    Some(inv) => !m1.eq(&m1.mul(&x[0], &inv), &e1) || !m1.eq(&m1.mul(&inv, &x[0]), &e1),
                }),
            ));
        }
        if m.factor(&e).is_some() {
            let m1 = m.clone();
            v.push((
                "factorisation",
                1,
                Box::new(move |x| !m1.eq(&m1.mconcat(m1.factor(&x[0]).unwrap()), &x[0])),
            ));
        }
        v
    };
    for _ in 0..budget {
        report.cases += 1;
        let mut xs: Vec<Value> = (0..3).map(|_| sample_mixed(m, &mut rng)).collect();
        if flags.left_cancellative && sample::coin(&mut rng, 0.5) {
            xs[2] = xs[1].clone();
        }
        for (law, arity, fails) in &laws {
            if report.has_failure(law) || !fails(&xs[..*arity]) {
                continue;
            }
            let ms = vec![m; *arity];
            let small = shrink(&ms, xs[..*arity].to_vec(), |w| fails(w));
            let names = ["a", "b", "c"];
            let entries: Vec<(&str, &Value)> = small.iter().enumerate().map(|(i, v)| (names[i], v)).collect();
            report.record(law, witness(&entries));
        }
    }
    report
}

/// `h(ε) = ε` and `h(a·b) = h(a)·h(b)` on sampled `a`, `b`.
pub fn check_homomorphism(h: &Hom, budget: usize, seed: u64) -> LawReport {
    let mut rng = sample::rng(seed);
    let mut report = LawReport::new(h.name());
    let (src, tgt) = (h.source(), h.target());
    report.cases += 1;
    let he = h.apply(&src.identity());
    if !tgt.is_identity(&he) {
        report.record("preserves identity", witness(&[("h(ε)", &he)]));
    }
    let fails = |x: &[Value]| {
        let l = h.apply(&src.mul(&x[0], &x[1]));
        let r = tgt.mul(&h.apply(&x[0]), &h.apply(&x[1]));
        !tgt.eq(&l, &r)
    };
    for _ in 1..budget.max(1) {
        report.cases += 1;
        let xs = vec![sample_mixed(src, &mut rng), sample_mixed(src, &mut rng)];
        if fails(&xs) {
            let small = shrink(&[src, src], xs, fails);
            let lhs = h.apply(&src.mul(&small[0], &small[1]));
            let rhs = tgt.mul(&h.apply(&small[0]), &h.apply(&small[1]));
            report.record(
                "preserves products",
                witness(&[("a", &small[0]), ("b", &small[1]), ("h(a·b)", &lhs), ("h(a)·h(b)", &rhs)]),
            );
            break;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::monoid::{bag, bool_or, int_add, list, product, set, Carrier};
    use crate::value::Shape;
    use std::sync::Arc;

    #[test]
    fn base_monoids_pass() {
        let c = Carrier::ints(0, 4);
        for m in [
            list(c.clone()),
            set(c.clone()),
            bag(c.clone()),
            int_add(),
            bool_or(),
            product(&list(c.clone()), &int_add()),
        ] {
            let r = check_monoid_laws(&m, 500, 11);
            assert!(r.passed(), "{}: {:?}", m.name(), r.failures);
            assert_eq!(r.cases, 500);
        }
    }

    #[test]
    fn broken_associativity_is_found_and_shrunk() {
        // Reverses the left operand before concatenating.
        let l = list(Carrier::ints(0, 4));
        let inner = l.clone();
        let broken = Monoid::builder(
            "Broken",
            Shape::list(Shape::Int),
            Value::ints([]),
            Arc::new(move |a, b| {
                let mut xs = a.as_list().to_vec();
                xs.reverse();
                inner.mul(&Value::List(xs), b)
            }),
            Arc::new(move |rng| l.sample(rng)),
        )
        .factor(Arc::new(|a| a.as_list().iter().map(|x| Value::List(vec![x.clone()])).collect()))
        .build();
        let r = check_monoid_laws(&broken, 200, 3);
        assert!(r.has_failure("associativity"));
        let w = &r.failures.iter().find(|f| f.law == "associativity").unwrap().witness;
        let total: usize = ["a", "b", "c"].iter().map(|k| w[k].as_array().unwrap().len()).sum();
        assert!(total <= 4, "witness not shrunk: {w}");
    }

    #[test]
    fn non_homomorphism_detected() {
        let l = list(Carrier::ints(0, 4));
        let len_sq = Hom::new(
            "len²",
            l,
            int_add(),
            Arc::new(|x| Value::Int((x.as_list().len() * x.as_list().len()) as i64)),
        );
        let r = check_homomorphism(&len_sq, 200, 5);
        assert!(r.has_failure("preserves products"));
    }

    #[test]
    fn length_is_a_homomorphism() {
        let l = list(Carrier::ints(0, 4));
        let len = Hom::new("len", l, int_add(), Arc::new(|x| Value::Int(x.as_list().len() as i64)));
        assert!(check_homomorphism(&len, 500, 5).passed());
    }
}
