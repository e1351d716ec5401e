//! Properties over generated inputs. Expected values are computed directly
//! from plain Rust data where possible.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use streamalg::algebra::monoid::{bag, int_add, list, product, Carrier};
use streamalg::algebra::ticked::{normalize, ticked};
use streamalg::algebra::{embed, tensor_product, Hom};
use streamalg::examples::adder::{adder_processor, adder_tag_table};
use streamalg::examples::inverse::{derivative, integral};
use streamalg::examples::join::{join_processor, JoinConfig};
use streamalg::examples::prefix::{prefix_sum_fn, prefix_sum_processor};
use streamalg::examples::stratified::{sets_to_ticked, strata_to_ticked, ticked_oracle, ticked_processor};
use streamalg::pipeline::{corpus_terms, optimize, replay, verify_rewrite, Options, Registry, Rule};
use streamalg::processor::combinators::par_with;
use streamalg::processor::equiv::run_chunked;
use streamalg::processor::{equiv_check, pure, seq, InputGen, Processor};
use streamalg::repr::{defunctionalize, lift_chunks, tabulate};
use streamalg::state::{out, push_forward, st};
use streamalg::streamfn::{generic_decompose, StreamFunction};
use streamalg::{Segment, Value};

fn ints(xs: &[i64]) -> Value {
    Value::ints(xs.iter().copied())
}

fn small_ints(max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-9i64..=9, 0..=max_len)
}

/// A word over `List[Int]` with ticks: `None` is a tick.
fn ticked_word() -> impl Strategy<Value = Vec<Option<Vec<i64>>>> {
    prop::collection::vec(prop::option::weighted(0.7, small_ints(3)), 0..6)
}

fn to_ticked(word: &[Option<Vec<i64>>]) -> Value {
    let l = list(Carrier::int());
    normalize(&l, word.iter().map(|w| match w {
        None => Segment::Tick,
        Some(xs) => Segment::Elem(ints(xs)),
    }))
}

/// Prefix sums from zero.
fn scan(xs: &[i64]) -> Vec<i64> {
    xs.iter()
        .scan(0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Splits `xs` at the given cut points, in order and clamped.
fn cut(xs: &[i64], cuts: &[usize]) -> Vec<Value> {
    let mut points: Vec<usize> = cuts.iter().map(|c| c % (xs.len() + 1)).collect();
    points.sort_unstable();
    let mut out = Vec::new();
    let mut last = 0;
    for p in points {
        out.push(ints(&xs[last..p]));
        last = p;
    }
    out.push(ints(&xs[last..]));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ticked_concatenation_is_associative(a in ticked_word(), b in ticked_word(), c in ticked_word()) {
        let t = ticked(&list(Carrier::int()));
        let (a, b, c) = (to_ticked(&a), to_ticked(&b), to_ticked(&c));
        prop_assert_eq!(t.mul(&t.mul(&a, &b), &c), t.mul(&a, &t.mul(&b, &c)));
        prop_assert_eq!(t.mul(&a, &t.identity()), a.clone());
        prop_assert_eq!(t.mul(&t.identity(), &a), a);
    }

    #[test]
    fn ticked_product_matches_the_flattened_word(a in ticked_word(), b in ticked_word()) {
        let t = ticked(&list(Carrier::int()));
        let joined: Vec<_> = a.iter().chain(&b).cloned().collect();
        prop_assert_eq!(t.mul(&to_ticked(&a), &to_ticked(&b)), to_ticked(&joined));
        prop_assert_eq!(t.mconcat(vec![to_ticked(&a), to_ticked(&b)]), to_ticked(&joined));
    }

    #[test]
    fn direct_product_components_commute(m in small_ints(4), n in small_ints(4)) {
        let l = list(Carrier::int());
        let p = product(&l, &l);
        let e = ints(&[]);
        let left = Value::pair(ints(&m), e.clone());
        let right = Value::pair(e, ints(&n));
        prop_assert_eq!(p.mul(&left, &right), p.mul(&right, &left));
    }

    #[test]
    fn tensor_normal_form_ignores_term_order(pairs in prop::collection::vec((0i64..3, 0i64..3), 0..6)) {
        let b = bag(Carrier::ints(0, 3));
        let t = tensor_product(&b, &b).unwrap();
        let one = |x: i64| b.of_atom(&Value::Int(x)).unwrap();
        let terms: Vec<Value> = pairs.iter().map(|(x, y)| embed(&t, &one(*x), &one(*y))).collect();
        let forward = t.mconcat(terms.clone());
        let backward = t.mconcat(terms.into_iter().rev().collect());
        prop_assert!(t.eq(&forward, &backward));
        let mut want: BTreeMap<(i64, i64), u64> = BTreeMap::new();
        for p in &pairs {
            *want.entry(*p).or_insert(0) += 1;
        }
        let got: BTreeMap<(i64, i64), u64> = forward
            .as_bag()
            .iter()
            .map(|(k, n)| ((k.as_pair().0.as_int(), k.as_pair().1.as_int()), *n))
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn state_product_unfolds(xs in small_ints(4), ys in small_ints(4), s in -20i64..20) {
        let p = prefix_sum_processor();
        let (a, b) = (p.hom().apply(&ints(&xs)), p.hom().apply(&ints(&ys)));
        let ab = p.state_monoid().mul(&a, &b);
        let s = Value::Int(s);
        let l = list(Carrier::int());
        prop_assert_eq!(out(&ab, &s), l.mul(&out(&a, &s), &out(&b, &st(&a, &s))));
        prop_assert_eq!(st(&ab, &s), st(&b, &st(&a, &s)));
    }

    #[test]
    fn push_forward_is_functorial(xs in small_ints(5), s in -20i64..20) {
        let l = list(Carrier::int());
        let map = |name: &str, f: fn(i64) -> i64| {
            Hom::new(name, l.clone(), l.clone(), std::sync::Arc::new(move |x: &Value| {
                Value::ints(x.as_list().iter().map(|v| f(v.as_int())))
            }))
        };
        let (g, h) = (map("double", |v| 2 * v), map("inc", |v| v + 1));
        let gh = Hom::compose(&h, &g).unwrap();
        let alpha = prefix_sum_processor().hom().apply(&ints(&xs));
        let s = Value::Int(s);
        let once = push_forward(&gh, &alpha).as_fun().run(&s);
        let twice = push_forward(&g, &push_forward(&h, &alpha)).as_fun().run(&s);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn generic_decomposition_runs_the_function(xs in small_ints(6)) {
        let f = prefix_sum_fn();
        prop_assert_eq!(generic_decompose(&f).run(&ints(&xs)), ints(&scan(&xs)));
        prop_assert_eq!(f.apply(&ints(&xs)), ints(&scan(&xs)));
    }

    #[test]
    fn homomorphism_updates_ignore_the_prefix(p in small_ints(4), q in small_ints(4), a in small_ints(4)) {
        let l = list(Carrier::int());
        let rev = Hom::new("negate", l.clone(), l, std::sync::Arc::new(|x: &Value| Value::ints(x.as_list().iter().map(|v| -v.as_int()))));
        let f = StreamFunction::from_homomorphism(&rev);
        prop_assert_eq!(f.update(&ints(&p), &ints(&a)), f.update(&ints(&q), &ints(&a)));
    }

    #[test]
    fn chunked_runs_agree_with_whole_runs(xs in small_ints(8), cuts in prop::collection::vec(0usize..9, 0..4)) {
        let want = ints(&scan(&xs));
        for p in [prefix_sum_processor(), integral(&int_add()).unwrap()] {
            prop_assert_eq!(run_chunked(&p, &cut(&xs, &cuts)), want.clone());
            prop_assert_eq!(p.run(&ints(&xs)), want.clone());
        }
    }

    #[test]
    fn seq_is_function_composition(xs in small_ints(8)) {
        let (i, d) = (integral(&int_add()).unwrap(), derivative(&int_add()).unwrap());
        let id = pure(&Hom::identity(i.input()));
        prop_assert_eq!(id.run(&ints(&xs)), ints(&xs));
        let composed = seq(&i, &d).unwrap();
        prop_assert_eq!(composed.run(&ints(&xs)), d.run(&i.run(&ints(&xs))));
        let twice = seq(&prefix_sum_processor(), &prefix_sum_processor()).unwrap();
        prop_assert_eq!(twice.run(&ints(&xs)), ints(&scan(&scan(&xs))));
    }

    #[test]
    fn concurrent_par_matches_sequential_par(xs in small_ints(6), ys in small_ints(6)) {
        let (p, q) = (prefix_sum_processor(), integral(&int_add()).unwrap());
        let x = Value::pair(ints(&xs), ints(&ys));
        let (a, b) = (par_with(&p, &q, true), par_with(&p, &q, false));
        prop_assert_eq!(a.run(&x), b.run(&x));
        prop_assert_eq!(a.run(&x), Value::pair(ints(&scan(&xs)), ints(&scan(&ys))));
    }

    #[test]
    fn stratified_output_avoids_the_previous_negatives(
        strata in prop::collection::vec(
            (prop::collection::btree_set(0i64..5, 0..4), prop::collection::btree_set(0i64..5, 0..4))
                .prop_filter("an empty stratum merges with its neighbour", |(a, b)| !a.is_empty() || !b.is_empty()),
            1..5,
        )
    ) {
        let set = |s: &BTreeSet<i64>| Value::Set(s.iter().map(|x| Value::Int(*x)).collect());
        let input: Vec<Value> = strata.iter().map(|(a, b)| Value::pair(set(a), set(b))).collect();
        let word = strata_to_ticked(&input);
        let out = ticked_processor().run(&word);
        prop_assert_eq!(out.clone(), ticked_oracle(&word));
        // Empty strata collapse their ticks, so compare after normalizing.
        let want: Vec<Value> = strata
            .iter()
            .enumerate()
            .map(|(k, (a, _))| match k {
                0 => set(a),
                _ => set(&a.difference(&strata[k - 1].1).copied().collect()),
            })
            .collect();
        prop_assert_eq!(out, sets_to_ticked(&want));
    }

    #[test]
    fn adder_tables_compose_and_split(bits in prop::collection::vec((0i64..2, 0i64..2), 0..12), k in 2usize..=4) {
        let p = adder_processor();
        let tab = tabulate(p.hom()).unwrap();
        let word: Vec<Value> = bits.iter().map(|(a, b)| Value::pair(Value::Int(*a), Value::Int(*b))).collect();
        let whole = tab.lift(&Value::List(word.clone())).unwrap();
        let size = word.len().div_ceil(k).max(1);
        let chunks: Vec<Value> = word.chunks(size).map(|c| Value::List(c.to_vec())).collect();
        prop_assert!(tab.rep().eq(&lift_chunks(&tab, &chunks).unwrap(), &whole));
        for carry in [0, 1] {
            let c = Value::Int(carry);
            prop_assert_eq!(tab.psi(&whole).as_fun().run(&c), p.step(&c, &Value::List(word.clone())));
        }
    }

    #[test]
    fn defunctionalized_words_multiply_like_their_images(xs in prop::collection::vec((0i64..2, 0i64..2), 0..6), ys in prop::collection::vec((0i64..2, 0i64..2), 0..6)) {
        let p = adder_processor();
        let e = defunctionalize(p.hom(), &adder_tag_table()).unwrap();
        let w = |v: &[(i64, i64)]| Value::List(v.iter().map(|(a, b)| Value::pair(Value::Int(*a), Value::Int(*b))).collect());
        let (a, b) = (e.lift(&w(&xs)).unwrap(), e.lift(&w(&ys)).unwrap());
        let both = e.rep().mul(&a, &b);
        prop_assert_eq!(both.clone(), e.lift(&w(&[xs.clone(), ys.clone()].concat())).unwrap());
        for carry in [0, 1] {
            let c = Value::Int(carry);
            let chained = p.state_monoid().mul(&e.psi(&a), &e.psi(&b));
            prop_assert_eq!(e.psi(&both).as_fun().run(&c), chained.as_fun().run(&c));
        }
    }

    #[test]
    fn join_matches_nested_loops_on_larger_graphs(edges in prop::collection::btree_set((0i64..6, 0i64..6), 0..14)) {
        let cfg = JoinConfig::paths(6);
        let set = Value::Set(edges.iter().map(|(a, b)| Value::pair(Value::Int(*a), Value::Int(*b))).collect());
        let got = join_processor(&cfg).run(&Value::pair(set.clone(), set));
        let mut want = BTreeSet::new();
        for (a, b) in &edges {
            for (c, d) in &edges {
                if b == c {
                    want.insert(((*a, *b), (*c, *d)));
                }
            }
        }
        let got: BTreeSet<((i64, i64), (i64, i64))> = got
            .as_set()
            .iter()
            .map(|p| {
                let (x, y) = p.as_pair();
                let e = |v: &Value| (v.as_pair().0.as_int(), v.as_pair().1.as_int());
                (e(x), e(y))
            })
            .collect();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn seq_is_associative_up_to_equivalence(seed in any::<u64>()) {
        let z = int_add();
        let (p, q, r) = (integral(&z).unwrap(), prefix_sum_processor(), derivative(&z).unwrap());
        let left = seq(&seq(&p, &q).unwrap(), &r).unwrap();
        let right = seq(&p, &seq(&q, &r).unwrap()).unwrap();
        let v = equiv_check(&left, &right, &InputGen::from_monoid(p.input()), 200, seed).unwrap();
        prop_assert!(v.holds(), "{:?}", v);
    }

    #[test]
    fn optimize_only_keeps_verified_steps(seed in any::<u64>(), which in 0usize..14) {
        let reg = Registry::standard();
        let (_, t) = corpus_terms().swap_remove(which);
        let mut rules = Rule::standard();
        rules.insert(0, Rule::drop_pure());
        let opts = Options { budget: 100, seed, ..Options::default() };
        let o = optimize(&reg, &t, &rules, &opts).unwrap();
        for s in o.applied() {
            prop_assert!(s.verdict.as_ref().is_some_and(|v| v.holds()));
        }
        prop_assert_eq!(replay(&reg, &t, &o.log, &rules).unwrap(), o.term.clone());
        let v = verify_rewrite(&reg, &t, &o.term, None, 200, seed).unwrap();
        prop_assert!(v.holds(), "{} vs {}: {:?}", t, o.term, v);
    }
}

/// Pure processors carry the one-point state space.
#[test]
fn pure_has_trivial_state() {
    let p: Processor = pure(&Hom::identity(&list(Carrier::int())));
    assert!(p.states().is_singleton());
}
