//! Dataflow terms, rewrite rules between them, and a small optimizer that
//! checks every rewrite it makes.

pub mod optimize;
pub mod registry;
pub mod rules;
pub mod term;

pub use optimize::{optimize, replay, verify_rewrite, Optimized, Options, Refusal, Step, Strategy, DEFAULT_BUDGET};
pub use registry::{corpus_terms, Registry};
pub use rules::{apply_rule, sites, Certificate, Rule};
pub use term::{HomExpr, ProcExpr, Term};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::join::{all_self_inputs, join_processor, JoinConfig};
    use crate::processor::{equiv_check, InputGen};

    fn opts(budget: usize) -> Options {
        Options { budget, ..Options::default() }
    }

    #[test]
    fn greedy_turns_pairs_filter_into_join() {
        let r = Registry::standard();
        let t = Term::seq(vec![Term::stateful("pairs"), Term::pure("filter")]);
        let o = optimize(&r, &t, &Rule::standard(), &opts(200)).unwrap();
        let names: Vec<_> = o.applied().map(|s| s.rule.as_str()).collect();
        assert_eq!(names, ["decompose", "exchange", "recouple", "fuse"]);
        assert!(matches!(o.term, Term::Stateful(_)));
        assert_eq!(replay(&r, &t, &o.log, &Rule::standard()).unwrap(), o.term);
        let cfg = JoinConfig::paths(4);
        let v = equiv_check(&r.denote(&o.term).unwrap(), &join_processor(&cfg), &InputGen::from_monoid(&cfg.input()), 200, 3).unwrap();
        assert!(v.holds());
    }

    #[test]
    fn greedy_partitions_join_with_certificate() {
        let r = Registry::standard();
        let cert = Certificate::new(Term::Split("parity".into()), 300, 5);
        let rules = vec![Rule::SplitIntro("parity".into()), Rule::Partition(cert)];
        let o = optimize(&r, &Term::stateful("join"), &rules, &opts(200)).unwrap();
        match &o.term {
            Term::Seq(ts) => assert!(matches!(ts.as_slice(), [Term::Split(_), Term::Par(..), Term::Merge(_)])),
            t => panic!("{t}"),
        }
    }

    #[test]
    fn single_node_is_left_alone() {
        let r = Registry::standard();
        let o = optimize(&r, &Term::stateful("join"), &Rule::standard(), &opts(100)).unwrap();
        assert_eq!(o.term, Term::stateful("join"));
        assert_eq!(o.applied().count(), 0);
    }

    #[test]
    fn dropped_filter_is_caught() {
        let r = Registry::standard();
        let t = Term::seq(vec![Term::stateful("pairs"), Term::pure("filter")]);
        let v = verify_rewrite(&r, &t, &Term::stateful("pairs"), None, 500, 1).unwrap();
        assert!(!v.holds() && v.witness.is_some());
        let rules = vec![Rule::drop_pure()];
        let t = Term::seq(vec![Term::stateful("prefix-sum"), Term::Pure(HomExpr::map(HomExpr::named("double")))]);
        let o = optimize(&r, &t, &rules, &opts(200)).unwrap();
        assert_eq!(o.term, t);
        let bad = o.rejected().next().unwrap();
        assert!(bad.verdict.as_ref().unwrap().witness.is_some());
    }

    #[test]
    fn every_rule_is_sound_on_the_small_join_universe() {
        let cfg = JoinConfig::paths(3);
        let r = Registry::corpus(&cfg).unwrap();
        let o = Options { inputs: Some(InputGen::finite(all_self_inputs(&cfg))), ..opts(0) };
        let t = Term::seq(vec![Term::stateful("pairs"), Term::pure("filter")]);
        let out = optimize(&r, &t, &Rule::standard(), &o).unwrap();
        assert_eq!(out.applied().count(), 4);
        assert!(out.applied().all(|s| s.verdict.as_ref().unwrap().exhaustive));
    }

    #[test]
    fn exhaustive_finds_the_fused_join() {
        let r = Registry::standard();
        let t = Term::seq(vec![Term::stateful("pairs"), Term::pure("filter")]);
        let o = Options { strategy: Strategy::Exhaustive(4), ..opts(30) };
        let out = optimize(&r, &t, &Rule::standard(), &o).unwrap();
        assert_eq!(out.term.cost(), 1);
    }
}
