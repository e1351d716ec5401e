//! Rewrite rules over terms. Each rule matches one node, or a run of
//! consecutive elements of a sequence, and builds the replacement.

use std::fmt;
use std::sync::Arc;

use serde_json::json;

use crate::algebra::laws::sample_mixed;
use crate::algebra::monoid::MonoidKind;
use crate::algebra::Hom;
use crate::error::{Error, Result};
use crate::sample;

use super::registry::Registry;
use super::term::{HomExpr, ProcExpr, Term};

/// Evidence that a processor distributes over the two halves an upstream
/// term produces: `⟦σ⟧(n₁·n₂) = ⟦σ⟧(n₁)·⟦σ⟧(n₂)` on sampled outputs of
/// `upstream`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub upstream: Term,
    pub budget: usize,
    pub seed: u64,
}

impl Certificate {
    pub fn new(upstream: Term, budget: usize, seed: u64) -> Certificate {
        Certificate { upstream, budget, seed }
    }

    /// Checks the target against `budget` upstream outputs. The error
    /// carries the first counterexample.
    pub fn check(&self, reg: &Registry, target: &Term) -> Result<()> {
        let up = reg.denote(&self.upstream)?;
        let sigma = reg.denote(target)?;
        let halves = match up.output().kind() {
            MonoidKind::Product(a, b) if a.same(b) => a.clone(),
            _ => return Err(side("partition", format!("upstream {} does not produce N × N", self.upstream))),
        };
        halves.expect_same(sigma.input())?;
        let out = sigma.output();
        let mut rng = sample::rng(self.seed);
        for _ in 0..self.budget {
            let x = sample_mixed(up.input(), &mut rng);
            let (n1, n2) = up.run(&x).into_pair();
            let whole = sigma.run(&halves.mul(&n1, &n2));
            let split = out.mul(&sigma.run(&n1), &sigma.run(&n2));
            if !out.eq(&whole, &split) {
                let w = json!({
                    "input": x.to_json_lossy(),
                    "n1": n1.to_json_lossy(),
                    "n2": n2.to_json_lossy(),
                    "whole": whole.to_json_lossy(),
                    "merged": split.to_json_lossy(),
                });
                return Err(side("partition", format!("{target} is not independent on the halves: {w}")));
            }
        }
        Ok(())
    }
}

pub type RewriteFn = Arc<dyn Fn(&Registry, &[Term]) -> Result<Term> + Send + Sync>;

#[derive(Clone)]
pub enum Rule {
    /// `pure f ; σ` to the fused processor.
    Fuse,
    /// `pure (f;g)` to `pure f ; pure g`.
    Decouple,
    /// `pure f ; pure g` to `pure (f;g)`.
    Recouple,
    /// `σ` to `pure f_σ ; eval σ`.
    Decompose,
    /// `eval σ ; pure g` to `pure g_* ; eval_{g_*} σ`, when `o_ε = ε`.
    Exchange,
    /// `pure f` to `split ; (pure f × pure f) ; merge` with the named splitter.
    SplitMerge(String),
    /// `σ` to `split ; merge ; σ` with the named splitter.
    SplitIntro(String),
    /// `τ ; merge ; σ` to `τ ; (σ × σ) ; merge`.
    Partition(Certificate),
    /// `pure (map f) ; loop σ` to `loop (pure (f × id) ; σ)`.
    TightenLeft,
    /// `loop σ ; pure (map g)` to `loop (σ ; pure (g × id))`.
    TightenRight,
    ExtractLeft,
    ExtractRight,
    Custom { name: String, arity: usize, rewrite: RewriteFn },
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

fn side(rule: &str, reason: impl Into<String>) -> Error {
    Error::SideCondition { rule: rule.into(), reason: reason.into() }
}

impl Rule {
    pub fn custom(name: &str, arity: usize, f: impl Fn(&Registry, &[Term]) -> Result<Term> + Send + Sync + 'static) -> Rule {
        Rule::Custom { name: name.into(), arity, rewrite: Arc::new(f) }
    }

    /// Deliberately unsound: drops a pure node that follows another node.
    pub fn drop_pure() -> Rule {
        Rule::custom("drop-pure", 2, |_, ts| match &ts[1] {
            Term::Pure(_) => Ok(ts[0].clone()),
            _ => Err(Error::NoMatch { rule: "drop-pure".into(), path: vec![] }),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Rule::Fuse => "fuse".into(),
            Rule::Decouple => "decouple".into(),
            Rule::Recouple => "recouple".into(),
            Rule::Decompose => "decompose".into(),
            Rule::Exchange => "exchange".into(),
            Rule::SplitMerge(s) => format!("split-merge[{s}]"),
            Rule::SplitIntro(s) => format!("split-intro[{s}]"),
            Rule::Partition(c) => format!("partition[{}]", c.upstream),
            Rule::TightenLeft => "tighten-left".into(),
            Rule::TightenRight => "tighten-right".into(),
            Rule::ExtractLeft => "extract-left".into(),
            Rule::ExtractRight => "extract-right".into(),
            Rule::Custom { name, .. } => name.clone(),
        }
    }

    /// Parses the names accepted on the command line; splitter-based rules
    /// take `name:splitter`.
    pub fn parse(s: &str) -> Result<Rule> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a.to_string())),
            None => (s, None),
        };
        let r = match (head, arg) {
            ("fuse", None) => Rule::Fuse,
            ("decouple", None) => Rule::Decouple,
            ("recouple", None) => Rule::Recouple,
            ("decompose", None) => Rule::Decompose,
            ("exchange", None) => Rule::Exchange,
            ("split-merge", Some(a)) => Rule::SplitMerge(a),
            ("split-intro", Some(a)) => Rule::SplitIntro(a),
            ("tighten-left", None) => Rule::TightenLeft,
            ("tighten-right", None) => Rule::TightenRight,
            ("extract-left", None) => Rule::ExtractLeft,
            ("extract-right", None) => Rule::ExtractRight,
            ("drop-pure", None) => Rule::drop_pure(),
            _ => return Err(Error::UnknownRef(s.into())),
        };
        Ok(r)
    }

    /// Rules needing no extra data.
    pub fn standard() -> Vec<Rule> {
        vec![
            Rule::Recouple,
            Rule::Exchange,
            Rule::Fuse,
            Rule::TightenLeft,
            Rule::TightenRight,
            Rule::Decompose,
            Rule::Decouple,
            Rule::ExtractLeft,
            Rule::ExtractRight,
        ]
    }

    /// How many consecutive sequence elements the rule consumes; 1 means a
    /// single node anywhere.
    pub fn arity(&self) -> usize {
        match self {
            Rule::Fuse | Rule::Recouple | Rule::Exchange | Rule::TightenLeft | Rule::TightenRight => 2,
            Rule::Partition(_) => 3,
            Rule::Custom { arity, .. } => *arity,
            _ => 1,
        }
    }

    /// The replacement for the matched nodes.
    pub fn rewrite(&self, reg: &Registry, ts: &[Term]) -> Result<Term> {
        let name = self.name();
        let no = || Error::NoMatch { rule: name.clone(), path: vec![] };
        if ts.len() != self.arity() {
            return Err(no());
        }
        match (self, ts) {
            (Rule::Fuse, [Term::Pure(f), x]) => {
                let p = match x {
                    Term::Stateful(p) => p.clone(),
                    Term::Eval(p, g) => ProcExpr::eval(p.clone(), g.clone()),
                    _ => return Err(no()),
                };
                Ok(Term::Stateful(ProcExpr::fused(f.clone(), p)))
            }
            (Rule::Decouple, [Term::Pure(HomExpr::Compose(f, g))]) => {
                Ok(Term::Seq(vec![Term::Pure((**f).clone()), Term::Pure((**g).clone())]))
            }
            (Rule::Recouple, [Term::Pure(f), Term::Pure(g)]) => Ok(Term::Pure(HomExpr::compose(f.clone(), g.clone()))),
            (Rule::Decompose, [Term::Stateful(p)]) => {
                Ok(Term::Seq(vec![Term::Pure(HomExpr::hom_of(p.clone())), Term::Eval(p.clone(), None)]))
            }
            (Rule::Exchange, [Term::Eval(p, g0), Term::Pure(h)]) => {
                if g0.is_none() {
                    let sigma = reg.proc_expr(p)?;
                    if !sigma.output().is_identity(sigma.init_output()) {
                        return Err(side(&name, format!("initial output of {p} is {}, not ε", sigma.init_output())));
                    }
                }
                let pushed = match g0 {
                    Some(g0) => HomExpr::compose(g0.clone(), h.clone()),
                    None => h.clone(),
                };
                Ok(Term::Seq(vec![Term::Pure(HomExpr::push(h.clone(), p.clone())), Term::Eval(p.clone(), Some(pushed))]))
            }
            (Rule::SplitMerge(s), [Term::Pure(f)]) => {
                let h = reg.hom_expr(f)?;
                reg.splitter(s)?.source().expect_same(h.source()).map_err(|e| side(&name, e.to_string()))?;
                Hom::merge(h.target()).map_err(|e| side(&name, e.to_string()))?;
                let pf = Term::Pure(f.clone());
                Ok(Term::Seq(vec![Term::Split(s.clone()), Term::par(pf.clone(), pf), Term::Merge(h.target().name().into())]))
            }
            (Rule::SplitIntro(s), [x]) if !matches!(x, Term::Seq(_) | Term::Split(_) | Term::Merge(_)) => {
                let m = reg.splitter(s)?.source().clone();
                reg.denote(x)?.input().expect_same(&m).map_err(|_| no())?;
                Ok(Term::Seq(vec![Term::Split(s.clone()), Term::Merge(m.name().into()), x.clone()]))
            }
            (Rule::Partition(cert), [tau, Term::Merge(_), sigma]) if *tau == cert.upstream => {
                let out = reg.denote(sigma)?.output().clone();
                Hom::merge(&out).map_err(|e| side(&name, e.to_string()))?;
                cert.check(reg, sigma)?;
                Ok(Term::Seq(vec![tau.clone(), Term::par(sigma.clone(), sigma.clone()), Term::Merge(out.name().into())]))
            }
            (Rule::TightenLeft, [Term::Pure(HomExpr::Map(f)), Term::Loop(body)]) => {
                let u = feedback(reg, body)?;
                let inner = Term::Pure(HomExpr::prod((**f).clone(), HomExpr::Id(u)));
                Ok(Term::loop_(Term::seq(vec![inner, (**body).clone()])))
            }
            (Rule::TightenRight, [Term::Loop(body), Term::Pure(HomExpr::Map(g))]) => {
                let u = feedback(reg, body)?;
                let inner = Term::Pure(HomExpr::prod((**g).clone(), HomExpr::Id(u)));
                Ok(Term::loop_(Term::seq(vec![(**body).clone(), inner])))
            }
            (Rule::ExtractLeft, [Term::Loop(body)]) => match &**body {
                Term::Seq(ts) if ts.len() >= 2 => match &ts[0] {
                    Term::Pure(HomExpr::Prod(f, id)) if is_id_of(id, &feedback(reg, body)?) => Ok(Term::Seq(vec![
                        Term::Pure(HomExpr::map((**f).clone())),
                        Term::loop_(Term::seq(ts[1..].to_vec())),
                    ])),
                    _ => Err(no()),
                },
                _ => Err(no()),
            },
            (Rule::ExtractRight, [Term::Loop(body)]) => match &**body {
                Term::Seq(ts) if ts.len() >= 2 => match ts.last().unwrap() {
                    Term::Pure(HomExpr::Prod(g, id)) if is_id_of(id, &feedback(reg, body)?) => Ok(Term::Seq(vec![
                        Term::loop_(Term::seq(ts[..ts.len() - 1].to_vec())),
                        Term::Pure(HomExpr::map((**g).clone())),
                    ])),
                    _ => Err(no()),
                },
                _ => Err(no()),
            },
            (Rule::Custom { rewrite, .. }, ts) => rewrite(reg, ts),
            _ => Err(no()),
        }
    }
}

fn is_id_of(h: &HomExpr, u: &str) -> bool {
    matches!(h, HomExpr::Id(m) if m == u)
}

/// Name of the feedback monoid `U` of a loop body `M × U ⇝ N × U`.
fn feedback(reg: &Registry, body: &Term) -> Result<String> {
    match reg.denote(body)?.input().kind() {
        MonoidKind::Product(_, u) => Ok(u.name().to_string()),
        _ => Err(side("tighten", "loop body without a feedback channel")),
    }
}

/// Applies `rule` at `path`. Single-node rules rewrite the node there;
/// longer rules take the node at `path` and the elements after it in the
/// enclosing sequence. The result must keep the input and output monoids.
pub fn apply_rule(reg: &Registry, rule: &Rule, t: &Term, path: &[usize]) -> Result<Term> {
    let located = |e: Error| match e {
        Error::NoMatch { rule, .. } => Error::NoMatch { rule, path: path.to_vec() },
        e => e,
    };
    let k = rule.arity();
    let (target_path, new) = if k == 1 {
        let node = t.at(path)?;
        (path.to_vec(), rule.rewrite(reg, std::slice::from_ref(node)).map_err(located)?)
    } else {
        let (&i, parent_path) = path.split_last().ok_or_else(|| Error::NoMatch { rule: rule.name(), path: vec![] })?;
        let parent = t.at(parent_path)?;
        let kids = match parent {
            Term::Seq(ts) if i + k <= ts.len() => ts,
            Term::Seq(_) => return Err(Error::NoMatch { rule: rule.name(), path: path.to_vec() }),
            _ => {
                t.at(path)?;
                return Err(Error::NoMatch { rule: rule.name(), path: path.to_vec() });
            }
        };
        let replacement = rule.rewrite(reg, &kids[i..i + k]).map_err(located)?;
        let mut items = kids[..i].to_vec();
        items.push(replacement);
        items.extend_from_slice(&kids[i + k..]);
        (parent_path.to_vec(), Term::seq(items))
    };
    let before = reg.signature(t.at(&target_path)?)?;
    let after = reg.signature(&new)?;
    for (b, a) in [(&before.0, &after.0), (&before.1, &after.1)] {
        if a != b {
            return Err(Error::MonoidMismatch { expected: b.clone(), found: a.clone() });
        }
    }
    t.replace(&target_path, new)
}

/// Every path where `rule` applies, with the resulting term.
pub fn sites(reg: &Registry, rule: &Rule, t: &Term) -> Vec<(Vec<usize>, Result<Term>)> {
    t.paths()
        .into_iter()
        .filter_map(|p| match apply_rule(reg, rule, t, &p) {
            Err(Error::NoMatch { .. }) | Err(Error::InvalidPath(_)) => None,
            r => Some((p, r)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::join::JoinConfig;
    use crate::pipeline::registry::corpus_terms;

    fn term(name: &str) -> Term {
        corpus_terms().into_iter().find(|(n, _)| *n == name).unwrap().1
    }

    #[test]
    fn fuse_at_root() {
        let r = Registry::standard();
        let got = apply_rule(&r, &Rule::Fuse, &term("double;prefix-sum"), &[0]).unwrap();
        assert!(matches!(got, Term::Stateful(ProcExpr::Fused(..))));
    }

    #[test]
    fn exchange_moves_filter_before_eval() {
        let r = Registry::standard();
        let t = apply_rule(&r, &Rule::Decompose, &term("pairs;filter"), &[0]).unwrap();
        assert_eq!(t, term("decomposed-join"));
        let t = apply_rule(&r, &Rule::Exchange, &t, &[1]).unwrap();
        assert_eq!(t, term("exchanged-join"));
    }

    #[test]
    fn exchange_refuses_nonempty_initial_output() {
        let r = Registry::standard();
        let t = Term::seq(vec![Term::eval("shifted-sum"), Term::Pure(HomExpr::map(HomExpr::named("double")))]);
        assert!(matches!(apply_rule(&r, &Rule::Exchange, &t, &[0]), Err(Error::SideCondition { .. })));
    }

    #[test]
    fn invalid_path_and_nested_application() {
        let r = Registry::standard();
        let t = term("prefix-sum×double");
        assert!(matches!(apply_rule(&r, &Rule::Decompose, &t, &[7]), Err(Error::InvalidPath(_))));
        let got = apply_rule(&r, &Rule::Decompose, &t, &[0]).unwrap();
        match (&got, &t) {
            (Term::Par(a, b), Term::Par(_, b0)) => {
                assert_eq!(b, b0);
                assert!(matches!(**a, Term::Seq(_)));
            }
            _ => panic!("{got}"),
        }
    }

    #[test]
    fn tighten_then_extract_round_trips() {
        let r = Registry::standard();
        let t = term("double;loop swap-add");
        let inside = apply_rule(&r, &Rule::TightenLeft, &t, &[0]).unwrap();
        assert!(matches!(inside, Term::Loop(_)));
        assert_eq!(apply_rule(&r, &Rule::ExtractLeft, &inside, &[]).unwrap(), t);
        let t = term("loop swap-add;double");
        let inside = apply_rule(&r, &Rule::TightenRight, &t, &[0]).unwrap();
        assert_eq!(apply_rule(&r, &Rule::ExtractRight, &inside, &[]).unwrap(), t);
    }

    #[test]
    fn bad_buckets_fail_the_certificate() {
        let cfg = JoinConfig::paths_with_bad_buckets(4);
        let r = Registry::corpus(&cfg).unwrap();
        let cert = Certificate::new(Term::Split("parity".into()), 500, 1);
        let t = apply_rule(&r, &Rule::SplitIntro("parity".into()), &Term::stateful("join"), &[]).unwrap();
        let e = apply_rule(&r, &Rule::Partition(cert), &t, &[0]).unwrap_err();
        assert!(matches!(&e, Error::SideCondition { reason, .. } if reason.contains("n1")), "{e}");
    }

    #[test]
    fn unknown_rule_name() {
        assert!(Rule::parse("split-merge:parity").is_ok());
        assert!(Rule::parse("teleport").is_err());
    }
}
