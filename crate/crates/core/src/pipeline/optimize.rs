//! Verified rewriting: every accepted step is checked by `equiv_check`
//! between the terms before and after.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde_json::{json, Value as Json};

use crate::error::{Error, Result};
use crate::processor::{equiv_check, EquivVerdict, InputGen, Status};
use crate::sample;

use super::registry::Registry;
use super::rules::{apply_rule, sites, Rule};
use super::term::Term;

/// Cases per verified step unless told otherwise.
pub const DEFAULT_BUDGET: usize = 1000;

/// Compares the denotations of `t` and `t2` on inputs from `gen`, or on
/// samples of the input monoid.
pub fn verify_rewrite(reg: &Registry, t: &Term, t2: &Term, gen: Option<&InputGen>, budget: usize, seed: u64) -> Result<EquivVerdict> {
    let (p, q) = (reg.denote(t)?, reg.denote(t2)?);
    let fallback;
    let gen = match gen {
        Some(g) => g,
        None => {
            fallback = InputGen::from_monoid(p.input());
            &fallback
        }
    };
    equiv_check(&p, &q, gen, budget, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Rules in priority order; enabling rules only when the rule they
    /// enable fires right after.
    Greedy,
    /// Breadth-first over all verified rewrites up to this depth, keeping
    /// the cheapest term.
    Exhaustive(usize),
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Strategy> {
        match s.split_once(':') {
            None if s == "greedy" => Ok(Strategy::Greedy),
            None if s == "exhaustive" => Ok(Strategy::Exhaustive(3)),
            Some(("exhaustive", k)) => k.parse().map(Strategy::Exhaustive).map_err(|_| Error::UnknownRef(s.into())),
            _ => Err(Error::UnknownRef(s.into())),
        }
    }
}

#[derive(Clone)]
pub struct Options {
    pub strategy: Strategy,
    pub budget: usize,
    pub seed: u64,
    /// Skip verification.
    pub trusted: bool,
    pub max_steps: usize,
    /// Inputs for verification; samples of the input monoid by default.
    pub inputs: Option<InputGen>,
}

impl Default for Options {
    fn default() -> Options {
        Options { strategy: Strategy::Greedy, budget: DEFAULT_BUDGET, seed: sample::DEFAULT_SEED, trusted: false, max_steps: 32, inputs: None }
    }
}

/// One attempted rewrite. Rejected steps are kept in the log so a failed
/// verification is visible, but never change the term.
#[derive(Clone, Debug)]
pub struct Step {
    pub rule: String,
    pub path: Vec<usize>,
    pub accepted: bool,
    pub verdict: Option<EquivVerdict>,
    pub term: Term,
}

impl Step {
    pub fn to_json(&self) -> Json {
        json!({
            "rule": self.rule,
            "path": self.path,
            "accepted": self.accepted,
            "verdict": self.verdict.as_ref().map(|v| serde_json::to_value(v).unwrap_or(Json::Null)),
            "term": self.term.to_string(),
        })
    }
}

/// A rule that matched but whose side condition failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Refusal {
    pub rule: String,
    pub path: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Optimized {
    pub term: Term,
    pub log: Vec<Step>,
    pub refused: Vec<Refusal>,
}

impl Optimized {
    pub fn applied(&self) -> impl Iterator<Item = &Step> {
        self.log.iter().filter(|s| s.accepted)
    }
    pub fn rejected(&self) -> impl Iterator<Item = &Step> {
        self.log.iter().filter(|s| !s.accepted)
    }
}

/// Rules applied at most once per run; applying them again inside their
/// own output never terminates.
fn once(r: &Rule) -> bool {
    matches!(r, Rule::SplitMerge(_) | Rule::SplitIntro(_) | Rule::Partition(_))
}

/// For an enabling rule, the rule that has to fire right after it.
fn enables(r: &Rule, rules: &[Rule]) -> Option<Rule> {
    match r {
        Rule::Decompose => rules.iter().find(|x| matches!(x, Rule::Exchange)).cloned(),
        Rule::SplitIntro(_) => rules.iter().find(|x| matches!(x, Rule::Partition(_))).cloned(),
        _ => None,
    }
}

/// Rules that undo an improving rule; greedy search skips them.
fn inverse(r: &Rule) -> bool {
    matches!(r, Rule::Decouple | Rule::ExtractLeft | Rule::ExtractRight)
}

struct Verifier<'a> {
    reg: &'a Registry,
    opts: &'a Options,
    count: u64,
    refused: Vec<Refusal>,
}

impl Verifier<'_> {
    /// Keeps successful rewrites and notes refused ones.
    fn matched(&mut self, rule: &Rule, found: Vec<(Vec<usize>, Result<Term>)>) -> Vec<(Vec<usize>, Term)> {
        let mut ok = Vec::new();
        for (path, r) in found {
            match r {
                Ok(t) => ok.push((path, t)),
                Err(e) => {
                    let r = Refusal { rule: rule.name(), path, reason: e.to_string() };
                    if !self.refused.contains(&r) {
                        self.refused.push(r);
                    }
                }
            }
        }
        ok
    }

    fn check(&mut self, t: &Term, t2: &Term) -> Result<Option<EquivVerdict>> {
        if self.opts.trusted {
            return Ok(None);
        }
        self.count += 1;
        let seed = sample::derive(self.opts.seed, self.count);
        verify_rewrite(self.reg, t, t2, self.opts.inputs.as_ref(), self.opts.budget, seed).map(Some)
    }

    fn step(&mut self, rule: &Rule, path: &[usize], t: &Term, t2: Term) -> Result<Step> {
        let verdict = self.check(t, &t2)?;
        let accepted = verdict.as_ref().is_none_or(EquivVerdict::holds);
        Ok(Step { rule: rule.name(), path: path.to_vec(), accepted, verdict, term: t2 })
    }
}

/// Rewrites `t` with `rules` under `opts.strategy`. Returns the input when
/// nothing applies.
pub fn optimize(reg: &Registry, t: &Term, rules: &[Rule], opts: &Options) -> Result<Optimized> {
    let mut v = Verifier { reg, opts, count: 0, refused: vec![] };
    match opts.strategy {
        Strategy::Greedy => greedy(&mut v, t, rules),
        Strategy::Exhaustive(k) => exhaustive(&mut v, t, rules, k),
    }
}

fn greedy(v: &mut Verifier<'_>, t: &Term, rules: &[Rule]) -> Result<Optimized> {
    let reg = v.reg;
    let mut cur = t.clone();
    let mut seen: HashSet<Term> = HashSet::from([cur.clone()]);
    let mut used: HashSet<String> = HashSet::new();
    let mut log = Vec::new();
    'outer: for _ in 0..v.opts.max_steps {
        for rule in rules.iter().filter(|r| !inverse(r)) {
            if once(rule) && used.contains(&rule.name()) {
                continue;
            }
            let follow = enables(rule, rules);
            if follow.is_none() && matches!(rule, Rule::Decompose | Rule::SplitIntro(_)) {
                continue;
            }
            let found = sites(reg, rule, &cur);
            for (path, next) in v.matched(rule, found) {
                if seen.contains(&next) {
                    continue;
                }
                match &follow {
                    None => {
                        seen.insert(next.clone());
                        let s = v.step(rule, &path, &cur, next.clone())?;
                        let ok = s.accepted;
                        log.push(s);
                        if ok {
                            if once(rule) {
                                used.insert(rule.name());
                            }
                            cur = next;
                            continue 'outer;
                        }
                    }
                    Some(f) => {
                        let found = sites(reg, f, &next);
                        let Some((path2, after)) = v.matched(f, found).into_iter().find(|(_, a)| !seen.contains(a)) else {
                            continue;
                        };
                        seen.insert(next.clone());
                        let s1 = v.step(rule, &path, &cur, next.clone())?;
                        if !s1.accepted {
                            log.push(s1);
                            continue;
                        }
                        seen.insert(after.clone());
                        let s2 = v.step(f, &path2, &next, after.clone())?;
                        let ok = s2.accepted;
                        log.push(s1);
                        log.push(s2);
                        if ok {
                            for r in [rule, f] {
                                if once(r) {
                                    used.insert(r.name());
                                }
                            }
                            cur = after;
                            continue 'outer;
                        }
                        // The enabling step alone is sound but pointless.
                        log.last_mut().unwrap().accepted = false;
                        let n = log.len();
                        log[n - 2].accepted = false;
                    }
                }
            }
        }
        break;
    }
    Ok(Optimized { term: cur, log, refused: std::mem::take(&mut v.refused) })
}

fn exhaustive(v: &mut Verifier<'_>, t: &Term, rules: &[Rule], depth: usize) -> Result<Optimized> {
    let reg = v.reg;
    let mut seen: HashSet<Term> = HashSet::from([t.clone()]);
    let mut queue: VecDeque<(Term, Vec<Step>)> = VecDeque::from([(t.clone(), vec![])]);
    let mut best = (t.cost(), 0usize, t.clone(), Vec::new());
    let mut rejected = Vec::new();
    while let Some((cur, path_log)) = queue.pop_front() {
        if path_log.len() >= depth {
            continue;
        }
        for rule in rules {
            if once(rule) && path_log.iter().any(|s| s.rule == rule.name()) {
                continue;
            }
            let found = sites(reg, rule, &cur);
            for (path, next) in v.matched(rule, found) {
                if !seen.insert(next.clone()) {
                    continue;
                }
                let s = v.step(rule, &path, &cur, next.clone())?;
                if !s.accepted {
                    rejected.push(s);
                    continue;
                }
                let mut l = path_log.clone();
                l.push(s);
                let key = (next.cost(), l.len());
                if key < (best.0, best.1) {
                    best = (key.0, key.1, next.clone(), l.clone());
                }
                queue.push_back((next, l));
            }
        }
    }
    let mut log = best.3;
    log.extend(rejected);
    Ok(Optimized { term: best.2, log, refused: std::mem::take(&mut v.refused) })
}

/// Re-applies the accepted steps of a log to `t`, checking each lands on
/// the recorded term.
pub fn replay(reg: &Registry, t: &Term, log: &[Step], rules: &[Rule]) -> Result<Term> {
    let by_name: BTreeMap<String, &Rule> = rules.iter().map(|r| (r.name(), r)).collect();
    let mut cur = t.clone();
    for s in log.iter().filter(|s| s.accepted) {
        let rule = by_name.get(&s.rule).ok_or_else(|| Error::UnknownRef(s.rule.clone()))?;
        cur = apply_rule(reg, rule, &cur, &s.path)?;
        if cur != s.term {
            return Err(Error::Rejected(format!("replay of {} at {:?} gave {cur}, log has {}", s.rule, s.path, s.term)));
        }
    }
    Ok(cur)
}

/// Summary counts for a log.
pub fn log_summary(o: &Optimized) -> Json {
    let failed = o.log.iter().filter(|s| s.verdict.as_ref().is_some_and(|v| v.status == Status::NotEquivalent)).count();
    json!({
        "applied": o.applied().count(),
        "rejected": o.rejected().count(),
        "failed_verification": failed,
    })
}
