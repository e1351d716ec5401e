use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use serde_json::{json, Value as Json};

use streamalg::algebra::check_monoid_laws;
use streamalg::examples::catalog::{self, broken_monoid, Scope};
use streamalg::examples::join::JoinConfig;
use streamalg::examples::tcp::{sample_messages, simulate, NetworkConfig};
use streamalg::examples::{lookup, registry};
use streamalg::pipeline::{self, corpus_terms, verify_rewrite, Certificate, Options, Registry, Rule, Strategy, Term};
use streamalg::processor::Processor;
use streamalg::sample;
use streamalg::Value;

use crate::report::{CmdResult, Failure, SuiteReport};

pub const SEED_VAR: &str = "STREAMALG_SEED";

/// `--seed`, then `$STREAMALG_SEED`, then the library default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| Failure(format!("{SEED_VAR}={v} is not a 64-bit integer"))),
        Err(_) => Ok(sample::DEFAULT_SEED),
    }
}

fn read_json(path: &Path) -> Result<Json, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// Cuts `x` into chunks: the whole input, one generator per chunk, seeded
/// random cuts, or fixed sizes with the remainder as a last chunk.
fn chunk(p: &Processor, x: &Value, how: &str, seed: u64) -> Result<Vec<Value>, Failure> {
    let m = p.input();
    if how == "whole" {
        return Ok(vec![x.clone()]);
    }
    let gens = m.factor(x).ok_or_else(|| Failure(format!("{} cannot be split into generators", m.name())))?;
    if gens.is_empty() {
        return Ok(vec![x.clone()]);
    }
    let sizes: Vec<usize> = match how {
        "per-generator" => vec![1; gens.len()],
        "random" => {
            let mut rng = sample::rng(seed);
            let mut left = gens.len();
            let mut out = vec![];
            while left > 0 {
                let k = 1 + sample::below(&mut rng, left);
                out.push(k);
                left -= k;
            }
            out
        }
        list => list
            .split(',')
            .map(|s| match s.trim().parse::<usize>() {
                Ok(0) | Err(_) => Err(Failure(format!("bad chunk size `{s}` in --chunking"))),
                Ok(n) => Ok(n),
            })
            .collect::<Result<_, _>>()?,
    };
    let mut out = Vec::new();
    let mut rest = &gens[..];
    for k in sizes {
        if rest.is_empty() {
            break;
        }
        let (a, b) = rest.split_at(k.min(rest.len()));
        out.push(m.mconcat(a.to_vec()));
        rest = b;
    }
    if !rest.is_empty() {
        out.push(m.mconcat(rest.to_vec()));
    }
    Ok(out)
}

pub fn run(example: &str, input: Option<&str>, input_file: Option<&Path>, chunking: &str, out: Option<&Path>, seed: u64) -> CmdResult {
    let started = Instant::now();
    let ex = lookup(example).ok_or_else(|| Failure(format!("unknown example `{example}`")))?;
    let p = &ex.processor;
    let raw: Json = match (input, input_file) {
        (Some(s), _) => serde_json::from_str(s)?,
        (None, Some(f)) => read_json(f)?,
        (None, None) => return Err(Failure("give --input or --input-file".into())),
    };
    let x = p.input().decode(&raw)?;
    let chunks = chunk(p, &x, chunking, seed)?;

    let out_m = p.output();
    let mut lines = vec![json!({ "example": example, "input_monoid": p.input().name(), "monoid": out_m.name() })];
    let mut session = p.session();
    let mut increments = Vec::new();
    for c in &chunks {
        let inc = session.feed(c);
        let enc = out_m.encode(&inc)?;
        lines.push(json!({ "chunk": p.input().encode(c)?, "output": enc, "state": session.state().digest() }));
        increments.push(enc);
    }
    let total = session.total().clone();
    lines.push(json!({ "total": out_m.encode(&total)? }));
    if let Some(path) = out {
        let mut f = fs::File::create(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        for l in &lines {
            writeln!(f, "{}", serde_json::to_string(l)?)?;
        }
    }

    let whole = p.run(&x);
    let mut r = SuiteReport::new("run", seed);
    r.cases = 1;
    if !out_m.eq(&whole, &total) {
        r.fail("chunked runs agree", json!({ "chunked": total.to_json_lossy(), "whole": whole.to_json_lossy() }));
    }
    r.set("example", example);
    r.set("chunking", chunking);
    r.set("chunks", chunks.len());
    r.set("increments", increments);
    r.set("total", out_m.encode(&total)?);
    r.set("initial_output", out_m.encode(p.init_output())?);
    Ok(r.finish(started))
}

pub fn laws(scope: &str, budget: usize, inject_broken: bool, seed: u64) -> CmdResult {
    let started = Instant::now();
    let scope: Scope = scope.parse()?;
    let mut reports = catalog::run_suite(scope, budget, seed);
    if inject_broken && matches!(scope, Scope::All | Scope::Monoids) {
        let m = broken_monoid();
        let mut rep = check_monoid_laws(&m, budget, sample::derive(seed, sample::label(m.name())));
        rep.subject = format!("monoid {}", rep.subject);
        reports.push(rep);
    }
    let mut r = SuiteReport::new("laws", seed);
    r.set("scope", scope);
    r.set("budget", budget);
    let mut subjects = Vec::new();
    for rep in &reports {
        r.cases += rep.cases;
        for f in &rep.failures {
            r.fail(format!("{}: {}", rep.subject, f.law), f.witness.clone());
        }
        subjects.push(json!({ "subject": rep.subject, "cases": rep.cases, "passed": rep.passed() }));
    }
    if matches!(scope, Scope::All | Scope::Homs | Scope::Streamfns) {
        let refs = catalog::refutations(budget, seed);
        for x in &refs {
            if !x.found() {
                r.fail(format!("expected counterexample: {}", x.claim), Json::Null);
            }
        }
        r.set("refutations", refs);
    }
    r.set("subjects", subjects);
    Ok(r.finish(started))
}

/// Which join universe the pipeline registry is built over.
#[derive(Args, Clone, Debug)]
pub struct CorpusArgs {
    /// Vertex count of the edge universe for the join terms.
    #[arg(long, default_value_t = 4)]
    pub vertices: i64,
    /// Use buckets that disagree with the join predicate.
    #[arg(long)]
    pub bad_buckets: bool,
}

impl CorpusArgs {
    fn registry(&self) -> Result<Registry, Failure> {
        if !(1..=6).contains(&self.vertices) {
            return Err(Failure("--vertices must be between 1 and 6".into()));
        }
        let cfg =
            if self.bad_buckets { JoinConfig::paths_with_bad_buckets(self.vertices) } else { JoinConfig::paths(self.vertices) };
        Ok(Registry::corpus(&cfg)?)
    }
}

pub fn equiv(a: &Path, b: &Path, budget: usize, corpus: &CorpusArgs, seed: u64) -> CmdResult {
    let started = Instant::now();
    let reg = corpus.registry()?;
    let (ta, tb) = (reg.parse(&read_json(a)?)?, reg.parse(&read_json(b)?)?);
    let (sa, sb) = (reg.signature(&ta)?, reg.signature(&tb)?);
    if sa != sb {
        return Err(Failure(format!("terms have different types: {} ⇝ {} and {} ⇝ {}", sa.0, sa.1, sb.0, sb.1)));
    }
    let v = verify_rewrite(&reg, &ta, &tb, None, budget, seed)?;
    let mut r = SuiteReport::new("equiv", seed);
    r.cases = v.cases;
    if let Some(w) = &v.witness {
        r.fail("equivalence", w.clone());
    }
    r.set("left", ta.to_string());
    r.set("right", tb.to_string());
    r.set("status", v.status);
    r.set("exhaustive", v.exhaustive);
    Ok(r.finish(started))
}

pub struct OptimizeArgs {
    pub strategy: String,
    pub budget: usize,
    pub rules: Option<String>,
    pub certificate: Option<String>,
    pub inject_broken: bool,
    pub trusted: bool,
    pub out: Option<PathBuf>,
    pub corpus: CorpusArgs,
}

pub fn optimize(term: &Path, a: &OptimizeArgs, seed: u64) -> CmdResult {
    let started = Instant::now();
    let reg = a.corpus.registry()?;
    let t = reg.parse(&read_json(term)?)?;
    let strategy: Strategy = a.strategy.parse()?;
    let mut rules = match &a.rules {
        Some(list) => list.split(',').map(|s| Rule::parse(s.trim())).collect::<Result<Vec<_>, _>>()?,
        None => Rule::standard(),
    };
    if let Some(s) = &a.certificate {
        reg.splitter(s)?;
        rules.push(Rule::SplitIntro(s.clone()));
        rules.push(Rule::Partition(Certificate::new(Term::Split(s.clone()), a.budget, sample::derive(seed, 7))));
    }
    if a.inject_broken {
        rules.insert(0, Rule::drop_pure());
    }
    let opts = Options { strategy, budget: a.budget, seed, trusted: a.trusted, ..Options::default() };
    let o = pipeline::optimize(&reg, &t, &rules, &opts)?;
    let annotated = reg.annotate(&o.term)?;
    if let Some(path) = &a.out {
        fs::write(path, serde_json::to_string_pretty(&annotated)? + "\n").map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    let mut r = SuiteReport::new("optimize", seed);
    r.cases = o.log.iter().filter_map(|s| s.verdict.as_ref()).map(|v| v.cases).sum();
    r.set("input", t.to_string());
    r.set("output", o.term.to_string());
    r.set("strategy", &a.strategy);
    r.set("trusted", a.trusted);
    r.set("applied", o.applied().map(|s| s.rule.clone()).collect::<Vec<_>>());
    r.set("log", o.log.iter().map(|s| s.to_json()).collect::<Vec<_>>());
    r.set(
        "refused",
        o.refused.iter().map(|x| json!({ "rule": x.rule, "path": x.path, "reason": x.reason })).collect::<Vec<_>>(),
    );
    r.set("term", annotated);
    Ok(r.finish(started))
}

pub fn tcp(k: usize, net1: Option<&Path>, net2: Option<&Path>, seeds: u64, max_deadline: u64, max_rounds: u64, seed: u64) -> CmdResult {
    let started = Instant::now();
    if k > 8 {
        return Err(Failure("--k must be at most 8".into()));
    }
    let load = |p: &Path| -> Result<NetworkConfig, Failure> { Ok(serde_json::from_value(read_json(p)?)?) };
    let fixed = match (net1, net2) {
        (Some(a), Some(b)) => Some((load(a)?, load(b)?)),
        (None, None) => None,
        _ => return Err(Failure("give both --net1 and --net2, or neither".into())),
    };
    let mut r = SuiteReport::new("tcp", seed);
    let mut runs = Vec::new();
    let count = if fixed.is_some() { 1 } else { seeds.max(1) };
    for i in 0..count {
        let s = seed.wrapping_add(i);
        let (n1, n2) = match &fixed {
            Some((a, b)) => (a.clone(), b.clone()),
            None => (NetworkConfig::adversarial(sample::derive(s, 1), k, max_deadline), NetworkConfig::adversarial(sample::derive(s, 2), k, max_deadline)),
        };
        let msgs = sample_messages(k, s);
        let run = simulate(&msgs, &n1, &n2, max_rounds)?;
        r.cases += 1;
        let w = json!({ "seed": s, "rounds": run.rounds, "bound": run.bound, "delivered": run.delivered });
        if !run.prefix_invariant {
            r.fail("delivered output is a prefix of the messages", w.clone());
        }
        match run.rounds {
            None => r.fail("complete delivery within max rounds", w),
            Some(n) if n > run.bound => r.fail("delivery within the deadline bound", w),
            _ => {}
        }
        runs.push(json!({ "seed": s, "rounds": run.rounds, "bound": run.bound, "prefix_invariant": run.prefix_invariant }));
    }
    r.set("k", k);
    r.set("max_rounds", max_rounds);
    r.set("runs", runs);
    Ok(r.finish(started))
}

pub fn list() -> CmdResult {
    let mut r = SuiteReport::new("list", resolve_seed(None)?);
    r.set("examples", registry().iter().map(|e| e.name).collect::<Vec<_>>());
    r.set("rules", Rule::standard().iter().map(Rule::name).collect::<Vec<_>>());
    r.set("terms", corpus_terms().iter().map(|(n, _)| *n).collect::<Vec<_>>());
    r.set("registry", Registry::standard().names());
    Ok(r)
}
