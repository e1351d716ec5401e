//! Reliable delivery over lossy networks, closed with `loop`.
//!
//! `Pack = T[List[ℕ × Msg]]` carries numbered packets and `Re = T[List[ℕ]]`
//! carries retransmission requests; ticks mark logical time. One round is
//! `σ = sender ; (network₁ × pure id) ; receiver ; (pure id × network₂)` and
//! the system is `loop σ ; pure flatten`, fed a first batch holding the
//! messages and then tick batches.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::monoid::{list, product, Carrier, Monoid};
use crate::algebra::ticked::{normalize, tick, ticked};
use crate::algebra::Hom;
use crate::error::{precondition, Result};
use crate::processor::{loop_, par, pure, seq, Processor};
use crate::sample::{self, splitmix};
use crate::state::StateElement;
use crate::value::{Segment, Shape, Value};

/// A lossy network. Before packet `i`'s deadline `t_i` it may drop the
/// packet (replacing it with a tick), hold it back or forward it; once the
/// network has processed `t_i` inputs, packet `i` is forwarded on receipt
/// and any held copy of it is released. Ticks count as processed inputs, so
/// the count advances every round even when only ticks arrive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub seed: u64,
    #[serde(default)]
    pub deadlines: BTreeMap<i64, u64>,
    /// Deadline for sequence numbers missing from `deadlines`.
    #[serde(default)]
    pub default_deadline: u64,
    /// Bound on held packets; a full queue forwards instead of holding.
    #[serde(default)]
    pub capacity: Option<usize>,
    /// Chance, in percent, that a packet before its deadline is dropped.
    #[serde(default = "default_drop")]
    pub drop_percent: u64,
    /// Chance, in percent, that it is held back instead.
    #[serde(default = "default_hold")]
    pub hold_percent: u64,
}

fn default_drop() -> u64 {
    40
}

fn default_hold() -> u64 {
    30
}

impl NetworkConfig {
    pub fn perfect() -> Self {
        NetworkConfig {
            seed: 0,
            deadlines: BTreeMap::new(),
            default_deadline: 0,
            capacity: None,
            drop_percent: default_drop(),
            hold_percent: default_hold(),
        }
    }

    /// Deadlines for `0..k` drawn from `0..=max_deadline`.
    pub fn adversarial(seed: u64, k: usize, max_deadline: u64) -> Self {
        let mut rng = sample::rng(sample::derive(seed, sample::label("deadlines")));
        let deadlines = (0..k as i64).map(|i| (i, sample::small_int(&mut rng, 0, max_deadline as i64) as u64)).collect();
        NetworkConfig { seed, deadlines, capacity: Some(4), ..NetworkConfig::perfect() }
    }

    /// Drops every packet until its deadline.
    pub fn hostile(seed: u64, k: usize, max_deadline: u64) -> Self {
        NetworkConfig { drop_percent: 100, hold_percent: 0, ..NetworkConfig::adversarial(seed, k, max_deadline) }
    }

    pub fn deadline(&self, i: i64) -> u64 {
        self.deadlines.get(&i).copied().unwrap_or(self.default_deadline)
    }
}

pub fn messages() -> Carrier {
    Carrier::syms("Msg", &["a", "b", "c", "d", "e", "f", "g", "h"])
}

fn packet_carrier() -> Carrier {
    let m = messages();
    let all = (0..8)
        .flat_map(|i| m.enumeration().unwrap().iter().map(move |x| Value::pair(Value::Int(i), x.clone())))
        .collect();
    Carrier::finite("ℕ×Msg", Shape::pair(Shape::Int, Shape::Sym), all)
}

/// `T[List[Msg]]`, the sender's data input.
pub fn data() -> Monoid {
    ticked(&list(messages()))
}

pub fn pack() -> Monoid {
    ticked(&list(packet_carrier()))
}

pub fn re() -> Monoid {
    ticked(&list(Carrier::ints(0, 8)))
}

pub fn msg_list() -> Monoid {
    list(messages())
}

enum Atom {
    Item(Value),
    Tick,
}

fn atoms(v: &Value) -> Vec<Atom> {
    let mut out = Vec::new();
    for s in v.as_segments() {
        match s {
            Segment::Tick => out.push(Atom::Tick),
            Segment::Elem(xs) => out.extend(xs.as_list().iter().cloned().map(Atom::Item)),
        }
    }
    out
}

fn empty() -> Value {
    Value::Ticked(vec![])
}

/// `[x]` as a ticked word; a one-entry list is already in normal form.
fn one(x: Value) -> Value {
    Value::Ticked(vec![Segment::Elem(Value::List(vec![x]))])
}

fn sampled_states(name: &str, shape: Shape, f: impl Fn(&mut sample::Rng) -> Value + Send + Sync + 'static) -> Carrier {
    Carrier::new(name, shape, Arc::new(f))
}

/// `T[List[Msg]] × Re ⇝ Pack × Re`. State is the list of messages so far;
/// message `i` is the `i`-th entry.
pub fn sender() -> Processor {
    let input = product(&data(), &re());
    let output = product(&pack(), &re());
    let states = sampled_states("SenderState", Shape::list(Shape::Sym), |rng| {
        let m = messages();
        Value::List((0..sample::below(rng, 9)).map(|_| m.sample(rng)).collect())
    });
    let o = output.clone();
    Processor::on_elements("sender", &input, &output, states, Value::List(vec![]), output.identity(), move |v| {
        let (d, r) = v.as_pair();
        let mut acc = StateElement::identity(&o);
        let steps = atoms(d).into_iter().map(|a| (true, a)).chain(atoms(r).into_iter().map(|a| (false, a)));
        for (is_data, a) in steps {
            acc = acc.then(&StateElement::from_fn(&o, move |s| {
                let sent = s.as_list();
                match (&a, is_data) {
                    (Atom::Tick, _) => (s.clone(), Value::pair(tick(), empty())),
                    (Atom::Item(m), true) => {
                        let i = sent.len() as i64;
                        let mut next = sent.to_vec();
                        next.push(m.clone());
                        (Value::List(next), Value::pair(one(Value::pair(Value::Int(i), m.clone())), empty()))
                    }
                    (Atom::Item(i), false) => {
                        let out = match sent.get(i.as_int() as usize) {
                            Some(m) => one(Value::pair(i.clone(), m.clone())),
                            None => empty(),
                        };
                        (s.clone(), Value::pair(out, empty()))
                    }
                }
            }));
        }
        acc
    })
    .expect("typed")
}

/// `Pack × Re ⇝ List[Msg] × Re`. State is `(n, received)` with `n` the first
/// sequence number not yet delivered.
pub fn receiver() -> Processor {
    let input = product(&pack(), &re());
    let output = product(&msg_list(), &re());
    let states = sampled_states("ReceiverState", Shape::pair(Shape::Int, Shape::set(Shape::pair(Shape::Int, Shape::Sym))), |rng| {
        let p = packet_carrier();
        let got: Vec<Value> = (0..sample::below(rng, 6)).map(|_| p.sample(rng)).collect();
        Value::pair(Value::Int(sample::small_int(rng, 0, 4)), Value::set(got))
    });
    let o = output.clone();
    Processor::on_elements(
        "receiver",
        &input,
        &output,
        states,
        Value::pair(Value::Int(0), Value::set([])),
        output.identity(),
        move |v| {
            let (p, r) = v.as_pair();
            let mut acc = StateElement::identity(&o);
            // Request items on the Re input carry nothing for the receiver;
            // only its ticks count as inputs.
            let steps = atoms(p).into_iter().chain(atoms(r).into_iter().filter(|a| matches!(a, Atom::Tick)));
            for a in steps {
                acc = acc.then(&StateElement::from_fn(&o, move |s| {
                    let (n, got) = s.as_pair();
                    let n = n.as_int();
                    let request = |k: i64| Value::pair(Value::List(vec![]), one(Value::Int(k)));
                    match &a {
                        Atom::Item(pkt) => {
                            let mut got = got.as_set().clone();
                            got.insert(pkt.clone());
                            if pkt.as_pair().0.as_int() != n {
                                return (Value::pair(Value::Int(n), Value::Set(got)), request(n));
                            }
                            let by_seq: BTreeMap<i64, Value> =
                                got.iter().map(|x| (x.as_pair().0.as_int(), x.as_pair().1.clone())).collect();
                            let mut delivered = Vec::new();
                            let mut next = n;
                            while let Some(m) = by_seq.get(&next) {
                                delivered.push(m.clone());
                                next += 1;
                            }
                            let out = Value::pair(Value::List(delivered), one(Value::Int(next)));
                            (Value::pair(Value::Int(next), Value::Set(got)), out)
                        }
                        Atom::Tick => (s.clone(), request(n)),
                    }
                }));
            }
            acc
        },
    )
    .expect("typed")
}

/// A network over `T[List[X]]` where `seq_of` reads the sequence number.
fn network(name: &str, items: Carrier, cfg: &NetworkConfig, seq_of: fn(&Value) -> i64) -> Processor {
    let inner = list(items.clone());
    let m = ticked(&inner);
    let states = sampled_states(&format!("NetState[{}]", items.name()), Shape::pair(Shape::Int, Shape::list(items.shape().clone())), |rng| {
        Value::pair(Value::Int(sample::small_int(rng, 0, 12)), Value::List(vec![]))
    });
    let cfg = cfg.clone();
    let o = m.clone();
    Processor::on_elements(name, &m, &m, states, Value::pair(Value::Int(0), Value::List(vec![])), m.identity(), move |v| {
        let mut acc = StateElement::identity(&o);
        for a in atoms(v) {
            let (cfg, inner) = (cfg.clone(), inner.clone());
            acc = acc.then(&StateElement::from_fn(&o, move |s| {
                let (count, held) = s.as_pair();
                let count = count.as_int() as u64 + 1;
                let mut held = held.as_list().to_vec();
                let due = |y: &Value| count >= cfg.deadline(seq_of(y));
                let mut segs = Vec::new();
                let r = match &a {
                    Atom::Tick => {
                        segs.push(Segment::Tick);
                        splitmix(cfg.seed ^ splitmix(count))
                    }
                    Atom::Item(x) => {
                        let i = seq_of(x);
                        let r = splitmix(cfg.seed ^ splitmix(count) ^ splitmix(i as u64).rotate_left(17));
                        if due(x) {
                            segs.push(Segment::Elem(Value::List(vec![x.clone()])));
                        } else {
                            let roll = r % 100;
                            let room = cfg.capacity.is_none_or(|c| held.len() < c);
                            if roll < cfg.drop_percent {
                                segs.push(Segment::Tick);
                            } else if roll < cfg.drop_percent + cfg.hold_percent && room {
                                held.push(x.clone());
                            } else {
                                segs.push(Segment::Elem(Value::List(vec![x.clone()])));
                            }
                        }
                        r
                    }
                };
                let mut keep = Vec::new();
                for (j, y) in held.into_iter().enumerate() {
                    if due(&y) || splitmix(r ^ j as u64) % 3 == 0 {
                        segs.push(Segment::Elem(Value::List(vec![y])));
                    } else {
                        keep.push(y);
                    }
                }
                (Value::pair(Value::Int(count as i64), Value::List(keep)), normalize(&inner, segs))
            }));
        }
        acc
    })
    .expect("typed")
}

pub fn network1(cfg: &NetworkConfig) -> Processor {
    network("network₁", packet_carrier(), cfg, |x| x.as_pair().0.as_int())
}

pub fn network2(cfg: &NetworkConfig) -> Processor {
    network("network₂", Carrier::ints(0, 8), cfg, |x| x.as_int())
}

/// One round: `sender ; (network₁ × pure id) ; receiver ; (pure id × network₂)`.
pub fn tcp_round(net1: &NetworkConfig, net2: &NetworkConfig) -> Processor {
    let a = par(&network1(net1), &pure(&Hom::identity(&re())));
    let b = par(&pure(&Hom::identity(&msg_list())), &network2(net2));
    let s = seq(&sender(), &a).expect("typed");
    let s = seq(&s, &receiver()).expect("typed");
    seq(&s, &b).expect("typed").renamed("σ")
}

/// `loop σ : List[T[List[Msg]]] ⇝ List[List[Msg]]`.
pub fn tcp_loop(net1: &NetworkConfig, net2: &NetworkConfig) -> Processor {
    loop_(&tcp_round(net1, net2)).expect("typed").renamed("loop σ")
}

/// `loop σ ; pure flatten : List[T[List[Msg]]] ⇝ List[Msg]`.
pub fn tcp_system(net1: &NetworkConfig, net2: &NetworkConfig) -> Processor {
    let flat = Hom::flatten(&msg_list()).expect("list of lists");
    seq(&tcp_loop(net1, net2), &pure(&flat)).expect("typed").renamed("tcp")
}

/// The batch holding the messages, followed by `ticks` tick batches.
pub fn tcp_input(msgs: &[Value], ticks: usize) -> Value {
    let d = data();
    let first = normalize(&list(messages()), [Segment::Elem(Value::List(msgs.to_vec()))]);
    let mut batches = vec![if msgs.is_empty() { d.identity() } else { first }];
    batches.extend(std::iter::repeat_n(tick(), ticks));
    Value::List(batches)
}

/// `Σ_{i<k} max(t¹_i, t²_i) + 1`.
pub fn round_bound(k: usize, net1: &NetworkConfig, net2: &NetworkConfig) -> u64 {
    (0..k as i64).map(|i| net1.deadline(i).max(net2.deadline(i))).sum::<u64>() + 1
}

#[derive(Clone, Debug, Serialize)]
pub struct TcpRun {
    pub messages: Vec<String>,
    /// Tick batches consumed before the output equalled the messages.
    pub rounds: Option<u64>,
    pub bound: u64,
    pub max_rounds: u64,
    /// The cumulative output was a prefix of the messages after every batch.
    pub prefix_invariant: bool,
    pub delivered: Vec<String>,
}

impl TcpRun {
    pub fn within_bound(&self) -> bool {
        self.prefix_invariant && self.rounds.is_some_and(|n| n <= self.bound)
    }
}

fn names(xs: &[Value]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

/// Feeds the message batch and then up to `max_rounds` tick batches,
/// stopping as soon as every message has been delivered.
pub fn simulate(msgs: &[Value], net1: &NetworkConfig, net2: &NetworkConfig, max_rounds: u64) -> Result<TcpRun> {
    if msgs.len() > 8 {
        return Err(precondition("tcp simulation", "at most 8 messages"));
    }
    let p = tcp_system(net1, net2);
    let mut session = p.session();
    let mut prefix_ok = true;
    let mut check = |total: &Value| {
        let got = total.as_list();
        prefix_ok &= got.len() <= msgs.len() && got == &msgs[..got.len()];
        got.len() == msgs.len()
    };
    let mut rounds = None;
    session.feed(&tcp_input(msgs, 0));
    if check(session.total()) {
        rounds = Some(0);
    }
    let mut n = 0;
    while rounds.is_none() && n < max_rounds {
        session.feed(&Value::List(vec![tick()]));
        n += 1;
        if check(session.total()) {
            rounds = Some(n);
        }
    }
    Ok(TcpRun {
        messages: names(msgs),
        rounds,
        bound: round_bound(msgs.len(), net1, net2),
        max_rounds,
        prefix_invariant: prefix_ok,
        delivered: names(session.total().as_list()),
    })
}

/// `k` messages drawn from a seed.
pub fn sample_messages(k: usize, seed: u64) -> Vec<Value> {
    let mut rng = sample::rng(sample::derive(seed, sample::label("messages")));
    let m = messages();
    (0..k).map(|_| m.sample(&mut rng)).collect()
}
