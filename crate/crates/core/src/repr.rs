//! Concrete representations of the image of a homomorphism
//! `f: M → State[S, N]`.
//!
//! An [`Embedding`] pairs a representation monoid `P` with `φ: Img f → P`
//! and `ψ: P → Img f` such that `ψ(φ(α))` behaves like `α`. Two
//! constructions are provided: words over generator tags
//! ([`defunctionalize`]) and tables indexed by every state
//! ([`tabulate`]). [`trivial_state_collapse`] handles `State[{∗}, N] ≅ N`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::laws::{sample_mixed, witness, LawReport};
use crate::algebra::monoid::{list, Carrier, Flags, Monoid, MonoidKind, StateSpace, UnFn};
use crate::algebra::Hom;
use crate::error::{precondition, Error, Result};
use crate::sample;
use crate::state::{ext_counterexample, StateElement, EQ_SAMPLES};
use crate::value::{Shape, Value};

pub type PartialFn = Arc<dyn Fn(&Value) -> Result<Value> + Send + Sync>;

#[derive(Clone)]
pub struct Embedding {
    name: String,
    image: Monoid,
    rep: Monoid,
    phi: PartialFn,
    psi: UnFn,
    lift: PartialFn,
}

impl Embedding {
    pub fn name(&self) -> &str {
        &self.name
    }
    /// The state monoid `State[S, N]` whose elements are represented.
    pub fn image(&self) -> &Monoid {
        &self.image
    }
    pub fn rep(&self) -> &Monoid {
        &self.rep
    }
    /// `φ`. For tag words it is only defined on images of single atoms.
    pub fn phi(&self, alpha: &Value) -> Result<Value> {
        (self.phi)(alpha)
    }
    pub fn psi(&self, p: &Value) -> Value {
        (self.psi)(p)
    }
    /// `f ; φ`, computed from the source element.
    pub fn lift(&self, m: &Value) -> Result<Value> {
        (self.lift)(m)
    }

    /// Replaces `ψ`; used to check that broken representations are caught.
    pub fn with_psi(mut self, psi: UnFn) -> Embedding {
        self.psi = psi;
        self
    }

    /// JSON text of a representation element.
    pub fn to_json_string(&self, p: &Value) -> Result<String> {
        serde_json::to_string(&self.rep.encode(p)?).map_err(|e| Error::Codec(e.to_string()))
    }

    pub fn from_json_str(&self, s: &str) -> Result<Value> {
        let j: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Codec(e.to_string()))?;
        self.rep.decode(&j)
    }
}

fn state_parts(m: &Monoid) -> Result<(StateSpace, Monoid)> {
    match m.kind() {
        MonoidKind::State(s, n) => Ok((s.clone(), n.clone())),
        _ => Err(precondition(format!("representation of {}", m.name()), "a state monoid target")),
    }
}

/// Tag for each atom of the source. Atoms sharing a tag must have
/// extensionally equal images.
#[derive(Clone, Debug, Default)]
pub struct TagTable {
    entries: Vec<(Value, Value)>,
    payload_shape: Option<Shape>,
}

impl TagTable {
    pub fn new() -> Self {
        TagTable::default()
    }

    pub fn with(mut self, atom: Value, tag: &str) -> Self {
        self.entries.push((atom, Value::sym(tag)));
        self
    }

    /// A tag that carries data captured by the closure. A table uses
    /// payload tags throughout or not at all, with one payload shape.
    pub fn with_payload(mut self, atom: Value, tag: &str, payload: Value, shape: Shape) -> Self {
        self.entries.push((atom, Value::pair(Value::sym(tag), payload)));
        self.payload_shape = Some(shape);
        self
    }

    pub fn tag_of(&self, atom: &Value) -> Option<&Value> {
        self.entries.iter().find(|(a, _)| a == atom).map(|(_, t)| t)
    }

    /// Distinct tags in first-seen order, each with a representative atom.
    fn tags(&self) -> Vec<(Value, Value)> {
        let mut out: Vec<(Value, Value)> = Vec::new();
        for (a, t) in &self.entries {
            if !out.iter().any(|(t2, _)| t2 == t) {
                out.push((t.clone(), a.clone()));
            }
        }
        out
    }
}

/// Tag words: `P = List[tags]`, `ψ(word)` chains the image of each tag's
/// representative atom.
pub fn defunctionalize(f: &Hom, table: &TagTable) -> Result<Embedding> {
    let (space, out) = state_parts(f.target())?;
    let src = f.source().clone();
    if !src.has_atoms() {
        return Err(precondition(format!("defunctionalization of {}", f.name()), "a generator presentation"));
    }
    if let Some(all) = src.atom_carrier().and_then(Carrier::enumeration) {
        if let Some(missing) = all.iter().find(|a| table.tag_of(a).is_none()) {
            return Err(Error::Rejected(format!("no tag for generator {missing}")));
        }
    }
    let of_atom = |a: &Value| src.of_atom(a).expect("atom of a presented monoid");
    let tags = table.tags();
    let mut images: BTreeMap<Value, Value> = BTreeMap::new();
    for (tag, rep_atom) in &tags {
        images.insert(tag.clone(), f.apply(&of_atom(rep_atom)));
    }
    for (a, t) in &table.entries {
        let img = f.apply(&of_atom(a));
        if let Some(w) = ext_counterexample(&space, &out, &img, &images[t], EQ_SAMPLES, 0) {
            return Err(Error::Rejected(format!("generators sharing tag {t} differ at state {w}")));
        }
    }
    let tag_shape = match &table.payload_shape {
        None => Shape::Sym,
        Some(_) if tags.iter().any(|(t, _)| matches!(t, Value::Sym(_))) => {
            return Err(Error::Rejected("tag table mixes plain and payload tags".into()))
        }
        Some(shape) => Shape::pair(Shape::Sym, shape.clone()),
    };
    let tag_carrier = Carrier::finite("Tag", tag_shape, tags.iter().map(|(t, _)| t.clone()).collect());
    let rep = list(tag_carrier);

    let image = f.target().clone();
    let (img1, imgs1) = (image.clone(), images.clone());
    let psi: UnFn = Arc::new(move |w| img1.mconcat(w.as_list().iter().map(|t| imgs1[t].clone()).collect()));
    let (img2, imgs2) = (image.clone(), images);
    let phi: PartialFn = Arc::new(move |alpha| {
        if img2.is_identity(alpha) {
            return Ok(Value::List(vec![]));
        }
        imgs2
            .iter()
            .find(|(_, g)| img2.eq(alpha, g))
            .map(|(t, _)| Value::List(vec![t.clone()]))
            .ok_or_else(|| Error::Rejected("φ is defined on generator images only".into()))
    });
    let (src2, table2) = (src.clone(), table.clone());
    let lift: PartialFn = Arc::new(move |m| {
        let atoms = src2.atoms(m).ok_or_else(|| Error::Rejected(format!("{m} has no atom decomposition")))?;
        atoms
            .iter()
            .map(|a| table2.tag_of(a).cloned().ok_or_else(|| Error::Rejected(format!("no tag for generator {a}"))))
            .collect::<Result<Vec<_>>>()
            .map(Value::List)
    });
    Ok(Embedding { name: format!("defunct({})", f.name()), image, rep, phi, psi, lift })
}

/// Runs `α` from every state, in enumeration order.
fn table_of(states: &[Value], alpha: &StateElement) -> Value {
    Value::List(
        states
            .iter()
            .map(|s| {
                let (s2, o) = alpha.run(s);
                Value::pair(s.clone(), Value::pair(s2, o))
            })
            .collect(),
    )
}

fn lookup<'a>(table: &'a Value, s: &Value) -> &'a Value {
    table
        .as_list()
        .iter()
        .find(|e| e.as_pair().0 == s)
        .map(|e| e.as_pair().1)
        .unwrap_or_else(|| panic!("state {s} missing from table"))
}

/// The monoid of tables `s ↦ (s', o)` over an enumerated state space.
/// The product chains both tables from each start state.
pub fn table_monoid(space: &StateSpace, out: &Monoid) -> Result<Monoid> {
    let states = space
        .enumeration()
        .ok_or_else(|| precondition(format!("tabulation over {}", space.name()), "a finite state enumeration"))?
        .to_vec();
    let identity = Value::List(states.iter().map(|s| Value::pair(s.clone(), Value::pair(s.clone(), out.identity()))).collect());
    let (o1, st1) = (out.clone(), states.clone());
    let product = Arc::new(move |x: &Value, y: &Value| {
        Value::List(
            st1.iter()
                .map(|s| {
                    let (s1, a) = lookup(x, s).as_pair();
                    let (s2, b) = lookup(y, s1).as_pair();
                    Value::pair(s.clone(), Value::pair(s2.clone(), o1.mul(a, b)))
                })
                .collect(),
        )
    });
    let (sp, o2, st2) = (space.clone(), out.clone(), states.clone());
    let sampler = Arc::new(move |rng: &mut sample::Rng| {
        Value::List(
            st2.iter()
                .map(|s| {
                    let all = sp.enumeration().unwrap();
                    let s2 = all[sample::below(rng, all.len())].clone();
                    Value::pair(s.clone(), Value::pair(s2, o2.sample(rng)))
                })
                .collect(),
        )
    });
    let o3 = out.clone();
    let shape = Shape::list(Shape::pair(space.shape().clone(), Shape::pair(space.shape().clone(), out.shape().clone())));
    Ok(Monoid::builder(format!("Tab[{}, {}]", space.name(), out.name()), shape, identity, product, sampler)
        .flags(Flags::default())
        .equal(Arc::new(move |x, y| {
            x.as_list().len() == y.as_list().len()
                && x.as_list().iter().zip(y.as_list()).all(|(a, b)| {
                    let ((s, t), (s2, t2)) = (a.as_pair(), b.as_pair());
                    let ((r, o), (r2, o2)) = (t.as_pair(), t2.as_pair());
                    s == s2 && r == r2 && o3.eq(o, o2)
                })
        }))
        .build())
}

/// Tables over every state: `φ(α) = (s ↦ α(s))`, `ψ(x) = s ↦ x(s)`.
pub fn tabulate(f: &Hom) -> Result<Embedding> {
    let (space, out) = state_parts(f.target())?;
    let rep = table_monoid(&space, &out)?;
    let states = space.enumeration().unwrap().to_vec();
    let st1 = states.clone();
    let phi: PartialFn = Arc::new(move |alpha| Ok(table_of(&st1, alpha.as_fun())));
    let o = out.clone();
    let psi: UnFn = Arc::new(move |x| {
        let x = x.clone();
        Value::Fun(StateElement::from_fn(&o, move |s| lookup(&x, s).clone().into_pair()))
    });
    let (f1, st2) = (f.clone(), states);
    let lift: PartialFn = Arc::new(move |m| Ok(table_of(&st2, f1.apply(m).as_fun())));
    Ok(Embedding { name: format!("tabulate({})", f.name()), image: f.target().clone(), rep, phi, psi, lift })
}

/// Lifts each chunk on the rayon pool and multiplies the results in chunk
/// order.
pub fn lift_chunks(e: &Embedding, chunks: &[Value]) -> Result<Value> {
    let parts = chunks.par_iter().map(|c| e.lift(c)).collect::<Result<Vec<_>>>()?;
    Ok(e.rep.mconcat(parts))
}

/// `State[{∗}, N] ≅ N`: `φ(α) = out(α(∗))`, `ψ(n) = ∗ ↦ (∗, n)`.
pub fn trivial_state_collapse(image: &Monoid) -> Result<Embedding> {
    let (space, out) = state_parts(image)?;
    if !space.is_singleton() {
        return Err(precondition(format!("state collapse of {}", image.name()), "a singleton state space"));
    }
    let star = space.enumeration().unwrap()[0].clone();
    let s1 = star.clone();
    let phi: PartialFn = Arc::new(move |alpha| Ok(alpha.as_fun().run(&s1).1));
    let o = out.clone();
    let psi: UnFn = Arc::new(move |n| {
        let n = n.clone();
        Value::Fun(StateElement::from_fn(&o, move |s| (s.clone(), n.clone())))
    });
    let lift: PartialFn = Arc::new(|_| Err(Error::Rejected("collapse has no source homomorphism".into())));
    Ok(Embedding { name: format!("collapse({})", image.name()), image: image.clone(), rep: out, phi, psi, lift })
}

/// Collapse of the image of `f`, with `f ; φ` available.
pub fn collapse_hom(f: &Hom) -> Result<Embedding> {
    let mut e = trivial_state_collapse(f.target())?;
    let (f1, phi) = (f.clone(), e.phi.clone());
    e.lift = Arc::new(move |m| phi(&f1.apply(m)));
    e.name = format!("collapse({})", f.name());
    Ok(e)
}

pub const LAW_ROUND_TRIP: &str = "ψ(φ(α)) = α";
pub const LAW_PHI_PRODUCT: &str = "φ preserves products";
pub const LAW_PSI_PRODUCT: &str = "ψ preserves products";
pub const LAW_PHI_GENERATOR: &str = "φ agrees with f ; φ on generators";
pub const LAW_CODEC: &str = "JSON round trip";

/// Checks the embedding on images of sampled elements of `f`'s source:
/// `ψ(φ(f(m))) ≡ f(m)`, `φ(f(m₁m₂)) = φ(f(m₁))·φ(f(m₂))`,
/// `ψ(p·q) ≡ ψ(p) ⊙ ψ(q)`, `φ` on atom images, and the JSON codec.
pub fn check_embedding(e: &Embedding, f: &Hom, budget: usize, seed: u64) -> LawReport {
    let mut rng = sample::rng(seed);
    let mut report = LawReport::new(e.name());
    let (src, img, rep) = (f.source(), e.image(), e.rep());
    for _ in 0..budget.max(1) {
        report.cases += 1;
        let (m1, m2) = (sample_mixed(src, &mut rng), sample_mixed(src, &mut rng));
        let (p1, p2, p12) = match (e.lift(&m1), e.lift(&m2), e.lift(&src.mul(&m1, &m2))) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (Err(err), ..) | (_, Err(err), _) | (.., Err(err)) => {
                report.record(LAW_ROUND_TRIP, serde_json::json!({ "input": m1.to_json_lossy(), "error": err.to_string() }));
                break;
            }
        };
        let alpha = f.apply(&m1);
        let back = e.psi(&p1);
        if !img.eq(&back, &alpha) {
            report.record(LAW_ROUND_TRIP, witness(&[("m", &m1), ("φ(f(m))", &p1)]));
        }
        let prod = rep.mul(&p1, &p2);
        if !rep.eq(&p12, &prod) {
            report.record(LAW_PHI_PRODUCT, witness(&[("a", &m1), ("b", &m2), ("φ(f(ab))", &p12), ("φ(f(a))·φ(f(b))", &prod)]));
        }
        let (q1, q2) = (rep.sample(&mut rng), rep.sample(&mut rng));
        if !img.eq(&e.psi(&rep.mul(&q1, &q2)), &img.mul(&e.psi(&q1), &e.psi(&q2))) {
            report.record(LAW_PSI_PRODUCT, witness(&[("p", &q1), ("q", &q2)]));
        }
        if let Some(atoms) = src.atoms(&m1) {
            if let Some(a) = atoms.first() {
                let g = src.of_atom(a).unwrap();
                let via_image = e.phi(&f.apply(&g));
                let direct = e.lift(&g);
                if via_image.as_ref().ok().zip(direct.as_ref().ok()).is_none_or(|(x, y)| !rep.eq(x, y)) {
                    report.record(LAW_PHI_GENERATOR, witness(&[("generator", &g)]));
                }
            }
        }
        match e.to_json_string(&p1).and_then(|s| e.from_json_str(&s).map(|v| (s, v))) {
            Ok((s, v)) if v == p1 && e.to_json_string(&v).is_ok_and(|s2| s2 == s) => {}
            _ => report.record(LAW_CODEC, witness(&[("element", &p1)])),
        }
    }
    report
}

/// Checks a collapse embedding on sampled elements of its image.
pub fn check_collapse(e: &Embedding, budget: usize, seed: u64) -> LawReport {
    let mut rng = sample::rng(seed);
    let mut report = LawReport::new(e.name());
    let (img, rep) = (e.image(), e.rep());
    for _ in 0..budget.max(1) {
        report.cases += 1;
        let (n1, n2) = (sample_mixed(rep, &mut rng), sample_mixed(rep, &mut rng));
        let (a, b) = (e.psi(&n1), e.psi(&n2));
        if e.phi(&a).ok().is_none_or(|x| !rep.eq(&x, &n1)) {
            report.record("φ(ψ(n)) = n", witness(&[("n", &n1)]));
        }
        if !img.eq(&e.psi(&e.phi(&a).unwrap()), &a) {
            report.record(LAW_ROUND_TRIP, witness(&[("n", &n1)]));
        }
        let ab = img.mul(&a, &b);
        if e.phi(&ab).ok().is_none_or(|x| !rep.eq(&x, &rep.mul(&n1, &n2))) {
            report.record(LAW_PHI_PRODUCT, witness(&[("a", &n1), ("b", &n2)]));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::adder::{adder_processor, adder_tag_table, encode_operands};
    use crate::processor::pure;
    use crate::algebra::monoid::Carrier;

    fn bp(a: i64, b: i64) -> Value {
        Value::pair(Value::Int(a), Value::Int(b))
    }

    #[test]
    fn adder_table_matches_worked_value() {
        let p = adder_processor();
        let e = tabulate(p.hom()).unwrap();
        let w = Value::List(vec![bp(0, 1), bp(0, 0), bp(1, 1)]);
        let want = Value::List(vec![
            Value::pair(Value::Int(0), Value::pair(Value::Int(1), Value::ints([1, 0, 0]))),
            Value::pair(Value::Int(1), Value::pair(Value::Int(1), Value::ints([0, 1, 0]))),
        ]);
        assert_eq!(e.lift(&w).unwrap(), want);
        assert_eq!(e.lift(&Value::List(vec![])).unwrap(), e.rep().identity());
    }

    #[test]
    fn adder_defunctionalizes_to_three_tags() {
        let p = adder_processor();
        let e = defunctionalize(p.hom(), &adder_tag_table()).unwrap();
        let w = Value::List(vec![bp(0, 1), bp(0, 0), bp(1, 1), bp(1, 0)]);
        let word = e.lift(&w).unwrap();
        assert_eq!(word, Value::List(["y", "x", "z", "y"].iter().map(|t| Value::sym(t)).collect()));
        assert_eq!(e.phi(&p.hom().apply(&Value::List(vec![bp(1, 1)]))).unwrap(), Value::List(vec![Value::sym("z")]));
        assert!(check_embedding(&e, p.hom(), 300, 4).passed());
    }

    #[test]
    fn swapped_tags_in_psi_are_caught() {
        let p = adder_processor();
        let e = defunctionalize(p.hom(), &adder_tag_table()).unwrap();
        let good = e.clone();
        let swap = |t: &Value| match t {
            Value::Sym(s) if &**s == "x" => Value::sym("z"),
            Value::Sym(s) if &**s == "z" => Value::sym("x"),
            t => t.clone(),
        };
        let broken = e.with_psi(Arc::new(move |w| good.psi(&Value::List(w.as_list().iter().map(swap).collect()))));
        let r = check_embedding(&broken, p.hom(), 300, 4);
        assert!(r.has_failure(LAW_ROUND_TRIP));
    }

    #[test]
    fn tags_with_different_images_are_rejected() {
        let p = adder_processor();
        let bad = TagTable::new().with(bp(0, 0), "x").with(bp(0, 1), "x").with(bp(1, 0), "y").with(bp(1, 1), "z");
        assert!(defunctionalize(p.hom(), &bad).is_err());
        let missing = TagTable::new().with(bp(0, 0), "x");
        assert!(defunctionalize(p.hom(), &missing).is_err());
    }

    #[test]
    fn chunked_tables_multiply_to_the_whole() {
        let p = adder_processor();
        let e = tabulate(p.hom()).unwrap();
        let w = encode_operands(0b1011_0110, 0b0111_0011, 8);
        let xs = w.as_list();
        let chunks: Vec<Value> = xs.chunks(3).map(|c| Value::List(c.to_vec())).collect();
        assert_eq!(lift_chunks(&e, &chunks).unwrap(), e.lift(&w).unwrap());
    }

    #[test]
    fn stateless_images_collapse_to_outputs() {
        let l = list(Carrier::int());
        let p = pure(&Hom::identity(&l));
        let e = collapse_hom(p.hom()).unwrap();
        assert_eq!(e.lift(&Value::ints([1, 2])).unwrap(), Value::ints([1, 2]));
        assert_eq!(e.phi(&p.state_monoid().identity()).unwrap(), Value::ints([]));
        assert!(check_collapse(&e, 200, 2).passed());
        assert!(trivial_state_collapse(adder_processor().state_monoid()).is_err());
    }
}
