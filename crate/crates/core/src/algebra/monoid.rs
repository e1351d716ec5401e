//! Monoids as runtime values, plus the carriers they are built over.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value as Json;

use crate::error::Error;
use crate::sample::{self, Rng};
use crate::value::{Shape, Value};

pub type SampleFn = Arc<dyn Fn(&mut Rng) -> Value + Send + Sync>;
pub type EqFn = Arc<dyn Fn(&Value, &Value) -> bool + Send + Sync>;
pub type BinFn = Arc<dyn Fn(&Value, &Value) -> Value + Send + Sync>;
pub type UnFn = Arc<dyn Fn(&Value) -> Value + Send + Sync>;
pub type ListFn = Arc<dyn Fn(&Value) -> Vec<Value> + Send + Sync>;
pub type ConcatFn = Arc<dyn Fn(Vec<Value>) -> Value + Send + Sync>;

/// A set of plain values: list alphabets, set universes and state spaces.
#[derive(Clone)]
pub struct Carrier {
    name: String,
    shape: Shape,
    sampler: SampleFn,
    equal: Option<EqFn>,
    enumeration: Option<Arc<Vec<Value>>>,
}

/// State spaces are carriers; the alias documents intent at use sites.
pub type StateSpace = Carrier;

impl Carrier {
    pub fn new(name: impl Into<String>, shape: Shape, sampler: SampleFn) -> Self {
        Carrier { name: name.into(), shape, sampler, equal: None, enumeration: None }
    }

    /// A finite carrier; sampling is uniform over `values`.
    pub fn finite(name: impl Into<String>, shape: Shape, values: Vec<Value>) -> Self {
        assert!(!values.is_empty(), "finite carrier needs at least one value");
        let values = Arc::new(values);
        let pick = values.clone();
        Carrier {
            name: name.into(),
            shape,
            sampler: Arc::new(move |rng| pick[sample::below(rng, pick.len())].clone()),
            equal: None,
            enumeration: Some(values),
        }
    }

    pub fn with_equal(mut self, eq: EqFn) -> Self {
        self.equal = Some(eq);
        self
    }

    pub fn unit() -> Self {
        Carrier::finite("{∗}", Shape::Unit, vec![Value::Unit])
    }

    pub fn ints(lo: i64, hi: i64) -> Self {
        Carrier::finite(format!("Int[{lo}..{hi}]"), Shape::Int, (lo..=hi).map(Value::Int).collect())
    }

    /// All integers; sampled from a small window.
    pub fn int() -> Self {
        Carrier::new("Int", Shape::Int, Arc::new(|rng| Value::Int(sample::small_int(rng, -9, 9))))
    }

    pub fn bits() -> Self {
        Carrier::finite("Bit", Shape::Int, vec![Value::Int(0), Value::Int(1)])
    }

    pub fn bool() -> Self {
        Carrier::finite("Bool", Shape::Bool, vec![Value::Bool(false), Value::Bool(true)])
    }

    pub fn syms(name: impl Into<String>, names: &[&str]) -> Self {
        Carrier::finite(name, Shape::Sym, names.iter().map(|s| Value::sym(s)).collect())
    }

    /// Directed edges (including self loops) on vertices `0..v`.
    pub fn edges(v: i64) -> Self {
        let all = (0..v)
            .flat_map(|a| (0..v).map(move |b| Value::pair(Value::Int(a), Value::Int(b))))
            .collect();
        Carrier::finite("Edge", Shape::pair(Shape::Int, Shape::Int), all)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn sample(&self, rng: &mut Rng) -> Value {
        (self.sampler)(rng)
    }

    pub fn eq(&self, a: &Value, b: &Value) -> bool {
        match &self.equal {
            Some(eq) => eq(a, b),
            None => a == b,
        }
    }

    pub fn has_structural_eq(&self) -> bool {
        self.equal.is_none()
    }

    pub fn enumeration(&self) -> Option<&[Value]> {
        self.enumeration.as_deref().map(|v| v.as_slice())
    }

    pub fn is_singleton(&self) -> bool {
        self.enumeration().is_some_and(|e| e.len() == 1)
    }

    pub fn product(&self, other: &Carrier) -> Carrier {
        let (sa, sb) = (self.sampler.clone(), other.sampler.clone());
        let (a, b) = (self.clone(), other.clone());
        let enumeration = match (self.enumeration(), other.enumeration()) {
            (Some(xs), Some(ys)) if xs.len().saturating_mul(ys.len()) <= 1 << 16 => Some(Arc::new(
                xs.iter()
                    .flat_map(|x| ys.iter().map(move |y| Value::pair(x.clone(), y.clone())))
                    .collect::<Vec<_>>(),
            )),
            _ => None,
        };
        let equal: Option<EqFn> = if a.has_structural_eq() && b.has_structural_eq() {
            None
        } else {
            Some(Arc::new(move |x, y| {
                let (x0, x1) = x.as_pair();
                let (y0, y1) = y.as_pair();
                a.eq(x0, y0) && b.eq(x1, y1)
            }))
        };
        Carrier {
            name: format!("({} × {})", self.name, other.name),
            shape: Shape::pair(self.shape.clone(), other.shape.clone()),
            sampler: Arc::new(move |rng| Value::pair(sa(rng), sb(rng))),
            equal,
            enumeration,
        }
    }
}

impl fmt::Debug for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Carrier({})", self.name)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub commutative: bool,
    pub idempotent: bool,
    pub left_cancellative: bool,
    pub group: bool,
}

/// Structural description, used where a construction needs to see inside.
#[derive(Clone)]
pub enum MonoidKind {
    List(Carrier),
    Set(Carrier),
    Bag(Carrier),
    IntAdd,
    BoolOr,
    Product(Monoid, Monoid),
    Tensor(Monoid, Monoid),
    Ticked(Monoid),
    State(StateSpace, Monoid),
    Other,
}

struct Inner {
    name: String,
    kind: MonoidKind,
    shape: Shape,
    identity: Value,
    product: BinFn,
    concat: Option<ConcatFn>,
    equal: Option<EqFn>,
    sampler: SampleFn,
    gen_sampler: Option<SampleFn>,
    factor: Option<ListFn>,
    atoms: Option<(ListFn, UnFn)>,
    normalize: Option<UnFn>,
    flags: Flags,
    inverse: Option<UnFn>,
}

#[derive(Clone)]
pub struct Monoid(Arc<Inner>);

impl fmt::Debug for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monoid({})", self.0.name)
    }
}

impl fmt::Display for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

pub struct MonoidBuilder(Inner);

impl MonoidBuilder {
    pub fn kind(mut self, kind: MonoidKind) -> Self {
        self.0.kind = kind;
        self
    }
    pub fn flags(mut self, flags: Flags) -> Self {
        self.0.flags = flags;
        self
    }
    pub fn equal(mut self, eq: EqFn) -> Self {
        self.0.equal = Some(eq);
        self
    }
    pub fn concat(mut self, c: ConcatFn) -> Self {
        self.0.concat = Some(c);
        self
    }
    pub fn generators(mut self, g: SampleFn) -> Self {
        self.0.gen_sampler = Some(g);
        self
    }
    /// Splits an element into generators whose product is the element.
    pub fn factor(mut self, f: ListFn) -> Self {
        self.0.factor = Some(f);
        self
    }
    /// Splits an element into atoms, where `of_atom` maps an atom to its generator.
    pub fn atoms(mut self, atoms: ListFn, of_atom: UnFn) -> Self {
        self.0.atoms = Some((atoms, of_atom));
        self
    }
    pub fn normalize(mut self, n: UnFn) -> Self {
        self.0.normalize = Some(n);
        self
    }
    pub fn inverse(mut self, inv: UnFn) -> Self {
        self.0.inverse = Some(inv);
        self
    }
    pub fn build(self) -> Monoid {
        Monoid(Arc::new(self.0))
    }
}

impl Monoid {
    pub fn builder(
        name: impl Into<String>,
        shape: Shape,
        identity: Value,
        product: BinFn,
        sampler: SampleFn,
    ) -> MonoidBuilder {
        MonoidBuilder(Inner {
            name: name.into(),
            kind: MonoidKind::Other,
            shape,
            identity,
            product,
            concat: None,
            equal: None,
            sampler,
            gen_sampler: None,
            factor: None,
            atoms: None,
            normalize: None,
            flags: Flags::default(),
            inverse: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }
    pub fn kind(&self) -> &MonoidKind {
        &self.0.kind
    }
    pub fn shape(&self) -> &Shape {
        &self.0.shape
    }
    pub fn flags(&self) -> Flags {
        self.0.flags
    }
    pub fn identity(&self) -> Value {
        self.0.identity.clone()
    }
    pub fn mul(&self, a: &Value, b: &Value) -> Value {
        (self.0.product)(a, b)
    }

    /// Product of a sequence, left to right.
    pub fn mconcat(&self, items: Vec<Value>) -> Value {
        if let Some(c) = &self.0.concat {
            return c(items);
        }
        let mut it = items.into_iter();
        match it.next() {
            None => self.identity(),
            Some(first) => it.fold(first, |acc, x| self.mul(&acc, &x)),
        }
    }

    pub fn eq(&self, a: &Value, b: &Value) -> bool {
        match &self.0.equal {
            Some(eq) => eq(a, b),
            None => a == b,
        }
    }

    pub fn is_identity(&self, a: &Value) -> bool {
        self.eq(a, &self.0.identity)
    }

    pub fn sample(&self, rng: &mut Rng) -> Value {
        (self.0.sampler)(rng)
    }

    pub fn sample_generator(&self, rng: &mut Rng) -> Value {
        match &self.0.gen_sampler {
            Some(g) => g(rng),
            None => self.sample(rng),
        }
    }

    pub fn factor(&self, a: &Value) -> Option<Vec<Value>> {
        self.0.factor.as_ref().map(|f| f(a))
    }

    pub fn has_atoms(&self) -> bool {
        self.0.atoms.is_some()
    }

    pub fn atoms(&self, a: &Value) -> Option<Vec<Value>> {
        self.0.atoms.as_ref().map(|(f, _)| f(a))
    }

    pub fn of_atom(&self, x: &Value) -> Option<Value> {
        self.0.atoms.as_ref().map(|(_, g)| g(x))
    }

    pub fn inverse(&self, a: &Value) -> Option<Value> {
        self.0.inverse.as_ref().map(|inv| inv(a))
    }

    pub fn has_inverse(&self) -> bool {
        self.0.inverse.is_some()
    }

    pub fn same(&self, other: &Monoid) -> bool {
        self.name() == other.name()
    }

    pub fn expect_same(&self, other: &Monoid) -> Result<(), Error> {
        if self.same(other) {
            Ok(())
        } else {
            Err(Error::MonoidMismatch { expected: self.name().into(), found: other.name().into() })
        }
    }

    pub fn encode(&self, v: &Value) -> Result<Json, Error> {
        self.0.shape.encode(v)
    }

    /// Decodes and brings the element into normal form.
    pub fn decode(&self, j: &Json) -> Result<Value, Error> {
        let raw = self.0.shape.decode(j)?;
        Ok(match &self.0.normalize {
            Some(n) => n(&raw),
            None => raw,
        })
    }

    /// The carrier a list, set or bag monoid is built over.
    pub fn atom_carrier(&self) -> Option<&Carrier> {
        match &self.0.kind {
            MonoidKind::List(c) | MonoidKind::Set(c) | MonoidKind::Bag(c) => Some(c),
            _ => None,
        }
    }

    /// This monoid viewed as a carrier of its elements (for `List[M]`).
    pub fn carrier(&self) -> Carrier {
        let m = self.clone();
        let mut c = Carrier::new(self.name(), self.shape().clone(), Arc::new(move |rng| m.sample(rng)));
        if self.0.equal.is_some() {
            let m = self.clone();
            c = c.with_equal(Arc::new(move |a, b| m.eq(a, b)));
        }
        c
    }
}

fn list_eq(carrier: &Carrier) -> Option<EqFn> {
    if carrier.has_structural_eq() {
        return None;
    }
    let c = carrier.clone();
    Some(Arc::new(move |a, b| {
        let (a, b) = (a.as_list(), b.as_list());
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| c.eq(x, y))
    }))
}

/// The free monoid of lists over `carrier`, under concatenation.
pub fn list(carrier: Carrier) -> Monoid {
    let c = carrier.clone();
    let sampler: SampleFn = Arc::new(move |rng| {
        let n = sample::word_len(rng);
        Value::List((0..n).map(|_| c.sample(rng)).collect())
    });
    let c = carrier.clone();
    let mut b = Monoid::builder(
        format!("List[{}]", carrier.name()),
        Shape::list(carrier.shape().clone()),
        Value::List(vec![]),
        Arc::new(|a, b| {
            let mut out = a.as_list().to_vec();
            out.extend_from_slice(b.as_list());
            Value::List(out)
        }),
        sampler,
    )
    .kind(MonoidKind::List(carrier.clone()))
    .flags(Flags { left_cancellative: true, ..Flags::default() })
    .concat(Arc::new(|items| {
        Value::List(items.into_iter().flat_map(|x| match x {
            Value::List(xs) => xs,
            other => panic!("expected a list, found {other}"),
        }).collect())
    }))
    .generators(Arc::new(move |rng| Value::List(vec![c.sample(rng)])))
    .factor(Arc::new(|a| a.as_list().iter().map(|x| Value::List(vec![x.clone()])).collect()))
    .atoms(Arc::new(|a| a.as_list().to_vec()), Arc::new(|x| Value::List(vec![x.clone()])));
    if let Some(eq) = list_eq(&carrier) {
        b = b.equal(eq);
    }
    b.build()
}

/// Finite subsets of `carrier` under union.
pub fn set(carrier: Carrier) -> Monoid {
    assert!(carrier.has_structural_eq(), "set elements need structural equality");
    let c = carrier.clone();
    let sampler: SampleFn = Arc::new(move |rng| {
        let n = sample::word_len(rng);
        Value::Set((0..n).map(|_| c.sample(rng)).collect())
    });
    let c = carrier.clone();
    Monoid::builder(
        format!("Set[{}]", carrier.name()),
        Shape::set(carrier.shape().clone()),
        Value::Set(BTreeSet::new()),
        Arc::new(|a, b| {
            let (a, b) = (a.as_set(), b.as_set());
            let (big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
            let mut out = big.clone();
            out.extend(small.iter().cloned());
            Value::Set(out)
        }),
        sampler,
    )
    .kind(MonoidKind::Set(carrier.clone()))
    .flags(Flags { commutative: true, idempotent: true, ..Flags::default() })
    .concat(Arc::new(|items| {
        let mut out = BTreeSet::new();
        for x in items {
            match x {
                Value::Set(xs) => out.extend(xs),
                other => panic!("expected a set, found {other}"),
            }
        }
        Value::Set(out)
    }))
    .generators(Arc::new(move |rng| Value::set([c.sample(rng)])))
    .factor(Arc::new(|a| a.as_set().iter().map(|x| Value::set([x.clone()])).collect()))
    .atoms(Arc::new(|a| a.as_set().iter().cloned().collect()), Arc::new(|x| Value::set([x.clone()])))
    .build()
}

pub fn bag_of(items: impl IntoIterator<Item = Value>) -> Value {
    let mut out = BTreeMap::new();
    for x in items {
        *out.entry(x).or_insert(0u64) += 1;
    }
    Value::Bag(out)
}

/// Finite multisets of `carrier` under multiset sum.
pub fn bag(carrier: Carrier) -> Monoid {
    assert!(carrier.has_structural_eq(), "bag elements need structural equality");
    let c = carrier.clone();
    let sampler: SampleFn = Arc::new(move |rng| {
        let n = sample::word_len(rng);
        bag_of((0..n).map(|_| c.sample(rng)))
    });
    let c = carrier.clone();
    Monoid::builder(
        format!("Bag[{}]", carrier.name()),
        Shape::Bag(Box::new(carrier.shape().clone())),
        Value::Bag(BTreeMap::new()),
        Arc::new(|a, b| {
            let mut out = a.as_bag().clone();
            for (x, n) in b.as_bag() {
                *out.entry(x.clone()).or_insert(0) += n;
            }
            Value::Bag(out)
        }),
        sampler,
    )
    .kind(MonoidKind::Bag(carrier.clone()))
    .flags(Flags { commutative: true, left_cancellative: true, ..Flags::default() })
    .generators(Arc::new(move |rng| bag_of([c.sample(rng)])))
    .factor(Arc::new(|a| {
        a.as_bag()
            .iter()
            .flat_map(|(x, n)| std::iter::repeat_n(bag_of([x.clone()]), *n as usize))
            .collect()
    }))
    .atoms(
        Arc::new(|a| {
            a.as_bag().iter().flat_map(|(x, n)| std::iter::repeat_n(x.clone(), *n as usize)).collect()
        }),
        Arc::new(|x| bag_of([x.clone()])),
    )
    .build()
}

/// The integers under addition.
pub fn int_add() -> Monoid {
    Monoid::builder(
        "Int",
        Shape::Int,
        Value::Int(0),
        Arc::new(|a, b| Value::Int(a.as_int() + b.as_int())),
        Arc::new(|rng| Value::Int(sample::small_int(rng, -9, 9))),
    )
    .kind(MonoidKind::IntAdd)
    .flags(Flags { commutative: true, left_cancellative: true, group: true, idempotent: false })
    .inverse(Arc::new(|a| Value::Int(-a.as_int())))
    .build()
}

/// The two-element join semilattice `({⊥,⊤}, ∨, ⊥)`.
pub fn bool_or() -> Monoid {
    Monoid::builder(
        "B",
        Shape::Bool,
        Value::Bool(false),
        Arc::new(|a, b| Value::Bool(a.as_bool() || b.as_bool())),
        Arc::new(|rng| Value::Bool(sample::coin(rng, 0.5))),
    )
    .kind(MonoidKind::BoolOr)
    .flags(Flags { commutative: true, idempotent: true, ..Flags::default() })
    .generators(Arc::new(|_| Value::Bool(true)))
    .factor(Arc::new(|a| if a.as_bool() { vec![Value::Bool(true)] } else { vec![] }))
    .build()
}

/// Componentwise product `M × N`.
pub fn product(m: &Monoid, n: &Monoid) -> Monoid {
    let (ma, na) = (m.clone(), n.clone());
    let (ms, ns) = (m.clone(), n.clone());
    let mut b = Monoid::builder(
        format!("({} × {})", m.name(), n.name()),
        Shape::pair(m.shape().clone(), n.shape().clone()),
        Value::pair(m.identity(), n.identity()),
        Arc::new(move |x, y| {
            let (x0, x1) = x.as_pair();
            let (y0, y1) = y.as_pair();
            Value::pair(ma.mul(x0, y0), na.mul(x1, y1))
        }),
        Arc::new(move |rng| Value::pair(ms.sample(rng), ns.sample(rng))),
    )
    .kind(MonoidKind::Product(m.clone(), n.clone()));
    let (fm, fn_) = (m.flags(), n.flags());
    b = b.flags(Flags {
        commutative: fm.commutative && fn_.commutative,
        idempotent: fm.idempotent && fn_.idempotent,
        left_cancellative: fm.left_cancellative && fn_.left_cancellative,
        group: fm.group && fn_.group,
    });
    if m.0.equal.is_some() || n.0.equal.is_some() {
        let (me, ne) = (m.clone(), n.clone());
        b = b.equal(Arc::new(move |x, y| {
            let (x0, x1) = x.as_pair();
            let (y0, y1) = y.as_pair();
            me.eq(x0, y0) && ne.eq(x1, y1)
        }));
    }
    let (mg, ng) = (m.clone(), n.clone());
    b = b.generators(Arc::new(move |rng| {
        if sample::coin(rng, 0.5) {
            Value::pair(mg.sample_generator(rng), ng.identity())
        } else {
            Value::pair(mg.identity(), ng.sample_generator(rng))
        }
    }));
    if m.0.factor.is_some() && n.0.factor.is_some() {
        let (mf, nf) = (m.clone(), n.clone());
        b = b.factor(Arc::new(move |x| {
            let (x0, x1) = x.as_pair();
            let mut out: Vec<Value> =
                mf.factor(x0).unwrap().into_iter().map(|g| Value::pair(g, nf.identity())).collect();
            out.extend(nf.factor(x1).unwrap().into_iter().map(|g| Value::pair(mf.identity(), g)));
            out
        }));
    }
    if m.0.normalize.is_some() || n.0.normalize.is_some() {
        let (mn, nn) = (m.0.normalize.clone(), n.0.normalize.clone());
        b = b.normalize(Arc::new(move |x| {
            let (x0, x1) = x.as_pair();
            let a = mn.as_ref().map_or_else(|| x0.clone(), |f| f(x0));
            let c = nn.as_ref().map_or_else(|| x1.clone(), |f| f(x1));
            Value::pair(a, c)
        }));
    }
    if m.0.concat.is_some() || n.0.concat.is_some() {
        let (mc, nc) = (m.clone(), n.clone());
        b = b.concat(Arc::new(move |items| {
            let (xs, ys): (Vec<Value>, Vec<Value>) = items.into_iter().map(Value::into_pair).unzip();
            Value::pair(mc.mconcat(xs), nc.mconcat(ys))
        }));
    }
    if m.has_inverse() && n.has_inverse() {
        let (mi, ni) = (m.clone(), n.clone());
        b = b.inverse(Arc::new(move |x| {
            let (x0, x1) = x.as_pair();
            Value::pair(mi.inverse(x0).unwrap(), ni.inverse(x1).unwrap())
        }));
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::rng;

    #[test]
    fn list_product_is_concatenation() {
        let l = list(Carrier::int());
        assert_eq!(l.mul(&Value::ints([1, 2]), &Value::ints([3])), Value::ints([1, 2, 3]));
        assert_eq!(l.mconcat(vec![Value::ints([1]), Value::ints([]), Value::ints([2, 3])]), Value::ints([1, 2, 3]));
        assert!(l.is_identity(&Value::ints([])));
    }

    #[test]
    fn set_union_and_flags() {
        let s = set(Carrier::ints(0, 5));
        let a = Value::set([Value::Int(1), Value::Int(2)]);
        let b = Value::set([Value::Int(2), Value::Int(3)]);
        assert_eq!(s.mul(&a, &b), Value::set([1, 2, 3].map(Value::Int)));
        assert!(s.flags().commutative && s.flags().idempotent);
    }

    #[test]
    fn bag_counts_add() {
        let b = bag(Carrier::ints(0, 3));
        let x = bag_of([Value::Int(1), Value::Int(1)]);
        let y = bag_of([Value::Int(1), Value::Int(2)]);
        assert_eq!(b.mul(&x, &y), bag_of([1, 1, 1, 2].map(Value::Int)));
        assert_eq!(b.factor(&x).unwrap().len(), 2);
    }

    #[test]
    fn product_factors_reassemble() {
        let p = product(&list(Carrier::bits()), &set(Carrier::ints(0, 3)));
        let mut r = rng(3);
        for _ in 0..100 {
            let x = p.sample(&mut r);
            let gens = p.factor(&x).unwrap();
            assert_eq!(p.mconcat(gens), x);
        }
    }

    #[test]
    fn decode_normalises_through_owning_monoid() {
        let s = set(Carrier::ints(0, 5));
        let v = s.decode(&serde_json::json!([3, 1, 3])).unwrap();
        assert_eq!(v, Value::set([1, 3].map(Value::Int)));
    }

    #[test]
    fn carrier_product_enumerates() {
        let c = Carrier::bits().product(&Carrier::bits());
        assert_eq!(c.enumeration().unwrap().len(), 4);
        assert_eq!(Carrier::edges(3).enumeration().unwrap().len(), 9);
    }
}
