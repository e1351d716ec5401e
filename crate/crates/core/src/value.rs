//! Dynamic element representation shared by every monoid in the crate.
//!
//! Monoids are runtime values, so their elements are too. A [`Value`] is a
//! plain tree of data, except for [`Value::Fun`] which holds a state-monoid
//! element. Structural equality on `Fun` is pointer identity; use the owning
//! monoid's `eq` for the extensional notion.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde_json::Value as Json;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::state::StateElement;

#[derive(Clone)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Sym(Arc<str>),
    List(Vec<Value>),
    Set(BTreeSet<Value>),
    /// Multiset; every stored count is positive.
    Bag(BTreeMap<Value, u64>),
    Pair(Box<(Value, Value)>),
    /// Alternating normal form of a free product with the tick monoid.
    Ticked(Vec<Segment>),
    Fun(StateElement),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Segment {
    Elem(Value),
    Tick,
}

impl Value {
    pub fn sym(s: &str) -> Value {
        Value::Sym(Arc::from(s))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new((a, b)))
    }

    pub fn ints<I: IntoIterator<Item = i64>>(xs: I) -> Value {
        Value::List(xs.into_iter().map(Value::Int).collect())
    }

    pub fn set<I: IntoIterator<Item = Value>>(xs: I) -> Value {
        Value::Set(xs.into_iter().collect())
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(n) => *n,
            other => panic!("expected an integer, found {other}"),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            other => panic!("expected a boolean, found {other}"),
        }
    }

    pub fn as_list(&self) -> &[Value] {
        match self {
            Value::List(xs) => xs,
            other => panic!("expected a list, found {other}"),
        }
    }

    pub fn as_set(&self) -> &BTreeSet<Value> {
        match self {
            Value::Set(xs) => xs,
            other => panic!("expected a set, found {other}"),
        }
    }

    pub fn as_bag(&self) -> &BTreeMap<Value, u64> {
        match self {
            Value::Bag(xs) => xs,
            other => panic!("expected a bag, found {other}"),
        }
    }

    pub fn as_pair(&self) -> (&Value, &Value) {
        match self {
            Value::Pair(p) => (&p.0, &p.1),
            other => panic!("expected a pair, found {other}"),
        }
    }

    pub fn into_pair(self) -> (Value, Value) {
        match self {
            Value::Pair(p) => *p,
            other => panic!("expected a pair, found {other}"),
        }
    }

    pub fn as_segments(&self) -> &[Segment] {
        match self {
            Value::Ticked(s) => s,
            other => panic!("expected a ticked element, found {other}"),
        }
    }

    pub fn as_fun(&self) -> &StateElement {
        match self {
            Value::Fun(f) => f,
            other => panic!("expected a state element, found {other}"),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Unit => 0,
            Value::Bool(_) => 1,
            Value::Int(_) => 2,
            Value::Sym(_) => 3,
            Value::List(_) => 4,
            Value::Set(_) => 5,
            Value::Bag(_) => 6,
            Value::Pair(_) => 7,
            Value::Ticked(_) => 8,
            Value::Fun(_) => 9,
        }
    }

    /// Self-describing JSON used for witnesses and diagnostics. Lossy for `Fun`.
    pub fn to_json_lossy(&self) -> Json {
        match self {
            Value::Unit => Json::Null,
            Value::Bool(b) => Json::Bool(*b),
            Value::Int(n) => Json::from(*n),
            Value::Sym(s) => Json::String(s.to_string()),
            Value::List(xs) => Json::Array(xs.iter().map(Value::to_json_lossy).collect()),
            Value::Set(xs) => {
                serde_json::json!({ "set": xs.iter().map(Value::to_json_lossy).collect::<Vec<_>>() })
            }
            Value::Bag(xs) => serde_json::json!({
                "bag": xs.iter().map(|(v, c)| serde_json::json!([v.to_json_lossy(), c])).collect::<Vec<_>>()
            }),
            Value::Pair(p) => Json::Array(vec![p.0.to_json_lossy(), p.1.to_json_lossy()]),
            Value::Ticked(segs) => Json::Array(
                segs.iter()
                    .map(|s| match s {
                        Segment::Elem(v) => v.to_json_lossy(),
                        Segment::Tick => Json::String("tick".into()),
                    })
                    .collect(),
            ),
            Value::Fun(_) => Json::String("<state fn>".into()),
        }
    }

    /// Hex SHA-256 prefix of the lossy JSON rendering; stable across runs.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&self.to_json_lossy()).expect("json");
        let hash = Sha256::digest(&bytes);
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        use Value::*;
        match (self, other) {
            (Unit, Unit) => Ordering::Equal,
            (Bool(a), Bool(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Sym(a), Sym(b)) => a.cmp(b),
            (List(a), List(b)) => a.cmp(b),
            (Set(a), Set(b)) => a.cmp(b),
            (Bag(a), Bag(b)) => a.cmp(b),
            (Pair(a), Pair(b)) => a.cmp(b),
            (Ticked(a), Ticked(b)) => a.cmp(b),
            (Fun(a), Fun(b)) => a.addr().cmp(&b.addr()),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<'a, I: Iterator<Item = &'a Value>>(f: &mut fmt::Formatter<'_>, xs: I) -> fmt::Result {
            for (i, x) in xs.enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        }
        match self {
            Value::Unit => write!(f, "*"),
            Value::Bool(b) => write!(f, "{}", if *b { "⊤" } else { "⊥" }),
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::List(xs) => {
                write!(f, "[")?;
                join(f, xs.iter())?;
                write!(f, "]")
            }
            Value::Set(xs) => {
                write!(f, "{{")?;
                join(f, xs.iter())?;
                write!(f, "}}")
            }
            Value::Bag(xs) => {
                write!(f, "{{|")?;
                for (i, (v, c)) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    if *c == 1 {
                        write!(f, "{v}")?;
                    } else {
                        write!(f, "{v}^{c}")?;
                    }
                }
                write!(f, "|}}")
            }
            Value::Pair(p) => write!(f, "({}, {})", p.0, p.1),
            Value::Ticked(segs) => {
                if segs.is_empty() {
                    return write!(f, "ε");
                }
                for (i, s) in segs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    match s {
                        Segment::Elem(v) => write!(f, "{v}")?,
                        Segment::Tick => write!(f, "⊤")?,
                    }
                }
                Ok(())
            }
            Value::Fun(_) => write!(f, "<state fn>"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Elem(v) => write!(f, "{v}"),
            Segment::Tick => write!(f, "⊤"),
        }
    }
}

/// Carrier shape, used to encode and decode elements as plain JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Unit,
    Bool,
    Int,
    Sym,
    List(Box<Shape>),
    Set(Box<Shape>),
    /// Encoded as a list of `[element, count]` pairs.
    Bag(Box<Shape>),
    Pair(Box<Shape>, Box<Shape>),
    /// Encoded as a list whose entries are elements or the string `"tick"`.
    Ticked(Box<Shape>),
    Fun,
}

impl Shape {
    pub fn list(s: Shape) -> Shape {
        Shape::List(Box::new(s))
    }
    pub fn set(s: Shape) -> Shape {
        Shape::Set(Box::new(s))
    }
    pub fn pair(a: Shape, b: Shape) -> Shape {
        Shape::Pair(Box::new(a), Box::new(b))
    }

    pub fn encode(&self, v: &Value) -> Result<Json, Error> {
        let bad = || Error::Codec(format!("value {v} does not have shape {self:?}"));
        Ok(match (self, v) {
            (Shape::Unit, Value::Unit) => Json::Null,
            (Shape::Bool, Value::Bool(b)) => Json::Bool(*b),
            (Shape::Int, Value::Int(n)) => Json::from(*n),
            (Shape::Sym, Value::Sym(s)) => Json::String(s.to_string()),
            (Shape::List(e), Value::List(xs)) => {
                Json::Array(xs.iter().map(|x| e.encode(x)).collect::<Result<_, _>>()?)
            }
            (Shape::Set(e), Value::Set(xs)) => {
                Json::Array(xs.iter().map(|x| e.encode(x)).collect::<Result<_, _>>()?)
            }
            (Shape::Bag(e), Value::Bag(xs)) => Json::Array(
                xs.iter()
                    .map(|(x, c)| Ok(Json::Array(vec![e.encode(x)?, Json::from(*c)])))
                    .collect::<Result<_, Error>>()?,
            ),
            (Shape::Pair(a, b), Value::Pair(p)) => Json::Array(vec![a.encode(&p.0)?, b.encode(&p.1)?]),
            (Shape::Ticked(e), Value::Ticked(segs)) => Json::Array(
                segs.iter()
                    .map(|s| match s {
                        Segment::Elem(x) => e.encode(x),
                        Segment::Tick => Ok(Json::String("tick".into())),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            _ => return Err(bad()),
        })
    }

    /// Decodes without normalising; callers pass the result through the
    /// owning monoid (see `Monoid::decode`).
    pub fn decode(&self, j: &Json) -> Result<Value, Error> {
        let bad = || Error::Codec(format!("json {j} does not have shape {self:?}"));
        Ok(match self {
            Shape::Unit => match j {
                Json::Null => Value::Unit,
                _ => return Err(bad()),
            },
            Shape::Bool => Value::Bool(j.as_bool().ok_or_else(bad)?),
            Shape::Int => Value::Int(j.as_i64().ok_or_else(bad)?),
            Shape::Sym => Value::sym(j.as_str().ok_or_else(bad)?),
            Shape::List(e) => Value::List(
                j.as_array().ok_or_else(bad)?.iter().map(|x| e.decode(x)).collect::<Result<_, _>>()?,
            ),
            Shape::Set(e) => Value::Set(
                j.as_array().ok_or_else(bad)?.iter().map(|x| e.decode(x)).collect::<Result<_, _>>()?,
            ),
            Shape::Bag(e) => {
                let mut out = BTreeMap::new();
                for entry in j.as_array().ok_or_else(bad)? {
                    let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
                    let count = pair[1].as_u64().ok_or_else(bad)?;
                    if count > 0 {
                        *out.entry(e.decode(&pair[0])?).or_insert(0) += count;
                    }
                }
                Value::Bag(out)
            }
            Shape::Pair(a, b) => {
                let pair = j.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
                Value::pair(a.decode(&pair[0])?, b.decode(&pair[1])?)
            }
            Shape::Ticked(e) => Value::Ticked(
                j.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|x| match x {
                        Json::String(s) if s == "tick" => Ok(Segment::Tick),
                        other => e.decode(other).map(Segment::Elem),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            Shape::Fun => return Err(Error::Codec("state functions have no JSON encoding".into())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_by_variant_then_content() {
        assert!(Value::Int(5) < Value::sym("a"));
        assert!(Value::ints([1, 2]) < Value::ints([1, 3]));
        assert!(Value::Unit < Value::Bool(false));
    }

    #[test]
    fn codec_round_trips_nested_shapes() {
        let shape = Shape::Ticked(Box::new(Shape::list(Shape::pair(Shape::Int, Shape::Sym))));
        let v = Value::Ticked(vec![
            Segment::Elem(Value::List(vec![Value::pair(Value::Int(0), Value::sym("a"))])),
            Segment::Tick,
        ]);
        let j = shape.encode(&v).unwrap();
        assert_eq!(j.to_string(), r#"[[[0,"a"]],"tick"]"#);
        assert_eq!(shape.decode(&j).unwrap(), v);
    }

    #[test]
    fn codec_rejects_mismatched_json() {
        assert!(Shape::Int.decode(&serde_json::json!("x")).is_err());
        assert!(Shape::pair(Shape::Int, Shape::Int).decode(&serde_json::json!([1])).is_err());
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(Value::ints([1, 2, 3]).digest(), Value::ints([1, 2, 3]).digest());
        assert_ne!(Value::ints([1, 2, 3]).digest(), Value::ints([3, 2, 1]).digest());
        assert_eq!(Value::ints([]).digest().len(), 16);
    }
}
