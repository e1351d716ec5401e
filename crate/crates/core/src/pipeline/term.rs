//! Dataflow terms and their JSON form.

use std::fmt;

use serde_json::{json, Value as Json};

use crate::error::{Error, Result};

/// A homomorphism named in a registry or built from named pieces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HomExpr {
    Named(String),
    /// `id` on the named monoid.
    Id(String),
    /// `f ; g`.
    Compose(Box<HomExpr>, Box<HomExpr>),
    /// `f × g`.
    Prod(Box<HomExpr>, Box<HomExpr>),
    /// Elementwise `f` on lists of elements.
    Map(Box<HomExpr>),
    /// `g_*` over the state space of a processor.
    Push(Box<HomExpr>, Box<ProcExpr>),
    /// The homomorphism `M → State[S, N]` of a processor.
    HomOf(Box<ProcExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProcExpr {
    Named(String),
    /// `(S, f;g, s_ε, o_ε)`.
    Fused(Box<HomExpr>, Box<ProcExpr>),
    /// `eval σ`, or `eval_{g_*} σ` when a pushed homomorphism is given.
    Eval(Box<ProcExpr>, Option<Box<HomExpr>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Pure(HomExpr),
    Stateful(ProcExpr),
    Eval(ProcExpr, Option<HomExpr>),
    Seq(Vec<Term>),
    Par(Box<Term>, Box<Term>),
    Loop(Box<Term>),
    Split(String),
    Merge(String),
}

impl HomExpr {
    pub fn named(s: &str) -> HomExpr {
        HomExpr::Named(s.into())
    }
    pub fn compose(f: HomExpr, g: HomExpr) -> HomExpr {
        HomExpr::Compose(Box::new(f), Box::new(g))
    }
    pub fn prod(f: HomExpr, g: HomExpr) -> HomExpr {
        HomExpr::Prod(Box::new(f), Box::new(g))
    }
    pub fn map(f: HomExpr) -> HomExpr {
        HomExpr::Map(Box::new(f))
    }
    pub fn push(g: HomExpr, over: ProcExpr) -> HomExpr {
        HomExpr::Push(Box::new(g), Box::new(over))
    }
    pub fn hom_of(p: ProcExpr) -> HomExpr {
        HomExpr::HomOf(Box::new(p))
    }

    pub fn to_json(&self) -> Json {
        match self {
            HomExpr::Named(s) => json!(s),
            HomExpr::Id(m) => json!({ "id": m }),
            HomExpr::Compose(f, g) => json!({ "compose": [f.to_json(), g.to_json()] }),
            HomExpr::Prod(f, g) => json!({ "prod": [f.to_json(), g.to_json()] }),
            HomExpr::Map(f) => json!({ "map": f.to_json() }),
            HomExpr::Push(g, p) => json!({ "push": g.to_json(), "over": p.to_json() }),
            HomExpr::HomOf(p) => json!({ "hom_of": p.to_json() }),
        }
    }

    pub fn from_json(j: &Json) -> Result<HomExpr> {
        if let Some(s) = j.as_str() {
            return Ok(HomExpr::Named(s.into()));
        }
        let o = j.as_object().ok_or_else(|| codec("hom expression", j))?;
        let two = |k: &str| -> Result<(HomExpr, HomExpr)> {
            match o[k].as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok((HomExpr::from_json(a)?, HomExpr::from_json(b)?)),
                _ => Err(codec(k, j)),
            }
        };
        if let Some(m) = o.get("id") {
            Ok(HomExpr::Id(m.as_str().ok_or_else(|| codec("id", j))?.into()))
        } else if o.contains_key("compose") {
            let (f, g) = two("compose")?;
            Ok(HomExpr::compose(f, g))
        } else if o.contains_key("prod") {
            let (f, g) = two("prod")?;
            Ok(HomExpr::prod(f, g))
        } else if let Some(f) = o.get("map") {
            Ok(HomExpr::map(HomExpr::from_json(f)?))
        } else if let (Some(g), Some(p)) = (o.get("push"), o.get("over")) {
            Ok(HomExpr::push(HomExpr::from_json(g)?, ProcExpr::from_json(p)?))
        } else if let Some(p) = o.get("hom_of") {
            Ok(HomExpr::hom_of(ProcExpr::from_json(p)?))
        } else {
            Err(codec("hom expression", j))
        }
    }
}

impl ProcExpr {
    pub fn named(s: &str) -> ProcExpr {
        ProcExpr::Named(s.into())
    }
    pub fn fused(f: HomExpr, p: ProcExpr) -> ProcExpr {
        ProcExpr::Fused(Box::new(f), Box::new(p))
    }
    pub fn eval(p: ProcExpr, pushed: Option<HomExpr>) -> ProcExpr {
        ProcExpr::Eval(Box::new(p), pushed.map(Box::new))
    }

    pub fn to_json(&self) -> Json {
        match self {
            ProcExpr::Named(s) => json!(s),
            ProcExpr::Fused(f, p) => json!({ "fused": [f.to_json(), p.to_json()] }),
            ProcExpr::Eval(p, g) => json!({ "eval": p.to_json(), "pushed": g.as_ref().map(|g| g.to_json()) }),
        }
    }

    pub fn from_json(j: &Json) -> Result<ProcExpr> {
        if let Some(s) = j.as_str() {
            return Ok(ProcExpr::Named(s.into()));
        }
        let o = j.as_object().ok_or_else(|| codec("processor expression", j))?;
        if let Some(arr) = o.get("fused") {
            match arr.as_array().map(Vec::as_slice) {
                Some([f, p]) => Ok(ProcExpr::fused(HomExpr::from_json(f)?, ProcExpr::from_json(p)?)),
                _ => Err(codec("fused", j)),
            }
        } else if let Some(p) = o.get("eval") {
            let g = match o.get("pushed") {
                None | Some(Json::Null) => None,
                Some(g) => Some(HomExpr::from_json(g)?),
            };
            Ok(ProcExpr::eval(ProcExpr::from_json(p)?, g))
        } else {
            Err(codec("processor expression", j))
        }
    }
}

fn codec(what: &str, j: &Json) -> Error {
    Error::Codec(format!("bad {what}: {j}"))
}

impl Term {
    pub fn pure(h: &str) -> Term {
        Term::Pure(HomExpr::named(h))
    }
    pub fn stateful(p: &str) -> Term {
        Term::Stateful(ProcExpr::named(p))
    }
    pub fn eval(p: &str) -> Term {
        Term::Eval(ProcExpr::named(p), None)
    }
    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Box::new(a), Box::new(b))
    }
    pub fn loop_(t: Term) -> Term {
        Term::Loop(Box::new(t))
    }

    /// Builds a sequence, flattening nested sequences and unwrapping a
    /// single element.
    pub fn seq(items: Vec<Term>) -> Term {
        let mut flat = Vec::new();
        for t in items {
            match t {
                Term::Seq(inner) => flat.extend(inner),
                t => flat.push(t),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Term::Seq(flat)
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Term::Pure(_) => "pure",
            Term::Stateful(_) => "stateful",
            Term::Eval(..) => "eval",
            Term::Seq(_) => "seq",
            Term::Par(..) => "par",
            Term::Loop(_) => "loop",
            Term::Split(_) => "split",
            Term::Merge(_) => "merge",
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Seq(ts) => ts.iter().collect(),
            Term::Par(a, b) => vec![a, b],
            Term::Loop(t) => vec![t],
            _ => vec![],
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Term> {
        match self {
            Term::Seq(ts) => ts.iter_mut().collect(),
            Term::Par(a, b) => vec![a, b],
            Term::Loop(t) => vec![t],
            _ => vec![],
        }
    }

    pub fn at(&self, path: &[usize]) -> Result<&Term> {
        let mut t = self;
        for &i in path {
            t = *t.children().get(i).ok_or_else(|| Error::InvalidPath(path.to_vec()))?;
        }
        Ok(t)
    }

    /// Replaces the subterm at `path`, renormalising sequences on the way up.
    pub fn replace(&self, path: &[usize], new: Term) -> Result<Term> {
        fn go(t: &mut Term, path: &[usize], full: &[usize], new: Term) -> Result<()> {
            match path.split_first() {
                None => {
                    *t = new;
                    Ok(())
                }
                Some((&i, rest)) => {
                    let mut kids = t.children_mut();
                    if i >= kids.len() {
                        return Err(Error::InvalidPath(full.to_vec()));
                    }
                    go(kids.swap_remove(i), rest, full, new)
                }
            }
        }
        let mut t = self.clone();
        go(&mut t, path, path, new)?;
        Ok(t.normalized())
    }

    /// Flattens nested sequences everywhere.
    pub fn normalized(self) -> Term {
        match self {
            Term::Seq(ts) => Term::seq(ts.into_iter().map(Term::normalized).collect()),
            Term::Par(a, b) => Term::par(a.normalized(), b.normalized()),
            Term::Loop(t) => Term::loop_(t.normalized()),
            t => t,
        }
    }

    /// Every path in pre-order.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for (i, c) in self.children().into_iter().enumerate() {
            for mut p in c.paths() {
                p.insert(0, i);
                out.push(p);
            }
        }
        out
    }

    /// Boxes in the diagram: every node except sequence nodes.
    pub fn cost(&self) -> usize {
        let own = usize::from(!matches!(self, Term::Seq(_)));
        own + self.children().iter().map(|c| c.cost()).sum::<usize>()
    }

    fn refs(&self) -> Vec<Json> {
        match self {
            Term::Pure(h) => vec![h.to_json()],
            Term::Stateful(p) => vec![p.to_json()],
            Term::Eval(p, g) => {
                let mut v = vec![p.to_json()];
                v.extend(g.iter().map(HomExpr::to_json));
                v
            }
            Term::Split(s) | Term::Merge(s) => vec![json!(s)],
            _ => vec![],
        }
    }

    /// JSON without monoid annotations; see `Registry::annotate` for the
    /// annotated form.
    pub fn to_json(&self) -> Json {
        json!({
            "kind": self.kind(),
            "children": self.children().iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "refs": self.refs(),
        })
    }

    /// Parses the JSON tree. Monoid annotations, if present, are ignored
    /// here and checked by `Registry::check_annotations`.
    pub fn from_json(j: &Json) -> Result<Term> {
        let kind = j["kind"].as_str().ok_or_else(|| codec("term kind", j))?;
        let empty = vec![];
        let kids = j.get("children").and_then(Json::as_array).unwrap_or(&empty);
        let refs = j.get("refs").and_then(Json::as_array).unwrap_or(&empty);
        let children = kids.iter().map(Term::from_json).collect::<Result<Vec<_>>>()?;
        let name_ref = || refs.first().and_then(Json::as_str).map(String::from).ok_or_else(|| codec(kind, j));
        let t = match (kind, children.len(), refs.len()) {
            ("pure", 0, 1) => Term::Pure(HomExpr::from_json(&refs[0])?),
            ("stateful", 0, 1) => Term::Stateful(ProcExpr::from_json(&refs[0])?),
            ("eval", 0, 1) => Term::Eval(ProcExpr::from_json(&refs[0])?, None),
            ("eval", 0, 2) => Term::Eval(ProcExpr::from_json(&refs[0])?, Some(HomExpr::from_json(&refs[1])?)),
            ("seq", n, 0) if n >= 1 => Term::seq(children),
            ("par", 2, 0) => {
                let mut it = children.into_iter();
                Term::par(it.next().unwrap(), it.next().unwrap())
            }
            ("loop", 1, 0) => Term::loop_(children.into_iter().next().unwrap()),
            ("split", 0, 1) => Term::Split(name_ref()?),
            ("merge", 0, 1) => Term::Merge(name_ref()?),
            _ => return Err(codec("term", j)),
        };
        Ok(t)
    }
}

impl fmt::Display for HomExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomExpr::Named(s) => write!(f, "{s}"),
            HomExpr::Id(m) => write!(f, "id[{m}]"),
            HomExpr::Compose(a, b) => write!(f, "({a};{b})"),
            HomExpr::Prod(a, b) => write!(f, "({a}×{b})"),
            HomExpr::Map(a) => write!(f, "map({a})"),
            HomExpr::Push(g, p) => write!(f, "{g}_*[{p}]"),
            HomExpr::HomOf(p) => write!(f, "f_{p}"),
        }
    }
}

impl fmt::Display for ProcExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcExpr::Named(s) => write!(f, "{s}"),
            ProcExpr::Fused(h, p) => write!(f, "fuse({h}, {p})"),
            ProcExpr::Eval(p, None) => write!(f, "eval {p}"),
            ProcExpr::Eval(p, Some(g)) => write!(f, "eval[{g}_*] {p}"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Pure(h) => write!(f, "pure {h}"),
            Term::Stateful(p) => write!(f, "{p}"),
            Term::Eval(p, None) => write!(f, "eval {p}"),
            Term::Eval(p, Some(g)) => write!(f, "eval[{g}_*] {p}"),
            Term::Seq(ts) => {
                write!(f, "(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ; ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Term::Par(a, b) => write!(f, "({a} × {b})"),
            Term::Loop(t) => write!(f, "loop {t}"),
            Term::Split(s) => write!(f, "split {s}"),
            Term::Merge(m) => write!(f, "merge[{m}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let p = ProcExpr::named("pairs");
        let t = Term::seq(vec![
            Term::Pure(HomExpr::compose(HomExpr::hom_of(p.clone()), HomExpr::push(HomExpr::named("filter"), p.clone()))),
            Term::Eval(p, Some(HomExpr::named("filter"))),
            Term::par(Term::Split("parity".into()), Term::loop_(Term::pure("f"))),
            Term::Merge("M".into()),
        ]);
        assert_eq!(Term::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn replace_flattens_sequences() {
        let t = Term::seq(vec![Term::pure("a"), Term::stateful("b")]);
        let t2 = t.replace(&[1], Term::seq(vec![Term::pure("c"), Term::eval("b")])).unwrap();
        assert_eq!(t2, Term::Seq(vec![Term::pure("a"), Term::pure("c"), Term::eval("b")]));
        assert_eq!(t.replace(&[5], Term::pure("x")), Err(Error::InvalidPath(vec![5])));
        assert_eq!(t2.cost(), 3);
    }
}
