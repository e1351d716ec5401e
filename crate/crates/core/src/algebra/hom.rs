//! Monoid homomorphisms as runtime values.

use std::fmt;
use std::sync::Arc;

use crate::algebra::monoid::{self, Monoid, MonoidKind, UnFn};
use crate::error::{precondition, Result};
use crate::value::Value;

/// A function between monoids that is claimed to preserve products and
/// identity. The claim is checked by `laws::check_homomorphism`, not here.
#[derive(Clone)]
pub struct Hom {
    name: String,
    source: Monoid,
    target: Monoid,
    apply: UnFn,
}

impl fmt::Debug for Hom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hom({}: {} → {})", self.name, self.source, self.target)
    }
}

impl Hom {
    pub fn new(name: impl Into<String>, source: Monoid, target: Monoid, apply: UnFn) -> Hom {
        Hom { name: name.into(), source, target, apply }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn source(&self) -> &Monoid {
        &self.source
    }
    pub fn target(&self) -> &Monoid {
        &self.target
    }
    pub fn apply(&self, x: &Value) -> Value {
        (self.apply)(x)
    }
    pub fn func(&self) -> UnFn {
        self.apply.clone()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Hom {
        self.name = name.into();
        self
    }

    pub fn identity(m: &Monoid) -> Hom {
        Hom::new(format!("id[{}]", m.name()), m.clone(), m.clone(), Arc::new(|x| x.clone()))
    }

    /// Defined on atoms of a generator-presented source and extended by
    /// multiplying the images in order.
    pub fn from_atoms(
        name: impl Into<String>,
        source: Monoid,
        target: Monoid,
        on_atom: impl Fn(&Value) -> Value + Send + Sync + 'static,
    ) -> Result<Hom> {
        if !source.has_atoms() {
            return Err(precondition(format!("generator table on {}", source.name()), "a generator presentation"));
        }
        let (s, t) = (source.clone(), target.clone());
        Ok(Hom::new(
            name,
            source,
            target,
            Arc::new(move |x| t.mconcat(s.atoms(x).unwrap().iter().map(&on_atom).collect())),
        ))
    }

    /// `f ; g`.
    pub fn compose(f: &Hom, g: &Hom) -> Result<Hom> {
        f.target.expect_same(&g.source)?;
        let (fa, ga) = (f.apply.clone(), g.apply.clone());
        Ok(Hom::new(
            format!("{};{}", f.name, g.name),
            f.source.clone(),
            g.target.clone(),
            Arc::new(move |x| ga(&fa(x))),
        ))
    }

    /// `f × g` on direct products.
    pub fn product(f: &Hom, g: &Hom) -> Hom {
        let (fa, ga) = (f.apply.clone(), g.apply.clone());
        Hom::new(
            format!("({}×{})", f.name, g.name),
            monoid::product(&f.source, &g.source),
            monoid::product(&f.target, &g.target),
            Arc::new(move |x| {
                let (a, b) = x.as_pair();
                Value::pair(fa(a), ga(b))
            }),
        )
    }

    /// Elementwise map `List[A] → List[B]`; a homomorphism for any `f`.
    pub fn map_list(f: &Hom) -> Hom {
        let fa = f.apply.clone();
        Hom::new(
            format!("map({})", f.name),
            monoid::list(f.source.carrier()),
            monoid::list(f.target.carrier()),
            Arc::new(move |x| Value::List(x.as_list().iter().map(|v| fa(v)).collect())),
        )
    }

    /// `merge: M × M → M`, a homomorphism exactly when `M` is commutative.
    pub fn merge(m: &Monoid) -> Result<Hom> {
        if !m.flags().commutative {
            return Err(precondition(format!("merge on {}", m.name()), "a commutative monoid"));
        }
        let mm = m.clone();
        Ok(Hom::new(
            format!("merge[{}]", m.name()),
            monoid::product(m, m),
            m.clone(),
            Arc::new(move |x| {
                let (a, b) = x.as_pair();
                mm.mul(a, b)
            }),
        ))
    }

    /// Concatenation `List[List[X]] → List[X]`.
    pub fn flatten(inner: &Monoid) -> Result<Hom> {
        if !matches!(inner.kind(), MonoidKind::List(_)) {
            return Err(precondition("flatten", "a list of lists"));
        }
        let m = inner.clone();
        Ok(Hom::new(
            format!("flatten[{}]", inner.name()),
            monoid::list(inner.carrier()),
            inner.clone(),
            Arc::new(move |x| m.mconcat(x.as_list().to_vec())),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::monoid::{int_add, list, set, Carrier};

    #[test]
    fn compose_checks_monoid_names() {
        let z = int_add();
        let l = list(Carrier::int());
        assert!(Hom::compose(&Hom::identity(&z), &Hom::identity(&l)).is_err());
        assert!(Hom::compose(&Hom::identity(&z), &Hom::identity(&z)).is_ok());
    }

    #[test]
    fn merge_requires_commutativity() {
        assert!(Hom::merge(&list(Carrier::int())).is_err());
        let m = Hom::merge(&set(Carrier::ints(0, 3))).unwrap();
        let x = Value::pair(Value::set([Value::Int(1)]), Value::set([Value::Int(2)]));
        assert_eq!(m.apply(&x), Value::set([Value::Int(1), Value::Int(2)]));
    }

    #[test]
    fn from_atoms_sums_images() {
        let l = list(Carrier::int());
        let sum = Hom::from_atoms("sum", l, int_add(), |a| a.clone()).unwrap();
        assert_eq!(sum.apply(&Value::ints([1, 2, 3])), Value::Int(6));
        assert_eq!(sum.apply(&Value::ints([])), Value::Int(0));
    }

    #[test]
    fn flatten_concatenates() {
        let l = list(Carrier::int());
        let f = Hom::flatten(&l).unwrap();
        let x = Value::List(vec![Value::ints([1]), Value::ints([]), Value::ints([2, 3])]);
        assert_eq!(f.apply(&x), Value::ints([1, 2, 3]));
    }
}
