//! Integral and derivative over a group; each undoes the other.

use crate::algebra::monoid::list;
use crate::algebra::Monoid;
use crate::error::{precondition, Result};
use crate::processor::Processor;
use crate::value::Value;

fn require_group(g: &Monoid) -> Result<()> {
    if g.flags().group && g.has_inverse() {
        Ok(())
    } else {
        Err(precondition(format!("integral/derivative over {}", g.name()), "a group"))
    }
}

/// `f([a]) = s ↦ (s·a, [s·a])` from `s = ε`.
pub fn integral(g: &Monoid) -> Result<Processor> {
    require_group(g)?;
    let l = list(g.carrier());
    let g1 = g.clone();
    Processor::on_atoms("integral", &l, &l, g.carrier(), g.identity(), Value::List(vec![]), move |a, s| {
        let t = g1.mul(s, a);
        (t.clone(), Value::List(vec![t]))
    })
}

/// `g([b]) = t ↦ (b, [t⁻¹·b])` from `t = ε`.
pub fn derivative(g: &Monoid) -> Result<Processor> {
    require_group(g)?;
    let l = list(g.carrier());
    let g1 = g.clone();
    Processor::on_atoms("derivative", &l, &l, g.carrier(), g.identity(), Value::List(vec![]), move |b, t| {
        let d = g1.mul(&g1.inverse(t).unwrap(), b);
        (b.clone(), Value::List(vec![d]))
    })
}
