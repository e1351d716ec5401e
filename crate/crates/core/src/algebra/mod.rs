//! Monoids, homomorphisms and the constructions built from them.

pub mod hom;
pub mod laws;
pub mod monoid;
pub mod tensor;
pub mod ticked;

pub use hom::Hom;
pub use laws::{check_homomorphism, check_monoid_laws, Counterexample, LawReport};
pub use monoid::{bag, bool_or, int_add, list, product, set, Carrier, Flags, Monoid, MonoidKind, StateSpace};
pub use tensor::{embed, tensor_product};
pub use ticked::ticked;
