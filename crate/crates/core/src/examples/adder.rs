//! Serial full adder. Input is a list of bit pairs, least significant first;
//! the state is the carry.

use crate::algebra::monoid::{list, Carrier, Monoid};
use crate::processor::Processor;
use crate::repr::TagTable;
use crate::value::{Shape, Value};

pub fn bit_pairs() -> Carrier {
    let all = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .iter()
        .map(|(a, b)| Value::pair(Value::Int(*a), Value::Int(*b)))
        .collect();
    Carrier::finite("BitPair", Shape::pair(Shape::Int, Shape::Int), all)
}

pub fn adder_input() -> Monoid {
    list(bit_pairs())
}

pub fn adder_output() -> Monoid {
    list(Carrier::bits())
}

/// Per pair with carry `c`:
/// `(0,0) ↦ (0, [c])`, `(0,1)` or `(1,0) ↦ (c, [¬c])`, `(1,1) ↦ (1, [c])`.
pub fn adder_step(ab: &Value, c: &Value) -> (Value, Value) {
    let (a, b) = ab.as_pair();
    let c = c.as_int();
    let (carry, bit) = match (a.as_int(), b.as_int()) {
        (0, 0) => (0, c),
        (1, 1) => (1, c),
        _ => (c, 1 - c),
    };
    (Value::Int(carry), Value::ints([bit]))
}

pub fn adder_processor() -> Processor {
    Processor::on_atoms("adder", &adder_input(), &adder_output(), Carrier::bits(), Value::Int(0), Value::ints([]), adder_step)
        .expect("typed")
}

/// Tags for the three distinct step functions: `x` resets the carry to 0,
/// `y` keeps it and flips the output, `z` sets it to 1.
pub fn adder_tag_table() -> TagTable {
    let bp = |a, b| Value::pair(Value::Int(a), Value::Int(b));
    TagTable::new().with(bp(0, 0), "x").with(bp(0, 1), "y").with(bp(1, 0), "y").with(bp(1, 1), "z")
}

/// LSB-first bit pairs of `x` and `y` over `width` bits.
pub fn encode_operands(x: u64, y: u64, width: u32) -> Value {
    Value::List(
        (0..width)
            .map(|i| Value::pair(Value::Int((x >> i & 1) as i64), Value::Int((y >> i & 1) as i64)))
            .collect(),
    )
}

/// Runs the adder and reads back `x + y` from the emitted bits and the
/// final carry.
pub fn add_with(p: &Processor, x: u64, y: u64, width: u32) -> u64 {
    let input = encode_operands(x, y, width);
    let (carry, bits) = p.step(p.init_state(), &input);
    let mut total = 0u64;
    for (i, b) in bits.as_list().iter().enumerate() {
        total |= (b.as_int() as u64) << i;
    }
    total | (carry.as_int() as u64) << width
}
