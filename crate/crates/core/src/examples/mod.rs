//! Worked processors used by the tests, the acceptance suite and the CLI.

pub mod adder;
pub mod catalog;
pub mod feedback;
pub mod inverse;
pub mod join;
pub mod prefix;
pub mod stratified;
pub mod tcp;

use crate::algebra::monoid::int_add;
use crate::processor::{InputGen, Processor};

/// A processor registered under a name, with the inputs it is tested on.
#[derive(Clone)]
pub struct Example {
    pub name: &'static str,
    pub processor: Processor,
    pub inputs: InputGen,
}

impl Example {
    fn new(name: &'static str, processor: Processor) -> Example {
        let inputs = InputGen::from_monoid(processor.input());
        Example { name, processor, inputs }
    }
}

/// Every example processor, in a fixed order.
pub fn registry() -> Vec<Example> {
    let z = int_add();
    let paths = join::JoinConfig::paths(3);
    let perfect = tcp::NetworkConfig::perfect();
    vec![
        Example::new("prefix-sum", prefix::prefix_sum_processor()),
        Example::new("integral", inverse::integral(&z).expect("group")),
        Example::new("derivative", inverse::derivative(&z).expect("group")),
        Example::new("pairs", join::pairs_processor(&paths)),
        Example::new("join", join::join_processor(&paths)),
        Example::new("unfused-join", join::unfused_join(&paths)),
        Example::new("partitioned-join", join::partitioned_join(&paths)),
        Example::new("stratified-diff", stratified::ticked_processor()),
        Example::new("stratified-diff-list", stratified::list_processor()),
        Example::new("adder", adder::adder_processor()),
        Example::new("swap-add-loop", feedback::swap_add_loop()),
        Example::new("successor-loop", feedback::successor_loop()),
        Example::new("tcp", tcp::tcp_system(&perfect, &perfect)),
        Example::new(
            "tcp-lossy",
            tcp::tcp_system(&tcp::NetworkConfig::adversarial(7, 8, 4), &tcp::NetworkConfig::adversarial(8, 8, 4)),
        ),
    ]
}

pub fn lookup(name: &str) -> Option<Example> {
    registry().into_iter().find(|e| e.name == name)
}
