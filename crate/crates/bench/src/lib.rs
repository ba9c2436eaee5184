//! Fixed benchmark inputs.

use mwsrpdt_core::instances::{generate, GeneratorConfig};
use mwsrpdt_core::{Instance, InstanceType};

/// Generated instance used by the benchmarks; panics only on a generator bug.
pub fn fixture(n: usize, instance_type: InstanceType, seed: u64) -> Instance {
    generate(&GeneratorConfig::new(n, instance_type, seed)).expect("valid generator config")
}

/// The first few customers of a generated instance, small enough for the
/// exact oracle.
pub fn tiny_fixture(seed: u64, max_tasks: usize) -> Instance {
    let full = fixture(6, InstanceType::A, seed);
    let mut customers = full.n() - 1;
    loop {
        let inst = full.truncated(customers).expect("truncation keeps a valid instance");
        if inst.total_tasks() <= max_tasks || customers == 1 {
            return inst;
        }
        customers -= 1;
    }
}
