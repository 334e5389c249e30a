//! Symmetric-subspace machinery and the distance estimators built on it.

pub mod distance;
pub mod moments;
pub mod partitions;
pub mod projector;

pub use distance::{
    distance_cycle_expansion, distance_sym_overlap, distance_trace_norm, ground_state_bound,
    sym_overlap_from_purities, symmetric_block_eigenvalue, trace_norm_from_sym_block, PurityTable,
};
pub use moments::{tensor_power, MomentAccumulator};
pub use partitions::{cycle_types, integer_partitions, CycleType, MAX_CYCLE_ORDER};
pub use projector::{
    build_sym_projector, build_sym_projector_with_cap, check_capacity, sym_dimension, SymBasis,
    SymProjector, DEFAULT_MEMORY_CAP,
};
