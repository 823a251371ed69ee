//! Streaming runtime: lock-free SPSC channels and a farm skeleton built on
//! them.

pub mod farm;
pub mod spsc;

pub use farm::{
    run_farm, Collector, Emit, Emitter, FarmConfig, FarmError, FarmReport, FeedbackSender, IterEmitter, StageError,
    VecCollector, WorkerLoad,
};
pub use spsc::{channel, Consumer, Full, Producer, DEFAULT_CAPACITY};
