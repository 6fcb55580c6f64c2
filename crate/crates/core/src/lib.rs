//! Perfect sampling for finite Markov chains.
//!
//! The main sampler is an interruptible rejection scheme: run the
//! time-reversed chain from a seed state, impute the forward driving
//! randomness from the observed transitions, and accept the endpoint when a
//! detection process certifies coalescence. Alongside it are coupling from
//! the past, an infinite-window variant, and an exact rational enumeration
//! oracle used to check the samplers.
//!
//! ```
//! use perfect_sampling::prelude::*;
//!
//! let toy = toy_chain();
//! let rev = reverse_kernel(&toy.kernel, ZeroMassPolicy::Strict).unwrap();
//! let full = FullTracking::new(&toy.monotone);
//! let report = exact_fill_report(&toy.kernel, &rev, &toy.monotone, &full, 2, 0).unwrap();
//! assert_eq!(fmt_pq(&report.p_accept), "3/4");
//! ```

#![allow(clippy::needless_range_loop)]

pub mod cftp;
pub mod chain;
pub mod cli;
pub mod coalescence;
pub mod error;
pub mod fill;
pub mod model_zoo;
pub mod oracle;
pub mod rational;
pub mod rules;
pub mod spec_file;
pub mod stats;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::cftp::{
        cftp_sample, cftp_sample_logged, connection_diagnostic, fill_infinite_window, replay_cftp, BackwardRun, CheckPolicy, DriverLog,
        DEFAULT_WINDOW_CAP,
    };
    pub use crate::chain::{
        reverse_kernel, step_backward, validate_kernel, DiscreteKernel, PartialOrder, ProbabilityVector, ReversedKernel, StateSpace,
        ZeroMassPolicy,
    };
    pub use crate::coalescence::{first_detection, run_detection, DetectionProcess, FullTracking, MonotoneBounding, Tracker};
    pub use crate::error::{Error, Result};
    pub use crate::fill::{acceptance_curve, replication_seed, stream_rng, FillConfig, FillSampler, RetryPolicy, RunRecord, SeedSpec};
    pub use crate::model_zoo::{birth_death_chain, mtf_process, random_walk_chain, toy_chain, RequestWeights};
    pub use crate::oracle::{
        bayes_consistency, exact_cftp_time_law, exact_fill_report, exact_forward_coalescence, exact_joint_t_w, pi_average_check,
    };
    pub use crate::rational::{fmt_pq, ratio, ExactDistribution, Rational};
    pub use crate::rules::{Driver, Monotonicity, TransitionRule};
    pub use crate::stats::{chi_square_gof, independence_test, interruptibility_test};
}
