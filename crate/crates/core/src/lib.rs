//! Nonlocal-game based multiple access channels.
//!
//! The crate models `n`-sender, one-receiver channels whose noise depends on
//! whether the channel input wins a nonlocal game, together with the
//! correlation resources (local, quantum, no-signaling) the senders may use to
//! encode their messages. Everything here is pure computation over small dense
//! tables; file formats and the command-line front end live in the `ngmac`
//! crate.
//!
//! Conventions used throughout:
//!
//! * tuples are flattened into dense indices with player 1 as the most
//!   significant digit;
//! * a channel input symbol of one sender is `q * D + a` (question, answer);
//! * all information quantities are in bits.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod capacity;
pub mod channels;
pub mod correlations;
mod error;
pub mod games;
pub mod index;
pub mod infotheory;
pub mod quantum;
pub mod sampling;
pub mod verification;

pub use self::{
    capacity::{BoundKind, CapacityResult, OptimizerConfig},
    channels::{noise_f, ChannelType, MacChannel},
    correlations::{e_star, CorrelationBox, Encoder, Resource},
    error::{Error, Result},
    games::NonlocalGame,
    infotheory::{JointDistribution, ProductDistribution},
};
