//! Core model for randomized request assignment in a torus network of
//! caching servers.
//!
//! Servers sit on a `side x side` torus (or bounded grid). Every server caches
//! `M` files drawn with replacement from a popularity profile over a library of
//! `K` files. Requests arrive at uniformly random servers and are assigned
//! either to the nearest replica holder or to the lesser-loaded of two random
//! replica holders within a radius. The [`analysis`] module exposes the
//! structural objects that govern those strategies: per-file Voronoi
//! tessellations, the configuration graph and the goodness property of a
//! placement.
//!
//! The crate is `no_std` and only needs `alloc`. IO, experiment orchestration
//! and plotting live in the `cachenet` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod placement;
pub mod popularity;
pub mod seed;
pub mod strategy;
pub mod topology;
pub mod workload;

pub use error::{Error, Result};
pub use placement::{FileId, Placement};
pub use popularity::{PopularityKind, PopularityProfile};
pub use strategy::{Fallback, LoadState, Radius, RunSummary, StrategyConfig, StrategyKind};
pub use topology::{NodeId, TorusGeometry};
pub use workload::{Request, RequestStream};
