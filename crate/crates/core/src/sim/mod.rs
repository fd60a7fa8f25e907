//! Slot-synchronous simulation of relay selection over a collision channel
//! with ternary slot outcomes and blocked access: only the contenders of
//! the slot that opened the contention ever transmit during it.

mod auction;
mod batch;
mod record;
mod sta;

pub use auction::{run_auction, run_auction_observed, AuctionOptions, MAX_AUCTION_DEPTH};
pub use batch::{
    derive_seed, run_episode, run_episode_batch, Batch, BatchConfig, BatchSummary, Episode,
};
pub use record::{CriRecord, ProgressMetric, SimOptions, SlotEvent, SlotFeedback};
pub use sta::{run_sta, run_sta_observed};

use crate::geometry::{Point2, Topology};

/// Eligible relay as seen by the protocols.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Contender {
    pub id: usize,
    pub position: Point2,
    pub progress: f64,
}

pub(crate) fn contenders(topology: &Topology, metric: ProgressMetric) -> Vec<Contender> {
    let axis = topology.axis();
    topology
        .eligible()
        .map(|r| {
            let offset = r.position - topology.source;
            let progress = match metric {
                ProgressMetric::Distance => offset.norm(),
                ProgressMetric::Projection => offset.dot(axis),
            };
            Contender {
                id: r.id,
                position: r.position,
                progress,
            }
        })
        .collect()
}
