use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::record::{CriRecord, SimOptions, SlotEvent, SlotFeedback};
use super::{contenders, Contender};
use crate::error::{domain, Result};
use crate::geometry::Topology;
use crate::pgf::{Algorithm, SplitModel};

/// Splitting-tree relay selection: every eligible relay must eventually
/// transmit alone, and the source then picks the one with most progress.
pub fn run_sta(
    topology: &Topology,
    model: &SplitModel,
    seed: u64,
    opts: &SimOptions,
) -> Result<CriRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_sta_observed(topology, model, &mut rng, opts, &mut |_| {})
}

pub fn run_sta_observed<R: Rng + ?Sized>(
    topology: &Topology,
    model: &SplitModel,
    rng: &mut R,
    opts: &SimOptions,
    observer: &mut dyn FnMut(&SlotEvent<'_>),
) -> Result<CriRecord> {
    let pool = contenders(topology, opts.progress);
    if pool.len() != model.n() {
        return domain(format!(
            "topology has {} eligible relays but the model expects {}",
            pool.len(),
            model.n()
        ));
    }
    let cumulative: Vec<f64> = model
        .probs()
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let q = cumulative.len();

    let mut trace = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![(0..pool.len()).collect()];
    let mut ids = Vec::new();
    while let Some(group) = stack.pop() {
        let feedback = SlotFeedback::from_count(group.len());
        ids.clear();
        ids.extend(group.iter().map(|&i| pool[i].id));
        observer(&SlotEvent {
            transmitters: &ids,
            feedback,
            level: 0,
            band: None,
        });
        trace.push(feedback);
        if feedback == SlotFeedback::Collision {
            let mut split = vec![Vec::new(); q];
            for &i in &group {
                let u: f64 = rng.gen();
                let j = cumulative.iter().position(|&c| u < c).unwrap_or(q - 1);
                split[j].push(i);
            }
            // Group 0 answers first, so it goes on top.
            stack.extend(split.into_iter().rev());
        }
    }

    let winner = best(&pool);
    Ok(CriRecord {
        protocol: Algorithm::Sta,
        n: pool.len(),
        slots: trace.len() + usize::from(opts.count_request_slot),
        winner: winner.map(|c| c.id),
        winner_distance: winner.map(|c| c.position.distance(topology.source)),
        winner_progress: winner.map(|c| c.progress),
        backed_off: winner.is_none(),
        trace,
    })
}

/// Largest progress, lowest id on ties.
fn best(pool: &[Contender]) -> Option<&Contender> {
    pool.iter().reduce(|a, b| {
        if b.progress > a.progress || (b.progress == a.progress && b.id < a.id) {
            b
        } else {
            a
        }
    })
}
