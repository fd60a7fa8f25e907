use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::{CriRecord, SimOptions, SlotEvent, SlotFeedback};
use super::{contenders, Contender};
use crate::error::{domain, Result};
use crate::geometry::{Region, Topology};
use crate::pgf::{Algorithm, SplitModel};

/// Partition depth after which an unresolved auction gives up and backs off.
pub const MAX_AUCTION_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOptions {
    /// Probability mass of each band, highest priority first.
    pub band_masses: Vec<f64>,
    /// After an idle band, the last remaining band re-partitions without
    /// first colliding.
    pub skip: bool,
    /// Contenders sort themselves into bands before the first slot, so the
    /// opening all-contender slot is not played.
    pub presplit: bool,
}

impl AuctionOptions {
    pub fn new(q: usize, skip: bool) -> Self {
        AuctionOptions {
            band_masses: vec![1.0 / q as f64; q],
            skip,
            presplit: false,
        }
    }

    /// Bands whose masses follow the model's coin.
    pub fn from_model(model: &SplitModel, skip: bool) -> Self {
        AuctionOptions {
            band_masses: model.probs().to_vec(),
            skip,
            presplit: false,
        }
    }

    pub fn protocol(&self) -> Algorithm {
        if self.skip {
            Algorithm::AuctionSkip
        } else {
            Algorithm::Auction
        }
    }
}

/// Dutch-auction relay selection over nested priority bands.
///
/// A solo reply ends the auction. A collision prunes every lower-priority
/// band and re-partitions the colliding band. The RNG is unused because
/// band membership is fixed by geometry; the seed is accepted so every
/// protocol shares one call shape.
pub fn run_auction(
    topology: &Topology,
    opts: &AuctionOptions,
    seed: u64,
    sim: &SimOptions,
) -> Result<CriRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_auction_observed(topology, opts, &mut rng, sim, &mut |_| {})
}

pub fn run_auction_observed<R: Rng + ?Sized>(
    topology: &Topology,
    opts: &AuctionOptions,
    _rng: &mut R,
    sim: &SimOptions,
    observer: &mut dyn FnMut(&SlotEvent<'_>),
) -> Result<CriRecord> {
    if opts.band_masses.len() < 2 {
        return domain("auction needs at least 2 bands");
    }
    let pool = contenders(topology, sim.progress);
    let mut trace = Vec::new();
    let mut ids: Vec<usize> = Vec::new();
    let mut emit =
        |members: &[usize], level: usize, band: Option<&Region>, trace: &mut Vec<SlotFeedback>| {
            let feedback = SlotFeedback::from_count(members.len());
            ids.clear();
            ids.extend(members.iter().map(|&i| pool[i].id));
            observer(&SlotEvent {
                transmitters: &ids,
                feedback,
                level,
                band,
            });
            trace.push(feedback);
            feedback
        };

    let mut set: Vec<usize> = (0..pool.len()).collect();
    let mut region = topology.region;
    // True once the current set is known to hold at least two contenders.
    let mut known_collision = false;
    let mut winner: Option<usize> = None;

    if !opts.presplit {
        match emit(&set, 0, None, &mut trace) {
            SlotFeedback::Idle => set.clear(),
            SlotFeedback::Single => winner = Some(set[0]),
            SlotFeedback::Collision => known_collision = true,
        }
    }

    let mut level = 0;
    // Without the opening slot nobody knows the set is empty, so the bands
    // are still polled once.
    while winner.is_none()
        && (!set.is_empty() || (opts.presplit && level == 0))
        && level < MAX_AUCTION_DEPTH
    {
        level += 1;
        let bands = region.partition_by_mass(&opts.band_masses)?;
        let groups = assign(&pool, &set, &bands);
        let last = bands.len() - 1;
        let mut next = None;
        for (j, (band, members)) in bands.iter().zip(groups).enumerate() {
            if opts.skip && known_collision && j == last {
                next = Some((*band, members));
                break;
            }
            match emit(&members, level, Some(band), &mut trace) {
                SlotFeedback::Idle => continue,
                SlotFeedback::Single => {
                    winner = Some(members[0]);
                    break;
                }
                SlotFeedback::Collision => {
                    next = Some((*band, members));
                    break;
                }
            }
        }
        match next {
            Some((band, members)) => {
                region = band;
                set = members;
                known_collision = true;
            }
            None if winner.is_none() => set.clear(),
            None => {}
        }
    }

    let winner: Option<&Contender> = winner.map(|i| &pool[i]);
    Ok(CriRecord {
        protocol: opts.protocol(),
        n: pool.len(),
        slots: trace.len() + usize::from(sim.count_request_slot),
        winner: winner.map(|c| c.id),
        winner_distance: winner.map(|c| c.position.distance(topology.source)),
        winner_progress: winner.map(|c| c.progress),
        backed_off: winner.is_none(),
        trace,
    })
}

/// Each member joins the first band (in priority order) containing it.
fn assign(pool: &[Contender], set: &[usize], bands: &[Region]) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); bands.len()];
    for &i in set {
        let j = bands
            .iter()
            .position(|b| b.contains(pool[i].position))
            .unwrap_or(bands.len() - 1);
        groups[j].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_topology, LensRegion, Point2, Relay};

    fn lens() -> Region {
        Region::Lens(LensRegion::toward(Point2::ORIGIN, Point2::new(3.0, 0.0), 1.0, 1.0).unwrap())
    }

    fn anchor_radius(band: &Region) -> (f64, f64) {
        match band {
            Region::Lens(l) => (l.inner, l.outer),
            Region::Sector(_) => unreachable!(),
        }
    }

    /// Three relays collide in the first band, a fourth sits in the second
    /// band, and one of the three is alone in the first sub-band.
    fn walkthrough() -> Topology {
        let region = lens();
        let bands = region.partition(2).unwrap();
        let (_, t1) = anchor_radius(&bands[0]);
        let sub = bands[0].partition(2).unwrap();
        let (_, t11) = anchor_radius(&sub[0]);
        let anchor = Point2::new(1.0, 0.0);
        let at = |t: f64, phi: f64| anchor + Point2::from_polar(t, std::f64::consts::PI + phi);
        let mid = 0.5 * (t11 + t1);
        let relays = vec![
            Relay {
                id: 87,
                position: at(0.5 * t11, 0.0),
                awake: true,
            },
            Relay {
                id: 21,
                position: at(mid, -0.3),
                awake: true,
            },
            Relay {
                id: 55,
                position: at(mid, 0.3),
                awake: true,
            },
            Relay {
                id: 11,
                position: at(0.5 * (t1 + 1.0), 0.0),
                awake: true,
            },
            Relay {
                id: 53,
                position: at(0.2, 0.1),
                awake: false,
            },
        ];
        Topology::new(Point2::ORIGIN, Point2::new(3.0, 0.0), relays, region).unwrap()
    }

    #[test]
    fn nested_band_walkthrough_presplit() {
        let topo = walkthrough();
        let opts = AuctionOptions {
            presplit: true,
            ..AuctionOptions::new(2, false)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut heard = Vec::new();
        let rec = run_auction_observed(&topo, &opts, &mut rng, &SimOptions::default(), &mut |ev| {
            heard.push(ev.transmitters.to_vec())
        })
        .unwrap();
        assert_eq!(rec.winner, Some(87));
        assert_eq!(
            rec.trace,
            vec![SlotFeedback::Collision, SlotFeedback::Single]
        );
        assert_eq!(rec.trace_symbols(), "CS");
        assert!(heard.iter().flatten().all(|&id| id != 11 && id != 53));
        let mut first = heard[0].clone();
        first.sort();
        assert_eq!(first, vec![21, 55, 87]);
    }

    #[test]
    fn nested_band_walkthrough_with_opening_slot() {
        let rec = run_auction(
            &walkthrough(),
            &AuctionOptions::new(2, false),
            0,
            &SimOptions::default(),
        )
        .unwrap();
        assert_eq!(rec.winner, Some(87));
        assert_eq!(rec.trace_symbols(), "CCS");
    }

    #[test]
    fn lone_contender_and_empty_set() {
        let one = sample_topology(&lens(), 1, 3).unwrap();
        for skip in [false, true] {
            let rec = run_auction(
                &one,
                &AuctionOptions::new(2, skip),
                0,
                &SimOptions::default(),
            )
            .unwrap();
            assert_eq!(rec.slots, 1);
            assert_eq!(rec.winner, Some(0));
        }
        let none = sample_topology(&lens(), 0, 3).unwrap();
        let rec = run_auction(
            &none,
            &AuctionOptions::new(2, false),
            0,
            &SimOptions::default(),
        )
        .unwrap();
        assert!(rec.backed_off);
        assert_eq!(rec.trace_symbols(), "I");
        let pre = AuctionOptions {
            presplit: true,
            ..AuctionOptions::new(3, false)
        };
        let rec = run_auction(&none, &pre, 0, &SimOptions::default()).unwrap();
        assert!(rec.backed_off);
        assert_eq!(rec.trace_symbols(), "III");
    }

    #[test]
    fn pruning_and_band_priority() {
        for seed in 0..300 {
            let topo = sample_topology(&lens(), 6, seed).unwrap();
            for skip in [false, true] {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut allowed: Vec<usize> = (0..6).collect();
                let mut last_level: Vec<SlotFeedback> = Vec::new();
                let mut current = 0;
                let rec = run_auction_observed(
                    &topo,
                    &AuctionOptions::new(2, skip),
                    &mut rng,
                    &SimOptions::default(),
                    &mut |ev| {
                        assert!(
                            ev.transmitters.iter().all(|id| allowed.contains(id)),
                            "blocked access violated"
                        );
                        if ev.level != current {
                            current = ev.level;
                            last_level.clear();
                        }
                        last_level.push(ev.feedback);
                        if ev.feedback == SlotFeedback::Collision {
                            allowed = ev.transmitters.to_vec();
                        }
                    },
                )
                .unwrap();
                assert!(rec.winner.is_some());
                // The winning slot follows only idle bands at its level.
                let (win, before) = last_level.split_last().unwrap();
                assert_eq!(*win, SlotFeedback::Single);
                assert!(before.iter().all(|f| *f == SlotFeedback::Idle));
            }
        }
    }
}
