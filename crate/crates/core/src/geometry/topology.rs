use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::point::Point2;
use super::region::Region;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Relay {
    pub id: usize,
    pub position: Point2,
    pub awake: bool,
}

/// One sampled deployment around a source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub source: Point2,
    pub destination: Point2,
    pub relays: Vec<Relay>,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub awake_prob: f64,
    /// Defaults to `2R` from the source along the region heading.
    pub destination: Option<Point2>,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            awake_prob: 1.0,
            destination: None,
        }
    }
}

impl Topology {
    /// Hand-built deployment; every relay must lie within range of the source.
    pub fn new(
        source: Point2,
        destination: Point2,
        relays: Vec<Relay>,
        region: Region,
    ) -> Result<Self> {
        let range = region.range();
        if let Some(r) = relays
            .iter()
            .find(|r| r.position.distance(source) > range * (1.0 + 1e-12))
        {
            return domain(format!(
                "relay {} lies outside the transmission range",
                r.id
            ));
        }
        Ok(Topology {
            source,
            destination,
            relays,
            region,
        })
    }

    /// Awake relays inside the decision region.
    pub fn eligible(&self) -> impl Iterator<Item = &Relay> + '_ {
        self.relays
            .iter()
            .filter(move |r| r.awake && self.region.contains(r.position))
    }

    pub fn eligible_count(&self) -> usize {
        self.eligible().count()
    }

    /// Unit vector from the source toward the destination.
    pub fn axis(&self) -> Point2 {
        let v = self.destination - self.source;
        let n = v.norm();
        if n > 0.0 {
            v * (1.0 / n)
        } else {
            Point2::from_polar(1.0, self.region.heading())
        }
    }

    /// Sorted source distances of the eligible relays.
    pub fn eligible_distances(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self
            .eligible()
            .map(|r| r.position.distance(self.source))
            .collect();
        d.sort_by(f64::total_cmp);
        d
    }
}

/// `n` relays uniform on `region`, all awake; identical for identical seeds.
pub fn sample_topology(region: &Region, n: usize, seed: u64) -> Result<Topology> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_topology_with(region, n, &SamplingOptions::default(), &mut rng)
}

pub fn sample_topology_with<R: Rng + ?Sized>(
    region: &Region,
    n: usize,
    opts: &SamplingOptions,
    rng: &mut R,
) -> Result<Topology> {
    if !(0.0..=1.0).contains(&opts.awake_prob) {
        return domain(format!(
            "awake probability {} outside [0, 1]",
            opts.awake_prob
        ));
    }
    let source = region.source();
    let destination = opts
        .destination
        .unwrap_or_else(|| source + Point2::from_polar(2.0 * region.range(), region.heading()));
    let mut relays = Vec::with_capacity(n);
    for id in 0..n {
        let position = region.sample_point(rng)?;
        let awake = opts.awake_prob >= 1.0 || rng.gen::<f64>() < opts.awake_prob;
        relays.push(Relay {
            id,
            position,
            awake,
        });
    }
    Ok(Topology {
        source,
        destination,
        relays,
        region: *region,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LensRegion, SectorRegion};

    fn lens() -> Region {
        Region::Lens(LensRegion::toward(Point2::ORIGIN, Point2::new(2.0, 0.0), 1.0, 1.0).unwrap())
    }

    #[test]
    fn empty_and_deterministic() {
        assert!(sample_topology(&lens(), 0, 3).unwrap().relays.is_empty());
        let a = sample_topology(&lens(), 7, 11).unwrap();
        let b = sample_topology(&lens(), 7, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_topology(&lens(), 7, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn samples_stay_inside_the_region() {
        let sector =
            Region::Sector(SectorRegion::new(Point2::new(1.0, 1.0), 2.0, 1.0, 1.5).unwrap());
        for region in [lens(), sector] {
            let t = sample_topology(&region, 500, 5).unwrap();
            assert_eq!(t.eligible_count(), 500);
        }
    }

    #[test]
    fn awake_probability_thins_the_eligible_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let opts = SamplingOptions {
            awake_prob: 0.0,
            destination: None,
        };
        let t = sample_topology_with(&lens(), 20, &opts, &mut rng).unwrap();
        assert_eq!(t.eligible_count(), 0);
        assert_eq!(t.relays.len(), 20);
    }

    #[test]
    fn infeasible_rejection_rate() {
        let thin = Region::Lens(
            LensRegion::toward(Point2::ORIGIN, Point2::new(1.0, 0.0), 1.0, 1.0).unwrap(),
        );
        let Region::Lens(mut sliver) = thin else {
            unreachable!()
        };
        sliver.inner = 1.0 - 1e-9;
        assert!(sample_topology(&Region::Lens(sliver), 1, 0).is_err());
    }
}
