use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::circle::{arc_inside_disk, disk_intersection_area};
use super::point::Point2;
use crate::error::{domain, CgfError, Result};

/// Relative slack used by membership tests.
const EDGE_EPS: f64 = 1e-12;

/// Rejection sampling gives up below this acceptance rate.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

/// Mass tolerance of the band-radius bisection.
pub const BAND_MASS_TOL: f64 = 1e-12;

/// Circular sector of the source's range, possibly restricted to the
/// annulus `inner <= |x - source| <= outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorRegion {
    pub source: Point2,
    /// Transmission range `R`.
    pub range: f64,
    /// Direction of the destination, radians.
    pub heading: f64,
    /// Angular aperture in `(0, 2 pi]`.
    pub aperture: f64,
    pub inner: f64,
    pub outer: f64,
}

/// Intersection of the source disk with the annulus
/// `inner <= |x - anchor| <= outer`. A plain convex lens has `inner = 0`
/// and `outer = rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensRegion {
    pub source: Point2,
    pub range: f64,
    pub anchor: Point2,
    pub inner: f64,
    pub outer: f64,
}

/// A forwarding decision region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Region {
    Sector(SectorRegion),
    Lens(LensRegion),
}

impl SectorRegion {
    pub fn new(source: Point2, range: f64, heading: f64, aperture: f64) -> Result<Self> {
        if !(range > 0.0 && range.is_finite()) {
            return domain(format!("range must be positive, got {range}"));
        }
        if !(aperture > 0.0 && aperture <= TAU + EDGE_EPS) {
            return domain(format!("aperture {aperture} outside (0, 2pi]"));
        }
        if !source.is_finite() || !heading.is_finite() {
            return domain("sector source and heading must be finite");
        }
        Ok(SectorRegion {
            source,
            range,
            heading,
            aperture: aperture.min(TAU),
            inner: 0.0,
            outer: range,
        })
    }

    /// Sector pointing from `source` at `destination`.
    pub fn toward(source: Point2, destination: Point2, range: f64, aperture: f64) -> Result<Self> {
        Self::new(source, range, (destination - source).angle(), aperture)
    }

    pub fn area(&self) -> f64 {
        0.5 * self.aperture * (self.outer * self.outer - self.inner * self.inner)
    }

    fn mass_within(&self, d: f64) -> f64 {
        let d = d.clamp(self.inner, self.outer);
        (d * d - self.inner * self.inner) / (self.outer * self.outer - self.inner * self.inner)
    }

    fn mass_density(&self, d: f64) -> f64 {
        if d < self.inner || d > self.outer {
            return 0.0;
        }
        2.0 * d / (self.outer * self.outer - self.inner * self.inner)
    }

    fn contains(&self, p: Point2) -> bool {
        let v = p - self.source;
        let r = v.norm();
        let slack = EDGE_EPS * self.range;
        if r < self.inner - slack || r > self.outer + slack {
            return false;
        }
        if self.aperture >= TAU || r == 0.0 {
            return true;
        }
        let off = (v.angle() - self.heading + PI).rem_euclid(TAU) - PI;
        off.abs() <= 0.5 * self.aperture + EDGE_EPS
    }

    fn with_radii(&self, inner: f64, outer: f64) -> Self {
        SectorRegion {
            inner,
            outer,
            ..*self
        }
    }
}

impl LensRegion {
    /// Lens whose anchor sits at distance `range` from `source` toward
    /// `destination`; `rho` is the anchor disk radius.
    pub fn toward(source: Point2, destination: Point2, range: f64, rho: f64) -> Result<Self> {
        let axis = destination - source;
        let len = axis.norm();
        if !(len > 0.0) {
            return domain("destination must differ from source");
        }
        Self::new(source, range, source + axis * (range / len), rho)
    }

    pub fn new(source: Point2, range: f64, anchor: Point2, rho: f64) -> Result<Self> {
        if !(range > 0.0 && range.is_finite()) {
            return domain(format!("range must be positive, got {range}"));
        }
        if !(rho > 0.0 && rho <= 2.0 * range * (1.0 + EDGE_EPS)) {
            return domain(format!("rho {rho} outside (0, 2R] with R = {range}"));
        }
        if !source.is_finite() || !anchor.is_finite() {
            return domain("lens source and anchor must be finite");
        }
        let lens = LensRegion {
            source,
            range,
            anchor,
            inner: 0.0,
            outer: rho,
        };
        if lens.area() <= 0.0 {
            return domain("lens is empty");
        }
        Ok(lens)
    }

    pub fn separation(&self) -> f64 {
        self.anchor.distance(self.source)
    }

    pub fn heading(&self) -> f64 {
        (self.anchor - self.source).angle()
    }

    pub fn area(&self) -> f64 {
        self.cut_area(self.range, self.outer) - self.cut_area(self.range, self.inner)
    }

    /// Area of disk(source, r) ∩ disk(anchor, rho).
    fn cut_area(&self, r: f64, rho: f64) -> f64 {
        disk_intersection_area(r, rho, self.separation())
    }

    fn mass_within(&self, d: f64) -> f64 {
        let d = d.min(self.range);
        let part = self.cut_area(d, self.outer) - self.cut_area(d, self.inner);
        (part / self.area()).clamp(0.0, 1.0)
    }

    fn mass_density(&self, d: f64) -> f64 {
        if d > self.range {
            return 0.0;
        }
        let sep = self.separation();
        let arc = arc_inside_disk(d, self.outer, sep) - arc_inside_disk(d, self.inner, sep);
        arc.max(0.0) / self.area()
    }

    fn contains(&self, p: Point2) -> bool {
        let slack = EDGE_EPS * self.range;
        let t = p.distance(self.anchor);
        p.distance(self.source) <= self.range + slack
            && t >= self.inner - slack
            && t <= self.outer + slack
    }

    fn with_radii(&self, inner: f64, outer: f64) -> Self {
        LensRegion {
            inner,
            outer,
            ..*self
        }
    }

    /// Mass of the band `inner <= |x - anchor| <= t` relative to the region.
    fn mass_to_anchor_radius(&self, t: f64) -> f64 {
        (self.cut_area(self.range, t) - self.cut_area(self.range, self.inner)) / self.area()
    }

    fn bounding_box(&self) -> (Point2, Point2) {
        let (s, a, r, o) = (self.source, self.anchor, self.range, self.outer);
        let lo = Point2::new((s.x - r).max(a.x - o), (s.y - r).max(a.y - o));
        let hi = Point2::new((s.x + r).min(a.x + o), (s.y + r).min(a.y + o));
        (lo, hi)
    }
}

impl From<SectorRegion> for Region {
    fn from(s: SectorRegion) -> Self {
        Region::Sector(s)
    }
}

impl From<LensRegion> for Region {
    fn from(l: LensRegion) -> Self {
        Region::Lens(l)
    }
}

impl Region {
    pub fn source(&self) -> Point2 {
        match self {
            Region::Sector(s) => s.source,
            Region::Lens(l) => l.source,
        }
    }

    pub fn range(&self) -> f64 {
        match self {
            Region::Sector(s) => s.range,
            Region::Lens(l) => l.range,
        }
    }

    /// Direction from the source toward the destination, radians.
    pub fn heading(&self) -> f64 {
        match self {
            Region::Sector(s) => s.heading,
            Region::Lens(l) => l.heading(),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Sector(s) => s.area(),
            Region::Lens(l) => l.area(),
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Region::Sector(s) => s.contains(p),
            Region::Lens(l) => l.contains(p),
        }
    }

    /// Probability that a uniform point of the region lies within `d` of
    /// the source.
    pub fn radial_mass(&self, d: f64) -> Result<f64> {
        self.check_distance(d)?;
        Ok(self.radial_mass_unchecked(d))
    }

    /// Derivative of [`Region::radial_mass`] with respect to `d`.
    pub fn radial_density(&self, d: f64) -> Result<f64> {
        self.check_distance(d)?;
        Ok(match self {
            Region::Sector(s) => s.mass_density(d),
            Region::Lens(l) => l.mass_density(d),
        })
    }

    pub(crate) fn radial_mass_unchecked(&self, d: f64) -> f64 {
        match self {
            Region::Sector(s) => s.mass_within(d),
            Region::Lens(l) => l.mass_within(d),
        }
    }

    pub(crate) fn check_distance(&self, d: f64) -> Result<()> {
        let r = self.range();
        if !(d >= 0.0 && d <= r * (1.0 + EDGE_EPS)) {
            return domain(format!("distance {d} outside [0, {r}]"));
        }
        Ok(())
    }

    /// Distances at which the radial mass is not smooth; always includes
    /// `0` and `R`, sorted and deduplicated.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        let r = self.range();
        let mut pts = vec![0.0, r];
        match self {
            Region::Sector(s) => pts.extend([s.inner, s.outer]),
            Region::Lens(l) => {
                let sep = l.separation();
                for rho in [l.inner, l.outer] {
                    if rho > 0.0 {
                        pts.extend([(sep - rho).abs(), sep + rho]);
                    }
                }
            }
        }
        pts.retain(|&d| (0.0..=r).contains(&d));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * r);
        pts
    }

    /// Splits the region into bands carrying the given probability masses,
    /// highest priority first. Lens bands are anchor-centred slices starting
    /// at the anchor; sector bands are sub-annuli starting at the rim.
    pub fn partition_by_mass(&self, masses: &[f64]) -> Result<Vec<Region>> {
        if masses.len() < 2 {
            return domain(format!("need at least 2 bands, got {}", masses.len()));
        }
        if masses.iter().any(|&m| !(m >= 0.0)) || (masses.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return domain("band masses must be non-negative and sum to 1");
        }
        if !(self.area() > 0.0) {
            return domain("cannot partition an empty region");
        }
        let mut cum = 0.0;
        let mut cuts = Vec::with_capacity(masses.len() + 1);
        cuts.push(0.0);
        for &m in &masses[..masses.len() - 1] {
            cum += m;
            cuts.push(cum.min(1.0));
        }
        cuts.push(1.0);
        let bands = match self {
            Region::Lens(l) => {
                let radii: Vec<f64> = cuts
                    .iter()
                    .map(|&c| match c {
                        c if c <= 0.0 => l.inner,
                        c if c >= 1.0 => l.outer,
                        c => bisect(l.inner, l.outer, c, |t| l.mass_to_anchor_radius(t)),
                    })
                    .collect();
                radii
                    .windows(2)
                    .map(|w| Region::Lens(l.with_radii(w[0], w[1])))
                    .collect()
            }
            Region::Sector(s) => {
                let span = s.outer * s.outer - s.inner * s.inner;
                let radii: Vec<f64> = cuts
                    .iter()
                    .map(|&c| (s.outer * s.outer - span * c).max(0.0).sqrt())
                    .collect();
                radii
                    .windows(2)
                    .map(|w| Region::Sector(s.with_radii(w[1], w[0])))
                    .collect()
            }
        };
        Ok(bands)
    }

    /// `q` equal-mass bands in priority order.
    pub fn partition(&self, q: usize) -> Result<Vec<Region>> {
        if q < 2 {
            return domain(format!("need at least 2 bands, got {q}"));
        }
        self.partition_by_mass(&vec![1.0 / q as f64; q])
    }

    /// Fraction of candidate draws accepted by [`Region::sample_point`].
    pub fn acceptance_rate(&self) -> f64 {
        match self {
            Region::Sector(_) => 1.0,
            Region::Lens(l) => {
                let (lo, hi) = l.bounding_box();
                let box_area = (hi.x - lo.x).max(0.0) * (hi.y - lo.y).max(0.0);
                if box_area > 0.0 {
                    l.area() / box_area
                } else {
                    0.0
                }
            }
        }
    }

    /// Uniform point of the region.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point2> {
        match self {
            Region::Sector(s) => {
                let u: f64 = rng.gen();
                let v: f64 = rng.gen();
                let r = (s.inner * s.inner + u * (s.outer * s.outer - s.inner * s.inner)).sqrt();
                let theta = s.heading + (v - 0.5) * s.aperture;
                Ok(s.source + Point2::from_polar(r, theta))
            }
            Region::Lens(l) => {
                let rate = self.acceptance_rate();
                if rate < MIN_ACCEPTANCE {
                    return Err(CgfError::Infeasible(format!(
                        "rejection sampling acceptance {rate:e} below {MIN_ACCEPTANCE:e}"
                    )));
                }
                let (lo, hi) = l.bounding_box();
                loop {
                    let p = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
                    if l.contains(p) {
                        return Ok(p);
                    }
                }
            }
        }
    }
}

/// Sector with the same source and range whose area equals the lens area.
pub fn calibrate_sdr(lens: &LensRegion) -> Result<SectorRegion> {
    let aperture = 2.0 * lens.area() / (lens.range * lens.range);
    if aperture > TAU * (1.0 + EDGE_EPS) {
        return Err(CgfError::Infeasible(format!(
            "equal-area sector needs aperture {aperture} > 2pi"
        )));
    }
    if !(aperture > 0.0) {
        return Err(CgfError::Infeasible("lens has no area".into()));
    }
    SectorRegion::new(lens.source, lens.range, lens.heading(), aperture.min(TAU))
}

/// Root of the non-decreasing `f` on `[lo, hi]` at level `target`.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v - target).abs() <= BAND_MASS_TOL {
            return mid;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}
