//! Two-circle primitives.

use std::f64::consts::PI;

/// Area of the intersection of two disks with radii `r1`, `r2` whose
/// centres are `sep` apart.
pub fn disk_intersection_area(r1: f64, r2: f64, sep: f64) -> f64 {
    if r1 <= 0.0 || r2 <= 0.0 {
        return 0.0;
    }
    if sep >= r1 + r2 {
        return 0.0;
    }
    let small = r1.min(r2);
    if sep <= (r1 - r2).abs() {
        return PI * small * small;
    }
    // Each disk contributes a circular segment cut by the common chord.
    let c1 = ((sep * sep + r1 * r1 - r2 * r2) / (2.0 * sep * r1)).clamp(-1.0, 1.0);
    let c2 = ((sep * sep + r2 * r2 - r1 * r1) / (2.0 * sep * r2)).clamp(-1.0, 1.0);
    let seg1 = r1 * r1 * (c1.acos() - c1 * (1.0 - c1 * c1).sqrt());
    let seg2 = r2 * r2 * (c2.acos() - c2 * (1.0 - c2 * c2).sqrt());
    (seg1 + seg2).min(PI * small * small)
}

/// Length of the circle of radius `r` (centred at the origin) lying inside
/// the disk of radius `rho` whose centre is `sep` away.
pub fn arc_inside_disk(r: f64, rho: f64, sep: f64) -> f64 {
    if r <= 0.0 || rho <= 0.0 {
        return 0.0;
    }
    if sep == 0.0 {
        return if r <= rho { 2.0 * PI * r } else { 0.0 };
    }
    let u = (r * r + sep * sep - rho * rho) / (2.0 * r * sep);
    2.0 * r * u.clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_lens_closed_form() {
        let a = disk_intersection_area(1.0, 1.0, 1.0);
        assert!((a - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!((a - 1.228_37).abs() < 1e-5);
    }

    #[test]
    fn containment_and_disjoint() {
        assert_eq!(disk_intersection_area(1.0, 3.0, 0.5), PI);
        assert_eq!(disk_intersection_area(1.0, 1.0, 2.5), 0.0);
        assert_eq!(disk_intersection_area(0.0, 1.0, 0.5), 0.0);
    }

    #[test]
    fn arc_length_is_the_area_derivative() {
        for &(r, rho, sep) in &[
            (0.3, 1.0, 1.0),
            (0.8, 0.6, 1.0),
            (0.5, 2.0, 1.0),
            (0.95, 0.2, 1.0),
        ] {
            let h = 1e-6;
            let fd = (disk_intersection_area(r + h, rho, sep)
                - disk_intersection_area(r - h, rho, sep))
                / (2.0 * h);
            assert!(
                (fd - arc_inside_disk(r, rho, sep)).abs() < 1e-6,
                "r={r} rho={rho}"
            );
        }
    }
}
