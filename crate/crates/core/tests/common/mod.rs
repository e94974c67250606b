#![allow(dead_code)]

use std::path::PathBuf;

use jsr_core::cli::{parse_family, FamilyFile};
use jsr_core::linalg::Vector;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> FamilyFile {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse_family(&text).expect("fixture parses")
}

/// Gauge of `x` with respect to the symmetric hull of planar `points`,
/// by enumerating every vertex of the dual polygon
/// `{y : |<y, p>| <= 1}`. Returns infinity when `x` leaves the span.
pub fn planar_gauge(points: &[Vector], x: &Vector) -> f64 {
    let mut signed: Vec<[f64; 2]> = Vec::new();
    for p in points {
        signed.push([p[0], p[1]]);
        signed.push([-p[0], -p[1]]);
    }
    let feasible = |y: [f64; 2]| signed.iter().all(|s| y[0] * s[0] + y[1] * s[1] <= 1.0 + 1e-9);
    let mut best = f64::NEG_INFINITY;
    let mut any = false;
    for (i, a) in signed.iter().enumerate() {
        for b in &signed[i + 1..] {
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            // y.a = 1, y.b = 1
            let y = [(b[1] - a[1]) / det, (a[0] - b[0]) / det];
            if feasible(y) {
                any = true;
                best = best.max(y[0] * x[0] + y[1] * x[1]);
            }
        }
    }
    if !any {
        // Points are collinear: measure along the common line.
        let dir = points.iter().max_by(|p, q| p.norm().total_cmp(&q.norm())).unwrap();
        let len = dir.norm();
        if len == 0.0 {
            return if x.norm() == 0.0 { 0.0 } else { f64::INFINITY };
        }
        let u = dir / len;
        if (x - &u * u.dot(x)).norm() > 1e-12 * (1.0 + x.norm()) {
            return f64::INFINITY;
        }
        let reach = points.iter().map(|p| p.dot(&u).abs()).fold(0.0, f64::max);
        return u.dot(x).abs() / reach;
    }
    best.max(0.0)
}

/// Möbius function by trial division.
pub fn mobius(mut n: usize) -> i64 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Number of aperiodic necklaces of length `n` over `m` letters.
pub fn lyndon_count(m: usize, n: usize) -> usize {
    let total: i64 = (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| mobius(d) * (m as i64).pow((n / d) as u32))
        .sum();
    (total / n as i64) as usize
}
