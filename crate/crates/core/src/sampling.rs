//! Seeded point and triple samplers.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Result};
use crate::point::{Carrier, Coords, Point};

/// Where sampled points are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum SampleDomain {
    /// Uniform on the box `[lo, hi]^dim`.
    Interval { lo: f64, hi: f64, dim: usize },
    /// Uniform on `0..size`.
    Finite { size: usize },
}

impl SampleDomain {
    /// `[0, 100]` on the line.
    pub const DEFAULT: SampleDomain = SampleDomain::Interval {
        lo: 0.0,
        hi: 100.0,
        dim: 1,
    };

    pub fn carrier(&self) -> Carrier {
        match *self {
            SampleDomain::Interval { dim, .. } => Carrier::Real { dim },
            SampleDomain::Finite { size } => Carrier::Finite { size },
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SampleDomain::Interval { lo, hi, dim } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(param(
                        "range",
                        format!("[{lo}, {hi}] is not a proper interval"),
                    ));
                }
                if dim == 0 {
                    return Err(param("dim", "must be positive"));
                }
            }
            SampleDomain::Finite { size } => {
                if size < 2 {
                    return Err(param("size", "need at least two points"));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic point stream: the same seed and domain give the same points.
#[derive(Debug, Clone)]
pub struct PointSampler {
    domain: SampleDomain,
    rng: ChaCha8Rng,
}

impl PointSampler {
    pub fn new(domain: SampleDomain, seed: u64) -> Result<Self> {
        domain.validate()?;
        Ok(Self {
            domain,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn domain(&self) -> SampleDomain {
        self.domain
    }

    pub fn next_point(&mut self) -> Point {
        match self.domain {
            SampleDomain::Interval { lo, hi, dim } => {
                let c: Coords = (0..dim).map(|_| self.rng.gen_range(lo..=hi)).collect();
                Point::Real(c)
            }
            SampleDomain::Finite { size } => Point::Index(self.rng.gen_range(0..size)),
        }
    }

    pub fn points(&mut self, n: usize) -> Vec<Point> {
        (0..n).map(|_| self.next_point()).collect()
    }
}

/// Decades of scale covered by clustered triples: offsets range from
/// `span * 10^-CLUSTER_DECADES` up to `span`.
pub const CLUSTER_DECADES: f64 = 8.0;

/// Triples `(x, y, z)` with `x != y`; `z` is unconstrained.
///
/// On intervals, half of the triples are clustered: `y` and `z` sit at
/// log-uniformly scaled offsets from `x`, so tiny pairwise gaps are drawn as
/// often as large ones, and half of the clustered anchors sit at a
/// log-uniform distance from an end of the interval. Uniform draws alone
/// almost never produce either.
#[derive(Debug, Clone)]
pub struct TripleSampler {
    inner: PointSampler,
}

impl TripleSampler {
    pub fn new(domain: SampleDomain, seed: u64) -> Result<Self> {
        Ok(Self {
            inner: PointSampler::new(domain, seed)?,
        })
    }

    fn log_offset(&mut self, span: f64) -> f64 {
        span * libm::pow(10.0, -self.inner.rng.gen_range(0.0..=CLUSTER_DECADES))
    }

    fn anchor(&mut self, lo: f64, hi: f64) -> Point {
        if self.inner.rng.gen_bool(0.5) {
            return self.inner.next_point();
        }
        let SampleDomain::Interval { dim, .. } = self.inner.domain else {
            return self.inner.next_point();
        };
        let c: Coords = (0..dim)
            .map(|_| {
                let d = self.log_offset(hi - lo);
                if self.inner.rng.gen_bool(0.5) {
                    lo + d
                } else {
                    hi - d
                }
            })
            .collect();
        Point::Real(c)
    }

    fn near(&mut self, x: &Point, lo: f64, hi: f64) -> Point {
        let span = hi - lo;
        let Point::Real(c) = x else { return x.clone() };
        let rng = &mut self.inner.rng;
        let scale = span * libm::pow(10.0, -rng.gen_range(0.0..=CLUSTER_DECADES));
        let c: Coords = c
            .iter()
            .map(|v| {
                let step = if rng.gen_bool(0.5) { scale } else { -scale };
                let mut w = v + step * rng.gen_range(0.5..=1.0);
                if w > hi {
                    w = 2.0 * hi - w;
                }
                if w < lo {
                    w = 2.0 * lo - w;
                }
                w.clamp(lo, hi)
            })
            .collect();
        Point::Real(c)
    }

    pub fn next_triple(&mut self) -> [Point; 3] {
        let clustered = match self.inner.domain {
            SampleDomain::Interval { lo, hi, .. } => {
                self.inner.rng.gen_bool(0.5).then_some((lo, hi))
            }
            SampleDomain::Finite { .. } => None,
        };
        let x = match clustered {
            Some((lo, hi)) => self.anchor(lo, hi),
            None => self.inner.next_point(),
        };
        let draw = |s: &mut Self| match clustered {
            Some((lo, hi)) => s.near(&x, lo, hi),
            None => s.inner.next_point(),
        };
        let mut y = draw(self);
        while y == x {
            y = draw(self);
        }
        let z = draw(self);
        [x, y, z]
    }

    pub fn triples(&mut self, n: usize) -> Vec<[Point; 3]> {
        (0..n).map(|_| self.next_triple()).collect()
    }
}

impl Iterator for TripleSampler {
    type Item = [Point; 3];

    fn next(&mut self) -> Option<[Point; 3]> {
        Some(self.next_triple())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = TripleSampler::new(SampleDomain::DEFAULT, 7)
            .unwrap()
            .triples(50);
        let b = TripleSampler::new(SampleDomain::DEFAULT, 7)
            .unwrap()
            .triples(50);
        let c = TripleSampler::new(SampleDomain::DEFAULT, 8)
            .unwrap()
            .triples(50);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn triples_respect_domain_and_distinctness() {
        let dom = SampleDomain::Finite { size: 2 };
        for [x, y, z] in TripleSampler::new(dom, 1).unwrap().take(200) {
            assert_ne!(x, y);
            assert!(dom.carrier().contains(&z));
        }
        let dom = SampleDomain::Interval {
            lo: -1.0,
            hi: 2.0,
            dim: 2,
        };
        for t in TripleSampler::new(dom, 3).unwrap().take(200) {
            for p in &t {
                assert!(p
                    .as_coords()
                    .unwrap()
                    .iter()
                    .all(|v| (-1.0..=2.0).contains(v)));
            }
        }
    }

    #[test]
    fn clustered_triples_reach_small_gaps() {
        let dom = SampleDomain::DEFAULT;
        let mut small = 0;
        for [x, y, z] in TripleSampler::new(dom, 0).unwrap().take(2000) {
            let (x, y, z) = (
                x.as_real().unwrap(),
                y.as_real().unwrap(),
                z.as_real().unwrap(),
            );
            assert!([x, y, z].iter().all(|v| (0.0..=100.0).contains(v)));
            if (x - y).abs().max((y - z).abs()).max((x - z).abs()) < 0.1 {
                small += 1;
            }
        }
        // about a quarter of the clustered half lands below 0.1
        assert!(small > 100, "{small}");
        let near_lo = TripleSampler::new(dom, 0)
            .unwrap()
            .take(2000)
            .filter(|t| t.iter().all(|p| p.as_real().unwrap() < 0.05))
            .count();
        assert!(near_lo > 50, "{near_lo}");
    }

    #[test]
    fn rejects_degenerate_domains() {
        assert!(PointSampler::new(SampleDomain::Finite { size: 1 }, 0).is_err());
        assert!(PointSampler::new(
            SampleDomain::Interval {
                lo: 1.0,
                hi: 1.0,
                dim: 1
            },
            0
        )
        .is_err());
        assert!(PointSampler::new(
            SampleDomain::Interval {
                lo: 0.0,
                hi: f64::NAN,
                dim: 1
            },
            0
        )
        .is_err());
    }
}
