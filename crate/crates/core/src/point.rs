//! Points and carriers.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Tolerance;

/// Coordinates of a real point; one- and two-dimensional points stay inline.
pub type Coords = SmallVec<[f64; 2]>;

/// An element of a carrier: either a finite real tuple or an index into a
/// finite set. A space never mixes the two kinds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Point {
    Index(usize),
    Real(Coords),
}

impl Point {
    /// A one-dimensional real point. Panics on NaN or infinity.
    pub fn real(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite coordinate {x}");
        Point::Real(smallvec::smallvec![x])
    }

    pub fn coords(values: &[f64]) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(Point::Real(values.iter().copied().collect()))
    }

    pub fn index(i: usize) -> Self {
        Point::Index(i)
    }

    /// The single coordinate of a one-dimensional real point.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Point::Real(c) if c.len() == 1 => Some(c[0]),
            _ => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(*i),
            Point::Real(_) => None,
        }
    }

    pub fn as_coords(&self) -> Option<&[f64]> {
        match self {
            Point::Real(c) => Some(c),
            Point::Index(_) => None,
        }
    }

    /// Equality in the comparison regime of the point kind: exact for
    /// indices, coordinate-wise within the tolerance for reals.
    pub fn same_as(&self, other: &Point, tol: &Tolerance) -> bool {
        match (self, other) {
            (Point::Index(a), Point::Index(b)) => a == b,
            (Point::Real(a), Point::Real(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b.iter()).all(|(x, y)| {
                        libm::fabs(x - y) <= tol.slack_for(libm::fabs(*x) + libm::fabs(*y))
                    })
            }
            _ => false,
        }
    }

    /// Negation of [`Point::same_as`]; the guard used for `x != y` quantifiers.
    pub fn distinct_from(&self, other: &Point, tol: &Tolerance) -> bool {
        !self.same_as(other, tol)
    }

    /// Canonical total order: indices before reals, then lexicographic.
    pub fn canonical_cmp(&self, other: &Point) -> Ordering {
        match (self, other) {
            (Point::Index(a), Point::Index(b)) => a.cmp(b),
            (Point::Index(_), Point::Real(_)) => Ordering::Less,
            (Point::Real(_), Point::Index(_)) => Ordering::Greater,
            (Point::Real(a), Point::Real(b)) => {
                for (x, y) in a.iter().zip(b.iter()) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "#{i}"),
            Point::Real(c) if c.len() == 1 => write!(f, "{}", c[0]),
            Point::Real(c) => {
                f.write_str("(")?;
                for (k, v) in c.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Lexicographic comparison of point tuples.
pub fn cmp_points(a: &[Point], b: &[Point]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.canonical_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// The point domain of a space or map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Carrier {
    /// Real tuples of a fixed dimension.
    Real { dim: usize },
    /// The indices `0..size`.
    Finite { size: usize },
}

impl Carrier {
    pub fn is_finite(&self) -> bool {
        matches!(self, Carrier::Finite { .. })
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (Carrier::Real { dim }, Point::Real(c)) => {
                c.len() == *dim && c.iter().all(|v| v.is_finite())
            }
            (Carrier::Finite { size }, Point::Index(i)) => i < size,
            _ => false,
        }
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain {
                point: format!("{p}"),
                carrier: format!("{self}"),
            })
        }
    }

    /// Every point of a finite carrier, in index order.
    pub fn points(&self) -> Option<Vec<Point>> {
        match self {
            Carrier::Finite { size } => Some((0..*size).map(Point::Index).collect()),
            Carrier::Real { .. } => None,
        }
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Carrier::Real { dim } => write!(f, "R^{dim}"),
            Carrier::Finite { size } => write!(f, "{{0..{size}}}"),
        }
    }
}
