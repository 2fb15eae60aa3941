//! Conditioning sets and event sets.
//!
//! Half-spaces and shells constrain the leading `normal.len()` coordinates of
//! a point `(x, y)`; boxes constrain the leading `lower.len()` coordinates.
//! On a grid, the interior of a set is approximated by requiring a point and
//! all of its `2k` axis neighbours to be members.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LdpError, Result};
use crate::field::DomainFn;
use crate::grid::Grid;

/// Which version of a set a membership query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Raw,
    Interior,
    Closure,
}

/// Explicit membership on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMask {
    grid: Grid,
    members: Arc<[bool]>,
}

impl GridMask {
    pub fn new(grid: Grid, members: Vec<bool>) -> Result<Self> {
        if members.len() != grid.len() {
            return Err(LdpError::DimensionMismatch {
                expected: grid.len(),
                found: members.len(),
            });
        }
        Ok(Self {
            grid,
            members: members.into(),
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> bool) -> Self {
        let members = grid.points().map(|p| f(&p)).collect::<Vec<_>>();
        Self {
            grid,
            members: members.into(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn member(&self, point: &[f64]) -> bool {
        let k = self.grid.dim().min(point.len());
        self.grid
            .node_of(&point[..k])
            .is_some_and(|i| self.members[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Whole,
    /// `normal · (x - anchor) >= 0`.
    HalfSpace { normal: Vec<f64>, anchor: Vec<f64> },
    /// `0 <= normal · (x - anchor) < thickness`.
    Shell {
        normal: Vec<f64>,
        anchor: Vec<f64>,
        thickness: f64,
    },
    /// Coordinate box; `None` bounds are unbounded.
    Box {
        lower: Vec<Option<f64>>,
        upper: Vec<Option<f64>>,
    },
    #[serde(skip)]
    Mask(GridMask),
}

fn only_first(normal: &[f64]) -> bool {
    !normal.is_empty() && normal[1..].iter().all(|c| *c == 0.0)
}

fn affine(normal: &[f64], anchor: &[f64], p: &[f64]) -> f64 {
    normal
        .iter()
        .zip(anchor)
        .zip(p)
        .map(|((n, a), x)| n * (x - a))
        .sum()
}

impl Region {
    fn check(&self, p: &[f64], strict: bool, closed: bool) -> bool {
        match self {
            Region::Whole => true,
            Region::HalfSpace { normal, anchor } => {
                let s = affine(normal, anchor, p);
                if strict {
                    s > 0.0
                } else {
                    s >= 0.0
                }
            }
            Region::Shell {
                normal,
                anchor,
                thickness,
            } => {
                let s = affine(normal, anchor, p);
                if strict {
                    s > 0.0 && s < *thickness
                } else if closed {
                    s >= 0.0 && s <= *thickness
                } else {
                    s >= 0.0 && s < *thickness
                }
            }
            Region::Box { lower, upper } => {
                lower.iter().zip(upper).zip(p).all(|((lo, hi), &x)| {
                    let above = lo.is_none_or(|l| if strict { x > l } else { x >= l });
                    let below = hi.is_none_or(|h| if strict { x < h } else { x <= h });
                    above && below
                })
            }
            Region::Mask(m) => m.member(p),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.check(p, false, false)
    }

    /// One-dimensional interval of the first coordinate, when the region
    /// constrains nothing else.
    pub fn x_interval(&self) -> Option<Interval> {
        match self {
            Region::Whole => Some(Interval::REAL),
            Region::HalfSpace { normal, anchor } if only_first(normal) => {
                let (c, a) = (normal[0], anchor[0]);
                Some(if c > 0.0 {
                    Interval::new(a, f64::INFINITY, true, false)
                } else if c < 0.0 {
                    Interval::new(f64::NEG_INFINITY, a, false, true)
                } else {
                    Interval::REAL
                })
            }
            Region::Shell {
                normal,
                anchor,
                thickness,
            } if only_first(normal) => {
                let (c, a) = (normal[0], anchor[0]);
                Some(if c > 0.0 {
                    Interval::new(a, a + thickness / c, true, false)
                } else if c < 0.0 {
                    Interval::new(a + thickness / c, a, false, true)
                } else {
                    Interval::REAL
                })
            }
            Region::Box { lower, upper } => {
                if lower.iter().skip(1).chain(upper.iter().skip(1)).any(Option::is_some) {
                    return None;
                }
                let lo = lower.first().copied().flatten();
                let hi = upper.first().copied().flatten();
                Some(Interval::new(
                    lo.unwrap_or(f64::NEG_INFINITY),
                    hi.unwrap_or(f64::INFINITY),
                    lo.is_some(),
                    hi.is_some(),
                ))
            }
            _ => None,
        }
    }
}

/// Interval of the real line with explicit endpoint closedness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const REAL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_closed: false,
        hi_closed: false,
    };

    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Self {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn closure(&self) -> Interval {
        Interval::new(self.lo, self.hi, true, true)
    }

    pub fn interior(&self) -> Interval {
        Interval::new(self.lo, self.hi, false, false)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }

    /// Closest point of the closure to `x`.
    pub fn project(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// The conditioning set `B`: a region intersected with an effective domain.
#[derive(Clone)]
pub struct ConditioningSet {
    region: Region,
    domain: Option<Arc<DomainFn>>,
    degenerate: bool,
}

impl fmt::Debug for ConditioningSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConditioningSet")
            .field("region", &self.region)
            .field("has_domain", &self.domain.is_some())
            .field("degenerate", &self.degenerate)
            .finish()
    }
}

impl ConditioningSet {
    pub fn new(region: Region) -> Result<Self> {
        let degenerate = match &region {
            Region::HalfSpace { normal, anchor } | Region::Shell { normal, anchor, .. } => {
                if normal.len() != anchor.len() {
                    return Err(LdpError::DimensionMismatch {
                        expected: normal.len(),
                        found: anchor.len(),
                    });
                }
                normal.iter().all(|&c| c == 0.0)
            }
            _ => false,
        };
        if let Region::Shell { thickness, .. } = &region {
            if thickness.is_nan() || *thickness <= 0.0 {
                return Err(LdpError::InvalidParameter(format!(
                    "shell thickness must be positive, got {thickness}"
                )));
            }
        }
        if let Region::Box { lower, upper } = &region {
            if lower.len() != upper.len() {
                return Err(LdpError::DimensionMismatch {
                    expected: lower.len(),
                    found: upper.len(),
                });
            }
        }
        Ok(Self {
            region,
            domain: None,
            degenerate,
        })
    }

    pub fn whole() -> Self {
        Self {
            region: Region::Whole,
            domain: None,
            degenerate: false,
        }
    }

    pub fn mask(mask: GridMask) -> Self {
        Self {
            region: Region::Mask(mask),
            domain: None,
            degenerate: false,
        }
    }

    /// Intersects with an effective-domain predicate.
    pub fn with_domain<D>(mut self, domain: D) -> Self
    where
        D: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        self.domain = Some(Arc::new(domain));
        self
    }

    pub fn with_shared_domain(mut self, domain: Arc<DomainFn>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Zero normal: the set is the whole effective domain.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    fn in_domain(&self, p: &[f64]) -> bool {
        self.domain.as_ref().is_none_or(|d| d(p))
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.region.contains(p) && self.in_domain(p)
    }

    pub fn closure_contains(&self, p: &[f64]) -> bool {
        self.region.check(p, false, true) && self.in_domain(p)
    }

    fn strict_contains(&self, p: &[f64]) -> bool {
        let strict = !self.degenerate && !matches!(self.region, Region::Mask(_));
        self.region.check(p, strict, false) && self.in_domain(p)
    }

    /// Membership of every node of `grid` in the requested version of the set.
    pub fn membership_on_grid(&self, grid: &Grid, mode: Mode) -> Vec<bool> {
        let n = grid.len();
        let mut p = vec![0.0; grid.dim()];
        match mode {
            Mode::Raw => (0..n)
                .map(|i| {
                    grid.point_into(i, &mut p);
                    self.contains(&p)
                })
                .collect(),
            Mode::Closure => (0..n)
                .map(|i| {
                    grid.point_into(i, &mut p);
                    self.closure_contains(&p)
                })
                .collect(),
            Mode::Interior => {
                let raw = self.membership_on_grid(grid, Mode::Raw);
                let mut q = vec![0.0; grid.dim()];
                (0..n)
                    .map(|i| {
                        grid.point_into(i, &mut p);
                        if !self.strict_contains(&p) {
                            return false;
                        }
                        (0..grid.dim()).all(|k| {
                            let (lo, hi) = grid.neighbors(i, k);
                            if matches!(self.region, Region::Mask(_)) {
                                return lo.is_some_and(|j| raw[j]) && hi.is_some_and(|j| raw[j]);
                            }
                            let h = grid.step(k);
                            [(lo, -h), (hi, h)].iter().all(|&(nb, dx)| {
                                match nb {
                                    Some(j) => grid.point_into(j, &mut q),
                                    None => {
                                        q.copy_from_slice(&p);
                                        q[k] += dx;
                                    }
                                }
                                self.contains(&q)
                            })
                        })
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(normal: f64, anchor: f64) -> ConditioningSet {
        ConditioningSet::new(Region::HalfSpace {
            normal: vec![normal],
            anchor: vec![anchor],
        })
        .unwrap()
    }

    #[test]
    fn half_space_boundary_is_member() {
        let b = half(1.0, 1.0);
        assert!(b.contains(&[1.5]));
        assert!(!b.contains(&[0.5]));
        assert!(b.contains(&[1.0]));
    }

    #[test]
    fn shell_is_half_open() {
        let b = ConditioningSet::new(Region::Shell {
            normal: vec![1.0],
            anchor: vec![0.5],
            thickness: 0.25,
        })
        .unwrap();
        assert!(b.contains(&[0.7]));
        assert!(!b.contains(&[0.8]));
        assert!(b.contains(&[0.5]));
        assert!(!b.contains(&[0.75]));
        assert!(b.closure_contains(&[0.75]));
    }

    #[test]
    fn zero_normal_is_flagged_and_whole() {
        let b = half(0.0, 3.0).with_domain(|p| p[0] >= 0.0);
        assert!(b.is_degenerate());
        assert!(b.contains(&[-0.0]));
        assert!(b.contains(&[100.0]));
        assert!(!b.contains(&[-1.0]));
        let g = Grid::line(-1.0, 1.0, 21).unwrap();
        let interior = b.membership_on_grid(&g, Mode::Interior);
        assert!(interior[15]);
        assert!(!interior[10]);
    }

    #[test]
    fn interior_needs_member_neighbours() {
        let b = half(1.0, 0.0);
        let g = Grid::line(-1.0, 1.0, 5).unwrap();
        assert_eq!(b.membership_on_grid(&g, Mode::Raw), [false, false, true, true, true]);
        assert_eq!(
            b.membership_on_grid(&g, Mode::Interior),
            [false, false, false, true, true]
        );
    }

    #[test]
    fn mask_interior_uses_grid_neighbours() {
        let g = Grid::line(0.0, 1.0, 6).unwrap();
        let m = GridMask::new(g.clone(), vec![false, true, true, true, false, true]).unwrap();
        let b = ConditioningSet::mask(m);
        assert_eq!(
            b.membership_on_grid(&g, Mode::Interior),
            [false, false, true, false, false, false]
        );
    }

    #[test]
    fn intervals() {
        let b = Region::HalfSpace {
            normal: vec![0.5],
            anchor: vec![0.5],
        }
        .x_interval()
        .unwrap();
        let a = Region::HalfSpace {
            normal: vec![-1.0],
            anchor: vec![0.0],
        }
        .x_interval()
        .unwrap();
        assert!(a.intersect(&b).is_empty());
        let s = Region::Shell {
            normal: vec![2.0],
            anchor: vec![1.0],
            thickness: 0.1,
        }
        .x_interval()
        .unwrap();
        assert_eq!((s.lo, s.hi, s.lo_closed, s.hi_closed), (1.0, 1.05, true, false));
        let touch = Interval::new(f64::NEG_INFINITY, 1.0, false, true).intersect(&s);
        assert!(!touch.is_empty());
        assert!(touch.interior().is_empty());
        assert!(Region::Box {
            lower: vec![None, Some(1.0)],
            upper: vec![None, None]
        }
        .x_interval()
        .is_none());
        let padded = Region::HalfSpace {
            normal: vec![1.0, 0.0],
            anchor: vec![1.25, 3.0],
        }
        .x_interval()
        .unwrap();
        assert_eq!((padded.lo, padded.hi), (1.25, f64::INFINITY));
        assert!(Region::HalfSpace {
            normal: vec![1.0, 1.0],
            anchor: vec![0.0, 0.0]
        }
        .x_interval()
        .is_none());
    }
}
