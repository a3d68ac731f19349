use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest window the library accepts.
pub const MIN_WINDOW_LEN: usize = 8;

/// How sequences are continued past the ends of a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
#[derive(Default)]
pub enum BoundaryMode {
    /// Zero outside the window.
    #[default]
    PadZero,
    /// Wraparound with period N.
    Periodic,
    /// Nearest stored edge value outside; the outer `band` sites on each side
    /// are held fixed by the integrator.
    FrozenEdges { band: usize },
}


/// A finite stretch `n_min..=n_max` of the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeWindow {
    n_min: i64,
    n_max: i64,
    boundary: BoundaryMode,
}

impl LatticeWindow {
    pub fn new(n_min: i64, n_max: i64, boundary: BoundaryMode) -> Result<Self> {
        if n_min >= n_max {
            return Err(Error::Validation(format!(
                "window requires n_min < n_max, got [{n_min}, {n_max}]"
            )));
        }
        let len = (n_max - n_min + 1) as usize;
        if len < MIN_WINDOW_LEN {
            return Err(Error::Validation(format!(
                "window length {len} is below the minimum of {MIN_WINDOW_LEN}"
            )));
        }
        if let BoundaryMode::FrozenEdges { band } = boundary {
            if band == 0 || 2 * band >= len {
                return Err(Error::Validation(format!(
                    "frozen edge band {band} must be in 1..{}",
                    len.div_ceil(2)
                )));
            }
        }
        Ok(Self {
            n_min,
            n_max,
            boundary,
        })
    }

    /// Window of `len` sites centred on the origin, `[-(len-1)/2, len/2]`.
    pub fn centered(len: usize, boundary: BoundaryMode) -> Result<Self> {
        let half = (len as i64 - 1) / 2;
        Self::new(-half, len as i64 - 1 - half, boundary)
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sites(&self) -> std::ops::RangeInclusive<i64> {
        self.n_min..=self.n_max
    }

    pub fn contains(&self, site: i64) -> bool {
        (self.n_min..=self.n_max).contains(&site)
    }

    pub fn index_of(&self, site: i64) -> Option<usize> {
        self.contains(site).then(|| (site - self.n_min) as usize)
    }

    pub fn site_at(&self, index: usize) -> i64 {
        self.n_min + index as i64
    }

    /// Same sites, different continuation rule.
    pub fn with_boundary(&self, boundary: BoundaryMode) -> Result<Self> {
        Self::new(self.n_min, self.n_max, boundary)
    }

    /// True when both windows cover the same sites (boundary modes may differ).
    pub fn same_sites(&self, other: &LatticeWindow) -> bool {
        self.n_min == other.n_min && self.n_max == other.n_max
    }

    /// Extends by `floor(N/2)` sites on each side: 201 sites become 401, 128 become 256.
    pub fn doubled(&self) -> Self {
        let pad = (self.len() / 2) as i64;
        Self {
            n_min: self.n_min - pad,
            n_max: self.n_max + pad,
            boundary: self.boundary,
        }
    }

    /// Sites at distance at least `margin` from both ends.
    pub fn interior(&self, margin: usize) -> std::ops::RangeInclusive<i64> {
        let m = margin as i64;
        (self.n_min + m)..=(self.n_max - m)
    }

    /// The middle half of the window.
    pub fn middle_half(&self) -> std::ops::RangeInclusive<i64> {
        self.interior(self.len() / 4)
    }

    /// Maps an arbitrary site to a storage index according to the boundary mode.
    /// `None` means the value is zero (pad_zero outside the window).
    pub(crate) fn resolve(&self, site: i64) -> Option<usize> {
        self.resolve_as(site, self.boundary)
    }

    pub(crate) fn resolve_as(&self, site: i64, mode: BoundaryMode) -> Option<usize> {
        if let Some(i) = self.index_of(site) {
            return Some(i);
        }
        match mode {
            BoundaryMode::PadZero => None,
            BoundaryMode::Periodic => {
                Some((site - self.n_min).rem_euclid(self.len() as i64) as usize)
            }
            BoundaryMode::FrozenEdges { .. } => {
                Some(if site < self.n_min { 0 } else { self.len() - 1 })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_inverted_windows() {
        assert!(LatticeWindow::new(0, 6, BoundaryMode::PadZero).is_err());
        assert!(LatticeWindow::new(5, 5, BoundaryMode::PadZero).is_err());
        assert!(LatticeWindow::new(3, -3, BoundaryMode::PadZero).is_err());
        assert!(LatticeWindow::new(0, 7, BoundaryMode::PadZero).is_ok());
    }

    #[test]
    fn frozen_band_must_fit() {
        assert!(LatticeWindow::new(0, 9, BoundaryMode::FrozenEdges { band: 0 }).is_err());
        assert!(LatticeWindow::new(0, 9, BoundaryMode::FrozenEdges { band: 5 }).is_err());
        assert!(LatticeWindow::new(0, 9, BoundaryMode::FrozenEdges { band: 2 }).is_ok());
    }

    #[test]
    fn doubling_matches_reported_sizes() {
        let w = LatticeWindow::centered(201, BoundaryMode::PadZero).unwrap();
        assert_eq!((w.n_min(), w.n_max()), (-100, 100));
        assert_eq!(w.doubled().len(), 401);
        let w = LatticeWindow::centered(128, BoundaryMode::Periodic).unwrap();
        assert_eq!((w.n_min(), w.n_max()), (-63, 64));
        assert_eq!(w.doubled().len(), 256);
    }

    #[test]
    fn resolve_follows_mode() {
        let pad = LatticeWindow::new(0, 9, BoundaryMode::PadZero).unwrap();
        assert_eq!(pad.resolve(-1), None);
        let per = pad.with_boundary(BoundaryMode::Periodic).unwrap();
        assert_eq!(per.resolve(-1), Some(9));
        assert_eq!(per.resolve(23), Some(3));
        let fro = pad.with_boundary(BoundaryMode::FrozenEdges { band: 1 }).unwrap();
        assert_eq!(fro.resolve(-4), Some(0));
        assert_eq!(fro.resolve(14), Some(9));
    }
}
