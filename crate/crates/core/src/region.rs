use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compact axis-aligned box `[lo_1, hi_1] × … × [lo_d, hi_d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidArgument(
                "box must have dimension at least 1".into(),
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "invalid box bounds {lo:?} / {hi:?}"
            )));
        }
        Ok(BoxDomain { lo, hi })
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            intervals.iter().map(|i| i.0).collect(),
            intervals.iter().map(|i| i.1).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    pub fn diameter(&self) -> f64 {
        self.widths().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Largest squared distance from the center to a point of the box.
    pub fn squared_radius(&self) -> f64 {
        self.widths().iter().map(|w| 0.25 * w * w).sum()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_margin(x, 0.0)
    }

    pub fn contains_with_margin(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= a - margin && *v <= b + margin)
    }

    /// Maps a point of the unit cube `[0,1]^d` into the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(t, (a, b))| a + t * (b - a))
            .collect()
    }

    /// Smallest box containing all points.
    pub fn bounding(points: &[Vec<f64>]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("no points".into()))?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in points {
            if p.len() != lo.len() {
                return Err(Error::DimensionMismatch {
                    expected: lo.len(),
                    found: p.len(),
                });
            }
            for i in 0..p.len() {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Self::new(lo, hi)
    }
}
