use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::BoxDomain;
use crate::scalar::Scalar;

/// A `p`-tuple of points of `R^d` (or `C^d`, realified in the box) with
/// diagonal-proximity metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PointConfiguration<T = f64> {
    points: Vec<Vec<T>>,
    #[serde(rename = "box")]
    bbox: BoxDomain,
    min_gap: f64,
}

impl<T: Scalar> PointConfiguration<T> {
    /// Uses the bounding box of the points.
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        Self::check_points(&points)?;
        let bbox = BoxDomain::bounding(&points.iter().map(|x| realify(x)).collect::<Vec<_>>())?;
        Ok(Self::assemble(points, bbox))
    }

    /// Fails unless every point lies in `bbox` (realified for complex points).
    pub fn with_box(points: Vec<Vec<T>>, bbox: BoxDomain) -> Result<Self> {
        Self::check_points(&points)?;
        for x in &points {
            let rx = realify(x);
            if rx.len() != bbox.dim() {
                return Err(Error::DimensionMismatch {
                    expected: bbox.dim(),
                    found: rx.len(),
                });
            }
            if !bbox.contains(&rx) {
                return Err(Error::InvalidArgument(format!(
                    "point {x:?} lies outside the box"
                )));
            }
        }
        Ok(Self::assemble(points, bbox))
    }

    fn check_points(points: &[Vec<T>]) -> Result<()> {
        let first = points.first().ok_or_else(|| {
            Error::InvalidArgument("configuration needs at least one point".into())
        })?;
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidArgument(
                "points must have dimension at least 1".into(),
            ));
        }
        if let Some(bad) = points.iter().find(|x| x.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        if points
            .iter()
            .flatten()
            .any(|v| !v.re().is_finite() || !v.im().is_finite())
        {
            return Err(Error::InvalidArgument(
                "configuration has non-finite coordinates".into(),
            ));
        }
        Ok(())
    }

    fn assemble(points: Vec<Vec<T>>, bbox: BoxDomain) -> Self {
        let mut min_gap = f64::INFINITY;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                min_gap = min_gap.min(distance(&points[i], &points[j]));
            }
        }
        PointConfiguration {
            points,
            bbox,
            min_gap,
        }
    }

    /// Number of points `p`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ambient dimension `d` (complex dimension for complex points).
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    pub fn bbox(&self) -> &BoxDomain {
        &self.bbox
    }

    /// Smallest pairwise distance; `+∞` for a single point.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Whether two points coincide.
    pub fn on_diagonal(&self) -> bool {
        self.min_gap == 0.0
    }

    /// The `(p+1)`-tuple `(x, x_k)` for `k ∈ 1..=p`.
    pub fn augmented(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidArgument(format!(
                "augmented index {k} outside 1..={}",
                self.len()
            )));
        }
        let mut points = self.points.clone();
        points.push(self.points[k - 1].clone());
        Ok(Self::assemble(points, self.bbox.clone()))
    }

    /// Points reordered as `x_{perm[0]}, x_{perm[1]}, …`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len()
            || perm
                .iter()
                .any(|&i| i >= self.len() || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{}",
                self.len()
            )));
        }
        let points = perm.iter().map(|&i| self.points[i].clone()).collect();
        Ok(Self::assemble(points, self.bbox.clone()))
    }
}

impl PointConfiguration<f64> {
    /// Same configuration with points sorted lexicographically, together with
    /// the permutation applied (`sorted[i] = original[perm[i]]`).
    pub fn canonical(&self) -> (Self, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.len()).collect();
        perm.sort_by(|&a, &b| {
            self.points[a]
                .iter()
                .zip(&self.points[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        (self.permuted(&perm).expect("valid permutation"), perm)
    }
}

pub(crate) fn realify<T: Scalar>(x: &[T]) -> Vec<f64> {
    if T::IS_COMPLEX {
        x.iter()
            .map(|v| v.re())
            .chain(x.iter().map(|v| v.im()))
            .collect()
    } else {
        x.iter().map(|v| v.re()).collect()
    }
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).modulus().powi(2))
        .sum::<f64>()
        .sqrt()
}
