use crate::error::{Error, Result};
use crate::gaussfield::SamplePath;
use crate::kergin::VectorJet;
use crate::polyalg::MultiIndex;
use crate::region::BoxDomain;

/// Values and Jacobians of a field `R^d → R^m` at the nodes of a tensor grid.
///
/// Nodes are numbered row-major with the first axis slowest. The Jacobian
/// entry `∂_v F_i` at node `n` sits at `(n·m + i)·d + v`.
#[derive(Clone, Debug)]
pub struct GridSample {
    axes: Vec<Vec<f64>>,
    shape: Vec<usize>,
    codim: usize,
    values: Vec<f64>,
    jac: Vec<f64>,
}

/// Equally spaced nodes covering the box with cells no wider than `spacing`.
pub fn grid_axes(bbox: &BoxDomain, spacing: f64) -> Result<Vec<Vec<f64>>> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "grid spacing must be positive, got {spacing}"
        )));
    }
    bbox.lo()
        .iter()
        .zip(bbox.hi())
        .map(|(&lo, &hi)| {
            let w = hi - lo;
            if !(w > 0.0) {
                return Err(Error::InvalidArgument(
                    "counting box must have positive widths".into(),
                ));
            }
            let cells = (w / spacing).ceil().max(1.0) as usize;
            Ok((0..=cells)
                .map(|j| {
                    if j == cells {
                        hi
                    } else {
                        lo + w * j as f64 / cells as f64
                    }
                })
                .collect())
        })
        .collect()
}

impl GridSample {
    fn empty(axes: Vec<Vec<f64>>, codim: usize) -> Self {
        let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
        let n: usize = shape.iter().product();
        let d = axes.len();
        GridSample {
            axes,
            shape,
            codim,
            values: vec![0.0; n * codim],
            jac: vec![0.0; n * codim * d],
        }
    }

    /// Pointwise first-order jets of `f` at every node.
    pub fn from_field<F: VectorJet<f64> + ?Sized>(f: &F, axes: Vec<Vec<f64>>) -> Result<Self> {
        let d = axes.len();
        if f.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: f.dim(),
            });
        }
        if f.order() < 1 {
            return Err(Error::JetOrderTooLow {
                required: 1,
                available: f.order(),
            });
        }
        let m = f.codim();
        let mut g = Self::empty(axes, m);
        for node in 0..g.len() {
            let x = g.point(node);
            let jets = f.jets(&x, 1);
            for (i, jet) in jets.iter().enumerate() {
                g.values[node * m + i] = jet[0];
                g.jac[(node * m + i) * d..(node * m + i + 1) * d].copy_from_slice(&jet[1..=d]);
            }
        }
        Ok(g)
    }

    /// Values and Jacobians of every component of a sample path, by tensor
    /// contraction.
    pub fn from_path(path: &SamplePath, axes: Vec<Vec<f64>>) -> Result<Self> {
        let d = axes.len();
        if path.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: path.dim(),
            });
        }
        let m = path.codim();
        let jets = path.grid_jets(&axes, 1);
        let mut g = Self::empty(axes, m);
        for node in 0..g.len() {
            for i in 0..m {
                g.values[node * m + i] = jets.values[i][0][node];
                for v in 0..d {
                    g.jac[(node * m + i) * d + v] = jets.values[i][1 + v][node];
                }
            }
        }
        Ok(g)
    }

    /// The gradient of component `c` of a sample path, with its Hessian as
    /// Jacobian.
    pub fn from_path_gradient(path: &SamplePath, c: usize, axes: Vec<Vec<f64>>) -> Result<Self> {
        let d = axes.len();
        if path.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: path.dim(),
            });
        }
        if c >= path.codim() {
            return Err(Error::InvalidArgument(format!(
                "component {c} out of range"
            )));
        }
        let jets = path.grid_jets(&axes, 2);
        let vals = &jets.values[c];
        let mut g = Self::empty(axes, d);
        for i in 0..d {
            let ei = MultiIndex::unit(d, i);
            let first = ei.rank();
            for v in 0..d {
                let second = ei.with_increment(v).rank();
                for node in 0..g.len() {
                    if v == 0 {
                        g.values[node * d + i] = vals[first][node];
                    }
                    g.jac[(node * d + i) * d + v] = vals[second][node];
                }
            }
        }
        Ok(g)
    }

    /// Appends the components of `other`, sampled on the same grid.
    pub fn stack(self, other: &GridSample) -> Result<Self> {
        if self.axes != other.axes {
            return Err(Error::InvalidArgument(
                "stacked grid samples must share their axes".into(),
            ));
        }
        let d = self.axes.len();
        let (m1, m2) = (self.codim, other.codim);
        let m = m1 + m2;
        let mut g = Self::empty(self.axes.clone(), m);
        for node in 0..g.len() {
            g.values[node * m..node * m + m1]
                .copy_from_slice(&self.values[node * m1..(node + 1) * m1]);
            g.values[node * m + m1..(node + 1) * m]
                .copy_from_slice(&other.values[node * m2..(node + 1) * m2]);
            g.jac[node * m * d..(node * m + m1) * d]
                .copy_from_slice(&self.jac[node * m1 * d..(node + 1) * m1 * d]);
            g.jac[(node * m + m1) * d..(node + 1) * m * d]
                .copy_from_slice(&other.jac[node * m2 * d..(node + 1) * m2 * d]);
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn codim(&self) -> usize {
        self.codim
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid multi-index of a node.
    pub fn unflatten(&self, mut node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for i in (0..self.shape.len()).rev() {
            idx[i] = node % self.shape[i];
            node /= self.shape[i];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn point(&self, node: usize) -> Vec<f64> {
        self.unflatten(node)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a[i])
            .collect()
    }

    pub fn values(&self, node: usize) -> &[f64] {
        &self.values[node * self.codim..(node + 1) * self.codim]
    }

    /// Row-major `(m × d)` Jacobian at a node.
    pub fn jacobian(&self, node: usize) -> &[f64] {
        let w = self.codim * self.dim();
        &self.jac[node * w..(node + 1) * w]
    }

    /// Largest `|F_i|` over the nodes.
    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of cells, `Π (n_i − 1)`.
    pub fn cell_count(&self) -> usize {
        self.shape.iter().map(|n| n.saturating_sub(1)).product()
    }

    /// Lower corner of each cell, as a grid multi-index.
    pub(crate) fn cell_origin(&self, mut cell: usize) -> Vec<usize> {
        let cells: Vec<usize> = self.shape.iter().map(|n| n - 1).collect();
        let mut idx = vec![0; cells.len()];
        for i in (0..cells.len()).rev() {
            idx[i] = cell % cells[i];
            cell /= cells[i];
        }
        idx
    }

    /// Node numbers of the `2^d` corners of a cell.
    pub(crate) fn cell_corners(&self, cell: usize) -> Vec<usize> {
        let origin = self.cell_origin(cell);
        let d = origin.len();
        (0..1usize << d)
            .map(|mask| {
                let idx: Vec<usize> = (0..d).map(|i| origin[i] + ((mask >> i) & 1)).collect();
                self.flatten(&idx)
            })
            .collect()
    }

    /// Lower and upper corners of a cell in coordinates.
    pub(crate) fn cell_bounds(&self, cell: usize) -> (Vec<f64>, Vec<f64>) {
        let origin = self.cell_origin(cell);
        let lo = origin.iter().zip(&self.axes).map(|(&i, a)| a[i]).collect();
        let hi = origin
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a[i + 1])
            .collect();
        (lo, hi)
    }

    /// Largest cell width.
    pub fn spacing(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|a| a.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }
}
