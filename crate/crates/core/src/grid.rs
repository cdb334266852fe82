// SPDX-License-Identifier: Apache-2.0

//! Uniform tensor grids centred on the base point, with storage order
//! "first axis fastest".

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("axis x{label}: point count {points} must be odd and at least 3")]
    Points { label: usize, points: usize },
    #[error("axis x{label}: half-width {half_width} must be positive and finite")]
    HalfWidth { label: usize, half_width: f64 },
    #[error("axis labels {0:?} must be strictly increasing")]
    Labels(Vec<usize>),
    #[error("grid has {got} axes, expected {want}")]
    Dimension { got: usize, want: usize },
    #[error("x{0} is not an axis of this grid")]
    NoSuchAxis(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub label: usize,
    pub center: f64,
    pub half_width: f64,
    pub points: usize,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn mid(&self) -> usize {
        self.points / 2
    }

    pub fn coordinate(&self, k: usize) -> f64 {
        self.center + (k as f64 - self.mid() as f64) * self.spacing()
    }
}

/// A box grid. A grid with no axes has exactly one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Grid, GridError> {
        for a in &axes {
            if a.points < 3 || a.points % 2 == 0 {
                return Err(GridError::Points { label: a.label, points: a.points });
            }
            if !(a.half_width > 0.0 && a.half_width.is_finite()) || !a.center.is_finite() {
                return Err(GridError::HalfWidth { label: a.label, half_width: a.half_width });
            }
        }
        let labels: Vec<usize> = axes.iter().map(|a| a.label).collect();
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GridError::Labels(labels));
        }
        Ok(Grid { axes })
    }

    /// Grid over the given labels and centres with per-axis half-widths and point counts.
    pub fn build(labels: &[usize], centers: &[f64], half_widths: &[f64], points: &[usize]) -> Result<Grid, GridError> {
        let n = labels.len();
        for len in [centers.len(), half_widths.len(), points.len()] {
            if len != n {
                return Err(GridError::Dimension { got: len, want: n });
            }
        }
        Grid::new(
            (0..n)
                .map(|k| Axis { label: labels[k], center: centers[k], half_width: half_widths[k], points: points[k] })
                .collect(),
        )
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn labels(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.label).collect()
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn position(&self, label: usize) -> Option<usize> {
        self.axes.iter().position(|a| a.label == label)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    pub fn center(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.center).collect()
    }

    /// Distance between neighbouring nodes along axis position `p` in storage.
    pub fn stride(&self, p: usize) -> usize {
        self.axes[..p].iter().map(|a| a.points).product()
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        self.axes
            .iter()
            .map(|a| {
                let k = flat % a.points;
                flat /= a.points;
                k
            })
            .collect()
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (a, &k) in self.axes.iter().zip(idx).rev() {
            flat = flat * a.points + k;
        }
        flat
    }

    /// Coordinates of node `flat`, one per axis.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        self.write_coordinates(flat, &mut out);
        out
    }

    pub(crate) fn write_coordinates(&self, mut flat: usize, out: &mut Vec<f64>) {
        out.clear();
        for a in &self.axes {
            out.push(a.coordinate(flat % a.points));
            flat /= a.points;
        }
    }

    /// Index of the centre node.
    pub fn base_node(&self) -> usize {
        self.flatten(&self.axes.iter().map(Axis::mid).collect::<Vec<_>>())
    }

    /// The grid on the hyperplane through the centre orthogonal to `label`.
    pub fn slice(&self, label: usize) -> Result<Grid, GridError> {
        let p = self.position(label).ok_or(GridError::NoSuchAxis(label))?;
        let mut axes = self.axes.clone();
        axes.remove(p);
        Ok(Grid { axes })
    }

    /// For each node of `slice(label)`, the index of the matching node here.
    pub fn slice_nodes(&self, label: usize) -> Result<Vec<usize>, GridError> {
        let p = self.position(label).ok_or(GridError::NoSuchAxis(label))?;
        let sub = self.slice(label)?;
        let mid = self.axes[p].mid();
        Ok((0..sub.len())
            .map(|s| {
                let mut idx = sub.unflatten(s);
                idx.insert(p, mid);
                self.flatten(&idx)
            })
            .collect())
    }

    /// For each node here, the index of its projection in `slice(label)`.
    pub fn projection(&self, label: usize) -> Result<Vec<usize>, GridError> {
        let p = self.position(label).ok_or(GridError::NoSuchAxis(label))?;
        let sub = self.slice(label)?;
        Ok((0..self.len())
            .map(|f| {
                let mut idx = self.unflatten(f);
                idx.remove(p);
                sub.flatten(&idx)
            })
            .collect())
    }

    /// Halves every spacing: `m -> 2(m-1)+1`. Old nodes stay nodes.
    pub fn refine(&self) -> Grid {
        let axes = self.axes.iter().map(|a| Axis { points: 2 * (a.points - 1) + 1, ..a.clone() }).collect();
        Grid { axes }
    }

    /// Finite-difference derivative along axis `label`: central in the
    /// interior, second-order one-sided at the two faces.
    pub fn derivative(&self, field: &[f64], label: usize) -> Result<Vec<f64>, GridError> {
        let p = self.position(label).ok_or(GridError::NoSuchAxis(label))?;
        let axis = &self.axes[p];
        let (m, s, h) = (axis.points, self.stride(p), axis.spacing());
        let mut out = vec![0.0; field.len()];
        for (f, o) in out.iter_mut().enumerate() {
            let k = (f / s) % m;
            *o = if k == 0 {
                (-3.0 * field[f] + 4.0 * field[f + s] - field[f + 2 * s]) / (2.0 * h)
            } else if k == m - 1 {
                (3.0 * field[f] - 4.0 * field[f - s] + field[f - 2 * s]) / (2.0 * h)
            } else {
                (field[f + s] - field[f - s]) / (2.0 * h)
            };
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::build(&[1, 3], &[0.5, -1.0], &[0.5, 0.25], &[5, 3]).unwrap()
    }

    #[test]
    fn layout() {
        let g = grid();
        assert_eq!(g.len(), 15);
        assert_eq!(g.unflatten(7), vec![2, 1]);
        assert_eq!(g.flatten(&[2, 1]), 7);
        assert_eq!(g.base_node(), 7);
        assert_eq!(g.coordinates(7), vec![0.5, -1.0]);
        assert_eq!(g.coordinates(0), vec![0.0, -1.25]);
    }

    #[test]
    fn rejects_even_counts() {
        assert!(Grid::build(&[1], &[0.0], &[1.0], &[4]).is_err());
        assert!(Grid::build(&[1], &[0.0], &[0.0], &[5]).is_err());
        assert!(Grid::build(&[2, 1], &[0.0, 0.0], &[1.0, 1.0], &[3, 3]).is_err());
    }

    #[test]
    fn slices_and_projection() {
        let g = grid();
        let s = g.slice(1).unwrap();
        assert_eq!(s.labels(), vec![3]);
        assert_eq!(g.slice_nodes(1).unwrap(), vec![2, 7, 12]);
        let proj = g.projection(3).unwrap();
        assert_eq!(proj[12], 2);
        let point = g.slice(1).unwrap().slice(3).unwrap();
        assert_eq!(point.len(), 1);
        assert_eq!(point.coordinates(0), Vec::<f64>::new());
    }

    #[test]
    fn refinement_keeps_nodes() {
        let g = grid().refine();
        assert_eq!(g.axes()[0].points, 9);
        assert_eq!(g.axes()[0].coordinate(2), grid().axes()[0].coordinate(1));
    }

    #[test]
    fn derivative_exact_on_quadratics() {
        let g = Grid::build(&[1, 2], &[0.0, 0.0], &[1.0, 1.0], &[5, 7]).unwrap();
        let field: Vec<f64> = (0..g.len())
            .map(|f| {
                let c = g.coordinates(f);
                c[0] * c[0] + 3.0 * c[0] * c[1]
            })
            .collect();
        let d = g.derivative(&field, 1).unwrap();
        for (f, v) in d.iter().enumerate() {
            let c = g.coordinates(f);
            assert!((v - (2.0 * c[0] + 3.0 * c[1])).abs() < 1e-12);
        }
    }
}
