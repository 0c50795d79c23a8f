//! The discrete triangle `{(iΔ, jΔ) : 0 <= i <= j <= n}` and fields living on it.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// Uniform triangular grid on `0 <= t <= T <= T*` with `n` steps per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularGrid {
    n: usize,
    t_star: f64,
}

impl TriangularGrid {
    pub fn new(n: usize, t_star: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DegenerateGrid("a triangular grid needs at least one step".into()));
        }
        if !(t_star > 0.0) || !t_star.is_finite() {
            return Err(Error::DegenerateGrid(format!("horizon must be positive and finite, got {t_star}")));
        }
        Ok(TriangularGrid { n, t_star })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn step(&self) -> f64 {
        self.t_star / self.n as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n {
            self.t_star
        } else {
            i as f64 * self.step()
        }
    }

    /// Number of nodes, `(n+1)(n+2)/2`.
    pub fn len(&self) -> usize {
        (self.n + 1) * (self.n + 2) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Start of row `i` (nodes `(i, i..=n)`) in the packed storage.
    pub fn row_offset(&self, i: usize) -> usize {
        i * (self.n + 1) - i * i.saturating_sub(1) / 2
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j <= self.n, "({i}, {j}) is not a node");
        self.row_offset(i) + (j - i)
    }

    /// Index of the grid time equal to `t` (within `1e-9·Δ`).
    pub fn node_of_time(&self, t: f64) -> Result<usize> {
        let k = (t / self.step()).round();
        if k < 0.0 || k > self.n as f64 || (k * self.step() - t).abs() > 1e-9 * self.step() {
            return Err(Error::NotAGridNode(t));
        }
        Ok(k as usize)
    }

    /// All nodes `(i, j)` in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.n).flat_map(move |i| (i..=self.n).map(move |j| (i, j)))
    }
}

/// Real values on every node of a [`TriangularGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: TriangularGrid,
    values: Vec<f64>,
}

/// The stochastic-exponential input field `a(t, T)`.
pub type AField = GridField;
/// A forward-rate field `f(t, T)`.
pub type ForwardField = GridField;

impl GridField {
    pub fn constant(grid: TriangularGrid, value: f64) -> Self {
        GridField { grid, values: vec![value; grid.len()] }
    }

    pub fn zeros(grid: TriangularGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: TriangularGrid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let values = grid.nodes().map(|(i, j)| f(i, j)).collect();
        GridField { grid, values }
    }

    pub fn from_values(grid: TriangularGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DegenerateGrid(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridField { grid, values })
    }

    pub fn grid(&self) -> &TriangularGrid {
        &self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.index(i, j);
        self.values[k] = v;
    }

    /// Value at grid times `(t, T)`.
    pub fn at(&self, t: f64, maturity: f64) -> Result<f64> {
        let i = self.grid.node_of_time(t)?;
        let j = self.grid.node_of_time(maturity)?;
        if i > j {
            return Err(Error::NotAGridNode(t));
        }
        Ok(self.get(i, j))
    }

    /// Row `i`: the values at `(i, i), (i, i+1), ..., (i, n)`.
    pub fn row(&self, i: usize) -> &[f64] {
        let start = self.grid.row_offset(i);
        &self.values[start..start + self.grid.n - i + 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |self - other|` over the nodes.
    pub fn sup_distance(&self, other: &GridField) -> f64 {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
            .fold(0.0, f64::max)
    }

    /// Whether `self <= other` on every node, without tolerance.
    pub fn le(&self, other: &GridField) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// First node (smallest `t`, then smallest `T`) whose value is not finite or exceeds `limit`.
    pub fn first_exceeding(&self, limit: f64) -> Option<(usize, usize)> {
        let n = self.grid.n;
        // storage is row-major in t already
        (0..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).find(|&(i, j)| {
            let v = self.get(i, j);
            !(v <= limit)
        })
    }

    /// CSV with header `t,T,value`, rows in storage order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,T,value")?;
        for (k, (i, j)) in self.grid.nodes().enumerate() {
            writeln!(out, "{},{},{}", self.grid.time(i), self.grid.time(j), self.values[k])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn packed_indexing_covers_the_triangle() {
        let g = TriangularGrid::new(5, 1.0).unwrap();
        let idx: Vec<usize> = g.nodes().map(|(i, j)| g.index(i, j)).collect();
        assert_eq!(idx, (0..g.len()).collect::<Vec<_>>());
        assert_eq!(g.len(), 21);
    }

    #[test]
    fn grid_times_and_lookup() {
        let g = TriangularGrid::new(4, 2.0).unwrap();
        assert_eq!(g.time(4), 2.0);
        assert_eq!(g.node_of_time(1.5).unwrap(), 3);
        assert!(matches!(g.node_of_time(0.3), Err(Error::NotAGridNode(_))));
        assert!(TriangularGrid::new(0, 1.0).is_err());
    }

    #[test]
    fn rows_and_csv() {
        let g = TriangularGrid::new(2, 1.0).unwrap();
        let f = GridField::from_fn(g, |i, j| (10 * i + j) as f64);
        assert_eq!(f.row(1), &[11.0, 12.0]);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert_eq!(text.lines().nth(4).unwrap(), "0.5,0.5,11");
    }

    proptest! {
        #[test]
        fn index_is_a_bijection(n in 1usize..60) {
            let g = TriangularGrid::new(n, 1.0).unwrap();
            let mut seen = vec![false; g.len()];
            for (i, j) in g.nodes() {
                let k = g.index(i, j);
                prop_assert!(!seen[k]);
                seen[k] = true;
            }
            prop_assert!(seen.into_iter().all(|s| s));
        }
    }
}
