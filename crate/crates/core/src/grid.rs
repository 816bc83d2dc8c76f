//! Uniform parameter grids, sampled fields and finite-difference stencils.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Values a finite-difference stencil can act on.
pub trait Linear:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl<T> Linear for T where
    T: Copy + Send + Sync + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>
{
}

/// Uniformly spaced samples of a closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("axis needs at least 3 samples, got {n}")));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidInput(format!("invalid axis range [{start}, {end}]")));
        }
        Ok(Self { start, end, n })
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.n - 1) as f64
    }

    pub fn value(&self, k: usize) -> f64 {
        if k == self.n - 1 {
            self.end
        } else {
            self.start + self.step() * k as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.value(k)).collect()
    }
}

/// Tensor grid over `(s, t)`; `s` varies fastest in storage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub s: Axis,
    pub t: Axis,
}

impl Grid {
    pub fn new(s: Axis, t: Axis) -> Self {
        Self { s, t }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.s.n, self.t.n)
    }

    pub fn len(&self) -> usize {
        self.s.n * self.t.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.s.n + i
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.s.value(i), self.t.value(j))
    }

    /// Whether `(i, j)` is at least `margin` nodes away from every edge.
    pub fn is_interior(&self, i: usize, j: usize, margin: usize) -> bool {
        i >= margin && j >= margin && i + margin < self.s.n && j + margin < self.t.n
    }

    /// Interior nodes at the given margin, in storage order.
    pub fn interior(&self, margin: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (ns, nt) = self.dims();
        (margin..nt.saturating_sub(margin))
            .flat_map(move |j| (margin..ns.saturating_sub(margin)).map(move |i| (i, j)))
    }

    /// Samples `f(s, t)` over the grid, rows in parallel.
    pub fn sample<T, F>(&self, f: F) -> Field<T>
    where
        T: Send,
        F: Fn(f64, f64) -> T + Sync,
    {
        Field::from_index_fn(self, |i, j| {
            let (s, t) = self.coords(i, j);
            f(s, t)
        })
    }
}

/// Finite-difference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Second-order centered stencils, one-sided second-order at the edges.
    #[default]
    Central,
    /// Richardson-extrapolated centered stencils (fourth order) where the
    /// wider stencil fits, falling back to [`Scheme::Central`] near edges.
    Richardson,
}

impl Scheme {
    /// Margin excluding nodes whose nested first derivatives touch one-sided
    /// stencils.
    pub fn margin(&self) -> usize {
        match self {
            Scheme::Central => 2,
            Scheme::Richardson => 4,
        }
    }
}

/// First derivative along a line of `n` samples at position `k`.
pub fn diff1<T: Linear>(f: impl Fn(usize) -> T, n: usize, k: usize, h: f64, scheme: Scheme) -> T {
    if scheme == Scheme::Richardson && k >= 2 && k + 2 < n {
        return ((f(k + 1) - f(k - 1)) * 8.0 - (f(k + 2) - f(k - 2))) * (1.0 / (12.0 * h));
    }
    if k == 0 {
        (f(1) * 4.0 - f(0) * 3.0 - f(2)) * (1.0 / (2.0 * h))
    } else if k == n - 1 {
        (f(n - 1) * 3.0 - f(n - 2) * 4.0 + f(n - 3)) * (1.0 / (2.0 * h))
    } else {
        (f(k + 1) - f(k - 1)) * (1.0 / (2.0 * h))
    }
}

/// Second derivative along a line of `n` samples at position `k`.
pub fn diff2<T: Linear>(f: impl Fn(usize) -> T, n: usize, k: usize, h: f64, scheme: Scheme) -> T {
    let h2 = h * h;
    if scheme == Scheme::Richardson && k >= 2 && k + 2 < n {
        return ((f(k + 1) + f(k - 1)) * 16.0 - f(k) * 30.0 - (f(k + 2) + f(k - 2)))
            * (1.0 / (12.0 * h2));
    }
    if k > 0 && k + 1 < n {
        (f(k + 1) + f(k - 1) - f(k) * 2.0) * (1.0 / h2)
    } else if n < 4 {
        // too short for a one-sided second-order stencil
        let c = 1;
        (f(c + 1) + f(c - 1) - f(c) * 2.0) * (1.0 / h2)
    } else if k == 0 {
        (f(0) * 2.0 - f(1) * 5.0 + f(2) * 4.0 - f(3)) * (1.0 / h2)
    } else {
        (f(n - 1) * 2.0 - f(n - 2) * 5.0 + f(n - 3) * 4.0 - f(n - 4)) * (1.0 / h2)
    }
}

/// Values sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field<T> {
    ns: usize,
    nt: usize,
    data: Vec<T>,
}

impl<T> Field<T> {
    pub fn from_vec(grid: &Grid, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} samples, grid has {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { ns: grid.s.n, nt: grid.t.n, data })
    }

    /// Builds a field from a per-node function, rows evaluated in parallel.
    pub fn from_index_fn<F>(grid: &Grid, f: F) -> Self
    where
        T: Send,
        F: Fn(usize, usize) -> T + Sync,
    {
        let (ns, nt) = grid.dims();
        let data: Vec<T> = (0..nt)
            .into_par_iter()
            .flat_map_iter(|j| (0..ns).map(move |i| (i, j)).collect::<Vec<_>>())
            .map(|(i, j)| f(i, j))
            .collect();
        Self { ns, nt, data }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.ns, self.nt)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[j * self.ns + i]
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        (self.ns, self.nt) == grid.dims()
    }

    pub fn map<U: Send, F>(&self, f: F) -> Field<U>
    where
        T: Sync,
        F: Fn(&T) -> U + Sync + Send,
    {
        Field { ns: self.ns, nt: self.nt, data: self.data.par_iter().map(f).collect() }
    }

    /// Combines two fields node by node.
    pub fn zip_map<U: Sync, V: Send, F>(&self, other: &Field<U>, f: F) -> Field<V>
    where
        T: Sync,
        F: Fn(&T, &U) -> V + Sync + Send,
    {
        assert_eq!(self.dims(), other.dims(), "zip_map on fields of different shape");
        Field {
            ns: self.ns,
            nt: self.nt,
            data: self.data.par_iter().zip(other.data.par_iter()).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

impl<T: Copy> Field<T> {
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[j * self.ns + i]
    }
}

impl<T: Linear> Field<T> {
    pub fn d_ds(&self, grid: &Grid, scheme: Scheme) -> Field<T> {
        let h = grid.s.step();
        Field::from_index_fn(grid, |i, j| diff1(|k| self.at(k, j), self.ns, i, h, scheme))
    }

    pub fn d_dt(&self, grid: &Grid, scheme: Scheme) -> Field<T> {
        let h = grid.t.step();
        Field::from_index_fn(grid, |i, j| diff1(|k| self.at(i, k), self.nt, j, h, scheme))
    }

    pub fn d2_ds2(&self, grid: &Grid, scheme: Scheme) -> Field<T> {
        let h = grid.s.step();
        Field::from_index_fn(grid, |i, j| diff2(|k| self.at(k, j), self.ns, i, h, scheme))
    }

    pub fn d2_dt2(&self, grid: &Grid, scheme: Scheme) -> Field<T> {
        let h = grid.t.step();
        Field::from_index_fn(grid, |i, j| diff2(|k| self.at(i, k), self.nt, j, h, scheme))
    }
}

/// Maximum of `f` over the interior nodes, ignoring `None`s. Zero if nothing
/// qualifies.
pub fn interior_max<T>(
    grid: &Grid,
    field: &Field<T>,
    margin: usize,
    f: impl Fn(usize, usize, &T) -> Option<f64>,
) -> f64 {
    grid.interior(margin)
        .filter_map(|(i, j)| f(i, j, field.get(i, j)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(Axis::new(0.0, 1.0, n).unwrap(), Axis::new(-1.0, 2.0, n + 3).unwrap())
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        let g = grid(9);
        let f = g.sample(|s, t| 3.0 * s * s - 2.0 * s * t + t * t - 1.0);
        for scheme in [Scheme::Central, Scheme::Richardson] {
            let fs = f.d_ds(&g, scheme);
            let ft = f.d_dt(&g, scheme);
            let fss = f.d2_ds2(&g, scheme);
            let ftt = f.d2_dt2(&g, scheme);
            for j in 0..g.t.n {
                for i in 0..g.s.n {
                    let (s, t) = g.coords(i, j);
                    assert!((fs.at(i, j) - (6.0 * s - 2.0 * t)).abs() < 1e-11);
                    assert!((ft.at(i, j) - (2.0 * t - 2.0 * s)).abs() < 1e-11);
                    assert!((fss.at(i, j) - 6.0).abs() < 1e-9);
                    assert!((ftt.at(i, j) - 2.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn central_differences_converge_at_order_two() {
        let err = |n: usize, scheme: Scheme| {
            let g = grid(n);
            let f = g.sample(|s, t| (2.0 * s).sin() * t.cos());
            let fs = f.d_ds(&g, scheme);
            interior_max(&g, &fs, 2, |i, j, v| {
                let (s, t) = g.coords(i, j);
                Some((v - 2.0 * (2.0 * s).cos() * t.cos()).abs())
            })
        };
        let ratio = err(33, Scheme::Central) / err(65, Scheme::Central);
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
        let ratio4 = err(33, Scheme::Richardson) / err(65, Scheme::Richardson);
        assert!(ratio4 > 12.0, "richardson ratio {ratio4}");
    }

    #[test]
    fn field_shape_is_checked() {
        let g = grid(5);
        assert!(Field::from_vec(&g, vec![0.0; 3]).is_err());
        assert!(Axis::new(0.0, 1.0, 2).is_err());
        assert!(Axis::new(1.0, 0.0, 5).is_err());
    }
}
