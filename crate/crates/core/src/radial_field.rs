//! Radial functions on a uniform grid over `[0, R]` in dimension 2 or 3.
//!
//! Integrals use the trapezoid rule against `ω_{N-1} r^{N-1} dr` at the
//! nodes, with an end correction at the origin for `N = 2`. Gradients live on the staggered midpoints `r_{i+1/2}`, where the
//! centered difference `(v_{i+1} - v_i) / h` is second-order accurate and the
//! kinetic integral uses the midpoint rule. The discrete Laplacian used by
//! the solvers is the exact adjoint of that difference operator.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface area of the unit sphere in `R^N`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    spacing: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    mid_weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: usize, radius: f64, points: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {dim}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!("radius must be positive, got {radius}")));
        }
        if points < 3 {
            return Err(Error::Config(format!("need at least 3 grid points, got {points}")));
        }
        let h = radius / (points - 1) as f64;
        let omega = sphere_area(dim);
        let mut nodes: Vec<f64> = (0..points).map(|i| i as f64 * h).collect();
        nodes[points - 1] = radius;
        let mut weights: Vec<f64> =
            nodes.iter().map(|&r| omega * r.powi(dim as i32 - 1) * h).collect();
        weights[0] *= 0.5;
        weights[points - 1] *= 0.5;
        if dim == 2 {
            // Euler-Maclaurin end correction at the origin, where r s(r) has slope s(0)
            weights[0] = omega * h * h / 12.0;
        }
        let mid_weights = (0..points - 1)
            .map(|i| omega * ((i as f64 + 0.5) * h).powi(dim as i32 - 1) * h)
            .collect();
        Ok(RadialGrid { dim, radius, spacing: h, nodes, weights, mid_weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoid weights at the nodes.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Midpoint-rule weights at `r_{i+1/2}`, `i = 0..M-1`.
    pub fn mid_weights(&self) -> &[f64] {
        &self.mid_weights
    }

    /// `Σ w_i s_i`.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.len() {
            return Err(Error::Shape { expected: self.len(), got: samples.len() });
        }
        Ok(self.weights.iter().zip(samples).map(|(w, s)| w * s).sum())
    }

    /// Volume of the truncation ball.
    pub fn ball_volume(&self) -> f64 {
        sphere_area(self.dim) * self.radius.powi(self.dim as i32) / self.dim as f64
    }

    /// Staggered differences `(v_{i+1} - v_i) / h`.
    pub fn gradient(&self, values: &[f64]) -> Vec<f64> {
        let inv_h = 1.0 / self.spacing;
        values.windows(2).map(|w| (w[1] - w[0]) * inv_h).collect()
    }

    /// `Σ c_m g_m^2` over midpoints.
    pub fn dirichlet_energy(&self, values: &[f64]) -> f64 {
        let inv_h = 1.0 / self.spacing;
        values
            .windows(2)
            .zip(&self.mid_weights)
            .map(|(w, c)| {
                let g = (w[1] - w[0]) * inv_h;
                c * g * g
            })
            .sum()
    }

    /// `D^T C D v`, half the gradient of [`dirichlet_energy`](Self::dirichlet_energy).
    pub fn stiffness_apply(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let inv_h2 = 1.0 / (self.spacing * self.spacing);
        let mut out = vec![0.0; n];
        for m in 0..n - 1 {
            let flux = self.mid_weights[m] * (values[m + 1] - values[m]) * inv_h2;
            out[m] -= flux;
            out[m + 1] += flux;
        }
        out
    }
}

/// A radial field `v(r_i)`. The grid is shared, the values are owned.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape { expected: grid.len(), got: values.len() });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("field value {bad} is not finite")));
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialField { grid, values: vec![0.0; n] }
    }

    pub(crate) fn from_parts(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        RadialField { grid, values }
    }

    /// `c e^{-(r/s)^2}` with the Dirichlet tail forced to zero.
    pub fn gaussian(grid: Arc<RadialGrid>, amplitude: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Config(format!("gaussian width must be positive, got {width}")));
        }
        let mut values: Vec<f64> =
            grid.nodes().iter().map(|&r| amplitude * (-(r / width).powi(2)).exp()).collect();
        *values.last_mut().unwrap() = 0.0;
        RadialField::new(grid, values)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        RadialField::new(self.grid.clone(), values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Sets `v(R) = 0`.
    pub fn enforce_dirichlet(&mut self) {
        if let Some(last) = self.values.last_mut() {
            *last = 0.0;
        }
    }

    pub fn has_dirichlet_tail(&self) -> bool {
        self.values.last().copied() == Some(0.0)
    }

    /// `∫ |v'|^2 dx`.
    pub fn kinetic(&self) -> f64 {
        self.grid.dirichlet_energy(&self.values)
    }

    /// `∫ v^2 dx` (plain L² norm squared, no dual map).
    pub fn l2_squared(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v * v).sum()
    }

    /// Cubic Lagrange interpolation at radius `r` on the four surrounding
    /// nodes, with the even extension across `r = 0` and zero beyond `R`.
    pub fn interpolate(&self, r: f64) -> f64 {
        let h = self.grid.spacing();
        let n = self.values.len() as isize;
        if !(0.0..=self.grid.radius()).contains(&r) {
            return 0.0;
        }
        let pos = r / h;
        let i = (pos.floor() as isize).min(n - 2);
        let x = pos - i as f64;
        let at = |k: isize| -> f64 {
            let k = k.abs();
            if k >= n {
                0.0
            } else {
                self.values[k as usize]
            }
        };
        let (a, b, c, d) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        -x * (x - 1.0) * (x - 2.0) / 6.0 * a + (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0 * b
            - (x + 1.0) * x * (x - 2.0) / 2.0 * c
            + (x + 1.0) * x * (x - 1.0) / 6.0 * d
    }

    /// `w(r_i) = v(t r_i)`, zero where `t r_i > R`.
    pub fn resample(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!("resample factor must be positive, got {t}")));
        }
        if t == 1.0 {
            return Ok(self.clone());
        }
        let values = self.grid.nodes().iter().map(|&r| self.interpolate(t * r)).collect();
        Ok(RadialField::from_parts(self.grid.clone(), values))
    }

    pub fn to_csv_rows(&self) -> Vec<(f64, f64)> {
        self.grid.nodes().iter().copied().zip(self.values.iter().copied()).collect()
    }

    pub fn to_record(&self) -> FieldRecord {
        FieldRecord {
            dim: self.grid.dim(),
            radius: self.grid.radius(),
            points: self.grid.len(),
            values: self.values.clone(),
        }
    }

    pub fn from_record(record: &FieldRecord) -> Result<Self> {
        let grid = Arc::new(RadialGrid::new(record.dim, record.radius, record.points)?);
        RadialField::new(grid, record.values.clone())
    }
}

/// JSON form of a field: `{N, R, M, values}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "M")]
    pub points: usize,
    pub values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(dim: usize, r: f64, m: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(dim, r, m).unwrap())
    }

    #[test]
    fn grid_weights_sum_to_ball_volume() {
        let g = grid(2, 1.0, 1001);
        let s: f64 = g.weights().iter().sum();
        assert!((s - PI).abs() < 1e-5);
        let g = grid(3, 2.0, 2001);
        let s: f64 = g.weights().iter().sum();
        assert!((s - 4.0 * PI / 3.0 * 8.0).abs() < 1e-3);
        for (dim, m) in [(2, 5), (3, 5), (3, 11), (2, 101)] {
            let g = grid(dim, 1.7, m);
            let s: f64 = g.weights().iter().sum();
            let rel = (s - g.ball_volume()).abs() / g.ball_volume();
            assert!(rel <= 2.0 / ((m - 1) as f64).powi(2), "dim {dim} m {m} rel {rel}");
        }
        assert!(RadialGrid::new(2, 1.0, 2).is_err());
        assert!(RadialGrid::new(4, 1.0, 10).is_err());
        assert!(RadialGrid::new(2, -1.0, 10).is_err());
        let g = grid(3, 1.7, 11);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(*g.nodes().last().unwrap(), 1.7);
    }

    #[test]
    fn integrate_examples() {
        let g = grid(2, 1.0, 1001);
        assert!((g.integrate(&vec![1.0; 1001]).unwrap() - PI).abs() < 1e-5);
        assert_eq!(g.integrate(&vec![0.0; 1001]).unwrap(), 0.0);
        assert!(matches!(g.integrate(&[1.0; 3]), Err(Error::Shape { .. })));
        let g = grid(2, 8.0, 4001);
        let s: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        assert!((g.integrate(&s).unwrap() - PI * (1.0 - (-64.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn kinetic_of_gaussian_is_second_order() {
        let err = |m: usize| {
            let g = grid(2, 8.0, m);
            let v = RadialField::gaussian(g, 1.0, 1.0).unwrap();
            (v.kinetic() - PI).abs() / PI
        };
        let (e1, e2) = (err(801), err(1601));
        assert!(e1 < 2e-3);
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        assert_eq!(RadialField::zeros(grid(3, 1.0, 10)).kinetic(), 0.0);
    }

    #[test]
    fn stiffness_is_gradient_of_dirichlet_energy() {
        let g = grid(3, 4.0, 41);
        let v = RadialField::gaussian(g.clone(), 0.7, 1.3).unwrap();
        let k = g.stiffness_apply(v.values());
        let eps = 1e-6;
        for i in [0, 3, 17, 39] {
            let mut p = v.values().to_vec();
            let mut m = v.values().to_vec();
            p[i] += eps;
            m[i] -= eps;
            let fd = (g.dirichlet_energy(&p) - g.dirichlet_energy(&m)) / (2.0 * eps);
            assert!((fd - 2.0 * k[i]).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn gaussian_sampling() {
        let g = grid(2, 10.0, 101);
        let v = RadialField::gaussian(g.clone(), 2.5, 1.0).unwrap();
        assert_eq!(v.values()[0], 2.5);
        assert_eq!(*v.values().last().unwrap(), 0.0);
        assert!(RadialField::gaussian(g, 1.0, 0.0).is_err());
    }

    #[test]
    fn resample_examples() {
        let g = grid(2, 20.0, 4001);
        let v = RadialField::gaussian(g.clone(), 1.0, 1.5).unwrap();
        assert_eq!(v.resample(1.0).unwrap(), v);
        let z = RadialField::zeros(g.clone());
        assert!(z.resample(2.3).unwrap().is_zero());
        for t in [0.5, 2.0, 3.0] {
            let w = v.resample(t).unwrap();
            let expect = v.l2_squared() / t.powi(2);
            assert!((w.l2_squared() - expect).abs() / expect < 1e-4);
        }
        let a = v.resample(1.7).unwrap().resample(0.8).unwrap();
        let b = v.resample(1.7 * 0.8).unwrap();
        let diff: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
        let norm: f64 = b.values().iter().map(|x| x.abs()).sum();
        assert!(diff / norm < 1e-3);
        assert!(v.resample(0.0).is_err());
    }

    #[test]
    fn interpolation_reproduces_nodes_and_is_fourth_order() {
        let g = grid(2, 4.0, 401);
        let v = RadialField::gaussian(g.clone(), 1.0, 0.7).unwrap();
        for (i, &r) in g.nodes().iter().enumerate() {
            assert!((v.interpolate(r) - v.values()[i]).abs() < 1e-14);
        }
        let err = |m: usize| {
            let g = grid(2, 4.0, m);
            let v = RadialField::gaussian(g, 1.0, 0.7).unwrap();
            (0..997).map(|k| 0.004 * k as f64 + 0.0013).map(|r| (v.interpolate(r) - (-(r / 0.7f64).powi(2)).exp()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(201) / err(401);
        assert!(ratio > 12.0, "{ratio}");
        assert_eq!(v.interpolate(4.5), 0.0);
    }

    #[test]
    fn record_round_trip() {
        let g = grid(3, 5.0, 11);
        let v = RadialField::gaussian(g, 0.3, 2.0).unwrap();
        let back = RadialField::from_record(&v.to_record()).unwrap();
        assert_eq!(back, v);
    }
}
