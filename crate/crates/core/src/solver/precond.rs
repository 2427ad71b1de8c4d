//! `P = K_h + σ W`: the discrete `H¹` inner product on the interior nodes
//! (the last node is pinned to zero), factored once per grid.

use crate::radial_field::RadialGrid;

#[derive(Debug, Clone)]
pub struct H1Preconditioner {
    /// Forward-elimination multipliers and pivots of the tridiagonal system.
    lower: Vec<f64>,
    pivot: Vec<f64>,
    upper: Vec<f64>,
    diag: Vec<f64>,
}

impl H1Preconditioner {
    pub fn new(grid: &RadialGrid, shift: f64) -> Self {
        let n = grid.len() - 1;
        let c = grid.mid_weights();
        let w = grid.weights();
        let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i > 0 { c[i - 1] } else { 0.0 };
                (left + c[i]) * inv_h2 + shift * w[i]
            })
            .collect();
        let upper: Vec<f64> = (0..n.saturating_sub(1)).map(|i| -c[i] * inv_h2).collect();
        let mut pivot = vec![0.0; n];
        let mut lower = vec![0.0; n];
        pivot[0] = diag[0];
        for i in 1..n {
            lower[i] = upper[i - 1] / pivot[i - 1];
            pivot[i] = diag[i] - lower[i] * upper[i - 1];
        }
        H1Preconditioner { lower, pivot, upper, diag }
    }

    /// `P^{-1} x`, with the pinned node mapped to zero.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivot.len();
        let mut y = vec![0.0; n + 1];
        y[0] = rhs[0];
        for i in 1..n {
            y[i] = rhs[i] - self.lower[i] * y[i - 1];
        }
        y[n - 1] /= self.pivot[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (y[i] - self.upper[i] * y[i + 1]) / self.pivot[i];
        }
        y[n] = 0.0;
        y
    }

    /// `P x` on the interior nodes.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.pivot.len();
        let mut out = vec![0.0; n + 1];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.upper[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            out[i] = s;
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_inverts_apply() {
        for dim in [2, 3] {
            let g = RadialGrid::new(dim, 5.0, 101).unwrap();
            let p = H1Preconditioner::new(&g, 1.0);
            let x: Vec<f64> = (0..101).map(|i| if i == 100 { 0.0 } else { (i as f64 * 0.37).sin() }).collect();
            let y = p.solve(&p.apply(&x));
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-9, "{a} {b}");
            }
        }
    }

    #[test]
    fn apply_matches_stiffness_plus_mass() {
        let g = RadialGrid::new(2, 3.0, 31).unwrap();
        let p = H1Preconditioner::new(&g, 0.7);
        let mut x: Vec<f64> = (0..31).map(|i| (i as f64 * 0.2).cos()).collect();
        x[30] = 0.0;
        let px = p.apply(&x);
        let expect = dot(&x, &g.stiffness_apply(&x)) + 0.7 * dot(&x, &x.iter().zip(g.weights()).map(|(a, w)| a * w).collect::<Vec<_>>());
        assert!((dot(&x, &px) - expect).abs() < 1e-10 * expect);
    }
}
