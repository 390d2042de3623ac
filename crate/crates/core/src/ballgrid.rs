//! Quadrature over the ball realizing the L₂ inner product
//! (u, v) = ∫ u·v dx.
//!
//! Tensor rule: Gauss–Legendre in r on [0, R] with the r² Jacobian folded into
//! the weights, Gauss–Legendre in cos θ, uniform azimuth with equal weights
//! 2π/N_φ. No node sits at r = 0 or on the polar axis, so coordinate-singular
//! evaluations never arise. Reductions run in a fixed order with compensated
//! summation, keeping results reproducible bit for bit.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Supported range for each grid dimension.
pub const GRID_PARAM_RANGE: std::ops::RangeInclusive<usize> = 4..=512;

/// Neumaier compensated accumulator; deterministic for a fixed input order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss–Legendre nodes (ascending) and weights on [−1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi-style initial guess, then Newton on Pₙ.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_pair(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// (Pₙ(x), Pₙ′(x)) by the standard recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor quadrature grid over the ball of radius R.
#[derive(Debug)]
pub struct BallGrid {
    radius: f64,
    n_r: usize,
    n_theta: usize,
    n_phi: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl BallGrid {
    /// Build a grid; exact (to rounding) for radial polynomials of degree
    /// ≤ 2N_r − 1 times spherical harmonics of degree ≤ min(2N_θ − 1, N_φ − 1).
    pub fn build(radius: f64, n_r: usize, n_theta: usize, n_phi: usize) -> Result<Arc<Self>> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::GridParameter(format!(
                "radius {radius} must be positive"
            )));
        }
        for (name, v) in [("N_r", n_r), ("N_theta", n_theta), ("N_phi", n_phi)] {
            if !GRID_PARAM_RANGE.contains(&v) {
                return Err(Error::GridParameter(format!(
                    "{name} = {v} outside supported range 4..=512"
                )));
            }
        }
        if n_phi % 2 != 0 {
            return Err(Error::GridParameter(format!(
                "N_phi = {n_phi} must be even"
            )));
        }

        let (rx, rw) = gauss_legendre(n_r);
        let radial: Vec<(f64, f64)> = rx
            .iter()
            .zip(&rw)
            .map(|(&x, &w)| {
                let r = 0.5 * radius * (x + 1.0);
                (r, w * 0.5 * radius * r * r)
            })
            .collect();
        let (tx, tw) = gauss_legendre(n_theta);
        let cos_theta: Vec<(f64, f64)> = tx.iter().zip(&tw).map(|(&x, &w)| (x, w)).collect();
        let w_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let phi: Vec<f64> = (0..n_phi)
            .map(|i| 2.0 * std::f64::consts::PI * i as f64 / n_phi as f64)
            .collect();

        let mut points = Vec::with_capacity(n_r * n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_r * n_theta * n_phi);
        for &(r, wr) in &radial {
            for &(ct, wt) in &cos_theta {
                let st = (1.0 - ct * ct).sqrt();
                for &p in &phi {
                    let (sp, cp) = p.sin_cos();
                    points.push([r * st * cp, r * st * sp, r * ct]);
                    weights.push(wr * wt * w_phi);
                }
            }
        }
        Ok(Arc::new(BallGrid {
            radius,
            n_r,
            n_theta,
            n_phi,
            points,
            weights,
        }))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_r, self.n_theta, self.n_phi)
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for &w in &self.weights {
            acc.add(w);
        }
        acc.value()
    }

    fn same_rule(&self, other: &Self) -> bool {
        self.radius == other.radius
            && self.n_r == other.n_r
            && self.n_theta == other.n_theta
            && self.n_phi == other.n_phi
    }
}

/// A vector field tabulated on a grid: three real components per node.
#[derive(Debug, Clone)]
pub struct FieldSamples {
    grid: Arc<BallGrid>,
    values: Vec<[f64; 3]>,
}

impl FieldSamples {
    pub fn new(grid: Arc<BallGrid>, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "sample count {} does not match grid point count {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite field sample".into()));
        }
        Ok(FieldSamples { grid, values })
    }

    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3]>(grid: &Arc<BallGrid>, f: F) -> Result<Self> {
        let values = grid.points().iter().map(|&p| f(p)).collect();
        FieldSamples::new(grid.clone(), values)
    }

    pub fn zeros(grid: &Arc<BallGrid>) -> Self {
        FieldSamples {
            grid: grid.clone(),
            values: vec![[0.0; 3]; grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<BallGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn scale(&self, c: f64) -> Self {
        FieldSamples {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|v| [c * v[0], c * v[1], c * v[2]])
                .collect(),
        }
    }

    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        compatible(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]])
            .collect();
        Ok(FieldSamples {
            grid: self.grid.clone(),
            values,
        })
    }
}

fn compatible(f: &FieldSamples, g: &FieldSamples) -> Result<()> {
    if Arc::ptr_eq(&f.grid, &g.grid) || f.grid.same_rule(&g.grid) {
        Ok(())
    } else {
        Err(Error::GridMismatch(
            "fields sampled on different grids".into(),
        ))
    }
}

/// Discrete L₂ inner product Σ wᵢ f(xᵢ)·g(xᵢ).
pub fn inner_product(f: &FieldSamples, g: &FieldSamples) -> Result<f64> {
    compatible(f, g)?;
    let mut acc = CompensatedSum::default();
    for ((w, a), b) in f.grid.weights.iter().zip(&f.values).zip(&g.values) {
        acc.add(w * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]));
    }
    Ok(acc.value())
}

/// √(f, f).
pub fn l2_norm(f: &FieldSamples) -> f64 {
    inner_product(f, f).expect("same grid").max(0.0).sqrt()
}
