//! Real spherical harmonics and their surface gradients.
//!
//! Fully normalized convention: ∫_{S²} Yₙᵏ Yₙ′ᵏ′ dS = δₙₙ′ δₖₖ′. For k > 0 the
//! azimuth factor is √2 cos(kφ), for k < 0 it is √2 sin(|k|φ). Associated
//! Legendre values use the standard normalized three-term recurrences, stable
//! through n = 64; θ-derivatives use the order-shift formula, which avoids
//! dividing differences by sin θ.

use crate::error::{Error, Result};
use crate::specfun::MAX_ORDER;

const INV_SQRT_4PI: f64 = 0.28209479177387814;

/// Degree/order pair (n, k) with |k| ≤ n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AngularIndex {
    pub n: u32,
    pub k: i32,
}

impl AngularIndex {
    pub fn new(n: u32, k: i32) -> Result<Self> {
        if k.unsigned_abs() > n {
            return Err(Error::Domain(format!(
                "angular index out of range: |k| = {} exceeds n = {n}",
                k.unsigned_abs()
            )));
        }
        if n > MAX_ORDER {
            return Err(Error::Domain(format!(
                "degree n = {n} exceeds supported maximum {MAX_ORDER}"
            )));
        }
        Ok(AngularIndex { n, k })
    }
}

/// Tangent vector in the orthonormal (θ̂, φ̂) frame at a surface point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub theta: f64,
    pub phi: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!(
            "theta = {theta} outside [0, pi]"
        )));
    }
    Ok(())
}

/// Real fully normalized spherical harmonic Yₙᵏ(θ, φ).
pub fn real_sph_harm(idx: AngularIndex, theta: f64, phi: f64) -> Result<f64> {
    AngularIndex::new(idx.n, idx.k)?;
    check_theta(theta)?;
    if !phi.is_finite() {
        return Err(Error::Domain(format!("phi = {phi} not finite")));
    }
    let (ct, st) = (theta.cos(), theta.sin());
    let kappa = idx.k.unsigned_abs();
    let p = norm_legendre(idx.n, kappa, ct, st);
    Ok(p * azimuth_factor(idx.k, phi).0)
}

/// Surface gradient (∂θ Y, (1/sin θ) ∂φ Y) in the (θ̂, φ̂) frame.
///
/// Rejected at the poles: the tangent frame degenerates there and grids never
/// place nodes on the axis.
pub fn sph_harm_surface_grad(idx: AngularIndex, theta: f64, phi: f64) -> Result<TangentVector> {
    AngularIndex::new(idx.n, idx.k)?;
    check_theta(theta)?;
    if !phi.is_finite() {
        return Err(Error::Domain(format!("phi = {phi} not finite")));
    }
    let (ct, st) = (theta.cos(), theta.sin());
    if st < 1e-12 {
        return Err(Error::Pole { sin_theta: st });
    }
    let f = angular_factors(idx.n, idx.k, ct, st, phi);
    Ok(TangentVector {
        theta: f.g_theta,
        phi: f.g_phi,
    })
}

/// Y together with its surface gradient; the shared building block for the
/// vector eigenfields.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AngularFactors {
    pub y: f64,
    pub g_theta: f64,
    pub g_phi: f64,
}

/// Requires st > 0 when k ≠ 0 (callers seed an axis evaluation with a tiny
/// symbolic sin θ, which reproduces the pole limit exactly because every
/// quantity is linear in the seed).
pub(crate) fn angular_factors(n: u32, k: i32, ct: f64, st: f64, phi: f64) -> AngularFactors {
    let kappa = k.unsigned_abs();
    let p = norm_legendre(n, kappa, ct, st);
    let dp = norm_legendre_dtheta(n, kappa, ct, st);
    let (az, daz) = azimuth_factor(k, phi);
    let g_phi = if k == 0 { 0.0 } else { p / st * daz };
    AngularFactors {
        y: p * az,
        g_theta: dp * az,
        g_phi,
    }
}

/// (Φ(φ), dΦ/dφ) for the real convention.
fn azimuth_factor(k: i32, phi: f64) -> (f64, f64) {
    use std::f64::consts::SQRT_2;
    let kappa = f64::from(k.unsigned_abs());
    if k > 0 {
        let (s, c) = (kappa * phi).sin_cos();
        (SQRT_2 * c, -kappa * SQRT_2 * s)
    } else if k < 0 {
        let (s, c) = (kappa * phi).sin_cos();
        (SQRT_2 * s, kappa * SQRT_2 * c)
    } else {
        (1.0, 0.0)
    }
}

/// Fully normalized associated Legendre P̄ₙᵏ(cos θ), 0 ≤ k ≤ n, including the
/// 1/√(4π) factor, without Condon–Shortley phase.
fn norm_legendre(n: u32, kappa: u32, ct: f64, st: f64) -> f64 {
    debug_assert!(kappa <= n);
    // diagonal P̄ₖₖ = √((2k+1)/(2k)) sin θ · P̄ₖ₋₁,ₖ₋₁
    let mut diag = INV_SQRT_4PI;
    for j in 1..=kappa {
        diag *= st * (f64::from(2 * j + 1) / f64::from(2 * j)).sqrt();
    }
    if n == kappa {
        return diag;
    }
    let mut pm2 = diag;
    let mut pm1 = f64::from(2 * kappa + 3).sqrt() * ct * diag;
    if n == kappa + 1 {
        return pm1;
    }
    let kf = f64::from(kappa);
    for nn in (kappa + 2)..=n {
        let nf = f64::from(nn);
        let a = ((2.0 * nf - 1.0) * (2.0 * nf + 1.0) / ((nf - kf) * (nf + kf))).sqrt();
        let b = ((2.0 * nf + 1.0) * ((nf - 1.0) * (nf - 1.0) - kf * kf)
            / ((2.0 * nf - 3.0) * (nf - kf) * (nf + kf)))
            .sqrt();
        let p = a * ct * pm1 - b * pm2;
        pm2 = pm1;
        pm1 = p;
    }
    pm1
}

/// dP̄ₙᵏ/dθ by order shift:
/// ½[√((n+k)(n−k+1)) P̄ₙᵏ⁻¹ − √((n−k)(n+k+1)) P̄ₙᵏ⁺¹] for k ≥ 1,
/// and −√(n(n+1)) P̄ₙ¹ for k = 0.
fn norm_legendre_dtheta(n: u32, kappa: u32, ct: f64, st: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = f64::from(n);
    if kappa == 0 {
        return -(nf * (nf + 1.0)).sqrt() * norm_legendre(n, 1, ct, st);
    }
    let kf = f64::from(kappa);
    let lower = norm_legendre(n, kappa - 1, ct, st);
    let upper = if kappa < n {
        norm_legendre(n, kappa + 1, ct, st)
    } else {
        0.0
    };
    0.5 * (((nf + kf) * (nf - kf + 1.0)).sqrt() * lower
        - ((nf - kf) * (nf + kf + 1.0)).sqrt() * upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn idx(n: u32, k: i32) -> AngularIndex {
        AngularIndex::new(n, k).unwrap()
    }

    #[test]
    fn constant_harmonic() {
        for &(t, p) in &[(0.3, 1.1), (2.0, 4.4), (1.5707, 0.0)] {
            let y = real_sph_harm(idx(0, 0), t, p).unwrap();
            assert!((y - INV_SQRT_4PI).abs() < 1e-15);
        }
    }

    #[test]
    fn dipole_at_north_pole() {
        let y = real_sph_harm(idx(1, 0), 0.0, 0.0).unwrap();
        assert!((y - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sectoral_dipole_on_equator() {
        // Y₁¹ = √(3/4π)·x/r
        let y = real_sph_harm(idx(1, 1), PI / 2.0, 0.0).unwrap();
        assert!((y - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn addition_theorem() {
        let n = 3u32;
        for &(t, p) in &[(0.7, 1.9), (2.2, 5.1), (1.1, 0.3)] {
            let mut sum = 0.0;
            for k in -(n as i32)..=(n as i32) {
                let y = real_sph_harm(idx(n, k), t, p).unwrap();
                sum += y * y;
            }
            let expected = f64::from(2 * n + 1) / (4.0 * PI);
            assert!((sum - expected).abs() < 1e-13, "theta={t}, phi={p}");
        }
    }

    #[test]
    fn parity() {
        for n in 0..=8u32 {
            for k in -(n as i32)..=(n as i32) {
                let (t, p) = (0.9, 2.3);
                let a = real_sph_harm(idx(n, k), PI - t, p + PI).unwrap();
                let b = real_sph_harm(idx(n, k), t, p).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - sign * b).abs() < 1e-13, "n={n}, k={k}");
            }
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = sph_harm_surface_grad(idx(0, 0), 1.0, 2.0).unwrap();
        assert_eq!(g.theta, 0.0);
        assert_eq!(g.phi, 0.0);
    }

    #[test]
    fn gradient_of_dipole_on_equator() {
        let g = sph_harm_surface_grad(idx(1, 0), PI / 2.0, 0.0).unwrap();
        assert!((g.theta + (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-14);
        assert!(g.phi.abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-6;
        for n in 1..=10u32 {
            for k in [-(n as i32), -1, 0, 1, n as i32] {
                if k.unsigned_abs() > n {
                    continue;
                }
                let (t, p) = (1.234, 0.777);
                let g = sph_harm_surface_grad(idx(n, k), t, p).unwrap();
                let yt = |tt: f64| real_sph_harm(idx(n, k), tt, p).unwrap();
                let yp = |pp: f64| real_sph_harm(idx(n, k), t, pp).unwrap();
                let fd_t = (yt(t + h) - yt(t - h)) / (2.0 * h);
                let fd_p = (yp(p + h) - yp(p - h)) / (2.0 * h) / t.sin();
                assert!((g.theta - fd_t).abs() < 1e-8, "n={n}, k={k}");
                assert!((g.phi - fd_p).abs() < 1e-8, "n={n}, k={k}");
            }
        }
    }

    #[test]
    fn pole_and_index_rejection() {
        assert!(sph_harm_surface_grad(idx(2, 1), 0.0, 0.0).is_err());
        assert!(sph_harm_surface_grad(idx(2, 1), PI, 0.0).is_err());
        assert!(AngularIndex::new(2, 3).is_err());
        assert!(real_sph_harm(AngularIndex { n: 2, k: 3 }, 1.0, 1.0).is_err());
        assert!(real_sph_harm(idx(2, 1), -0.1, 0.0).is_err());
    }
}
