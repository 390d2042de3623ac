//! Independent finite-difference differential operators on analytic field
//! evaluators. These are the oracle used to verify the eigenfields and the
//! solver; they share no code with the spectral pipeline.
//!
//! All stencils are central differences, O(h²). An evaluator is any
//! `Fn([f64; 3]) -> [f64; 3]` mapping a point of the open ball to three real
//! components.

use crate::error::{Error, Result};

/// Default FD step as a fraction of the domain radius. Balances O(h²)
/// truncation against rounding for double precision; overridable everywhere.
pub const DEFAULT_STEP_FRACTION: f64 = 1e-4;

fn check_stencil(x: [f64; 3], h: f64, domain_radius: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("step h = {h} must be positive")));
    }
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r + 2.0 * h > domain_radius {
        return Err(Error::OutsideDomain(format!(
            "stencil of radius 2h = {} around |x| = {r} leaves the ball of radius {domain_radius}",
            2.0 * h
        )));
    }
    Ok(())
}

fn shifted(x: [f64; 3], axis: usize, delta: f64) -> [f64; 3] {
    let mut y = x;
    y[axis] += delta;
    y
}

/// ∂f/∂xᵢ by central difference.
fn partial<F: Fn([f64; 3]) -> [f64; 3]>(f: &F, x: [f64; 3], axis: usize, h: f64) -> [f64; 3] {
    let a = f(shifted(x, axis, h));
    let b = f(shifted(x, axis, -h));
    [
        (a[0] - b[0]) / (2.0 * h),
        (a[1] - b[1]) / (2.0 * h),
        (a[2] - b[2]) / (2.0 * h),
    ]
}

/// Central-difference curl, O(h²).
pub fn fd_curl<F: Fn([f64; 3]) -> [f64; 3]>(
    f: &F,
    x: [f64; 3],
    h: f64,
    domain_radius: f64,
) -> Result<[f64; 3]> {
    check_stencil(x, h, domain_radius)?;
    let dx = partial(f, x, 0, h);
    let dy = partial(f, x, 1, h);
    let dz = partial(f, x, 2, h);
    Ok([dy[2] - dz[1], dz[0] - dx[2], dx[1] - dy[0]])
}

/// Central-difference divergence, O(h²).
pub fn fd_div<F: Fn([f64; 3]) -> [f64; 3]>(
    f: &F,
    x: [f64; 3],
    h: f64,
    domain_radius: f64,
) -> Result<f64> {
    check_stencil(x, h, domain_radius)?;
    Ok(fd_div_unchecked(f, x, h))
}

fn fd_div_unchecked<F: Fn([f64; 3]) -> [f64; 3]>(f: &F, x: [f64; 3], h: f64) -> f64 {
    let dx = partial(f, x, 0, h);
    let dy = partial(f, x, 1, h);
    let dz = partial(f, x, 2, h);
    dx[0] + dy[1] + dz[2]
}

/// ∇(div f) by nested central differences, O(h²).
pub fn fd_graddiv<F: Fn([f64; 3]) -> [f64; 3]>(
    f: &F,
    x: [f64; 3],
    h: f64,
    domain_radius: f64,
) -> Result<[f64; 3]> {
    check_stencil(x, h, domain_radius)?;
    let mut out = [0.0; 3];
    for (axis, slot) in out.iter_mut().enumerate() {
        let a = fd_div_unchecked(f, shifted(x, axis, h), h);
        let b = fd_div_unchecked(f, shifted(x, axis, -h), h);
        *slot = (a - b) / (2.0 * h);
    }
    Ok(out)
}

/// Componentwise Laplacian by second central differences, O(h²).
pub fn fd_laplacian<F: Fn([f64; 3]) -> [f64; 3]>(
    f: &F,
    x: [f64; 3],
    h: f64,
    domain_radius: f64,
) -> Result<[f64; 3]> {
    check_stencil(x, h, domain_radius)?;
    let center = f(x);
    let mut out = [0.0; 3];
    for axis in 0..3 {
        let a = f(shifted(x, axis, h));
        let b = f(shifted(x, axis, -h));
        for c in 0..3 {
            out[c] += (a[c] - 2.0 * center[c] + b[c]) / (h * h);
        }
    }
    Ok(out)
}
