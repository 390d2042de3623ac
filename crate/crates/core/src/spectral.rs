//! Fourier analysis and synthesis in the eigenbases, and the operators S and
//! 𝒩_d as coefficient transforms.
//!
//! A coefficient vector assigns one real number to every mode of a basis. On
//! it S multiplies curl-family coefficients by the signed eigenvalue ±λⱼ,
//! 𝒩_d multiplies graddiv coefficients by −νⱼ², and the resolvents divide by
//! λ + λⱼ (plus family), λ − λⱼ (minus family) and ν² − νⱼ². When the shift
//! hits the spectrum the Fredholm alternative applies: the equation is
//! solvable iff the right-hand side is orthogonal to the resonant eigenfields,
//! the kernel is their span (dimension 2n+1 per resonant (n, m)), and the
//! minimum-norm particular solution zeroes the resonant coefficients.
//!
//! Truncation is explicit throughout: every transform acts on the finitely
//! enumerated modes of its basis and tail behavior is reported, never hidden.

use std::sync::Arc;

use crate::ballgrid::{inner_product, BallGrid, CompensatedSum, FieldSamples};
use crate::eigenbasis::{Basis, Mode, ModeFamily, ModeKey};
use crate::error::{Error, Result};

/// Resonance detection tolerance, as a fraction of the largest |eigenvalue|
/// in the relevant families. The continuous problem compares the shift with
/// the spectrum exactly; floating point needs a threshold.
pub const SPECTRUM_TOL_FACTOR: f64 = 1e-9;

/// Orthogonality tolerance for the Fredholm solvability test, as a fraction
/// of the coefficient-vector norm.
pub const ORTHOGONALITY_TOL_FACTOR: f64 = 1e-8;

/// Real coefficients of a field in an eigenbasis, aligned with
/// `basis.modes()` order.
#[derive(Debug, Clone)]
pub struct SpectralCoefficients {
    basis: Arc<Basis>,
    values: Vec<f64>,
}

impl SpectralCoefficients {
    pub fn zeros(basis: &Arc<Basis>) -> Self {
        SpectralCoefficients {
            basis: basis.clone(),
            values: vec![0.0; basis.len()],
        }
    }

    /// Build from (mode, value) pairs; every key must belong to the basis and
    /// appear at most once.
    pub fn from_pairs(basis: &Arc<Basis>, pairs: &[(ModeKey, f64)]) -> Result<Self> {
        let mut c = SpectralCoefficients::zeros(basis);
        let mut seen = std::collections::BTreeSet::new();
        for (key, v) in pairs {
            if !seen.insert(*key) {
                return Err(Error::InvalidInput(format!("duplicate mode {key}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient for {key}")));
            }
            let i = basis
                .position(key)
                .ok_or_else(|| Error::InvalidInput(format!("mode {key} not in basis")))?;
            c.values[i] = *v;
        }
        Ok(c)
    }

    pub fn unit(basis: &Arc<Basis>, key: ModeKey) -> Result<Self> {
        SpectralCoefficients::from_pairs(basis, &[(key, 1.0)])
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, key: &ModeKey) -> Option<f64> {
        self.basis.position(key).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, f64)> {
        self.basis.modes().iter().zip(self.values.iter().copied())
    }

    pub fn sum_squares(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for v in &self.values {
            acc.add(v * v);
        }
        acc.value()
    }

    pub fn norm(&self) -> f64 {
        self.sum_squares().max(0.0).sqrt()
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        same_basis(self, other)?;
        let mut acc = CompensatedSum::default();
        for (a, b) in self.values.iter().zip(&other.values) {
            acc.add(a * b);
        }
        Ok(acc.value())
    }

    pub fn scale(&self, a: f64) -> Self {
        SpectralCoefficients {
            basis: self.basis.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add_scaled(&self, other: &Self, a: f64) -> Result<Self> {
        same_basis(self, other)?;
        Ok(SpectralCoefficients {
            basis: self.basis.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }

    /// Keep coefficients of modes satisfying the predicate, zero the rest.
    pub fn restrict<F: Fn(ModeFamily) -> bool>(&self, keep: F) -> Self {
        let values = self
            .basis
            .modes()
            .iter()
            .zip(&self.values)
            .map(|(m, &v)| if keep(m.key.family) { v } else { 0.0 })
            .collect();
        SpectralCoefficients {
            basis: self.basis.clone(),
            values,
        }
    }

    /// Largest |coefficient| on modes the predicate selects.
    fn max_abs_on<F: Fn(ModeFamily) -> bool>(&self, pred: F) -> f64 {
        self.basis
            .modes()
            .iter()
            .zip(&self.values)
            .filter(|(m, _)| pred(m.key.family))
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }
}

fn same_basis(a: &SpectralCoefficients, b: &SpectralCoefficients) -> Result<()> {
    if Arc::ptr_eq(&a.basis, &b.basis)
        || (a.basis.radius() == b.basis.radius()
            && a.basis.families() == b.basis.families()
            && a.basis.n_max() == b.basis.n_max()
            && a.basis.m_max() == b.basis.m_max())
    {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "coefficient vectors over different bases".into(),
        ))
    }
}

/// Whether a grid's exactness envelope covers products of two basis fields.
/// The angular part is exact when N_θ ≥ n_max + 1 and N_φ ≥ 2 n_max + 2; the
/// radial heuristic asks for enough nodes to resolve the fastest profile.
pub fn projection_envelope_ok(grid: &BallGrid, basis: &Basis) -> bool {
    let (n_r, n_theta, n_phi) = grid.dims();
    let n_max = basis.n_max() as usize;
    let z_max = basis
        .modes()
        .iter()
        .map(|m| m.wavenumber() * basis.radius())
        .fold(0.0, f64::max);
    n_theta >= n_max + 1 && n_phi >= 2 * n_max + 2 && n_r >= (0.75 * z_max) as usize + 8
}

/// Projection cⱼ = (f, qⱼ) onto every mode of the basis.
pub fn project(f: &FieldSamples, basis: &Arc<Basis>) -> Result<SpectralCoefficients> {
    if f.grid().radius() != basis.radius() {
        return Err(Error::GridMismatch(format!(
            "grid radius {} vs basis radius {}",
            f.grid().radius(),
            basis.radius()
        )));
    }
    let grid = f.grid();
    let weights = grid.weights();
    let mut out = SpectralCoefficients::zeros(basis);
    for (i, mode) in basis.modes().iter().enumerate() {
        let q = basis.eval_mode(&mode.key, grid.points())?;
        let mut acc = CompensatedSum::default();
        for ((w, a), b) in weights.iter().zip(f.values()).zip(&q) {
            acc.add(w * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]));
        }
        out.values[i] = acc.value();
    }
    Ok(out)
}

/// Σⱼ cⱼ qⱼ(x) at arbitrary points; linear in c.
pub fn synthesize(c: &SpectralCoefficients, points: &[[f64; 3]]) -> Result<Vec<[f64; 3]>> {
    let mut out = vec![[0.0; 3]; points.len()];
    for (mode, v) in c.iter() {
        if v == 0.0 {
            continue;
        }
        let q = c.basis.eval_mode(&mode.key, points)?;
        for (o, qi) in out.iter_mut().zip(&q) {
            o[0] += v * qi[0];
            o[1] += v * qi[1];
            o[2] += v * qi[2];
        }
    }
    Ok(out)
}

/// Synthesis sampled on a grid.
pub fn synthesize_samples(c: &SpectralCoefficients, grid: &Arc<BallGrid>) -> Result<FieldSamples> {
    let values = synthesize(c, grid.points())?;
    FieldSamples::new(grid.clone(), values)
}

fn require_support<F: Fn(ModeFamily) -> bool>(
    c: &SpectralCoefficients,
    allowed: F,
    op: &str,
) -> Result<()> {
    let stray = c.max_abs_on(|f| !allowed(f));
    if stray > 0.0 {
        return Err(Error::FamilyMismatch(format!(
            "{op} requires support on its own families; foreign coefficient of magnitude {stray:e} present"
        )));
    }
    Ok(())
}

/// S: multiply curl-family coefficients by the signed eigenvalue ±λⱼ.
pub fn apply_s(c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    require_support(c, ModeFamily::is_curl, "apply_s")?;
    let values = c
        .basis
        .modes()
        .iter()
        .zip(&c.values)
        .map(|(m, &v)| if m.key.family.is_curl() { m.eigenvalue * v } else { 0.0 })
        .collect();
    Ok(SpectralCoefficients {
        basis: c.basis.clone(),
        values,
    })
}

/// S⁻¹: multiply curl-family coefficients by ±λⱼ⁻¹ (λⱼ ≠ 0 always).
pub fn apply_s_inverse(c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    require_support(c, ModeFamily::is_curl, "apply_s_inverse")?;
    let values = c
        .basis
        .modes()
        .iter()
        .zip(&c.values)
        .map(|(m, &v)| if m.key.family.is_curl() { v / m.eigenvalue } else { 0.0 })
        .collect();
    Ok(SpectralCoefficients {
        basis: c.basis.clone(),
        values,
    })
}

/// 𝒩_d: multiply graddiv coefficients by −νⱼ².
pub fn apply_nd(c: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    require_support(c, |f| f == ModeFamily::GradDiv, "apply_nd")?;
    let values = c
        .basis
        .modes()
        .iter()
        .zip(&c.values)
        .map(|(m, &v)| if m.key.family == ModeFamily::GradDiv { m.eigenvalue * v } else { 0.0 })
        .collect();
    Ok(SpectralCoefficients {
        basis: c.basis.clone(),
        values,
    })
}

/// Outcome of a resolvent application at a resonant shift.
#[derive(Debug, Clone)]
pub struct FredholmReport {
    /// The spectral shift (λ for the curl resolvent, ν² for graddiv).
    pub shift: f64,
    /// Kernel span: every enumerated mode whose denominator vanishes.
    pub kernel: Vec<ModeKey>,
    /// |cⱼ| on each kernel mode; solvability needs all ≤ `tol_orthogonality`.
    pub defects: Vec<(ModeKey, f64)>,
    pub solvable: bool,
    /// Minimum-norm particular solution (resonant coefficients zeroed);
    /// present iff solvable.
    pub particular: Option<SpectralCoefficients>,
    pub tol_spectrum: f64,
    pub tol_orthogonality: f64,
}

impl FredholmReport {
    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }
}

/// Either a regular resolvent application or a Fredholm report.
#[derive(Debug, Clone)]
pub enum ResolventOutcome {
    Regular(SpectralCoefficients),
    Fredholm(FredholmReport),
}

impl ResolventOutcome {
    /// The coefficient vector if one exists (regular, or resonant-solvable).
    pub fn solution(&self) -> Option<&SpectralCoefficients> {
        match self {
            ResolventOutcome::Regular(c) => Some(c),
            ResolventOutcome::Fredholm(r) => r.particular.as_ref(),
        }
    }
}

fn resolvent<F: Fn(ModeFamily) -> bool + Copy>(
    c: &SpectralCoefficients,
    shift: f64,
    families: F,
    op: &str,
) -> Result<ResolventOutcome> {
    require_support(c, families, op)?;
    let tol_spectrum = SPECTRUM_TOL_FACTOR * c.basis.max_abs_eigenvalue(families);
    let resonant: Vec<usize> = c
        .basis
        .modes()
        .iter()
        .enumerate()
        .filter(|(_, m)| families(m.key.family) && (shift + m.eigenvalue).abs() <= tol_spectrum)
        .map(|(i, _)| i)
        .collect();

    if resonant.is_empty() {
        let values = c
            .basis
            .modes()
            .iter()
            .zip(&c.values)
            .map(|(m, &v)| {
                if families(m.key.family) {
                    v / (shift + m.eigenvalue)
                } else {
                    0.0
                }
            })
            .collect();
        return Ok(ResolventOutcome::Regular(SpectralCoefficients {
            basis: c.basis.clone(),
            values,
        }));
    }

    let tol_orthogonality = ORTHOGONALITY_TOL_FACTOR * c.norm();
    let kernel: Vec<ModeKey> = resonant.iter().map(|&i| c.basis.modes()[i].key).collect();
    let defects: Vec<(ModeKey, f64)> = resonant
        .iter()
        .map(|&i| (c.basis.modes()[i].key, c.values[i].abs()))
        .collect();
    let solvable = defects.iter().all(|(_, d)| *d <= tol_orthogonality);
    let particular = if solvable {
        let values = c
            .basis
            .modes()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                if !families(m.key.family) || resonant.contains(&i) {
                    0.0
                } else {
                    c.values[i] / (shift + m.eigenvalue)
                }
            })
            .collect();
        Some(SpectralCoefficients {
            basis: c.basis.clone(),
            values,
        })
    } else {
        None
    };
    Ok(ResolventOutcome::Fredholm(FredholmReport {
        shift,
        kernel,
        defects,
        solvable,
        particular,
        tol_spectrum,
        tol_orthogonality,
    }))
}

/// (S + λI)⁻¹ on curl-family coefficients: divide by λ + λⱼ on the plus
/// family, λ − λⱼ on the minus family.
pub fn resolvent_curl(c: &SpectralCoefficients, lambda: f64) -> Result<ResolventOutcome> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda = {lambda} not finite")));
    }
    resolvent(c, lambda, ModeFamily::is_curl, "resolvent_curl")
}

/// (𝒩_d + ν²I)⁻¹ on graddiv coefficients: divide by ν² − νⱼ².
pub fn resolvent_graddiv(c: &SpectralCoefficients, nu2: f64) -> Result<ResolventOutcome> {
    if !(nu2 > 0.0) || !nu2.is_finite() {
        return Err(Error::Domain(format!("nu² = {nu2} must be positive")));
    }
    resolvent(c, nu2, |f| f == ModeFamily::GradDiv, "resolvent_graddiv")
}

/// Closure defect ‖f‖² − Σ cⱼ²: the squared L₂ distance from f to the span of
/// the projected basis (up to quadrature error).
pub fn parseval_defect(f: &FieldSamples, c: &SpectralCoefficients) -> Result<f64> {
    let norm2 = inner_product(f, f)?;
    Ok(norm2 - c.sum_squares())
}

/// Sobolev-scale diagnostics of a coefficient vector at one order.
#[derive(Debug, Clone)]
pub struct SobolevDiagnostics {
    pub order: u32,
    /// Σ (1 + σⱼ^{2k}) cⱼ² over all modes (weight 1 at k = 0, matching
    /// W⁰ ≡ V⁰); σⱼ^{2k} = λⱼ^{2k} on curl modes and νⱼ^{4k} on graddiv modes.
    pub weighted_sum: f64,
    pub curl_weighted: f64,
    pub graddiv_weighted: f64,
    /// Plain Parseval sum Σ cⱼ².
    pub plain_sum: f64,
    /// Share of the weighted sum carried by the top quartile of |eigenvalue|.
    pub tail_fraction: f64,
    /// Least-squares slope of ln cⱼ² against ln |σⱼ| over nonzero
    /// coefficients; `None` with fewer than two support points.
    pub decay_exponent: Option<f64>,
}

fn sobolev_weight(order: u32, eigenvalue: f64) -> f64 {
    if order == 0 {
        1.0
    } else {
        1.0 + eigenvalue.powi(2 * order as i32)
    }
}

/// Wᵏ / A²ᵏ_γ norm of a coefficient vector as a weighted Parseval sum.
pub fn sobolev_norm(c: &SpectralCoefficients, order: u32) -> SobolevDiagnostics {
    let mut curl = CompensatedSum::default();
    let mut graddiv = CompensatedSum::default();
    let mut plain = CompensatedSum::default();
    for (mode, v) in c.iter() {
        let w = sobolev_weight(order, mode.eigenvalue) * v * v;
        plain.add(v * v);
        if mode.key.family.is_curl() {
            curl.add(w);
        } else {
            graddiv.add(w);
        }
    }
    let weighted_sum = curl.value() + graddiv.value();

    // tail: top quartile of the basis modes by |eigenvalue|
    let mut order_by_mag: Vec<usize> = (0..c.basis.len()).collect();
    order_by_mag.sort_by(|&a, &b| {
        let (ma, mb) = (&c.basis.modes()[a], &c.basis.modes()[b]);
        ma.eigenvalue
            .abs()
            .partial_cmp(&mb.eigenvalue.abs())
            .unwrap()
            .then_with(|| ma.key.cmp(&mb.key))
    });
    let tail_count = c.basis.len().div_ceil(4);
    let mut tail = CompensatedSum::default();
    for &i in order_by_mag.iter().rev().take(tail_count) {
        let mode = &c.basis.modes()[i];
        tail.add(sobolev_weight(order, mode.eigenvalue) * c.values[i] * c.values[i]);
    }
    let tail_fraction = if weighted_sum > 0.0 {
        (tail.value() / weighted_sum).clamp(0.0, 1.0)
    } else {
        0.0
    };

    // decay fit over nonzero coefficients
    let pts: Vec<(f64, f64)> = c
        .iter()
        .filter(|(m, v)| *v != 0.0 && m.eigenvalue.abs() > 0.0)
        .map(|(m, v)| (m.eigenvalue.abs().ln(), (v * v).ln()))
        .collect();
    let decay_exponent = if pts.len() >= 2 && pts.iter().any(|(x, _)| *x != pts[0].0) {
        let nf = pts.len() as f64;
        let sx: f64 = pts.iter().map(|(x, _)| x).sum();
        let sy: f64 = pts.iter().map(|(_, y)| y).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
        Some((nf * sxy - sx * sy) / (nf * sxx - sx * sx))
    } else {
        None
    };

    SobolevDiagnostics {
        order,
        weighted_sum,
        curl_weighted: curl.value(),
        graddiv_weighted: graddiv.value(),
        plain_sum: plain.value(),
        tail_fraction,
        decay_exponent,
    }
}

/// The forward and inverse mapping constants of S + λI between Wᵐ⁺¹ and Wᵐ,
/// with the modes attaining them.
#[derive(Debug, Clone)]
pub struct OperatorBounds {
    pub order: u32,
    pub shift: f64,
    /// ‖(S+λI)f‖_{Wᵐ} ≤ c_m ‖f‖_{Wᵐ⁺¹}.
    pub c_m: f64,
    pub c_mode: ModeKey,
    /// ‖(S+λI)⁻¹f‖_{Wᵐ⁺¹} ≤ C_m ‖f‖_{Wᵐ}.
    pub cap_m: f64,
    pub cap_mode: ModeKey,
}

/// Bound constants over the enumerated curl modes.
///
/// Per mode, c uses the ratio (1 + λⱼ^{2m})(λ ± λⱼ)² / λⱼ^{2(m+1)} — at m = 0
/// this is |1 ± λ/λⱼ|², which equals 1 identically at λ = 0 — and C uses the
/// sharp ratio (1 + λⱼ^{2(m+1)}) / ((1 + λⱼ^{2m})(λ ± λⱼ)²). Both dominate
/// the per-mode norm ratios, so the advertised inequalities hold with
/// nonnegative slack on every coefficient vector.
pub fn operator_bound_constants(lambda: f64, basis: &Arc<Basis>, m: u32) -> Result<OperatorBounds> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda = {lambda} not finite")));
    }
    let curl_modes: Vec<&Mode> = basis
        .modes()
        .iter()
        .filter(|md| md.key.family.is_curl())
        .collect();
    if curl_modes.is_empty() {
        return Err(Error::InvalidInput(
            "operator bounds need curl modes in the basis".into(),
        ));
    }
    let tol = SPECTRUM_TOL_FACTOR * basis.max_abs_eigenvalue(ModeFamily::is_curl);
    let mut c_best = f64::NEG_INFINITY;
    let mut c_mode = curl_modes[0].key;
    let mut cap_best = f64::NEG_INFINITY;
    let mut cap_mode = curl_modes[0].key;
    let mut resonant = false;
    for md in &curl_modes {
        let sigma = md.eigenvalue;
        let denom = shiftabs(lambda, sigma);
        if denom <= tol {
            resonant = true;
        }
        let w_m = sobolev_weight(m, sigma);
        let w_m1 = sobolev_weight(m + 1, sigma);
        let ratio_c = w_m * (lambda + sigma) * (lambda + sigma) / sigma.abs().powi(2 * (m as i32 + 1));
        if ratio_c > c_best {
            c_best = ratio_c;
            c_mode = md.key;
        }
        if !resonant {
            let ratio_cap = w_m1 / (w_m * (lambda + sigma) * (lambda + sigma));
            if ratio_cap > cap_best {
                cap_best = ratio_cap;
                cap_mode = md.key;
            }
        }
    }
    if resonant {
        return Err(Error::Resonance(format!(
            "lambda = {lambda} within {tol:e} of the enumerated spectrum; C_m undefined"
        )));
    }
    Ok(OperatorBounds {
        order: m,
        shift: lambda,
        c_m: c_best.sqrt(),
        c_mode,
        cap_m: cap_best.sqrt(),
        cap_mode,
    })
}

fn shiftabs(shift: f64, eigenvalue: f64) -> f64 {
    (shift + eigenvalue).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballgrid::{l2_norm, BallGrid};
    use crate::eigenbasis::Basis;

    const RHO_11: f64 = 4.493409457909064;
    const ALPHA_11: f64 = 2.0815759778181;

    fn small_basis() -> Arc<Basis> {
        Arc::new(Basis::union(2, 2, 1.0).unwrap())
    }

    fn key(family: ModeFamily, n: u32, m: u32, k: i32) -> ModeKey {
        ModeKey { family, n, m, k }
    }

    #[test]
    fn project_recovers_single_mode() {
        let basis = small_basis();
        let grid = BallGrid::build(1.0, 24, 16, 24).unwrap();
        let target = key(ModeFamily::CurlPlus, 2, 1, -1);
        let f = basis.eval_mode_samples(&target, &grid).unwrap();
        let c = project(&f, &basis).unwrap();
        for (mode, v) in c.iter() {
            if mode.key == target {
                assert!((v - 1.0).abs() < 1e-8);
            } else {
                assert!(v.abs() < 1e-8, "{}: {v:e}", mode.key);
            }
        }
    }

    #[test]
    fn project_zero_field_and_constant_field() {
        let basis = small_basis();
        let grid = BallGrid::build(1.0, 24, 16, 24).unwrap();
        let z = FieldSamples::zeros(&grid);
        let c = project(&z, &basis).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));

        // a constant field is a gradient: zero projection on curl families
        let ez = FieldSamples::from_fn(&grid, |_| [0.0, 0.0, 1.0]).unwrap();
        let c = project(&ez, &basis).unwrap();
        for (mode, v) in c.iter() {
            if mode.key.family.is_curl() {
                assert!(v.abs() < 1e-8, "{}: {v:e}", mode.key);
            }
        }
    }

    #[test]
    fn synthesis_round_trip_and_linearity() {
        let basis = small_basis();
        let grid = BallGrid::build(1.0, 24, 16, 24).unwrap();
        let target = key(ModeFamily::GradDiv, 1, 1, 0);
        let f = basis.eval_mode_samples(&target, &grid).unwrap();
        let c = project(&f, &basis).unwrap();
        let back = synthesize_samples(&c, &grid).unwrap();
        let diff = back.add_scaled(&f, -1.0).unwrap();
        let sup = diff
            .values()
            .iter()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(sup < 1e-8, "sup deviation {sup:e}");

        let c1 = SpectralCoefficients::unit(&basis, key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap();
        let c2 = SpectralCoefficients::unit(&basis, key(ModeFamily::CurlMinus, 2, 1, 1)).unwrap();
        let combo = c1.scale(2.0).add_scaled(&c2, -3.0).unwrap();
        let pts = [[0.3, 0.2, 0.1], [0.0, -0.4, 0.5]];
        let lhs = synthesize(&combo, &pts).unwrap();
        let a = synthesize(&c1, &pts).unwrap();
        let b = synthesize(&c2, &pts).unwrap();
        for i in 0..pts.len() {
            for j in 0..3 {
                assert!((lhs[i][j] - (2.0 * a[i][j] - 3.0 * b[i][j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn apply_s_signs() {
        let basis = small_basis();
        let plus = SpectralCoefficients::unit(&basis, key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap();
        let s = apply_s(&plus).unwrap();
        assert!((s.get(&key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap() - RHO_11).abs() < 1e-12);

        let minus = SpectralCoefficients::unit(&basis, key(ModeFamily::CurlMinus, 1, 1, 0)).unwrap();
        let s = apply_s(&minus).unwrap();
        assert!((s.get(&key(ModeFamily::CurlMinus, 1, 1, 0)).unwrap() + RHO_11).abs() < 1e-12);
    }

    #[test]
    fn apply_nd_squares_wavenumber() {
        let basis = small_basis();
        let c = SpectralCoefficients::unit(&basis, key(ModeFamily::GradDiv, 0, 1, 0)).unwrap();
        let out = apply_nd(&c).unwrap();
        let got = out.get(&key(ModeFamily::GradDiv, 0, 1, 0)).unwrap();
        assert!((got + RHO_11 * RHO_11).abs() < 1e-10); // −ν² = −20.19072856...
        assert!((got + 20.190728556426629).abs() < 1e-9);
    }

    #[test]
    fn family_mismatch_rejected() {
        let basis = small_basis();
        let c = SpectralCoefficients::unit(&basis, key(ModeFamily::GradDiv, 0, 1, 0)).unwrap();
        assert!(apply_s(&c).is_err());
        assert!(apply_s_inverse(&c).is_err());
        assert!(resolvent_curl(&c, 1.0).is_err());
        let d = SpectralCoefficients::unit(&basis, key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap();
        assert!(apply_nd(&d).is_err());
        assert!(resolvent_graddiv(&d, 1.0).is_err());
    }

    #[test]
    fn s_inverse_is_inverse() {
        let basis = small_basis();
        let pairs = [
            (key(ModeFamily::CurlPlus, 1, 1, 0), 0.7),
            (key(ModeFamily::CurlMinus, 2, 2, -2), -1.3),
        ];
        let c = SpectralCoefficients::from_pairs(&basis, &pairs).unwrap();
        let back = apply_s_inverse(&apply_s(&c).unwrap()).unwrap();
        for (m, v) in back.iter() {
            let orig = c.get(&m.key).unwrap();
            assert!((v - orig).abs() <= 1e-15 * orig.abs().max(1.0));
        }
        let inv = apply_s_inverse(
            &SpectralCoefficients::unit(&basis, key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap(),
        )
        .unwrap();
        assert!(
            (inv.get(&key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap() - 1.0 / RHO_11).abs() < 1e-14
        );
    }

    #[test]
    fn resolvent_regular_values() {
        let basis = small_basis();
        let c = SpectralCoefficients::unit(&basis, key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap();
        // λ = 0 reduces to S⁻¹
        match resolvent_curl(&c, 0.0).unwrap() {
            ResolventOutcome::Regular(out) => {
                assert!(
                    (out.get(&key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap() - 1.0 / RHO_11).abs()
                        < 1e-14
                );
            }
            _ => panic!("unexpected resonance"),
        }
        match resolvent_curl(&c, 1.0).unwrap() {
            ResolventOutcome::Regular(out) => {
                let expected = 1.0 / 5.493409457909064;
                assert!(
                    (out.get(&key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap() - expected).abs()
                        < 1e-14
                );
            }
            _ => panic!("unexpected resonance"),
        }
    }

    #[test]
    fn resolvent_round_trip() {
        let basis = small_basis();
        let pairs = [
            (key(ModeFamily::CurlPlus, 1, 2, 1), 0.9),
            (key(ModeFamily::CurlMinus, 2, 1, 0), 0.4),
        ];
        let c = SpectralCoefficients::from_pairs(&basis, &pairs).unwrap();
        let lambda = 0.77;
        let out = match resolvent_curl(&c, lambda).unwrap() {
            ResolventOutcome::Regular(o) => o,
            _ => panic!(),
        };
        // multiply back by (λ + σⱼ)
        let back = apply_s(&out).unwrap().add_scaled(&out, lambda).unwrap();
        for (m, v) in back.iter() {
            let orig = c.get(&m.key).unwrap();
            assert!((v - orig).abs() <= 1e-14 * orig.abs().max(1.0), "{}", m.key);
        }
    }

    #[test]
    fn resolvent_fredholm_non_solvable() {
        let basis = small_basis();
        let resonant = key(ModeFamily::CurlMinus, 1, 1, 0);
        let c = SpectralCoefficients::unit(&basis, resonant).unwrap();
        match resolvent_curl(&c, RHO_11).unwrap() {
            ResolventOutcome::Fredholm(rep) => {
                assert!(!rep.solvable);
                assert_eq!(rep.kernel_dim(), 3); // 2·1+1
                assert!(rep.kernel.iter().all(|k| k.family == ModeFamily::CurlMinus
                    && k.n == 1
                    && k.m == 1));
                assert!(rep.particular.is_none());
            }
            _ => panic!("resonance not detected"),
        }
    }

    #[test]
    fn resolvent_fredholm_solvable() {
        let basis = small_basis();
        let c = SpectralCoefficients::unit(&basis, key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap();
        match resolvent_curl(&c, RHO_11).unwrap() {
            ResolventOutcome::Fredholm(rep) => {
                assert!(rep.solvable);
                assert_eq!(rep.kernel_dim(), 3);
                let p = rep.particular.unwrap();
                let expected = 1.0 / (2.0 * RHO_11);
                assert!(
                    (p.get(&key(ModeFamily::CurlPlus, 1, 1, 0)).unwrap() - expected).abs() < 1e-12
                );
                for k in &rep.kernel {
                    assert_eq!(p.get(k).unwrap(), 0.0);
                }
            }
            _ => panic!("resonance not detected"),
        }
    }

    #[test]
    fn resolvent_graddiv_values_and_kernel() {
        let basis = small_basis();
        let k11 = key(ModeFamily::GradDiv, 1, 1, 0);
        let c = SpectralCoefficients::unit(&basis, k11).unwrap();
        match resolvent_graddiv(&c, 1.0).unwrap() {
            ResolventOutcome::Regular(out) => {
                let expected = 1.0 / (1.0 - ALPHA_11 * ALPHA_11);
                let got = out.get(&k11).unwrap();
                assert!((got - expected).abs() < 1e-10);
                assert!((got + 0.300033).abs() < 1e-6);
            }
            _ => panic!(),
        }
        // resonance at ν = α₀₁ with f supported there: kernel dimension 1
        let k0 = key(ModeFamily::GradDiv, 0, 1, 0);
        let c = SpectralCoefficients::unit(&basis, k0).unwrap();
        let nu2 = RHO_11 * RHO_11; // α₀₁ = ρ₁₁
        match resolvent_graddiv(&c, nu2).unwrap() {
            ResolventOutcome::Fredholm(rep) => {
                assert!(!rep.solvable);
                assert_eq!(rep.kernel_dim(), 1);
                assert_eq!(rep.kernel[0], k0);
            }
            _ => panic!("resonance not detected"),
        }
        // ν² strictly below ν₁² (= α₁₁², the smallest): all denominators positive
        let c = SpectralCoefficients::from_pairs(
            &basis,
            &[(k0, 1.0), (k11, 2.0), (key(ModeFamily::GradDiv, 2, 2, 2), 3.0)],
        )
        .unwrap();
        match resolvent_graddiv(&c, 0.5 * ALPHA_11 * ALPHA_11).unwrap() {
            ResolventOutcome::Regular(out) => {
                assert!(out.values().iter().all(|v| v.is_finite()));
            }
            _ => panic!(),
        }
        assert!(resolvent_graddiv(&c, 0.0).is_err());
        assert!(resolvent_graddiv(&c, -1.0).is_err());
    }

    #[test]
    fn parseval_defect_on_span_and_off_span() {
        let basis = small_basis();
        let grid = BallGrid::build(1.0, 24, 16, 24).unwrap();
        let c = SpectralCoefficients::from_pairs(
            &basis,
            &[
                (key(ModeFamily::CurlPlus, 1, 1, 0), 1.0),
                (key(ModeFamily::GradDiv, 1, 2, -1), -0.5),
            ],
        )
        .unwrap();
        let f = synthesize_samples(&c, &grid).unwrap();
        let proj = project(&f, &basis).unwrap();
        let defect = parseval_defect(&f, &proj).unwrap();
        let norm2 = inner_product(&f, &f).unwrap();
        assert!(defect.abs() < 1e-8 * norm2);

        // constant field against curl families only: defect carries everything
        let curl_basis = Arc::new(
            Basis::enumerate(
                &[ModeFamily::CurlPlus, ModeFamily::CurlMinus],
                2,
                2,
                1.0,
            )
            .unwrap(),
        );
        let ez = FieldSamples::from_fn(&grid, |_| [0.0, 0.0, 1.0]).unwrap();
        let cz = project(&ez, &curl_basis).unwrap();
        let defect = parseval_defect(&ez, &cz).unwrap();
        let norm2 = l2_norm(&ez).powi(2);
        assert!((defect - norm2).abs() < 1e-6 * norm2);
    }

    #[test]
    fn sobolev_weights() {
        let basis = small_basis();
        let k = key(ModeFamily::CurlPlus, 1, 1, 0);
        let c = SpectralCoefficients::unit(&basis, k).unwrap();
        let d0 = sobolev_norm(&c, 0);
        assert!((d0.weighted_sum - 1.0).abs() < 1e-15);
        let d1 = sobolev_norm(&c, 1);
        assert!((d1.weighted_sum - (1.0 + RHO_11 * RHO_11)).abs() < 1e-12);
        assert!(d1.weighted_sum >= d1.plain_sum);
        assert!((0.0..=1.0).contains(&d1.tail_fraction));

        let g = SpectralCoefficients::unit(&basis, key(ModeFamily::GradDiv, 1, 1, 0)).unwrap();
        let d1 = sobolev_norm(&g, 1);
        let nu2 = ALPHA_11 * ALPHA_11;
        assert!((d1.weighted_sum - (1.0 + nu2 * nu2)).abs() < 1e-9);
    }

    #[test]
    fn bound_constants_at_zero_shift() {
        let basis = small_basis();
        let b = operator_bound_constants(0.0, &basis, 0).unwrap();
        assert!((b.c_m - 1.0).abs() < 1e-14);
        assert!(b.cap_m > 1.0);
        // C₀² = max (1+λⱼ²)/λⱼ², attained at the smallest |λⱼ|
        let expected = ((1.0 + RHO_11 * RHO_11) / (RHO_11 * RHO_11)).sqrt();
        assert!((b.cap_m - expected).abs() < 1e-12);
        assert!(operator_bound_constants(RHO_11, &basis, 0).is_err());
    }

    #[test]
    fn bound_inequalities_hold_on_random_vectors() {
        use rand::{Rng, SeedableRng};
        let basis = small_basis();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &lambda in &[0.0, 1.0, -2.5, 6.0] {
            for m in 0..=2u32 {
                let b = operator_bound_constants(lambda, &basis, m).unwrap();
                for _ in 0..20 {
                    let pairs: Vec<(ModeKey, f64)> = basis
                        .modes()
                        .iter()
                        .filter(|md| md.key.family.is_curl())
                        .map(|md| (md.key, rng.gen_range(-1.0..1.0)))
                        .collect();
                    let c = SpectralCoefficients::from_pairs(&basis, &pairs).unwrap();
                    let shifted = apply_s(&c).unwrap().add_scaled(&c, lambda).unwrap();
                    let lhs = sobolev_norm(&shifted, m).weighted_sum;
                    let rhs = b.c_m * b.c_m * sobolev_norm(&c, m + 1).weighted_sum;
                    assert!(lhs <= rhs * (1.0 + 1e-12), "c_m violated: {lhs} > {rhs}");

                    if let ResolventOutcome::Regular(inv) = resolvent_curl(&c, lambda).unwrap() {
                        let lhs = sobolev_norm(&inv, m + 1).weighted_sum;
                        let rhs = b.cap_m * b.cap_m * sobolev_norm(&c, m).weighted_sum;
                        assert!(lhs <= rhs * (1.0 + 1e-12), "C_m violated: {lhs} > {rhs}");
                    } else {
                        panic!("unexpected resonance at lambda = {lambda}");
                    }
                }
            }
        }
    }

    #[test]
    fn self_adjointness_bilinear_form() {
        use rand::{Rng, SeedableRng};
        let basis = small_basis();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let rand_curl = |rng: &mut rand_chacha::ChaCha8Rng| {
                let pairs: Vec<(ModeKey, f64)> = basis
                    .modes()
                    .iter()
                    .filter(|md| md.key.family.is_curl())
                    .map(|md| (md.key, rng.gen_range(-1.0..1.0)))
                    .collect();
                SpectralCoefficients::from_pairs(&basis, &pairs).unwrap()
            };
            let f = rand_curl(&mut rng);
            let g = rand_curl(&mut rng);
            let sf_g = apply_s(&f).unwrap().dot(&g).unwrap();
            let f_sg = f.dot(&apply_s(&g).unwrap()).unwrap();
            let scale = sf_g.abs().max(f_sg.abs()).max(1.0);
            assert!((sf_g - f_sg).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn compactness_proxy_inverse_eigenvalues_decrease() {
        let basis = Arc::new(Basis::union(4, 3, 1.0).unwrap());
        let mut inv: Vec<f64> = basis
            .modes()
            .iter()
            .filter(|m| m.key.family == ModeFamily::CurlPlus)
            .map(|m| 1.0 / m.eigenvalue.abs())
            .collect();
        inv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for w in inv.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(inv.last().unwrap() < &inv[0]);
    }

    #[test]
    fn duplicate_and_foreign_modes_rejected() {
        let basis = small_basis();
        let k = key(ModeFamily::CurlPlus, 1, 1, 0);
        assert!(SpectralCoefficients::from_pairs(&basis, &[(k, 1.0), (k, 2.0)]).is_err());
        let foreign = key(ModeFamily::CurlPlus, 5, 1, 0);
        assert!(SpectralCoefficients::from_pairs(&basis, &[(foreign, 1.0)]).is_err());
    }
}
