//! Orthonormal eigenfields of the curl and gradient-of-divergence operators
//! in the ball of radius R.
//!
//! Construction. For the curl families take the scalar wave h = ψₙ(|λ|r)Yₙᵏ
//! with Δh + λ²h = 0, the toroidal field T = ∇h × x and the poloidal field
//! P = (1/λ) rot T; then q = T + P satisfies rot q = λq, div q = 0, and
//! n·q|_{r=R} ∝ n(n+1) ψₙ(|λ|R) Y = 0 exactly when |λ|R is a zero of ψₙ.
//! With λ = ±ρₙₘ/R this yields the q⁺/q⁻ families. For the
//! gradient-of-divergence family q = ∇h/ν with h = ψₙ(νr)Yₙᵏ and ν = αₙₘ/R,
//! so ∇div q = −ν²q, rot q = 0 and n·q ∝ ψ′ₙ(νR) = 0.
//!
//! In spherical components, with z = |λ|r, u = ψₙ(z), and (Y, Gθ, Gφ) the
//! harmonic and its surface gradient:
//!
//!   curl:    q_r = ± n(n+1) (u/z) Y,
//!            q_θ = ± (u/z + ψ′ₙ(z)) Gθ + u Gφ,
//!            q_φ = ± (u/z + ψ′ₙ(z)) Gφ − u Gθ,
//!   graddiv: q_r = ψ′ₙ(z) Y,   q_θ = (u/z) Gθ,   q_φ = (u/z) Gφ,
//!
//! all divided by the L₂ normalization constant. u/z is evaluated by series
//! near z = 0, so the origin and near-origin values are regular; every mode
//! with n ≥ 2 vanishes at the origin like r^{n−1}.
//!
//! Normalization constants come from high-order radial Gauss–Legendre
//! quadrature of the closed-form radial factors; the full-grid l2 norm and
//! the Lommel-type closed forms serve as independent cross-checks in tests.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::ballgrid::{gauss_legendre, BallGrid, CompensatedSum, FieldSamples};
use crate::error::{Error, Result};
use crate::harmonics::angular_factors;
use crate::specfun::{dpsi_unchecked, psi_over_z, psi_unchecked, ZeroFamily, ZeroTable};

/// Eigenfamily of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum ModeFamily {
    /// rot q = +λ q, λ = ρₙₘ/R.
    CurlPlus,
    /// rot q = −λ q.
    CurlMinus,
    /// ∇div q = −ν² q, ν = αₙₘ/R.
    GradDiv,
}

impl ModeFamily {
    pub const ALL: [ModeFamily; 3] = [ModeFamily::CurlPlus, ModeFamily::CurlMinus, ModeFamily::GradDiv];

    /// Smallest degree n carried by the family.
    pub fn min_degree(self) -> u32 {
        match self {
            ModeFamily::CurlPlus | ModeFamily::CurlMinus => 1,
            ModeFamily::GradDiv => 0,
        }
    }

    pub fn is_curl(self) -> bool {
        matches!(self, ModeFamily::CurlPlus | ModeFamily::CurlMinus)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeFamily::CurlPlus => "curl_plus",
            ModeFamily::CurlMinus => "curl_minus",
            ModeFamily::GradDiv => "graddiv",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "curl_plus" => Some(ModeFamily::CurlPlus),
            "curl_minus" => Some(ModeFamily::CurlMinus),
            "graddiv" => Some(ModeFamily::GradDiv),
            _ => None,
        }
    }
}

/// Discrete identity of a mode: (family, n, m, k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeKey {
    pub family: ModeFamily,
    pub n: u32,
    pub m: u32,
    pub k: i32,
}

impl std::fmt::Display for ModeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({},{},{})", self.family.name(), self.n, self.m, self.k)
    }
}

/// One eigentriple with its eigenvalue and per-family position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub key: ModeKey,
    /// λ = ±ρₙₘ/R for the curl families, −νₙₘ² for the graddiv family.
    pub eigenvalue: f64,
    /// Per-family index j ≥ 1, ordered by |eigenvalue| ascending with ties
    /// broken by (n, m, k).
    pub index: u32,
}

impl Mode {
    /// Spatial frequency of the radial profile: ρₙₘ/R or νₙₘ = αₙₘ/R.
    pub fn wavenumber(&self) -> f64 {
        match self.key.family {
            ModeFamily::CurlPlus | ModeFamily::CurlMinus => self.eigenvalue.abs(),
            ModeFamily::GradDiv => (-self.eigenvalue).sqrt(),
        }
    }
}

/// An enumerated, normalized set of eigenfields.
#[derive(Debug, Clone)]
pub struct Basis {
    radius: f64,
    n_max: u32,
    m_max: u32,
    families: Vec<ModeFamily>,
    modes: Vec<Mode>,
    norms: Vec<f64>,
    lookup: BTreeMap<ModeKey, usize>,
}

/// All modes of one family with n ≤ n_max, m ≤ m_max, |k| ≤ n.
pub fn enumerate_modes(family: ModeFamily, n_max: u32, m_max: u32, radius: f64) -> Result<Basis> {
    Basis::enumerate(&[family], n_max, m_max, radius)
}

impl Basis {
    /// Union basis over all three families.
    pub fn union(n_max: u32, m_max: u32, radius: f64) -> Result<Basis> {
        Basis::enumerate(&ModeFamily::ALL, n_max, m_max, radius)
    }

    pub fn enumerate(families: &[ModeFamily], n_max: u32, m_max: u32, radius: f64) -> Result<Basis> {
        Basis::enumerate_with_tables(families, n_max, m_max, radius, None, None)
    }

    /// Enumerate using pre-built zero tables (for example from the cache);
    /// tables must match the radius and cover the requested index range.
    pub fn enumerate_with_tables(
        families: &[ModeFamily],
        n_max: u32,
        m_max: u32,
        radius: f64,
        curl_table: Option<ZeroTable>,
        graddiv_table: Option<ZeroTable>,
    ) -> Result<Basis> {
        if families.is_empty() {
            return Err(Error::InvalidInput("no families requested".into()));
        }
        let mut fams: Vec<ModeFamily> = families.to_vec();
        fams.sort();
        fams.dedup();
        for f in &fams {
            if n_max < f.min_degree() {
                return Err(Error::Domain(format!(
                    "n_max = {n_max} below minimum degree {} of family {}",
                    f.min_degree(),
                    f.name()
                )));
            }
        }
        if m_max < 1 {
            return Err(Error::Domain("m_max must be at least 1".into()));
        }

        let check_table = |table: &ZeroTable, family: ZeroFamily| -> Result<()> {
            if table.family != family {
                return Err(Error::InvalidInput(format!(
                    "injected table for {} where {} expected",
                    table.family.name(),
                    family.name()
                )));
            }
            if table.radius != radius {
                return Err(Error::InvalidInput(format!(
                    "injected table radius {} does not match {radius}",
                    table.radius
                )));
            }
            for n in family.min_degree()..=n_max {
                for m in 1..=m_max {
                    if table.get(n, m).is_none() {
                        return Err(Error::InvalidInput(format!(
                            "injected {} table missing entry (n, m) = ({n}, {m})",
                            family.name()
                        )));
                    }
                }
            }
            Ok(())
        };

        let need_curl = fams.iter().any(|f| f.is_curl());
        let need_graddiv = fams.contains(&ModeFamily::GradDiv);
        let curl_table = match (need_curl, curl_table) {
            (false, _) => None,
            (true, Some(t)) => {
                check_table(&t, ZeroFamily::Curl)?;
                Some(t)
            }
            (true, None) => Some(ZeroTable::build(ZeroFamily::Curl, radius, n_max, m_max)?),
        };
        let graddiv_table = match (need_graddiv, graddiv_table) {
            (false, _) => None,
            (true, Some(t)) => {
                check_table(&t, ZeroFamily::GradDiv)?;
                Some(t)
            }
            (true, None) => Some(ZeroTable::build(ZeroFamily::GradDiv, radius, n_max, m_max)?),
        };

        let mut modes = Vec::new();
        let mut norm_by_profile: BTreeMap<(bool, u32, u32), f64> = BTreeMap::new();
        for &family in &fams {
            let table = match family {
                ModeFamily::CurlPlus | ModeFamily::CurlMinus => curl_table.as_ref().unwrap(),
                ModeFamily::GradDiv => graddiv_table.as_ref().unwrap(),
            };
            for entry in table.entries.iter().filter(|e| e.n <= n_max && e.m <= m_max) {
                let (n, m, zero) = (entry.n, entry.m, entry.zero);
                let eigenvalue = match family {
                    ModeFamily::CurlPlus => zero / radius,
                    ModeFamily::CurlMinus => -zero / radius,
                    ModeFamily::GradDiv => -(zero / radius) * (zero / radius),
                };
                norm_by_profile
                    .entry((family.is_curl(), n, m))
                    .or_insert_with(|| normalization_constant(family.is_curl(), n, zero, radius));
                for k in -(n as i32)..=(n as i32) {
                    modes.push(Mode {
                        key: ModeKey { family, n, m, k },
                        eigenvalue,
                        index: 0,
                    });
                }
            }
        }

        // Per-family index by |eigenvalue|, ties by (n, m, k).
        for &family in &fams {
            let mut fam_indices: Vec<usize> = (0..modes.len())
                .filter(|&i| modes[i].key.family == family)
                .collect();
            fam_indices.sort_by(|&a, &b| {
                let (ma, mb) = (&modes[a], &modes[b]);
                ma.eigenvalue
                    .abs()
                    .partial_cmp(&mb.eigenvalue.abs())
                    .unwrap()
                    .then_with(|| (ma.key.n, ma.key.m, ma.key.k).cmp(&(mb.key.n, mb.key.m, mb.key.k)))
            });
            for (j, &i) in fam_indices.iter().enumerate() {
                modes[i].index = j as u32 + 1;
            }
        }

        // Canonical storage order: by key.
        modes.sort_by_key(|m| m.key);
        let norms: Vec<f64> = modes
            .iter()
            .map(|m| norm_by_profile[&(m.key.family.is_curl(), m.key.n, m.key.m)])
            .collect();
        for (mode, &nc) in modes.iter().zip(&norms) {
            if !(nc > 0.0) || !nc.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "normalization constant for {} is {nc}",
                    mode.key
                )));
            }
        }
        let lookup = modes
            .iter()
            .enumerate()
            .map(|(i, m)| (m.key, i))
            .collect();
        Ok(Basis {
            radius,
            n_max,
            m_max,
            families: fams,
            modes,
            norms,
            lookup,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn families(&self) -> &[ModeFamily] {
        &self.families
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn position(&self, key: &ModeKey) -> Option<usize> {
        self.lookup.get(key).copied()
    }

    pub fn mode(&self, key: &ModeKey) -> Option<&Mode> {
        self.position(key).map(|i| &self.modes[i])
    }

    pub fn norm_constant(&self, key: &ModeKey) -> Option<f64> {
        self.position(key).map(|i| self.norms[i])
    }

    /// Largest |eigenvalue| over the given families (resonance tolerance scale).
    pub fn max_abs_eigenvalue<F: Fn(ModeFamily) -> bool>(&self, filter: F) -> f64 {
        self.modes
            .iter()
            .filter(|m| filter(m.key.family))
            .map(|m| m.eigenvalue.abs())
            .fold(0.0, f64::max)
    }

    /// Samples of the normalized eigenfield at arbitrary points of the closed ball.
    pub fn eval_mode(&self, key: &ModeKey, points: &[[f64; 3]]) -> Result<Vec<[f64; 3]>> {
        let i = self
            .position(key)
            .ok_or_else(|| Error::InvalidInput(format!("mode {key} not in basis")))?;
        let mode = &self.modes[i];
        let inv_norm = 1.0 / self.norms[i];
        let wavenumber = mode.wavenumber();
        let mut out = Vec::with_capacity(points.len());
        for &p in points {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if r > self.radius * (1.0 + 1e-12) {
                return Err(Error::OutsideDomain(format!(
                    "point ({}, {}, {}) outside ball of radius {}",
                    p[0], p[1], p[2], self.radius
                )));
            }
            out.push(eval_at(mode, wavenumber, inv_norm, p, r, self.radius));
        }
        Ok(out)
    }

    /// The eigenfield as a point evaluator (panics on points outside the ball).
    pub fn mode_evaluator(&self, key: &ModeKey) -> Result<impl Fn([f64; 3]) -> [f64; 3] + '_> {
        let i = self
            .position(key)
            .ok_or_else(|| Error::InvalidInput(format!("mode {key} not in basis")))?;
        let mode = self.modes[i].clone();
        let inv_norm = 1.0 / self.norms[i];
        let radius = self.radius;
        let wavenumber = mode.wavenumber();
        Ok(move |p: [f64; 3]| {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            eval_at(&mode, wavenumber, inv_norm, p, r, radius)
        })
    }

    /// Eigenfield sampled on a quadrature grid.
    pub fn eval_mode_samples(&self, key: &ModeKey, grid: &Arc<BallGrid>) -> Result<FieldSamples> {
        let values = self.eval_mode(key, grid.points())?;
        FieldSamples::new(grid.clone(), values)
    }

    /// Normal trace n·q at points on the sphere |x| = R (tolerance 1e-12·R).
    pub fn normal_trace(&self, key: &ModeKey, surface_points: &[[f64; 3]]) -> Result<Vec<f64>> {
        let i = self
            .position(key)
            .ok_or_else(|| Error::InvalidInput(format!("mode {key} not in basis")))?;
        let mode = &self.modes[i];
        let inv_norm = 1.0 / self.norms[i];
        let s = mode.wavenumber();
        let nf = f64::from(mode.key.n);
        let mut out = Vec::with_capacity(surface_points.len());
        for &p in surface_points {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if (r - self.radius).abs() > 1e-12 * self.radius {
                return Err(Error::OutsideDomain(format!(
                    "point at |x| = {r} not on sphere of radius {}",
                    self.radius
                )));
            }
            let (ct, st, phi) = direction(p, r);
            let f = angular_factors(mode.key.n, mode.key.k, ct, st, phi);
            let z = s * r;
            let value = match mode.key.family {
                ModeFamily::CurlPlus => nf * (nf + 1.0) * psi_over_z(mode.key.n, z) * f.y,
                ModeFamily::CurlMinus => -nf * (nf + 1.0) * psi_over_z(mode.key.n, z) * f.y,
                ModeFamily::GradDiv => dpsi_unchecked(mode.key.n, z) * f.y,
            };
            out.push(value * inv_norm);
        }
        Ok(out)
    }
}

/// (cos θ, sin θ, φ) of a point; axis points get a symbolic-tiny sin θ so the
/// normalized-Legendre columns reproduce the pole limits exactly.
fn direction(p: [f64; 3], r: f64) -> (f64, f64, f64) {
    let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let ct = (p[2] / r).clamp(-1.0, 1.0);
    let st = (rho / r).max(1e-30);
    let phi = p[1].atan2(p[0]);
    (ct, st, phi)
}

fn eval_at(mode: &Mode, wavenumber: f64, inv_norm: f64, p: [f64; 3], r: f64, radius: f64) -> [f64; 3] {
    let n = mode.key.n;
    let nf = f64::from(n);
    // At the origin only n = 1 modes are nonzero and their limit is
    // direction-independent, so an arbitrary direction is exact.
    let (ct, st, phi, z) = if r < radius * 1e-15 {
        (0.0, 1.0, 0.0, 0.0)
    } else {
        let (ct, st, phi) = direction(p, r);
        (ct, st, phi, wavenumber * r)
    };
    let f = angular_factors(n, mode.key.k, ct, st, phi);
    let (v_r, v_t, v_p) = match mode.key.family {
        ModeFamily::CurlPlus | ModeFamily::CurlMinus => {
            let sign = if mode.key.family == ModeFamily::CurlPlus {
                1.0
            } else {
                -1.0
            };
            let u = psi_unchecked(n, z);
            let du = dpsi_unchecked(n, z);
            let upz = psi_over_z(n, z);
            let poloidal_tang = sign * (upz + du);
            (
                sign * nf * (nf + 1.0) * upz * f.y,
                poloidal_tang * f.g_theta + u * f.g_phi,
                poloidal_tang * f.g_phi - u * f.g_theta,
            )
        }
        ModeFamily::GradDiv => {
            let du = dpsi_unchecked(n, z);
            let tang = if n >= 1 { psi_over_z(n, z) } else { 0.0 };
            (du * f.y, tang * f.g_theta, tang * f.g_phi)
        }
    };
    let (sp, cp) = phi.sin_cos();
    let e_r = [st * cp, st * sp, ct];
    let e_t = [ct * cp, ct * sp, -st];
    let e_p = [-sp, cp, 0.0];
    [
        inv_norm * (v_r * e_r[0] + v_t * e_t[0] + v_p * e_p[0]),
        inv_norm * (v_r * e_r[1] + v_t * e_t[1] + v_p * e_p[1]),
        inv_norm * (v_r * e_r[2] + v_t * e_t[2] + v_p * e_p[2]),
    ]
}

/// L₂ normalization constant by radial Gauss–Legendre quadrature on [0, R].
///
/// curl:    N² = n(n+1) ∫ f²r²dr + (R/ρ)²[n²(n+1)² ∫ f²dr + n(n+1) ∫ (f + r f′)² dr],
/// graddiv: N² = ∫ f² r² dr,   with f(r) = ψₙ(z·r/R), z the table zero.
fn normalization_constant(is_curl: bool, n: u32, zero: f64, radius: f64) -> f64 {
    let s = zero / radius;
    let n_quad = (1.5 * zero) as usize + 32;
    let (x, w) = gauss_legendre(n_quad);
    let nf = f64::from(n);
    let mut i_rr = CompensatedSum::default();
    let mut i_ff = CompensatedSum::default();
    let mut i_gg = CompensatedSum::default();
    for (&xi, &wi) in x.iter().zip(&w) {
        let r = 0.5 * radius * (xi + 1.0);
        let wr = wi * 0.5 * radius;
        let z = s * r;
        let u = psi_unchecked(n, z);
        i_rr.add(wr * u * u * r * r);
        if is_curl {
            let g = u + z * dpsi_unchecked(n, z);
            i_ff.add(wr * u * u);
            i_gg.add(wr * g * g);
        }
    }
    let norm2 = if is_curl {
        let a = nf * (nf + 1.0);
        a * i_rr.value() + (a * a * i_ff.value() + a * i_gg.value()) / (s * s)
    } else {
        i_rr.value()
    };
    norm2.sqrt()
}
