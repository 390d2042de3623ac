//! Radial functions ψₙ, their derivatives, and certified tables of their
//! positive zeros.
//!
//! ψₙ(z) = (−z)ⁿ (d/(z dz))ⁿ (sin z / z) is the spherical Bessel function of
//! the first kind. Zeros ρₙₘ of ψₙ scale to the curl eigenvalues ±ρₙₘ/R in a
//! ball of radius R; zeros αₙₘ of ψ′ₙ scale to the gradient-of-divergence
//! eigenvalues −(αₙₘ/R)².
//!
//! The closed formula above is numerically unusable as written. Evaluation
//! dispatches between a power series (small z), upward recurrence (z ≥ n) and
//! a normalized downward recurrence (z < n). Every reported zero carries a
//! measured residual certificate and is bracketed by interlacing, never by
//! guesswork.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported degree n.
pub const MAX_ORDER: u32 = 64;

/// Every certified zero must satisfy |ψₙ(z)| (or |ψ′ₙ(z)|) ≤ this bound.
pub const RESIDUAL_BOUND: f64 = 1e-12;

/// Below z = SERIES_FACTOR·(n+1) the power series is used.
const SERIES_FACTOR: f64 = 1e-2;

fn check_order(n: u32) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!(
            "degree n = {n} exceeds supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

fn check_argument(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("argument z = {z} must be positive and finite")));
    }
    Ok(())
}

/// ψₙ(z) for n ≤ 64, z > 0.
pub fn psi(n: u32, z: f64) -> Result<f64> {
    check_order(n)?;
    check_argument(z)?;
    Ok(psi_unchecked(n, z))
}

/// ψ′ₙ(z) for n ≤ 64, z > 0. Uses the closed recurrence
/// ψ′ₙ = ψₙ₋₁ − ((n+1)/z) ψₙ (and ψ′₀ = −ψ₁), never numerical differencing.
pub fn dpsi(n: u32, z: f64) -> Result<f64> {
    check_order(n)?;
    check_argument(z)?;
    Ok(dpsi_unchecked(n, z))
}

/// ψₙ(z) with z ≥ 0 (limit value at z = 0: 1 for n = 0, else 0).
pub(crate) fn psi_unchecked(n: u32, z: f64) -> f64 {
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n == 0 {
        return z.sin() / z;
    }
    if z < SERIES_FACTOR * f64::from(n + 1) {
        psi_series(n, z)
    } else if z >= f64::from(n) {
        psi_pair_upward(n, z).1
    } else {
        psi_pair_downward(n, z).1
    }
}

/// ψ′ₙ(z) with z ≥ 0 (limit at 0: 1/3 for n = 1, else 0).
pub(crate) fn dpsi_unchecked(n: u32, z: f64) -> f64 {
    if n == 0 {
        return -psi_unchecked(1, z);
    }
    if z == 0.0 {
        return if n == 1 { 1.0 / 3.0 } else { 0.0 };
    }
    let (prev, cur) = psi_pair(n, z);
    prev - f64::from(n + 1) / z * cur
}

/// ψₙ(z)/z for n ≥ 1 with z ≥ 0; evaluated by series near zero to avoid 0/0.
pub(crate) fn psi_over_z(n: u32, z: f64) -> f64 {
    debug_assert!(n >= 1);
    if z < SERIES_FACTOR * f64::from(n + 1) {
        // z^(n-1)/(2n+1)!! leading coefficient, then the same alternating series.
        let mut lead = 1.0 / f64::from(2 * n + 1);
        for i in 1..n {
            lead *= z / f64::from(2 * i + 1);
        }
        series_tail(n, z, lead)
    } else {
        psi_unchecked(n, z) / z
    }
}

/// (ψₙ₋₁(z), ψₙ(z)) for n ≥ 1, z > 0.
fn psi_pair(n: u32, z: f64) -> (f64, f64) {
    debug_assert!(n >= 1);
    if z < SERIES_FACTOR * f64::from(n + 1) {
        (psi_series(n - 1, z), psi_series(n, z))
    } else if z >= f64::from(n) {
        psi_pair_upward(n, z)
    } else {
        psi_pair_downward(n, z)
    }
}

/// Alternating power series ψₙ(z) = zⁿ/(2n+1)!! Σₖ (−z²/2)ᵏ / (k! (2n+3)⋯(2n+2k+1)).
fn psi_series(n: u32, z: f64) -> f64 {
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= z / f64::from(2 * i + 1);
    }
    series_tail(n, z, lead)
}

fn series_tail(n: u32, z: f64, lead: f64) -> f64 {
    let x = 0.5 * z * z;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..200u32 {
        term *= -x / (f64::from(k) * f64::from(2 * n + 2 * k + 1));
        let next = sum + term;
        if next == sum {
            break;
        }
        sum = next;
    }
    sum
}

/// Upward recurrence ψₖ₊₁ = ((2k+1)/z) ψₖ − ψₖ₋₁ from ψ₀, ψ₁; stable for z ≥ n.
fn psi_pair_upward(n: u32, z: f64) -> (f64, f64) {
    let j0 = z.sin() / z;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    if n == 1 {
        return (j0, j1);
    }
    let mut prev = j0;
    let mut cur = j1;
    for k in 1..n {
        let next = f64::from(2 * k + 1) / z * cur - prev;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// Downward recurrence seeded high above n, normalized against ψ₀ or ψ₁
/// (whichever is larger in magnitude); stable for z < n.
fn psi_pair_downward(n: u32, z: f64) -> (f64, f64) {
    const OFFSET: u32 = 60;
    const BIG: f64 = 1e280;
    debug_assert!(n >= 1);
    let start = n + OFFSET;
    // p_hi = trial ψ_{k+1}, p = trial ψ_k, marching k downward from `start`.
    let mut p_hi = 0.0_f64;
    let mut p = 1e-280_f64;
    let mut trial_n = 0.0_f64;
    let mut trial_nm1 = 0.0_f64;
    let mut k = start;
    loop {
        if k == n {
            trial_n = p;
        } else if k + 1 == n {
            trial_nm1 = p;
        }
        if k == 0 {
            break;
        }
        let p_lo = f64::from(2 * k + 1) / z * p - p_hi;
        p_hi = p;
        p = p_lo;
        if p.abs() > BIG {
            let s = 1.0 / BIG;
            p_hi *= s;
            p *= s;
            trial_n *= s;
            trial_nm1 *= s;
        }
        k -= 1;
    }
    // Loop exits with p = trial ψ₀ and p_hi = trial ψ₁.
    let j0 = z.sin() / z;
    let j1 = z.sin() / (z * z) - z.cos() / z;
    let scale = if j0.abs() >= j1.abs() { j0 / p } else { j1 / p_hi };
    (trial_nm1 * scale, trial_n * scale)
}

// ---------------------------------------------------------------------------
// Zero location
// ---------------------------------------------------------------------------

/// Bisect f to adjacent-float width inside a sign-changing bracket.
/// Returns the endpoint with the smaller |f| together with that residual.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, what: &str) -> Result<(f64, f64)> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok((lo, 0.0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0.0));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket {
            what: what.to_string(),
            lo,
            hi,
        });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if flo.abs() <= fhi.abs() {
        Ok((lo, flo.abs()))
    } else {
        Ok((hi, fhi.abs()))
    }
}

fn certify(what: &str, zero: f64, residual: f64) -> Result<()> {
    if residual > RESIDUAL_BOUND {
        return Err(Error::Certificate {
            what: what.to_string(),
            zero,
            residual,
            bound: RESIDUAL_BOUND,
        });
    }
    Ok(())
}

/// Rows 0..=n_max of ψ zeros; row i holds the first `m_max + (n_max − i)`
/// zeros so that interlacing brackets are always available one row up.
fn psi_zero_rows(n_max: u32, m_max: u32) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max as usize + 1);
    let len0 = (m_max + n_max) as usize;
    let mut row0 = Vec::with_capacity(len0);
    for m in 1..=len0 {
        let center = m as f64 * PI;
        let (z, res) = bisect(
            &|z| psi_unchecked(0, z),
            center - 0.5,
            center + 0.5,
            "psi_0 zero",
        )?;
        certify("psi_0 zero", z, res)?;
        row0.push(z);
    }
    rows.push(row0);
    for n in 1..=n_max {
        let prev = &rows[(n - 1) as usize];
        let len = (m_max + n_max - n) as usize;
        let mut row = Vec::with_capacity(len);
        for m in 0..len {
            // interlacing: ρ_{n−1,m} < ρ_{n,m} < ρ_{n−1,m+1}
            let (z, res) = bisect(
                &|z| psi_unchecked(n, z),
                prev[m],
                prev[m + 1],
                &format!("psi_{n} zero"),
            )?;
            certify(&format!("psi_{n} zero"), z, res)?;
            row.push(z);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// First `m_max` positive zeros ρₙₘ of ψₙ.
///
/// The curl spectrum uses n ≥ 1; n = 0 (zeros mπ of sin z/z) is exposed as an
/// auxiliary sequence for testing and bracket construction.
pub fn curl_zeros(n: u32, m_max: u32) -> Result<Vec<f64>> {
    check_order(n)?;
    if m_max < 1 {
        return Err(Error::Domain("m_max must be at least 1".into()));
    }
    let rows = psi_zero_rows(n, m_max)?;
    Ok(rows.into_iter().nth(n as usize).unwrap())
}

/// First `m_max` positive zeros αₙₘ of ψ′ₙ, n ≥ 0.
pub fn graddiv_zeros(n: u32, m_max: u32) -> Result<Vec<f64>> {
    check_order(n)?;
    if m_max < 1 {
        return Err(Error::Domain("m_max must be at least 1".into()));
    }
    let f = |z: f64| dpsi_unchecked(n, z);
    let what = format!("dpsi_{n} zero");
    let mut out = Vec::with_capacity(m_max as usize);
    if n == 0 {
        // ψ′₀ = −ψ₁ has exactly one zero in each (mπ, (m+1)π).
        for m in 1..=m_max {
            let (z, res) = bisect(&f, f64::from(m) * PI, f64::from(m + 1) * PI, &what)?;
            certify(&what, z, res)?;
            out.push(z);
        }
    } else {
        // One zero before the first zero of ψₙ (the first maximum), then one
        // between consecutive zeros of ψₙ by Rolle.
        let rho = curl_zeros(n, m_max)?;
        let lo = 0.5 * f64::from(n);
        let (z, res) = bisect(&f, lo, rho[0], &what)?;
        certify(&what, z, res)?;
        out.push(z);
        for m in 1..m_max as usize {
            let (z, res) = bisect(&f, rho[m - 1], rho[m], &what)?;
            certify(&what, z, res)?;
            out.push(z);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Zero tables
// ---------------------------------------------------------------------------

/// Which spectral family a zero table serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZeroFamily {
    /// Zeros ρₙₘ of ψₙ, n ≥ 1.
    Curl,
    /// Zeros αₙₘ of ψ′ₙ, n ≥ 0.
    GradDiv,
}

impl ZeroFamily {
    /// Smallest degree carried by the family.
    pub fn min_degree(self) -> u32 {
        match self {
            ZeroFamily::Curl => 1,
            ZeroFamily::GradDiv => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ZeroFamily::Curl => "curl",
            ZeroFamily::GradDiv => "graddiv",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "curl" => Some(ZeroFamily::Curl),
            "graddiv" => Some(ZeroFamily::GradDiv),
            _ => None,
        }
    }
}

/// One certified zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroEntry {
    pub n: u32,
    pub m: u32,
    pub zero: f64,
    /// Measured |ψₙ| (or |ψ′ₙ|) at the reported zero; ≤ [`RESIDUAL_BOUND`].
    pub residual: f64,
}

/// Certified zeros for one family, sorted by (n, m).
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTable {
    pub family: ZeroFamily,
    pub radius: f64,
    pub entries: Vec<ZeroEntry>,
}

impl ZeroTable {
    /// Build the table for degrees `family.min_degree()..=n_max`, orders `1..=m_max`.
    pub fn build(family: ZeroFamily, radius: f64, n_max: u32, m_max: u32) -> Result<Self> {
        check_order(n_max)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        if m_max < 1 {
            return Err(Error::Domain("m_max must be at least 1".into()));
        }
        if n_max < family.min_degree() {
            return Err(Error::Domain(format!(
                "n_max = {n_max} below family minimum {}",
                family.min_degree()
            )));
        }
        let mut entries = Vec::new();
        match family {
            ZeroFamily::Curl => {
                let rows = psi_zero_rows(n_max, m_max)?;
                for n in 1..=n_max {
                    for (i, &z) in rows[n as usize].iter().take(m_max as usize).enumerate() {
                        entries.push(ZeroEntry {
                            n,
                            m: i as u32 + 1,
                            zero: z,
                            residual: psi_unchecked(n, z).abs(),
                        });
                    }
                }
            }
            ZeroFamily::GradDiv => {
                for n in 0..=n_max {
                    for (i, &z) in graddiv_zeros(n, m_max)?.iter().enumerate() {
                        entries.push(ZeroEntry {
                            n,
                            m: i as u32 + 1,
                            zero: z,
                            residual: dpsi_unchecked(n, z).abs(),
                        });
                    }
                }
            }
        }
        Ok(ZeroTable {
            family,
            radius,
            entries,
        })
    }

    pub fn get(&self, n: u32, m: u32) -> Option<&ZeroEntry> {
        self.entries.iter().find(|e| e.n == n && e.m == m)
    }

    pub fn n_max(&self) -> u32 {
        self.entries.iter().map(|e| e.n).max().unwrap_or(0)
    }

    pub fn m_max(&self) -> u32 {
        self.entries.iter().map(|e| e.m).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RHO_11: f64 = 4.493409457909064;

    #[test]
    fn psi0_at_pi_vanishes() {
        assert!(psi(0, PI).unwrap().abs() < 1e-15);
    }

    #[test]
    fn psi0_at_one() {
        assert!((psi(0, 1.0).unwrap() - 0.8414709848078965).abs() < 1e-15);
    }

    #[test]
    fn psi1_vanishes_at_first_zero() {
        assert!(psi(1, RHO_11).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dpsi0_is_minus_psi1() {
        for &z in &[1.0, 2.5, 10.0] {
            let lhs = dpsi(0, z).unwrap();
            let rhs = -psi(1, z).unwrap();
            assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1e-300));
        }
    }

    #[test]
    fn dpsi1_vanishes_at_first_zero() {
        assert!(dpsi(1, 2.0815759778181).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dpsi0_at_half_pi() {
        let expected = -4.0 / (PI * PI);
        assert!((dpsi(0, PI / 2.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn curl_zero_values() {
        let z = curl_zeros(1, 1).unwrap();
        assert!((z[0] - RHO_11).abs() < 1e-13);
        let z = curl_zeros(2, 1).unwrap();
        assert!((z[0] - 5.763459196894550).abs() < 1e-13);
    }

    #[test]
    fn auxiliary_row_zero_is_multiples_of_pi() {
        let z = curl_zeros(0, 3).unwrap();
        for (m, zi) in z.iter().enumerate() {
            assert!((zi - (m as f64 + 1.0) * PI).abs() < 1e-13);
        }
    }

    #[test]
    fn graddiv_zero_values() {
        let z = graddiv_zeros(0, 2).unwrap();
        assert!((z[0] - RHO_11).abs() < 1e-13);
        assert!((z[1] - 7.725251836937707).abs() < 1e-13);
        let z = graddiv_zeros(1, 1).unwrap();
        assert!((z[0] - 2.0815759778181).abs() < 1e-12);
        let z = graddiv_zeros(2, 1).unwrap();
        assert!((z[0] - 3.342093657365695).abs() < 1e-13);
    }

    #[test]
    fn dpsi0_zeros_match_psi1_zeros() {
        let alpha = graddiv_zeros(0, 5).unwrap();
        let rho = curl_zeros(1, 5).unwrap();
        for (a, r) in alpha.iter().zip(&rho) {
            assert!((a - r).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_identity_on_interval() {
        let mut z = 0.1;
        while z <= 100.0 {
            let lhs = dpsi(0, z).unwrap();
            let rhs = -psi(1, z).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1e-3);
            assert!((lhs - rhs).abs() <= 1e-13 * scale, "z = {z}");
            z += 0.37;
        }
    }

    #[test]
    fn three_term_recurrence_consistency() {
        for n in 1..=20u32 {
            let mut z = 1.0;
            while z <= 60.0 {
                let a = psi_unchecked(n - 1, z);
                let b = psi_unchecked(n, z);
                let c = psi_unchecked(n + 1, z);
                let lhs = a + c;
                let rhs = f64::from(2 * n + 1) / z * b;
                let scale = a.abs().max(b.abs()).max(c.abs());
                assert!((lhs - rhs).abs() <= 1e-12 * scale, "n = {n}, z = {z}");
                z += 1.7;
            }
        }
    }

    #[test]
    fn dpsi_matches_central_difference() {
        let h = 1e-6;
        for &(n, z) in &[(1u32, 3.0), (4, 7.5), (9, 5.0), (20, 30.0)] {
            let fd = (psi_unchecked(n, z + h) - psi_unchecked(n, z - h)) / (2.0 * h);
            let an = dpsi(n, z).unwrap();
            assert!((fd - an).abs() < 1e-8 * an.abs().max(1.0), "n = {n}, z = {z}");
        }
    }

    #[test]
    fn downward_recurrence_agrees_with_series_overlap() {
        // z just above the series threshold exercises the downward path.
        for n in [8u32, 20, 40, 64] {
            let z = 0.02 * f64::from(n + 1);
            let down = psi_pair_downward(n, z).1;
            let series = psi_series(n, z);
            assert!(
                (down - series).abs() <= 1e-12 * series.abs(),
                "n = {n}: {down:e} vs {series:e}"
            );
        }
    }

    #[test]
    fn zero_table_invariants() {
        let table = ZeroTable::build(ZeroFamily::Curl, 1.0, 6, 4).unwrap();
        // sorted by (n, m), strictly increasing in m, interlaced in n
        for w in table.entries.windows(2) {
            assert!((w[0].n, w[0].m) < (w[1].n, w[1].m));
            if w[0].n == w[1].n {
                assert!(w[0].zero < w[1].zero);
            }
        }
        for e in &table.entries {
            assert!(e.residual <= RESIDUAL_BOUND);
            if let Some(next) = table.get(e.n + 1, e.m) {
                assert!(e.zero < next.zero, "rho_{{n,m}} < rho_{{n+1,m}}");
                if let Some(right) = table.get(e.n, e.m + 1) {
                    assert!(next.zero < right.zero, "rho_{{n+1,m}} < rho_{{n,m+1}}");
                }
            }
        }
    }

    #[test]
    fn zeros_certified_by_sign_change() {
        let table = ZeroTable::build(ZeroFamily::Curl, 1.0, 6, 3).unwrap();
        for e in &table.entries {
            let lo = psi_unchecked(e.n, e.zero - 1e-10);
            let hi = psi_unchecked(e.n, e.zero + 1e-10);
            assert!(lo.signum() != hi.signum(), "n = {}, m = {}", e.n, e.m);
        }
        let table = ZeroTable::build(ZeroFamily::GradDiv, 1.0, 6, 3).unwrap();
        for e in &table.entries {
            let lo = dpsi_unchecked(e.n, e.zero - 1e-10);
            let hi = dpsi_unchecked(e.n, e.zero + 1e-10);
            assert!(lo.signum() != hi.signum(), "n = {}, m = {}", e.n, e.m);
        }
    }

    #[test]
    fn tables_are_deterministic() {
        let a = ZeroTable::build(ZeroFamily::GradDiv, 2.0, 5, 5).unwrap();
        let b = ZeroTable::build(ZeroFamily::GradDiv, 2.0, 5, 5).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.zero.to_bits(), y.zero.to_bits());
        }
    }

    #[test]
    fn domain_errors() {
        assert!(psi(0, -1.0).is_err());
        assert!(psi(0, 0.0).is_err());
        assert!(psi(MAX_ORDER + 1, 1.0).is_err());
        assert!(dpsi(3, f64::NAN).is_err());
        assert!(curl_zeros(1, 0).is_err());
        assert!(ZeroTable::build(ZeroFamily::Curl, 0.0, 3, 3).is_err());
        assert!(ZeroTable::build(ZeroFamily::Curl, 1.0, 0, 3).is_err());
    }

    #[test]
    fn high_order_evaluation_is_finite_and_small_near_origin() {
        let v = psi(64, 0.5).unwrap();
        assert!(v.is_finite());
        assert!(v.abs() < 1e-100);
        assert!(v > 0.0);
    }
}
