//! Serialization: field-spec documents, zero-table cache files, and tabular
//! or visualization exports.
//!
//! Field specs are TOML with either a `modes` array (exact mode combination)
//! or a `[preset]` table (named analytic field). Zero tables use a small
//! line-oriented format with a version header and an FNV-1a checksum; floats
//! are written with 17 significant digits, which round-trips f64 exactly.
//! Sample exports are CSV (`x,y,z,ux,uy,uz`) or VTK legacy ASCII POLYDATA
//! with a `VECTORS` attribute, loadable by standard viewers.
//! All writers are deterministic byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::eigenbasis::{ModeFamily, ModeKey};
use crate::error::{Error, Result};
use crate::solver::FieldEvaluator;
use crate::specfun::{ZeroEntry, ZeroFamily, ZeroTable};

/// Current zero-table format version.
pub const ZERO_TABLE_VERSION: &str = "v1";
const ZERO_TABLE_MAGIC: &str = "rotdiv-zero-table";

/// 17 significant digits: lossless f64 round trip.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// Field spec documents
// ---------------------------------------------------------------------------

/// Raw field-spec document as parsed from TOML. Exactly one of `modes` and
/// `preset` must be present; `validate` enforces the full schema.
#[derive(Debug, Clone, serde::Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpecDocument {
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    /// Entries (family, n, m, k, coefficient).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<(String, u32, u32, i32, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetSpec>,
}

#[derive(Debug, Clone, serde::Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

/// Validated content of a field spec.
#[derive(Debug, Clone)]
pub enum FieldSpec {
    Modes(Vec<(ModeKey, f64)>),
    Preset(Preset),
}

/// Named analytic fields.
#[derive(Debug, Clone)]
pub enum Preset {
    /// Constant field along a direction; a gradient, hence purely potential.
    Constant { direction: [f64; 3] },
    /// ∇(x²) = (2x, 0, 0); has nonzero normal trace (contrast field).
    GradientXsq,
    /// ∇h × x with h a Gaussian bump: smooth, solenoidal, zero normal
    /// trace, spectral content across many degrees.
    ToroidalBump { center: [f64; 3], width: f64 },
}

impl Preset {
    pub fn evaluator(&self) -> FieldEvaluator {
        match self {
            Preset::Constant { direction } => {
                let d = *direction;
                std::sync::Arc::new(move |_| d)
            }
            Preset::GradientXsq => std::sync::Arc::new(|p| [2.0 * p[0], 0.0, 0.0]),
            Preset::ToroidalBump { center, width } => {
                let c = *center;
                let w2 = width * width;
                std::sync::Arc::new(move |p| {
                    let dx = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
                    let h = (-(dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]) / w2).exp();
                    let s = 2.0 * h / w2;
                    // ∇h × x = (2h/w²)(c × x)
                    [
                        s * (c[1] * p[2] - c[2] * p[1]),
                        s * (c[2] * p[0] - c[0] * p[2]),
                        s * (c[0] * p[1] - c[1] * p[0]),
                    ]
                })
            }
        }
    }
}

fn schema_err(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

impl FieldSpecDocument {
    pub fn validate(&self) -> Result<FieldSpec> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(schema_err("radius", format!("{} must be positive", self.radius)));
        }
        match (&self.modes, &self.preset) {
            (Some(_), Some(_)) => Err(schema_err(
                "modes|preset",
                "exactly one of `modes` and `preset` may be present",
            )),
            (None, None) => Err(schema_err(
                "modes|preset",
                "one of `modes` and `preset` is required",
            )),
            (Some(entries), None) => {
                if entries.is_empty() {
                    return Err(schema_err("modes", "at least one mode entry required"));
                }
                let mut out = Vec::with_capacity(entries.len());
                let mut seen = std::collections::BTreeSet::new();
                for (i, (family, n, m, k, coeff)) in entries.iter().enumerate() {
                    let path = format!("modes[{i}]");
                    let family = ModeFamily::from_name(family).ok_or_else(|| {
                        schema_err(&path, format!("unknown family `{family}`"))
                    })?;
                    if *n < family.min_degree() {
                        return Err(schema_err(
                            &path,
                            format!("n = {n} below minimum {} for {}", family.min_degree(), family.name()),
                        ));
                    }
                    if *m < 1 {
                        return Err(schema_err(&path, "m must be at least 1"));
                    }
                    if k.unsigned_abs() > *n {
                        return Err(schema_err(&path, format!("|k| = {} exceeds n = {n}", k.unsigned_abs())));
                    }
                    if !coeff.is_finite() {
                        return Err(schema_err(&path, "coefficient must be finite"));
                    }
                    let key = ModeKey { family, n: *n, m: *m, k: *k };
                    if !seen.insert(key) {
                        return Err(schema_err(&path, format!("duplicate mode {key}")));
                    }
                    out.push((key, *coeff));
                }
                Ok(FieldSpec::Modes(out))
            }
            (None, Some(p)) => {
                let reject_param = |cond: bool, param: &str| -> Result<()> {
                    if cond {
                        Err(schema_err(
                            &format!("preset.{param}"),
                            format!("parameter not accepted by preset `{}`", p.name),
                        ))
                    } else {
                        Ok(())
                    }
                };
                match p.name.as_str() {
                    "constant" => {
                        reject_param(p.center.is_some(), "center")?;
                        reject_param(p.width.is_some(), "width")?;
                        let direction = p.direction.ok_or_else(|| {
                            schema_err("preset.direction", "required by preset `constant`")
                        })?;
                        if direction.iter().any(|v| !v.is_finite()) {
                            return Err(schema_err("preset.direction", "must be finite"));
                        }
                        Ok(FieldSpec::Preset(Preset::Constant { direction }))
                    }
                    "gradient_xsq" => {
                        reject_param(p.direction.is_some(), "direction")?;
                        reject_param(p.center.is_some(), "center")?;
                        reject_param(p.width.is_some(), "width")?;
                        Ok(FieldSpec::Preset(Preset::GradientXsq))
                    }
                    "toroidal_bump" => {
                        reject_param(p.direction.is_some(), "direction")?;
                        let center = p.center.ok_or_else(|| {
                            schema_err("preset.center", "required by preset `toroidal_bump`")
                        })?;
                        if center.iter().any(|v| !v.is_finite()) {
                            return Err(schema_err("preset.center", "must be finite"));
                        }
                        let width = p.width.ok_or_else(|| {
                            schema_err("preset.width", "required by preset `toroidal_bump`")
                        })?;
                        if !(width > 0.0) || !width.is_finite() {
                            return Err(schema_err("preset.width", "must be positive"));
                        }
                        Ok(FieldSpec::Preset(Preset::ToroidalBump { center, width }))
                    }
                    other => Err(schema_err("preset.name", format!("unknown preset `{other}`"))),
                }
            }
        }
    }

    /// Smallest (n_max, m_max) covering all listed modes; `None` for presets.
    pub fn mode_extent(&self) -> Option<(u32, u32)> {
        self.modes.as_ref().map(|entries| {
            let n = entries.iter().map(|e| e.1).max().unwrap_or(1);
            let m = entries.iter().map(|e| e.2).max().unwrap_or(1);
            (n.max(1), m.max(1))
        })
    }
}

/// Parse and validate a field-spec document. Parse errors carry the TOML
/// position; schema errors carry the offending field path.
pub fn read_field_spec(text: &str) -> Result<FieldSpecDocument> {
    let doc: FieldSpecDocument =
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.validate()?;
    Ok(doc)
}

/// Deterministic rendering of a field spec (also used for solution
/// coefficients, which are a mode combination by construction).
pub fn write_field_spec(doc: &FieldSpecDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "radius = {}", fmt_f64(doc.radius));
    if let Some(units) = &doc.units {
        let _ = writeln!(s, "units = {units:?}");
    }
    if let Some(modes) = &doc.modes {
        let _ = writeln!(s, "modes = [");
        for (family, n, m, k, coeff) in modes {
            let _ = writeln!(s, "  [{family:?}, {n}, {m}, {k}, {}],", fmt_f64(*coeff));
        }
        let _ = writeln!(s, "]");
    }
    if let Some(p) = &doc.preset {
        let _ = writeln!(s, "\n[preset]");
        let _ = writeln!(s, "name = {:?}", p.name);
        for (label, v) in [("direction", &p.direction), ("center", &p.center)] {
            if let Some(v) = v {
                let _ = writeln!(
                    s,
                    "{label} = [{}, {}, {}]",
                    fmt_f64(v[0]),
                    fmt_f64(v[1]),
                    fmt_f64(v[2])
                );
            }
        }
        if let Some(w) = p.width {
            let _ = writeln!(s, "width = {}", fmt_f64(w));
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Zero-table cache
// ---------------------------------------------------------------------------

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Render a zero table to its cache format.
pub fn render_zero_table(table: &ZeroTable) -> String {
    let mut body = String::new();
    for e in &table.entries {
        let _ = writeln!(
            body,
            "{} {} {} {}",
            e.n,
            e.m,
            fmt_f64(e.zero),
            fmt_f64(e.residual)
        );
    }
    let mut s = String::new();
    let _ = writeln!(s, "{ZERO_TABLE_MAGIC} {ZERO_TABLE_VERSION}");
    let _ = writeln!(s, "family {}", table.family.name());
    let _ = writeln!(s, "radius {}", fmt_f64(table.radius));
    let _ = writeln!(s, "entries {}", table.entries.len());
    let _ = writeln!(s, "checksum {:016x}", fnv1a64(body.as_bytes()));
    s.push_str(&body);
    s
}

/// Write a zero table; lossless at full double precision.
pub fn write_zero_table(table: &ZeroTable, path: &Path) -> Result<()> {
    fs::write(path, render_zero_table(table))?;
    Ok(())
}

/// Parse a zero table, verifying version and checksum.
pub fn parse_zero_table(text: &str) -> Result<ZeroTable> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty zero-table file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(ZERO_TABLE_MAGIC) {
        return Err(Error::Parse("not a zero-table file".into()));
    }
    let version = parts.next().unwrap_or("");
    if version != ZERO_TABLE_VERSION {
        return Err(Error::VersionMismatch {
            expected: ZERO_TABLE_VERSION.into(),
            found: version.into(),
        });
    }
    let field = |line: Option<&str>, name: &str| -> Result<String> {
        let line = line.ok_or_else(|| Error::Parse(format!("missing `{name}` line")))?;
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| Error::Parse(format!("malformed `{name}` line")))?;
        if key != name {
            return Err(Error::Parse(format!("expected `{name}`, found `{key}`")));
        }
        Ok(value.to_string())
    };
    let family_name = field(lines.next(), "family")?;
    let family = ZeroFamily::from_name(&family_name)
        .ok_or_else(|| Error::Parse(format!("unknown family `{family_name}`")))?;
    let radius: f64 = field(lines.next(), "radius")?
        .parse()
        .map_err(|e| Error::Parse(format!("radius: {e}")))?;
    let count: usize = field(lines.next(), "entries")?
        .parse()
        .map_err(|e| Error::Parse(format!("entries: {e}")))?;
    let stored_checksum = field(lines.next(), "checksum")?;

    let body: String = lines.map(|l| format!("{l}\n")).collect();
    let computed = format!("{:016x}", fnv1a64(body.as_bytes()));
    if computed != stored_checksum {
        return Err(Error::Checksum {
            stored: stored_checksum,
            computed,
        });
    }
    let mut entries = Vec::with_capacity(count);
    for (i, line) in body.lines().enumerate() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::Parse(format!("entry line {i}: expected 4 columns")));
        }
        entries.push(ZeroEntry {
            n: cols[0].parse().map_err(|e| Error::Parse(format!("entry {i} n: {e}")))?,
            m: cols[1].parse().map_err(|e| Error::Parse(format!("entry {i} m: {e}")))?,
            zero: cols[2].parse().map_err(|e| Error::Parse(format!("entry {i} zero: {e}")))?,
            residual: cols[3].parse().map_err(|e| Error::Parse(format!("entry {i} residual: {e}")))?,
        });
    }
    if entries.len() != count {
        return Err(Error::Parse(format!(
            "entry count mismatch: header says {count}, found {}",
            entries.len()
        )));
    }
    Ok(ZeroTable {
        family,
        radius,
        entries,
    })
}

/// Read a zero table from disk.
pub fn read_zero_table(path: &Path) -> Result<ZeroTable> {
    parse_zero_table(&fs::read_to_string(path)?)
}

/// Where a zero table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Rebuilt,
    Disabled,
}

fn cache_file(dir: &Path, family: ZeroFamily, radius: f64, n_max: u32, m_max: u32) -> PathBuf {
    dir.join(format!(
        "zeros-{}-n{n_max}-m{m_max}-r{:016x}.zt",
        family.name(),
        radius.to_bits()
    ))
}

/// Load a cached zero table or build and cache it. A stale, tampered, or
/// mismatched cache entry is rebuilt; `read_zero_table` is the strict path.
pub fn load_or_build_zero_table(
    cache_dir: Option<&Path>,
    family: ZeroFamily,
    radius: f64,
    n_max: u32,
    m_max: u32,
) -> Result<(ZeroTable, CacheStatus)> {
    let Some(dir) = cache_dir else {
        return Ok((ZeroTable::build(family, radius, n_max, m_max)?, CacheStatus::Disabled));
    };
    let path = cache_file(dir, family, radius, n_max, m_max);
    if let Ok(table) = read_zero_table(&path) {
        if table.family == family
            && table.radius == radius
            && table.n_max() == n_max
            && table.m_max() == m_max
        {
            return Ok((table, CacheStatus::Hit));
        }
    }
    let table = ZeroTable::build(family, radius, n_max, m_max)?;
    fs::create_dir_all(dir)?;
    write_zero_table(&table, &path)?;
    Ok((table, CacheStatus::Rebuilt))
}

// ---------------------------------------------------------------------------
// Sample exports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    VtkLegacyAscii,
}

/// Render point/vector samples in the chosen format.
pub fn render_samples(
    points: &[[f64; 3]],
    values: &[[f64; 3]],
    format: ExportFormat,
) -> Result<String> {
    if points.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "{} points but {} vectors",
            points.len(),
            values.len()
        )));
    }
    let mut s = String::new();
    match format {
        ExportFormat::Csv => {
            s.push_str("x,y,z,ux,uy,uz\n");
            for (p, v) in points.iter().zip(values) {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    fmt_f64(p[0]),
                    fmt_f64(p[1]),
                    fmt_f64(p[2]),
                    fmt_f64(v[0]),
                    fmt_f64(v[1]),
                    fmt_f64(v[2])
                );
            }
        }
        ExportFormat::VtkLegacyAscii => {
            s.push_str("# vtk DataFile Version 3.0\n");
            s.push_str("vector field samples\n");
            s.push_str("ASCII\n");
            s.push_str("DATASET POLYDATA\n");
            let _ = writeln!(s, "POINTS {} double", points.len());
            for p in points {
                let _ = writeln!(s, "{} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]));
            }
            let _ = writeln!(s, "POINT_DATA {}", points.len());
            s.push_str("VECTORS field double\n");
            for v in values {
                let _ = writeln!(s, "{} {} {}", fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2]));
            }
        }
    }
    Ok(s)
}

/// Write samples to a file.
pub fn export_samples(
    points: &[[f64; 3]],
    values: &[[f64; 3]],
    format: ExportFormat,
    path: &Path,
) -> Result<()> {
    fs::write(path, render_samples(points, values, format)?)?;
    Ok(())
}

/// Read back a CSV sample file written by [`render_samples`].
pub fn read_samples_csv(text: &str) -> Result<(Vec<[f64; 3]>, Vec<[f64; 3]>)> {
    let mut lines = text.lines();
    match lines.next() {
        Some("x,y,z,ux,uy,uz") => {}
        other => {
            return Err(Error::Parse(format!(
                "bad CSV header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Parse(format!("line {}: expected 6 columns", i + 2)));
        }
        let mut nums = [0.0f64; 6];
        for (j, c) in cols.iter().enumerate() {
            nums[j] = c
                .parse()
                .map_err(|e| Error::Parse(format!("line {} column {}: {e}", i + 2, j + 1)))?;
        }
        points.push([nums[0], nums[1], nums[2]]);
        values.push([nums[3], nums[4], nums[5]]);
    }
    Ok((points, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_mode_document() {
        let doc = read_field_spec(
            "radius = 1.0\nmodes = [[\"curl_plus\", 1, 1, 0, 1.0]]\n",
        )
        .unwrap();
        match doc.validate().unwrap() {
            FieldSpec::Modes(modes) => {
                assert_eq!(modes.len(), 1);
                assert_eq!(modes[0].0.family, ModeFamily::CurlPlus);
                assert_eq!(modes[0].1, 1.0);
            }
            _ => panic!(),
        }
        assert_eq!(doc.mode_extent(), Some((1, 1)));
    }

    #[test]
    fn duplicate_mode_entry_named() {
        let err = read_field_spec(
            "radius = 1.0\nmodes = [[\"curl_plus\", 1, 1, 0, 1.0], [\"curl_plus\", 1, 1, 0, 2.0]]\n",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duplicate"), "{msg}");
        assert!(msg.contains("curl_plus(1,1,0)"), "{msg}");
    }

    #[test]
    fn preset_documents() {
        let doc = read_field_spec(
            "radius = 1.0\n[preset]\nname = \"constant\"\ndirection = [0.0, 0.0, 1.0]\n",
        )
        .unwrap();
        match doc.validate().unwrap() {
            FieldSpec::Preset(Preset::Constant { direction }) => {
                assert_eq!(direction, [0.0, 0.0, 1.0]);
            }
            _ => panic!(),
        }
        let ev = Preset::Constant { direction: [0.0, 0.0, 1.0] }.evaluator();
        assert_eq!(ev([0.3, 0.2, -0.1]), [0.0, 0.0, 1.0]);

        assert!(read_field_spec(
            "radius = 1.0\n[preset]\nname = \"toroidal_bump\"\ncenter = [0.3, 0.0, 0.1]\nwidth = 0.4\n"
        )
        .is_ok());
    }

    #[test]
    fn schema_violations() {
        // both variants
        assert!(read_field_spec(
            "radius = 1.0\nmodes = [[\"curl_plus\", 1, 1, 0, 1.0]]\n[preset]\nname = \"gradient_xsq\"\n"
        )
        .is_err());
        // neither
        assert!(read_field_spec("radius = 1.0\n").is_err());
        // unknown key
        assert!(read_field_spec("radius = 1.0\nbogus = 3\nmodes = [[\"curl_plus\", 1, 1, 0, 1.0]]\n").is_err());
        // bad family
        assert!(read_field_spec("radius = 1.0\nmodes = [[\"vortex\", 1, 1, 0, 1.0]]\n").is_err());
        // curl with n = 0
        assert!(read_field_spec("radius = 1.0\nmodes = [[\"curl_plus\", 0, 1, 0, 1.0]]\n").is_err());
        // |k| > n
        assert!(read_field_spec("radius = 1.0\nmodes = [[\"graddiv\", 1, 1, 2, 1.0]]\n").is_err());
        // unknown preset parameter combination
        assert!(read_field_spec(
            "radius = 1.0\n[preset]\nname = \"constant\"\ndirection = [0.0, 0.0, 1.0]\nwidth = 1.0\n"
        )
        .is_err());
        // parse error carries position info
        let err = read_field_spec("radius = [[[").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn field_spec_render_parses_back() {
        let doc = FieldSpecDocument {
            radius: 2.0,
            units: Some("meters".into()),
            modes: Some(vec![
                ("curl_plus".into(), 1, 1, 0, 0.125),
                ("graddiv".into(), 2, 1, -2, -3.5e-7),
            ]),
            preset: None,
        };
        let text = write_field_spec(&doc);
        let back = read_field_spec(&text).unwrap();
        assert_eq!(back.modes.as_ref().unwrap(), doc.modes.as_ref().unwrap());
        assert_eq!(text, write_field_spec(&back));
    }

    #[test]
    fn zero_table_round_trip_bit_exact() {
        let table = ZeroTable::build(ZeroFamily::Curl, 1.5, 3, 3).unwrap();
        let text = render_zero_table(&table);
        let back = parse_zero_table(&text).unwrap();
        assert_eq!(back.family, table.family);
        assert_eq!(back.radius.to_bits(), table.radius.to_bits());
        assert_eq!(back.entries.len(), table.entries.len());
        for (a, b) in table.entries.iter().zip(&back.entries) {
            assert_eq!(a.zero.to_bits(), b.zero.to_bits());
            assert_eq!(a.residual.to_bits(), b.residual.to_bits());
        }
        assert_eq!(text, render_zero_table(&back));
    }

    #[test]
    fn zero_table_tamper_and_version_rejection() {
        let table = ZeroTable::build(ZeroFamily::GradDiv, 1.0, 2, 2).unwrap();
        let text = render_zero_table(&table);
        // flip one digit of a zero
        let tampered = text.replacen('4', "5", 1);
        let tampered_body = {
            // tamper in the body only (first entry line)
            let split: Vec<&str> = text.splitn(7, '\n').collect();
            let mut s = split[..6].join("\n");
            s.push('\n');
            s.push_str(&split[6].replacen('4', "5", 1));
            s
        };
        assert!(matches!(
            parse_zero_table(&tampered_body),
            Err(Error::Checksum { .. })
        ));
        let _ = tampered;

        let versioned = text.replace("zero-table v1", "zero-table v9");
        assert!(matches!(
            parse_zero_table(&versioned),
            Err(Error::VersionMismatch { .. })
        ));
    }

    #[test]
    fn cache_hit_after_rebuild() {
        let dir = tempfile::tempdir().unwrap();
        let (a, status) =
            load_or_build_zero_table(Some(dir.path()), ZeroFamily::Curl, 1.0, 2, 2).unwrap();
        assert_eq!(status, CacheStatus::Rebuilt);
        let (b, status) =
            load_or_build_zero_table(Some(dir.path()), ZeroFamily::Curl, 1.0, 2, 2).unwrap();
        assert_eq!(status, CacheStatus::Hit);
        assert_eq!(a, b);
        let (_, status) = load_or_build_zero_table(None, ZeroFamily::Curl, 1.0, 2, 2).unwrap();
        assert_eq!(status, CacheStatus::Disabled);
    }

    #[test]
    fn csv_round_trip_and_empty() {
        let points = vec![[0.1, 0.2, 0.3], [1.0 / 3.0, -2.0e-17, 5.5]];
        let values = vec![[1.0, 2.0, 3.0], [0.1 + 0.2, -1.0, 1e-300]];
        let text = render_samples(&points, &values, ExportFormat::Csv).unwrap();
        let (p2, v2) = read_samples_csv(&text).unwrap();
        for (a, b) in points.iter().zip(&p2) {
            for i in 0..3 {
                assert_eq!(a[i].to_bits(), b[i].to_bits());
            }
        }
        for (a, b) in values.iter().zip(&v2) {
            for i in 0..3 {
                assert_eq!(a[i].to_bits(), b[i].to_bits());
            }
        }
        let empty = render_samples(&[], &[], ExportFormat::Csv).unwrap();
        assert_eq!(empty, "x,y,z,ux,uy,uz\n");
        let (p, v) = read_samples_csv(&empty).unwrap();
        assert!(p.is_empty() && v.is_empty());
    }

    #[test]
    fn vtk_structure() {
        let points = vec![[0.0, 0.0, 0.5], [0.5, 0.0, 0.0]];
        let values = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let text = render_samples(&points, &values, ExportFormat::VtkLegacyAscii).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains("DATASET POLYDATA"));
        assert!(text.contains("POINTS 2 double"));
        assert!(text.contains("POINT_DATA 2"));
        assert!(text.contains("VECTORS field double"));
        let empty = render_samples(&[], &[], ExportFormat::VtkLegacyAscii).unwrap();
        assert!(empty.contains("POINTS 0 double"));
        assert!(render_samples(&points, &values[..1], ExportFormat::Csv).is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let table = ZeroTable::build(ZeroFamily::Curl, 1.0, 2, 2).unwrap();
        assert_eq!(render_zero_table(&table), render_zero_table(&table));
    }
}
