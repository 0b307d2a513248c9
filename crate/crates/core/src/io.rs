//! Run configuration, the CPF1 field format, and CSV export.
//!
//! The configuration is a flat list of `section.key = value` lines; `#`
//! starts a comment. CPF1 is little-endian:
//!
//! ```text
//! "CPF1" | u32 nx | u32 ny | f64 x0, dx, y0, dy | f64 reserved ×2 | nx·ny × (f64 re, f64 im)
//! ```
//!
//! with the values stored x-major.

use crate::diagnostics::{DecayTable, EnergyReport};
use crate::model::{ComplexField2D, Grid1D, ModelError, PhysicalParams};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const CPF1_MAGIC: &[u8; 4] = b"CPF1";
pub const CPF1_HEADER_LEN: usize = 4 + 8 + 48;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("line {line}: `{key}` must be {expected}")]
    TypeError { line: usize, key: String, expected: &'static str },
    #[error("line {line}: `{key}` = {value} is not a power of two (≥ 8)")]
    NotPowerOfTwo { line: usize, key: String, value: usize },
    #[error("line {line}: `{key}`: {reason}")]
    Invalid { line: usize, key: String, reason: String },
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("not a CPF1 file")]
    BadMagic,
    #[error("CPF1 data should be {expected} bytes, found {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("CPF1 header: {0}")]
    Header(#[from] ModelError),
    #[error("line {line}: {reason}")]
    BoundaryFile { line: usize, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// How the propagation direction is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    Angle(f64),
    Components { kx: f64, ky: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryShape {
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// One sample per y-grid point, `re im` (or `re,im`) per line.
    File(PathBuf),
}

/// What the boundary profile stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRole {
    /// The entrance datum `g`.
    G,
    /// The incoming wave `u^in`; `g` is derived from it.
    UIn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConfig {
    pub shape: BoundaryShape,
    pub role: BoundaryRole,
    pub shift_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub ny: usize,
    pub ly: f64,
    pub y0: f64,
    pub nx: usize,
    pub lx: f64,
}

impl GridConfig {
    pub fn ygrid(&self) -> Result<Grid1D, ModelError> {
        Grid1D::with_length(self.ny, self.y0, self.ly)
    }

    pub fn xgrid(&self) -> Result<Grid1D, ModelError> {
        Grid1D::with_length(self.nx, 0.0, self.lx)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputConfig {
    pub field_path: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticToggles {
    pub energy: bool,
    pub stability: bool,
    pub transparency: bool,
    pub decay: bool,
    pub paraxiality: bool,
    pub hardy: bool,
    /// Shifts for the absorbing-decay table; defaults to `{2,4,8,16}·width`.
    pub decay_shifts: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub direction: Direction,
    pub grids: GridConfig,
    pub boundary: BoundaryConfig,
    pub outputs: OutputConfig,
    pub diagnostics: DiagnosticToggles,
}

impl RunConfig {
    /// Paths this run would write to.
    pub fn output_paths(&self) -> Vec<&Path> {
        [&self.outputs.field_path, &self.outputs.csv_path]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path)
            .collect()
    }
}

const KEYS: &[&str] = &[
    "params.epsilon",
    "params.theta",
    "params.kx",
    "params.ky",
    "params.nu",
    "grids.ny",
    "grids.ly",
    "grids.y0",
    "grids.nx",
    "grids.lx",
    "boundary.shape",
    "boundary.role",
    "boundary.center",
    "boundary.width",
    "boundary.amplitude",
    "boundary.shift_A",
    "boundary.path",
    "outputs.field_path",
    "outputs.csv_path",
    "diagnostics.energy",
    "diagnostics.stability",
    "diagnostics.transparency",
    "diagnostics.decay",
    "diagnostics.paraxiality",
    "diagnostics.hardy",
    "diagnostics.decay_shifts",
];

/// Raw `key → (line, value)` table with typed accessors.
struct Entries(HashMap<String, (usize, String)>);

impl Entries {
    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |(l, _)| *l)
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn raw(&self, key: &str) -> Result<(usize, &str), ConfigError> {
        self.0
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| ConfigError::MissingKey(key.to_string()))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, expected: &'static str) -> Result<T, ConfigError> {
        let (line, v) = self.raw(key)?;
        v.parse().map_err(|_| ConfigError::TypeError {
            line,
            key: key.to_string(),
            expected,
        })
    }

    fn real(&self, key: &str) -> Result<f64, ConfigError> {
        let x: f64 = self.parse(key, "a real number")?;
        if !x.is_finite() {
            return Err(ConfigError::TypeError {
                line: self.line(key),
                key: key.to_string(),
                expected: "a finite real number",
            });
        }
        Ok(x)
    }

    fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let x = self.real(key)?;
        if x <= 0.0 {
            return Err(ConfigError::TypeError {
                line: self.line(key),
                key: key.to_string(),
                expected: "a positive real number",
            });
        }
        Ok(x)
    }

    fn size(&self, key: &str) -> Result<usize, ConfigError> {
        let n: usize = self.parse(key, "a positive integer")?;
        if n < 8 || !n.is_power_of_two() {
            return Err(ConfigError::NotPowerOfTwo {
                line: self.line(key),
                key: key.to_string(),
                value: n,
            });
        }
        Ok(n)
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        if !self.has(key) {
            return Ok(false);
        }
        self.parse(key, "true or false")
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.0.get(key).map(|(_, v)| PathBuf::from(v))
    }

    fn invalid(&self, key: &str, reason: impl ToString) -> ConfigError {
        ConfigError::Invalid {
            line: self.line(key),
            key: key.to_string(),
            reason: reason.to_string(),
        }
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if map.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }
    Ok(Entries(map))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let e = tokenize(text)?;

    let epsilon = e.positive("params.epsilon")?;
    let nu = e.positive("params.nu")?;
    let (direction, dir_key) = match (e.has("params.theta"), e.has("params.kx") || e.has("params.ky")) {
        (true, false) => (Direction::Angle(e.real("params.theta")?), "params.theta"),
        (false, true) => (
            Direction::Components {
                kx: e.real("params.kx")?,
                ky: e.real("params.ky")?,
            },
            "params.kx",
        ),
        (true, true) => return Err(e.invalid("params.theta", "give either params.theta or params.kx/params.ky")),
        (false, false) => return Err(ConfigError::MissingKey("params.theta".into())),
    };
    let params = match direction {
        Direction::Angle(theta) => PhysicalParams::from_angle(epsilon, theta, nu),
        Direction::Components { kx, ky } => PhysicalParams::new(epsilon, kx, ky, nu),
    }
    .map_err(|err| e.invalid(dir_key, err))?;

    let ly = e.positive("grids.ly")?;
    let grids = GridConfig {
        ny: e.size("grids.ny")?,
        ly,
        y0: if e.has("grids.y0") { e.real("grids.y0")? } else { -ly / 2.0 },
        nx: e.size("grids.nx")?,
        lx: e.positive("grids.lx")?,
    };

    let (_, shape_name) = e.raw("boundary.shape")?;
    let shape = match shape_name {
        "gaussian" => BoundaryShape::Gaussian {
            center: e.real("boundary.center")?,
            width: e.positive("boundary.width")?,
            amplitude: e.real("boundary.amplitude")?,
        },
        "file" => BoundaryShape::File(e.path("boundary.path").ok_or_else(|| ConfigError::MissingKey("boundary.path".into()))?),
        _ => {
            return Err(ConfigError::TypeError {
                line: e.line("boundary.shape"),
                key: "boundary.shape".into(),
                expected: "`gaussian` or `file`",
            })
        }
    };
    let role = match e.0.get("boundary.role").map(|(_, v)| v.as_str()) {
        None | Some("g") => BoundaryRole::G,
        Some("uin") => BoundaryRole::UIn,
        Some(_) => {
            return Err(ConfigError::TypeError {
                line: e.line("boundary.role"),
                key: "boundary.role".into(),
                expected: "`g` or `uin`",
            })
        }
    };
    let shift_a = if e.has("boundary.shift_A") { e.real("boundary.shift_A")? } else { 0.0 };

    let decay_shifts = match e.0.get("diagnostics.decay_shifts") {
        None => None,
        Some((line, v)) => Some(
            v.split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| ConfigError::TypeError {
                    line: *line,
                    key: "diagnostics.decay_shifts".into(),
                    expected: "a comma-separated list of reals",
                })?,
        ),
    };

    Ok(RunConfig {
        params,
        direction,
        grids,
        boundary: BoundaryConfig { shape, role, shift_a },
        outputs: OutputConfig {
            field_path: e.path("outputs.field_path"),
            csv_path: e.path("outputs.csv_path"),
        },
        diagnostics: DiagnosticToggles {
            energy: e.flag("diagnostics.energy")?,
            stability: e.flag("diagnostics.stability")?,
            transparency: e.flag("diagnostics.transparency")?,
            decay: e.flag("diagnostics.decay")?,
            paraxiality: e.flag("diagnostics.paraxiality")?,
            hardy: e.flag("diagnostics.hardy")?,
            decay_shifts,
        },
    })
}

/// Samples of a boundary file: one `re im` or `re,im` pair per line.
pub fn read_boundary_file(path: &Path) -> Result<Vec<Complex64>, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parts: Vec<&str> = content.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let bad = || IoError::BoundaryFile {
            line: i + 1,
            reason: "expected two reals `re im`".into(),
        };
        if parts.len() != 2 {
            return Err(bad());
        }
        let re: f64 = parts[0].parse().map_err(|_| bad())?;
        let im: f64 = parts[1].parse().map_err(|_| bad())?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

pub fn encode_field(f: &ComplexField2D) -> Vec<u8> {
    let (xg, yg) = (f.xgrid(), f.ygrid());
    let mut out = Vec::with_capacity(CPF1_HEADER_LEN + 16 * f.values().len());
    out.extend_from_slice(CPF1_MAGIC);
    out.extend_from_slice(&(f.nx() as u32).to_le_bytes());
    out.extend_from_slice(&(f.ny() as u32).to_le_bytes());
    for v in [xg.x0(), xg.dx(), yg.x0(), yg.dx(), 0.0, 0.0] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in f.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode_field(bytes: &[u8]) -> Result<ComplexField2D, IoError> {
    if bytes.len() < 4 || &bytes[..4] != CPF1_MAGIC {
        return Err(IoError::BadMagic);
    }
    if bytes.len() < CPF1_HEADER_LEN {
        return Err(IoError::LengthMismatch {
            expected: CPF1_HEADER_LEN,
            got: bytes.len(),
        });
    }
    let nx = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let ny = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let expected = CPF1_HEADER_LEN + 16 * nx * ny;
    if bytes.len() != expected {
        return Err(IoError::LengthMismatch {
            expected,
            got: bytes.len(),
        });
    }
    let xgrid = Grid1D::new(nx, f64_at(bytes, 12), f64_at(bytes, 20))?;
    let ygrid = Grid1D::new(ny, f64_at(bytes, 28), f64_at(bytes, 36))?;
    let values = bytes[CPF1_HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    Ok(ComplexField2D::new(xgrid, ygrid, values)?)
}

pub fn write_field(f: &ComplexField2D, path: &Path) -> Result<(), IoError> {
    fs::write(path, encode_field(f)).map_err(io_err(path))
}

pub fn read_field(path: &Path) -> Result<ComplexField2D, IoError> {
    decode_field(&fs::read(path).map_err(io_err(path))?)
}

/// `{:.16e}`: 17 significant digits, enough to re-parse every double exactly.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows `x,y,re,im,abs` of slice `ix`.
pub fn write_slice_csv(w: &mut impl Write, f: &ComplexField2D, ix: usize) -> std::io::Result<()> {
    writeln!(w, "x,y,re,im,abs")?;
    let x = f.xgrid().point(ix);
    for (iy, v) in f.slice(ix).iter().enumerate() {
        let y = f.ygrid().point(iy);
        writeln!(w, "{},{},{},{},{}", fmt_real(x), fmt_real(y), fmt_real(v.re), fmt_real(v.im), fmt_real(v.norm()))?;
    }
    Ok(())
}

pub fn write_decay_csv(w: &mut impl Write, t: &DecayTable) -> std::io::Result<()> {
    writeln!(w, "A,err,bound")?;
    for r in &t.rows {
        writeln!(w, "{},{},{}", fmt_real(r.a), fmt_real(r.err), fmt_real(r.bound))?;
    }
    Ok(())
}

pub fn write_energy_csv(w: &mut impl Write, r: &EnergyReport) -> std::io::Result<()> {
    writeln!(w, "quantity,value")?;
    for (name, v) in [
        ("absorbed", r.absorbed),
        ("outgoing", r.outgoing),
        ("incoming", r.incoming),
        ("trace_energy", r.trace_energy),
        ("tail", r.tail),
        ("xmax", r.xmax),
        ("lhs1", r.lhs1),
        ("rhs1", r.rhs1),
        ("residual1", r.residual1),
        ("lhs2", r.lhs2),
        ("rhs2", r.rhs2),
        ("residual2", r.residual2),
    ] {
        writeln!(w, "{name},{}", fmt_real(v))?;
    }
    Ok(())
}

fn to_file(path: &Path, body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), IoError> {
    let mut buf = Vec::new();
    body(&mut buf).map_err(io_err(path))?;
    fs::write(path, buf).map_err(io_err(path))
}

pub fn export_slice_csv(f: &ComplexField2D, ix: usize, path: &Path) -> Result<(), IoError> {
    to_file(path, |w| write_slice_csv(w, f, ix))
}

pub fn export_decay_csv(t: &DecayTable, path: &Path) -> Result<(), IoError> {
    to_file(path, |w| write_decay_csv(w, t))
}

pub fn export_energy_csv(r: &EnergyReport, path: &Path) -> Result<(), IoError> {
    to_file(path, |w| write_energy_csv(w, r))
}
