//! State and decomposition file formats.
//!
//! State files are JSON:
//!
//! ```text
//! {"format": "blochsep-state", "version": 1, "dims": [2, 2],
//!  "entries": [[0.5, 0.0], [0.0, 0.0], ...]}
//! ```
//!
//! with the `NM x NM` density matrix stored row-major as `[re, im]` pairs.
//!
//! Decomposition files are line-oriented text with every number printed to
//! 17 significant digits, so parse and emit round-trip exactly:
//!
//! ```text
//! blochsep-decomposition 1
//! dims 2 2
//! components 4
//! p 2.5000000000000000e-1
//! r ...
//! s ...
//! ```

use blochsep::criteria::{DecompositionEntry, SeparableDecomposition};
use blochsep::{BlochVector, ComplexMatrix, DensityMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STATE_FORMAT: &str = "blochsep-state";
pub const STATE_VERSION: u32 = 1;
pub const DECOMPOSITION_HEADER: &str = "blochsep-decomposition";
pub const DECOMPOSITION_VERSION: u32 = 1;
/// Most negative eigenvalue accepted in a state file.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format {format:?} version {version}")]
    Version { format: String, version: u32 },
    #[error("expected {expected} matrix entries for dims {n}x{m}, found {found}")]
    EntryCount { n: usize, m: usize, expected: usize, found: usize },
    #[error("dimensions must be positive")]
    ZeroDimension,
    #[error("not a valid density matrix: {0}")]
    Invalid(#[from] blochsep::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub format: String,
    pub version: u32,
    pub dims: [usize; 2],
    pub entries: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_matrix(rho: &ComplexMatrix, n: usize, m: usize) -> Self {
        let d = n * m;
        let entries = (0..d * d).map(|k| {
            let z = rho[(k / d, k % d)];
            [z.re, z.im]
        });
        StateFile {
            format: STATE_FORMAT.to_string(),
            version: STATE_VERSION,
            dims: [n, m],
            entries: entries.collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let file: StateFile = serde_json::from_str(text)?;
        if file.format != STATE_FORMAT || file.version != STATE_VERSION {
            return Err(FormatError::Version { format: file.format, version: file.version });
        }
        let [n, m] = file.dims;
        if n == 0 || m == 0 {
            return Err(FormatError::ZeroDimension);
        }
        let expected = (n * m) * (n * m);
        if file.entries.len() != expected {
            return Err(FormatError::EntryCount { n, m, expected, found: file.entries.len() });
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state files always serialize")
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let d = self.dims[0] * self.dims[1];
        ComplexMatrix::from_fn(d, d, |i, j| {
            let [re, im] = self.entries[i * d + j];
            Complex64::new(re, im)
        })
    }

    /// Validated density matrix with its dimensions: Hermitian, unit trace
    /// and positive semidefinite up to `PSD_TOL`.
    pub fn density(&self) -> Result<(DensityMatrix, usize, usize), FormatError> {
        let rho = DensityMatrix::new(self.matrix())?;
        let min = rho.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(FormatError::Invalid(blochsep::Error::NotPsd(min)));
        }
        Ok((rho, self.dims[0], self.dims[1]))
    }
}

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn vector_line(tag: &str, v: &BlochVector) -> String {
    let mut line = tag.to_string();
    for x in v.components().iter() {
        line.push(' ');
        line.push_str(&number(*x));
    }
    line
}

pub fn emit_decomposition(dec: &SeparableDecomposition) -> String {
    let (n, m) = dec.dims();
    let mut out = format!("{DECOMPOSITION_HEADER} {DECOMPOSITION_VERSION}\ndims {n} {m}\ncomponents {}\n", dec.len());
    for e in dec.entries() {
        out.push_str(&format!("p {}\n", number(e.p)));
        out.push_str(&vector_line("r", &e.r));
        out.push('\n');
        out.push_str(&vector_line("s", &e.s));
        out.push('\n');
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self, tag: &str) -> Result<(usize, Vec<&'a str>), FormatError> {
        loop {
            let Some((idx, line)) = self.inner.next() else {
                return Err(FormatError::Line { line: 0, message: format!("missing {tag:?} line") });
            };
            let line_no = idx + 1;
            let mut fields = line.split_whitespace();
            match fields.next() {
                None => continue,
                Some(t) if t == tag => return Ok((line_no, fields.collect())),
                Some(t) => {
                    return Err(FormatError::Line { line: line_no, message: format!("expected {tag:?}, found {t:?}") })
                }
            }
        }
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, FormatError> {
    s.parse().map_err(|_| FormatError::Line { line, message: format!("bad number {s:?}") })
}

fn parse_vector(lines: &mut Lines<'_>, tag: &str, dim: usize) -> Result<BlochVector, FormatError> {
    let (line, fields) = lines.next_fields(tag)?;
    let values = fields.iter().map(|f| parse_num::<f64>(f, line)).collect::<Result<Vec<_>, _>>()?;
    BlochVector::from_slice(dim, &values).map_err(|e| FormatError::Line { line, message: e.to_string() })
}

pub fn parse_decomposition(text: &str) -> Result<SeparableDecomposition, FormatError> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (line, header) = lines.next_fields(DECOMPOSITION_HEADER)?;
    let version: u32 = parse_num(header.first().copied().unwrap_or(""), line)?;
    if version != DECOMPOSITION_VERSION {
        return Err(FormatError::Version { format: DECOMPOSITION_HEADER.into(), version });
    }
    let (line, dims) = lines.next_fields("dims")?;
    if dims.len() != 2 {
        return Err(FormatError::Line { line, message: "dims needs two values".into() });
    }
    let (n, m): (usize, usize) = (parse_num(dims[0], line)?, parse_num(dims[1], line)?);
    if n == 0 || m == 0 {
        return Err(FormatError::ZeroDimension);
    }
    let (line, count) = lines.next_fields("components")?;
    let count: usize = parse_num(count.first().copied().unwrap_or(""), line)?;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, p) = lines.next_fields("p")?;
        let p: f64 = parse_num(p.first().copied().unwrap_or(""), line)?;
        let r = parse_vector(&mut lines, "r", n)?;
        let s = parse_vector(&mut lines, "s", m)?;
        entries.push(DecompositionEntry { p, r, s });
    }
    Ok(SeparableDecomposition::new(n, m, entries))
}
