//! Plain-text formats.
//!
//! Matrices: a `rows cols` header, then one `i j re im` line per entry.
//! Observations add a `delta <value>` line after the header and list only the
//! observed entries. Floats are written in shortest round-trip form, so reading
//! back is bit-exact. Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{ComplexMatrix, PartialObservation, SampleMask};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} '{tok}'")))
}

fn entry_line(out: &mut String, i: usize, j: usize, z: Complex64) {
    let _ = writeln!(out, "{i} {j} {} {}", z.re, z.im);
}

fn parse_entry(line: usize, l: &str, rows: usize, cols: usize) -> Result<(usize, usize, Complex64)> {
    let mut t = l.split_whitespace();
    let i: usize = field(t.next(), line, "row index")?;
    let j: usize = field(t.next(), line, "column index")?;
    let re: f64 = field(t.next(), line, "real part")?;
    let im: f64 = field(t.next(), line, "imaginary part")?;
    if t.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    if i >= rows || j >= cols {
        return Err(parse_err(line, format!("entry ({i}, {j}) outside {rows}x{cols}")));
    }
    Ok((i, j, Complex64::new(re, im)))
}

fn parse_header(line: usize, l: &str) -> Result<(usize, usize)> {
    let mut t = l.split_whitespace();
    let r = field(t.next(), line, "rows")?;
    let c = field(t.next(), line, "cols")?;
    if t.next().is_some() {
        return Err(parse_err(line, "header must be 'rows cols'"));
    }
    Ok((r, c))
}

pub fn write_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            entry_line(&mut out, i, j, m[(i, j)]);
        }
    }
    out
}

/// Reads a matrix. Every entry must appear exactly once.
pub fn read_matrix(s: &str) -> Result<ComplexMatrix> {
    let mut lines = content_lines(s);
    let (hl, h) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let (rows, cols) = parse_header(hl, h)?;
    let mut m = ComplexMatrix::zeros(rows, cols);
    let mut seen = vec![false; rows * cols];
    for (ln, l) in lines {
        let (i, j, z) = parse_entry(ln, l, rows, cols)?;
        if std::mem::replace(&mut seen[i * cols + j], true) {
            return Err(parse_err(ln, format!("duplicate entry ({i}, {j})")));
        }
        m[(i, j)] = z;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(parse_err(0, format!("missing entry ({}, {})", k / cols, k % cols)));
    }
    Ok(m)
}

pub fn write_observation(obs: &PartialObservation) -> String {
    let (rows, cols) = obs.shape();
    let mut out = format!("{rows} {cols}\ndelta {}\n", obs.noise_level());
    for (&(i, j), z) in obs.mask().indices().iter().zip(obs.values()) {
        entry_line(&mut out, i, j, *z);
    }
    out
}

pub fn read_observation(s: &str) -> Result<PartialObservation> {
    let mut lines = content_lines(s);
    let (hl, h) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let (rows, cols) = parse_header(hl, h)?;
    let (dl, d) = lines.next().ok_or_else(|| parse_err(hl + 1, "missing delta line"))?;
    let delta: f64 = match d.split_once(char::is_whitespace) {
        Some(("delta", v)) => field(Some(v.trim()), dl, "delta")?,
        _ => return Err(parse_err(dl, "expected 'delta <value>'")),
    };
    let mut entries = Vec::new();
    for (ln, l) in lines {
        entries.push(parse_entry(ln, l, rows, cols)?);
    }
    entries.sort_by_key(|&(i, j, _)| (i, j));
    if entries.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
        return Err(parse_err(0, "duplicate observed entry"));
    }
    let idx = entries.iter().map(|&(i, j, _)| (i, j)).collect();
    let vals = entries.iter().map(|e| e.2).collect();
    PartialObservation::new(SampleMask::new(rows, cols, idx)?, vals, delta)
}

/// Parses `key=value` lines into an ordered map.
pub fn parse_kv(s: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (ln, l) in content_lines(s) {
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| parse_err(ln, "expected key=value"))?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(parse_err(ln, format!("duplicate key '{}'", k.trim())));
        }
    }
    Ok(out)
}

/// A CSV table with a provenance comment line (`# config_hash=... seed=...`).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub config_hash: String,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(config_hash: impl Into<String>, seed: u64, columns: &[&str]) -> Self {
        Self {
            config_hash: config_hash.into(),
            seed,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn render(&self) -> String {
        let mut out = format!("# config_hash={} seed={}\n", self.config_hash, self.seed);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate();
        let (_, meta) = lines.next().ok_or_else(|| parse_err(1, "empty csv"))?;
        let meta = meta
            .strip_prefix("# ")
            .ok_or_else(|| parse_err(1, "missing provenance comment"))?;
        let kv: BTreeMap<&str, &str> = meta
            .split_whitespace()
            .filter_map(|t| t.split_once('='))
            .collect();
        let config_hash = kv
            .get("config_hash")
            .ok_or_else(|| parse_err(1, "missing config_hash"))?
            .to_string();
        let seed = field(kv.get("seed").copied(), 1, "seed")?;
        let (_, header) = lines.next().ok_or_else(|| parse_err(2, "missing header"))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, l) in lines {
            if l.is_empty() {
                continue;
            }
            let r: Vec<String> = l.split(',').map(str::to_string).collect();
            if r.len() != columns.len() {
                return Err(parse_err(i + 1, "wrong number of fields"));
            }
            rows.push(r);
        }
        Ok(Self {
            config_hash,
            seed,
            columns,
            rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(m: &ComplexMatrix) -> Vec<(u64, u64)> {
        let mut v = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                v.push((m[(i, j)].re.to_bits(), m[(i, j)].im.to_bits()));
            }
        }
        v
    }

    #[test]
    fn matrix_format_layout() {
        let m = ComplexMatrix::from_fn(1, 2, |_, j| Complex64::new(j as f64 + 0.5, -1.0));
        assert_eq!(write_matrix(&m), "1 2\n0 0 0.5 -1\n0 1 1.5 -1\n");
    }

    #[test]
    fn matrix_rejects_malformed() {
        assert!(read_matrix("").is_err());
        assert!(read_matrix("1 1\n").is_err());
        assert!(read_matrix("1 1\n0 0 1 2\n0 0 1 2\n").is_err());
        assert!(read_matrix("1 1\n1 0 1 2\n").is_err());
        assert!(read_matrix("1 1\n0 0 x 2\n").is_err());
        assert!(read_matrix("# c\n1 1\n\n0 0 1 2\n").is_ok());
    }

    #[test]
    fn observation_round_trip() {
        let mask = SampleMask::new(3, 2, vec![(2, 1), (0, 0)]).unwrap();
        let obs = PartialObservation::new(
            mask,
            vec![Complex64::new(0.1, 0.2), Complex64::new(1.0 / 3.0, -7e-300)],
            0.125,
        )
        .unwrap();
        let s = write_observation(&obs);
        assert!(s.starts_with("3 2\ndelta 0.125\n"));
        let back = read_observation(&s).unwrap();
        assert_eq!(back.mask(), obs.mask());
        assert_eq!(back.values(), obs.values());
        assert_eq!(back.noise_level(), 0.125);
    }

    #[test]
    fn kv_records() {
        let m = parse_kv("rank=2\nmu_u = 1.5\n# note\n").unwrap();
        assert_eq!(m["rank"], "2");
        assert_eq!(m["mu_u"], "1.5");
        assert!(parse_kv("a=1\na=2\n").is_err());
        assert!(parse_kv("novalue\n").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut t = CsvTable::new("abc", 7, &["M", "mu"]);
        t.push(vec!["10".into(), "1.25".into()]);
        let s = t.render();
        assert_eq!(s, "# config_hash=abc seed=7\nM,mu\n10,1.25\n");
        assert_eq!(CsvTable::parse(&s).unwrap(), t);
        assert_eq!(t.column("mu").unwrap(), vec!["1.25"]);
    }

    proptest! {
        #[test]
        fn matrix_round_trip_is_bit_exact(
            rows in 1usize..5,
            cols in 1usize..5,
            raw in proptest::collection::vec((any::<f64>(), any::<f64>()), 16),
        ) {
            let m = ComplexMatrix::from_fn(rows, cols, |i, j| {
                let (a, b) = raw[(i * cols + j) % raw.len()];
                let fix = |x: f64| if x.is_nan() { 0.0 } else { x };
                Complex64::new(fix(a), fix(b))
            });
            let back = read_matrix(&write_matrix(&m)).unwrap();
            prop_assert_eq!(bits(&back), bits(&m));
        }
    }
}
