//! Flat binary container for signals, phase-space arrays, matrices and spectra, plus small CSV
//! exports.
//!
//! Container layout (little-endian): magic `TFLC`, `u16` version, `u16` kind, `u32` dim,
//! `u64` n, `f64` h, `u64` count, then `count` complex values as interleaved `re, im` `f64`.
//! Phase-space arrays are x-major, then xi; matrices are row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, PhaseSpaceFunction, SampledSignal};

const MAGIC: &[u8; 4] = b"TFLC";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum ContainerKind {
    Signal = 1,
    PhaseSpace = 2,
    Matrix = 3,
    Spectrum = 4,
    Coefficients = 5,
}

impl ContainerKind {
    fn from_u16(v: u16) -> Result<Self> {
        Ok(match v {
            1 => Self::Signal,
            2 => Self::PhaseSpace,
            3 => Self::Matrix,
            4 => Self::Spectrum,
            5 => Self::Coefficients,
            other => return Err(Error::Data(format!("unknown container kind {other}"))),
        })
    }
}

/// A decoded container.
#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub kind: ContainerKind,
    pub dim: u32,
    pub n: u64,
    pub h: f64,
    pub values: Vec<Complex64>,
}

impl Container {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.kind as u16).to_le_bytes())?;
        w.write_all(&self.dim.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.h.to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Data("not a container file (bad magic)".into()));
        }
        let mut b2 = [0u8; 2];
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b2)?;
        let version = u16::from_le_bytes(b2);
        if version != VERSION {
            return Err(Error::Data(format!("unsupported container version {version}")));
        }
        r.read_exact(&mut b2)?;
        let kind = ContainerKind::from_u16(u16::from_le_bytes(b2))?;
        r.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4);
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let h = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            values.push(Complex64::new(re, f64::from_le_bytes(b8)));
        }
        Ok(Self { kind, dim, n, h, values })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim as usize, self.n as usize, self.h)
    }

    fn expect(&self, kind: ContainerKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Data(format!("expected a {kind:?} container, found {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn from_signal(f: &SampledSignal) -> Self {
        Self::with_grid(ContainerKind::Signal, &f.grid, f.values.clone())
    }

    pub fn from_phase_space(f: &PhaseSpaceFunction) -> Self {
        Self::with_grid(ContainerKind::PhaseSpace, &f.grid, f.values.clone())
    }

    /// Square matrix on `grid` (operators) in row-major order.
    pub fn from_matrix(grid: &Grid, m: &DMatrix<Complex64>) -> Self {
        Self::with_grid(ContainerKind::Matrix, grid, row_major(m))
    }

    /// Rectangular coefficient matrix; `n` stores the row count.
    pub fn from_coefficients(grid: &Grid, m: &DMatrix<Complex64>) -> Self {
        let mut c = Self::with_grid(ContainerKind::Coefficients, grid, row_major(m));
        c.n = m.nrows() as u64;
        c
    }

    pub fn from_spectrum(grid: &Grid, sigma: &[f64]) -> Self {
        let values = sigma.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        Self::with_grid(ContainerKind::Spectrum, grid, values)
    }

    fn with_grid(kind: ContainerKind, grid: &Grid, values: Vec<Complex64>) -> Self {
        Self { kind, dim: grid.dim() as u32, n: grid.n() as u64, h: grid.h(), values }
    }

    pub fn into_signal(self) -> Result<SampledSignal> {
        self.expect(ContainerKind::Signal)?;
        SampledSignal::new(self.grid()?, self.values)
    }

    pub fn into_phase_space(self) -> Result<PhaseSpaceFunction> {
        self.expect(ContainerKind::PhaseSpace)?;
        PhaseSpaceFunction::new(self.grid()?, self.values)
    }

    pub fn into_matrix(self) -> Result<(Grid, DMatrix<Complex64>)> {
        self.expect(ContainerKind::Matrix)?;
        let grid = self.grid()?;
        let n = grid.len();
        if self.values.len() != n * n {
            return Err(Error::Data(format!("matrix payload has {} values, expected {}", self.values.len(), n * n)));
        }
        Ok((grid, DMatrix::from_row_slice(n, n, &self.values)))
    }
}

fn row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)]);
        }
    }
    out
}

#[derive(Serialize)]
struct SignalRow {
    index: usize,
    x: f64,
    re: f64,
    im: f64,
}

/// `index,x,re,im` for a d = 1 signal (first coordinate for d = 2).
pub fn write_signal_csv(path: impl AsRef<Path>, f: &SampledSignal) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (i, v) in f.values.iter().enumerate() {
        w.serialize(SignalRow { index: i, x: f.grid.coords(i)[0], re: v.re, im: v.im })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PhaseRow {
    x: f64,
    xi: f64,
    re: f64,
    im: f64,
}

/// `x,xi,re,im`, x-major (d = 1).
pub fn write_phase_space_csv(path: impl AsRef<Path>, f: &PhaseSpaceFunction) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let grid = f.grid;
    let dual = grid.dual();
    let nn = grid.len();
    for (i, v) in f.values.iter().enumerate() {
        w.serialize(PhaseRow { x: grid.coords(i / nn)[0], xi: dual.coords(i % nn)[0], re: v.re, im: v.im })?;
    }
    w.flush()?;
    Ok(())
}

/// One modulation-norm result.
#[derive(Debug, Clone, Serialize)]
pub struct NormRecord {
    pub signal_id: String,
    pub window_id: String,
    pub p: String,
    pub q: String,
    pub lambda: f64,
    pub omega_kind: String,
    pub value: f64,
}

pub fn write_norm_csv(path: impl AsRef<Path>, rows: &[NormRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TailRow {
    r: f64,
    tail: f64,
}

pub fn write_tails_csv(path: impl AsRef<Path>, tails: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for &(r, tail) in tails {
        w.serialize(TailRow { r, tail })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SigmaRow {
    n: usize,
    k: usize,
    sigma: f64,
}

/// `n,k,sigma` rows for a singular-value ladder.
pub fn write_sigma_csv(path: impl AsRef<Path>, ladder: &[(usize, Vec<f64>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (n, sigma) in ladder {
        for (k, &s) in sigma.iter().enumerate() {
            w.serialize(SigmaRow { n: *n, k, sigma: s })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::gaussian;
    use crate::transforms::stft;

    #[test]
    fn round_trips() {
        let g = Grid::with_extent(1, 32, 4.0).unwrap();
        let f = gaussian(g).scale(Complex64::new(0.5, -2.0));
        let mut buf = Vec::new();
        Container::from_signal(&f).write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 2 + 2 + 4 + 8 + 8 + 8 + 32 * 16);
        let back = Container::read_from(buf.as_slice()).unwrap().into_signal().unwrap();
        assert_eq!(back, f);

        let v = stft(&f, &gaussian(g)).unwrap();
        let mut buf = Vec::new();
        Container::from_phase_space(&v).write_to(&mut buf).unwrap();
        assert_eq!(Container::read_from(buf.as_slice()).unwrap().into_phase_space().unwrap(), v);

        let m = DMatrix::from_fn(32, 32, |r, c| Complex64::new(r as f64, c as f64));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        Container::from_matrix(&g, &m).save(&path).unwrap();
        let (g2, m2) = Container::load(&path).unwrap().into_matrix().unwrap();
        assert_eq!((g2, m2), (g, m));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Container::read_from(&b"NOPE\0\0\0\0"[..]), Err(Error::Data(_))));
        let g = Grid::with_extent(1, 8, 2.0).unwrap();
        let c = Container::from_spectrum(&g, &[1.0, 0.5]);
        assert!(matches!(c.into_signal(), Err(Error::Data(_))));
        let mut buf = Vec::new();
        Container::from_signal(&gaussian(g)).write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(Container::read_from(buf.as_slice()), Err(Error::Io(_))));
    }

    #[test]
    fn csv_exports() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::with_extent(1, 8, 2.0).unwrap();
        write_signal_csv(dir.path().join("s.csv"), &gaussian(g)).unwrap();
        write_tails_csv(dir.path().join("t.csv"), &[(1.0, 2.0), (2.0, 0.5)]).unwrap();
        write_sigma_csv(dir.path().join("sigma.csv"), &[(8, vec![1.0, 0.1])]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("sigma.csv")).unwrap();
        assert_eq!(text, "n,k,sigma\n8,0,1.0\n8,1,0.1\n");
        let s = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
        assert!(s.starts_with("index,x,re,im\n0,-2.0,"));
    }
}
