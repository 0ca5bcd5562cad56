//! Binary field snapshots: `"SCNS"`, then `u32` version, `d`, `m`, component
//! count, then little-endian `f64` values, row-major, component after component.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::field::{ScalarField, VectorField};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SCNS";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dim: u32,
    pub m: u32,
    pub components: u32,
    pub data: Vec<f64>,
}

impl Snapshot {
    pub fn from_scalar(f: &ScalarField) -> Self {
        let g = f.grid();
        Self {
            dim: g.dim() as u32,
            m: g.points_per_axis() as u32,
            components: 1,
            data: f.values().to_vec(),
        }
    }

    pub fn from_vector(v: &VectorField) -> Self {
        let g = v.grid();
        Self {
            dim: g.dim() as u32,
            m: g.points_per_axis() as u32,
            components: g.dim() as u32,
            data: v.components().iter().flat_map(|c| c.values().iter().copied()).collect(),
        }
    }

    /// Square `n×n` matrix stored as `d = 1`, `m = n`, `n` components.
    pub fn from_matrix(n: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n * n {
            return Err(Error::Format(format!("matrix needs {} entries, got {}", n * n, row_major.len())));
        }
        Ok(Self { dim: 1, m: n as u32, components: n as u32, data: row_major.to_vec() })
    }

    fn points(&self) -> usize {
        (self.m as usize).pow(self.dim)
    }

    pub fn to_scalar(&self) -> Result<ScalarField> {
        if self.components != 1 {
            return Err(Error::Format(format!("expected 1 component, found {}", self.components)));
        }
        let grid = TorusGrid::new(self.dim as usize, self.m as usize)?;
        ScalarField::new(grid, self.data.clone())
    }

    pub fn to_vector(&self) -> Result<VectorField> {
        if self.components != self.dim {
            return Err(Error::Format(format!(
                "vector snapshot needs {} components, found {}",
                self.dim, self.components
            )));
        }
        let grid = TorusGrid::new(self.dim as usize, self.m as usize)?;
        let comps = self
            .data
            .chunks_exact(grid.len())
            .map(|c| ScalarField::new(grid, c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(comps)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [FORMAT_VERSION, self.dim, self.m, self.components] {
            w.write_all(&v.to_le_bytes())?;
        }
        for x in &self.data {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let mut header = [0u32; 4];
        for h in &mut header {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            *h = u32::from_le_bytes(b);
        }
        let [version, dim, m, components] = header;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        if dim == 0 || dim > 3 {
            return Err(Error::Format(format!("invalid dimension {dim}")));
        }
        let mut snap = Self { dim, m, components, data: Vec::new() };
        let count = snap.points() * components as usize;
        snap.data.reserve(count);
        let mut b = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut b)?;
            snap.data.push(f64::from_le_bytes(b));
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after snapshot payload".into()));
        }
        Ok(snap)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_exact_round_trip() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] * 7.1).sin() + x[1] * 1e-300);
        let snap = Snapshot::from_scalar(&f);
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"SCNS");
        assert_eq!(buf.len(), 4 + 16 + 8 * 64);
        let back = Snapshot::read_from(&mut buf.as_slice()).unwrap();
        let g2 = back.to_scalar().unwrap();
        for (a, b) in f.values().iter().zip(g2.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_corruption() {
        let mut buf = Vec::new();
        Snapshot::from_matrix(2, &[1.0, 0.0, 0.0, 1.0]).unwrap().write_to(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(Snapshot::read_from(&mut bad.as_slice()).is_err());
        let truncated = &buf[..buf.len() - 3];
        assert!(Snapshot::read_from(&mut &truncated[..]).is_err());
    }
}
