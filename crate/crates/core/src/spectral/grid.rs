use crate::error::{Error, Result};

/// Uniform grid on the unit torus `[0,1)^d` with `m` points per axis.
///
/// Flat indices are row-major: axis 0 varies slowest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    dim: usize,
    m: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, m: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if m < 4 || !m.is_power_of_two() {
            return Err(Error::Config(format!(
                "points per axis must be a power of two >= 4, got {m}"
            )));
        }
        Ok(Self { dim, m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.m as f64
    }

    /// Per-axis integer indices of a flat index. Unused axes are zero.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.m;
            flat /= self.m;
        }
        idx
    }

    pub fn ravel(&self, idx: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.m + idx[axis])
    }

    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// Signed wavenumber of an FFT index along one axis, in `(-m/2, m/2]`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let m = self.m as i64;
        let j = j as i64;
        if j <= m / 2 {
            j
        } else {
            j - m
        }
    }

    pub fn mode(&self, flat: usize) -> ModeIndex {
        let idx = self.unravel(flat);
        let mut k = [0i64; 3];
        for axis in 0..self.dim {
            k[axis] = self.wavenumber(idx[axis]);
        }
        ModeIndex { k }
    }

    /// Flat FFT index holding wavevector `k` (components reduced mod m).
    pub fn index_of(&self, k: [i64; 3]) -> usize {
        let m = self.m as i64;
        let mut idx = [0usize; 3];
        for axis in 0..self.dim {
            idx[axis] = k[axis].rem_euclid(m) as usize;
        }
        self.ravel(idx)
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.m / 2
    }
}

/// Integer wavevector; unused trailing components are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub k: [i64; 3],
}

impl ModeIndex {
    pub fn norm_sq(&self) -> i64 {
        self.k.iter().map(|c| c * c).sum()
    }

    pub fn sup_norm(&self) -> i64 {
        self.k.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn is_mean(&self) -> bool {
        self.k == [0, 0, 0]
    }
}
