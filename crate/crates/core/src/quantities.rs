//! Physical constants, complex impedance arithmetic and the VNA frequency grid.
//!
//! Everything is SI internally; conversions happen only at I/O boundaries.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Vacuum permeability (N/A²).
pub const MU0: f64 = 4.0 * PI * 1e-7;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854187817e-12;
/// Bohr magneton (A·m²), as rounded in the magnetization worked example.
pub const BOHR_MAGNETON: f64 = 9.27e-24;
/// Avogadro's number (1/mol), as rounded in the magnetization worked example.
pub const AVOGADRO: f64 = 6.02e23;
/// Earth's surface field (T), lower bound of the magnetic ladder.
pub const EARTH_FIELD_T: f64 = 5e-5;
/// Fridge-magnet field (T), upper bound of the magnetic ladder.
pub const FRIDGE_FIELD_T: f64 = 1e-2;

/// Bundle of the constants above, for callers that want to pass them around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub mu0: f64,
    pub eps0: f64,
    pub bohr_magneton: f64,
    pub avogadro: f64,
    pub earth_field: f64,
    pub fridge_field: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        mu0: MU0,
        eps0: EPS0,
        bohr_magneton: BOHR_MAGNETON,
        avogadro: AVOGADRO,
        earth_field: EARTH_FIELD_T,
        fridge_field: FRIDGE_FIELD_T,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// |z|, computed without intermediate overflow.
pub fn magnitude(z: Complex) -> f64 {
    z.re.hypot(z.im)
}

pub const DEFAULT_GRID_START_HZ: f64 = 1e6;
pub const DEFAULT_GRID_STOP_HZ: f64 = 5e8;
pub const DEFAULT_GRID_POINTS: usize = 51;

/// Strictly increasing list of sweep frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid {
    f_hz: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(f_hz: Vec<f64>) -> Result<Self> {
        if f_hz.is_empty() {
            return Err(Error::domain("frequency grid is empty"));
        }
        if f_hz.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::domain("frequency grid values must be finite and > 0"));
        }
        if f_hz.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("frequency grid must be strictly increasing"));
        }
        Ok(Self { f_hz })
    }

    /// `n` points with a constant ratio between neighbours; endpoints are exact.
    pub fn log_spaced(start_hz: f64, stop_hz: f64, n: usize) -> Result<Self> {
        if !(start_hz > 0.0 && stop_hz > start_hz) || n < 2 {
            return Err(Error::domain("log grid needs 0 < start < stop and n >= 2"));
        }
        let step = (stop_hz / start_hz).ln() / (n - 1) as f64;
        let mut f: Vec<f64> = (0..n).map(|i| start_hz * (step * i as f64).exp()).collect();
        f[n - 1] = stop_hz;
        Self::new(f)
    }

    pub fn linear(start_hz: f64, stop_hz: f64, n: usize) -> Result<Self> {
        if !(start_hz > 0.0 && stop_hz > start_hz) || n < 2 {
            return Err(Error::domain("linear grid needs 0 < start < stop and n >= 2"));
        }
        let step = (stop_hz - start_hz) / (n - 1) as f64;
        let mut f: Vec<f64> = (0..n).map(|i| start_hz + step * i as f64).collect();
        f[n - 1] = stop_hz;
        Self::new(f)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.f_hz
    }

    pub fn len(&self) -> usize {
        self.f_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_hz.is_empty()
    }

    /// Indices of grid points inside the closed band `[lo_hz, hi_hz]`.
    pub fn band_indices(&self, lo_hz: f64, hi_hz: f64) -> std::ops::Range<usize> {
        let start = self.f_hz.partition_point(|&f| f < lo_hz);
        let end = self.f_hz.partition_point(|&f| f <= hi_hz);
        start..end.max(start)
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        default_grid()
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;

    fn try_from(f_hz: Vec<f64>) -> Result<Self> {
        Self::new(f_hz)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(g: FrequencyGrid) -> Self {
        g.f_hz
    }
}

impl std::ops::Index<usize> for FrequencyGrid {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.f_hz[i]
    }
}

/// The sensing sweep: 51 log-spaced points from 1 MHz to 500 MHz.
pub fn default_grid() -> FrequencyGrid {
    FrequencyGrid::log_spaced(DEFAULT_GRID_START_HZ, DEFAULT_GRID_STOP_HZ, DEFAULT_GRID_POINTS)
        .expect("default grid parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn magnitude_examples() {
        assert_eq!(magnitude(Complex::new(0.0, 0.0)), 0.0);
        assert_eq!(magnitude(Complex::new(3.0, 4.0)), 5.0);
        // sqrt(8.5) = 2.9154759474226502...
        assert!((magnitude(Complex::new(1.5, -2.5)) - 2.915_475_947_422_650_2).abs() < 1e-15);
    }

    #[test]
    fn default_grid_endpoints_and_midpoint() {
        let g = default_grid();
        assert_eq!(g.len(), 51);
        assert_eq!(g[0], 1e6);
        assert_eq!(g[50], 5e8);
        let mid = (1e6f64 * 5e8).sqrt();
        assert!((g[25] - mid).abs() / mid < 1e-12);
        assert!((g[25] - 2.236e7).abs() / 2.236e7 < 1e-3);
    }

    #[test]
    fn default_grid_has_constant_ratio() {
        let g = default_grid();
        let r0 = g[1] / g[0];
        for w in g.as_slice().windows(2) {
            assert!(((w[1] / w[0]) - r0).abs() / r0 < 1e-9);
        }
    }

    #[test]
    fn band_indices_cover_decode_band() {
        let g = default_grid();
        let band = g.band_indices(80e6, 180e6);
        assert!(!band.is_empty());
        for i in band.clone() {
            assert!(g[i] >= 80e6 && g[i] <= 180e6);
        }
        assert!(g[band.start - 1] < 80e6);
        assert!(g[band.end] > 180e6);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(FrequencyGrid::new(vec![]).is_err());
        assert!(FrequencyGrid::new(vec![1.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![-1.0, 1.0]).is_err());
        assert!(FrequencyGrid::linear(1e6, 2e6, 11).is_ok());
    }

    // Rounding in a product is relative to the product of operand magnitudes,
    // not to the (possibly cancelled) result.
    fn close(a: Complex, b: Complex, scale: f64) -> bool {
        magnitude(a - b) <= 1e-12 * scale.max(1e-300)
    }

    proptest! {
        #[test]
        fn complex_mul_commutative_associative(
            a in (-1e3f64..1e3, -1e3f64..1e3),
            b in (-1e3f64..1e3, -1e3f64..1e3),
            c in (-1e3f64..1e3, -1e3f64..1e3),
        ) {
            let (a, b, c) = (Complex::new(a.0, a.1), Complex::new(b.0, b.1), Complex::new(c.0, c.1));
            let (ma, mb, mc) = (magnitude(a), magnitude(b), magnitude(c));
            prop_assert!(close(a * b, b * a, ma * mb));
            prop_assert!(close((a * b) * c, a * (b * c), ma * mb * mc));
        }
    }
}
