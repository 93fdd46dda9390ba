use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{split_partition, Statistics};
use crate::spectrum::{BoxGeometry, TruncationPolicy};

/// Numerical knobs shared by every computation on a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub truncation: TruncationPolicy,
    /// Points of the sign-change scan over `(margin, L - margin)`.
    pub scan_points: usize,
    /// Scan margin as a fraction of `L`.
    pub scan_margin: f64,
    /// Bisection stops once the bracket is narrower than this fraction of `L`.
    pub root_tolerance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            truncation: TruncationPolicy::default(),
            scan_points: 1024,
            scan_margin: 1e-4,
            root_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineModel {
    pub particle_count: usize,
    pub statistics: Statistics,
    pub geometry: BoxGeometry,
    /// Dimensionless temperature `k_B T / E0`.
    pub temperature: f64,
    pub tolerances: Tolerances,
}

impl EngineModel {
    pub fn new(particle_count: usize, statistics: Statistics, temperature: f64) -> Result<Self> {
        Self::with_geometry(
            particle_count,
            statistics,
            temperature,
            BoxGeometry::default(),
        )
    }

    pub fn with_geometry(
        particle_count: usize,
        statistics: Statistics,
        temperature: f64,
        geometry: BoxGeometry,
    ) -> Result<Self> {
        let model = Self {
            particle_count,
            statistics,
            geometry,
            temperature,
            tolerances: Tolerances::default(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.particle_count < 1 {
            return Err(Error::Domain("particle count must be >= 1".into()));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Domain(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        BoxGeometry::new(self.geometry.total_length, self.geometry.energy_unit)?;
        self.tolerances.truncation.validate()?;
        let t = &self.tolerances;
        if t.scan_points < 3
            || !(t.scan_margin > 0.0 && t.scan_margin < 0.5)
            || !(t.root_tolerance > 0.0)
        {
            return Err(Error::Domain("invalid solver tolerances".into()));
        }
        Ok(())
    }

    pub fn at_temperature(&self, temperature: f64) -> Result<Self> {
        let m = Self {
            temperature,
            ..*self
        };
        m.validate()?;
        Ok(m)
    }

    pub fn length(&self) -> f64 {
        self.geometry.total_length
    }

    /// `k_B T` in energy units.
    pub fn kbt(&self) -> f64 {
        self.temperature * self.geometry.energy_unit
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.kbt()
    }

    /// `ln f_m(y)` for every outcome. At `y = 0` and `y = L` the wall sits on
    /// a box edge and only the one-sided outcome survives.
    pub fn log_fractions(&self, y: f64) -> Result<Vec<f64>> {
        let n = self.particle_count;
        let l = self.length();
        if y == 0.0 || y == l {
            let keep = if y == 0.0 { 0 } else { n };
            return Ok((0..=n)
                .map(|m| if m == keep { 0.0 } else { f64::NEG_INFINITY })
                .collect());
        }
        if !(y > 0.0 && y < l) {
            return Err(Error::Domain(format!("wall position {y} outside [0, {l}]")));
        }
        match self.statistics {
            Statistics::ClassicalIdealGas => Ok((0..=n)
                .map(|m| crate::forces::classical_outcome_weight(n, m, y, l).ln())
                .collect()),
            stats => Ok(split_partition(
                n,
                self.beta(),
                y,
                stats,
                &self.geometry,
                &self.tolerances.truncation,
            )?
            .log_fractions),
        }
    }
}
