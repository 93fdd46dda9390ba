//! Single-particle levels of an infinite square well segment.
//!
//! A segment of length `y` inside a box of length `L` has levels
//! `E_n(y) = n^2 E0 (L/y)^2`, where `E0` is the ground-state energy of one
//! particle in the full box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGeometry {
    pub total_length: f64,
    pub energy_unit: f64,
}

impl Default for BoxGeometry {
    fn default() -> Self {
        Self {
            total_length: 1.0,
            energy_unit: 1.0,
        }
    }
}

impl BoxGeometry {
    pub fn new(total_length: f64, energy_unit: f64) -> Result<Self> {
        if !(total_length > 0.0 && total_length.is_finite()) {
            return Err(Error::Domain(format!(
                "box length must be positive, got {total_length}"
            )));
        }
        if !(energy_unit > 0.0 && energy_unit.is_finite()) {
            return Err(Error::Domain(format!(
                "energy unit must be positive, got {energy_unit}"
            )));
        }
        Ok(Self {
            total_length,
            energy_unit,
        })
    }

    /// Ground-state energy of a segment of length `y`.
    #[inline]
    pub fn ground_energy(&self, y: f64) -> f64 {
        let r = self.total_length / y;
        self.energy_unit * r * r
    }

    fn check_length(&self, y: f64) -> Result<()> {
        if y > 0.0 && y <= self.total_length {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "segment length {y} outside (0, {}]",
                self.total_length
            )))
        }
    }
}

/// A segment strictly inside the box. The left side of a wall at `x` is
/// `SubBox(x)`, the right side is `SubBox(L - x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubBox {
    length: f64,
}

impl SubBox {
    pub fn new(length: f64, geom: &BoxGeometry) -> Result<Self> {
        if length > 0.0 && length < geom.total_length {
            Ok(Self { length })
        } else {
            Err(Error::Domain(format!(
                "wall position {length} must lie strictly inside (0, {})",
                geom.total_length
            )))
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// The complementary segment on the other side of the wall.
    pub fn complement(&self, geom: &BoxGeometry) -> Self {
        Self {
            length: geom.total_length - self.length,
        }
    }
}

pub fn level_energy(n: usize, y: f64, geom: &BoxGeometry) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("level index must be >= 1".into()));
    }
    geom.check_length(y)?;
    let n = n as f64;
    Ok(n * n * geom.ground_energy(y))
}

/// `dE_n/dy = -2 n^2 E0 L^2 / y^3` for a segment whose length is `y`.
pub fn level_energy_derivative(n: usize, y: f64, geom: &BoxGeometry) -> Result<f64> {
    let e = level_energy(n, y, geom)?;
    Ok(-2.0 * e / y)
}

/// Cutoff rule for the infinite level sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Relative Boltzmann weight below which levels are dropped.
    pub eps: f64,
    pub floor: usize,
    pub ceiling: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            eps: 1e-14,
            floor: 8,
            ceiling: 10_000,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Domain(format!(
                "truncation eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if self.floor < 1 || self.ceiling < self.floor {
            return Err(Error::Domain(format!(
                "invalid truncation floor/ceiling {}/{}",
                self.floor, self.ceiling
            )));
        }
        Ok(())
    }
}

/// Smallest `n_max` with `exp(-beta (E_{n_max}(y) - E_1(y))) < eps`, never
/// below the policy floor.
pub fn truncation_level(
    beta: f64,
    y: f64,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
) -> Result<usize> {
    truncation_level_above(1, beta, y, geom, policy)
}

/// Same rule measured from level `reference` instead of the ground level.
/// Fermions filling `k` levels use `reference = k`.
pub fn truncation_level_above(
    reference: usize,
    beta: f64,
    y: f64,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
) -> Result<usize> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    geom.check_length(y)?;
    let reference = reference.max(1);
    let r2 = (reference * reference) as f64;
    // n^2 - r^2 > -ln(eps) / (beta E_1(y))
    let gap = -policy.eps.ln() / (beta * geom.ground_energy(y));
    let threshold = r2 + gap;
    let mut n = threshold.sqrt().floor().max(reference as f64) as usize;
    while ((n * n) as f64) <= threshold {
        n += 1;
    }
    let n = n.max(policy.floor);
    if n > policy.ceiling {
        return Err(Error::TruncationCeiling {
            ceiling: policy.ceiling,
            beta,
            length: y,
        });
    }
    Ok(n)
}
