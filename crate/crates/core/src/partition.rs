//! Canonical partition functions of ideal quantum gases in a well segment
//! and the split-box vector `Z_m(y) = Z(m | y) Z(N - m | L - y)`.
//!
//! Production values come from a level-by-level build-up of the elementary
//! (fermions) or complete homogeneous (bosons) symmetric polynomials of the
//! Boltzmann factors. Every term is positive, so nothing cancels at low
//! temperature. The signed power-sum recursion is kept as
//! [`canonical_partition_power_sum`] for cross-checks at moderate temperature.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logscale::{LogDeriv, LogScaledValue};
use crate::spectrum::{
    level_energy, level_energy_derivative, truncation_level_above, BoxGeometry, TruncationPolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
    Distinguishable,
    #[serde(rename = "classical")]
    ClassicalIdealGas,
}

impl Statistics {
    pub fn name(&self) -> &'static str {
        match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
            Statistics::Distinguishable => "distinguishable",
            Statistics::ClassicalIdealGas => "classical",
        }
    }

    pub fn is_quantum(&self) -> bool {
        !matches!(self, Statistics::ClassicalIdealGas)
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boson" | "bosons" | "bose" => Ok(Statistics::Boson),
            "fermion" | "fermions" | "fermi" => Ok(Statistics::Fermion),
            "distinguishable" | "boltzmann" => Ok(Statistics::Distinguishable),
            "classical" | "classical-ideal-gas" => Ok(Statistics::ClassicalIdealGas),
            other => Err(Error::Domain(format!("unknown statistics '{other}'"))),
        }
    }
}

/// Number of levels used for a segment holding `n` particles.
pub fn levels_for(
    n: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
) -> Result<usize> {
    let reference = match stats {
        Statistics::Fermion => n.max(1),
        _ => 1,
    };
    truncation_level_above(reference, beta, y, geom, policy)
}

/// `z_1(k beta, y) = sum_n exp(-k beta E_n(y))`, max-shifted.
pub fn single_particle_sum(
    k: usize,
    beta: f64,
    y: f64,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
) -> Result<LogScaledValue> {
    if k < 1 {
        return Err(Error::Domain("single-particle sum needs k >= 1".into()));
    }
    let kb = k as f64 * beta;
    let levels = truncation_level_above(1, kb, y, geom, policy)?;
    single_particle_sum_truncated(kb, y, geom, levels).map(LogScaledValue::from_ln)
}

fn single_particle_sum_truncated(
    kb: f64,
    y: f64,
    geom: &BoxGeometry,
    levels: usize,
) -> Result<f64> {
    // the ground term is the largest, so shift by it
    let shift = -kb * level_energy(1, y, geom)?;
    let mut acc = 0.0;
    for n in (1..=levels).rev() {
        acc += (-kb * level_energy(n, y, geom)? - shift).exp();
    }
    Ok(shift + acc.ln())
}

/// `ln Z(k | y)` and `d ln Z(k | y) / dy` for `k = 0..=n` using exactly
/// `levels` single-particle levels.
pub(crate) fn segment_table(
    n: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    levels: usize,
) -> Result<Vec<LogDeriv>> {
    let mut table = vec![LogDeriv::ZERO; n + 1];
    table[0] = LogDeriv::ONE;
    if n == 0 {
        return Ok(table);
    }
    let factor = |j: usize| -> Result<LogDeriv> {
        Ok(LogDeriv {
            ln: -beta * level_energy(j, y, geom)?,
            dln: -beta * level_energy_derivative(j, y, geom)?,
        })
    };
    match stats {
        Statistics::Fermion => {
            // e_k over levels 1..=j; descending k so each level is used at most once
            for j in 1..=levels {
                let x = factor(j)?;
                for k in (1..=n.min(j)).rev() {
                    table[k] = table[k].add(table[k - 1].mul(x));
                }
            }
        }
        Statistics::Boson => {
            // h_k over levels 1..=j; ascending k allows repeated occupation
            for j in 1..=levels {
                let x = factor(j)?;
                for k in 1..=n {
                    table[k] = table[k].add(table[k - 1].mul(x));
                }
            }
        }
        Statistics::Distinguishable => {
            let mut z1 = LogDeriv::ZERO;
            for j in (1..=levels).rev() {
                z1 = z1.add(factor(j)?);
            }
            let mut ln_fact = 0.0;
            for (k, slot) in table.iter_mut().enumerate().skip(1) {
                ln_fact += (k as f64).ln();
                *slot = LogDeriv {
                    ln: k as f64 * z1.ln - ln_fact,
                    dln: k as f64 * z1.dln,
                };
            }
        }
        Statistics::ClassicalIdealGas => {
            return Err(Error::ClassicalHasNoSpectrum(
                "canonical partition function",
            ))
        }
    }
    Ok(table)
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "beta must be positive and finite, got {beta}"
        )))
    }
}

pub fn canonical_partition(
    n_particles: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
) -> Result<LogScaledValue> {
    check_beta(beta)?;
    if !stats.is_quantum() {
        return Err(Error::ClassicalHasNoSpectrum(
            "canonical partition function",
        ));
    }
    if n_particles == 0 {
        return Ok(LogScaledValue::ONE);
    }
    let levels = levels_for(n_particles, beta, y, stats, geom, policy)?;
    canonical_partition_truncated(n_particles, beta, y, stats, geom, levels)
}

/// As [`canonical_partition`] with an explicit level count.
pub fn canonical_partition_truncated(
    n_particles: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    levels: usize,
) -> Result<LogScaledValue> {
    check_beta(beta)?;
    let table = segment_table(n_particles, beta, y, stats, geom, levels)?;
    Ok(LogScaledValue::from_ln(table[n_particles].ln))
}

/// `Z_n = (1/n) sum_{k=1..n} s^{k+1} z_1(k beta) Z_{n-k}` with `s = +1` for
/// bosons and `s = -1` for fermions; `z_1^n / n!` for distinguishable
/// particles. Fails when the alternating fermion sum loses its sign or
/// most of its digits.
pub fn canonical_partition_power_sum(
    n_particles: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
) -> Result<LogScaledValue> {
    check_beta(beta)?;
    let s: i8 = match stats {
        Statistics::Boson => 1,
        Statistics::Fermion => -1,
        Statistics::Distinguishable => {
            let z1 = single_particle_sum(1, beta, y, geom, policy)?;
            let ln_fact: f64 = (1..=n_particles).map(|k| (k as f64).ln()).sum();
            return Ok(LogScaledValue::from_ln(
                n_particles as f64 * z1.log_magnitude - ln_fact,
            ));
        }
        Statistics::ClassicalIdealGas => {
            return Err(Error::ClassicalHasNoSpectrum(
                "canonical partition function",
            ))
        }
    };
    let z1: Vec<LogScaledValue> = (1..=n_particles.max(1))
        .map(|k| single_particle_sum(k, beta, y, geom, policy))
        .collect::<Result<_>>()?;
    let mut z = vec![LogScaledValue::ONE];
    for n in 1..=n_particles {
        let mut acc = LogScaledValue::ZERO;
        let mut largest = f64::NEG_INFINITY;
        for k in 1..=n {
            let mut term = z1[k - 1].mul(z[n - k]);
            if s < 0 && k % 2 == 0 {
                term = term.neg();
            }
            if !term.is_zero() {
                largest = largest.max(term.log_magnitude);
            }
            acc = acc.add(term);
        }
        let zn = acc.scale_ln(-(n as f64).ln());
        if zn.sign <= 0 {
            return Err(Error::UnphysicalCancellation { n, sign: zn.sign });
        }
        // fewer than ~10 significant digits survive the cancellation
        let lost = largest - (zn.log_magnitude + (n as f64).ln());
        if lost > 6.0 * std::f64::consts::LN_10 {
            return Err(Error::PrecisionExhausted(format!(
                "power-sum recursion for n = {n} cancels {:.1} decades",
                lost / std::f64::consts::LN_10
            )));
        }
        z.push(zn);
    }
    Ok(z[n_particles])
}

/// Split-box partition vector at one wall position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPartition {
    pub wall_position: f64,
    /// `Z_m` for `m = 0..=N`.
    pub per_outcome: Vec<LogScaledValue>,
    pub total: LogScaledValue,
    /// `f_m = Z_m / Z`.
    pub fractions: Vec<f64>,
    /// `ln f_m`, exact even where `f_m` underflows.
    pub log_fractions: Vec<f64>,
}

impl SplitPartition {
    fn from_logs(wall_position: f64, ln_z: &[f64]) -> Self {
        let total = crate::logscale::log_sum_exp(ln_z);
        let log_fractions: Vec<f64> = ln_z.iter().map(|&l| l - total).collect();
        Self {
            wall_position,
            per_outcome: ln_z.iter().map(|&l| LogScaledValue::from_ln(l)).collect(),
            total: LogScaledValue::from_ln(total),
            fractions: log_fractions.iter().map(|l| l.exp()).collect(),
            log_fractions,
        }
    }

    pub fn particle_count(&self) -> usize {
        self.per_outcome.len() - 1
    }
}

fn check_wall(y: f64, geom: &BoxGeometry) -> Result<()> {
    if y > 0.0 && y < geom.total_length {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "wall position {y} must lie strictly inside (0, {})",
            geom.total_length
        )))
    }
}

/// `ln Z_m(y)` and `d ln Z_m / dy` for every outcome `m`.
pub(crate) fn split_log_derivatives(
    n: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
) -> Result<Vec<LogDeriv>> {
    check_beta(beta)?;
    check_wall(y, geom)?;
    if !stats.is_quantum() {
        return Err(Error::ClassicalHasNoSpectrum("split partition vector"));
    }
    let right = geom.total_length - y;
    let left_table = segment_table(
        n,
        beta,
        y,
        stats,
        geom,
        levels_for(n, beta, y, stats, geom, policy)?,
    )?;
    let right_table = segment_table(
        n,
        beta,
        right,
        stats,
        geom,
        levels_for(n, beta, right, stats, geom, policy)?,
    )?;
    Ok(combine(&left_table, &right_table))
}

fn combine(left: &[LogDeriv], right: &[LogDeriv]) -> Vec<LogDeriv> {
    let n = left.len() - 1;
    (0..=n)
        .map(|m| {
            let r = right[n - m];
            // the right segment shrinks as the wall moves right
            left[m].mul(LogDeriv {
                ln: r.ln,
                dln: -r.dln,
            })
        })
        .collect()
}

pub fn split_partition(
    n: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
) -> Result<SplitPartition> {
    if n < 1 {
        return Err(Error::Domain("particle count must be >= 1".into()));
    }
    let logs = split_log_derivatives(n, beta, y, stats, geom, policy)?;
    let ln_z: Vec<f64> = logs.iter().map(|l| l.ln).collect();
    Ok(SplitPartition::from_logs(y, &ln_z))
}

/// As [`split_partition`] with the same explicit level count on both sides.
pub fn split_partition_truncated(
    n: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    levels: usize,
) -> Result<SplitPartition> {
    check_beta(beta)?;
    check_wall(y, geom)?;
    let left = segment_table(n, beta, y, stats, geom, levels)?;
    let right = segment_table(n, beta, geom.total_length - y, stats, geom, levels)?;
    let ln_z: Vec<f64> = combine(&left, &right).iter().map(|l| l.ln).collect();
    Ok(SplitPartition::from_logs(y, &ln_z))
}

/// `d ln f_m / dy = d ln Z_m / dy - d ln Z / dy`, propagated analytically
/// through the level build-up.
pub fn log_fraction_derivative(
    n: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    policy: &TruncationPolicy,
    m: usize,
) -> Result<f64> {
    if m > n {
        return Err(Error::Domain(format!("outcome m = {m} exceeds N = {n}")));
    }
    let logs = split_log_derivatives(n, beta, y, stats, geom, policy)?;
    let total = logs.iter().fold(LogDeriv::ZERO, |acc, l| acc.add(*l));
    Ok(logs[m].dln - total.dln)
}
