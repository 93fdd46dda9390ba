//! Slow reference implementations for tests and `validate`.
//!
//! [`enumerate_partition`] sums Boltzmann factors over every occupancy
//! configuration of both sides of the wall and shares nothing with the
//! production partition code except the level energies.
//! [`grid_maximize_fraction`] finds `argmax f_m` by brute force instead of
//! solving the force identity.

use crate::error::{Error, Result};
use crate::logscale::LogScaledValue;
use crate::model::EngineModel;
use crate::partition::Statistics;
use crate::spectrum::{level_energy, BoxGeometry};

pub const MAX_PARTICLES: usize = 5;
pub const MAX_LEVELS: usize = 14;

/// A multiset of occupied levels (1-based, nondecreasing).
pub type OccupancyConfiguration = Vec<usize>;

/// All ways to put `k` particles into levels `1..=n_max`.
pub fn configurations(k: usize, n_max: usize, stats: Statistics) -> Vec<OccupancyConfiguration> {
    fn extend(
        current: &mut Vec<usize>,
        start: usize,
        left: usize,
        n_max: usize,
        exclusive: bool,
        out: &mut Vec<OccupancyConfiguration>,
    ) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        for level in start..=n_max {
            current.push(level);
            extend(
                current,
                if exclusive { level + 1 } else { level },
                left - 1,
                n_max,
                exclusive,
                out,
            );
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(
        &mut Vec::new(),
        1,
        k,
        n_max,
        stats == Statistics::Fermion,
        &mut out,
    );
    out
}

/// `ln` of the configuration weight: 1 for identical particles,
/// `1 / prod_n (occupation_n)!` for distinguishable ones.
fn ln_weight(config: &[usize], stats: Statistics) -> f64 {
    if stats != Statistics::Distinguishable {
        return 0.0;
    }
    let mut ln_w = 0.0;
    let mut run = 1;
    for i in 1..=config.len() {
        if i < config.len() && config[i] == config[i - 1] {
            run += 1;
        } else {
            ln_w -= (2..=run).map(|r| (r as f64).ln()).sum::<f64>();
            run = 1;
        }
    }
    ln_w
}

fn config_energy(config: &[usize], length: f64, geom: &BoxGeometry) -> Result<f64> {
    config.iter().map(|&n| level_energy(n, length, geom)).sum()
}

/// `Z_m(y) = sum_sigma w_sigma exp(-beta eps_sigma)` over every pair of
/// left (`m` particles) and right (`N - m` particles) configurations using
/// levels `1..=n_max` on each side.
pub fn enumerate_partition(
    n: usize,
    m: usize,
    beta: f64,
    y: f64,
    stats: Statistics,
    n_max: usize,
    geom: &BoxGeometry,
) -> Result<LogScaledValue> {
    if n > MAX_PARTICLES || n_max > MAX_LEVELS {
        return Err(Error::OracleCap(format!(
            "N = {n}, n_max = {n_max} (limits {MAX_PARTICLES}, {MAX_LEVELS})"
        )));
    }
    if m > n {
        return Err(Error::Domain(format!("outcome m = {m} exceeds N = {n}")));
    }
    if !stats.is_quantum() {
        return Err(Error::ClassicalHasNoSpectrum("configuration sum"));
    }
    if !(y > 0.0 && y < geom.total_length) {
        return Err(Error::Domain(format!("wall position {y} outside the box")));
    }
    let right = geom.total_length - y;
    let lefts: Vec<(f64, f64)> = configurations(m, n_max, stats)
        .iter()
        .map(|c| Ok((config_energy(c, y, geom)?, ln_weight(c, stats))))
        .collect::<Result<_>>()?;
    let rights: Vec<(f64, f64)> = configurations(n - m, n_max, stats)
        .iter()
        .map(|c| Ok((config_energy(c, right, geom)?, ln_weight(c, stats))))
        .collect::<Result<_>>()?;
    let mut exponents = Vec::with_capacity(lefts.len() * rights.len());
    for (el, wl) in &lefts {
        for (er, wr) in &rights {
            exponents.push(wl + wr - beta * (el + er));
        }
    }
    if exponents.is_empty() {
        return Ok(LogScaledValue::ZERO);
    }
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for e in &exponents {
        sum += (e - top).exp();
    }
    Ok(LogScaledValue::from_ln(top + sum.ln()))
}

/// Brute-force `argmax_x f_m(x)`: a uniform grid of `grid_size` interior
/// points followed by golden-section refinement around the best one.
pub fn grid_maximize_fraction(model: &EngineModel, m: usize, grid_size: usize) -> Result<f64> {
    if grid_size < 256 {
        return Err(Error::Domain(format!("grid size {grid_size} below 256")));
    }
    if m > model.particle_count {
        return Err(Error::Domain(format!(
            "outcome m = {m} exceeds N = {}",
            model.particle_count
        )));
    }
    let l = model.length();
    let value = |x: f64| -> Result<f64> { Ok(model.log_fractions(x)?[m]) };
    let h = l / (grid_size + 1) as f64;
    let mut best = (h, value(h)?);
    for i in 2..=grid_size {
        let x = i as f64 * h;
        let v = value(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    let mut a = (best.0 - h).max(0.5 * h);
    let mut b = (best.0 + h).min(l - 0.5 * h);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (value(c)?, value(d)?);
    while b - a > 1e-10 * l {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = value(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = value(d)?;
        }
    }
    Ok(0.5 * (a + b))
}
