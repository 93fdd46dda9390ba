//! Forces on the wall and the stopping-point solvers.
//!
//! The forward force `F_m` is the thermal average of `-d(energy)/dx` with
//! canonical occupation numbers of every level on each side of the wall.
//! This path never differentiates a partition function, so it can be
//! checked against [`crate::partition::log_fraction_derivative`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logscale::{ln_add, log_sum_exp};
use crate::model::EngineModel;
use crate::partition::{levels_for, Statistics};
use crate::spectrum::{level_energy, BoxGeometry};

/// Outward pressure `-sum_j <n_j>_k dE_j/ds` of a gas of `k` particles in a
/// segment of length `s`, for every `k = 0..=n`.
fn segment_pressures(
    n: usize,
    beta: f64,
    s: f64,
    stats: Statistics,
    geom: &BoxGeometry,
    levels: usize,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n + 1];
    if n == 0 {
        return Ok(out);
    }
    let energies: Vec<f64> = (1..=levels)
        .map(|j| level_energy(j, s, geom))
        .collect::<Result<_>>()?;
    let ln_x: Vec<f64> = energies.iter().map(|e| -beta * e).collect();
    // -dE_j/ds = 2 E_j / s
    let push: Vec<f64> = energies.iter().map(|e| 2.0 * e / s).collect();

    if stats == Statistics::Distinguishable {
        let ln_z1 = log_sum_exp(&ln_x);
        let mean: f64 = ln_x
            .iter()
            .zip(&push)
            .map(|(a, p)| (a - ln_z1).exp() * p)
            .sum();
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = k as f64 * mean;
        }
        return Ok(out);
    }
    let bosons = match stats {
        Statistics::Boson => true,
        Statistics::Fermion => false,
        _ => return Err(Error::ClassicalHasNoSpectrum("quantum force")),
    };

    let width = n + 1;
    let neg = f64::NEG_INFINITY;
    let step = |row: &mut [f64], a: f64| {
        if bosons {
            for k in 1..width {
                row[k] = ln_add(row[k], row[k - 1] + a);
            }
        } else {
            for k in (1..width).rev() {
                row[k] = ln_add(row[k], row[k - 1] + a);
            }
        }
    };
    // prefix[j]: levels 1..=j, suffix[j]: levels j+1..=levels (0-based j)
    let mut prefix = vec![neg; (levels + 1) * width];
    prefix[0] = 0.0;
    for j in 0..levels {
        let (done, rest) = prefix.split_at_mut((j + 1) * width);
        let row = &mut rest[..width];
        row.copy_from_slice(&done[j * width..]);
        step(row, ln_x[j]);
    }
    let mut suffix = vec![neg; (levels + 1) * width];
    suffix[levels * width] = 0.0;
    for j in (0..levels).rev() {
        let (head, tail) = suffix.split_at_mut((j + 1) * width);
        let row = &mut head[j * width..];
        row.copy_from_slice(&tail[..width]);
        step(row, ln_x[j]);
    }
    let ln_z = &prefix[levels * width..];

    let mut excluded = vec![neg; width];
    let mut acc = vec![0.0; width];
    for j in 0..levels {
        let before = &prefix[j * width..(j + 1) * width];
        let after = &suffix[(j + 1) * width..(j + 2) * width];
        for (k, slot) in excluded.iter_mut().enumerate() {
            *slot = (0..=k).fold(neg, |s, a| ln_add(s, before[a] + after[k - a]));
        }
        for k in 1..width {
            let occupation = if bosons {
                (1..=k)
                    .map(|c| c as f64 * (c as f64 * ln_x[j] + excluded[k - c] - ln_z[k]).exp())
                    .sum::<f64>()
            } else {
                (ln_x[j] + excluded[k - 1] - ln_z[k]).exp()
            };
            acc[k] += occupation * push[j];
        }
    }
    out.copy_from_slice(&acc);
    Ok(out)
}

fn check_inside(model: &EngineModel, x: f64) -> Result<()> {
    let l = model.length();
    if x > 0.0 && x < l {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "wall position {x} must lie strictly inside (0, {l})"
        )))
    }
}

/// `F_m(x)` for every outcome `m = 0..=N`, in units of `E0 / L`.
pub fn forward_forces(model: &EngineModel, x: f64) -> Result<Vec<f64>> {
    check_inside(model, x)?;
    let n = model.particle_count;
    let l = model.length();
    let right = l - x;
    let unit = model.geometry.energy_unit / l;
    match model.statistics {
        Statistics::ClassicalIdealGas => Ok((0..=n)
            .map(|m| model.kbt() * classical_outcome_force(n, m, x, l) / unit)
            .collect()),
        stats => {
            let beta = model.beta();
            let g = &model.geometry;
            let policy = &model.tolerances.truncation;
            let left_p = segment_pressures(
                n,
                beta,
                x,
                stats,
                g,
                levels_for(n, beta, x, stats, g, policy)?,
            )?;
            let right_p = segment_pressures(
                n,
                beta,
                right,
                stats,
                g,
                levels_for(n, beta, right, stats, g, policy)?,
            )?;
            Ok((0..=n)
                .map(|m| (left_p[m] - right_p[n - m]) / unit)
                .collect())
        }
    }
}

pub fn forward_force(model: &EngineModel, m: usize, x: f64) -> Result<f64> {
    check_outcome(model, m)?;
    Ok(forward_forces(model, x)?[m])
}

fn check_outcome(model: &EngineModel, m: usize) -> Result<()> {
    if m > model.particle_count {
        Err(Error::Domain(format!(
            "outcome m = {m} exceeds N = {}",
            model.particle_count
        )))
    } else {
        Ok(())
    }
}

/// Forward forces together with `<F_p> = sum_p f_p F_p` at one position.
fn forces_and_average(model: &EngineModel, x: f64) -> Result<(Vec<f64>, f64)> {
    let forward = forward_forces(model, x)?;
    if model.statistics == Statistics::ClassicalIdealGas {
        let avg = model.kbt() * classical_average_force(model.particle_count, x, model.length());
        return Ok((forward, avg * model.length() / model.geometry.energy_unit));
    }
    let ln_f = model.log_fractions(x)?;
    let avg = ln_f.iter().zip(&forward).map(|(lf, f)| lf.exp() * f).sum();
    Ok((forward, avg))
}

/// Time-backward force averaged over all outcomes at insertion point `x`.
pub fn backward_force(model: &EngineModel, x: f64) -> Result<f64> {
    Ok(forces_and_average(model, x)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub position: f64,
    pub forward_force: f64,
    pub backward_force: f64,
    /// `forward_force - backward_force`.
    pub residual: f64,
}

pub fn force_sample(model: &EngineModel, m: usize, x: f64) -> Result<ForceSample> {
    check_outcome(model, m)?;
    let (forward, backward) = forces_and_average(model, x)?;
    Ok(ForceSample {
        position: x,
        forward_force: forward[m],
        backward_force: backward,
        residual: forward[m] - backward,
    })
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// Binomial probability that `p` of `N` classical particles sit left of `y`.
pub fn classical_outcome_weight(n: usize, p: usize, y: f64, l: f64) -> f64 {
    if p > n {
        return 0.0;
    }
    let q = y / l;
    (ln_binomial(n, p) + p as f64 * q.ln() + (n - p) as f64 * (1.0 - q).ln()).exp()
}

/// Classical force for outcome `p` in units of `k_B T`.
pub fn classical_outcome_force(n: usize, p: usize, y: f64, l: f64) -> f64 {
    p as f64 / y - (n - p) as f64 / (l - y)
}

/// Binomially averaged classical force in units of `k_B T`; vanishes for
/// every `y`.
///
/// `P_N(p) p / y` and `P_N(p) (N - p) / (L - y)` both reduce to
/// `(N / L) P_{N-1}(.)`, so the two partial sums run over identical terms.
pub fn classical_average_force(n: usize, y: f64, l: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let pressure = n as f64 / l;
    let left: f64 = (1..=n)
        .map(|p| pressure * classical_outcome_weight(n - 1, p - 1, y, l))
        .sum();
    let right: f64 = (0..n)
        .map(|p| pressure * classical_outcome_weight(n - 1, p, y, l))
        .sum();
    left - right
}

/// Closed-form classical force-balance point `m L / N`.
pub fn classical_balance_point(n: usize, m: usize, l: f64) -> f64 {
    m as f64 * l / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootKind {
    Balance,
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketRecord {
    pub outcome: usize,
    pub kind: RootKind,
    /// Every sign change of the relevant direction found on the scan.
    pub brackets: Vec<(f64, f64)>,
    pub root: f64,
    pub bisection_steps: usize,
    /// The chosen point is a scan endpoint rather than an interior root.
    pub at_scan_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingPoints {
    /// `x_m^0` for `m = 0..=N`; the one-sided outcomes hold `0` and `L`.
    pub per_outcome_balance: Vec<f64>,
    /// `x_m^op` for `m = 0..=N`; `x_0 = 0` and `x_N = L`.
    pub per_outcome_optimal: Vec<f64>,
    pub bracket_diagnostics: Vec<BracketRecord>,
}

struct Scan {
    xs: Vec<f64>,
    forward: Vec<Vec<f64>>,
    average: Vec<f64>,
}

fn scan(model: &EngineModel) -> Result<Scan> {
    let l = model.length();
    let t = &model.tolerances;
    let lo = t.scan_margin * l;
    let hi = l - lo;
    let h = (hi - lo) / (t.scan_points - 1) as f64;
    let xs: Vec<f64> = (0..t.scan_points).map(|i| lo + i as f64 * h).collect();
    let mut forward = Vec::with_capacity(xs.len());
    let mut average = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (f, a) = forces_and_average(model, x)?;
        forward.push(f);
        average.push(a);
    }
    Ok(Scan {
        xs,
        forward,
        average,
    })
}

/// Indices `i` where `g` goes from positive at `xs[i]` to non-positive at `xs[i+1]`.
fn downward_crossings(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > 0.0 && w[1] <= 0.0)
        .map(|(i, _)| i)
        .collect()
}

fn any_sign_change(values: &[f64]) -> bool {
    values.windows(2).any(|w| (w[0] > 0.0) != (w[1] > 0.0))
}

fn grid_dump(xs: &[f64], values: &[f64]) -> String {
    let stride = (xs.len() / 32).max(1);
    xs.iter()
        .zip(values)
        .step_by(stride)
        .map(|(x, v)| format!("  x = {x:.6e}  residual = {v:.6e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn bisect<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut steps = 0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if f(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        steps += 1;
    }
    Ok((0.5 * (a + b), steps))
}

fn solve_balance_on(model: &EngineModel, sc: &Scan, m: usize) -> Result<(f64, BracketRecord)> {
    let values: Vec<f64> = sc.forward.iter().map(|f| f[m]).collect();
    let crossings = downward_crossings(&values);
    if crossings.is_empty() {
        return Err(Error::NoBracket {
            m,
            dump: grid_dump(&sc.xs, &values),
        });
    }
    let l = model.length();
    let tol = model.tolerances.root_tolerance * l;
    let classical = m as f64 * l / model.particle_count as f64;
    let mut best: Option<(f64, usize)> = None;
    for &i in &crossings {
        let root = bisect(|x| forward_force(model, m, x), sc.xs[i], sc.xs[i + 1], tol)?;
        if best.map_or(true, |(r, _)| {
            (root.0 - classical).abs() < (r - classical).abs()
        }) {
            best = Some(root);
        }
    }
    let (root, steps) = best.expect("at least one crossing");
    Ok((
        root,
        BracketRecord {
            outcome: m,
            kind: RootKind::Balance,
            brackets: crossings
                .iter()
                .map(|&i| (sc.xs[i], sc.xs[i + 1]))
                .collect(),
            root,
            bisection_steps: steps,
            at_scan_boundary: false,
        },
    ))
}

fn solve_optimal_on(model: &EngineModel, sc: &Scan, m: usize) -> Result<(f64, BracketRecord)> {
    let values: Vec<f64> = sc
        .forward
        .iter()
        .zip(&sc.average)
        .map(|(f, a)| f[m] - a)
        .collect();
    if !any_sign_change(&values) {
        return Err(Error::NoBracket {
            m,
            dump: grid_dump(&sc.xs, &values),
        });
    }
    // a + to - crossing of d ln f_m / dx is a local maximum of f_m
    let crossings = downward_crossings(&values);
    let tol = model.tolerances.root_tolerance * model.length();
    let residual = |x: f64| force_sample(model, m, x).map(|s| s.residual);
    let ln_f = |x: f64| model.log_fractions(x).map(|v| v[m]);

    let first = sc.xs[0];
    let last = *sc.xs.last().expect("nonempty scan");
    let mut best = (first, ln_f(first)?, 0usize, true);
    let end = ln_f(last)?;
    if end > best.1 {
        best = (last, end, 0, true);
    }
    for &i in &crossings {
        let (root, steps) = bisect(residual, sc.xs[i], sc.xs[i + 1], tol)?;
        let v = ln_f(root)?;
        if v > best.1 || (best.3 && v >= best.1) {
            best = (root, v, steps, false);
        }
    }
    Ok((
        best.0,
        BracketRecord {
            outcome: m,
            kind: RootKind::Optimal,
            brackets: crossings
                .iter()
                .map(|&i| (sc.xs[i], sc.xs[i + 1]))
                .collect(),
            root: best.0,
            bisection_steps: best.2,
            at_scan_boundary: best.3,
        },
    ))
}

fn check_interior(model: &EngineModel, m: usize) -> Result<()> {
    if m == 0 || m >= model.particle_count {
        Err(Error::Domain(format!(
            "outcome m = {m} is one-sided for N = {}; its stopping point is fixed at the box edge",
            model.particle_count
        )))
    } else {
        Ok(())
    }
}

/// Force-balance point `x_m^0` with `F_m(x_m^0) = 0`. Among several
/// stable crossings the one nearest the classical `m L / N` is returned.
pub fn solve_balance(model: &EngineModel, m: usize) -> Result<f64> {
    check_interior(model, m)?;
    let sc = scan(model)?;
    Ok(solve_balance_on(model, &sc, m)?.0)
}

/// Optimal removal point `x_m^op` where `F_m = <F_p>`: the global
/// maximiser of `f_m` among the located local maxima and the scan ends.
pub fn solve_optimal(model: &EngineModel, m: usize) -> Result<f64> {
    check_interior(model, m)?;
    let sc = scan(model)?;
    Ok(solve_optimal_on(model, &sc, m)?.0)
}

/// Both kinds of stopping point for every outcome from one shared scan.
pub fn stopping_points(model: &EngineModel) -> Result<StoppingPoints> {
    model.validate()?;
    let n = model.particle_count;
    let l = model.length();
    let mut balance = vec![0.0; n + 1];
    let mut optimal = vec![0.0; n + 1];
    balance[n] = l;
    optimal[n] = l;
    let mut diagnostics = Vec::new();
    if n >= 2 {
        let sc = scan(model)?;
        for m in 1..n {
            let (x0, rec0) = solve_balance_on(model, &sc, m)?;
            let (xop, rec_op) = solve_optimal_on(model, &sc, m)?;
            balance[m] = x0;
            optimal[m] = xop;
            diagnostics.push(rec0);
            diagnostics.push(rec_op);
        }
    }
    Ok(StoppingPoints {
        per_outcome_balance: balance,
        per_outcome_optimal: optimal,
        bracket_diagnostics: diagnostics,
    })
}
