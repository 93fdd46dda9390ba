//! Total work, stopping protocols and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forces::{forward_forces, stopping_points, BracketRecord, RootKind, StoppingPoints};
use crate::model::EngineModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Stop where the forward force vanishes.
    Balance,
    /// Stop where the forward force equals the averaged backward force.
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolSelector {
    Balance,
    Optimal,
    Both,
}

impl ProtocolSelector {
    pub fn includes(&self, p: Protocol) -> bool {
        matches!(
            (self, p),
            (ProtocolSelector::Both, _)
                | (ProtocolSelector::Balance, Protocol::Balance)
                | (ProtocolSelector::Optimal, Protocol::Optimal)
        )
    }
}

impl std::str::FromStr for ProtocolSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "balance" => Ok(Self::Balance),
            "optimal" => Ok(Self::Optimal),
            "both" => Ok(Self::Both),
            other => Err(Error::Domain(format!("unknown protocol '{other}'"))),
        }
    }
}

/// Where the wall goes under the force-balance protocol when every
/// particle ended up on one side, so `F_0` or `F_N` never vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OneSidedStop {
    /// The wall is removed where it was inserted; those outcomes do no work.
    #[default]
    WallStays,
    /// The gas pushes the wall to the box edge (`x_0 = 0`, `x_N = L`).
    BoxEdge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Work {
    /// `W / k_B T`.
    pub kbt: f64,
    /// `W / E0`.
    pub e0: f64,
    /// `W_m = -ln[f_m(l) / f_m(x_m)]` per outcome.
    pub per_outcome_log_work: Vec<f64>,
    /// `f_m(l)`.
    pub fractions: Vec<f64>,
}

/// `W = -k_B T sum_m f_m(l) ln[f_m(l) / f_m(x_m)]` for arbitrary stopping
/// points `x_0..=x_N` in `[0, L]`.
pub fn total_work(model: &EngineModel, l: f64, stopping: &[f64]) -> Result<Work> {
    let n = model.particle_count;
    let big_l = model.length();
    if !(l > 0.0 && l < big_l) {
        return Err(Error::Domain(format!(
            "insertion point {l} must lie strictly inside (0, {big_l})"
        )));
    }
    if stopping.len() != n + 1 {
        return Err(Error::Domain(format!(
            "expected {} stopping points, got {}",
            n + 1,
            stopping.len()
        )));
    }
    let at_insertion = model.log_fractions(l)?;
    let mut per_outcome = Vec::with_capacity(n + 1);
    let mut w = 0.0;
    for (m, &x) in stopping.iter().enumerate() {
        let at_stop = if x == l {
            at_insertion[m]
        } else {
            model.log_fractions(x)?[m]
        };
        let wm = at_stop - at_insertion[m];
        if wm == f64::NEG_INFINITY {
            return Err(Error::Domain(format!(
                "outcome m = {m} cannot stop at x = {x}: its probability vanishes there"
            )));
        }
        w += at_insertion[m].exp() * wm;
        per_outcome.push(wm);
    }
    Ok(Work {
        kbt: w,
        e0: w * model.temperature,
        per_outcome_log_work: per_outcome,
        fractions: at_insertion.iter().map(|v| v.exp()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSolution {
    pub protocol: Protocol,
    pub insertion_point: f64,
    /// `x_m` for `m = 0..=N`.
    pub stopping_points: Vec<f64>,
    pub per_outcome_log_work: Vec<f64>,
    pub fractions_at_insertion: Vec<f64>,
    pub total_work_kbt: f64,
    pub total_work_e0: f64,
    pub diagnostics: Vec<BracketRecord>,
}

/// Tolerance on the positivity of the optimal work, in units of `k_B T`.
pub const POSITIVITY_SLACK: f64 = 1e-12;

/// Builds a protocol solution from precomputed stopping points, which do
/// not depend on the insertion point.
pub fn protocol_with_points(
    model: &EngineModel,
    l: f64,
    points: &StoppingPoints,
    protocol: Protocol,
    one_sided: OneSidedStop,
) -> Result<ProtocolSolution> {
    let n = model.particle_count;
    let (mut stops, kind) = match protocol {
        Protocol::Balance => (points.per_outcome_balance.clone(), RootKind::Balance),
        Protocol::Optimal => (points.per_outcome_optimal.clone(), RootKind::Optimal),
    };
    if protocol == Protocol::Balance && one_sided == OneSidedStop::WallStays {
        stops[0] = l;
        stops[n] = l;
    }
    let work = total_work(model, l, &stops)?;
    if protocol == Protocol::Optimal && work.kbt < -POSITIVITY_SLACK {
        return Err(Error::NegativeOptimalWork { work: work.kbt });
    }
    Ok(ProtocolSolution {
        protocol,
        insertion_point: l,
        stopping_points: stops,
        per_outcome_log_work: work.per_outcome_log_work,
        fractions_at_insertion: work.fractions,
        total_work_kbt: work.kbt,
        total_work_e0: work.e0,
        diagnostics: points
            .bracket_diagnostics
            .iter()
            .filter(|r| r.kind == kind)
            .cloned()
            .collect(),
    })
}

/// Stops every outcome at its optimal point; the work is never negative.
pub fn optimal_protocol(model: &EngineModel, l: f64) -> Result<ProtocolSolution> {
    let points = stopping_points(model)?;
    protocol_with_points(model, l, &points, Protocol::Optimal, OneSidedStop::BoxEdge)
}

/// Stops every two-sided outcome at its force-balance point.
pub fn balance_protocol(
    model: &EngineModel,
    l: f64,
    one_sided: OneSidedStop,
) -> Result<ProtocolSolution> {
    let points = stopping_points(model)?;
    protocol_with_points(model, l, &points, Protocol::Balance, one_sided)
}

/// `<W_m F_m(l)>_m - <W_p>_p <F_q(l)>_q` with weights `f_m(l)` and
/// `W_m = W_m(l, x_m^op)`. Zero where `dW/dl` vanishes.
pub fn l_extremum_residual(model: &EngineModel, l: f64) -> Result<f64> {
    let points = stopping_points(model)?;
    l_extremum_residual_with(model, l, &points)
}

pub fn l_extremum_residual_with(
    model: &EngineModel,
    l: f64,
    points: &StoppingPoints,
) -> Result<f64> {
    let work = total_work(model, l, &points.per_outcome_optimal)?;
    let forces = forward_forces(model, l)?;
    let f = &work.fractions;
    let w = &work.per_outcome_log_work;
    let wf: f64 = (0..f.len()).map(|m| f[m] * w[m] * forces[m]).sum();
    let mean_w: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
    let mean_f: f64 = f.iter().zip(&forces).map(|(a, b)| a * b).sum();
    Ok(wf - mean_w * mean_f)
}

/// Maximises the optimal-protocol work over the insertion point: a uniform
/// scan of `grid` interior points, then golden-section refinement around
/// the best one. Returns `(l, W / k_B T)`.
pub fn optimal_insertion(model: &EngineModel, grid: usize) -> Result<(f64, f64)> {
    if grid < 3 {
        return Err(Error::Domain(
            "insertion grid needs at least 3 points".into(),
        ));
    }
    let points = stopping_points(model)?;
    let big_l = model.length();
    let work_at = |l: f64| total_work(model, l, &points.per_outcome_optimal).map(|w| w.kbt);
    let ls: Vec<f64> = (1..=grid)
        .map(|i| big_l * i as f64 / (grid + 1) as f64)
        .collect();
    let ws: Vec<f64> = ls.iter().map(|&l| work_at(l)).collect::<Result<_>>()?;
    let best = ws
        .iter()
        .enumerate()
        .fold(0, |b, (i, w)| if *w > ws[b] { i } else { b });
    let lo = if best == 0 {
        big_l / (grid + 1) as f64 * 0.5
    } else {
        ls[best - 1]
    };
    let hi = if best + 1 == grid {
        big_l - (big_l - ls[best]) * 0.5
    } else {
        ls[best + 1]
    };
    let (l, w) = golden_section_max(work_at, lo, hi, 1e-9 * big_l)?;
    if w >= ws[best] {
        Ok((l, w))
    } else {
        Ok((ls[best], ws[best]))
    }
}

pub(crate) fn golden_section_max<F>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub temperature: f64,
    pub insertion_point: f64,
    pub balance_points: Vec<f64>,
    pub optimal_points: Vec<f64>,
    pub balance: Option<ProtocolSolution>,
    pub optimal: Option<ProtocolSolution>,
    pub l_extremum_residual: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(temperature: f64, insertion_point: f64, err: &Error) -> Self {
        Self {
            temperature,
            insertion_point,
            balance_points: Vec::new(),
            optimal_points: Vec::new(),
            balance: None,
            optimal: None,
            l_extremum_residual: None,
            error: Some(err.to_string()),
        }
    }
}

fn row_with_points(
    model: &EngineModel,
    l: f64,
    points: &StoppingPoints,
    selector: ProtocolSelector,
    one_sided: OneSidedStop,
) -> SweepRow {
    let compute = || -> Result<SweepRow> {
        let balance = selector
            .includes(Protocol::Balance)
            .then(|| protocol_with_points(model, l, points, Protocol::Balance, one_sided))
            .transpose()?;
        let optimal = selector
            .includes(Protocol::Optimal)
            .then(|| {
                protocol_with_points(model, l, points, Protocol::Optimal, OneSidedStop::BoxEdge)
            })
            .transpose()?;
        let residual = l_extremum_residual_with(model, l, points)?;
        Ok(SweepRow {
            temperature: model.temperature,
            insertion_point: l,
            balance_points: points.per_outcome_balance.clone(),
            optimal_points: points.per_outcome_optimal.clone(),
            balance,
            optimal,
            l_extremum_residual: Some(residual),
            error: None,
        })
    };
    compute().unwrap_or_else(|e| SweepRow::failed(model.temperature, l, &e))
}

fn run_ordered<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

/// One row per temperature at a fixed insertion point. Failed rows carry
/// an error message instead of aborting the sweep; row order follows the grid.
pub fn sweep_temperature(
    template: &EngineModel,
    t_grid: &[f64],
    l: f64,
    selector: ProtocolSelector,
    one_sided: OneSidedStop,
    workers: usize,
) -> Vec<SweepRow> {
    run_ordered(t_grid, workers, |&t| {
        let solved = template
            .at_temperature(t)
            .and_then(|model| stopping_points(&model).map(|pts| (model, pts)));
        match solved {
            Ok((model, pts)) => row_with_points(&model, l, &pts, selector, one_sided),
            Err(e) => SweepRow::failed(t, l, &e),
        }
    })
}

/// One row per insertion point at fixed temperature. The stopping points
/// are solved once since they do not depend on `l`.
pub fn sweep_wall(
    model: &EngineModel,
    l_grid: &[f64],
    selector: ProtocolSelector,
    one_sided: OneSidedStop,
    workers: usize,
) -> Vec<SweepRow> {
    match stopping_points(model) {
        Ok(pts) => run_ordered(l_grid, workers, |&l| {
            row_with_points(model, l, &pts, selector, one_sided)
        }),
        Err(e) => l_grid
            .iter()
            .map(|&l| SweepRow::failed(model.temperature, l, &e))
            .collect(),
    }
}
