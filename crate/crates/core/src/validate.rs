//! Fast invariant suite behind the `validate` subcommand.

use std::fmt;

use crate::engine::{l_extremum_residual_with, protocol_with_points, OneSidedStop, Protocol};
use crate::error::Result;
use crate::forces::{classical_average_force, force_sample, forward_forces, stopping_points};
use crate::model::EngineModel;
use crate::oracle::enumerate_partition;
use crate::partition::{
    log_fraction_derivative, split_partition, split_partition_truncated, Statistics,
};
use crate::spectrum::BoxGeometry;

const QUANTUM: [Statistics; 3] = [
    Statistics::Boson,
    Statistics::Fermion,
    Statistics::Distinguishable,
];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation seen, or the error that stopped the check.
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, tol: f64, body: impl FnOnce() -> Result<f64>) -> Check {
    match body() {
        Ok(worst) => Check {
            name,
            passed: worst <= tol,
            detail: format!("worst = {worst:.3e} (tol {tol:.0e})"),
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn run_all() -> Vec<Check> {
    let geom = BoxGeometry::default();
    let ys: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
    let mut out = Vec::new();

    out.push(check("split-symmetry", 1e-12, || {
        let mut worst: f64 = 0.0;
        for s in QUANTUM {
            for &t in &[0.2, 1.0, 5.0, 20.0] {
                let md = EngineModel::new(3, s, t)?;
                for &y in &ys {
                    let a = split_partition(3, md.beta(), y, s, &geom, &md.tolerances.truncation)?;
                    let b = split_partition(
                        3,
                        md.beta(),
                        1.0 - y,
                        s,
                        &geom,
                        &md.tolerances.truncation,
                    )?;
                    for m in 0..=3 {
                        worst = worst.max(rel(
                            a.per_outcome[m].log_magnitude,
                            b.per_outcome[3 - m].log_magnitude,
                        ));
                    }
                }
            }
        }
        Ok(worst)
    }));

    out.push(check("normalisation", 1e-12, || {
        let mut worst: f64 = 0.0;
        for s in QUANTUM {
            for &t in &[0.2, 1.0, 20.0] {
                let md = EngineModel::new(4, s, t)?;
                for &y in &ys {
                    let f = md.log_fractions(y)?;
                    worst = worst.max((f.iter().map(|v| v.exp()).sum::<f64>() - 1.0).abs());
                }
            }
        }
        Ok(worst)
    }));

    out.push(check("oracle-equivalence", 1e-10, || {
        let mut worst: f64 = 0.0;
        let levels = 10;
        for s in QUANTUM {
            for &t in &[0.5, 1.0, 5.0] {
                for n in 1..=3 {
                    for &y in &[0.3, 0.5, 0.7] {
                        let sp = split_partition_truncated(n, 1.0 / t, y, s, &geom, levels)?;
                        for m in 0..=n {
                            let o = enumerate_partition(n, m, 1.0 / t, y, s, levels, &geom)?;
                            let d = (sp.per_outcome[m].log_magnitude - o.log_magnitude).abs();
                            worst = worst.max(d);
                        }
                    }
                }
            }
        }
        Ok(worst)
    }));

    out.push(check("force-identity", 1e-10, || {
        let mut worst: f64 = 0.0;
        for s in QUANTUM {
            for &t in &[0.5, 2.0] {
                let md = EngineModel::new(3, s, t)?;
                for &x in &[0.25, 0.5, 0.65] {
                    for m in 0..=3 {
                        let smp = force_sample(&md, m, x)?;
                        let d = log_fraction_derivative(
                            3,
                            md.beta(),
                            x,
                            s,
                            &geom,
                            &md.tolerances.truncation,
                            m,
                        )?;
                        let scale =
                            md.beta() * (smp.forward_force.abs() + smp.backward_force.abs());
                        worst = worst.max((md.beta() * smp.residual - d).abs() / scale.max(1.0));
                    }
                }
            }
        }
        Ok(worst)
    }));

    out.push(check("force-mirror", 1e-10, || {
        let mut worst: f64 = 0.0;
        for s in QUANTUM {
            let md = EngineModel::new(3, s, 1.0)?;
            for &x in &[0.2, 0.35, 0.45] {
                let a = forward_forces(&md, x)?;
                let b = forward_forces(&md, 1.0 - x)?;
                for m in 0..=3 {
                    worst = worst.max(rel(a[m], -b[3 - m]));
                }
            }
        }
        Ok(worst)
    }));

    out.push(check("classical-average-force", 0.0, || {
        let mut worst: f64 = 0.0;
        for n in 1..=6 {
            for &y in &ys {
                worst = worst.max(classical_average_force(n, y, 1.0).abs());
            }
        }
        Ok(worst)
    }));

    out.push(check("optimal-work-positivity", 1e-12, || {
        let mut worst: f64 = 0.0;
        for s in QUANTUM {
            for &t in &[0.5, 2.0] {
                let md = EngineModel::new(3, s, t)?;
                let pts = stopping_points(&md)?;
                for &l in &[0.3, 0.5, 0.7] {
                    let opt = protocol_with_points(
                        &md,
                        l,
                        &pts,
                        Protocol::Optimal,
                        OneSidedStop::BoxEdge,
                    )?;
                    let bal = protocol_with_points(
                        &md,
                        l,
                        &pts,
                        Protocol::Balance,
                        OneSidedStop::WallStays,
                    )?;
                    worst = worst.max(-opt.total_work_kbt);
                    worst = worst.max(bal.total_work_kbt - opt.total_work_kbt);
                }
            }
        }
        Ok(worst)
    }));

    out.push(check("midpoint-stationarity", 1e-10, || {
        let mut worst: f64 = 0.0;
        for s in QUANTUM {
            let md = EngineModel::new(3, s, 1.0)?;
            let pts = stopping_points(&md)?;
            worst = worst.max(l_extremum_residual_with(&md, 0.5, &pts)?.abs());
        }
        Ok(worst)
    }));

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_passes_and_is_deterministic() {
        let a = super::run_all();
        for c in &a {
            assert!(c.passed, "{c}");
        }
        let b = super::run_all();
        let ra: Vec<String> = a.iter().map(|c| c.to_string()).collect();
        let rb: Vec<String> = b.iter().map(|c| c.to_string()).collect();
        assert_eq!(ra, rb);
    }
}
