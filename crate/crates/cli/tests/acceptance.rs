//! Acceptance suite. One line per criterion; exits non-zero if any fails.
//!
//! Run with `cargo test -p szilard-cli --test acceptance --release`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use szilard::engine::{protocol_with_points, total_work, OneSidedStop, Protocol};
use szilard::oracle::enumerate_partition;
use szilard::partition::split_partition_truncated;
use szilard::{
    backward_force, classical_average_force, classical_balance_point, force_sample, forward_forces,
    l_extremum_residual, log_fraction_derivative, split_partition, stopping_points, BoxGeometry,
    EngineModel, Statistics, StoppingPoints,
};

type Outcome = Result<String, String>;

const QUANTUM: [Statistics; 3] = [
    Statistics::Boson,
    Statistics::Fermion,
    Statistics::Distinguishable,
];

fn model(n: usize, s: Statistics, t: f64) -> Result<EngineModel, String> {
    EngineModel::new(n, s, t).map_err(|e| e.to_string())
}

fn points(md: &EngineModel) -> Result<StoppingPoints, String> {
    stopping_points(md).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Per-outcome `W_1 = ln f_1(x) - ln f_1(l)`.
fn w1(md: &EngineModel, l: f64, x: f64) -> Result<f64, String> {
    let a = md.log_fractions(x).map_err(|e| e.to_string())?[1];
    let b = md.log_fractions(l).map_err(|e| e.to_string())?[1];
    Ok(a - b)
}

fn c1_anchor_points() -> Outcome {
    let md = model(3, Statistics::Boson, 1.0)?;
    let p = points(&md)?;
    let (x0, xop) = (p.per_outcome_balance[1], p.per_outcome_optimal[1]);
    let (w0, wop) = (w1(&md, 0.5, x0)?, w1(&md, 0.5, xop)?);
    let msg = format!("x1_0={x0:.5} x1_op={xop:.5} W1(x1_0)={w0:.4} W1(x1_op)={wop:.4}");
    ensure(
        (x0 - 0.443).abs() <= 0.005 && (xop - 0.490).abs() <= 0.005 && w0 < 0.0 && wop > 0.0,
        msg,
    )
}

fn c2_warming_trend() -> Outcome {
    let gap = |t: f64| -> Result<(f64, f64), String> {
        let md = model(3, Statistics::Boson, t)?;
        let p = points(&md)?;
        let x0 = p.per_outcome_balance[1];
        Ok(((p.per_outcome_optimal[1] - x0).abs(), w1(&md, 0.5, x0)?))
    };
    let (g1, _) = gap(1.0)?;
    let (g5, w5) = gap(5.0)?;
    ensure(
        g5 < g1 && w5 > 0.0,
        format!("gap(t=1)={g1:.5} gap(t=5)={g5:.5} W1(x1_0, t=5)={w5:.4}"),
    )
}

fn c3_classical_limit() -> Outcome {
    let ts = [5.0, 20.0, 80.0, 200.0];
    let mut ok = true;
    let mut msg = Vec::new();
    for s in [Statistics::Boson, Statistics::Fermion] {
        let mut d0 = Vec::new();
        let mut dop = Vec::new();
        for &t in &ts {
            let p = points(&model(3, s, t)?)?;
            d0.push((p.per_outcome_balance[1] - 1.0 / 3.0).abs());
            dop.push((p.per_outcome_optimal[1] - 1.0 / 3.0).abs());
        }
        let mono = |d: &[f64]| d.windows(2).all(|w| w[1] < w[0]);
        let good = d0[3] <= 0.01 && dop[3] <= 0.01 && mono(&d0) && mono(&dop);
        ok &= good;
        msg.push(format!(
            "{s}: |x1_0-1/3|={:.5} |x1_op-1/3|={:.5} at t=200, monotone={}",
            d0[3],
            dop[3],
            mono(&d0) && mono(&dop)
        ));
    }
    ensure(ok, msg.join("; "))
}

fn c4_balance_sign() -> Outcome {
    let ts: Vec<f64> = (0..100)
        .map(|i| (20f64.ln() * i as f64 / 99.0).exp())
        .collect();
    let mut ws = Vec::with_capacity(ts.len());
    for &t in &ts {
        let md = model(3, Statistics::Boson, t)?;
        let p = points(&md)?;
        let sol = protocol_with_points(&md, 0.5, &p, Protocol::Balance, OneSidedStop::WallStays)
            .map_err(|e| e.to_string())?;
        ws.push(sol.total_work_kbt);
    }
    let changes: Vec<usize> = (1..ws.len())
        .filter(|&i| (ws[i] > 0.0) != (ws[i - 1] > 0.0))
        .collect();
    let at = changes.first().map_or(f64::NAN, |&i| ts[i]);
    ensure(
        ws[0] < 0.0 && ws[99] > 0.0 && changes.len() == 1,
        format!(
            "W(t=1)={:.4} W(t=20)={:.4} sign changes={} (near t={at:.3})",
            ws[0],
            ws[99],
            changes.len()
        ),
    )
}

/// Interior local maxima of the optimal work on the 401-point l-grid.
fn optimal_work_maxima(t: f64) -> Result<Vec<f64>, String> {
    let md = model(2, Statistics::Fermion, t)?;
    let p = points(&md)?;
    let ls: Vec<f64> = (1..=401).map(|i| i as f64 / 402.0).collect();
    let ws: Vec<f64> = ls
        .iter()
        .map(|&l| total_work(&md, l, &p.per_outcome_optimal).map(|w| w.kbt))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    Ok((1..ls.len() - 1)
        .filter(|&i| ws[i] > ws[i - 1] && ws[i] >= ws[i + 1])
        .map(|i| ls[i])
        .collect())
}

fn c5_insertion_splitting() -> Outcome {
    let (t_low, t_high) = (1.0, 50.0);
    let low = optimal_work_maxima(t_low)?;
    let high = optimal_work_maxima(t_high)?;
    let single_mid = |m: &[f64]| m.len() == 1 && (m[0] - 0.5).abs() < 2.0 / 402.0;
    let split = |m: &[f64]| {
        m.len() == 2 && (m[0] + m[1] - 1.0).abs() < 2.0 / 402.0 && (m[0] - 0.5).abs() > 0.01
    };
    if !(single_mid(&high) && split(&low)) {
        return Err(format!(
            "maxima at t={t_low}: {low:?}; at t={t_high}: {high:?}"
        ));
    }
    // bisection in ln t on the split/single classification
    let (mut a, mut b) = (t_low, t_high);
    while b / a > 1.0 + 1e-3 {
        let c = (a * b).sqrt();
        if split(&optimal_work_maxima(c)?) {
            a = c;
        } else {
            b = c;
        }
    }
    Ok(format!(
        "t={t_low}: maxima at l={:.4},{:.4}; t={t_high}: single maximum at l={:.4}; crossover t*={:.3}",
        low[0],
        low[1],
        high[0],
        (a * b).sqrt()
    ))
}

fn c6_positivity() -> Outcome {
    let mut worst_opt = f64::INFINITY;
    let mut worst_gap = f64::INFINITY;
    let mut cases = 0;
    for s in QUANTUM {
        for n in 1..=4 {
            for &t in &[0.5, 1.0, 2.0, 5.0, 20.0] {
                let md = model(n, s, t)?;
                let p = points(&md)?;
                for &l in &[0.3, 0.5, 0.7] {
                    let opt =
                        protocol_with_points(&md, l, &p, Protocol::Optimal, OneSidedStop::BoxEdge)
                            .map_err(|e| format!("{s} N={n} t={t} l={l}: {e}"))?;
                    let bal = protocol_with_points(
                        &md,
                        l,
                        &p,
                        Protocol::Balance,
                        OneSidedStop::WallStays,
                    )
                    .map_err(|e| format!("{s} N={n} t={t} l={l}: {e}"))?;
                    worst_opt = worst_opt.min(opt.total_work_kbt);
                    worst_gap = worst_gap.min(opt.total_work_kbt - bal.total_work_kbt);
                    cases += 1;
                }
            }
        }
    }
    ensure(
        worst_opt >= -1e-12 && worst_gap >= -1e-12,
        format!("{cases} cases: min W_opt={worst_opt:.3e} kT, min(W_opt-W_bal)={worst_gap:.3e} kT"),
    )
}

fn c7_oracle() -> Outcome {
    let geom = BoxGeometry::default();
    let n_max = 12;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for s in QUANTUM {
        for n in 1..=4 {
            for &t in &[0.5, 1.0, 5.0] {
                let beta = 1.0 / t;
                for i in 1..=9 {
                    let y = 0.1 * i as f64;
                    let prod = split_partition_truncated(n, beta, y, s, &geom, n_max)
                        .map_err(|e| e.to_string())?;
                    for m in 0..=n {
                        let lit = enumerate_partition(n, m, beta, y, s, n_max, &geom)
                            .map_err(|e| e.to_string())?;
                        // relative error of Z_m from the difference of logarithms
                        let d = (prod.per_outcome[m].log_magnitude - lit.log_magnitude).abs();
                        worst = worst.max(d.exp_m1());
                        count += 1;
                    }
                }
            }
        }
    }
    ensure(
        worst <= 1e-10,
        format!("{count} values of Z_m, worst relative deviation {worst:.3e}"),
    )
}

fn c8_force_identities() -> Outcome {
    let mut worst_id: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    let h = 1e-6;
    for s in QUANTUM {
        for n in 1..=4 {
            for &t in &[0.5, 1.0, 5.0, 20.0] {
                let md = model(n, s, t)?;
                let tr = &md.tolerances.truncation;
                for i in 1..=9 {
                    let x = 0.1 * i as f64 + 0.013;
                    let forces = forward_forces(&md, x).map_err(|e| e.to_string())?;
                    let zp = split_partition(n, md.beta(), x + h, s, &md.geometry, tr)
                        .map_err(|e| e.to_string())?;
                    let zm = split_partition(n, md.beta(), x - h, s, &md.geometry, tr)
                        .map_err(|e| e.to_string())?;
                    for m in 0..=n {
                        let sample = force_sample(&md, m, x).map_err(|e| e.to_string())?;
                        let route2 =
                            log_fraction_derivative(n, md.beta(), x, s, &md.geometry, tr, m)
                                .map_err(|e| e.to_string())?;
                        let scale =
                            md.beta() * (sample.forward_force.abs() + sample.backward_force.abs());
                        worst_id = worst_id
                            .max((md.beta() * sample.residual - route2).abs() / scale.max(1.0));
                        let fd = (zp.per_outcome[m].log_magnitude
                            - zm.per_outcome[m].log_magnitude)
                            / (2.0 * h)
                            / md.beta();
                        worst_fd = worst_fd.max((forces[m] - fd).abs() / forces[m].abs().max(1.0));
                    }
                }
            }
        }
    }
    ensure(
        worst_id <= 1e-10 && worst_fd <= 1e-5,
        format!("identity worst {worst_id:.3e} (tol 1e-10), finite difference worst {worst_fd:.3e} (tol 1e-5)"),
    )
}

fn c9_classical() -> Outcome {
    let mut nonzero = 0;
    for n in 1..=6 {
        for i in 1..1000 {
            if classical_average_force(n, i as f64 / 1000.0, 1.0) != 0.0 {
                nonzero += 1;
            }
        }
    }
    let xb = classical_balance_point(3, 1, 1.0);
    let mut worst = (0.0, String::new());
    for s in QUANTUM {
        let md = model(3, s, 200.0)?;
        for i in 1..=9 {
            let y = 0.1 * i as f64;
            let f = backward_force(&md, y).map_err(|e| e.to_string())?;
            if f.abs() > worst.0 {
                worst = (f.abs(), format!("{s} y={y:.1}"));
            }
        }
    }
    ensure(
        nonzero == 0 && xb == 1.0 / 3.0 && worst.0 < 1e-2,
        format!(
            "classical <F> nonzero at {nonzero} points, x_1^0(N=3)={xb:?}; quantum t=200 max |<F>|={:.3e} E0/L at {}",
            worst.0, worst.1
        ),
    )
}

fn c10_single_particle() -> Outcome {
    let md = model(1, Statistics::Boson, 200.0)?;
    let p = points(&md)?;
    let sol = protocol_with_points(&md, 0.5, &p, Protocol::Optimal, OneSidedStop::BoxEdge)
        .map_err(|e| e.to_string())?;
    let r = rel(sol.total_work_kbt, 2f64.ln());
    ensure(
        r < 0.01,
        format!("W/kT={:.12} vs ln 2, relative {r:.3e}", sol.total_work_kbt),
    )
}

fn c11_symmetry() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for s in QUANTUM {
        for n in 1..=4 {
            for &t in &[0.5, 1.0, 5.0, 20.0] {
                let md = model(n, s, t)?;
                let tr = &md.tolerances.truncation;
                let p = points(&md)?;
                for i in 1..=9 {
                    let y = 0.1 * i as f64 + 0.007;
                    let a = split_partition(n, md.beta(), y, s, &md.geometry, tr)
                        .map_err(|e| e.to_string())?;
                    let b = split_partition(n, md.beta(), 1.0 - y, s, &md.geometry, tr)
                        .map_err(|e| e.to_string())?;
                    let fa = forward_forces(&md, y).map_err(|e| e.to_string())?;
                    let fb = forward_forces(&md, 1.0 - y).map_err(|e| e.to_string())?;
                    for m in 0..=n {
                        worst = worst.max(rel(
                            a.per_outcome[m].log_magnitude,
                            b.per_outcome[n - m].log_magnitude,
                        ));
                        worst = worst.max(
                            (fb[n - m] + fa[m]).abs() / fa[m].abs().max(fb[n - m].abs()).max(1.0),
                        );
                    }
                    let wl = total_work(&md, y, &p.per_outcome_optimal)
                        .map_err(|e| e.to_string())?
                        .kbt;
                    let wr = total_work(&md, 1.0 - y, &p.per_outcome_optimal)
                        .map_err(|e| e.to_string())?
                        .kbt;
                    worst = worst.max((wl - wr).abs() / wl.abs().max(wr.abs()).max(1.0));
                }
                worst_res = worst_res.max(
                    l_extremum_residual(&md, 0.5)
                        .map_err(|e| e.to_string())?
                        .abs(),
                );
            }
        }
    }
    ensure(
        worst <= 1e-10 && worst_res < 1e-10,
        format!("worst mirror deviation {worst:.3e}, |l-residual at L/2| {worst_res:.3e}"),
    )
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |workers: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(format!("w{workers}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_szilard"))
            .args([
                "sweep",
                "--stats",
                "boson",
                "--n",
                "3",
                "--t-grid",
                "log:0.5:20:24",
                "--l-grid",
                "0.2:0.8:4",
            ])
            .args(["--protocol", "both", "--workers", workers, "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("szilard exited with {status}"));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let a = run("1")?;
    let b = run("8")?;
    ensure(
        a == b && !a.is_empty(),
        format!("{} bytes, identical={}", a.len(), a == b),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 12] = [
        (
            "1 anchor-points",
            c1_anchor_points,
            Some(Duration::from_secs(1)),
        ),
        (
            "2 warming-trend",
            c2_warming_trend,
            Some(Duration::from_secs(1)),
        ),
        (
            "3 classical-limit",
            c3_classical_limit,
            Some(Duration::from_secs(10)),
        ),
        (
            "4 balance-sign-change",
            c4_balance_sign,
            Some(Duration::from_secs(30)),
        ),
        (
            "5 insertion-splitting",
            c5_insertion_splitting,
            Some(Duration::from_secs(60)),
        ),
        ("6 positivity", c6_positivity, None),
        ("7 oracle-equivalence", c7_oracle, None),
        ("8 force-identities", c8_force_identities, None),
        ("9 classical-baseline", c9_classical, None),
        ("10 single-particle", c10_single_particle, None),
        ("11 symmetry", c11_symmetry, None),
        ("12 determinism", c12_determinism, None),
    ];
    let mut failed = 0;
    for (name, body, budget) in criteria {
        let start = Instant::now();
        let outcome = body();
        let elapsed = start.elapsed();
        let slow = budget.is_some_and(|b| elapsed > b);
        let (pass, detail) = match outcome {
            Ok(d) => (!slow, d),
            Err(d) => (false, d),
        };
        let budget = budget.map_or(String::new(), |b| {
            format!(" budget {:.0}s", b.as_secs_f64())
        });
        println!(
            "{} criterion {name}: {detail} [{:.3}s{budget}{}]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if slow { ", over budget" } else { "" }
        );
        if !pass {
            failed += 1;
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
