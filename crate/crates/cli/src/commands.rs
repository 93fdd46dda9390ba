use szilard::engine::{
    optimal_insertion, sweep_temperature, sweep_wall, Protocol, ProtocolSolution, SweepRow,
};
use szilard::{force_sample, stopping_points, validate};

use crate::config::{Axis, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

fn single(axis: &Axis, what: &str) -> Result<f64, CliError> {
    match axis {
        Axis::Single(v) => Ok(*v),
        Axis::Grid(_) => Err(CliError::Config(format!(
            "this command takes a single {what}, not a grid"
        ))),
    }
}

fn compute(e: szilard::Error) -> CliError {
    CliError::Compute(e.to_string())
}

/// `F_m(x)`, `<F_p(x)>` and `W_m(l, x)` over the x-grid, with the stopping
/// points of outcome `m` in the footer.
pub fn cmd_forces(cfg: &RunConfig) -> Result<Table, CliError> {
    let t = single(&cfg.temperature, "temperature")?;
    let l = single(&cfg.insertion, "insertion point")?;
    let model = cfg
        .model
        .at_temperature(t)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let m = cfg.outcome;
    let points = stopping_points(&model).map_err(compute)?;
    let ln_f_l = model.log_fractions(l).map_err(compute)?[m];
    let f_l = ln_f_l.exp();

    let mut table = Table {
        columns: ["x", "F_m", "F_avg", "residual", "W_m", "fW_m"]
            .map(String::from)
            .to_vec(),
        ..Default::default()
    };
    for &x in &cfg.x_grid.points {
        let s = force_sample(&model, m, x).map_err(compute)?;
        let w = model.log_fractions(x).map_err(compute)?[m] - ln_f_l;
        table.rows.push(vec![
            x.into(),
            s.forward_force.into(),
            s.backward_force.into(),
            s.residual.into(),
            w.into(),
            (f_l * w).into(),
        ]);
    }
    table.footer = vec![
        ("t".into(), t),
        ("l".into(), l),
        ("m".into(), m as f64),
        ("x_balance".into(), points.per_outcome_balance[m]),
        ("x_optimal".into(), points.per_outcome_optimal[m]),
    ];
    Ok(table)
}

fn sweep_columns(n: usize, cfg: &RunConfig) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "l".to_string()];
    cols.extend((0..=n).map(|m| format!("x_balance_{m}")));
    cols.extend((0..=n).map(|m| format!("x_optimal_{m}")));
    for p in [Protocol::Balance, Protocol::Optimal] {
        if cfg.protocol.includes(p) {
            let name = match p {
                Protocol::Balance => "balance",
                Protocol::Optimal => "optimal",
            };
            cols.push(format!("W_{name}_kT"));
            cols.push(format!("W_{name}_E0"));
            cols.extend((0..=n).map(|m| format!("W_{name}_{m}")));
        }
    }
    cols.push("l_residual".into());
    cols.push("error".into());
    cols
}

fn protocol_cells(sol: Option<&ProtocolSolution>, n: usize, out: &mut Vec<Cell>) {
    match sol {
        Some(s) => {
            out.push(s.total_work_kbt.into());
            out.push(s.total_work_e0.into());
            out.extend(s.per_outcome_log_work.iter().map(|&w| Cell::Num(w)));
        }
        None => out.extend(std::iter::repeat(Cell::Empty).take(n + 3)),
    }
}

fn sweep_cells(row: &SweepRow, n: usize, cfg: &RunConfig) -> Vec<Cell> {
    let mut cells = vec![Cell::Num(row.temperature), Cell::Num(row.insertion_point)];
    let balance_stops = row
        .balance
        .as_ref()
        .map(|b| &b.stopping_points)
        .unwrap_or(&row.balance_points);
    for m in 0..=n {
        cells.push(balance_stops.get(m).copied().into());
    }
    for m in 0..=n {
        cells.push(row.optimal_points.get(m).copied().into());
    }
    if cfg.protocol.includes(Protocol::Balance) {
        protocol_cells(row.balance.as_ref(), n, &mut cells);
    }
    if cfg.protocol.includes(Protocol::Optimal) {
        protocol_cells(row.optimal.as_ref(), n, &mut cells);
    }
    cells.push(row.l_extremum_residual.into());
    cells.push(row.error.clone().map_or(Cell::Empty, Cell::Text));
    cells
}

pub fn sweep_rows(cfg: &RunConfig) -> Vec<SweepRow> {
    let model = &cfg.model;
    let ls = cfg.insertion.points();
    match (&cfg.temperature, &cfg.insertion) {
        (Axis::Grid(g), Axis::Single(l)) => sweep_temperature(
            model,
            &g.points,
            *l,
            cfg.protocol,
            cfg.one_sided,
            cfg.workers,
        ),
        _ => cfg
            .temperature
            .points()
            .iter()
            .flat_map(|&t| match model.at_temperature(t) {
                Ok(m) => sweep_wall(&m, &ls, cfg.protocol, cfg.one_sided, cfg.workers),
                // an invalid temperature yields error rows from the driver itself
                Err(_) => ls
                    .iter()
                    .flat_map(|&l| {
                        sweep_temperature(model, &[t], l, cfg.protocol, cfg.one_sided, 1)
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Temperature sweep, wall sweep, or both (temperature outer).
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.model.particle_count;
    let rows = sweep_rows(cfg);
    if !rows.is_empty() && rows.iter().all(|r| r.error.is_some()) {
        let first = rows[0].error.clone().unwrap_or_default();
        return Err(CliError::Compute(format!(
            "every sweep row failed; first error: {first}"
        )));
    }
    Ok(Table {
        columns: sweep_columns(n, cfg),
        rows: rows.iter().map(|r| sweep_cells(r, n, cfg)).collect(),
        footer: Vec::new(),
    })
}

/// One model: both protocols at `l` plus the best insertion point.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<Table, CliError> {
    let t = single(&cfg.temperature, "temperature")?;
    let l = single(&cfg.insertion, "insertion point")?;
    let model = cfg
        .model
        .at_temperature(t)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let n = model.particle_count;
    let row = sweep_wall(&model, &[l], cfg.protocol, cfg.one_sided, 1).remove(0);
    if let Some(e) = &row.error {
        return Err(CliError::Compute(e.clone()));
    }
    let (l_best, w_best) = optimal_insertion(&model, 401).map_err(compute)?;
    let mut columns = sweep_columns(n, cfg);
    let mut cells = sweep_cells(&row, n, cfg);
    columns.extend(["l_best".to_string(), "W_best_kT".to_string()]);
    cells.extend([Cell::Num(l_best), Cell::Num(w_best)]);
    Ok(Table {
        columns,
        rows: vec![cells],
        footer: Vec::new(),
    })
}

/// Runs the invariant suite; returns the report and overall status.
pub fn cmd_validate() -> (String, bool) {
    let checks = validate::run_all();
    let ok = checks.iter().all(|c| c.passed);
    let mut report: String = checks.iter().map(|c| format!("{c}\n")).collect();
    report.push_str(if ok {
        "all invariants hold\n"
    } else {
        "invariant failures\n"
    });
    (report, ok)
}
