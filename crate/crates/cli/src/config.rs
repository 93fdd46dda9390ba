//! Run configuration: command-line flags layered over an optional
//! `key = value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use szilard::engine::{OneSidedStop, ProtocolSelector};
use szilard::{EngineModel, Statistics, Tolerances};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
}

impl Grid {
    /// Parses `A:B:STEPS` (linear, endpoints included) or `log:A:B:STEPS`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Config(format!(
                "bad grid '{spec}', expected A:B:STEPS or log:A:B:STEPS"
            ))
        };
        let (log, body) = match spec.trim().strip_prefix("log:") {
            Some(rest) => (true, rest),
            None => (false, spec.trim()),
        };
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if steps == 0 || !a.is_finite() || !b.is_finite() {
            return Err(bad());
        }
        if steps == 1 {
            return Ok(Self { points: vec![a] });
        }
        if log && !(a > 0.0 && b > 0.0) {
            return Err(CliError::Config(format!(
                "log grid '{spec}' needs positive endpoints"
            )));
        }
        let points = (0..steps)
            .map(|i| {
                let s = i as f64 / (steps - 1) as f64;
                if i == steps - 1 {
                    b
                } else if log {
                    (a.ln() + s * (b.ln() - a.ln())).exp()
                } else {
                    a + s * (b - a)
                }
            })
            .collect();
        Ok(Self { points })
    }

    fn check_inside(&self, what: &str, lo: f64, hi: Option<f64>) -> Result<(), CliError> {
        if self.points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config(format!(
                "{what} grid must be strictly increasing"
            )));
        }
        for &p in &self.points {
            if !(p > lo && hi.map_or(true, |h| p < h)) {
                return Err(CliError::Config(format!(
                    "{what} grid point {p} outside its domain"
                )));
            }
        }
        Ok(())
    }
}

/// Raw settings before merging; every field is optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub stats: Option<String>,
    pub n: Option<String>,
    pub t: Option<String>,
    pub t_grid: Option<String>,
    pub l: Option<String>,
    pub l_grid: Option<String>,
    pub protocol: Option<String>,
    pub format: Option<String>,
    pub out: Option<String>,
    pub workers: Option<String>,
    pub m: Option<String>,
    pub x_grid: Option<String>,
    pub one_sided: Option<String>,
    pub eps: Option<String>,
    pub scan_points: Option<String>,
    pub root_tol: Option<String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected key = value", lineno + 1))
            })?;
            map.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        let mut s = Settings::default();
        for (k, v) in map {
            let slot = match k.as_str() {
                "stats" => &mut s.stats,
                "n" => &mut s.n,
                "t" => &mut s.t,
                "t-grid" => &mut s.t_grid,
                "l" => &mut s.l,
                "l-grid" => &mut s.l_grid,
                "protocol" => &mut s.protocol,
                "format" => &mut s.format,
                "out" => &mut s.out,
                "workers" => &mut s.workers,
                "m" => &mut s.m,
                "x-grid" => &mut s.x_grid,
                "one-sided" => &mut s.one_sided,
                "eps" => &mut s.eps,
                "scan-points" => &mut s.scan_points,
                "root-tol" => &mut s.root_tol,
                other => return Err(CliError::Config(format!("unknown config key '{other}'"))),
            };
            *slot = Some(v);
        }
        Ok(s)
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            stats,
            n,
            t,
            t_grid,
            l,
            l_grid,
            protocol,
            format,
            out,
            workers,
            m,
            x_grid,
            one_sided,
            eps,
            scan_points,
            root_tol
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Single(f64),
    Grid(Grid),
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Axis::Single(v) => vec![*v],
            Axis::Grid(g) => g.points.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: EngineModel,
    pub temperature: Axis,
    pub insertion: Axis,
    pub protocol: ProtocolSelector,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub outcome: usize,
    pub x_grid: Grid,
    pub one_sided: OneSidedStop,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value '{v}' for {key}")))
}

impl RunConfig {
    pub fn resolve(s: Settings) -> Result<Self, CliError> {
        let stats: Statistics = s
            .stats
            .as_deref()
            .unwrap_or("boson")
            .parse()
            .map_err(|e: szilard::Error| CliError::Config(e.to_string()))?;
        let n: usize = s.n.as_deref().map_or(Ok(3), |v| parse_num("n", v))?;
        let temperature = match (&s.t, &s.t_grid) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either t or t-grid, not both".into()))
            }
            (_, Some(g)) => {
                let g = Grid::parse(g)?;
                g.check_inside("temperature", 0.0, None)?;
                Axis::Grid(g)
            }
            (Some(v), None) => Axis::Single(parse_num("t", v)?),
            (None, None) => Axis::Single(1.0),
        };
        let insertion = match (&s.l, &s.l_grid) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either l or l-grid, not both".into()))
            }
            (_, Some(g)) => {
                let g = Grid::parse(g)?;
                g.check_inside("insertion", 0.0, Some(1.0))?;
                Axis::Grid(g)
            }
            (Some(v), None) => Axis::Single(parse_num("l", v)?),
            (None, None) => Axis::Single(0.5),
        };
        if let Axis::Single(t) = temperature {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!(
                    "temperature {t} must be positive"
                )));
            }
        }
        if let Axis::Single(l) = insertion {
            if !(l > 0.0 && l < 1.0) {
                return Err(CliError::Config(format!(
                    "insertion point {l} must lie in (0, 1)"
                )));
            }
        }
        let protocol: ProtocolSelector = s
            .protocol
            .as_deref()
            .unwrap_or("both")
            .parse()
            .map_err(|e: szilard::Error| CliError::Config(e.to_string()))?;
        let format = match s.format.as_deref().unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(CliError::Config(format!("unknown format '{other}'"))),
        };
        let workers: usize = s
            .workers
            .as_deref()
            .map_or(Ok(1), |v| parse_num("workers", v))?;
        let one_sided = match s.one_sided.as_deref().unwrap_or("stay") {
            "stay" => OneSidedStop::WallStays,
            "edge" => OneSidedStop::BoxEdge,
            other => {
                return Err(CliError::Config(format!(
                    "unknown one-sided rule '{other}' (stay|edge)"
                )))
            }
        };
        let outcome: usize = s.m.as_deref().map_or(Ok(1), |v| parse_num("m", v))?;
        let x_grid = Grid::parse(s.x_grid.as_deref().unwrap_or("0.01:0.99:99"))?;
        x_grid.check_inside("x", 0.0, Some(1.0))?;

        let mut tolerances = Tolerances::default();
        if let Some(v) = &s.eps {
            tolerances.truncation.eps = parse_num("eps", v)?;
        }
        if let Some(v) = &s.scan_points {
            tolerances.scan_points = parse_num("scan-points", v)?;
        }
        if let Some(v) = &s.root_tol {
            tolerances.root_tolerance = parse_num("root-tol", v)?;
        }
        let first_t = temperature.points()[0];
        let mut model =
            EngineModel::new(n, stats, first_t).map_err(|e| CliError::Config(e.to_string()))?;
        model.tolerances = tolerances;
        model
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if outcome > n {
            return Err(CliError::Config(format!(
                "outcome m = {outcome} exceeds N = {n}"
            )));
        }
        Ok(Self {
            model,
            temperature,
            insertion,
            protocol,
            format,
            out: s.out.map(PathBuf::from),
            workers: workers.max(1),
            outcome,
            x_grid,
            one_sided,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_grids() {
        let g = Grid::parse("0.1:0.5:5").unwrap();
        assert_eq!(g.points.len(), 5);
        assert!((g.points[2] - 0.3).abs() < 1e-15);
        assert_eq!(g.points[4], 0.5);
        let g = Grid::parse("log:1:100:3").unwrap();
        assert!((g.points[1] - 10.0).abs() < 1e-12);
        assert_eq!(g.points[2], 100.0);
        assert!(Grid::parse("1:2").is_err());
        assert!(Grid::parse("log:0:2:4").is_err());
        assert!(Grid::parse("a:2:4").is_err());
    }

    #[test]
    fn config_file_and_override() {
        let file =
            Settings::parse("# fig\nstats = fermion\nn=2\nt_grid = 1:2:3  # comment\n").unwrap();
        assert_eq!(file.stats.as_deref(), Some("fermion"));
        assert_eq!(file.t_grid.as_deref(), Some("1:2:3"));
        let flags = Settings {
            n: Some("4".into()),
            ..Default::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.n.as_deref(), Some("4"));
        assert_eq!(merged.stats.as_deref(), Some("fermion"));
        assert!(Settings::parse("bogus = 1").is_err());
        assert!(Settings::parse("no equals sign").is_err());
    }

    #[test]
    fn resolve_rejects_bad_domains() {
        let bad = |s: Settings| RunConfig::resolve(s).is_err();
        assert!(bad(Settings {
            l: Some("1.0".into()),
            ..Default::default()
        }));
        assert!(bad(Settings {
            t: Some("-1".into()),
            ..Default::default()
        }));
        assert!(bad(Settings {
            l_grid: Some("0.5:0.1:3".into()),
            ..Default::default()
        }));
        assert!(bad(Settings {
            t: Some("1".into()),
            t_grid: Some("1:2:3".into()),
            ..Default::default()
        }));
        assert!(bad(Settings {
            stats: Some("anyon".into()),
            ..Default::default()
        }));
        assert!(bad(Settings {
            n: Some("0".into()),
            ..Default::default()
        }));
        let ok = RunConfig::resolve(Settings::default()).unwrap();
        assert_eq!(ok.model.particle_count, 3);
        assert_eq!(ok.insertion, Axis::Single(0.5));
    }
}
