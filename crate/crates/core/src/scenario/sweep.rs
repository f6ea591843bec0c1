//! Parameter grids run in parallel, one independent simulation per point.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::stable_hash64;
use crate::topology::many_to_one_servers;

use super::config::{ScenarioConfig, TopologyKind};
use super::report::{write_run, ReportError, ReportOptions};
use super::result::{Fraction, Headline};
use super::sim::run;

/// Values to sweep. An empty axis keeps the base config's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grid {
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Many-to-one server counts (Fattree request-reply configs only).
    pub servers: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub theta: f64,
    pub lambda: f64,
    pub servers: Option<usize>,
}

impl Point {
    fn key(&self) -> (f64, f64, usize) {
        (self.theta, self.lambda, self.servers.unwrap_or(0))
    }

    fn cmp_coords(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    }

    /// Directory name of the point's sub-run.
    pub fn label(&self) -> String {
        let mut s = format!("theta={}_lambda={}", self.theta, self.lambda);
        if let Some(n) = self.servers {
            s.push_str(&format!("_servers={n}"));
        }
        s
    }
}

impl Grid {
    pub fn points(&self, base: &ScenarioConfig) -> Vec<Point> {
        let or_base = |v: &Vec<f64>, b: f64| if v.is_empty() { vec![b] } else { v.clone() };
        let servers: Vec<Option<usize>> = if self.servers.is_empty() {
            vec![None]
        } else {
            self.servers.iter().copied().map(Some).collect()
        };
        let mut pts = Vec::new();
        for &theta in &or_base(&self.theta, base.theta) {
            for &lambda in &or_base(&self.lambda, base.lambda) {
                for &servers in &servers {
                    pts.push(Point { theta, lambda, servers });
                }
            }
        }
        pts
    }
}

/// Stable 64-bit seed of a grid point. Adding points to a grid leaves the
/// seeds of existing points unchanged.
pub fn point_seed(base_seed: u64, p: &Point) -> u64 {
    let mut bytes = Vec::with_capacity(32);
    bytes.extend(base_seed.to_le_bytes());
    bytes.extend(p.theta.to_bits().to_le_bytes());
    bytes.extend(p.lambda.to_bits().to_le_bytes());
    bytes.extend(p.servers.map_or(u64::MAX, |n| n as u64).to_le_bytes());
    stable_hash64(&bytes)
}

/// The config of one grid point.
pub fn point_config(base: &ScenarioConfig, p: &Point) -> Result<ScenarioConfig, String> {
    let mut cfg = base.clone();
    cfg.theta = p.theta;
    cfg.lambda = p.lambda;
    cfg.seed = point_seed(base.seed, p);
    if let Some(n) = p.servers {
        if cfg.topology != TopologyKind::Fattree || cfg.sessions.is_empty() {
            return Err("server counts need a fattree config with a session".into());
        }
        cfg.sessions[0].servers =
            many_to_one_servers(n).ok_or_else(|| format!("no server set of size {n}"))?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: Point,
    pub seed: u64,
    pub headline: Headline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub point: Point,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    /// Sorted by grid coordinates.
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

/// Runs every point on the current rayon pool. With `out`, each point's
/// files go to `out/points/<label>/`.
pub fn sweep(base: &ScenarioConfig, grid: &Grid, out: Option<&Path>, opts: ReportOptions) -> SweepOutcome {
    let results: Vec<Result<SweepRow, SweepFailure>> = grid
        .points(base)
        .into_par_iter()
        .map(|point| {
            let fail = |error: String| SweepFailure { point, error };
            let cfg = point_config(base, &point).map_err(fail)?;
            let result = run(&cfg).map_err(|e| fail(e.to_string()))?;
            if let Some(dir) = out {
                write_run(&result, &dir.join("points").join(point.label()), opts)
                    .map_err(|e| fail(e.to_string()))?;
            }
            Ok(SweepRow {
                point,
                seed: cfg.seed,
                headline: result.headline(),
            })
        })
        .collect();
    let mut outcome = SweepOutcome::default();
    for r in results {
        match r {
            Ok(row) => outcome.rows.push(row),
            Err(f) => outcome.failures.push(f),
        }
    }
    outcome.rows.sort_by(|a, b| a.point.cmp_coords(&b.point));
    outcome.failures.sort_by(|a, b| a.point.cmp_coords(&b.point));
    outcome
}

fn frac(x: &Fraction) -> [String; 3] {
    [x.num.to_string(), x.den.to_string(), x.value.to_string()]
}

/// Writes `sweep.csv` and, when any point failed, `failures.csv`.
pub fn write_sweep(outcome: &SweepOutcome, dir: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join("sweep.csv");
    let csv_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| ReportError::Csv { path: p, source }
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    w.write_record([
        "theta",
        "lambda",
        "servers",
        "seed",
        "entropy",
        "util_variance",
        "time_ratio",
        "bounced_num",
        "bounced_den",
        "bounce_fraction",
        "drops_num",
        "drops_den",
        "drop_rate",
        "mean_total_hop",
        "mean_delay",
        "mean_fct",
    ])
    .map_err(csv_err(&path))?;
    for r in &outcome.rows {
        let h = &r.headline;
        let mut rec = vec![
            r.point.theta.to_string(),
            r.point.lambda.to_string(),
            r.point.servers.map(|n| n.to_string()).unwrap_or_default(),
            r.seed.to_string(),
            h.entropy.to_string(),
            h.util_variance.to_string(),
            h.time_ratio.to_string(),
        ];
        rec.extend(frac(&h.bounce_fraction));
        rec.extend(frac(&h.drop_rate));
        rec.push(h.mean_total_hop.to_string());
        rec.push(h.mean_delay.map(|x| x.to_string()).unwrap_or_default());
        rec.push(h.mean_fct.map(|x| x.to_string()).unwrap_or_default());
        w.write_record(&rec).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;

    if !outcome.failures.is_empty() {
        let path = dir.join("failures.csv");
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        w.write_record(["theta", "lambda", "servers", "error"])
            .map_err(csv_err(&path))?;
        for f in &outcome.failures {
            w.write_record([
                f.point.theta.to_string(),
                f.point.lambda.to_string(),
                f.point.servers.map(|n| n.to_string()).unwrap_or_default(),
                f.error.clone(),
            ])
            .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|source| ReportError::Io { path, source })?;
    }
    Ok(())
}
