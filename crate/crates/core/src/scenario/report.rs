//! Per-run output files.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::SimTime;
use crate::fabric::QueueKind;

use super::config::ConfigError;
use super::result::{Headline, RunResult};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    /// Bin width of util_timeseries.csv.
    pub util_bin: SimTime,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            util_bin: SimTime::from_micros(100),
        }
    }
}

/// Written last, next to the files it lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub mode: String,
    pub theta: f64,
    pub lambda: f64,
    pub end_ns: u64,
    pub events_dispatched: u64,
    pub rng_draws: u64,
    pub headline: Headline,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

struct Out<'a> {
    dir: &'a Path,
    files: BTreeMap<String, String>,
}

impl Out<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), ReportError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|source| ReportError::Io { path, source })?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn csv<F>(&mut self, name: &str, header: &[&str], fill: F) -> Result<(), ReportError>
    where
        F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
    {
        let err = |source| ReportError::Csv {
            path: self.path(name),
            source,
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(err)?;
        fill(&mut w).map_err(err)?;
        let bytes = w.into_inner().map_err(|e| err(e.into_error().into()))?;
        self.write_bytes(name, &bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn secs(t: SimTime) -> String {
    f(t.as_secs_f64())
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn by_node(m: &BTreeMap<String, u64>) -> String {
    m.iter()
        .map(|(k, v)| format!("{k}:{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Writes every per-run file into `dir` (created if missing) and returns the
/// manifest that was written alongside them.
pub fn write_run(run: &RunResult, dir: &Path, opts: ReportOptions) -> Result<Manifest, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out = Out {
        dir,
        files: BTreeMap::new(),
    };
    let headline = run.headline();
    let end = run.end;

    out.write_bytes("config.toml", run.config.render()?.as_bytes())?;

    let rd = run.reorder_density();
    out.csv("rd.csv", &["k", "count", "n_received", "rd"], |w| {
        for (k, c, p) in rd.iter() {
            w.write_record([k.to_string(), c.to_string(), rd.n_received.to_string(), f(p)])?;
        }
        Ok(())
    })?;
    out.csv(
        "entropy.csv",
        &["entropy", "d_threshold", "n_received", "excluded", "util_variance", "time_ratio"],
        |w| {
            w.write_record([
                f(headline.entropy),
                rd.d_threshold.to_string(),
                rd.n_received.to_string(),
                rd.excluded.to_string(),
                f(headline.util_variance),
                f(headline.time_ratio),
            ])
        },
    )?;

    let total_bounces: u64 = run.switches.iter().map(|s| s.bounces).sum();
    out.csv(
        "bounce_by_switch.csv",
        &["switch", "bounces", "forwards", "drops", "share_num", "share_den", "share"],
        |w| {
            for s in &run.switches {
                let share = super::result::Fraction::new(s.bounces, total_bounces);
                w.write_record([
                    s.name.clone(),
                    s.bounces.to_string(),
                    s.forwards.to_string(),
                    s.drops.to_string(),
                    share.num.to_string(),
                    share.den.to_string(),
                    f(share.value),
                ])?;
            }
            Ok(())
        },
    )?;

    let theta = run.config.theta;
    out.csv(
        "switch_stats.csv",
        &["switch", "port", "queue", "capacity", "mean_util", "fraction_above_theta"],
        |w| {
            for s in &run.switch_util {
                for (kind, traces) in [(QueueKind::Normal, &s.normal), (QueueKind::Bounce, &s.bounce)] {
                    for (port, t) in traces.iter().enumerate() {
                        w.write_record([
                            s.name.clone(),
                            port.to_string(),
                            kind.label().to_string(),
                            t.capacity.to_string(),
                            f(t.mean_utilization(end)),
                            f(t.fraction_above(theta, end)),
                        ])?;
                    }
                }
            }
            Ok(())
        },
    )?;

    let br = run.bounce_report();
    out.csv(
        "max_bounced_distance.csv",
        &["max_bounced_distance", "frames", "total", "fraction"],
        |w| {
            for (&d, &n) in &br.max_distance_histogram {
                let frac = super::result::Fraction::new(n, br.delivered_frames);
                w.write_record([d.to_string(), n.to_string(), frac.den.to_string(), f(frac.value)])?;
            }
            Ok(())
        },
    )?;
    out.csv("totalhop_cdf.csv", &["total_hop", "frames", "cumulative", "total", "cdf"], |w| {
        let mut cum = 0u64;
        for &(h, n, c) in &br.total_hop_cdf {
            cum += n;
            w.write_record([
                h.to_string(),
                n.to_string(),
                cum.to_string(),
                br.delivered_frames.to_string(),
                f(c),
            ])?;
        }
        Ok(())
    })?;

    let bin = opts.util_bin;
    out.csv("util_timeseries.csv", &["switch", "port", "queue", "time", "util"], |w| {
        for s in &run.switch_util {
            for (kind, traces) in [(QueueKind::Normal, &s.normal), (QueueKind::Bounce, &s.bounce)] {
                for (port, t) in traces.iter().enumerate() {
                    if !t.ever_occupied() {
                        continue;
                    }
                    for (i, u) in t.binned(bin, end).into_iter().enumerate() {
                        let at = SimTime(i as u64 * bin.as_nanos());
                        w.write_record([
                            s.name.clone(),
                            port.to_string(),
                            kind.label().to_string(),
                            secs(at),
                            f(u),
                        ])?;
                    }
                }
            }
        }
        Ok(())
    })?;

    out.csv(
        "flows.csv",
        &[
            "flow_id",
            "kind",
            "src",
            "dst",
            "request_index",
            "start",
            "completion",
            "fct",
            "segments_total",
            "segments_sent",
            "segments_received",
            "retransmissions",
            "drops",
            "drops_at",
            "bounces_at",
            "mean_delay",
            "mean_total_hop",
            "displacements",
        ],
        |w| {
            for fl in &run.flows {
                let sum = fl.summary();
                let n = sum.total_hops.len() as f64;
                let mean_hop = (n > 0.0)
                    .then(|| sum.total_hops.iter().map(|&h| f64::from(h)).sum::<f64>() / n);
                w.write_record([
                    fl.flow_id.to_string(),
                    format!("{:?}", fl.kind).to_lowercase(),
                    fl.src.clone(),
                    fl.dst.clone(),
                    fl.request_index.to_string(),
                    secs(fl.started_at),
                    opt(fl.completed_at.map(secs)),
                    opt(fl.fct().map(secs)),
                    fl.segments_total.to_string(),
                    fl.segments_sent.to_string(),
                    sum.segments_received.to_string(),
                    fl.retransmissions.to_string(),
                    fl.drops.to_string(),
                    by_node(&fl.drops_by_node),
                    by_node(&fl.bounces_by_switch),
                    opt(sum.mean_delay().map(f)),
                    opt(mean_hop.map(f)),
                    "displacements.csv".to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    out.csv("displacements.csv", &["flow_id", "receive_index", "displacement"], |w| {
        for fl in &run.flows {
            for (i, d) in fl.displacements.iter().enumerate() {
                w.write_record([fl.flow_id.to_string(), i.to_string(), d.to_string()])?;
            }
        }
        Ok(())
    })?;

    if let Some(trace) = &run.trace {
        out.csv(
            "trace.csv",
            &[
                "time_ns",
                "frame_id",
                "flow_id",
                "seq",
                "kind",
                "node",
                "port",
                "queue",
                "event",
                "bounced_hop",
                "bounced_distance",
                "max_bounced_distance",
                "total_hop",
            ],
            |w| {
                for r in trace {
                    let c = r.counters;
                    w.write_record([
                        r.time.as_nanos().to_string(),
                        r.frame_id.to_string(),
                        r.flow_id.to_string(),
                        r.seq.to_string(),
                        r.kind.to_string(),
                        run.node_names[r.node].clone(),
                        r.port.to_string(),
                        opt(r.queue.map(QueueKind::label)),
                        r.event.label().to_string(),
                        c.bounced_hop.to_string(),
                        c.bounced_distance.to_string(),
                        c.max_bounced_distance.to_string(),
                        c.total_hop.to_string(),
                    ])?;
                }
                Ok(())
            },
        )?;
    }

    let manifest = Manifest {
        name: run.config.name.clone(),
        config_hash: run.config.hash()?,
        seed: run.config.seed,
        mode: run.config.mode.to_string(),
        theta: run.config.theta,
        lambda: run.config.lambda,
        end_ns: end.as_nanos(),
        events_dispatched: run.engine.dispatched,
        rng_draws: run.rng_draws,
        headline,
        files: out.files.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    let path = out.path(MANIFEST_FILE);
    fs::write(&path, json).map_err(|source| ReportError::Io { path, source })?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, ReportError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read(&path).map_err(|source| ReportError::Io { path, source })?;
    Ok(serde_json::from_slice(&text)?)
}
