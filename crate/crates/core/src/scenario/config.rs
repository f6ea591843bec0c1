use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::endhost::{BurstGenCfg, RenoCfg, TransportCfg, TransportMode};
use crate::fabric::BounceParams;
use crate::model::Link;
use crate::engine::SimTime;
use crate::topology::{build_fattree, build_tree, Network};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot render config: {0}")]
    Render(#[from] toml::ser::Error),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Tree,
    Fattree,
}

impl TopologyKind {
    pub fn build(self) -> Network {
        match self {
            TopologyKind::Tree => build_tree(),
            TopologyKind::Fattree => build_fattree(),
        }
    }
}

/// Bounce fabric with loss-oblivious transport, or drop-tail fabric with
/// Reno.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pabo,
    Baseline,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pabo" => Ok(Mode::Pabo),
            "baseline" => Ok(Mode::Baseline),
            other => Err(format!("unknown mode {other:?} (expected pabo or baseline)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Pabo => "pabo",
            Mode::Baseline => "baseline",
        })
    }
}

/// Queue capacities in frames. Baseline switches get twice
/// `switch_normal` and no bounce queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueCfg {
    pub switch_normal: usize,
    pub switch_bounce: usize,
    pub sender: usize,
    pub host_bounce: usize,
}

impl Default for QueueCfg {
    fn default() -> Self {
        Self {
            switch_normal: 500,
            switch_bounce: 500,
            sender: 1500,
            host_bounce: 1500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkCfg {
    pub rate_bps: f64,
    /// Seconds.
    pub propagation_delay: f64,
}

impl Default for LinkCfg {
    fn default() -> Self {
        Self {
            rate_bps: 1e9,
            propagation_delay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstCfg {
    pub src: String,
    pub dst: String,
    /// Seconds.
    #[serde(default)]
    pub start: f64,
    pub packets_per_generate: u32,
    pub send_interval: f64,
    pub pause_interval: f64,
    pub payload: u32,
}

impl BurstCfg {
    pub fn generator(&self) -> BurstGenCfg {
        BurstGenCfg {
            packets_per_generate: self.packets_per_generate,
            send_interval: self.send_interval,
            pause_interval: self.pause_interval,
            payload: self.payload,
        }
    }
}

/// A client that periodically requests a reply from each of its servers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionCfg {
    pub client: String,
    pub servers: Vec<String>,
    #[serde(default)]
    pub start: f64,
    pub requests: u32,
    /// Seconds between consecutive requests.
    pub gap: f64,
    pub request_len: u32,
    pub reply_len: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    pub mss: u32,
    pub advertised_window: u32,
    /// Used by baseline runs.
    pub reno: RenoCfg,
}

impl Default for TransportSection {
    fn default() -> Self {
        Self {
            mss: 1500,
            advertised_window: 50000,
            reno: RenoCfg::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub topology: TopologyKind,
    pub mode: Mode,
    pub seed: u64,
    /// Simulated seconds. Sources stop and the run ends here.
    pub duration: f64,
    pub theta: f64,
    pub lambda: f64,
    /// Displacement threshold; defaults to the longest flow's length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_threshold: Option<u32>,
    /// Keep a per-frame event trace.
    #[serde(default)]
    pub trace: bool,
    #[serde(default)]
    pub queues: QueueCfg,
    #[serde(default)]
    pub link: LinkCfg,
    #[serde(default)]
    pub transport: TransportSection,
    #[serde(default, rename = "burst", skip_serializing_if = "Vec::is_empty")]
    pub bursts: Vec<BurstCfg>,
    #[serde(default, rename = "session", skip_serializing_if = "Vec::is_empty")]
    pub sessions: Vec<SessionCfg>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn render(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical rendering, hex encoded.
    pub fn hash(&self) -> Result<String, ConfigError> {
        let digest = Sha256::digest(self.render()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn bounce_params(&self) -> Result<BounceParams, ConfigError> {
        BounceParams::new(self.theta, self.lambda).map_err(|e| match e {
            crate::fabric::FabricError::BadTheta(_) => invalid("theta", e.to_string()),
            _ => invalid("lambda", e.to_string()),
        })
    }

    pub fn transport(&self) -> TransportCfg {
        TransportCfg {
            mode: match self.mode {
                Mode::Pabo => TransportMode::Pabo,
                Mode::Baseline => TransportMode::Reno,
            },
            mss: self.transport.mss,
            advertised_window: self.transport.advertised_window,
            reno: self.transport.reno,
        }
    }

    pub fn link(&self) -> Link {
        Link {
            rate_bps: self.link.rate_bps,
            propagation_delay: SimTime::from_secs_f64(self.link.propagation_delay),
        }
    }

    pub fn end_time(&self) -> SimTime {
        SimTime::from_secs_f64(self.duration)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(invalid("duration", "must be a positive number of seconds"));
        }
        self.bounce_params()?;
        if self.d_threshold == Some(0) {
            return Err(invalid("d_threshold", "must be positive"));
        }
        let q = &self.queues;
        for (field, v) in [
            ("queues.switch_normal", q.switch_normal),
            ("queues.switch_bounce", q.switch_bounce),
            ("queues.sender", q.sender),
            ("queues.host_bounce", q.host_bounce),
        ] {
            if v == 0 {
                return Err(invalid(field, "must be positive"));
            }
        }
        if !(self.link.rate_bps > 0.0 && self.link.rate_bps.is_finite()) {
            return Err(invalid("link.rate_bps", "must be positive"));
        }
        if !(self.link.propagation_delay >= 0.0 && self.link.propagation_delay.is_finite()) {
            return Err(invalid("link.propagation_delay", "must be non-negative"));
        }
        self.transport()
            .validate()
            .map_err(|e| invalid("transport", e.to_string()))?;
        if self.bursts.is_empty() && self.sessions.is_empty() {
            return Err(invalid("burst", "scenario has no traffic (add [[burst]] or [[session]])"));
        }

        let net = self.topology.build();
        let host = |field: String, name: &str| {
            net.host_index(name)
                .map_err(|e| invalid(field, e.to_string()))
        };
        for (i, b) in self.bursts.iter().enumerate() {
            let f = |k: &str| format!("burst[{i}].{k}");
            let src = host(f("src"), &b.src)?;
            let dst = host(f("dst"), &b.dst)?;
            if src == dst {
                return Err(invalid(f("dst"), "equals src"));
            }
            if !(b.start >= 0.0 && b.start.is_finite()) {
                return Err(invalid(f("start"), "must be non-negative"));
            }
            if b.payload == 0 {
                return Err(invalid(f("payload"), "must be positive"));
            }
            b.generator()
                .validate()
                .map_err(|e| invalid(f("packets_per_generate"), e.to_string()))?;
        }
        for (i, s) in self.sessions.iter().enumerate() {
            let f = |k: &str| format!("session[{i}].{k}");
            let client = host(f("client"), &s.client)?;
            if s.servers.is_empty() {
                return Err(invalid(f("servers"), "must not be empty"));
            }
            for (j, name) in s.servers.iter().enumerate() {
                let server = host(format!("session[{i}].servers[{j}]"), name)?;
                if server == client {
                    return Err(invalid(f("servers"), "client cannot serve itself"));
                }
            }
            if s.requests == 0 {
                return Err(invalid(f("requests"), "must be positive"));
            }
            if !(s.gap >= 0.0 && s.gap.is_finite()) {
                return Err(invalid(f("gap"), "must be non-negative"));
            }
            if !(s.start >= 0.0 && s.start.is_finite()) {
                return Err(invalid(f("start"), "must be non-negative"));
            }
            if s.request_len == 0 {
                return Err(invalid(f("request_len"), "must be positive"));
            }
            if s.reply_len == 0 {
                return Err(invalid(f("reply_len"), "must be positive"));
            }
        }
        Ok(())
    }
}
