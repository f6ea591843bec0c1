//! Scenario description, built-in presets and the simulation that runs them.

mod config;
mod presets;
mod report;
mod result;
mod sim;
mod sweep;

pub use config::{
    BurstCfg, ConfigError, LinkCfg, Mode, QueueCfg, ScenarioConfig, SessionCfg, TopologyKind,
    TransportSection,
};
pub use presets::{preset, preset_names, PRESETS, SESSION_MSS};
pub use result::{
    FlowKindLabel, FlowResult, Fraction, FrameAccounting, Headline, RunResult, TraceEvent,
    TraceRow,
};
pub use report::{read_manifest, sha256_hex, write_run, Manifest, ReportError, ReportOptions, MANIFEST_FILE};
pub use sim::{run, Ev, SimError};
pub use sweep::{point_config, point_seed, sweep, write_sweep, Grid, Point, SweepFailure, SweepOutcome, SweepRow};
