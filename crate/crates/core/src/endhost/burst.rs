use serde::{Deserialize, Serialize};

use crate::engine::SimTime;

use super::EndhostError;

/// Periodic on/off source: `packets_per_generate` frames spaced by
/// `send_interval`, with generatings starting every `pause_interval`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstGenCfg {
    pub packets_per_generate: u32,
    pub send_interval: f64,
    pub pause_interval: f64,
    pub payload: u32,
}

impl Default for BurstGenCfg {
    fn default() -> Self {
        Self {
            packets_per_generate: 500,
            send_interval: 10e-6,
            pause_interval: 0.2,
            payload: 1500,
        }
    }
}

impl BurstGenCfg {
    pub fn validate(&self) -> Result<(), EndhostError> {
        if self.packets_per_generate == 0 || !(self.send_interval > 0.0) {
            return Err(EndhostError::BadBurst(
                "packets_per_generate and send_interval must be positive".into(),
            ));
        }
        let span = f64::from(self.packets_per_generate) * self.send_interval;
        if !(self.pause_interval > span) {
            return Err(EndhostError::BadBurst(format!(
                "pause_interval {} does not exceed the generating span {span}",
                self.pause_interval
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurstGen {
    cfg: BurstGenCfg,
    round_start: SimTime,
    emitted_in_round: u32,
    pub rounds: u32,
}

impl BurstGen {
    pub fn new(cfg: BurstGenCfg, start: SimTime) -> Self {
        Self {
            cfg,
            round_start: start,
            emitted_in_round: 0,
            rounds: 0,
        }
    }

    pub fn cfg(&self) -> &BurstGenCfg {
        &self.cfg
    }

    /// Called at each tick: one frame is due now. Returns when the next tick
    /// fires.
    pub fn tick(&mut self) -> SimTime {
        if self.emitted_in_round == 0 {
            self.rounds += 1;
        }
        self.emitted_in_round += 1;
        if self.emitted_in_round == self.cfg.packets_per_generate {
            self.emitted_in_round = 0;
            self.round_start = self.round_start + SimTime::from_secs_f64(self.cfg.pause_interval);
            self.round_start
        } else {
            self.round_start
                + SimTime::from_secs_f64(self.cfg.send_interval * f64::from(self.emitted_in_round))
        }
    }
}
