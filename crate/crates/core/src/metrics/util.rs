//! Queue occupancy traces and the summary statistics built on them.

use crate::engine::SimTime;

/// Event-driven occupancy samples of one queue. The queue is empty before
/// the first sample. Samples sharing a timestamp are coalesced to the last
/// value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UtilTrace {
    pub capacity: usize,
    samples: Vec<(SimTime, u32)>,
}

impl UtilTrace {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            samples: Vec::new(),
        }
    }

    pub fn record(&mut self, at: SimTime, occupancy: usize) {
        debug_assert!(occupancy <= self.capacity);
        let occ = occupancy as u32;
        match self.samples.last_mut() {
            Some(last) if last.0 == at => last.1 = occ,
            Some(last) => {
                debug_assert!(last.0 < at, "samples must be time-ordered");
                if last.1 != occ {
                    self.samples.push((at, occ));
                }
            }
            None => self.samples.push((at, occ)),
        }
    }

    pub fn samples(&self) -> &[(SimTime, u32)] {
        &self.samples
    }

    pub fn ever_occupied(&self) -> bool {
        self.samples.iter().any(|&(_, o)| o > 0)
    }

    /// Piecewise-constant segments `(start, end, occupancy)` over `[0, end)`.
    fn segments(&self, end: SimTime) -> impl Iterator<Item = (u64, u64, u32)> + '_ {
        let end = end.as_nanos();
        let mut prev = (0u64, 0u32);
        let mut iter = self.samples.iter();
        let mut done = false;
        std::iter::from_fn(move || loop {
            if done {
                return None;
            }
            match iter.next() {
                Some(&(t, occ)) => {
                    let t = t.as_nanos().min(end);
                    let seg = (prev.0, t, prev.1);
                    prev = (t, occ);
                    if seg.1 > seg.0 {
                        return Some(seg);
                    }
                }
                None => {
                    done = true;
                    if end > prev.0 {
                        return Some((prev.0, end, prev.1));
                    }
                    return None;
                }
            }
        })
    }

    /// Integral of occupancy over `[0, end)` in frame-nanoseconds.
    pub fn occupancy_integral(&self, end: SimTime) -> f64 {
        self.segments(end)
            .map(|(a, b, o)| (b - a) as f64 * f64::from(o))
            .sum()
    }

    pub fn mean_utilization(&self, end: SimTime) -> f64 {
        if self.capacity == 0 || end == SimTime::ZERO {
            return 0.0;
        }
        self.occupancy_integral(end) / (end.as_nanos() as f64 * self.capacity as f64)
    }

    /// Time-weighted mean utilization over consecutive bins of width `bin`
    /// covering `[0, end)`. The last bin may be shorter.
    pub fn binned(&self, bin: SimTime, end: SimTime) -> Vec<f64> {
        let (bin, end_ns) = (bin.as_nanos().max(1), end.as_nanos());
        let n = end_ns.div_ceil(bin) as usize;
        let mut acc = vec![0.0; n];
        if self.capacity == 0 {
            return acc;
        }
        for (a, b, o) in self.segments(end) {
            let mut t = a;
            while t < b {
                let i = (t / bin) as usize;
                let stop = ((i as u64 + 1) * bin).min(b);
                acc[i] += (stop - t) as f64 * f64::from(o);
                t = stop;
            }
        }
        for (i, v) in acc.iter_mut().enumerate() {
            let lo = i as u64 * bin;
            let width = ((lo + bin).min(end_ns) - lo) as f64;
            *v /= width * self.capacity as f64;
        }
        acc
    }

    pub fn ever_above(&self, theta: f64, end: SimTime) -> bool {
        self.capacity > 0
            && self
                .segments(end)
                .any(|(_, _, o)| f64::from(o) / self.capacity as f64 > theta)
    }

    /// Fraction of `[0, end)` spent with utilization strictly above `theta`.
    pub fn fraction_above(&self, theta: f64, end: SimTime) -> f64 {
        if self.capacity == 0 || end == SimTime::ZERO {
            return 0.0;
        }
        let above: u64 = self
            .segments(end)
            .filter(|&(_, _, o)| f64::from(o) / self.capacity as f64 > theta)
            .map(|(a, b, _)| b - a)
            .sum();
        above as f64 / end.as_nanos() as f64
    }
}

/// Occupancy traces of every output port of one switch.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchUtil {
    pub name: String,
    pub normal: Vec<UtilTrace>,
    pub bounce: Vec<UtilTrace>,
}

impl SwitchUtil {
    /// Time-weighted mean of (normal + bounce) occupancy over the combined
    /// capacity of all ports.
    pub fn mean_utilization(&self, end: SimTime) -> f64 {
        let cap: usize = self
            .normal
            .iter()
            .chain(&self.bounce)
            .map(|t| t.capacity)
            .sum();
        if cap == 0 || end == SimTime::ZERO {
            return 0.0;
        }
        let integral: f64 = self
            .normal
            .iter()
            .chain(&self.bounce)
            .map(|t| t.occupancy_integral(end))
            .sum();
        integral / (end.as_nanos() as f64 * cap as f64)
    }
}

/// Population variance of the per-switch mean utilizations.
pub fn util_variance(switches: &[SwitchUtil], end: SimTime) -> f64 {
    let means: Vec<f64> = switches.iter().map(|s| s.mean_utilization(end)).collect();
    population_variance(&means)
}

pub fn population_variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// Mean fraction of time above `theta`, over the queues that exceeded
/// `theta` at least once. Zero when no queue did.
pub fn time_ratio<'a>(traces: impl IntoIterator<Item = &'a UtilTrace>, theta: f64, end: SimTime) -> f64 {
    let fractions: Vec<f64> = traces
        .into_iter()
        .filter(|t| t.ever_above(theta, end))
        .map(|t| t.fraction_above(theta, end))
        .collect();
    if fractions.is_empty() {
        0.0
    } else {
        fractions.iter().sum::<f64>() / fractions.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> SimTime {
        SimTime::from_secs_f64(x)
    }

    fn constant(cap: usize, occ: usize) -> UtilTrace {
        let mut t = UtilTrace::new(cap);
        t.record(SimTime::ZERO, occ);
        t
    }

    #[test]
    fn binned_means() {
        let mut t = UtilTrace::new(10);
        t.record(SimTime(5), 10);
        t.record(SimTime(15), 0);
        // [0,10): half full for half the bin; [10,20): full for 5ns; [20,25)
        assert_eq!(t.binned(SimTime(10), SimTime(25)), vec![0.5, 0.5, 0.0]);
        let total: f64 = t.binned(SimTime(1), SimTime(25)).iter().sum();
        assert!((total - t.occupancy_integral(SimTime(25)) / 10.0).abs() < 1e-12);
    }

    #[test]
    fn idle_switches_have_zero_variance() {
        let sw: Vec<SwitchUtil> = (0..4)
            .map(|i| SwitchUtil {
                name: format!("S{i}"),
                normal: vec![UtilTrace::new(10)],
                bounce: vec![UtilTrace::new(10)],
            })
            .collect();
        assert_eq!(util_variance(&sw, s(1.0)), 0.0);
    }

    #[test]
    fn one_busy_switch_of_eight() {
        let mut sw: Vec<SwitchUtil> = (0..8)
            .map(|i| SwitchUtil {
                name: format!("S{i}"),
                normal: vec![UtilTrace::new(100)],
                bounce: vec![],
            })
            .collect();
        sw[0].normal[0] = constant(100, 50);
        let v = util_variance(&sw, s(1.0));
        // mean 1/16, variance (7/16)^2/8 + 7 (1/16)^2 / 8
        assert!((v - 0.02734375).abs() < 1e-12, "{v}");
    }

    #[test]
    fn time_ratio_examples() {
        let idle = UtilTrace::new(10);
        assert_eq!(time_ratio([&idle], 0.5, s(1.0)), 0.0);

        let mut busy = UtilTrace::new(10);
        busy.record(s(0.2), 8);
        busy.record(s(0.5), 2);
        assert!((time_ratio([&busy, &idle], 0.5, s(1.0)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn time_ratio_non_increasing_in_theta() {
        let mut t = UtilTrace::new(10);
        for (i, occ) in [3, 6, 9, 10, 7, 4, 1, 0].iter().enumerate() {
            t.record(s(i as f64 * 0.1), *occ);
        }
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let theta = k as f64 / 10.0;
            let r = t.fraction_above(theta, s(1.0));
            assert!(r <= prev);
            prev = r;
        }
    }

    #[test]
    fn mean_utilization_integrates() {
        let mut t = UtilTrace::new(4);
        t.record(s(0.0), 4);
        t.record(s(0.25), 0);
        assert!((t.mean_utilization(s(1.0)) - 0.25).abs() < 1e-12);
        t.record(s(0.25), 2); // coalesced with the sample above
        assert_eq!(t.samples().len(), 2);
    }
}
