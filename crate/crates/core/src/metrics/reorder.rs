//! Packet displacement, reorder density and reorder entropy.

use super::MetricsError;

/// `r - s`: positive means the packet arrived late, negative early.
pub fn displacement(send_order: u32, recv_order: u32) -> i64 {
    i64::from(recv_order) - i64::from(send_order)
}

/// Normalized histogram of displacements within `[-d_threshold, d_threshold]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReorderDistribution {
    pub d_threshold: u32,
    /// `counts[k + d_threshold]` holds S[k].
    counts: Vec<u64>,
    /// Packets inside the threshold (N).
    pub n_received: u64,
    /// Packets beyond the threshold, treated as lost.
    pub excluded: u64,
}

impl ReorderDistribution {
    pub fn count(&self, k: i64) -> u64 {
        self.index(k).map_or(0, |i| self.counts[i])
    }

    pub fn density(&self, k: i64) -> f64 {
        if self.n_received == 0 {
            return 0.0;
        }
        self.count(k) as f64 / self.n_received as f64
    }

    /// `(k, S[k], RD[k])` for every k in range, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64, f64)> + '_ {
        let dt = i64::from(self.d_threshold);
        self.counts.iter().enumerate().map(move |(i, &c)| {
            let k = i as i64 - dt;
            let rd = if self.n_received == 0 {
                0.0
            } else {
                c as f64 / self.n_received as f64
            };
            (k, c, rd)
        })
    }

    /// Rows with a non-zero count only.
    pub fn support(&self) -> impl Iterator<Item = (i64, u64, f64)> + '_ {
        self.iter().filter(|&(_, c, _)| c > 0)
    }

    pub fn total(&self) -> f64 {
        self.iter().map(|(_, _, rd)| rd).sum()
    }

    fn index(&self, k: i64) -> Option<usize> {
        let dt = i64::from(self.d_threshold);
        (-dt..=dt).contains(&k).then(|| (k + dt) as usize)
    }
}

pub fn reorder_density(
    displacements: &[i64],
    d_threshold: u32,
) -> Result<ReorderDistribution, MetricsError> {
    if d_threshold == 0 {
        return Err(MetricsError::ZeroThreshold);
    }
    let dt = i64::from(d_threshold);
    let mut counts = vec![0u64; 2 * d_threshold as usize + 1];
    let mut n = 0;
    let mut excluded = 0;
    for &d in displacements {
        if d.abs() > dt {
            excluded += 1;
        } else {
            counts[(d + dt) as usize] += 1;
            n += 1;
        }
    }
    Ok(ReorderDistribution {
        d_threshold,
        counts,
        n_received: n,
        excluded,
    })
}

/// Shannon entropy (natural log) of the reorder density, `0 ln 0 = 0`.
pub fn reorder_entropy(rd: &ReorderDistribution) -> f64 {
    let h: f64 = rd
        .iter()
        .filter(|&(_, c, _)| c > 0)
        .map(|(_, _, p)| -p * p.ln())
        .sum();
    // a point mass gives -1*ln(1) = -0.0
    h.max(0.0)
}
