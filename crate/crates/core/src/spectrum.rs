//! Dyadic max-spectrum, batch and streaming.
//!
//! For scale `j ≥ 1` the series is cut into `n_j = ⌊n / 2^j⌋` consecutive
//! blocks of `2^j` values; `D(j, k)` is the maximum of block `k` and
//! `Y_j = (1/n_j) Σ_k log2 D(j, k)`. Values past the last complete block of a
//! scale do not enter that scale's `Y_j`.
//!
//! Both paths sum `log2 D(j, k)` in increasing `k` starting from `0.0` and then
//! divide by `n_j`, so a streamed spectrum is bit-identical to the batch one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-scale statistic of a [`MaxSpectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleStat {
    pub j: u32,
    /// `n_j`, the number of complete blocks of size `2^j`.
    pub block_count: u64,
    /// `Y_j`, in log2 units.
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxSpectrum {
    total_count: u64,
    scales: Vec<ScaleStat>,
}

fn floor_log2(n: u64) -> u32 {
    63 - n.leading_zeros()
}

#[inline]
fn check_observation(index: usize, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { index, value })
    }
}

impl MaxSpectrum {
    /// Batch computation in O(n) time without sorting.
    pub fn from_series(series: &[f64]) -> Result<Self> {
        if series.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a max-spectrum needs at least 2 observations, got {}",
                series.len()
            )));
        }
        for (i, &x) in series.iter().enumerate() {
            check_observation(i, x)?;
        }

        // Scale-1 maxima, then D(j+1, k) = max{D(j, 2k-1), D(j, 2k)} in place.
        let mut level: Vec<f64> = series.chunks_exact(2).map(|p| p[0].max(p[1])).collect();
        let mut scales = Vec::with_capacity(floor_log2(series.len() as u64) as usize);
        let mut j = 1;
        while !level.is_empty() {
            let log_sum: f64 = level.iter().map(|d| d.log2()).sum();
            scales.push(ScaleStat {
                j,
                block_count: level.len() as u64,
                y: log_sum / level.len() as f64,
            });
            let half = level.len() / 2;
            for k in 0..half {
                level[k] = level[2 * k].max(level[2 * k + 1]);
            }
            level.truncate(half);
            j += 1;
        }
        Ok(Self {
            total_count: series.len() as u64,
            scales,
        })
    }

    /// Builds a spectrum from given `Y_1..Y_J` for a series of `total_count`
    /// observations; `n_j` follows from `total_count`. Intended for synthetic
    /// spectra in tests and for re-loading stored spectra.
    pub fn from_parts(total_count: u64, ys: Vec<f64>) -> Result<Self> {
        if total_count < 2 {
            return Err(Error::InsufficientData(
                "total_count must be at least 2".into(),
            ));
        }
        let scale_count = floor_log2(total_count);
        if ys.len() != scale_count as usize {
            return Err(Error::InsufficientData(format!(
                "{total_count} observations give {scale_count} scales, got {} values",
                ys.len()
            )));
        }
        if let Some(bad) = ys.iter().position(|y| !y.is_finite()) {
            return Err(Error::domain(format!("Y_{} is not finite", bad + 1)));
        }
        let scales = ys
            .into_iter()
            .zip(1..)
            .map(|(y, j)| ScaleStat {
                j,
                block_count: total_count >> j,
                y,
            })
            .collect();
        Ok(Self {
            total_count,
            scales,
        })
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// `J = ⌊log2 n⌋`.
    pub fn scale_count(&self) -> u32 {
        self.scales.len() as u32
    }

    pub fn scales(&self) -> &[ScaleStat] {
        &self.scales
    }

    pub fn get(&self, j: u32) -> Option<&ScaleStat> {
        j.checked_sub(1).and_then(|i| self.scales.get(i as usize))
    }

    /// `Y_j`. Panics if `j` is not a retained scale.
    pub fn y(&self, j: u32) -> f64 {
        self.get(j)
            .unwrap_or_else(|| panic!("scale {j} not in spectrum"))
            .y
    }

    /// `n_j`, with `n_0 = n`. Zero for scales beyond the spectrum.
    pub fn block_count(&self, j: u32) -> u64 {
        if j == 0 {
            self.total_count
        } else {
            self.get(j).map_or(0, |s| s.block_count)
        }
    }

    /// Adds `c` to every `Y_j`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.scales {
            s.y += c;
        }
        out
    }
}

pub fn compute_spectrum_batch(series: &[f64]) -> Result<MaxSpectrum> {
    MaxSpectrum::from_series(series)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Level {
    /// Maximum of the pending half-block at this level. A value at level `j`
    /// covers `2^(j-1)` observations waiting for a sibling to complete a
    /// `2^j` block.
    pending: Option<f64>,
    log_sum: f64,
    completed: u64,
}

/// O(log n) running state of the max-spectrum.
///
/// The levels behave like a binary counter: a new value is carried upward,
/// completing the block at each level whose pending half is occupied and
/// stopping at the first empty one. Each completion adds `log2 D(j, n_j)` to
/// that scale's running sum. Amortized cost per update is O(1), worst case
/// O(log n).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamState {
    total_count: u64,
    levels: Vec<Level>,
}

impl StreamState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        check_observation(self.total_count as usize, x)?;
        self.total_count += 1;
        let mut carry = x;
        for level in self.levels.iter_mut() {
            match level.pending.take() {
                None => {
                    level.pending = Some(carry);
                    return Ok(());
                }
                Some(first) => {
                    let block_max = first.max(carry);
                    level.log_sum += block_max.log2();
                    level.completed += 1;
                    carry = block_max;
                }
            }
        }
        self.levels.push(Level {
            pending: Some(carry),
            ..Level::default()
        });
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, values: I) -> Result<()> {
        values.into_iter().try_for_each(|x| self.update(x))
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Number of levels held in memory; at most `⌊log2 n⌋ + 1`.
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Completed blocks at scale `j`.
    pub fn completed(&self, j: u32) -> u64 {
        self.level(j).map_or(0, |l| l.completed)
    }

    /// Maximum of the observations past the last complete `2^j` block
    /// (`R_j`), or `None` when `2^j` divides the count.
    pub fn partial_max(&self, j: u32) -> Option<f64> {
        self.levels
            .iter()
            .take(j as usize)
            .filter_map(|l| l.pending)
            .reduce(f64::max)
    }

    fn level(&self, j: u32) -> Option<&Level> {
        j.checked_sub(1).and_then(|i| self.levels.get(i as usize))
    }

    /// Snapshot of the spectrum over completed blocks. The state is untouched
    /// and may keep receiving updates.
    pub fn finalize(&self) -> Result<MaxSpectrum> {
        let scales: Vec<ScaleStat> = self
            .levels
            .iter()
            .zip(1..)
            .take_while(|(l, _)| l.completed > 0)
            .map(|(l, j)| ScaleStat {
                j,
                block_count: l.completed,
                y: l.log_sum / l.completed as f64,
            })
            .collect();
        if scales.is_empty() {
            return Err(Error::InsufficientData(format!(
                "no complete block after {} observations",
                self.total_count
            )));
        }
        Ok(MaxSpectrum {
            total_count: self.total_count,
            scales,
        })
    }
}
