use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{AnalyticsError, ContestEntrySet};
use crate::model::{PlayerId, Signature};
use crate::points::Points;
use crate::scoring::ScoringSchema;

/// Points per unique team, keyed by signature.
pub type EntryPoints = HashMap<Signature, Points>;

/// How each unique team counts towards statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Every submitted entry counts, i.e. unique teams weighted by multiplicity.
    #[default]
    Multiplicity,
    /// Each distinct team counts once.
    Unique,
}

#[derive(Debug, Clone, Copy)]
pub struct SummaryOptions {
    pub bin_width: Points,
    pub weighting: Weighting,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions {
            bin_width: Points::whole(25),
            weighting: Weighting::Multiplicity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_lower: f64,
    pub bin_upper: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContestSummary {
    pub n: u64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub histogram: Vec<HistogramBin>,
    /// `None` when the sample is degenerate (fewer than two entries or zero spread).
    pub ks_statistic: Option<f64>,
}

impl ContestSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let ks = self
            .ks_statistic
            .map(|d| format!("{d:.4}"))
            .unwrap_or_else(|| "n/a".into());
        let rows = [
            ("entries", self.n.to_string()),
            ("mean", format!("{:.2}", self.mean)),
            ("std", format!("{:.2}", self.std)),
            ("min", format!("{}", self.min)),
            ("median", format!("{}", self.median)),
            ("max", format!("{}", self.max)),
            ("ks_statistic", ks),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "{k:<14}{v:>14}");
        }
        s
    }

    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("bin_lower,bin_upper,count\n");
        for b in &self.histogram {
            let _ = writeln!(s, "{},{},{}", b.bin_lower, b.bin_upper, b.count);
        }
        s
    }
}

/// Sorted, weighted score sample with exact prefix counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreDistribution {
    values: Vec<Points>,
    weights: Vec<u64>,
    /// `below[i]` = total weight of values strictly less than `values[i]`.
    below: Vec<u64>,
    total: u64,
}

impl ScoreDistribution {
    pub fn from_weighted(sample: impl IntoIterator<Item = (Points, u64)>) -> Self {
        let mut merged: BTreeMap<Points, u64> = BTreeMap::new();
        for (p, w) in sample {
            if w > 0 {
                *merged.entry(p).or_default() += w;
            }
        }
        let mut values = Vec::with_capacity(merged.len());
        let mut weights = Vec::with_capacity(merged.len());
        let mut below = Vec::with_capacity(merged.len());
        let mut total = 0u64;
        for (p, w) in merged {
            values.push(p);
            weights.push(w);
            below.push(total);
            total += w;
        }
        ScoreDistribution {
            values,
            weights,
            below,
            total,
        }
    }

    pub fn from_entries(
        set: &ContestEntrySet,
        points: &EntryPoints,
        weighting: Weighting,
    ) -> Result<Self, AnalyticsError> {
        let mut sample = Vec::with_capacity(set.unique_count());
        for t in set.unique() {
            let p = points
                .get(&t.signature())
                .ok_or(AnalyticsError::MissingPoints(t.signature()))?;
            let w = match weighting {
                Weighting::Multiplicity => t.multiplicity(),
                Weighting::Unique => 1,
            };
            sample.push((*p, w));
        }
        Ok(Self::from_weighted(sample))
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Distinct values with their weights, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (Points, u64)> + '_ {
        self.values.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn count_below(&self, score: Points) -> u64 {
        let i = self.values.partition_point(|v| *v < score);
        if i < self.values.len() {
            self.below[i]
        } else {
            self.total
        }
    }

    /// Percentage of entries scoring strictly below `score`.
    pub fn percentile_rank(&self, score: Points) -> Result<f64, AnalyticsError> {
        if self.total == 0 {
            return Err(AnalyticsError::EmptySet);
        }
        Ok(100.0 * self.count_below(score) as f64 / self.total as f64)
    }

    /// Value at 0-based sorted position `k`.
    fn at_position(&self, k: u64) -> Points {
        let i = self.below.partition_point(|b| *b <= k) - 1;
        self.values[i]
    }

    pub fn summarize(&self, bin_width: Points) -> Result<ContestSummary, AnalyticsError> {
        if self.total == 0 {
            return Err(AnalyticsError::EmptySet);
        }
        if bin_width.quarters() <= 0 {
            return Err(AnalyticsError::BadBinWidth);
        }
        let n = self.total as i128;
        let (s1, s2) = self.iter().fold((0i128, 0i128), |(a, b), (p, w)| {
            let q = p.quarters() as i128;
            let w = w as i128;
            (a + q * w, b + q * q * w)
        });
        let mean = s1 as f64 / n as f64 / 4.0;
        let var_num = s2 * n - s1 * s1;
        let std = ((var_num as f64) / (n as f64 * n as f64)).sqrt() / 4.0;
        let min = self.values[0];
        let max = *self.values.last().unwrap();
        let median = self.at_position((self.total - 1) / 2);

        let width = bin_width.quarters();
        let first = min.quarters().div_euclid(width);
        let last = max.quarters().div_euclid(width);
        let mut histogram: Vec<HistogramBin> = (first..=last)
            .map(|b| HistogramBin {
                bin_lower: Points::from_quarters(b * width).to_f64(),
                bin_upper: Points::from_quarters((b + 1) * width).to_f64(),
                count: 0,
            })
            .collect();
        for (p, w) in self.iter() {
            histogram[(p.quarters().div_euclid(width) - first) as usize].count += w;
        }

        let sample: Vec<(f64, u64)> = self.iter().map(|(p, w)| (p.to_f64(), w)).collect();
        let ks_statistic = ks_normal_statistic(&sample).ok();
        Ok(ContestSummary {
            n: self.total,
            mean,
            std,
            min: min.to_f64(),
            max: max.to_f64(),
            median: median.to_f64(),
            histogram,
            ks_statistic,
        })
    }
}

/// Points for every unique team from a per-player base table.
pub fn score_entries(
    set: &ContestEntrySet,
    base: &BTreeMap<PlayerId, Points>,
    schema: &ScoringSchema,
) -> Result<EntryPoints, AnalyticsError> {
    let table: Vec<Option<Points>> = set.players().iter().map(|id| base.get(id).copied()).collect();
    set.compact_teams()
        .par_iter()
        .map(|t| {
            let get = |i: u32| table[i as usize].ok_or_else(|| AnalyticsError::MissingBase(set.players()[i as usize].clone()));
            let mut total = Points::ZERO;
            for &m in &t.members {
                total += get(m)?;
            }
            total += get(t.captain)?.scale(schema.captain_multiplier) - get(t.captain)?;
            total += get(t.vice_captain)?.scale(schema.vice_captain_multiplier) - get(t.vice_captain)?;
            Ok((t.signature, total))
        })
        .collect()
}

pub fn summarize(
    set: &ContestEntrySet,
    points: &EntryPoints,
    options: &SummaryOptions,
) -> Result<ContestSummary, AnalyticsError> {
    ScoreDistribution::from_entries(set, points, options.weighting)?.summarize(options.bin_width)
}

/// Percentage of contest entries scoring strictly below `score`.
///
/// Builds the distribution on each call; use [`ScoreDistribution`] for many probes.
pub fn percentile_rank(
    score: Points,
    set: &ContestEntrySet,
    points: &EntryPoints,
    weighting: Weighting,
) -> Result<f64, AnalyticsError> {
    ScoreDistribution::from_entries(set, points, weighting)?.percentile_rank(score)
}

/// Kolmogorov–Smirnov distance between a weighted sample and the normal law fitted to it.
///
/// Mean and standard deviation are the population estimates of the sample.
/// Both one-sided limits of the empirical CDF are compared at every distinct point.
pub fn ks_normal_statistic(sample: &[(f64, u64)]) -> Result<f64, AnalyticsError> {
    let mut pts: Vec<(f64, u64)> = sample.iter().copied().filter(|(_, w)| *w > 0).collect();
    if pts.iter().any(|(x, _)| !x.is_finite()) {
        return Err(AnalyticsError::Degenerate("sample contains non-finite values"));
    }
    let n: u64 = pts.iter().map(|(_, w)| w).sum();
    if n < 2 {
        return Err(AnalyticsError::Degenerate("need at least two observations"));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let nf = n as f64;
    let mean = pts.iter().map(|(x, w)| x * *w as f64).sum::<f64>() / nf;
    let var = pts
        .iter()
        .map(|(x, w)| (x - mean).powi(2) * *w as f64)
        .sum::<f64>()
        / nf;
    let sd = var.sqrt();
    if !(sd > 0.0) || sd <= f64::EPSILON * mean.abs() {
        return Err(AnalyticsError::Degenerate("standard deviation is zero"));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut d: f64 = 0.0;
    let mut cum = 0u64;
    let mut i = 0;
    while i < pts.len() {
        let x = pts[i].0;
        let left = cum as f64 / nf;
        while i < pts.len() && pts[i].0 == x {
            cum += pts[i].1;
            i += 1;
        }
        let right = cum as f64 / nf;
        let phi = normal.cdf((x - mean) / sd);
        d = d.max((left - phi).abs()).max((right - phi).abs());
    }
    Ok(d.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> Vec<(Points, u64)> {
        v.iter().map(|x| (Points::from_decimal(*x).unwrap(), 1)).collect()
    }

    #[test]
    fn constant_scores() {
        let d = ScoreDistribution::from_weighted(pts(&[100.0; 5]));
        let s = d.summarize(Points::whole(25)).unwrap();
        assert_eq!((s.mean, s.std, s.median, s.min, s.max), (100.0, 0.0, 100.0, 100.0, 100.0));
        assert_eq!(s.ks_statistic, None);
        assert_eq!(s.histogram.len(), 1);
        assert_eq!(s.histogram[0].count, 5);
    }

    #[test]
    fn three_scores() {
        let d = ScoreDistribution::from_weighted(pts(&[0.0, 10.0, 20.0]));
        let s = d.summarize(Points::whole(25)).unwrap();
        assert_eq!((s.mean, s.median, s.min, s.max), (10.0, 10.0, 0.0, 20.0));
        assert_eq!(d.percentile_rank(Points::whole(-1)).unwrap(), 0.0);
        assert_eq!(d.percentile_rank(Points::whole(10)).unwrap(), 100.0 / 3.0);
        assert_eq!(d.percentile_rank(Points::whole(21)).unwrap(), 100.0);
    }

    #[test]
    fn lower_median_on_even_count() {
        let d = ScoreDistribution::from_weighted(pts(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(d.summarize(Points::whole(1)).unwrap().median, 2.0);
    }

    #[test]
    fn empty_distribution_errors() {
        let d = ScoreDistribution::from_weighted(Vec::new());
        assert!(matches!(d.percentile_rank(Points::ZERO), Err(AnalyticsError::EmptySet)));
    }

    #[test]
    fn two_point_ks() {
        // mean 0.5, sd 0.5: the points sit at z = -1 and z = +1, and the
        // largest gap is F(0+) - Phi(-1) = 0.5 - 0.158655 = 0.341345.
        let d = ks_normal_statistic(&[(0.0, 1), (1.0, 1)]).unwrap();
        assert!((d - 0.341_344_746).abs() < 1e-8, "{d}");
    }

    #[test]
    fn ks_degenerate() {
        assert!(ks_normal_statistic(&[(3.0, 10)]).is_err());
        assert!(ks_normal_statistic(&[(3.0, 1)]).is_err());
    }
}
