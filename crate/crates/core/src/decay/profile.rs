use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::sampler::CorrelationMatrix;

use super::NOISE_SIGMAS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileEntry {
    pub distance: usize,
    pub abs_correlation: f64,
    pub stderr: f64,
    /// Pairs above the noise floor that entered the aggregate.
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    pub anchor: usize,
    pub aggregation: Aggregation,
    pub entries: Vec<ProfileEntry>,
    /// First distance with no pair above the noise floor, if the lattice reaches it.
    pub truncated_at: Option<usize>,
}

impl DecayProfile {
    /// Builds a profile from `(distance, |cor|, stderr)` triples.
    pub fn from_points(points: &[(usize, f64, f64)]) -> Self {
        DecayProfile {
            anchor: 0,
            aggregation: Aggregation::Max,
            entries: points
                .iter()
                .map(|&(distance, abs_correlation, stderr)| ProfileEntry {
                    distance,
                    abs_correlation,
                    stderr,
                    pairs: 1,
                })
                .collect(),
            truncated_at: None,
        }
    }

    /// Each step down may rise by at most `sigmas` combined standard errors.
    pub fn is_decreasing_within(&self, sigmas: f64) -> bool {
        self.entries.windows(2).all(|w| {
            let band = sigmas * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            w[1].abs_correlation < w[0].abs_correlation + band
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "distance,abs_correlation,stderr,pairs")?;
        for e in &self.entries {
            writeln!(out, "{},{:.16e},{:.16e},{}", e.distance, e.abs_correlation, e.stderr, e.pairs)?;
        }
        Ok(())
    }
}

/// `|cor(anchor, j)|` grouped by `d(anchor, j)`.
///
/// Pairs with `|cor| <= 3 stderr` are dropped; the profile stops at the first
/// distance where nothing survives.
pub fn correlation_profile(
    corr: &CorrelationMatrix,
    lat: &Lattice,
    anchor: usize,
    aggregation: Aggregation,
) -> Result<DecayProfile> {
    if corr.dim != lat.len() {
        return Err(Error::DimensionMismatch {
            expected: lat.len(),
            got: corr.dim,
        });
    }
    if anchor >= lat.len() {
        return Err(Error::SiteOutOfRange {
            site: anchor,
            len: lat.len(),
        });
    }
    let mut by_distance: Vec<Vec<(f64, f64)>> = Vec::new();
    for j in 0..lat.len() {
        let d = lat.distance(anchor, j)?;
        if by_distance.len() <= d {
            by_distance.resize(d + 1, Vec::new());
        }
        let c = corr.cor(anchor, j);
        by_distance[d].push((c.estimate.abs(), c.stderr));
    }
    let mut entries = Vec::new();
    let mut truncated_at = None;
    for (d, pairs) in by_distance.iter().enumerate() {
        let kept: Vec<(f64, f64)> = pairs
            .iter()
            .copied()
            .filter(|&(a, se)| a > NOISE_SIGMAS * se)
            .collect();
        if kept.is_empty() {
            truncated_at = Some(d);
            break;
        }
        let (abs_correlation, stderr) = match aggregation {
            Aggregation::Max => kept
                .iter()
                .copied()
                .fold((f64::NEG_INFINITY, 0.0), |best, e| if e.0 > best.0 { e } else { best }),
            Aggregation::Mean => {
                let k = kept.len() as f64;
                (
                    kept.iter().map(|e| e.0).sum::<f64>() / k,
                    kept.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt() / k,
                )
            }
        };
        entries.push(ProfileEntry {
            distance: d,
            abs_correlation,
            stderr,
            pairs: kept.len(),
        });
    }
    Ok(DecayProfile {
        anchor,
        aggregation,
        entries,
        truncated_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub kappa_fit: f64,
    pub c_fit: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Standard error of the slope.
    pub kappa_stderr: f64,
}

impl DecayFit {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "kappa_fit,c_fit,r_squared,n_points,kappa_stderr")?;
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{},{:.16e}",
            self.kappa_fit, self.c_fit, self.r_squared, self.n_points, self.kappa_stderr
        )
    }
}

/// Unweighted least squares of `ln |cor|` on distance.
pub fn fit_decay_rate(profile: &DecayProfile) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = profile
        .entries
        .iter()
        .filter(|e| e.abs_correlation > 0.0 && e.abs_correlation.is_finite())
        .map(|e| (e.distance as f64, e.abs_correlation.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::TooFewFitPoints { got: n });
    }
    // shift by the first ordinate so flat data give an exactly zero slope
    let y0 = pts[0].1;
    let k = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1 - y0).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - y0 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - y0 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx + y0;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let kappa_stderr = (ss_res / (k - 2.0) / sxx).sqrt();
    Ok(DecayFit {
        kappa_fit: -slope,
        c_fit: intercept.exp(),
        r_squared,
        n_points: n,
        kappa_stderr,
    })
}
