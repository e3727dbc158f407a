use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Chain;

/// Fewest retained samples any estimator accepts.
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Integrated autocorrelation time in retained steps.
    pub tau_int: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEstimate {
    pub i: usize,
    pub j: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub tau_int: f64,
}

/// Batch means with `floor(sqrt N)` batches; the remainder is left out of the batches only.
fn batch_stderr(y: &[f64], mean: f64) -> f64 {
    let n = y.len();
    let b = (n as f64).sqrt().floor() as usize;
    let size = n / b;
    let mut acc = 0.0;
    for chunk in y[..b * size].chunks_exact(size) {
        let d = chunk.iter().sum::<f64>() / size as f64 - mean;
        acc += d * d;
    }
    (acc / ((b - 1) as f64 * b as f64)).sqrt()
}

/// Geyer's initial positive sequence estimate of `1/2 + sum_k rho_k`.
fn tau_int(y: &[f64], mean: f64) -> f64 {
    let n = y.len();
    let autocov = |k: usize| -> f64 {
        y[..n - k]
            .iter()
            .zip(&y[k..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / n as f64
    };
    let g0 = autocov(0);
    if g0 <= 0.0 {
        return 0.5;
    }
    let max_lag = n / 4;
    let mut sum = 0.0;
    let mut k = 0;
    while 2 * k < max_lag {
        let pair = autocov(2 * k) + autocov(2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        k += 1;
    }
    (sum / g0 - 0.5).max(0.5)
}

fn summarize(y: &[f64]) -> Result<MeanEstimate> {
    if y.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            got: y.len(),
        });
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let constant = y.iter().all(|&v| v == y[0]);
    let (mean, stderr, tau) = if constant {
        (y[0], 0.0, 0.5)
    } else {
        (mean, batch_stderr(y, mean), tau_int(y, mean))
    };
    Ok(MeanEstimate {
        estimate: mean,
        stderr,
        tau_int: tau,
        n_samples: y.len(),
    })
}

/// `<f>` over the retained samples. Statistics are accumulated in `f64`.
pub fn estimate_mean<T: Real>(chain: &Chain<T>, f: impl Fn(&[T]) -> f64) -> Result<MeanEstimate> {
    let y: Vec<f64> = chain.samples().map(f).collect();
    summarize(&y)
}

/// Plug-in `cov(f, g)`; error bars from the centered product series.
pub fn estimate_cross<T: Real>(
    chain: &Chain<T>,
    f: impl Fn(&[T]) -> f64,
    g: impl Fn(&[T]) -> f64,
) -> Result<MeanEstimate> {
    let a: Vec<f64> = chain.samples().map(f).collect();
    let b: Vec<f64> = chain.samples().map(g).collect();
    if a.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            got: a.len(),
        });
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    summarize(&prod)
}

pub fn estimate_covariance<T: Real>(chain: &Chain<T>, i: usize, j: usize) -> Result<CorrelationEstimate> {
    for s in [i, j] {
        if s >= chain.dim() {
            return Err(Error::SiteOutOfRange {
                site: s,
                len: chain.dim(),
            });
        }
    }
    let e = estimate_cross(chain, |x| x[i].to_f64_lossy(), |x| x[j].to_f64_lossy())?;
    Ok(CorrelationEstimate {
        i,
        j,
        estimate: e.estimate,
        stderr: e.stderr,
        tau_int: e.tau_int,
    })
}

/// Covariances and correlations for every pair of coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub dim: usize,
    /// Row-major.
    pub cov: Vec<CorrelationEstimate>,
    /// Row-major; the diagonal is exactly one.
    pub cor: Vec<CorrelationEstimate>,
}

impl CorrelationMatrix {
    pub fn cov(&self, i: usize, j: usize) -> &CorrelationEstimate {
        &self.cov[i * self.dim + j]
    }

    pub fn cor(&self, i: usize, j: usize) -> &CorrelationEstimate {
        &self.cor[i * self.dim + j]
    }

    /// Builds a matrix from a known correlation function, with zero error bars.
    pub fn from_correlations(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut cor = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                cor.push(CorrelationEstimate {
                    i,
                    j,
                    estimate: f(i, j),
                    stderr: 0.0,
                    tau_int: 0.5,
                });
            }
        }
        CorrelationMatrix {
            dim,
            cov: cor.clone(),
            cor,
        }
    }

    /// Header `site,x_0,x_0_stderr,...`, one row per site.
    pub fn write_csv<W: Write>(&self, mut out: W, correlations: bool) -> io::Result<()> {
        let cells = if correlations { &self.cor } else { &self.cov };
        let mut header = vec!["site".to_string()];
        for j in 0..self.dim {
            header.push(format!("x_{j}"));
            header.push(format!("x_{j}_stderr"));
        }
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.dim {
            let mut row = vec![format!("x_{i}")];
            for c in &cells[i * self.dim..(i + 1) * self.dim] {
                row.push(format!("{:.16e}", c.estimate));
                row.push(format!("{:.16e}", c.stderr));
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `cor(i,j) = cov(i,j)/sqrt(cov(i,i) cov(j,j))` with delta-method error bars.
///
/// The correlation error bar is the batch-means error of the influence
/// series `u v - r (u^2 + v^2)/2` for standardized coordinates `u, v`.
pub fn correlation_matrix<T: Real>(chain: &Chain<T>) -> Result<CorrelationMatrix> {
    let m = chain.dim();
    let n = chain.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            got: n,
        });
    }
    let centered: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut c = chain.coordinate(i);
            let mu = c.iter().sum::<f64>() / n as f64;
            c.iter_mut().for_each(|v| *v -= mu);
            c
        })
        .collect();
    let mut cov = vec![None; m * m];
    for i in 0..m {
        for j in i..m {
            let prod: Vec<f64> = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).collect();
            let e = summarize(&prod)?;
            let est = CorrelationEstimate {
                i,
                j,
                estimate: e.estimate,
                stderr: e.stderr,
                tau_int: e.tau_int,
            };
            cov[i * m + j] = Some(est);
            cov[j * m + i] = Some(CorrelationEstimate { i: j, j: i, ..est });
        }
    }
    let cov: Vec<CorrelationEstimate> = cov.into_iter().map(|c| c.expect("filled")).collect();
    let sd: Vec<f64> = (0..m).map(|i| cov[i * m + i].estimate.sqrt()).collect();
    if let Some(site) = sd.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::ZeroVariance { site });
    }
    let mut cor = vec![None; m * m];
    for i in 0..m {
        cor[i * m + i] = Some(CorrelationEstimate {
            i,
            j: i,
            estimate: 1.0,
            stderr: 0.0,
            tau_int: 0.5,
        });
        for j in i + 1..m {
            let r = cov[i * m + j].estimate / (sd[i] * sd[j]);
            let (si, sj) = (sd[i], sd[j]);
            let infl: Vec<f64> = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| {
                    let (u, v) = (a / si, b / sj);
                    u * v - r * (u * u + v * v) / 2.0
                })
                .collect();
            let e = summarize(&infl)?;
            let est = CorrelationEstimate {
                i,
                j,
                estimate: r,
                stderr: e.stderr,
                tau_int: e.tau_int,
            };
            cor[i * m + j] = Some(est);
            cor[j * m + i] = Some(CorrelationEstimate { i: j, j: i, ..est });
        }
    }
    Ok(CorrelationMatrix {
        dim: m,
        cov,
        cor: cor.into_iter().map(|c| c.expect("filled")).collect(),
    })
}
