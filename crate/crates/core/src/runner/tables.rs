//! Deterministic tables: pair covariances and Weyl sums.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{equidistribution_ks, weyl_limit, weyl_sigma_alpha};
use crate::angle::{Angle, DEFAULT_Q_MAX};
use crate::error::{Error, Result};
use crate::limitproc::{limit_covariance, Discretization, LimitKind, LimitSpec};
use crate::trigpoly::exact_pair_covariance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub n: usize,
    pub t1: f64,
    pub t2: f64,
    pub exact: f64,
    pub limit: f64,
    pub abs_error: f64,
}

/// Exact finite-`n` covariances of the scaled polynomial against the limit.
pub fn run_covariance_table(
    sigma1_sq: f64,
    sigma2_sq: f64,
    rho: f64,
    center: &Angle,
    pairs: &[(f64, f64)],
    n_ladder: &[usize],
) -> Result<Vec<CovarianceRow>> {
    if pairs.is_empty() || n_ladder.is_empty() {
        return Err(Error::EmptyInput("covariance table"));
    }
    if n_ladder.windows(2).any(|w| w[0] >= w[1]) || n_ladder[0] == 0 {
        return Err(Error::InvalidArgument("n ladder must be positive and increasing".into()));
    }
    let kind = if center.on_pi_lattice() {
        LimitKind::GLattice {
            sigma1_sq,
            sigma2_sq,
            rho,
        }
    } else {
        LimitKind::GGeneric {
            sigma1_sq,
            sigma2_sq,
            rho,
        }
    };
    let spec = LimitSpec::new(kind, Discretization::default())?;
    let s = center.radians();
    let mut rows = Vec::new();
    for &n in n_ladder {
        for &(t1, t2) in pairs {
            let exact = exact_pair_covariance(sigma1_sq, sigma2_sq, rho, n, s, t1, t2);
            let limit = limit_covariance(&spec, t1, t2)?;
            rows.push(CovarianceRow {
                n,
                t1,
                t2,
                exact,
                limit,
                abs_error: (exact - limit).abs(),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub center: Angle,
    pub alpha: f64,
    pub n: u64,
    pub sigma: f64,
    pub limit: f64,
    pub abs_error: f64,
    pub ks: f64,
}

/// Normalized sums `σ_n^α / n` against their limits, with the
/// equidistribution distance of `k s / (2π) mod 1`.
pub fn run_weyl_report(centers: &[Angle], alphas: &[f64], n_ladder: &[u64]) -> Result<Vec<WeylRow>> {
    if centers.is_empty() || alphas.is_empty() || n_ladder.is_empty() {
        return Err(Error::EmptyInput("weyl report"));
    }
    let mut rows = Vec::new();
    for center in centers {
        let class = center.classify(DEFAULT_Q_MAX)?;
        for &n in n_ladder {
            let ks = equidistribution_ks(n, center)?;
            for &alpha in alphas {
                let sigma = weyl_sigma_alpha(n, center, alpha)?;
                let limit = weyl_limit(class, alpha)?;
                rows.push(WeylRow {
                    center: *center,
                    alpha,
                    n,
                    sigma,
                    limit,
                    abs_error: (sigma - limit).abs(),
                    ks,
                });
            }
        }
    }
    Ok(rows)
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
