//! Per-port power split, SINR, capacities, coverage and distributions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::{CMatrix, LinkBudget};
use crate::error::{Error, Result};
use crate::units::watts_to_dbm;

/// Power budget of one RX port, watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortPowerReport {
    pub desired: f64,
    pub interference: f64,
    pub noise: f64,
}

impl PortPowerReport {
    /// Desired + interference + noise.
    pub fn total(&self) -> f64 {
        self.desired + self.interference + self.noise
    }

    pub fn sinr(&self) -> f64 {
        self.desired / (self.interference + self.noise)
    }

    /// bps/Hz.
    pub fn capacity(&self) -> f64 {
        (1.0 + self.sinr()).log2()
    }
}

/// Split port `a`'s received power given the product `H V` of the effective
/// channel and the normalized precoder, with `beams` beams sharing `Psi`.
pub fn port_powers(hv: &CMatrix, budget: &LinkBudget, beams: usize, a: usize) -> PortPowerReport {
    let per_beam = budget.tx_power / beams as f64;
    let row = hv.row(a);
    let desired = per_beam * row[a].norm_sqr();
    let interference = per_beam
        * row
            .iter()
            .enumerate()
            .filter(|&(o, _)| o != a)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>();
    PortPowerReport {
        desired,
        interference,
        noise: budget.noise_power,
    }
}

pub fn sinr(report: &PortPowerReport) -> f64 {
    report.sinr()
}

/// Sum of `log2(1 + SINR)` over all ports of a drop.
pub fn sum_rate(reports: &[PortPowerReport]) -> f64 {
    reports.iter().map(PortPowerReport::capacity).sum()
}

pub fn average_capacity(per_drop: &[f64]) -> Result<f64> {
    if per_drop.is_empty() {
        return Err(Error::Empty("per-drop capacities"));
    }
    Ok(per_drop.iter().sum::<f64>() / per_drop.len() as f64)
}

/// Outcome of one tiling over every drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    /// 1-based enumeration index, 0 for tilings evaluated outside a run.
    pub t: u64,
    /// Sum rate per drop, `NaN` where zero forcing failed.
    pub drop_sum_rates: Vec<f64>,
    /// Mean over the feasible drops.
    pub average_capacity: f64,
    /// Smallest desired power over all ports of all feasible drops, watts.
    pub min_desired_power: f64,
    pub coverage: bool,
    /// Per-port minimum over drops of the desired power, watts.
    pub port_min_power: Vec<f64>,
    /// Drops where zero forcing failed.
    pub infeasible_drops: Vec<usize>,
    /// Fingerprint of the drop set the record was computed on.
    pub drop_set: String,
}

impl EvaluationRecord {
    pub fn feasible(&self) -> bool {
        self.infeasible_drops.is_empty() && !self.drop_sum_rates.is_empty()
    }

    /// Eligible for selection: every drop solved and coverage met.
    pub fn admissible(&self) -> bool {
        self.feasible() && self.coverage
    }

    pub fn min_desired_power_dbm(&self) -> f64 {
        watts_to_dbm(self.min_desired_power)
    }
}

/// `min >= threshold`, inclusive.
pub fn coverage_check(record: &EvaluationRecord, threshold: f64) -> bool {
    record.min_desired_power >= threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityDistribution {
    pub c_min: f64,
    pub c_max: f64,
    pub bins: usize,
    /// Bin width `dC`; zero in the degenerate single-value case.
    pub width: f64,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl CapacityDistribution {
    /// Left edge of bin `v` (0-based).
    pub fn lower_edge(&self, v: usize) -> f64 {
        self.c_min + v as f64 * self.width
    }

    pub fn upper_edge(&self, v: usize) -> f64 {
        if v + 1 == self.pdf.len() {
            self.c_max
        } else {
            self.c_min + (v + 1) as f64 * self.width
        }
    }

    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("bin_lower_bps_hz,bin_upper_bps_hz,pdf,cdf\n");
        for v in 0..self.pdf.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.lower_edge(v),
                self.upper_edge(v),
                self.pdf[v],
                self.cdf[v]
            );
        }
        out
    }
}

/// Histogram over `bins` equal-width bins on `[min, max]`, last bin closed.
/// All-equal input collapses to one bin holding all the mass.
pub fn distribution(values: &[f64], bins: usize) -> Result<CapacityDistribution> {
    check_sample(values, bins)?;
    let c_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let c_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    distribution_in(values, bins, c_min, c_max)
}

/// Like [`distribution`] on a fixed range, so that two samples share bins.
/// Values outside `[c_min, c_max]` are an error.
pub fn distribution_in(values: &[f64], bins: usize, c_min: f64, c_max: f64) -> Result<CapacityDistribution> {
    check_sample(values, bins)?;
    if !(c_min <= c_max) || values.iter().any(|&v| v < c_min || v > c_max) {
        return Err(Error::Dimension(format!("sample outside [{c_min}, {c_max}]")));
    }
    if c_max == c_min {
        return Ok(CapacityDistribution {
            c_min,
            c_max,
            bins: 1,
            width: 0.0,
            pdf: vec![1.0],
            cdf: vec![1.0],
        });
    }
    let width = (c_max - c_min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - c_min) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = values.len() as f64;
    let pdf: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let mut acc = 0usize;
    let mut cdf: Vec<f64> = counts
        .iter()
        .map(|&c| {
            acc += c;
            acc as f64 / n
        })
        .collect();
    // counts are integers, so the running total ends exactly at n
    *cdf.last_mut().expect("bins > 0") = 1.0;
    Ok(CapacityDistribution {
        c_min,
        c_max,
        bins,
        width,
        pdf,
        cdf,
    })
}

fn check_sample(values: &[f64], bins: usize) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Empty("capacity sample"));
    }
    if bins == 0 {
        return Err(Error::Config("distribution needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dimension("capacity sample has non-finite values".into()));
    }
    Ok(())
}

/// min / max / mean / population variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::Empty("sample"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Summary {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        variance,
    })
}

/// Statistics of the per-port minimum desired power, in dBm (variance in dB^2).
pub fn eta_statistics(port_min_power: &[f64]) -> Result<Summary> {
    let dbm: Vec<f64> = port_min_power.iter().map(|&w| watts_to_dbm(w)).collect();
    summarize(&dbm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn budget(tx: f64, noise: f64) -> LinkBudget {
        LinkBudget::new(tx, noise, 1e-15).unwrap()
    }

    #[test]
    fn identity_product_has_no_interference() {
        let hv = CMatrix::identity(4, 4);
        for a in 0..4 {
            let r = port_powers(&hv, &budget(4.0, 0.5), 4, a);
            assert_eq!(r.desired, 1.0);
            assert_eq!(r.interference, 0.0);
            assert_eq!(r.total(), 1.5);
        }
    }

    #[test]
    fn equal_cross_gain() {
        let g = Complex64::new(0.3, 0.4);
        let hv = CMatrix::from_fn(2, 2, |r, c| if r == c { Complex64::new(1.0, 0.0) } else { g });
        let r = port_powers(&hv, &budget(2.0, 1.0), 2, 0);
        assert!((r.interference - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sinr_limits() {
        let unit = PortPowerReport {
            desired: 2.0,
            interference: 0.0,
            noise: 2.0,
        };
        assert_eq!(sinr(&unit), 1.0);
        let swamped = PortPowerReport {
            desired: 2.0,
            interference: 1e300,
            noise: 2.0,
        };
        assert!(sinr(&swamped) < 1e-299);
    }

    #[test]
    fn sum_rate_of_unit_sinr_ports() {
        let r = vec![
            PortPowerReport {
                desired: 1.0,
                interference: 0.0,
                noise: 1.0
            };
            32
        ];
        assert_eq!(sum_rate(&r), 32.0);
        let z = vec![
            PortPowerReport {
                desired: 0.0,
                interference: 0.0,
                noise: 1.0
            };
            32
        ];
        assert_eq!(sum_rate(&z), 0.0);
    }

    #[test]
    fn averages() {
        assert_eq!(average_capacity(&[100.0, 200.0]).unwrap(), 150.0);
        assert_eq!(average_capacity(&[7.0; 5]).unwrap(), 7.0);
        assert!(average_capacity(&[]).is_err());
    }

    fn record(min: f64) -> EvaluationRecord {
        EvaluationRecord {
            t: 1,
            drop_sum_rates: vec![1.0],
            average_capacity: 1.0,
            min_desired_power: min,
            coverage: true,
            port_min_power: vec![min],
            infeasible_drops: vec![],
            drop_set: String::new(),
        }
    }

    #[test]
    fn coverage_boundary_inclusive() {
        assert!(coverage_check(&record(1e-15), 1e-15));
        assert!(!coverage_check(&record(0.99e-15), 1e-15));
    }

    #[test]
    fn degenerate_distribution() {
        let d = distribution(&[3.0; 10], 20).unwrap();
        assert_eq!(d.pdf, vec![1.0]);
        assert_eq!(d.cdf, vec![1.0]);
    }

    #[test]
    fn max_lands_in_last_bin() {
        let d = distribution(&[0.0, 1.0, 2.0], 2).unwrap();
        assert_eq!(d.pdf.len(), 2);
        assert!((d.pdf[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.pdf[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.cdf[1], 1.0);
        assert_eq!(d.upper_edge(1), 2.0);
    }

    #[test]
    fn two_value_stats() {
        let s = summarize(&[1.0, 3.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.variance), (1.0, 3.0, 2.0, 1.0));
        let c = summarize(&[-80.0; 4]).unwrap();
        assert_eq!(c.variance, 0.0);
    }

    #[test]
    fn eta_in_dbm() {
        let s = eta_statistics(&[1e-3, 1e-2]).unwrap();
        assert!((s.min - 0.0).abs() < 1e-12);
        assert!((s.max - 10.0).abs() < 1e-12);
        assert!((s.mean - 5.0).abs() < 1e-12);
        assert!((s.variance - 25.0).abs() < 1e-9);
    }
}
