//! Counting and locating real zeros on a bounded interval.
//!
//! A zero is counted once regardless of multiplicity. A zero exactly at the
//! left endpoint is counted and one at the right endpoint is not, so counts
//! over adjacent intervals add up.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this grid maximum the function is treated as identically zero.
pub const DEGENERATE_MAX: f64 = 1e-30;
/// Grid values within this fraction of the grid maximum count as exact zeros.
pub const ZERO_REL_TOL: f64 = 1e-12;
const SUBDIVISIONS: usize = 8;
const MAX_REFINE_ITERS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanOptions {
    /// Number of grid cells `M`; the scan uses `M + 1` points.
    pub grid: usize,
    /// Zero locations are refined to `rel_tol · (b - a)`.
    pub rel_tol: f64,
    /// A minimum of `|f|` below `tangency · max|f|` with no sign change is
    /// reported as a near-tangency.
    pub tangency: f64,
    /// Local minima of `|f|` estimated below `dip · max|f|` are inspected
    /// on a finer grid.
    pub dip: f64,
    /// Levels of subdivision used for that inspection.
    pub max_depth: u32,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid: 2048,
            rel_tol: 1e-12,
            tangency: 1e-6,
            dip: 0.05,
            max_depth: 3,
        }
    }
}

impl ScanOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(Error::InvalidArgument(format!("scan grid must be at least 2, got {}", self.grid)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-3) {
            return Err(Error::InvalidArgument(format!("rel_tol out of range: {}", self.rel_tol)));
        }
        if !(self.tangency >= 0.0 && self.dip >= self.tangency && self.dip < 1.0) {
            return Err(Error::InvalidArgument(
                "need 0 <= tangency <= dip < 1 in scan options".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroFlag {
    NearTangency,
    EndpointZero,
    RefinementFailed,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub count: usize,
    pub locations: Vec<f64>,
    pub flags: BTreeSet<ZeroFlag>,
}

impl ZeroReport {
    pub fn has(&self, flag: ZeroFlag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Adjacent strict sign alternations; an exact zero takes the sign of the
/// last nonzero value before it.
pub fn count_sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}

struct Scanner<'a, F, D> {
    f: &'a F,
    fprime: &'a D,
    tol_x: f64,
    zero_tol: f64,
    scale: f64,
    opts: &'a ScanOptions,
    report: ZeroReport,
}

fn sign_of(v: f64, zero_tol: f64) -> i8 {
    if v.abs() <= zero_tol {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Counts the zeros of `f` in `[a, b)`.
///
/// The scan samples `M + 1` equispaced points, refines every sign change by
/// safeguarded Newton iteration, and inspects local minima of `|f|` on finer
/// grids to catch pairs of close zeros. A dip that never changes sign is
/// flagged [`ZeroFlag::NearTangency`].
pub fn count_zeros_window<F, D>(f: &F, fprime: &D, a: f64, b: f64, opts: &ScanOptions) -> Result<ZeroReport>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite a < b, got [{a}, {b}]")));
    }
    opts.validate()?;
    let m = opts.grid;
    let width = b - a;
    let xs: Vec<f64> = (0..=m)
        .map(|i| if i == m { b } else { a + width * i as f64 / m as f64 })
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        let mut report = ZeroReport::default();
        report.flags.insert(ZeroFlag::RefinementFailed);
        return Ok(report);
    }
    let scale = vals.iter().fold(0f64, |acc, v| acc.max(v.abs()));
    if scale < DEGENERATE_MAX {
        return Err(Error::DegenerateInput { max_abs: scale });
    }
    let mut sc = Scanner {
        f,
        fprime,
        tol_x: opts.rel_tol * width,
        zero_tol: ZERO_REL_TOL * scale,
        scale,
        opts,
        report: ZeroReport::default(),
    };
    sc.scan(&xs, &vals);
    let mut report = sc.report;
    report.locations.sort_by(f64::total_cmp);
    report.locations.dedup_by(|x, y| (*x - *y).abs() <= 2.0 * opts.rel_tol * width);
    report.count = report.locations.len();
    Ok(report)
}

impl<F, D> Scanner<'_, F, D>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    fn scan(&mut self, xs: &[f64], vals: &[f64]) {
        let m = xs.len() - 1;
        let signs: Vec<i8> = vals.iter().map(|&v| sign_of(v, self.zero_tol)).collect();
        if signs[0] == 0 || signs[m] == 0 {
            self.report.flags.insert(ZeroFlag::EndpointZero);
        }
        if signs[0] == 0 {
            if signs[1] == 0 {
                self.report.locations.push(xs[0]);
            } else {
                self.grid_zero(xs[0], true, &[(xs[1], vals[1])]);
            }
        }
        if signs[m] == 0 && signs[m - 1] != 0 {
            self.grid_zero(xs[m], false, &[(xs[m - 1], vals[m - 1])]);
        }
        // A single vanishing grid value is examined on both sides. A longer run
        // between two samples of the same sign is a touching zero; between
        // opposite signs it is part of the bracket.
        let mut last: Option<usize> = None;
        for i in 0..=m {
            if signs[i] == 0 {
                continue;
            }
            match last {
                Some(p) if i == p + 2 => self.grid_zero(xs[p + 1], true, &[(xs[p], vals[p]), (xs[i], vals[i])]),
                Some(p) if signs[p] != signs[i] => self.refine_bracket(xs[p], vals[p], xs[i], vals[i]),
                Some(p) if i > p + 1 => {
                    self.report.locations.push(xs[p + 1]);
                    self.report.flags.insert(ZeroFlag::NearTangency);
                }
                // the run starts at `a`, which is already recorded
                None if i > 1 => {
                    self.report.flags.insert(ZeroFlag::NearTangency);
                }
                _ => {}
            }
            last = Some(i);
        }
        if let Some(p) = last {
            if p + 1 < m {
                self.report.locations.push(xs[p + 1]);
                self.report.flags.insert(ZeroFlag::NearTangency);
            }
        }
        self.inspect_dips(xs, vals, &signs);
    }

    /// `f` vanishes at the grid point `xz`; each side is a neighbouring grid
    /// point with its nonzero value. Approaching `xz` geometrically from each
    /// side finds a second crossing whenever `f` takes the other sign next to
    /// `xz`. Without one, a slope too small to leave the tangency band within
    /// one cell marks a multiple zero.
    fn grid_zero(&mut self, xz: f64, record: bool, sides: &[(f64, f64)]) {
        if record {
            self.report.locations.push(xz);
        }
        let slope = (self.fprime)(xz);
        if !slope.is_finite() {
            self.report.flags.insert(ZeroFlag::RefinementFailed);
            return;
        }
        let before = self.report.locations.len();
        for &(xk, fk) in sides {
            for l in 1..=52 {
                let y = xz + (xk - xz) * 0.5f64.powi(l);
                let fy = (self.f)(y);
                if !fy.is_finite() {
                    self.report.flags.insert(ZeroFlag::RefinementFailed);
                    return;
                }
                if fy.abs() > self.zero_tol && (fy > 0.0) != (fk > 0.0) {
                    self.refine_bracket(xk, fk, y, fy);
                    break;
                }
            }
        }
        let cell = (sides[0].0 - xz).abs();
        if self.report.locations.len() == before && slope.abs() * cell <= self.opts.tangency * self.scale {
            self.report.flags.insert(ZeroFlag::NearTangency);
        }
    }

    fn inspect_dips(&mut self, xs: &[f64], vals: &[f64], signs: &[i8]) {
        let m = xs.len() - 1;
        let threshold = self.opts.dip * self.scale;
        for i in 0..=m {
            if signs[i] == 0 {
                continue;
            }
            let g = |j: usize| vals[j].abs();
            let (lo, hi, estimate) = if i == 0 {
                if signs[1] != signs[0] || g(0) >= g(1) {
                    continue;
                }
                (0, 1, g(0))
            } else if i == m {
                if signs[m - 1] != signs[m] || g(m) >= g(m - 1) {
                    continue;
                }
                (m - 1, m, g(m))
            } else {
                if signs[i - 1] != signs[i] || signs[i + 1] != signs[i] {
                    continue;
                }
                if g(i) > g(i - 1) || g(i) > g(i + 1) {
                    continue;
                }
                let curv = g(i + 1) - 2.0 * g(i) + g(i - 1);
                let est = if curv > 0.0 {
                    g(i) - (g(i + 1) - g(i - 1)).powi(2) / (8.0 * curv)
                } else {
                    g(i)
                };
                (i - 1, i + 1, est)
            };
            if estimate < threshold {
                self.probe(xs[lo], xs[hi], signs[i] as f64, self.opts.max_depth);
            }
        }
    }

    /// Looks for sign changes of `f` in `(lo, hi)` where the grid saw `f`
    /// keep the sign `sgn` at both ends.
    fn probe(&mut self, lo: f64, hi: f64, sgn: f64, depth: u32) {
        let step = (hi - lo) / SUBDIVISIONS as f64;
        let xs: Vec<f64> = (0..=SUBDIVISIONS)
            .map(|j| if j == SUBDIVISIONS { hi } else { lo + step * j as f64 })
            .collect();
        let vals: Vec<f64> = xs.iter().map(|&x| (self.f)(x)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            self.report.flags.insert(ZeroFlag::RefinementFailed);
            return;
        }
        let mut found = false;
        for j in 0..SUBDIVISIONS {
            if (vals[j] * sgn > 0.0) && (vals[j + 1] * sgn <= 0.0) || (vals[j] * sgn <= 0.0) && (vals[j + 1] * sgn > 0.0) {
                found = true;
            }
        }
        if found {
            // refine every crossing at this level
            let mut last = 0usize;
            for j in 1..=SUBDIVISIONS {
                let (pv, cv) = (vals[last], vals[j]);
                if pv == 0.0 {
                    last = j;
                    continue;
                }
                if cv == 0.0 {
                    self.report.locations.push(xs[j]);
                    continue;
                }
                if (pv > 0.0) != (cv > 0.0) {
                    self.refine_bracket(xs[last], pv, xs[j], cv);
                }
                last = j;
            }
            return;
        }
        let (jmin, vmin) = vals
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.abs()))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let (sub_lo, sub_hi) = (xs[jmin.saturating_sub(1)], xs[(jmin + 1).min(SUBDIVISIONS)]);
        if depth > 1 {
            self.probe(sub_lo, sub_hi, sgn, depth - 1);
            return;
        }
        self.critical_point_check(sub_lo, sub_hi, sgn, vmin);
    }

    /// Last resort: locate the extremum of `f` between `lo` and `hi` and test
    /// whether it crosses zero.
    fn critical_point_check(&mut self, lo: f64, hi: f64, sgn: f64, vmin: f64) {
        let (dlo, dhi) = ((self.fprime)(lo), (self.fprime)(hi));
        let mut best = vmin;
        if dlo.is_finite() && dhi.is_finite() && (dlo > 0.0) != (dhi > 0.0) && dlo != 0.0 && dhi != 0.0 {
            let fp = |x: f64| (self.fprime)(x);
            if let Some(xc) = bisect(&fp, lo, dlo, hi, dhi, self.tol_x) {
                let vc = (self.f)(xc);
                if !vc.is_finite() {
                    self.report.flags.insert(ZeroFlag::RefinementFailed);
                    return;
                }
                if vc * sgn < 0.0 {
                    let (flo, fhi) = ((self.f)(lo), (self.f)(hi));
                    self.refine_bracket(lo, flo, xc, vc);
                    self.refine_bracket(xc, vc, hi, fhi);
                    self.report.flags.insert(ZeroFlag::NearTangency);
                    return;
                }
                if vc == 0.0 {
                    self.report.locations.push(xc);
                    self.report.flags.insert(ZeroFlag::NearTangency);
                    return;
                }
                best = best.min(vc.abs());
            }
        }
        if best < self.opts.tangency * self.scale {
            self.report.flags.insert(ZeroFlag::NearTangency);
        }
    }

    fn refine_bracket(&mut self, lo: f64, flo: f64, hi: f64, fhi: f64) {
        match rtsafe(self.f, self.fprime, lo, flo, hi, fhi, self.tol_x) {
            Some(x) => self.report.locations.push(x),
            None => {
                self.report.flags.insert(ZeroFlag::RefinementFailed);
            }
        }
    }
}

/// Newton iteration kept inside a shrinking sign-change bracket.
fn rtsafe<F, D>(f: &F, fprime: &D, mut lo: f64, flo: f64, mut hi: f64, fhi: f64, tol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    // orient so that f(lo) < 0
    if flo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let mut fx = f(x);
    let mut dfx = fprime(x);
    for _ in 0..MAX_REFINE_ITERS {
        if !fx.is_finite() || !dfx.is_finite() {
            return None;
        }
        let newton_ok = dfx != 0.0
            && ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) < 0.0
            && (2.0 * fx).abs() <= (dx_old * dfx).abs();
        dx_old = dx;
        if newton_ok {
            dx = fx / dfx;
            x -= dx;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        }
        if dx.abs() < tol {
            return Some(x);
        }
        fx = f(x);
        dfx = fprime(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo).abs() < tol {
            return Some(0.5 * (lo + hi));
        }
    }
    None
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, glo: f64, mut hi: f64, _ghi: f64, tol: f64) -> Option<f64> {
    let neg_lo = glo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if !gm.is_finite() {
            return None;
        }
        if gm == 0.0 || (hi - lo) < tol {
            return Some(mid);
        }
        if (gm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Counts over each interval of a partition into disjoint intervals.
pub fn joint_counts<F, D>(f: &F, fprime: &D, partition: &[(f64, f64)], opts: &ScanOptions) -> Result<Vec<usize>>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut sorted: Vec<(f64, f64)> = partition.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    if sorted.windows(2).any(|w| w[0].1 > w[1].0) {
        return Err(Error::InvalidArgument("partition intervals overlap".into()));
    }
    partition
        .iter()
        .map(|&(a, b)| count_zeros_window(f, fprime, a, b, opts).map(|r| r.count))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn opts() -> ScanOptions {
        ScanOptions::default()
    }

    #[test]
    fn sine_has_two_zeros() {
        let r = count_zeros_window(&f64::sin, &f64::cos, -1.0, 4.0, &opts()).unwrap();
        assert_eq!(r.count, 2);
        assert!(r.locations[0].abs() < 1e-11);
        assert!((r.locations[1] - PI).abs() < 1e-11);
        assert!(r.flags.is_empty());
    }

    #[test]
    fn positive_function_has_none() {
        let r = count_zeros_window(&|u: f64| u * u + 1.0, &|u: f64| 2.0 * u, -1.0, 1.0, &opts()).unwrap();
        assert_eq!(r.count, 0);
        assert!(r.flags.is_empty());
    }

    #[test]
    fn zero_function_is_degenerate() {
        let e = count_zeros_window(&|_| 0.0, &|_| 0.0, 0.0, 1.0, &opts());
        assert!(matches!(e, Err(Error::DegenerateInput { .. })));
    }

    #[test]
    fn bad_interval_rejected() {
        assert!(count_zeros_window(&f64::sin, &f64::cos, 1.0, 1.0, &opts()).is_err());
    }

    #[test]
    fn endpoints_left_closed() {
        let r = count_zeros_window(&f64::sin, &f64::cos, 0.0, PI, &opts()).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.locations, vec![0.0]);
        assert!(r.has(ZeroFlag::EndpointZero));
        let r = count_zeros_window(&f64::sin, &f64::cos, -PI / 2.0, 0.0, &opts()).unwrap();
        assert_eq!(r.count, 0);
        assert!(r.has(ZeroFlag::EndpointZero));
    }

    #[test]
    fn close_pair_is_resolved() {
        // zeros at 0.5 ± 1e-4, between grid points of a 16-cell scan
        let f = |u: f64| (u - 0.5).powi(2) - 1e-8;
        let fp = |u: f64| 2.0 * (u - 0.5);
        let o = ScanOptions { grid: 16, ..opts() };
        let r = count_zeros_window(&f, &fp, 0.03, 1.0, &o).unwrap();
        assert_eq!(r.count, 2, "{r:?}");
    }

    #[test]
    fn double_zero_is_flagged() {
        let f = |u: f64| (u - 0.4).powi(2) + 1e-14;
        let fp = |u: f64| 2.0 * (u - 0.4);
        let r = count_zeros_window(&f, &fp, 0.03, 1.0, &opts()).unwrap();
        assert_eq!(r.count, 0);
        assert!(r.has(ZeroFlag::NearTangency));
    }

    #[test]
    fn non_finite_values_fail_refinement() {
        let r = count_zeros_window(&|u: f64| if u > 0.5 { f64::NAN } else { u }, &|_| 1.0, 0.1, 1.0, &opts()).unwrap();
        assert!(r.has(ZeroFlag::RefinementFailed));
    }

    #[test]
    fn sign_change_examples() {
        assert_eq!(count_sign_changes(&[1.0, -1.0, 1.0]), 2);
        assert_eq!(count_sign_changes(&[1.0, 1.0, 1.0]), 0);
        assert_eq!(count_sign_changes(&[1.0, 0.0, -1.0]), 1);
        assert_eq!(count_sign_changes(&[0.0, 0.0, -1.0, 0.0]), 0);
    }

    #[test]
    fn joint_count_examples() {
        let c = joint_counts(&f64::sin, &f64::cos, &[(-1.0, 1.0), (2.0, 4.0)], &opts()).unwrap();
        assert_eq!(c, vec![1, 1]);
        let c = joint_counts(&|u: f64| 2.0 + u.sin(), &f64::cos, &[(0.0, 1.0), (1.0, 5.0)], &opts()).unwrap();
        assert_eq!(c, vec![0, 0]);
        assert!(joint_counts(&f64::sin, &f64::cos, &[(0.0, 2.0), (1.0, 3.0)], &opts()).is_err());
    }
}
