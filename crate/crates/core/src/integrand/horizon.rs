//! Evaluation of the horizon function
//! `Ψ^∞(x) = lim_n sup { Ψ(δy)/δ : δ > n, |y − x| < 1/n }`.
//!
//! For a fixed candidate point `p = δy` of the domain, writing `s = 1/δ`,
//! the constraint `|s·p − x| < 1/n` is a quadratic inequality in `s`. Its
//! solution set intersected with `(0, 1/n)` is an open interval, over which
//! `s·Ψ(p)` has an explicit supremum. The estimator maximizes this over a
//! finite candidate set for each `n` of a schedule.

use serde::Serialize;

use super::{feasible_strategies, HorizonSupport, Integrand, IntegrandError, XReal};

/// Agreement required between the last two schedule values.
pub const STABILIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HorizonKind {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizonValue {
    pub value: XReal,
    pub kind: HorizonKind,
}

/// `n = 2^4, 2^5, …, 2^20`.
pub fn default_schedule() -> Vec<f64> {
    (4..=20).map(|k| (1u64 << k) as f64).collect()
}

/// Closed form when available, numeric estimate otherwise.
pub fn horizon(f: &dyn Integrand, leaf: usize, x: &[f64]) -> Result<HorizonValue, IntegrandError> {
    match f.horizon_analytic(leaf, x) {
        Ok(value) => Ok(HorizonValue {
            value,
            kind: HorizonKind::Analytic,
        }),
        Err(IntegrandError::NotAvailable) => {
            horizon_numeric(f, leaf, x, &default_schedule()).map(|value| HorizonValue {
                value,
                kind: HorizonKind::Numeric,
            })
        }
        Err(e) => Err(e),
    }
}

/// Numeric horizon estimate over an increasing schedule of `n` values.
pub fn horizon_numeric(
    f: &dyn Integrand,
    leaf: usize,
    x: &[f64],
    schedule: &[f64],
) -> Result<XReal, IntegrandError> {
    assert!(!schedule.is_empty(), "empty radii schedule");
    let bounded: Vec<(Vec<f64>, XReal)> = match f.horizon_support() {
        HorizonSupport::Bounded => {
            let dom = f.domain();
            feasible_strategies(f)
                .into_iter()
                .map(|s| {
                    let p = dom.flatten(&s);
                    let v = f.terminal_value(leaf, &s);
                    (p, v)
                })
                .filter(|(_, v)| v.is_finite())
                .collect()
        }
        HorizonSupport::IntegerLattice => Vec::new(),
    };
    let values: Vec<XReal> = schedule
        .iter()
        .map(|&n| match f.horizon_support() {
            HorizonSupport::Bounded => bounded
                .iter()
                .map(|(p, v)| candidate_sup(p, *v, x, n))
                .max()
                .unwrap_or(XReal::NEG_INF),
            HorizonSupport::IntegerLattice => lattice_candidates(x, n)
                .into_iter()
                .map(|p| {
                    let v = f.evaluate_unbounded(leaf, &p);
                    if v.is_neg_inf() {
                        XReal::NEG_INF
                    } else {
                        candidate_sup(&p, v, x, n)
                    }
                })
                .max()
                .unwrap_or(XReal::NEG_INF),
        })
        .collect();
    stabilize(&values, schedule)
}

/// Accepts the estimate once the last two schedule values agree, after
/// removing the `O(1/n)` term by Richardson extrapolation.
fn stabilize(values: &[XReal], schedule: &[f64]) -> Result<XReal, IntegrandError> {
    let k = values.len() - 1;
    let last = values[k];
    let prev = values[k.saturating_sub(1)];
    match (prev.finite(), last.finite()) {
        (None, None) => Ok(XReal::NEG_INF),
        (Some(a), Some(b)) => {
            let limit = if k == 0 {
                b
            } else {
                let rho = schedule[k] / schedule[k - 1];
                (rho * b - a) / (rho - 1.0)
            };
            if limit.abs() <= STABILIZATION_TOLERANCE && b.abs() <= a.abs() {
                Ok(XReal::ZERO)
            } else if (a - b).abs() <= STABILIZATION_TOLERANCE {
                Ok(last)
            } else {
                Err(IntegrandError::NotStabilized(prev, last))
            }
        }
        _ => Err(IntegrandError::NotStabilized(prev, last)),
    }
}

/// Lattice points near the ray through `x`: roundings of `δx` for a few
/// scales `δ > n`, plus the origin.
fn lattice_candidates(x: &[f64], n: f64) -> Vec<Vec<f64>> {
    let m = (x.len() as f64).sqrt().max(1.0);
    let mut out = vec![vec![0.0; x.len()]];
    for j in 0..4 {
        let delta = n * m * f64::from(1u32 << j);
        out.push(x.iter().map(|&v| (v * delta).round()).collect());
    }
    out
}

/// `sup { s·v : 0 < s < 1/n, |s·p − x| < 1/n }`, `−∞` if no such `s`.
fn candidate_sup(p: &[f64], v: XReal, x: &[f64], n: f64) -> XReal {
    let Some(v) = v.finite() else {
        return XReal::NEG_INF;
    };
    let r = 1.0 / n;
    let a: f64 = p.iter().map(|q| q * q).sum();
    let xx: f64 = x.iter().map(|q| q * q).sum();
    let (lo, hi) = if a == 0.0 {
        if xx < r * r {
            (0.0, r)
        } else {
            return XReal::NEG_INF;
        }
    } else {
        let b: f64 = p.iter().zip(x).map(|(q, y)| q * y).sum();
        // |p|²|x|² − (p·x)² as a sum of squares to avoid cancellation
        let mut cross = 0.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let w = p[i] * x[j] - p[j] * x[i];
                cross += w * w;
            }
        }
        let disc = a * r * r - cross;
        if disc <= 0.0 {
            return XReal::NEG_INF;
        }
        let sq = disc.sqrt();
        let lo = ((b - sq) / a).max(0.0);
        let hi = ((b + sq) / a).min(r);
        if lo >= hi {
            return XReal::NEG_INF;
        }
        (lo, hi)
    };
    XReal::from_f64(if v >= 0.0 { v * hi } else { v * lo })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_interval_for_aligned_point() {
        // p = 10·x exactly: s = 0.1 is admissible once 0.1 < 1/n
        let x = [1.0, 0.0];
        let p = [10.0, 0.0];
        let v = candidate_sup(&p, XReal::from_f64(2.0), &x, 4.0);
        // s ranges over (0.1 − 1/40, min(0.1 + 1/40, 1/4))
        assert!((v.to_f64() - 2.0 * 0.125).abs() < 1e-12);
        assert!(candidate_sup(&p, XReal::from_f64(1.0), &x, 20.0).is_neg_inf());
    }

    #[test]
    fn origin_candidate_needs_small_x() {
        let v = candidate_sup(&[0.0], XReal::from_f64(-1.0), &[0.0], 8.0);
        assert_eq!(v, XReal::ZERO);
        assert!(candidate_sup(&[0.0], XReal::from_f64(1.0), &[0.5], 8.0).is_neg_inf());
    }

    #[test]
    fn stabilization_rule() {
        let f = XReal::from_f64;
        let n = [1.0, 2.0, 4.0];
        assert_eq!(stabilize(&[f(1.0), f(2e-7), f(1e-7)], &n).unwrap(), XReal::ZERO);
        // c/n decay is recognised as a zero limit
        assert_eq!(stabilize(&[f(4.0), f(2.0), f(1.0)], &n).unwrap(), XReal::ZERO);
        assert_eq!(stabilize(&[f(-1.0), f(-1.0)], &n[..2]).unwrap(), f(-1.0));
        assert!(stabilize(&[XReal::NEG_INF, XReal::NEG_INF], &n[..2])
            .unwrap()
            .is_neg_inf());
        assert!(stabilize(&[f(-1.0), XReal::NEG_INF], &n[..2]).is_err());
        assert!(stabilize(&[f(-1.0), f(-2.0)], &n[..2]).is_err());
    }
}
