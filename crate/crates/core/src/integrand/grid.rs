use std::cmp::Ordering;

use super::IntegrandError;

/// Absolute tolerance when comparing computed and declared spacings.
pub const SPACING_TOLERANCE: f64 = 1e-12;

/// Finite per-period action sets whose points are uniformly separated.
///
/// Actions in each period are deduplicated and stored in lexicographic
/// order; an action is referred to by its index in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    dim: usize,
    periods: Vec<Vec<Vec<f64>>>,
    spacing: Vec<f64>,
    zero: Vec<usize>,
    /// Position of each action in the (norm², lex) order.
    rank: Vec<Vec<usize>>,
    norm_sq: Vec<Vec<f64>>,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("finite coordinates") {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Tie order shared by policy extraction and the brute-force oracle:
/// smaller Euclidean norm first, then lexicographic.
pub fn tie_order(a: &[f64], b: &[f64]) -> Ordering {
    norm_sq(a)
        .partial_cmp(&norm_sq(b))
        .expect("finite coordinates")
        .then_with(|| lex(a, b))
}

/// Minimum pairwise distance between distinct points, `+∞` for one point.
pub fn check_grid_condition(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if lex(a, b) != Ordering::Equal {
                best = best.min(dist(a, b));
            }
        }
    }
    best
}

impl GridDomain {
    /// Validates and normalizes per-period action lists.
    ///
    /// `declared` optionally carries the expected spacing per period; it must
    /// agree with the computed spacing within [`SPACING_TOLERANCE`].
    pub fn new(
        periods: Vec<Vec<Vec<f64>>>,
        declared: Option<&[f64]>,
    ) -> Result<Self, IntegrandError> {
        if periods.is_empty() {
            return Err(IntegrandError::EmptyDomain(0));
        }
        let dim = periods[0].first().map(Vec::len).unwrap_or(0);
        if dim == 0 {
            return Err(IntegrandError::EmptyDomain(0));
        }
        if let Some(dec) = declared {
            if dec.len() != periods.len() {
                return Err(IntegrandError::GridConditionViolation {
                    period: dec.len().min(periods.len()),
                    detail: format!(
                        "{} declared spacings for {} periods",
                        dec.len(),
                        periods.len()
                    ),
                });
            }
        }
        let mut out = Vec::with_capacity(periods.len());
        let mut spacing = Vec::with_capacity(periods.len());
        let mut zero = Vec::with_capacity(periods.len());
        for (t, mut pts) in periods.into_iter().enumerate() {
            if pts.is_empty() {
                return Err(IntegrandError::EmptyDomain(t));
            }
            for p in &pts {
                if p.len() != dim {
                    return Err(IntegrandError::Dimension {
                        expected: dim,
                        got: p.len(),
                    });
                }
                if p.iter().any(|x| !x.is_finite()) {
                    return Err(IntegrandError::NonFinite);
                }
            }
            pts.sort_by(|a, b| lex(a, b));
            pts.dedup_by(|a, b| lex(a, b) == Ordering::Equal);
            let gap = check_grid_condition(&pts);
            if !(gap > 0.0) {
                return Err(IntegrandError::GridConditionViolation {
                    period: t,
                    detail: format!("minimum spacing {gap} is not positive"),
                });
            }
            if let Some(dec) = declared {
                let want = dec[t];
                if !(want > 0.0) {
                    return Err(IntegrandError::GridConditionViolation {
                        period: t,
                        detail: format!("declared spacing {want} is not positive"),
                    });
                }
                let agree = if gap.is_infinite() {
                    true
                } else {
                    (gap - want).abs() <= SPACING_TOLERANCE
                };
                if !agree {
                    return Err(IntegrandError::GridConditionViolation {
                        period: t,
                        detail: format!("declared spacing {want} but points are {gap} apart"),
                    });
                }
            }
            let z = pts
                .iter()
                .position(|p| p.iter().all(|&x| x == 0.0))
                .ok_or(IntegrandError::MissingZero(t))?;
            spacing.push(gap);
            zero.push(z);
            out.push(pts);
        }
        let norm_sq: Vec<Vec<f64>> = out
            .iter()
            .map(|pts| pts.iter().map(|p| norm_sq(p)).collect())
            .collect();
        let rank = out
            .iter()
            .map(|pts| {
                let mut order: Vec<usize> = (0..pts.len()).collect();
                order.sort_by(|&a, &b| tie_order(&pts[a], &pts[b]));
                let mut rank = vec![0; pts.len()];
                for (r, &i) in order.iter().enumerate() {
                    rank[i] = r;
                }
                rank
            })
            .collect();
        Ok(Self {
            dim,
            periods: out,
            spacing,
            zero,
            rank,
            norm_sq,
        })
    }

    /// All integer vectors of `{−r..r}^d` in every one of `horizon` periods.
    pub fn integer_window(dim: usize, horizon: usize, r: u32) -> Result<Self, IntegrandError> {
        let pts = integer_box(&vec![r; dim]);
        Self::new(vec![pts; horizon], None)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    pub fn actions(&self, t: usize) -> &[Vec<f64>] {
        &self.periods[t]
    }

    pub fn action(&self, t: usize, a: usize) -> &[f64] {
        &self.periods[t][a]
    }

    pub fn len(&self, t: usize) -> usize {
        self.periods[t].len()
    }

    pub fn is_empty(&self, t: usize) -> bool {
        self.periods[t].is_empty()
    }

    pub fn spacing(&self, t: usize) -> f64 {
        self.spacing[t]
    }

    pub fn zero_action(&self, t: usize) -> usize {
        self.zero[t]
    }

    pub fn norm_sq(&self, t: usize, a: usize) -> f64 {
        self.norm_sq[t][a]
    }

    /// Position in the tie order; smaller wins.
    pub fn tie_rank(&self, t: usize, a: usize) -> usize {
        self.rank[t][a]
    }

    /// Index of the action equal to `v` in period `t`.
    pub fn locate(&self, t: usize, v: &[f64]) -> Option<usize> {
        if v.len() != self.dim || v.iter().any(|x| !x.is_finite()) {
            return None;
        }
        self.periods[t].binary_search_by(|p| lex(p, v)).ok()
    }

    /// Splits a flat vector of length `d·T` and locates every block.
    pub fn locate_all(&self, x: &[f64]) -> Option<Vec<usize>> {
        if x.len() != self.dim * self.horizon() {
            return None;
        }
        x.chunks(self.dim)
            .enumerate()
            .map(|(t, v)| self.locate(t, v))
            .collect()
    }

    /// Flat `d·T` vector for a sequence of action indices.
    pub fn flatten(&self, actions: &[usize]) -> Vec<f64> {
        actions
            .iter()
            .enumerate()
            .flat_map(|(t, &a)| self.periods[t][a].iter().copied())
            .collect()
    }
}

/// Integer points of `Π_i {−r_i..r_i}` in lexicographic order.
pub fn integer_box(radii: &[u32]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(radii.len())];
    for &r in radii {
        let r = r as i64;
        out = out
            .into_iter()
            .flat_map(|p| {
                (-r..=r).map(move |k| {
                    let mut q = p.clone();
                    q.push(k as f64);
                    q
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_window_spacing_is_one() {
        let g = GridDomain::integer_window(1, 2, 2).unwrap();
        assert_eq!(g.len(0), 5);
        assert_eq!(g.spacing(0), 1.0);
        assert_eq!(g.action(0, g.zero_action(0)), &[0.0]);
    }

    #[test]
    fn half_grid_in_two_dimensions() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![0.0, 0.5],
            vec![0.5, 0.0],
            vec![0.5, 0.5],
        ];
        let g = GridDomain::new(vec![pts], Some(&[0.5])).unwrap();
        assert_eq!(g.spacing(0), 0.5);
    }

    #[test]
    fn duplicates_collapse() {
        let g = GridDomain::new(vec![vec![vec![0.0], vec![1.0], vec![1.0]]], None).unwrap();
        assert_eq!(g.len(0), 2);
        assert_eq!(g.spacing(0), 1.0);
    }

    #[test]
    fn bad_declared_spacing_names_grid_condition() {
        let err = GridDomain::new(vec![vec![vec![0.0], vec![1.0]]], Some(&[0.0])).unwrap_err();
        assert!(err.to_string().contains("grid condition"));
        let err = GridDomain::new(vec![vec![vec![0.0], vec![1.0]]], Some(&[0.5])).unwrap_err();
        assert!(matches!(err, IntegrandError::GridConditionViolation { .. }));
    }

    #[test]
    fn zero_is_required() {
        let err = GridDomain::new(vec![vec![vec![1.0], vec![2.0]]], None).unwrap_err();
        assert_eq!(err, IntegrandError::MissingZero(0));
    }

    #[test]
    fn tie_rank_prefers_small_norm_then_lex() {
        let g = GridDomain::integer_window(1, 1, 1).unwrap();
        let ranked: Vec<f64> = {
            let mut idx: Vec<usize> = (0..3).collect();
            idx.sort_by_key(|&a| g.tie_rank(0, a));
            idx.iter().map(|&a| g.action(0, a)[0]).collect()
        };
        assert_eq!(ranked, vec![0.0, -1.0, 1.0]);
    }

    #[test]
    fn locate_and_flatten() {
        let g = GridDomain::integer_window(2, 2, 1).unwrap();
        let x = [1.0, -1.0, 0.0, 1.0];
        let idx = g.locate_all(&x).unwrap();
        assert_eq!(g.flatten(&idx), x.to_vec());
        assert!(g.locate_all(&[2.0, 0.0, 0.0, 0.0]).is_none());
        assert!(g.locate_all(&[0.5, 0.0, 0.0, 0.0]).is_none());
    }
}
