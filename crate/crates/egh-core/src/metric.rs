//! Finite pointed metric spaces, balls, Hausdorff distance between point
//! subsets, and monotone families of subsets with jump counting.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math::fmax;
use crate::TOL_METRIC;

/// A finite metric space with a distinguished basepoint. Distances are held
/// as a dense symmetric matrix in abstract length units; scenario generators
/// that rely on exact comparisons produce integer-valued entries.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    basepoint: usize,
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricError {
    NonSquare { rows: usize, cols: usize },
    BadBasepoint { basepoint: usize, n: usize },
    EmptySpace,
    EmptySubset,
    NotNested { index: usize },
    UnsortedParameters { index: usize },
}

impl core::fmt::Display for MetricError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MetricError::NonSquare { rows, cols } => {
                write!(f, "distance matrix is not square: {rows} rows, {cols} cols")
            }
            MetricError::BadBasepoint { basepoint, n } => {
                write!(f, "basepoint {basepoint} out of range for {n} points")
            }
            MetricError::EmptySpace => write!(f, "a metric space needs at least one point"),
            MetricError::EmptySubset => write!(f, "hausdorff distance needs non-empty subsets"),
            MetricError::NotNested { index } => {
                write!(f, "family sets not nested at step {index}")
            }
            MetricError::UnsortedParameters { index } => {
                write!(f, "family parameters not strictly increasing at step {index}")
            }
        }
    }
}

impl core::error::Error for MetricError {}

/// One failed metric axiom, with the offending indices and the slack by
/// which it fails.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricViolation {
    NonZeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize, delta: f64 },
    NonPositive { i: usize, j: usize, value: f64 },
    Triangle { i: usize, j: usize, k: usize, slack: f64 },
}

impl FiniteMetricSpace {
    /// Builds a space from matrix rows. Fails on ragged input or a bad
    /// basepoint; metric axioms are reported by [`validate_metric`] instead
    /// so callers can inspect violations.
    pub fn new(rows: Vec<Vec<f64>>, basepoint: usize) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::EmptySpace);
        }
        for r in &rows {
            if r.len() != n {
                return Err(MetricError::NonSquare { rows: n, cols: r.len() });
            }
        }
        if basepoint >= n {
            return Err(MetricError::BadBasepoint { basepoint, n });
        }
        let mut dist = Vec::with_capacity(n * n);
        for r in rows {
            dist.extend(r);
        }
        Ok(Self { n, dist, basepoint, labels: None })
    }

    pub fn from_flat(n: usize, dist: Vec<f64>, basepoint: usize) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::EmptySpace);
        }
        if dist.len() != n * n {
            return Err(MetricError::NonSquare { rows: n, cols: dist.len() / n.max(1) });
        }
        if basepoint >= n {
            return Err(MetricError::BadBasepoint { basepoint, n });
        }
        Ok(Self { n, dist, basepoint, labels: None })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.dist[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        let mut m = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m = fmax(m, self.d(i, j));
            }
        }
        m
    }

    /// Distance from a point to the nearest member of a non-empty subset.
    pub fn dist_to_set(&self, x: usize, set: &[usize]) -> f64 {
        set.iter().map(|&y| self.d(x, y)).fold(f64::INFINITY, crate::math::fmin)
    }

    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) if i < l.len() => l[i].clone(),
            _ => format!("{i}"),
        }
    }
}

/// Checks the three metric axioms within the absolute tolerance
/// [`TOL_METRIC`]. Returns an empty list exactly when all hold.
pub fn validate_metric(m: &FiniteMetricSpace) -> Vec<MetricViolation> {
    let n = m.len();
    let mut out = Vec::new();
    for i in 0..n {
        if m.d(i, i).abs() > TOL_METRIC {
            out.push(MetricViolation::NonZeroDiagonal { i, value: m.d(i, i) });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            if (m.d(i, j) - m.d(j, i)).abs() > TOL_METRIC {
                if i < j {
                    out.push(MetricViolation::Asymmetric { i, j, delta: m.d(i, j) - m.d(j, i) });
                }
                continue;
            }
            if m.d(i, j) <= TOL_METRIC && i < j {
                out.push(MetricViolation::NonPositive { i, j, value: m.d(i, j) });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let slack = m.d(i, k) - m.d(i, j) - m.d(j, k);
                if slack > TOL_METRIC {
                    out.push(MetricViolation::Triangle { i, j, k, slack });
                }
            }
        }
    }
    out
}

/// Open or closed metric ball as a sorted list of point indices.
pub fn ball(m: &FiniteMetricSpace, center: usize, r: f64, closed: bool) -> Vec<usize> {
    (0..m.len())
        .filter(|&y| {
            let d = m.d(center, y);
            if closed {
                d <= r
            } else {
                d < r
            }
        })
        .collect()
}

/// Hausdorff distance between non-empty subsets.
pub fn hausdorff_distance(
    m: &FiniteMetricSpace,
    a: &[usize],
    b: &[usize],
) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySubset);
    }
    let sup_a = a.iter().map(|&x| m.dist_to_set(x, b)).fold(0.0, fmax);
    let sup_b = b.iter().map(|&y| m.dist_to_set(y, a)).fold(0.0, fmax);
    Ok(fmax(sup_a, sup_b))
}

/// A finite monotone family of point subsets: an increasing parameter list
/// with nested sets, the finite stand-in for a monotone curve of closed sets.
#[derive(Clone, Debug)]
pub struct MonotoneClosedFamily {
    pub parameters: Vec<f64>,
    pub sets: Vec<Vec<usize>>,
}

impl MonotoneClosedFamily {
    pub fn new(parameters: Vec<f64>, sets: Vec<Vec<usize>>) -> Result<Self, MetricError> {
        if parameters.len() != sets.len() {
            return Err(MetricError::NonSquare { rows: parameters.len(), cols: sets.len() });
        }
        for i in 1..parameters.len() {
            if parameters[i] <= parameters[i - 1] {
                return Err(MetricError::UnsortedParameters { index: i });
            }
        }
        let mut sorted: Vec<Vec<usize>> = sets.clone();
        for s in sorted.iter_mut() {
            s.sort_unstable();
            s.dedup();
        }
        for i in 1..sorted.len() {
            let (prev, cur) = (&sorted[i - 1], &sorted[i]);
            if !prev.iter().all(|x| cur.binary_search(x).is_ok()) {
                return Err(MetricError::NotNested { index: i });
            }
        }
        Ok(Self { parameters, sets: sorted })
    }
}

/// Number of consecutive steps whose Hausdorff jump exceeds `gap`. For a
/// family inside a finite space this bounds the discontinuity set of the
/// interpolated curve of sets.
pub fn count_discontinuities(
    f: &MonotoneClosedFamily,
    m: &FiniteMetricSpace,
    gap: f64,
) -> usize {
    let mut count = 0;
    for j in 1..f.sets.len() {
        if f.sets[j - 1].is_empty() {
            if !f.sets[j].is_empty() {
                count += 1;
            }
            continue;
        }
        let d = hausdorff_distance(m, &f.sets[j - 1], &f.sets[j]).unwrap_or(f64::INFINITY);
        if d > gap {
            count += 1;
        }
    }
    count
}

/// Largest cardinality of a `gap`-separated set of non-empty subsets of the
/// space, under the Hausdorff distance. Brute force; meant for spaces with
/// at most 4-5 points where the subset lattice is tiny.
pub fn packing_number(m: &FiniteMetricSpace, gap: f64) -> usize {
    let n = m.len();
    assert!(n <= 5, "packing_number is exponential in the subset lattice");
    let subsets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    let k = subsets.len();
    let mut sep = alloc::vec![alloc::vec![false; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                let d = hausdorff_distance(m, &subsets[i], &subsets[j]).unwrap();
                sep[i][j] = d > gap;
            }
        }
    }
    // Max clique in the separation graph by DFS over <= 31 vertices.
    fn grow(sep: &[Vec<bool>], chosen: &mut Vec<usize>, start: usize, best: &mut usize) {
        *best = (*best).max(chosen.len());
        for v in start..sep.len() {
            if chosen.iter().all(|&u| sep[u][v]) {
                chosen.push(v);
                grow(sep, chosen, v + 1, best);
                chosen.pop();
            }
        }
    }
    let mut best = 0;
    grow(&sep, &mut Vec::new(), 0, &mut best);
    best
}
