//! Escape norms on groups and their Lie-algebra counterpart.
//!
//! The escape norm of `g` relative to a symmetric set `A` is `1/(m+1)` for
//! the longest initial run `g^0, ..., g^m` inside `A`, zero when the powers
//! never leave. On finite groups powers cycle, so the norm is exact. The
//! algebra quantity `|v|_B` is the reciprocal of the first exit time of the
//! one-parameter flow `exp(t v)` from `B`, bracketed by a grid walk plus
//! bisection. A convex-hull gauge upgrades the sampled unit set of `|.|_B`
//! to a genuine norm.

use alloc::vec::Vec;

use crate::group::{El, FinGroup, MElem, ModelGroup, SymSet, Target, TargetSet, TElem};
use crate::lp::lp_min;
use crate::math::{self, fmax, fmin};

/// Default power-enumeration cutoff for non-finite carriers.
pub const DEFAULT_M_CAP: usize = 1_000_000;

/// Escape norm on a finite group; exact because powers cycle.
pub fn escape_norm(g: &FinGroup, a: &SymSet, el: El) -> f64 {
    let id = g.id();
    if !a.contains(&id) {
        return f64::INFINITY;
    }
    let mut p = el;
    let mut j = 1u64;
    let bound = g.order() as u64 + 1;
    while j <= bound {
        if p == id {
            return 0.0; // cycled through a full subgroup inside A
        }
        if !a.contains(&p) {
            return 1.0 / j as f64;
        }
        p = g.mul(p, el);
        j += 1;
    }
    0.0
}

/// Escape norm on a model group with an explicit power cap; early cycle
/// detection returns an exact zero.
pub fn escape_norm_model(
    m: &ModelGroup,
    set: &TargetSet,
    el: &MElem,
    m_cap: usize,
) -> f64 {
    let target = Target::Model(m.clone());
    let id = m.id();
    if !set.contains(&target, &target.id()) {
        return f64::INFINITY;
    }
    let mut p = el.clone();
    for j in 1..=m_cap as u64 {
        if m.dist(&p, &id) < 1e-12 {
            return 0.0;
        }
        if !set.contains(&target, &TElem::Model(p.clone())) {
            return 1.0 / j as f64;
        }
        p = m.mul(&p, el);
    }
    0.0
}

/// Zero set of the escape norm, with a closure audit: products of zero-norm
/// elements must stay zero-norm for the set to be a subgroup.
#[derive(Clone, Debug)]
pub struct ZeroSetResult {
    pub members: Vec<El>,
    pub is_subgroup: bool,
    /// A pair whose product leaves the zero set, when closure fails.
    pub anomaly: Option<(El, El)>,
}

pub fn zero_set(g: &FinGroup, a: &SymSet) -> Result<ZeroSetResult, crate::group::GroupError> {
    let members: Vec<El> = g
        .elements()?
        .into_iter()
        .filter(|&e| escape_norm(g, a, e) == 0.0)
        .collect();
    let set: alloc::collections::BTreeSet<El> = members.iter().copied().collect();
    let mut anomaly = None;
    'outer: for &x in &members {
        for &y in &members {
            if !set.contains(&g.mul(x, y)) {
                anomaly = Some((x, y));
                break 'outer;
            }
        }
    }
    Ok(ZeroSetResult { is_subgroup: anomaly.is_none(), members, anomaly })
}

/// First exit time of a one-parameter flow, or `Infinite` when the flow
/// stays inside up to the horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau {
    Exit(f64),
    Infinite,
}

impl Tau {
    /// The algebra escape quantity `1/tau`, zero for a non-exiting flow.
    pub fn algebra_norm(&self) -> f64 {
        match self {
            Tau::Exit(t) => 1.0 / t,
            Tau::Infinite => 0.0,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Tau::Exit(t) => Some(*t),
            Tau::Infinite => None,
        }
    }
}

fn bracket_exit<F: Fn(f64) -> bool>(inside: F, grid_h: f64, t_max: f64) -> Tau {
    let mut t = grid_h;
    let mut prev = 0.0;
    while t <= t_max {
        if !inside(t) {
            // bisect [prev, t] down to relative error 1e-6
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > 1e-6 * hi.max(1e-12) {
                let mid = 0.5 * (lo + hi);
                if inside(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Tau::Exit(hi);
        }
        prev = t;
        t += grid_h;
    }
    Tau::Infinite
}

/// Exit time of `exp(t v)` from a region of a model group.
pub fn tau_model(
    m: &ModelGroup,
    set: &TargetSet,
    v: &[f64],
    grid_h: f64,
    t_max: f64,
) -> Tau {
    let target = Target::Model(m.clone());
    bracket_exit(
        |t| {
            let scaled: Vec<f64> = v.iter().map(|x| x * t).collect();
            set.contains(&target, &TElem::Model(m.exp(&scaled)))
        },
        grid_h,
        t_max,
    )
}

/// Exit time of the rounded flow `t -> exp_grid(t v)` from a subset of a
/// finite grid group.
pub fn tau_grid(g: &FinGroup, b: &SymSet, v: &[f64], grid_h: f64, t_max: f64) -> Tau {
    bracket_exit(
        |t| {
            let scaled: Vec<f64> = v.iter().map(|x| x * t).collect();
            match g.exp_grid(&scaled) {
                Ok(e) => b.contains(&e),
                Err(_) => false,
            }
        },
        grid_h,
        t_max,
    )
}

/// Pair `(tau, |v|_B)` as the spec's operations return them.
pub fn tau_and_algebra_norm(
    m: &ModelGroup,
    set: &TargetSet,
    v: &[f64],
    grid_h: f64,
    t_max: f64,
) -> (Tau, f64) {
    let t = tau_model(m, set, v, grid_h, t_max);
    let n = t.algebra_norm();
    (t, n)
}

/// Comparison of `|v|_B` against the small-time ratio of escape norms, with
/// the two one-sided chains checked separately.
#[derive(Clone, Debug)]
pub struct LimsupReport {
    pub algebra_norm: f64,
    pub ratios: Vec<(f64, f64)>,
    pub max_error: f64,
    pub lower_chain_ok: bool,
    pub upper_chain_ok: bool,
}

/// Evaluates `||exp(t v)||_B / t` along `t = tau/m` for the given `m`s and
/// reports errors against `|v|_B = 1/tau`; the lower chain asserts the ratio
/// at `t = tau/m` is at least `1/(m tau)`, the upper chain asserts escape
/// norms never beat `t/tau`.
pub fn check_limsup_formula(
    m: &ModelGroup,
    set: &TargetSet,
    v: &[f64],
    ms: &[u32],
    grid_h: f64,
    t_max: f64,
    m_cap: usize,
) -> LimsupReport {
    let (tau, vnorm) = tau_and_algebra_norm(m, set, v, grid_h, t_max);
    let mut ratios = Vec::new();
    let mut max_error = 0.0_f64;
    let mut lower_ok = true;
    let mut upper_ok = true;
    match tau {
        Tau::Infinite => {
            for &k in ms {
                let t = 1.0 / k as f64;
                let scaled: Vec<f64> = v.iter().map(|x| x * t).collect();
                let norm = escape_norm_model(m, set, &m.exp(&scaled), m_cap);
                let ratio = norm / t;
                max_error = fmax(max_error, ratio);
                ratios.push((t, ratio));
            }
        }
        Tau::Exit(tv) => {
            for &k in ms {
                let t = tv / k as f64;
                let scaled: Vec<f64> = v.iter().map(|x| x * t).collect();
                let norm = escape_norm_model(m, set, &m.exp(&scaled), m_cap);
                let ratio = norm / t;
                ratios.push((t, ratio));
                max_error = fmax(max_error, (ratio - vnorm).abs());
                // tau is bracketed to 1e-6; keep a matching slack.
                if norm + 1e-9 < 1.0 / (k as f64 + 1.0) {
                    lower_ok = false;
                }
                if norm > t / tv * (1.0 + 1e-3) + 1e-9 {
                    upper_ok = false;
                }
            }
        }
    }
    LimsupReport {
        algebra_norm: vnorm,
        ratios,
        max_error,
        lower_chain_ok: lower_ok,
        upper_chain_ok: upper_ok,
    }
}

/// Empirical subadditivity constant and the words that witness zero-set
/// closure failures (nonzero product of zero-norm factors).
#[derive(Clone, Debug)]
pub struct GleasonEstimate {
    /// Max over sampled words of norm(product) / sum of norms. A certified
    /// lower bound on any valid constant for this context.
    pub c0: f64,
    pub words_used: usize,
    pub violations: Vec<usize>,
}

pub fn estimate_gleason_constant(g: &FinGroup, a: &SymSet, words: &[Vec<El>]) -> GleasonEstimate {
    let mut c0 = 0.0_f64;
    let mut used = 0;
    let mut violations = Vec::new();
    for (i, w) in words.iter().enumerate() {
        if w.is_empty() {
            continue;
        }
        let mut prod = g.id();
        let mut denom = 0.0;
        for &x in w {
            prod = g.mul(prod, x);
            denom += escape_norm(g, a, x);
        }
        let num = escape_norm(g, a, prod);
        if denom == 0.0 {
            if num > 0.0 {
                violations.push(i);
            }
            continue;
        }
        used += 1;
        c0 = fmax(c0, num / denom);
    }
    GleasonEstimate { c0, words_used: used, violations }
}

pub fn estimate_gleason_constant_model(
    m: &ModelGroup,
    set: &TargetSet,
    words: &[Vec<MElem>],
    m_cap: usize,
) -> GleasonEstimate {
    let mut c0 = 0.0_f64;
    let mut used = 0;
    let mut violations = Vec::new();
    for (i, w) in words.iter().enumerate() {
        if w.is_empty() {
            continue;
        }
        let mut prod = m.id();
        let mut denom = 0.0;
        for x in w {
            prod = m.mul(&prod, x);
            denom += escape_norm_model(m, set, x, m_cap);
        }
        let num = escape_norm_model(m, set, &prod, m_cap);
        if denom == 0.0 {
            if num > 0.0 {
                violations.push(i);
            }
            continue;
        }
        used += 1;
        c0 = fmax(c0, num / denom);
    }
    GleasonEstimate { c0, words_used: used, violations }
}

#[derive(Clone, Debug)]
pub struct QuasinormReport {
    pub all_hold: bool,
    pub worst_slack: f64,
    pub checked: usize,
}

/// Verifies `|v_1 + ... + v_m|_B <= 2 C0 (|v_1|_B + ... + |v_m|_B)` for each
/// sampled tuple.
pub fn check_quasinorm(
    m: &ModelGroup,
    set: &TargetSet,
    tuples: &[Vec<Vec<f64>>],
    c0: f64,
    grid_h: f64,
    t_max: f64,
) -> QuasinormReport {
    let mut worst = f64::INFINITY;
    let mut all = true;
    let mut checked = 0;
    for tuple in tuples {
        if tuple.is_empty() {
            continue;
        }
        let dim = tuple[0].len();
        let mut sum = alloc::vec![0.0; dim];
        let mut rhs = 0.0;
        for v in tuple {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            rhs += tau_model(m, set, v, grid_h, t_max).algebra_norm();
        }
        let lhs = tau_model(m, set, &sum, grid_h, t_max).algebra_norm();
        let slack = 2.0 * c0 * rhs - lhs;
        worst = fmin(worst, slack);
        if slack < -1e-9 {
            all = false;
        }
        checked += 1;
    }
    QuasinormReport { all_hold: all, worst_slack: worst, checked }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HullError {
    Degenerate { null_direction: Vec<f64> },
    NoSamples,
}

impl core::fmt::Display for HullError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HullError::Degenerate { null_direction } => {
                write!(f, "sampled unit set is not full-dimensional; deficient along {null_direction:?}")
            }
            HullError::NoSamples => write!(f, "no finite boundary samples"),
        }
    }
}

impl core::error::Error for HullError {}

/// Minkowski gauge of the convex hull of a symmetric point sample.
/// Membership scaling is answered by linear feasibility.
#[derive(Clone, Debug)]
pub struct GaugeEvaluator {
    pub points: Vec<Vec<f64>>,
    pub dim: usize,
}

impl GaugeEvaluator {
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self, HullError> {
        if points.is_empty() {
            return Err(HullError::NoSamples);
        }
        let dim = points[0].len();
        // Rank check by Gaussian elimination; on deficiency report a
        // direction orthogonal to the span.
        let mut rows: Vec<Vec<f64>> = points.clone();
        let mut rank = 0;
        for col in 0..dim {
            let Some(pividx) = (rank..rows.len()).max_by(|&a, &b| {
                rows[a][col].abs().total_cmp(&rows[b][col].abs())
            }) else {
                break;
            };
            if rows[pividx][col].abs() < 1e-10 {
                continue;
            }
            rows.swap(rank, pividx);
            let piv = rows[rank][col];
            for r in 0..rows.len() {
                if r != rank {
                    let f = rows[r][col] / piv;
                    for c in 0..dim {
                        let upd = rows[rank][c] * f;
                        rows[r][c] -= upd;
                    }
                }
            }
            rank += 1;
            if rank == dim {
                break;
            }
        }
        if rank < dim {
            // Solve span^T x = 0 by inspecting the eliminated system: any
            // unit vector not reached is a certificate; fall back to the
            // first standard basis direction with tiny projections.
            let mut null_dir = alloc::vec![0.0; dim];
            'axes: for axis in 0..dim {
                let mut e = alloc::vec![0.0; dim];
                e[axis] = 1.0;
                // Gram-Schmidt of e against the row space.
                let mut resid = e.clone();
                for r in rows.iter().take(rank) {
                    let n2: f64 = r.iter().map(|x| x * x).sum();
                    if n2 < 1e-20 {
                        continue;
                    }
                    let proj: f64 = r.iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>() / n2;
                    for (x, rv) in resid.iter_mut().zip(r) {
                        *x -= proj * rv;
                    }
                }
                if math::norm(&resid) > 1e-6 {
                    null_dir = resid;
                    break 'axes;
                }
            }
            return Err(HullError::Degenerate { null_direction: null_dir });
        }
        Ok(Self { points, dim })
    }

    /// `gauge(v) = min { sum mu : sum mu_i d_i = v, mu >= 0 }`; with a
    /// symmetric sample the mass can always be burned on antipodal pairs, so
    /// this equals the Minkowski functional of the hull.
    pub fn gauge(&self, v: &[f64]) -> Option<f64> {
        if math::norm(v) < 1e-15 {
            return Some(0.0);
        }
        let n = self.points.len();
        let c = alloc::vec![1.0; n];
        let mut rows = Vec::with_capacity(self.dim);
        let mut rhs = Vec::with_capacity(self.dim);
        for d in 0..self.dim {
            rows.push(self.points.iter().map(|p| p[d]).collect());
            rhs.push(v[d]);
        }
        lp_min(&c, &rows, &rhs).map(|(obj, _)| obj)
    }
}

/// Builds the gauge of the sampled unit set `D = { v : |v|_B <= 1 }`:
/// boundary points `tau(u) u` over the given directions, symmetrized.
pub fn convex_hull_norm(
    m: &ModelGroup,
    set: &TargetSet,
    dirs: &[Vec<f64>],
    grid_h: f64,
    t_max: f64,
) -> Result<GaugeEvaluator, HullError> {
    let mut points = Vec::new();
    for u in dirs {
        let n = math::norm(u);
        if n < 1e-15 {
            continue;
        }
        let unit: Vec<f64> = u.iter().map(|x| x / n).collect();
        if let Tau::Exit(t) = tau_model(m, set, &unit, grid_h, t_max) {
            let b: Vec<f64> = unit.iter().map(|x| x * t).collect();
            points.push(b.iter().map(|x| -x).collect());
            points.push(b);
        }
    }
    GaugeEvaluator::from_points(points)
}

/// Report of the factor-two lower-semicontinuity bound for the escape norm
/// along a convergent sequence, together with the hypothesis audit on `A`
/// (squares of near-boundary elements must leave the closure).
#[derive(Clone, Debug)]
pub struct NormContinuityReport {
    pub hypothesis_ok: bool,
    pub hypothesis_witness: Option<MElem>,
    pub bound_ok: bool,
    pub g_norm: f64,
    pub tail_liminf: f64,
}

/// The hypothesis asks: every `h` in the closed triple product of `A` but
/// outside `A` has `h^2` outside the closure of `A`. Checked by dense
/// sampling for circle carriers, net sampling otherwise. The bound then
/// compares `||g||` against twice the liminf surrogate (tail minimum) of
/// `||g_j||`.
pub fn check_norm_continuity_bound(
    m: &ModelGroup,
    a: &TargetSet,
    g: &MElem,
    seq: &[MElem],
    m_cap: usize,
) -> NormContinuityReport {
    let target = Target::Model(m.clone());
    let closure3 = match a {
        TargetSet::Ball { radius, .. } => TargetSet::Ball { radius: 3.0 * radius, closed: true },
        other => other.clone(),
    };
    let closure1 = match a {
        TargetSet::Ball { radius, .. } => TargetSet::Ball { radius: *radius, closed: true },
        other => other.clone(),
    };

    let mut hypothesis_ok = true;
    let mut witness = None;
    let candidates: Vec<MElem> = match m {
        ModelGroup::Torus { radii } if radii.len() == 1 => {
            // Dense inclusive sweep of the circle, endpoint included so the
            // antipode is always probed.
            let steps = 4096;
            (0..=steps)
                .map(|k| {
                    let t = -core::f64::consts::PI
                        + 2.0 * core::f64::consts::PI * k as f64 / steps as f64;
                    MElem::Coords(alloc::vec![math::wrap_angle(t)])
                })
                .collect()
        }
        _ => closure3
            .net(&target, 0.05)
            .into_iter()
            .filter_map(|e| match e {
                TElem::Model(x) => Some(x),
                _ => None,
            })
            .collect(),
    };
    for h in candidates {
        let he = TElem::Model(h.clone());
        if closure3.contains(&target, &he) && !a.contains(&target, &he) {
            let h2 = m.mul(&h, &h);
            if closure1.contains(&target, &TElem::Model(h2)) {
                hypothesis_ok = false;
                witness = Some(h);
                break;
            }
        }
    }

    let g_norm = escape_norm_model(m, a, g, m_cap);
    let tail = seq.len().div_ceil(4).max(1);
    let tail_liminf = seq
        .iter()
        .skip(seq.len() - tail.min(seq.len()))
        .map(|x| escape_norm_model(m, a, x, m_cap))
        .fold(f64::INFINITY, fmin);
    let bound_ok = g_norm <= 2.0 * tail_liminf + 1e-12;
    NormContinuityReport { hypothesis_ok, hypothesis_witness: witness, bound_ok, g_norm, tail_liminf }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    #[test]
    fn identity_has_zero_norm() {
        let g = FinGroup::CyclicLine { n: 21, step: 1.0 };
        let a = SymSet::from_iter([g.canon([-1, 0, 0]), [0, 0, 0], [1, 0, 0]]);
        assert_eq!(escape_norm(&g, &a, g.id()), 0.0);
    }

    #[test]
    fn truncated_integers_step_one() {
        // A = {-1, 0, 1}: 1^2 = 2 leaves at the second power.
        let g = FinGroup::CyclicLine { n: 21, step: 1.0 };
        let a = SymSet::from_iter([g.canon([-1, 0, 0]), [0, 0, 0], [1, 0, 0]]);
        assert_eq!(escape_norm(&g, &a, [1, 0, 0]), 0.5);
        assert_eq!(escape_norm(&g, &a, g.canon([-1, 0, 0])), 0.5);
        assert_eq!(escape_norm(&g, &a, [2, 0, 0]), 1.0);
    }

    #[test]
    fn norm_symmetric_under_inverse() {
        let g = FinGroup::Cyclic { n: 24, step: 2.0 * PI / 24.0 };
        let a = SymSet::from_iter(
            g.elements().unwrap().into_iter().filter(|&e| g.dist_to_id(e) < 1.0),
        );
        for e in g.elements().unwrap() {
            assert_eq!(escape_norm(&g, &a, e), escape_norm(&g, &a, g.inv(e)));
        }
    }

    #[test]
    fn zero_norm_powers_stay_zero() {
        let g = FinGroup::Cyclic { n: 24, step: 2.0 * PI / 24.0 };
        let a = SymSet::from_iter(
            g.elements().unwrap().into_iter().filter(|&e| g.dist_to_id(e) < 1.0),
        );
        for e in g.elements().unwrap() {
            if escape_norm(&g, &a, e) == 0.0 {
                for k in 0..24 {
                    assert_eq!(escape_norm(&g, &a, g.pow(e, k)), 0.0);
                }
            }
        }
    }

    #[test]
    fn circle_arc_exit_count() {
        // Rotation by alpha inside an open arc of half-angle theta escapes
        // after floor(theta/alpha)+1 steps.
        let m = ModelGroup::Torus { radii: vec![1.0] };
        let theta = 1.0;
        let set = TargetSet::Ball { radius: theta, closed: false };
        for &alpha in &[0.13, 0.29, 0.47] {
            let g = m.exp(&[alpha]);
            let norm = escape_norm_model(&m, &set, &g, 10_000);
            let expected = 1.0 / (math::floor(theta / alpha) + 1.0);
            assert!((norm - expected).abs() < 1e-12, "alpha {alpha}");
        }
    }

    #[test]
    fn zero_set_closure_on_circle_grid() {
        let g = FinGroup::Cyclic { n: 12, step: 2.0 * PI / 12.0 };
        let a = SymSet::from_iter(g.elements().unwrap()); // whole group
        let z = zero_set(&g, &a).unwrap();
        assert!(z.is_subgroup);
        assert_eq!(z.members.len(), 12);

        let small = SymSet::from_iter([g.id()]);
        let z = zero_set(&g, &small).unwrap();
        assert_eq!(z.members, vec![g.id()]);
    }

    #[test]
    fn euclidean_tau_is_inverse_speed() {
        let m = ModelGroup::Euclidean { dim: 2 };
        let b = TargetSet::Ball { radius: 1.0, closed: false };
        let (tau, n) = tau_and_algebra_norm(&m, &b, &[0.5, 0.0], 0.01, 100.0);
        let t = tau.value().unwrap();
        assert!((t - 2.0).abs() < 1e-5);
        assert!((n - 0.5).abs() < 1e-5);
    }

    #[test]
    fn circle_tau_is_arc_over_speed() {
        let m = ModelGroup::Torus { radii: vec![1.0] };
        let b = TargetSet::Ball { radius: 0.7, closed: false };
        let (tau, _) = tau_and_algebra_norm(&m, &b, &[1.0], 0.01, 100.0);
        assert!((tau.value().unwrap() - 0.7).abs() < 1e-5);
    }

    #[test]
    fn rotation_tau_matches_angle_formula() {
        let m = ModelGroup::Rotations;
        let b = TargetSet::Ball { radius: 0.5, closed: false };
        let v = [0.0, 1.0, 0.0];
        let (tau, _) = tau_and_algebra_norm(&m, &b, &v, 0.01, 100.0);
        assert!((tau.value().unwrap() - 0.5).abs() < 1e-5);
    }

    #[test]
    fn non_exiting_flow_flagged() {
        let m = ModelGroup::Euclidean { dim: 1 };
        let b = TargetSet::All;
        let (tau, n) = tau_and_algebra_norm(&m, &b, &[1.0], 0.1, 10.0);
        assert_eq!(tau, Tau::Infinite);
        assert_eq!(n, 0.0);
    }

    #[test]
    fn limsup_on_line() {
        let m = ModelGroup::Euclidean { dim: 1 };
        let b = TargetSet::Ball { radius: 1.0, closed: false };
        let ms: Vec<u32> = (1..=100).collect();
        let rep = check_limsup_formula(&m, &b, &[1.0], &ms, 0.01, 50.0, 100_000);
        assert!((rep.algebra_norm - 1.0).abs() < 1e-5);
        assert!(rep.lower_chain_ok);
        assert!(rep.upper_chain_ok);
        for (i, &(_, r)) in rep.ratios.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!((r - 1.0).abs() <= 1.0 / k + 1e-3, "ratio at m={k}: {r}");
        }
    }

    #[test]
    fn gleason_on_s3_like_table() {
        use crate::group::TableGroup;
        use crate::iso::full_isometry_group;
        use crate::metric::FiniteMetricSpace;
        let sp = FiniteMetricSpace::new(
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            0,
        )
        .unwrap();
        let iso = full_isometry_group(&sp).unwrap();
        let g = FinGroup::Table(TableGroup::from_isometries(&sp, &iso));
        // B = {e, one involution}
        let els = g.elements().unwrap();
        let invol = els
            .iter()
            .copied()
            .find(|&e| e != g.id() && g.mul(e, e) == g.id())
            .unwrap();
        let a = SymSet::from_iter([g.id(), invol]);
        let mut words = Vec::new();
        for &x in &els {
            words.push(vec![x]);
            for &y in &els {
                words.push(vec![x, y]);
                for &z in &els {
                    words.push(vec![x, y, z]);
                }
            }
        }
        let est = estimate_gleason_constant(&g, &a, &words);
        assert!(est.violations.is_empty());
        assert_eq!(est.c0, 1.0);
    }

    #[test]
    fn quasinorm_euclidean_exact() {
        let m = ModelGroup::Euclidean { dim: 2 };
        let b = TargetSet::Ball { radius: 1.0, closed: false };
        let tuples = vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.3, 0.4], vec![-0.2, 0.9], vec![0.5, 0.5]],
        ];
        let rep = check_quasinorm(&m, &b, &tuples, 1.0, 0.005, 200.0);
        assert!(rep.all_hold);
        assert_eq!(rep.checked, 2);
    }

    #[test]
    fn gauge_of_cross_polytope_is_l1() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let ev = GaugeEvaluator::from_points(pts).unwrap();
        assert!((ev.gauge(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-9);
        assert!((ev.gauge(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-9);
        assert!((ev.gauge(&[-0.3, 0.4]).unwrap() - 0.7).abs() < 1e-9);
        assert!((ev.gauge(&[0.0, 0.0]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn gauge_axioms_on_samples() {
        let pts = vec![
            vec![1.0, 0.2],
            vec![-1.0, -0.2],
            vec![0.1, 0.9],
            vec![-0.1, -0.9],
            vec![0.7, -0.6],
            vec![-0.7, 0.6],
        ];
        let ev = GaugeEvaluator::from_points(pts).unwrap();
        let probes = [[0.4, 0.1], [-0.2, 0.6], [0.3, -0.3]];
        for p in probes {
            let gp = ev.gauge(&p).unwrap();
            assert!(gp > 0.0);
            // absolute homogeneity
            let g2 = ev.gauge(&[2.0 * p[0], 2.0 * p[1]]).unwrap();
            assert!((g2 - 2.0 * gp).abs() < 1e-8);
            let gn = ev.gauge(&[-p[0], -p[1]]).unwrap();
            assert!((gn - gp).abs() < 1e-8);
            for q in probes {
                let s = [p[0] + q[0], p[1] + q[1]];
                let gs = ev.gauge(&s).unwrap();
                assert!(gs <= gp + ev.gauge(&q).unwrap() + 1e-8);
            }
        }
    }

    #[test]
    fn degenerate_hull_reports_direction() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        match GaugeEvaluator::from_points(pts) {
            Err(HullError::Degenerate { null_direction }) => {
                assert!(null_direction[1].abs() > 1e-6);
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn euclidean_hull_gauge_matches_norm() {
        let m = ModelGroup::Euclidean { dim: 2 };
        let b = TargetSet::Ball { radius: 1.0, closed: false };
        let dirs: Vec<Vec<f64>> = (0..16)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 16.0;
                vec![math::cos(a), math::sin(a)]
            })
            .collect();
        let ev = convex_hull_norm(&m, &b, &dirs, 0.01, 100.0).unwrap();
        let v = [0.3, 0.4];
        let g = ev.gauge(&v).unwrap();
        // Hull of 32 boundary points of the unit circle: gauge within 2% of
        // the Euclidean norm, never below it.
        assert!(g >= 0.5 - 1e-6);
        assert!(g <= 0.5 * 1.02);
    }

    #[test]
    fn circle_minus_point_fails_hypothesis() {
        let m = ModelGroup::Torus { radii: vec![1.0] };
        // Whole circle minus the antipode.
        let a = TargetSet::Ball { radius: PI, closed: false };
        let g = MElem::Coords(vec![PI]);
        let seq: Vec<MElem> = (1..=40).map(|j| MElem::Coords(vec![PI - 1.0 / j as f64])).collect();
        let rep = check_norm_continuity_bound(&m, &a, &g, &seq, 200_000);
        assert!(!rep.hypothesis_ok);
        assert_eq!(rep.g_norm, 1.0);
        assert_eq!(rep.tail_liminf, 0.0);
        assert!(!rep.bound_ok);
    }

    #[test]
    fn short_arc_satisfies_hypothesis_and_bound() {
        let m = ModelGroup::Torus { radii: vec![1.0] };
        let a = TargetSet::Ball { radius: 0.5, closed: false };
        let g = MElem::Coords(vec![0.21]);
        let seq: Vec<MElem> =
            (1..=40).map(|j| MElem::Coords(vec![0.21 + 0.001 / j as f64])).collect();
        let rep = check_norm_continuity_bound(&m, &a, &g, &seq, 200_000);
        assert!(rep.hypothesis_ok);
        assert!(rep.bound_ok);
    }
}
