//! Pointed and equivariant Gromov-Hausdorff distances between finite
//! triples, realized through correspondences.
//!
//! A correspondence `R` (surjective both ways, containing the basepoint
//! pair) induces cross-distances `d(x,y) = min over (x',y') in R of
//! d_X(x,x') + eps/2 + d_Y(y',y)`; this is a metric on the disjoint union
//! exactly when the distortion of `R` is at most `eps`. Feasibility of an
//! `eps`-approximation is decided literally against the five defining
//! conditions (ball coverage both ways with the `1/eps` cutoffs, basepoint
//! proximity, and the displacement inequalities for the element maps), and
//! the least feasible `eps` is bracketed by bisection under the `1/5` cap.
//!
//! Exact regime: spaces up to 8 points (pointed) or 6 points with groups up
//! to order 24 (equivariant), searched by branch and bound over cliques of
//! the pair-compatibility graph. Beyond it, results are bounds-only: a
//! combinatorial relaxation from below, simulated annealing over partner
//! maps from above. Degenerate shapes (either side a single point) force a
//! unique correspondence and stay exact at any size.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::iso::{is_isometry, Isometry, IsometryGroup};
use crate::math::{fmax, fmin};
use crate::metric::{validate_metric, FiniteMetricSpace};
use crate::TOL_GH;

/// The hard cap of the distance: the infimum is taken together with 1/5.
pub const EPS_CAP: f64 = 0.2;

/// A pointed space with a group of isometries acting on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Triple {
    pub space: FiniteMetricSpace,
    pub group: IsometryGroup,
}

impl Triple {
    pub fn new(space: FiniteMetricSpace, group: IsometryGroup) -> Result<Self, GhError> {
        for (i, g) in group.elements.iter().enumerate() {
            if !is_isometry(&space, g) {
                return Err(GhError::GroupDoesNotAct { element: i });
            }
        }
        Ok(Self { space, group })
    }

    pub fn pointed(space: FiniteMetricSpace) -> Self {
        let n = space.len();
        Self { space, group: IsometryGroup::trivial(n) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GhError {
    GroupDoesNotAct { element: usize },
    Precondition(String),
    NotSurjective,
    MissingBasepointPair,
}

impl core::fmt::Display for GhError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GhError::GroupDoesNotAct { element } => {
                write!(f, "group element {element} does not preserve the space")
            }
            GhError::Precondition(s) => write!(f, "precondition violated: {s}"),
            GhError::NotSurjective => write!(f, "correspondence misses a point"),
            GhError::MissingBasepointPair => write!(f, "correspondence misses the basepoint pair"),
        }
    }
}

impl core::error::Error for GhError {}

/// A relation between two point sets, surjective onto both, with its
/// cached distortion.
#[derive(Clone, Debug)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
    pub distortion: f64,
}

pub fn distortion(mx: &FiniteMetricSpace, my: &FiniteMetricSpace, pairs: &[(usize, usize)]) -> f64 {
    let mut d = 0.0;
    for (i, &(x, y)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[i..] {
            d = fmax(d, (mx.d(x, x2) - my.d(y, y2)).abs());
        }
    }
    d
}

impl Correspondence {
    pub fn new(
        mx: &FiniteMetricSpace,
        my: &FiniteMetricSpace,
        pairs: Vec<(usize, usize)>,
    ) -> Result<Self, GhError> {
        let mut rows = alloc::vec![false; mx.len()];
        let mut cols = alloc::vec![false; my.len()];
        for &(x, y) in &pairs {
            rows[x] = true;
            cols[y] = true;
        }
        if !rows.iter().all(|&b| b) || !cols.iter().all(|&b| b) {
            return Err(GhError::NotSurjective);
        }
        let distortion = distortion(mx, my, &pairs);
        Ok(Self { pairs, distortion })
    }
}

/// One epsilon-Hausdorff approximation between two triples: the cross part
/// of the induced metric on the disjoint union and the element maps.
#[derive(Clone, Debug)]
pub struct EpsApproximation {
    pub eps: f64,
    /// Cross-distances, row-major `|X| x |Y|`.
    pub cross: Vec<f64>,
    /// Element association G -> H by index.
    pub phi: Vec<usize>,
    /// Element association H -> G by index.
    pub psi: Vec<usize>,
}

impl EpsApproximation {
    #[inline]
    pub fn cross_d(&self, ny: usize, x: usize, y: usize) -> f64 {
        self.cross[x * ny + y]
    }

    /// Re-validates every defining condition; returns human-readable
    /// violations, empty when the witness is sound.
    pub fn validate(&self, tx: &Triple, ty: &Triple) -> Vec<String> {
        let mut out = Vec::new();
        let (mx, my) = (&tx.space, &ty.space);
        let (nx, ny) = (mx.len(), my.len());
        let eps = self.eps;

        // Union metric: block matrix with the cross part.
        let n = nx + ny;
        let mut rows = alloc::vec![alloc::vec![0.0; n]; n];
        for i in 0..nx {
            for j in 0..nx {
                rows[i][j] = mx.d(i, j);
            }
            for j in 0..ny {
                rows[i][nx + j] = self.cross_d(ny, i, j);
                rows[nx + j][i] = self.cross_d(ny, i, j);
            }
        }
        for i in 0..ny {
            for j in 0..ny {
                rows[nx + i][nx + j] = my.d(i, j);
            }
        }
        let union = FiniteMetricSpace::new(rows, 0).expect("square by construction");
        for v in validate_metric(&union) {
            out.push(format!("union metric violation: {v:?}"));
        }

        let (p, q) = (mx.basepoint(), my.basepoint());
        if self.cross_d(ny, p, q) >= eps {
            out.push(format!("basepoints {} apart, need < {eps}", self.cross_d(ny, p, q)));
        }
        let cutoff = 1.0 / eps;
        for x in 0..nx {
            if mx.d(p, x) < cutoff {
                let ok = (0..ny)
                    .any(|y| my.d(q, y) < cutoff && self.cross_d(ny, x, y) < eps);
                if !ok {
                    out.push(format!("point {x} uncovered"));
                }
            }
        }
        for y in 0..ny {
            if my.d(q, y) < cutoff {
                let ok = (0..nx)
                    .any(|x| mx.d(p, x) < cutoff && self.cross_d(ny, x, y) < eps);
                if !ok {
                    out.push(format!("point {y} of the second space uncovered"));
                }
            }
        }

        let ball = 1.0 / (3.0 * eps);
        let bx: Vec<usize> = (0..nx).filter(|&x| mx.d(p, x) < ball).collect();
        let by: Vec<usize> = (0..ny).filter(|&y| my.d(q, y) < ball).collect();
        for (gi, g) in tx.group.elements.iter().enumerate() {
            if mx.d(g.apply(p), p) >= ball {
                continue;
            }
            let h = &ty.group.elements[self.phi[gi]];
            for &x in &bx {
                for &y in &by {
                    let lhs = self.cross_d(ny, x, y);
                    let rhs = self.cross_d(ny, g.apply(x), h.apply(y));
                    if (lhs - rhs).abs() >= eps {
                        out.push(format!(
                            "displacement inequality fails for group element {gi} at ({x},{y})"
                        ));
                    }
                }
            }
        }
        for (hi, h) in ty.group.elements.iter().enumerate() {
            if my.d(h.apply(q), q) >= ball {
                continue;
            }
            let g = &tx.group.elements[self.psi[hi]];
            for &x in &bx {
                for &y in &by {
                    let lhs = self.cross_d(ny, x, y);
                    let rhs = self.cross_d(ny, g.apply(x), h.apply(y));
                    if (lhs - rhs).abs() >= eps {
                        out.push(format!(
                            "displacement inequality fails for second-side element {hi} at ({x},{y})"
                        ));
                    }
                }
            }
        }
        out
    }
}

/// Cross part of the induced metric for a relation at a given epsilon.
pub fn build_cross(
    mx: &FiniteMetricSpace,
    my: &FiniteMetricSpace,
    pairs: &[(usize, usize)],
    eps: f64,
) -> Vec<f64> {
    let (nx, ny) = (mx.len(), my.len());
    let mut cross = alloc::vec![f64::INFINITY; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let mut best = f64::INFINITY;
            for &(x2, y2) in pairs {
                best = fmin(best, mx.d(x, x2) + my.d(y2, y));
            }
            cross[x * ny + y] = best + eps / 2.0;
        }
    }
    cross
}

/// Literal feasibility of a relation at an epsilon; returns the witness
/// when every condition holds.
pub fn check_feasible(
    tx: &Triple,
    ty: &Triple,
    pairs: &[(usize, usize)],
    eps: f64,
) -> Option<EpsApproximation> {
    let (mx, my) = (&tx.space, &ty.space);
    let (nx, ny) = (mx.len(), my.len());
    let (p, q) = (mx.basepoint(), my.basepoint());
    if !pairs.contains(&(p, q)) {
        return None;
    }
    if distortion(mx, my, pairs) > eps + 1e-12 {
        return None;
    }
    let cross = build_cross(mx, my, pairs, eps);
    let cd = |x: usize, y: usize| cross[x * ny + y];
    if cd(p, q) >= eps {
        return None;
    }
    let cutoff = 1.0 / eps;
    for x in 0..nx {
        if mx.d(p, x) < cutoff {
            let ok = (0..ny).any(|y| my.d(q, y) < cutoff && cd(x, y) < eps);
            if !ok {
                return None;
            }
        }
    }
    for y in 0..ny {
        if my.d(q, y) < cutoff {
            let ok = (0..nx).any(|x| mx.d(p, x) < cutoff && cd(x, y) < eps);
            if !ok {
                return None;
            }
        }
    }

    // Element maps: each small-displacement element needs a partner whose
    // action distorts cross-distances by less than eps over the 1/(3 eps)
    // balls; far-moving elements are unconstrained, so any choice works.
    let ball = 1.0 / (3.0 * eps);
    let bx: Vec<usize> = (0..nx).filter(|&x| mx.d(p, x) < ball).collect();
    let by: Vec<usize> = (0..ny).filter(|&y| my.d(q, y) < ball).collect();
    let worst = |g: &Isometry, h: &Isometry| {
        let mut w = 0.0_f64;
        for &x in &bx {
            for &y in &by {
                w = fmax(w, (cd(x, y) - cd(g.apply(x), h.apply(y))).abs());
            }
        }
        w
    };
    let mut phi = Vec::with_capacity(tx.group.order());
    for g in &tx.group.elements {
        let constrained = mx.d(g.apply(p), p) < ball;
        let mut best = (0usize, f64::INFINITY);
        for (hi, h) in ty.group.elements.iter().enumerate() {
            let w = worst(g, h);
            if w < best.1 {
                best = (hi, w);
            }
        }
        if constrained && best.1 >= eps {
            return None;
        }
        phi.push(best.0);
    }
    let mut psi = Vec::with_capacity(ty.group.order());
    for (hi, h) in ty.group.elements.iter().enumerate() {
        let constrained = my.d(h.apply(q), q) < ball;
        let mut best = (0usize, f64::INFINITY);
        for (gi, g) in tx.group.elements.iter().enumerate() {
            let w = worst(g, h);
            if w < best.1 {
                best = (gi, w);
            }
        }
        if constrained && best.1 >= eps {
            return None;
        }
        let _ = hi;
        psi.push(best.0);
    }
    Some(EpsApproximation { eps, cross, phi, psi })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GhMode {
    Exact,
    Bounds,
}

/// Result of a distance search. In exact mode `upper - lower` is at most
/// the bisection tolerance and `upper` is a certified feasible epsilon (or
/// the 1/5 cap). In bounds mode `lower` comes from a combinatorial
/// relaxation and `upper` from annealing.
#[derive(Clone, Debug)]
pub struct GhResult {
    pub lower: f64,
    pub upper: f64,
    pub mode: GhMode,
    pub witness: Option<(Correspondence, EpsApproximation)>,
}

impl GhResult {
    /// The reported distance value.
    pub fn eps(&self) -> f64 {
        self.upper
    }
}

#[derive(Clone, Debug)]
pub struct GhConfig {
    pub tol: f64,
    pub node_budget: usize,
    pub exact_pointed_points: usize,
    pub exact_equivariant_points: usize,
    pub exact_equivariant_group: usize,
    pub anneal_iters: usize,
    pub seed: u64,
}

impl Default for GhConfig {
    fn default() -> Self {
        Self {
            tol: TOL_GH,
            node_budget: 2_000_000,
            exact_pointed_points: 8,
            exact_equivariant_points: 6,
            exact_equivariant_group: 24,
            anneal_iters: 1500,
            seed: 0xE6_11AB,
        }
    }
}

enum SearchOutcome {
    Found(Vec<(usize, usize)>),
    Infeasible,
    BudgetExceeded,
}

/// Branch-and-bound search for a feasible relation at a fixed epsilon.
/// Pairs are vertices of a compatibility graph (distortion stays within
/// eps); relations with that distortion bound are exactly its cliques. The
/// DFS enumerates cliques containing the basepoint pair, pruning branches
/// that can no longer cover some point, and tests the defining conditions
/// at every covering clique.
fn search_feasible(tx: &Triple, ty: &Triple, eps: f64, budget: &mut usize) -> SearchOutcome {
    let (mx, my) = (&tx.space, &ty.space);
    let (nx, ny) = (mx.len(), my.len());
    let (p, q) = (mx.basepoint(), my.basepoint());

    // Candidate pairs compatible with the basepoint pair, profile-ordered.
    let mut cand: Vec<(usize, usize)> = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            if (x, y) == (p, q) {
                continue;
            }
            if (mx.d(p, x) - my.d(q, y)).abs() <= eps + 1e-12 {
                cand.push((x, y));
            }
        }
    }
    let profile = |m: &FiniteMetricSpace, i: usize| -> Vec<f64> {
        let mut row: Vec<f64> = (0..m.len()).map(|j| m.d(i, j)).collect();
        row.sort_by(f64::total_cmp);
        row
    };
    let px: Vec<Vec<f64>> = (0..nx).map(|i| profile(mx, i)).collect();
    let py: Vec<Vec<f64>> = (0..ny).map(|i| profile(my, i)).collect();
    let score = |&(x, y): &(usize, usize)| -> f64 {
        let (a, b) = (&px[x], &py[y]);
        let l = a.len().min(b.len());
        let mut s = 0.0;
        for i in 0..l {
            s += (a[i] - b[i]).abs();
        }
        s
    };
    cand.sort_by(|a, b| score(a).total_cmp(&score(b)));

    let k = cand.len();
    if k + 1 > 64 {
        return SearchOutcome::BudgetExceeded; // beyond the bitmask regime
    }
    // Vertex 0 is the basepoint pair, always chosen.
    let mut verts = alloc::vec![(p, q)];
    verts.extend(cand);
    let compat = |a: (usize, usize), b: (usize, usize)| {
        (mx.d(a.0, b.0) - my.d(a.1, b.1)).abs() <= eps + 1e-12
    };
    let mut adj = alloc::vec![0u64; verts.len()];
    for i in 0..verts.len() {
        for j in 0..verts.len() {
            if i != j && compat(verts[i], verts[j]) {
                adj[i] |= 1 << j;
            }
        }
    }
    let mut row_mask = alloc::vec![0u64; nx];
    let mut col_mask = alloc::vec![0u64; ny];
    for (i, &(x, y)) in verts.iter().enumerate() {
        row_mask[x] |= 1 << i;
        col_mask[y] |= 1 << i;
    }

    struct Ctx<'a> {
        tx: &'a Triple,
        ty: &'a Triple,
        eps: f64,
        verts: Vec<(usize, usize)>,
        adj: Vec<u64>,
        row_mask: Vec<u64>,
        col_mask: Vec<u64>,
    }
    let ctx = Ctx { tx, ty, eps, verts, adj, row_mask, col_mask };

    fn covers(ctx: &Ctx, chosen: u64) -> bool {
        ctx.row_mask.iter().all(|&m| m & chosen != 0)
            && ctx.col_mask.iter().all(|&m| m & chosen != 0)
    }

    fn dfs(ctx: &Ctx, chosen: u64, alive: u64, budget: &mut usize) -> SearchOutcome {
        if *budget == 0 {
            return SearchOutcome::BudgetExceeded;
        }
        *budget -= 1;
        let reach = chosen | alive;
        for &m in ctx.row_mask.iter().chain(&ctx.col_mask) {
            if m & reach == 0 {
                return SearchOutcome::Infeasible; // some point can never be covered
            }
        }
        if alive == 0 {
            return SearchOutcome::Infeasible; // covering cliques here were already tested
        }
        let v = alive.trailing_zeros() as usize;
        let v_bit = 1u64 << v;

        // Include v.
        let chosen2 = chosen | v_bit;
        let alive2 = (alive & !v_bit) & ctx.adj[v];
        if covers(ctx, chosen2) {
            let pairs: Vec<(usize, usize)> = (0..ctx.verts.len())
                .filter(|i| chosen2 & (1 << i) != 0)
                .map(|i| ctx.verts[i])
                .collect();
            if check_feasible(ctx.tx, ctx.ty, &pairs, ctx.eps).is_some() {
                return SearchOutcome::Found(pairs);
            }
        }
        match dfs(ctx, chosen2, alive2, budget) {
            SearchOutcome::Infeasible => {}
            other => return other,
        }
        // Exclude v.
        dfs(ctx, chosen, alive & !v_bit, budget)
    }

    let chosen = 1u64;
    let alive = adj_of(&ctx.adj, 0) & !1u64;
    // A one-pair relation can already cover 1 x 1 instances.
    if covers(&ctx, chosen) {
        let pairs = alloc::vec![(p, q)];
        if check_feasible(tx, ty, &pairs, eps).is_some() {
            return SearchOutcome::Found(pairs);
        }
    }
    dfs(&ctx, chosen, alive, budget)
}

fn adj_of(adj: &[u64], i: usize) -> u64 {
    adj[i]
}

/// Sound lower bound on any feasible epsilon: every relation must pair the
/// basepoints and give every point (and every pair of points) a partner
/// with matching distances.
fn relaxation_lower_bound(mx: &FiniteMetricSpace, my: &FiniteMetricSpace) -> f64 {
    let (nx, ny) = (mx.len(), my.len());
    let (p, q) = (mx.basepoint(), my.basepoint());
    let mut lb = 0.0_f64;
    for x in 0..nx {
        let mut best = f64::INFINITY;
        for y in 0..ny {
            best = fmin(best, (mx.d(p, x) - my.d(q, y)).abs());
        }
        lb = fmax(lb, best);
    }
    for y in 0..ny {
        let mut best = f64::INFINITY;
        for x in 0..nx {
            best = fmin(best, (mx.d(p, x) - my.d(q, y)).abs());
        }
        lb = fmax(lb, best);
    }
    for x in 0..nx {
        for x2 in 0..nx {
            let mut best = f64::INFINITY;
            for y in 0..ny {
                for y2 in 0..ny {
                    best = fmin(best, (mx.d(x, x2) - my.d(y, y2)).abs());
                }
            }
            lb = fmax(lb, best);
        }
    }
    for y in 0..ny {
        for y2 in 0..ny {
            let mut best = f64::INFINITY;
            for x in 0..nx {
                for x2 in 0..nx {
                    best = fmin(best, (mx.d(x, x2) - my.d(y, y2)).abs());
                }
            }
            lb = fmax(lb, best);
        }
    }
    lb
}

/// Least feasible epsilon for one fixed relation, to tolerance; `None` when
/// the relation is infeasible even at the cap.
pub fn eps_star_for_relation(
    tx: &Triple,
    ty: &Triple,
    pairs: &[(usize, usize)],
    tol: f64,
) -> Option<f64> {
    check_feasible(tx, ty, pairs, EPS_CAP)?;
    let (mut lo, mut hi) = (0.0, EPS_CAP);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if check_feasible(tx, ty, pairs, mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn anneal_upper(tx: &Triple, ty: &Triple, cfg: &GhConfig) -> (f64, Vec<(usize, usize)>) {
    let (mx, my) = (&tx.space, &ty.space);
    let (nx, ny) = (mx.len(), my.len());
    let (p, q) = (mx.basepoint(), my.basepoint());

    // Sequential distance-consistent greedy start with basepoints pinned:
    // each point takes the partner that best matches the distances to the
    // partners already chosen, so isometric inputs align immediately.
    let mut order: Vec<usize> = (0..nx).collect();
    order.sort_by(|&a, &b| mx.d(p, a).total_cmp(&mx.d(p, b)));
    let mut f: Vec<usize> = alloc::vec![usize::MAX; nx];
    f[p] = q;
    for &x in &order {
        if f[x] != usize::MAX {
            continue;
        }
        let mut best = (0usize, f64::INFINITY);
        for y in 0..ny {
            let mut score = 0.0_f64;
            for x2 in 0..nx {
                if f[x2] != usize::MAX {
                    score = fmax(score, (mx.d(x, x2) - my.d(y, f[x2])).abs());
                }
            }
            if score < best.1 {
                best = (y, score);
            }
        }
        f[x] = best.0;
    }
    let mut order_y: Vec<usize> = (0..ny).collect();
    order_y.sort_by(|&a, &b| my.d(q, a).total_cmp(&my.d(q, b)));
    let mut g: Vec<usize> = alloc::vec![usize::MAX; ny];
    g[q] = p;
    for &y in &order_y {
        if g[y] != usize::MAX {
            continue;
        }
        let mut best = (0usize, f64::INFINITY);
        for x in 0..nx {
            let mut score = 0.0_f64;
            for y2 in 0..ny {
                if g[y2] != usize::MAX {
                    score = fmax(score, (my.d(y, y2) - mx.d(x, g[y2])).abs());
                }
            }
            if score < best.1 {
                best = (x, score);
            }
        }
        g[y] = best.0;
    }

    let pairs_of = |f: &[usize], g: &[usize]| -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = f.iter().enumerate().map(|(x, &y)| (x, y)).collect();
        for (y, &x) in g.iter().enumerate() {
            if !pairs.contains(&(x, y)) {
                pairs.push((x, y));
            }
        }
        pairs
    };
    // Energy: feasible epsilon when one exists, else the cap plus the
    // distortion excess so downhill moves head toward valid relations.
    let energy = |f: &[usize], g: &[usize]| -> (f64, Vec<(usize, usize)>) {
        let pairs = pairs_of(f, g);
        match eps_star_for_relation(tx, ty, &pairs, TOL_GH) {
            Some(e) => (e, pairs),
            None => {
                let d = distortion(mx, my, &pairs);
                (EPS_CAP + fmax(0.0, d - EPS_CAP), pairs)
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut best_e, mut best_pairs) = energy(&f, &g);
    let mut cur_e = best_e;
    let mut temp = 0.1;
    for _ in 0..cfg.anneal_iters {
        if best_e <= TOL_GH {
            break;
        }
        let move_x = rng.random::<bool>();
        let (mut f2, mut g2) = (f.clone(), g.clone());
        if move_x && nx > 1 {
            let x = rng.random_range(0..nx);
            if x != p {
                f2[x] = rng.random_range(0..ny);
            }
        } else if ny > 1 {
            let y = rng.random_range(0..ny);
            if y != q {
                g2[y] = rng.random_range(0..nx);
            }
        }
        let (e2, pairs2) = energy(&f2, &g2);
        let accept = e2 <= cur_e || rng.random::<f64>() < libm::exp((cur_e - e2) / temp);
        if accept {
            f = f2;
            g = g2;
            cur_e = e2;
            if e2 < best_e {
                best_e = e2;
                best_pairs = pairs2;
            }
        }
        temp *= 0.995;
    }
    (fmin(best_e, EPS_CAP), best_pairs)
}

/// Equivariant distance with explicit configuration.
pub fn equivariant_gh_cfg(tx: &Triple, ty: &Triple, cfg: &GhConfig) -> GhResult {
    let (nx, ny) = (tx.space.len(), ty.space.len());
    let degenerate = nx == 1 || ny == 1;
    let pointed = tx.group.order() == 1 && ty.group.order() == 1;
    let in_exact_regime = if degenerate {
        true
    } else if pointed {
        nx <= cfg.exact_pointed_points && ny <= cfg.exact_pointed_points
    } else {
        nx <= cfg.exact_equivariant_points
            && ny <= cfg.exact_equivariant_points
            && tx.group.order() <= cfg.exact_equivariant_group
            && ty.group.order() <= cfg.exact_equivariant_group
    };

    if degenerate {
        // A single forced relation: all pairs.
        let mut pairs = Vec::new();
        for x in 0..nx {
            for y in 0..ny {
                pairs.push((x, y));
            }
        }
        let value = eps_star_for_relation(tx, ty, &pairs, cfg.tol).unwrap_or(EPS_CAP);
        let witness = check_feasible(tx, ty, &pairs, fmax(value, 1e-12)).map(|a| {
            (Correspondence::new(&tx.space, &ty.space, pairs.clone()).unwrap(), a)
        });
        return GhResult {
            lower: fmax(0.0, value - cfg.tol),
            upper: value,
            mode: GhMode::Exact,
            witness,
        };
    }

    if in_exact_regime {
        let mut budget = cfg.node_budget;
        match search_feasible(tx, ty, EPS_CAP, &mut budget) {
            SearchOutcome::Infeasible => {
                return GhResult { lower: EPS_CAP, upper: EPS_CAP, mode: GhMode::Exact, witness: None };
            }
            SearchOutcome::Found(mut pairs) => {
                let (mut lo, mut hi) = (0.0, EPS_CAP);
                loop {
                    if hi - lo <= cfg.tol {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    let mut b = cfg.node_budget;
                    match search_feasible(tx, ty, mid, &mut b) {
                        SearchOutcome::Found(pr) => {
                            hi = mid;
                            pairs = pr;
                        }
                        SearchOutcome::Infeasible => lo = mid,
                        SearchOutcome::BudgetExceeded => {
                            // fall back: keep the bracket as bounds
                            let witness = check_feasible(tx, ty, &pairs, hi).map(|a| {
                                (
                                    Correspondence::new(&tx.space, &ty.space, pairs.clone())
                                        .unwrap(),
                                    a,
                                )
                            });
                            return GhResult { lower: lo, upper: hi, mode: GhMode::Bounds, witness };
                        }
                    }
                }
                let witness = check_feasible(tx, ty, &pairs, hi).map(|a| {
                    (Correspondence::new(&tx.space, &ty.space, pairs.clone()).unwrap(), a)
                });
                return GhResult { lower: lo, upper: hi, mode: GhMode::Exact, witness };
            }
            SearchOutcome::BudgetExceeded => {} // fall through to bounds
        }
    }

    // Bounds mode.
    let lb = fmin(relaxation_lower_bound(&tx.space, &ty.space), EPS_CAP);
    if lb >= EPS_CAP {
        // No epsilon under the cap can be feasible: the value is exactly 1/5.
        return GhResult { lower: EPS_CAP, upper: EPS_CAP, mode: GhMode::Exact, witness: None };
    }
    let (upper, pairs) = anneal_upper(tx, ty, cfg);
    let witness = check_feasible(tx, ty, &pairs, fmax(upper, 1e-12))
        .and_then(|a| {
            Correspondence::new(&tx.space, &ty.space, pairs.clone())
                .ok()
                .map(|c| (c, a))
        });
    GhResult { lower: lb, upper, mode: GhMode::Bounds, witness }
}

/// Equivariant Gromov-Hausdorff distance between triples.
pub fn equivariant_gh(tx: &Triple, ty: &Triple) -> GhResult {
    equivariant_gh_cfg(tx, ty, &GhConfig::default())
}

/// Pointed Gromov-Hausdorff distance (trivial groups).
pub fn pointed_gh(mx: &FiniteMetricSpace, my: &FiniteMetricSpace) -> GhResult {
    let tx = Triple::pointed(mx.clone());
    let ty = Triple::pointed(my.clone());
    equivariant_gh_cfg(&tx, &ty, &GhConfig::default())
}

/// Slack of the almost-morphism inequality: `7 eps` minus the discrepancy
/// `d(phi(g1 g2) y, phi(g1) phi(g2) y)`, non-negative for any valid witness
/// under the stated displacement and ball preconditions.
pub fn check_almost_morphism(
    tx: &Triple,
    ty: &Triple,
    appr: &EpsApproximation,
    g1: usize,
    g2: usize,
    y: usize,
) -> Result<f64, GhError> {
    let eps = appr.eps;
    let p = tx.space.basepoint();
    let q = ty.space.basepoint();
    let disp = |gi: usize| {
        let g = &tx.group.elements[gi];
        tx.space.d(g.apply(p), p)
    };
    if disp(g1) >= 1.0 / (6.0 * eps) || disp(g2) >= 1.0 / (6.0 * eps) {
        return Err(GhError::Precondition(format!(
            "elements must displace the basepoint by less than 1/(6 eps) = {}",
            1.0 / (6.0 * eps)
        )));
    }
    if ty.space.d(q, y) >= 1.0 / (12.0 * eps) {
        return Err(GhError::Precondition(format!(
            "probe point must lie within 1/(12 eps) = {} of the basepoint",
            1.0 / (12.0 * eps)
        )));
    }
    let gmap = tx.group.index_map();
    let g12 = gmap[&tx.group.elements[g1].compose(&tx.group.elements[g2]).perm];
    let h12 = &ty.group.elements[appr.phi[g12]];
    let h1h2 = ty.group.elements[appr.phi[g1]].compose(&ty.group.elements[appr.phi[g2]]);
    let d = ty.space.d(h12.apply(y), h1h2.apply(y));
    Ok(7.0 * eps - d)
}

/// Candidate radius for regular neighborhoods: the one farthest (in the
/// radius line) from any jump of the step function `r -> {g : d(gp,p) <= r}`;
/// ties break to the smaller radius.
pub fn regular_radius(t: &Triple, candidates: &[f64]) -> Option<f64> {
    if candidates.is_empty() {
        return None;
    }
    let p = t.space.basepoint();
    let mut jumps: Vec<f64> = t
        .group
        .elements
        .iter()
        .map(|g| t.space.d(g.apply(p), p))
        .collect();
    jumps.sort_by(f64::total_cmp);
    jumps.dedup();
    let gap = |r: f64| jumps.iter().map(|j| (j - r).abs()).fold(f64::INFINITY, fmin);
    let mut best = candidates[0];
    let mut best_gap = gap(best);
    for &c in &candidates[1..] {
        let g = gap(c);
        let strictly_better = g > best_gap + 1e-15;
        let tie_smaller = (g - best_gap).abs() <= 1e-15 && c < best;
        if strictly_better || tie_smaller {
            best = c;
            best_gap = g;
        }
    }
    Some(best)
}
