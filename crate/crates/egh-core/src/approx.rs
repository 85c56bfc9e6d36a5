//! Approximation maps between groups and the regular-neighborhood calculus:
//! the five-condition checker, inverse-symmetrization, localization,
//! small-subgroup detection, maximal small subgroups, quotient sequences,
//! and the rescaled-logarithm blow-up toward Euclidean targets.
//!
//! The five conditions are checked per index against finite test families:
//!
//!   I   (density)           every test open meets the image of A
//!   II  (containment)       the image of A stays near the closure of the
//!                           target neighborhood
//!   III (multiplicativity)  products are respected within the tolerance on
//!                           n-fold products of A
//!   IV  (trapping)          n-fold products whose image lands in a compact
//!                           inside the target neighborhood already lie in A
//!   V   (lifting)           the explicit source-ball construction of open
//!                           lifts stays inside the preimage of the test open

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::escape::zero_set;
use crate::gh::{EpsApproximation, Triple};
use crate::group::{
    enumerate_small_subgroups, set_gap, subgroup_closure, El, FinGroup, GroupError, MElem,
    ModelGroup, SymSet, TableGroup, TElem, Target, TargetSet,
};
use crate::iso::IsoError;
use crate::math::{self, fmax, fmin};

/// Cap on product-pair evaluations in the multiplicativity sweep; larger
/// sets are sampled with a deterministic stride.
pub const PAIR_CAP: usize = 200_000;

#[derive(Clone, Debug)]
pub enum ApproxError {
    Group(GroupError),
    NotContained,
    TargetChartMissing,
    TargetDimMismatch { expected: usize, got: usize },
    SourceChartMissing,
    BulletFailed { index: usize, bullet: u8, detail: String },
    Unsupported(String),
}

impl From<GroupError> for ApproxError {
    fn from(e: GroupError) -> Self {
        ApproxError::Group(e)
    }
}

impl core::fmt::Display for ApproxError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ApproxError::Group(g) => write!(f, "{g}"),
            ApproxError::NotContained => write!(f, "localization set is not inside the regular neighborhood"),
            ApproxError::TargetChartMissing => write!(f, "target has no logarithm chart"),
            ApproxError::TargetDimMismatch { expected, got } => {
                write!(f, "target chart dimension {got}, blow-up requested {expected}")
            }
            ApproxError::SourceChartMissing => write!(f, "source grid has no exponential chart"),
            ApproxError::BulletFailed { index, bullet, detail } => {
                write!(f, "blow-up schedule infeasible at index {index}: bullet {bullet} fails first ({detail})")
            }
            ApproxError::Unsupported(s) => write!(f, "unsupported: {s}"),
        }
    }
}

impl core::error::Error for ApproxError {}

/// Element association from a finite source into a target group. Structured
/// variants evaluate from coordinates so grid sources never materialize.
#[derive(Clone, Debug, PartialEq)]
pub enum PhiMap {
    /// Explicit association (isometry-backed maps, towers).
    Table(alloc::collections::BTreeMap<El, TElem>),
    /// Centered representative scaled into the real line.
    CenteredScale { modulus: i64, scale: f64 },
    /// First coordinate of a planar grid, scaled into the real line.
    ProjectFirst { modulus: i64, step: f64 },
    /// Coordinates reinterpreted in the abelian grid of the same modulus.
    CoordsIdentity,
    /// `k -> angle 2 pi q k / n` on the circle; `q = 1` is the honest
    /// embedding, units far from `+-1 mod n` scramble every neighborhood.
    AngleScale { n: i64, q: i64 },
    /// First torus coordinate as a circle angle.
    TorusAngleFirst { grid: i64 },
    /// Inverse-respecting symmetrization: agree with the inner map on the
    /// canonical transversal of inversion, extend by inverses elsewhere.
    Symmetrized { inner: Box<PhiMap> },
    /// Rescaled logarithm `g -> scale * log(inner(g))`, zero outside the
    /// chart.
    Blowup { inner: Box<PhiMap>, inner_target: ModelGroup, scale: f64 },
}

impl PhiMap {
    pub fn eval(&self, src: &FinGroup, tgt: &Target, el: El) -> TElem {
        match self {
            PhiMap::Table(t) => t.get(&el).cloned().unwrap_or_else(|| tgt.id()),
            PhiMap::CenteredScale { modulus, scale } => {
                let mut c = el[0].rem_euclid(*modulus);
                if 2 * c > *modulus {
                    c -= *modulus;
                }
                TElem::Model(MElem::Coords(alloc::vec![c as f64 * scale]))
            }
            PhiMap::ProjectFirst { modulus, step } => {
                let mut c = el[0].rem_euclid(*modulus);
                if 2 * c > *modulus {
                    c -= *modulus;
                }
                TElem::Model(MElem::Coords(alloc::vec![c as f64 * step]))
            }
            PhiMap::CoordsIdentity => TElem::Fin(el),
            PhiMap::AngleScale { n, q } => {
                let angle = 2.0 * core::f64::consts::PI * ((q * el[0]).rem_euclid(*n)) as f64
                    / *n as f64;
                TElem::Model(MElem::Coords(alloc::vec![math::wrap_angle(angle)]))
            }
            PhiMap::TorusAngleFirst { grid } => {
                let angle = 2.0 * core::f64::consts::PI * el[0] as f64 / *grid as f64;
                TElem::Model(MElem::Coords(alloc::vec![math::wrap_angle(angle)]))
            }
            PhiMap::Symmetrized { inner } => {
                let gi = src.inv(el);
                if el <= gi {
                    inner.eval(src, tgt, el)
                } else {
                    tgt.inv(&inner.eval(src, tgt, gi))
                }
            }
            PhiMap::Blowup { inner, inner_target, scale } => {
                let dim = inner_target.dim();
                let x = inner.eval(src, &Target::Model(inner_target.clone()), el);
                let TElem::Model(me) = x else {
                    return TElem::Model(MElem::Coords(alloc::vec![0.0; dim]));
                };
                match inner_target.log(&me) {
                    Some(v) => TElem::Model(MElem::Coords(
                        v.into_iter().map(|c| c * scale).collect(),
                    )),
                    None => TElem::Model(MElem::Coords(alloc::vec![0.0; dim])),
                }
            }
        }
    }
}

/// One index of a sequence of approximations between groups: the map and
/// its regular neighborhoods on both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproximationMap {
    pub source: FinGroup,
    pub target: Target,
    pub phi: PhiMap,
    pub a_src: SymSet,
    pub a_tgt: TargetSet,
}

impl ApproximationMap {
    pub fn phi_of(&self, el: El) -> TElem {
        self.phi.eval(&self.source, &self.target, el)
    }

    /// Structural audit: both neighborhoods symmetric.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.a_src.is_symmetric(&self.source) {
            out.push(String::from("source neighborhood is not symmetric"));
        }
        if !self.a_tgt.is_symmetric(&self.target) {
            out.push(String::from("target neighborhood is not symmetric"));
        }
        out
    }
}

/// Finite test families for the condition checker, generated
/// deterministically from the target, the neighborhood, and the tolerance.
#[derive(Clone, Debug)]
pub struct TestFamilies {
    pub opens: Vec<TargetSet>,
    pub compacts: Vec<TargetSet>,
    pub pairs: Vec<(TargetSet, TargetSet)>,
}

impl TestFamilies {
    pub fn generate(target: &Target, a_tgt: &TargetSet, delta: f64) -> Self {
        let discrete = matches!(target, Target::Fin(_))
            || matches!(target, Target::Model(ModelGroup::Integers));
        let mut opens = Vec::new();
        let mut compacts = Vec::new();
        let mut pairs = Vec::new();

        if discrete {
            for c in a_tgt.net(target, delta) {
                opens.push(TargetSet::BallAt { center: c, radius: 0.0, closed: true });
            }
            match a_tgt {
                TargetSet::Finite(set) => {
                    compacts.push(TargetSet::Finite(set.clone()));
                    if let Target::Fin(g) = target {
                        compacts.push(TargetSet::Finite(BTreeSet::from([g.id()])));
                        pairs.push((
                            TargetSet::Finite(BTreeSet::from([g.id()])),
                            TargetSet::Finite(set.clone()),
                        ));
                    }
                }
                TargetSet::Ball { radius, .. } => {
                    compacts.push(TargetSet::Ball { radius: *radius, closed: true });
                    compacts.push(TargetSet::Ball { radius: 0.0, closed: true });
                    pairs.push((
                        TargetSet::Ball { radius: 0.0, closed: true },
                        TargetSet::Ball { radius: *radius, closed: true },
                    ));
                }
                _ => {}
            }
        } else {
            let open_radius = 3.0 * delta;
            let centers = a_tgt.shrink(open_radius).net(target, delta);
            for c in centers {
                opens.push(TargetSet::BallAt { center: c, radius: open_radius, closed: true });
            }
            let r_a = match a_tgt {
                TargetSet::Ball { radius, .. } => *radius,
                TargetSet::All => match target {
                    Target::Model(ModelGroup::Torus { radii }) => {
                        core::f64::consts::PI * radii.iter().cloned().fold(0.0_f64, fmax)
                    }
                    Target::Model(ModelGroup::Rotations) => core::f64::consts::PI,
                    _ => 1.0,
                },
                _ => 1.0,
            };
            for j in 1..=3 {
                let r = (r_a - delta) * j as f64 / 3.0;
                if r > 0.0 {
                    compacts.push(TargetSet::Ball { radius: r, closed: true });
                }
            }
            for rho in [r_a / 2.0, r_a - delta] {
                if rho > 2.0 * delta + 1e-12 {
                    pairs.push((
                        TargetSet::Ball { radius: rho - 2.0 * delta, closed: true },
                        TargetSet::Ball { radius: rho, closed: false },
                    ));
                }
            }
        }
        Self { opens, compacts, pairs }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionOutcome {
    pub pass: bool,
    /// Signed margin; negative exactly on failure.
    pub slack: f64,
    pub witness: Option<String>,
}

impl ConditionOutcome {
    fn pass_with(slack: f64) -> Self {
        Self { pass: true, slack, witness: None }
    }

    fn fail(slack: f64, witness: String) -> Self {
        Self { pass: false, slack, witness: Some(witness) }
    }
}

/// Per-index verdicts of the five conditions, with the tolerance used.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub delta: f64,
    pub n_max: usize,
    /// Outcomes of conditions I..V in order.
    pub outcomes: [ConditionOutcome; 5],
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    /// Indices (0-based) of failing conditions.
    pub fn failing(&self) -> Vec<usize> {
        self.outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| !o.pass)
            .map(|(i, _)| i)
            .collect()
    }
}

fn stride_for(total: usize, cap: usize) -> usize {
    total.div_ceil(cap.max(1)).max(1)
}

/// Runs the five-condition checker on every map of a sequence at tolerance
/// `delta`, quantifying products up to `n_max`. When `families` is absent a
/// deterministic family is generated per map.
pub fn check_conditions(
    maps: &[ApproximationMap],
    delta: f64,
    n_max: usize,
    families: Option<&TestFamilies>,
) -> Result<Vec<ConditionReport>, ApproxError> {
    let mut out = Vec::with_capacity(maps.len());
    for map in maps {
        let generated;
        let fam = match families {
            Some(f) => f,
            None => {
                generated = TestFamilies::generate(&map.target, &map.a_tgt, delta);
                &generated
            }
        };
        out.push(check_conditions_one(map, delta, n_max, fam)?);
    }
    Ok(out)
}

fn check_conditions_one(
    map: &ApproximationMap,
    delta: f64,
    n_max: usize,
    fam: &TestFamilies,
) -> Result<ConditionReport, ApproxError> {
    let tgt = &map.target;
    let a1: Vec<El> = map.a_src.iter().copied().collect();
    let an_set = map.a_src.power_set(&map.source, n_max, 4 * crate::GROUP_SIZE_CAP * 8)?;
    let an: Vec<El> = an_set.iter().copied().collect();
    let phi1: Vec<TElem> = a1.iter().map(|&g| map.phi_of(g)).collect();

    // I: every test open meets phi(A).
    let cond1 = {
        let mut worst = f64::INFINITY;
        let mut witness = None;
        for (ui, u) in fam.opens.iter().enumerate() {
            let (center, radius) = match u {
                TargetSet::BallAt { center, radius, .. } => (center.clone(), *radius),
                other => (tgt.id(), match other {
                    TargetSet::Ball { radius, .. } => *radius,
                    _ => 0.0,
                }),
            };
            let mind = phi1
                .iter()
                .map(|v| tgt.dist(&center, v))
                .fold(f64::INFINITY, fmin);
            let margin = radius - mind;
            if margin < worst {
                worst = margin;
                if margin < 0.0 {
                    witness = Some(format!("test open {ui} misses the image by {:.6}", -margin));
                }
            }
        }
        if worst == f64::INFINITY {
            ConditionOutcome::pass_with(worst)
        } else if worst >= 0.0 {
            ConditionOutcome::pass_with(worst)
        } else {
            ConditionOutcome::fail(worst, witness.unwrap_or_default())
        }
    };

    // II: phi(A) within delta of the closure of the target neighborhood.
    let cond2 = {
        let mut worst = 0.0_f64;
        let mut arg = None;
        for (g, v) in a1.iter().zip(&phi1) {
            let d = map.a_tgt.dist_to(tgt, v);
            if d > worst {
                worst = d;
                arg = Some(*g);
            }
        }
        let slack = delta - worst;
        if slack >= 0.0 {
            ConditionOutcome::pass_with(slack)
        } else {
            ConditionOutcome::fail(
                slack,
                format!("image of {:?} escapes the thickened closure by {:.6}", arg.unwrap(), -slack),
            )
        }
    };

    // III: multiplicativity over sampled pairs of A^n.
    let cond3 = {
        let total = an.len() * an.len();
        let stride = stride_for(total, PAIR_CAP);
        let mut worst = 0.0_f64;
        let mut arg = None;
        let mut idx = 0usize;
        while idx < total {
            let g = an[idx / an.len()];
            let h = an[idx % an.len()];
            let gh = map.source.mul(g, h);
            let lhs = map.phi_of(gh);
            let rhs = tgt.mul(&map.phi_of(g), &map.phi_of(h));
            let d = tgt.dist(&lhs, &rhs);
            if d > worst {
                worst = d;
                arg = Some((g, h));
            }
            idx += stride;
        }
        let slack = delta - worst;
        if slack >= 0.0 {
            ConditionOutcome::pass_with(slack)
        } else {
            let (g, h) = arg.unwrap();
            ConditionOutcome::fail(
                slack,
                format!("products differ by {worst:.6} at {g:?} * {h:?}"),
            )
        }
    };

    // IV: elements of A^n mapping into a compact inside the neighborhood
    // must already lie in A.
    let cond4 = {
        let mut slack = f64::INFINITY;
        let mut fail: Option<(El, usize)> = None;
        for g in &an {
            if map.a_src.contains(g) {
                continue;
            }
            let v = map.phi_of(*g);
            for (ki, k) in fam.compacts.iter().enumerate() {
                let d = k.dist_to(tgt, &v);
                slack = fmin(slack, d);
                if k.contains(tgt, &v) {
                    fail = Some((*g, ki));
                }
            }
        }
        match fail {
            None => ConditionOutcome::pass_with(slack),
            Some((g, ki)) => ConditionOutcome::fail(
                fmin(slack, -1e-9),
                format!("{g:?} maps into compact {ki} but sits outside the neighborhood"),
            ),
        }
    };

    // V: the source-ball lift of each (K, U) pair stays in the preimage of
    // the thickened U.
    let cond5 = {
        let mut worst = f64::INFINITY;
        let mut witness = None;
        for (pi, (k, u)) in fam.pairs.iter().enumerate() {
            let gap = set_gap(tgt, k, u);
            if !gap.is_finite() || gap <= 0.0 {
                continue;
            }
            let near_k: Vec<usize> = (0..a1.len())
                .filter(|&i| k.dist_to(tgt, &phi1[i]) < gap / 3.0)
                .collect();
            for (xi, x) in a1.iter().enumerate() {
                let lifted = near_k
                    .iter()
                    .any(|&gi| map.source.dist(*x, a1[gi]) < gap / 3.0);
                if !lifted {
                    continue;
                }
                let defect = u.dist_to(tgt, &phi1[xi]);
                let slack = delta - defect;
                if slack < worst {
                    worst = slack;
                    if slack < 0.0 {
                        witness = Some(format!(
                            "lift of pair {pi} contains {x:?} whose image escapes by {defect:.6}"
                        ));
                    }
                }
            }
        }
        if worst >= 0.0 {
            ConditionOutcome::pass_with(worst)
        } else {
            ConditionOutcome::fail(worst, witness.unwrap_or_default())
        }
    };

    Ok(ConditionReport { delta, n_max, outcomes: [cond1, cond2, cond3, cond4, cond5] })
}

/// Inverse-respecting perturbation of the map: unchanged on the canonical
/// transversal of inversion (hence on involutions), extended by inverses
/// elsewhere. Idempotent.
pub fn symmetrize(map: &ApproximationMap) -> ApproximationMap {
    if matches!(map.phi, PhiMap::Symmetrized { .. }) {
        return map.clone();
    }
    let mut out = map.clone();
    out.phi = PhiMap::Symmetrized { inner: Box::new(map.phi.clone()) };
    out
}

#[derive(Clone, Debug)]
pub struct LocalizeResult {
    pub map: ApproximationMap,
    /// The strengthened trapping condition against compacts inside the new
    /// target neighborhood: products landing in them fall into the new
    /// source neighborhood.
    pub trapping: ConditionOutcome,
}

fn set_contained(target: &Target, inner: &TargetSet, outer: &TargetSet) -> bool {
    match (inner, outer) {
        (_, TargetSet::All) => true,
        (TargetSet::Ball { radius: ri, .. }, TargetSet::Ball { radius: ro, .. }) => ri <= ro,
        (TargetSet::Finite(a), TargetSet::Finite(b)) => a.is_subset(b),
        (TargetSet::Ball { radius, closed }, TargetSet::Finite(b)) => {
            let Target::Fin(g) = target else { return false };
            match g.elements() {
                Ok(els) => els
                    .into_iter()
                    .filter(|e| {
                        let d = g.dist_to_id(*e);
                        if *closed {
                            d <= *radius
                        } else {
                            d < *radius
                        }
                    })
                    .all(|e| b.contains(&e)),
                Err(_) => false,
            }
        }
        _ => false,
    }
}

/// Restricts the regular neighborhoods to a smaller symmetric target set:
/// the new source neighborhood is the part of the old one mapping into it.
pub fn localize(
    map: &ApproximationMap,
    b_tgt: &TargetSet,
    n_max: usize,
) -> Result<LocalizeResult, ApproxError> {
    if !set_contained(&map.target, b_tgt, &map.a_tgt) {
        return Err(ApproxError::NotContained);
    }
    let sym = symmetrize(map);
    let b_src = SymSet::from_iter(
        sym.a_src
            .iter()
            .copied()
            .filter(|&g| b_tgt.contains(&sym.target, &sym.phi_of(g))),
    );
    let mut new_map = sym.clone();
    new_map.a_src = b_src;
    new_map.a_tgt = b_tgt.clone();

    // Strengthened trapping: A^n elements mapping into a compact inside the
    // localized neighborhood must lie in the localized source set.
    let an = sym.a_src.power_set(&sym.source, n_max, 4 * crate::GROUP_SIZE_CAP * 8)?;
    let compacts: Vec<TargetSet> = match b_tgt {
        TargetSet::Ball { radius, .. } => (1..=3)
            .filter_map(|j| {
                let r = radius * j as f64 / 3.0 - 1e-12;
                (r > 0.0).then_some(TargetSet::Ball { radius: r, closed: true })
            })
            .collect(),
        TargetSet::Finite(set) => alloc::vec![TargetSet::Finite(set.clone())],
        TargetSet::All => Vec::new(),
        TargetSet::BallAt { .. } => Vec::new(),
    };
    let mut trapping = ConditionOutcome::pass_with(f64::INFINITY);
    'outer: for g in an.iter() {
        if new_map.a_src.contains(g) {
            continue;
        }
        let v = sym.phi_of(*g);
        for k in &compacts {
            let d = k.dist_to(&sym.target, &v);
            trapping.slack = fmin(trapping.slack, d);
            if k.contains(&sym.target, &v) {
                trapping = ConditionOutcome::fail(
                    -1e-9,
                    format!("{g:?} maps into the localized compact but escapes the lift"),
                );
                break 'outer;
            }
        }
    }
    Ok(LocalizeResult { map: new_map, trapping })
}

/// Displacement curve of one subgroup acting on a pointed space.
#[derive(Clone, Debug)]
pub struct SmallSubgroupVerdict {
    pub radii: Vec<f64>,
    /// `curve[j]` = max displacement over the closed ball of radius
    /// `radii[j]` around the basepoint.
    pub curve: Vec<f64>,
    pub small_at: bool,
    pub subgroup_ok: bool,
}

/// Evaluates displacement curves for per-index subgroups (given as element
/// indices into each triple's group); the verdict holds at tolerance
/// `delta` for the ball of radius `radius`.
pub fn detect_small(
    seq: &[(Triple, Vec<usize>)],
    delta: f64,
    radius: f64,
) -> Vec<SmallSubgroupVerdict> {
    let mut out = Vec::with_capacity(seq.len());
    for (t, subgroup) in seq {
        let m = &t.space;
        let p = m.basepoint();
        let mut radii: Vec<f64> = (0..m.len()).map(|x| m.d(p, x)).collect();
        radii.push(radius);
        radii.sort_by(f64::total_cmp);
        radii.dedup();

        let index = t.group.index_map();
        let subgroup_ok = subgroup.iter().all(|&a| {
            subgroup.iter().all(|&b| {
                let prod = t.group.elements[a].compose(&t.group.elements[b]);
                index.get(&prod.perm).is_some_and(|i| subgroup.contains(i))
            })
        });

        let curve: Vec<f64> = radii
            .iter()
            .map(|&r| {
                let mut worst = 0.0_f64;
                for &hi in subgroup {
                    let h = &t.group.elements[hi];
                    for x in 0..m.len() {
                        if m.d(p, x) <= r {
                            worst = fmax(worst, m.d(h.apply(x), x));
                        }
                    }
                }
                worst
            })
            .collect();
        let at = radii.iter().rposition(|&r| r <= radius).unwrap_or(0);
        out.push(SmallSubgroupVerdict {
            small_at: curve[at] <= delta,
            subgroup_ok,
            radii,
            curve,
        });
    }
    out
}

/// Outcome of the maximal-small extraction on one approximation map whose
/// source neighborhood is already localized.
#[derive(Clone, Debug)]
pub struct MaximalSmallOutcome {
    /// Zero set of the escape norm relative to the localized neighborhood.
    pub members: Vec<El>,
    pub is_subgroup: bool,
    pub anomaly: Option<(El, El)>,
    /// Largest target distance from the identity over the members.
    pub image_diameter: f64,
    pub inside_neighborhood: bool,
    pub contains_all_small: bool,
    pub missed_small_subgroup: Option<Vec<El>>,
    pub normal_in_span: bool,
    pub normal_in_full: Option<bool>,
}

/// Extracts the escape-norm zero set per index and audits it: subgroup,
/// smallness (image near the identity, members inside the neighborhood),
/// maximality against every enumerated subgroup small at `delta`, and
/// normality in the span of the neighborhood and in the full group.
pub fn maximal_small(
    maps: &[ApproximationMap],
    delta: f64,
) -> Result<Vec<MaximalSmallOutcome>, ApproxError> {
    let mut out = Vec::with_capacity(maps.len());
    for map in maps {
        let z = zero_set(&map.source, &map.a_src)?;
        let member_set: BTreeSet<El> = z.members.iter().copied().collect();
        let image_diameter = z
            .members
            .iter()
            .map(|&h| map.target.dist_to_id(&map.phi_of(h)))
            .fold(0.0, fmax);
        let inside = z.members.iter().all(|m| map.a_src.contains(m));

        // A subgroup is small exactly when each of its elements generates a
        // small cyclic subgroup, so elementwise cyclic witnesses decide the
        // universal containment claim; small carriers additionally get the
        // full two-generated enumeration.
        let mut contains_all = true;
        let mut missed = None;
        for &g in map.a_src.iter() {
            if member_set.contains(&g) {
                continue;
            }
            let cyc = subgroup_closure(&map.source, &[g])?;
            let small = cyc.iter().all(|h| map.a_src.contains(h))
                && cyc
                    .iter()
                    .map(|&h| map.target.dist_to_id(&map.phi_of(h)))
                    .fold(0.0, fmax)
                    <= delta;
            if small {
                contains_all = false;
                missed = Some(cyc);
                break;
            }
        }
        if contains_all && map.source.order() <= 128 {
            for sub in enumerate_small_subgroups(&map.source)? {
                let small = sub.iter().all(|h| map.a_src.contains(h))
                    && sub
                        .iter()
                        .map(|&h| map.target.dist_to_id(&map.phi_of(h)))
                        .fold(0.0, fmax)
                        <= delta;
                if small && !sub.iter().all(|h| member_set.contains(h)) {
                    contains_all = false;
                    missed = Some(sub);
                    break;
                }
            }
        }

        let gens: Vec<El> = map.a_src.iter().copied().collect();
        let span = subgroup_closure(&map.source, &gens)?;
        let normal_in = |ambient: &[El]| {
            ambient.iter().all(|&g| {
                z.members.iter().all(|&h| {
                    let c = map.source.mul(map.source.mul(g, h), map.source.inv(g));
                    member_set.contains(&c)
                })
            })
        };
        let normal_in_span = normal_in(&span);
        let normal_in_full = map.source.elements().ok().map(|els| normal_in(&els));

        out.push(MaximalSmallOutcome {
            is_subgroup: z.is_subgroup,
            anomaly: z.anomaly,
            members: z.members,
            image_diameter,
            inside_neighborhood: inside,
            contains_all_small: contains_all,
            missed_small_subgroup: missed,
            normal_in_span,
            normal_in_full,
        });
    }
    Ok(out)
}

/// Quotients each triple by its (normal, small) subgroup, producing the
/// downstairs sequence.
pub fn quotient_sequence(seq: &[(Triple, Vec<usize>)]) -> Result<Vec<Triple>, IsoError> {
    let mut out = Vec::with_capacity(seq.len());
    for (t, h) in seq {
        let qa = crate::iso::quotient_group(&t.space, &t.group, h)?;
        out.push(Triple { space: qa.space.clone(), group: qa.faithful() });
    }
    Ok(out)
}

/// Builds approximation maps out of equivariant distance witnesses: the
/// source is each index's isometry group with the basepoint metric, the
/// target the limit group, the neighborhoods the displacement-below-`r0`
/// sets on both sides.
pub fn induce_approximation(
    seq: &[(Triple, EpsApproximation)],
    limit: &Triple,
    r0: f64,
) -> Vec<ApproximationMap> {
    let limit_table = TableGroup::from_isometries(&limit.space, &limit.group);
    let target = Target::Fin(FinGroup::Table(limit_table));
    let q = limit.space.basepoint();
    let a_tgt: BTreeSet<El> = limit
        .group
        .elements
        .iter()
        .enumerate()
        .filter(|(_, h)| limit.space.d(h.apply(q), q) < r0)
        .map(|(j, _)| [j as i64, 0, 0])
        .collect();

    let mut out = Vec::with_capacity(seq.len());
    for (t, appr) in seq {
        let table = TableGroup::from_isometries(&t.space, &t.group);
        let p = t.space.basepoint();
        let a_src = SymSet::from_iter(
            t.group
                .elements
                .iter()
                .enumerate()
                .filter(|(_, g)| t.space.d(g.apply(p), p) < r0)
                .map(|(i, _)| [i as i64, 0, 0]),
        );
        let phi = PhiMap::Table(
            (0..t.group.order())
                .map(|i| ([i as i64, 0, 0], TElem::Fin([appr.phi[i] as i64, 0, 0])))
                .collect(),
        );
        out.push(ApproximationMap {
            source: FinGroup::Table(table),
            target: target.clone(),
            phi,
            a_src,
            a_tgt: TargetSet::Finite(a_tgt.clone()),
        });
    }
    out
}

/// Blow-up of a sequence whose target is a chartable model group of
/// dimension `k`: per index, verify the four scale-schedule requirements at
/// `m = schedule[i]` (identity proximity, density, discrete continuity and
/// multiplicativity, all at scale `1/m^2`), restrict to the source elements
/// mapping into the `1/m`-ball, and rescale the logarithm by `m`. The new
/// target neighborhood is the open unit ball.
pub fn blowup(
    maps: &[ApproximationMap],
    k: usize,
    schedule: &[u32],
) -> Result<Vec<ApproximationMap>, ApproxError> {
    let mut out = Vec::with_capacity(maps.len());
    for (index, map) in maps.iter().enumerate() {
        let Target::Model(model) = &map.target else {
            return Err(ApproxError::TargetChartMissing);
        };
        if model.dim() != k {
            return Err(ApproxError::TargetDimMismatch { expected: k, got: model.dim() });
        }
        let m = schedule.get(index).copied().unwrap_or(1).max(1) as f64;
        let tol = 1.0 / (m * m);
        let sym = symmetrize(map);
        let a1: Vec<El> = sym.a_src.iter().copied().collect();
        let phi1: Vec<TElem> = a1.iter().map(|&g| sym.phi_of(g)).collect();

        // 1: identity proximity.
        let d_id = sym.target.dist_to_id(&sym.phi_of(sym.source.id()));
        if d_id > tol {
            return Err(ApproxError::BulletFailed {
                index,
                bullet: 1,
                detail: format!("identity lands {d_id:.6} away, need <= {tol:.6}"),
            });
        }
        // 2: density of the image at scale 1/m^2 inside the 2/m ball.
        let net = TargetSet::Ball { radius: 2.0 / m, closed: true }.net(&sym.target, tol);
        for c in &net {
            let d = phi1.iter().map(|v| sym.target.dist(c, v)).fold(f64::INFINITY, fmin);
            if d > tol {
                return Err(ApproxError::BulletFailed {
                    index,
                    bullet: 2,
                    detail: format!("a {tol:.6}-ball in the 2/m ball misses the image by {d:.6}"),
                });
            }
        }
        // 3: discrete 1/m^2-continuity on A^2 at the carrier mesh.
        let a2 = sym.a_src.power_set(&sym.source, 2, 4 * crate::GROUP_SIZE_CAP * 8)?;
        let a2v: Vec<El> = a2.iter().copied().collect();
        let mesh = sym.source.mesh();
        let stride = stride_for(a2v.len() * a2v.len(), PAIR_CAP);
        let mut idx = 0;
        while idx < a2v.len() * a2v.len() {
            let g = a2v[idx / a2v.len()];
            let x = a2v[idx % a2v.len()];
            if g != x && sym.source.dist(g, x) <= 1.5 * mesh {
                let d = sym.target.dist(&sym.phi_of(g), &sym.phi_of(x));
                if d > tol {
                    return Err(ApproxError::BulletFailed {
                        index,
                        bullet: 3,
                        detail: format!("neighbors at the carrier mesh map {d:.6} apart"),
                    });
                }
            }
            idx += stride;
        }
        // 4: multiplicativity at 1/m^2 on A^2.
        let mut idx = 0;
        while idx < a2v.len() * a2v.len() {
            let g = a2v[idx / a2v.len()];
            let h = a2v[idx % a2v.len()];
            let lhs = sym.phi_of(sym.source.mul(g, h));
            let rhs = sym.target.mul(&sym.phi_of(g), &sym.phi_of(h));
            let d = sym.target.dist(&lhs, &rhs);
            if d > tol {
                return Err(ApproxError::BulletFailed {
                    index,
                    bullet: 4,
                    detail: format!("products drift {d:.6} apart at scale {tol:.6}"),
                });
            }
            idx += stride;
        }

        let b_src = SymSet::from_iter(
            a1.iter()
                .zip(&phi1)
                .filter(|(_, v)| sym.target.dist_to_id(v) < 1.0 / m)
                .map(|(&g, _)| g),
        );
        out.push(ApproximationMap {
            source: sym.source.clone(),
            target: Target::Model(ModelGroup::Euclidean { dim: k }),
            phi: PhiMap::Blowup {
                inner: Box::new(sym.phi.clone()),
                inner_target: model.clone(),
                scale: m,
            },
            a_src: b_src,
            a_tgt: TargetSet::Ball { radius: 1.0, closed: false },
        });
    }
    Ok(out)
}

/// Two-sided bounds on the blown-up map along sampled algebra directions:
/// slow directions stay in the closed `3 delta / 2` ball, directions with
/// escape quantity in `[delta, 1/delta]` avoid the open `delta / 4` ball.
#[derive(Clone, Debug)]
pub struct BlowupBoundsReport {
    pub worst_small_slack: f64,
    pub worst_large_slack: f64,
    pub pass: bool,
}

pub fn verify_blowup_bounds(
    blown: &[ApproximationMap],
    delta: f64,
    dirs: &[Vec<f64>],
    grid_h: f64,
) -> Result<Vec<BlowupBoundsReport>, ApproxError> {
    let mut out = Vec::with_capacity(blown.len());
    for map in blown {
        if map.source.chart_dim().is_none() {
            return Err(ApproxError::SourceChartMissing);
        }
        let mut small_slack = f64::INFINITY;
        let mut large_slack = f64::INFINITY;
        let psi_norm_at = |v: &[f64]| -> Result<f64, ApproxError> {
            let e = map.source.exp_grid(v)?;
            let TElem::Model(MElem::Coords(c)) = map.phi_of(e) else {
                return Err(ApproxError::Unsupported(String::from(
                    "blown map must produce coordinates",
                )));
            };
            Ok(math::norm(&c))
        };
        for u in dirs {
            let n = math::norm(u);
            if n < 1e-15 {
                continue;
            }
            let unit: Vec<f64> = u.iter().map(|x| x / n).collect();
            let unit_norm =
                crate::escape::tau_grid(&map.source, &map.a_src, &unit, grid_h, 1e4)
                    .algebra_norm();
            if unit_norm == 0.0 {
                // Non-exiting direction: the escape quantity vanishes at all
                // magnitudes, only the smallness bound applies.
                for c in [0.5, 1.0, 2.0] {
                    let v: Vec<f64> = unit.iter().map(|x| x * c).collect();
                    let norm = psi_norm_at(&v)?;
                    small_slack = fmin(small_slack, 1.5 * delta - norm);
                }
                continue;
            }
            for j in 1..=4 {
                let target = delta * j as f64 / 4.0;
                let v: Vec<f64> = unit.iter().map(|x| x * target / unit_norm).collect();
                let norm = psi_norm_at(&v)?;
                small_slack = fmin(small_slack, 1.5 * delta - norm);
            }
            let mut target = delta;
            while target <= 1.0 / delta + 1e-12 {
                let v: Vec<f64> = unit.iter().map(|x| x * target / unit_norm).collect();
                let norm = psi_norm_at(&v)?;
                large_slack = fmin(large_slack, norm - delta / 4.0);
                target *= 1.6;
            }
        }
        out.push(BlowupBoundsReport {
            worst_small_slack: small_slack,
            worst_large_slack: large_slack,
            pass: small_slack >= 0.0 && large_slack >= 0.0,
        });
    }
    Ok(out)
}

/// Discrete continuity modulus of the map on `A^n`: for each element, the
/// largest source ball whose image stays within `eps` of the element's
/// image; the map passes when every modulus clears the carrier mesh.
#[derive(Clone, Debug)]
pub struct EpsContinuityReport {
    pub worst_modulus: f64,
    pub mesh: f64,
    pub pass: bool,
}

pub fn check_eps_continuity(
    map: &ApproximationMap,
    n: usize,
    eps: f64,
) -> Result<EpsContinuityReport, ApproxError> {
    let an = map.a_src.power_set(&map.source, n, 4 * crate::GROUP_SIZE_CAP * 8)?;
    let els: Vec<El> = an.iter().copied().collect();
    let phis: Vec<TElem> = els.iter().map(|&g| map.phi_of(g)).collect();
    let stride = stride_for(els.len(), 2_000);
    let mut worst = f64::INFINITY;
    let mut i = 0;
    while i < els.len() {
        let mut modulus = f64::INFINITY;
        for j in 0..els.len() {
            if i != j && map.target.dist(&phis[i], &phis[j]) >= eps {
                modulus = fmin(modulus, map.source.dist(els[i], els[j]));
            }
        }
        worst = fmin(worst, modulus);
        i += stride;
    }
    let mesh = map.source.mesh();
    Ok(EpsContinuityReport { worst_modulus: worst, mesh, pass: worst > mesh * (1.0 + 1e-9) })
}
