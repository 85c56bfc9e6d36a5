//! Group carriers for the approximation calculus.
//!
//! Sources are always finite: either an explicit multiplication table (built
//! from an isometry group, with the basepoint metric) or a structured family
//! (cyclic arcs, integer truncations, grids, a mod-m Heisenberg group, torus
//! translations, cyclic towers with an ultrametric) whose products, inverses
//! and metrics are evaluated from coordinates so that large grids never need
//! materialized tables.
//!
//! Targets may additionally be continuous model groups (Euclidean space, the
//! integers, tori, 3-d rotations) carried by exact coordinates, with
//! exponential/logarithm charts where the family has one.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::iso::{dp_distance, IsometryGroup};
use crate::math::{self, fmin};
use crate::metric::FiniteMetricSpace;
use crate::GROUP_SIZE_CAP;

use core::f64::consts::PI;

/// Element of a finite source group: up to three integer coordinates,
/// always stored in the group's canonical range.
pub type El = [i64; 3];

#[derive(Clone, Debug, PartialEq)]
pub enum GroupError {
    TooLarge { order: usize, cap: usize },
    NoChart,
    EvenModulus { m: i64 },
}

impl core::fmt::Display for GroupError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GroupError::TooLarge { order, cap } => {
                write!(f, "group of order {order} exceeds enumeration cap {cap}")
            }
            GroupError::NoChart => write!(f, "group family has no exponential chart"),
            GroupError::EvenModulus { m } => {
                write!(f, "modulus {m} must be odd for the nilpotent grid family")
            }
        }
    }
}

impl core::error::Error for GroupError {}

/// Explicit finite group: multiplication table plus a metric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TableGroup {
    pub n: usize,
    pub mul: Vec<u32>,
    pub inv: Vec<u32>,
    pub id: usize,
    pub metric: Vec<f64>,
}

impl TableGroup {
    /// Converts an isometry group; the metric is the basepoint metric of the
    /// underlying space, so element `i` of the table is `group.elements[i]`.
    pub fn from_isometries(space: &FiniteMetricSpace, group: &IsometryGroup) -> Self {
        let n = group.order();
        let index = group.index_map();
        let mut mul = Vec::with_capacity(n * n);
        for a in &group.elements {
            for b in &group.elements {
                mul.push(index[&a.compose(b).perm] as u32);
            }
        }
        let inv = group
            .elements
            .iter()
            .map(|g| index[&g.inverse().perm] as u32)
            .collect();
        let mut metric = Vec::with_capacity(n * n);
        for a in &group.elements {
            for b in &group.elements {
                metric.push(dp_distance(space, a, b));
            }
        }
        TableGroup { n, mul, inv, id: group.identity_index(), metric }
    }
}

fn centered(x: i64, n: i64) -> i64 {
    let mut c = x.rem_euclid(n);
    if 2 * c > n {
        c -= n;
    }
    c
}

fn arc(k: i64, n: i64) -> f64 {
    // Angle of k grid units on an n-gon, wrapped to [0, pi].
    let c = centered(k, n).unsigned_abs() as f64;
    2.0 * PI * c / n as f64
}

/// Finite source group families.
#[derive(Clone, Debug, PartialEq)]
pub enum FinGroup {
    Table(TableGroup),
    /// Z_n as an n-gon: arc metric, `step` length units per grid unit of arc.
    Cyclic { n: i64, step: f64 },
    /// Z_n as a truncated integer line: metric from centered representatives.
    CyclicLine { n: i64, step: f64 },
    /// Z_m x Z_m as a truncated planar grid, Euclidean metric on centered
    /// coordinates scaled by `step`.
    Grid2 { m: i64, step: f64 },
    /// Mod-m Heisenberg group in polar coordinates (m odd), so inversion is
    /// coordinate negation; metric on centered coordinates scaled by `step`.
    Heis { m: i64, step: f64 },
    /// Abelian Z_m^3 with the same centered-coordinate metric; the
    /// commutative shadow of the mod-m Heisenberg group.
    Grid3 { m: i64, step: f64 },
    /// Z_g x Z_g acting as translations of a flat torus with factor radii
    /// `radii`; the metric is the translation norm.
    TorusGrid { g: i64, radii: [f64; 2] },
    /// Z_{p^k} with the p-adic norm metric.
    Padic { p: i64, k: u32 },
}

impl FinGroup {
    pub fn heis(m: i64, step: f64) -> Result<Self, GroupError> {
        if m % 2 == 0 {
            return Err(GroupError::EvenModulus { m });
        }
        Ok(FinGroup::Heis { m, step })
    }

    pub fn order(&self) -> usize {
        match self {
            FinGroup::Table(t) => t.n,
            FinGroup::Cyclic { n, .. } | FinGroup::CyclicLine { n, .. } => *n as usize,
            FinGroup::Grid2 { m, .. } => (*m as usize).pow(2),
            FinGroup::Heis { m, .. } | FinGroup::Grid3 { m, .. } => (*m as usize).pow(3),
            FinGroup::TorusGrid { g, .. } => (*g as usize).pow(2),
            FinGroup::Padic { p, k } => (*p as usize).pow(*k),
        }
    }

    pub fn id(&self) -> El {
        match self {
            FinGroup::Table(t) => [t.id as i64, 0, 0],
            _ => [0, 0, 0],
        }
    }

    pub fn canon(&self, e: El) -> El {
        match self {
            FinGroup::Table(_) => e,
            FinGroup::Cyclic { n, .. } | FinGroup::CyclicLine { n, .. } => {
                [e[0].rem_euclid(*n), 0, 0]
            }
            FinGroup::Grid2 { m, .. } => [e[0].rem_euclid(*m), e[1].rem_euclid(*m), 0],
            FinGroup::Heis { m, .. } | FinGroup::Grid3 { m, .. } => {
                [e[0].rem_euclid(*m), e[1].rem_euclid(*m), e[2].rem_euclid(*m)]
            }
            FinGroup::TorusGrid { g, .. } => [e[0].rem_euclid(*g), e[1].rem_euclid(*g), 0],
            FinGroup::Padic { p, k } => [e[0].rem_euclid(p.pow(*k)), 0, 0],
        }
    }

    pub fn mul(&self, a: El, b: El) -> El {
        match self {
            FinGroup::Table(t) => [t.mul[a[0] as usize * t.n + b[0] as usize] as i64, 0, 0],
            FinGroup::Cyclic { n, .. } | FinGroup::CyclicLine { n, .. } => {
                [(a[0] + b[0]).rem_euclid(*n), 0, 0]
            }
            FinGroup::Grid2 { m, .. } => {
                [(a[0] + b[0]).rem_euclid(*m), (a[1] + b[1]).rem_euclid(*m), 0]
            }
            FinGroup::Heis { m, .. } => {
                let inv2 = (m + 1) / 2;
                let c = a[2] + b[2] + inv2 * (a[0] * b[1] - b[0] * a[1]);
                [(a[0] + b[0]).rem_euclid(*m), (a[1] + b[1]).rem_euclid(*m), c.rem_euclid(*m)]
            }
            FinGroup::Grid3 { m, .. } => [
                (a[0] + b[0]).rem_euclid(*m),
                (a[1] + b[1]).rem_euclid(*m),
                (a[2] + b[2]).rem_euclid(*m),
            ],
            FinGroup::TorusGrid { g, .. } => {
                [(a[0] + b[0]).rem_euclid(*g), (a[1] + b[1]).rem_euclid(*g), 0]
            }
            FinGroup::Padic { p, k } => [(a[0] + b[0]).rem_euclid(p.pow(*k)), 0, 0],
        }
    }

    pub fn inv(&self, a: El) -> El {
        match self {
            FinGroup::Table(t) => [t.inv[a[0] as usize] as i64, 0, 0],
            _ => self.canon([-a[0], -a[1], -a[2]]),
        }
    }

    pub fn pow(&self, a: El, k: u32) -> El {
        let mut acc = self.id();
        for _ in 0..k {
            acc = self.mul(acc, a);
        }
        acc
    }

    pub fn dist(&self, a: El, b: El) -> f64 {
        match self {
            FinGroup::Table(t) => t.metric[a[0] as usize * t.n + b[0] as usize],
            FinGroup::Cyclic { n, step } => {
                step * centered(a[0] - b[0], *n).unsigned_abs() as f64
            }
            FinGroup::CyclicLine { n, step } => {
                step * (centered(a[0], *n) - centered(b[0], *n)).abs() as f64
            }
            FinGroup::Grid2 { m, step } => {
                let dx = (centered(a[0], *m) - centered(b[0], *m)) as f64;
                let dy = (centered(a[1], *m) - centered(b[1], *m)) as f64;
                step * math::hypot2(dx, dy)
            }
            FinGroup::Heis { m, step } | FinGroup::Grid3 { m, step } => {
                let dx = (centered(a[0], *m) - centered(b[0], *m)) as f64;
                let dy = (centered(a[1], *m) - centered(b[1], *m)) as f64;
                let dz = (centered(a[2], *m) - centered(b[2], *m)) as f64;
                step * math::sqrt(dx * dx + dy * dy + dz * dz)
            }
            FinGroup::TorusGrid { g, radii } => {
                let t0 = radii[0] * arc(a[0] - b[0], *g);
                let t1 = radii[1] * arc(a[1] - b[1], *g);
                math::hypot2(t0, t1)
            }
            FinGroup::Padic { p, k } => {
                let diff = (a[0] - b[0]).rem_euclid(p.pow(*k));
                if diff == 0 {
                    return 0.0;
                }
                let mut v = 0u32;
                let mut d = diff;
                while d % p == 0 {
                    d /= p;
                    v += 1;
                }
                math::powi(*p as f64, -(v as i32))
            }
        }
    }

    pub fn dist_to_id(&self, a: El) -> f64 {
        self.dist(a, self.id())
    }

    /// Smallest positive distance realized between distinct elements; the
    /// natural resolution of the carrier.
    pub fn mesh(&self) -> f64 {
        match self {
            FinGroup::Table(t) => {
                let mut m = f64::INFINITY;
                for i in 0..t.n {
                    for j in 0..t.n {
                        let d = t.metric[i * t.n + j];
                        if d > 0.0 {
                            m = fmin(m, d);
                        }
                    }
                }
                m
            }
            FinGroup::Cyclic { step, .. }
            | FinGroup::CyclicLine { step, .. }
            | FinGroup::Grid2 { step, .. }
            | FinGroup::Heis { step, .. }
            | FinGroup::Grid3 { step, .. } => *step,
            FinGroup::TorusGrid { g, radii } => {
                let a = 2.0 * PI / *g as f64;
                fmin(radii[0] * a, radii[1] * a)
            }
            FinGroup::Padic { p, k } => math::powi(*p as f64, -(*k as i32 - 1)),
        }
    }

    /// All elements, guarded by the enumeration cap.
    pub fn elements(&self) -> Result<Vec<El>, GroupError> {
        let order = self.order();
        if order > GROUP_SIZE_CAP {
            return Err(GroupError::TooLarge { order, cap: GROUP_SIZE_CAP });
        }
        let mut out = Vec::with_capacity(order);
        match self {
            FinGroup::Table(t) => {
                for i in 0..t.n {
                    out.push([i as i64, 0, 0]);
                }
            }
            FinGroup::Cyclic { n, .. } | FinGroup::CyclicLine { n, .. } => {
                for i in 0..*n {
                    out.push([i, 0, 0]);
                }
            }
            FinGroup::Grid2 { m, .. } => {
                for i in 0..*m {
                    for j in 0..*m {
                        out.push([i, j, 0]);
                    }
                }
            }
            FinGroup::Heis { m, .. } | FinGroup::Grid3 { m, .. } => {
                for i in 0..*m {
                    for j in 0..*m {
                        for l in 0..*m {
                            out.push([i, j, l]);
                        }
                    }
                }
            }
            FinGroup::TorusGrid { g, .. } => {
                for i in 0..*g {
                    for j in 0..*g {
                        out.push([i, j, 0]);
                    }
                }
            }
            FinGroup::Padic { p, k } => {
                for i in 0..p.pow(*k) {
                    out.push([i, 0, 0]);
                }
            }
        }
        Ok(out)
    }

    /// Dimension of the discrete exponential chart, for the grid families
    /// that have one.
    pub fn chart_dim(&self) -> Option<usize> {
        match self {
            FinGroup::Cyclic { .. } | FinGroup::CyclicLine { .. } => Some(1),
            FinGroup::Grid2 { .. } | FinGroup::TorusGrid { .. } => Some(2),
            _ => None,
        }
    }

    /// Nearest grid element to the continuous exponential of `v`.
    pub fn exp_grid(&self, v: &[f64]) -> Result<El, GroupError> {
        match self {
            FinGroup::Cyclic { n, step } | FinGroup::CyclicLine { n, step } => {
                let k = math::round(v[0] / step) as i64;
                Ok(self.canon([k.rem_euclid(*n), 0, 0]))
            }
            FinGroup::Grid2 { m, step } => {
                let a = math::round(v[0] / step) as i64;
                let b = math::round(v[1] / step) as i64;
                Ok(self.canon([a.rem_euclid(*m), b.rem_euclid(*m), 0]))
            }
            FinGroup::TorusGrid { g, radii } => {
                let unit = 2.0 * PI / *g as f64;
                let a = math::round(v[0] / radii[0] / unit) as i64;
                let b = math::round(v[1] / radii[1] / unit) as i64;
                Ok(self.canon([a.rem_euclid(*g), b.rem_euclid(*g), 0]))
            }
            _ => Err(GroupError::NoChart),
        }
    }
}

/// Element of a continuous model group.
#[derive(Clone, Debug, PartialEq)]
pub enum MElem {
    Coords(Vec<f64>),
    Quat([f64; 4]),
}

impl MElem {
    pub fn coords(&self) -> &[f64] {
        match self {
            MElem::Coords(c) => c,
            MElem::Quat(q) => q,
        }
    }
}

/// Continuous target groups, carried by coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelGroup {
    Euclidean { dim: usize },
    /// The integers inside the real line.
    Integers,
    /// Product of circles with the given radii; elements are angle vectors
    /// wrapped to (-pi, pi].
    Torus { radii: Vec<f64> },
    /// 3-d rotations as unit quaternions with the bi-invariant angle metric.
    Rotations,
}

fn quat_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    let (aw, ax, ay, az) = (a[0], a[1], a[2], a[3]);
    let (bw, bx, by, bz) = (b[0], b[1], b[2], b[3]);
    [
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ]
}

impl ModelGroup {
    pub fn dim(&self) -> usize {
        match self {
            ModelGroup::Euclidean { dim } => *dim,
            ModelGroup::Integers => 1,
            ModelGroup::Torus { radii } => radii.len(),
            ModelGroup::Rotations => 3,
        }
    }

    pub fn id(&self) -> MElem {
        match self {
            ModelGroup::Euclidean { dim } => MElem::Coords(alloc::vec![0.0; *dim]),
            ModelGroup::Integers => MElem::Coords(alloc::vec![0.0]),
            ModelGroup::Torus { radii } => MElem::Coords(alloc::vec![0.0; radii.len()]),
            ModelGroup::Rotations => MElem::Quat([1.0, 0.0, 0.0, 0.0]),
        }
    }

    pub fn mul(&self, a: &MElem, b: &MElem) -> MElem {
        match self {
            ModelGroup::Euclidean { .. } | ModelGroup::Integers => MElem::Coords(
                a.coords().iter().zip(b.coords()).map(|(x, y)| x + y).collect(),
            ),
            ModelGroup::Torus { .. } => MElem::Coords(
                a.coords()
                    .iter()
                    .zip(b.coords())
                    .map(|(x, y)| math::wrap_angle(x + y))
                    .collect(),
            ),
            ModelGroup::Rotations => {
                let (MElem::Quat(qa), MElem::Quat(qb)) = (a, b) else {
                    panic!("rotation elements are quaternions");
                };
                let q = quat_mul(*qa, *qb);
                let n = math::norm(&q);
                MElem::Quat([q[0] / n, q[1] / n, q[2] / n, q[3] / n])
            }
        }
    }

    pub fn inv(&self, a: &MElem) -> MElem {
        match self {
            ModelGroup::Euclidean { .. } | ModelGroup::Integers => {
                MElem::Coords(a.coords().iter().map(|x| -x).collect())
            }
            ModelGroup::Torus { .. } => {
                MElem::Coords(a.coords().iter().map(|x| math::wrap_angle(-x)).collect())
            }
            ModelGroup::Rotations => {
                let MElem::Quat(q) = a else { panic!("rotation elements are quaternions") };
                MElem::Quat([q[0], -q[1], -q[2], -q[3]])
            }
        }
    }

    pub fn dist(&self, a: &MElem, b: &MElem) -> f64 {
        match self {
            ModelGroup::Euclidean { .. } | ModelGroup::Integers => {
                math::dist(a.coords(), b.coords())
            }
            ModelGroup::Torus { radii } => {
                let mut s = 0.0;
                for ((x, y), r) in a.coords().iter().zip(b.coords()).zip(radii) {
                    let w = r * math::wrap_angle(x - y);
                    s += w * w;
                }
                math::sqrt(s)
            }
            ModelGroup::Rotations => {
                let (MElem::Quat(qa), MElem::Quat(qb)) = (a, b) else {
                    panic!("rotation elements are quaternions");
                };
                let dot = qa.iter().zip(qb).map(|(x, y)| x * y).sum::<f64>().abs();
                2.0 * math::acos(dot)
            }
        }
    }

    pub fn dist_to_id(&self, a: &MElem) -> f64 {
        self.dist(a, &self.id())
    }

    /// Exponential chart from R^dim.
    pub fn exp(&self, v: &[f64]) -> MElem {
        match self {
            ModelGroup::Euclidean { .. } => MElem::Coords(v.to_vec()),
            ModelGroup::Integers => MElem::Coords(alloc::vec![math::round(v[0])]),
            ModelGroup::Torus { radii } => MElem::Coords(
                v.iter().zip(radii).map(|(x, r)| math::wrap_angle(x / r)).collect(),
            ),
            ModelGroup::Rotations => {
                let angle = math::norm(v);
                if angle < 1e-15 {
                    return MElem::Quat([1.0, 0.0, 0.0, 0.0]);
                }
                let half = angle / 2.0;
                let s = math::sin(half) / angle;
                MElem::Quat([math::cos(half), v[0] * s, v[1] * s, v[2] * s])
            }
        }
    }

    /// Logarithm chart where injective: within the open pi-cube of angles on
    /// the torus, within rotation angle pi on rotations. `None` outside.
    pub fn log(&self, a: &MElem) -> Option<Vec<f64>> {
        const EDGE: f64 = 1e-9;
        match self {
            ModelGroup::Euclidean { .. } | ModelGroup::Integers => Some(a.coords().to_vec()),
            ModelGroup::Torus { radii } => {
                let mut v = Vec::with_capacity(radii.len());
                for (x, r) in a.coords().iter().zip(radii) {
                    let w = math::wrap_angle(*x);
                    if w.abs() >= PI - EDGE {
                        return None;
                    }
                    v.push(r * w);
                }
                Some(v)
            }
            ModelGroup::Rotations => {
                let MElem::Quat(q) = a else { panic!("rotation elements are quaternions") };
                let q = if q[0] < 0.0 { [-q[0], -q[1], -q[2], -q[3]] } else { *q };
                let angle = 2.0 * math::acos(q[0].clamp(-1.0, 1.0));
                if angle >= PI - EDGE {
                    return None;
                }
                if angle < 1e-15 {
                    return Some(alloc::vec![0.0, 0.0, 0.0]);
                }
                let s = math::sqrt(1.0 - q[0] * q[0]);
                let f = angle / (2.0 * s);
                Some(alloc::vec![2.0 * q[1] * f, 2.0 * q[2] * f, 2.0 * q[3] * f])
            }
        }
    }
}

/// A target group: finite or a continuous model.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Fin(FinGroup),
    Model(ModelGroup),
}

/// Element of a target group.
#[derive(Clone, Debug, PartialEq)]
pub enum TElem {
    Fin(El),
    Model(MElem),
}

impl Target {
    pub fn id(&self) -> TElem {
        match self {
            Target::Fin(g) => TElem::Fin(g.id()),
            Target::Model(m) => TElem::Model(m.id()),
        }
    }

    pub fn mul(&self, a: &TElem, b: &TElem) -> TElem {
        match (self, a, b) {
            (Target::Fin(g), TElem::Fin(x), TElem::Fin(y)) => TElem::Fin(g.mul(*x, *y)),
            (Target::Model(m), TElem::Model(x), TElem::Model(y)) => TElem::Model(m.mul(x, y)),
            _ => panic!("element does not belong to this target"),
        }
    }

    pub fn inv(&self, a: &TElem) -> TElem {
        match (self, a) {
            (Target::Fin(g), TElem::Fin(x)) => TElem::Fin(g.inv(*x)),
            (Target::Model(m), TElem::Model(x)) => TElem::Model(m.inv(x)),
            _ => panic!("element does not belong to this target"),
        }
    }

    pub fn dist(&self, a: &TElem, b: &TElem) -> f64 {
        match (self, a, b) {
            (Target::Fin(g), TElem::Fin(x), TElem::Fin(y)) => g.dist(*x, *y),
            (Target::Model(m), TElem::Model(x), TElem::Model(y)) => m.dist(x, y),
            _ => panic!("element does not belong to this target"),
        }
    }

    pub fn dist_to_id(&self, a: &TElem) -> f64 {
        self.dist(a, &self.id())
    }
}

/// A symmetric subset of a target group: a metric ball around the identity,
/// a ball around an arbitrary element (for test families), everything, or an
/// explicit finite member list.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetSet {
    Ball { radius: f64, closed: bool },
    BallAt { center: TElem, radius: f64, closed: bool },
    All,
    Finite(BTreeSet<El>),
}

impl TargetSet {
    pub fn contains(&self, target: &Target, x: &TElem) -> bool {
        match self {
            TargetSet::Ball { radius, closed } => {
                let d = target.dist_to_id(x);
                if *closed {
                    d <= *radius
                } else {
                    d < *radius
                }
            }
            TargetSet::BallAt { center, radius, closed } => {
                let d = target.dist(center, x);
                if *closed {
                    d <= *radius
                } else {
                    d < *radius
                }
            }
            TargetSet::All => true,
            TargetSet::Finite(set) => match x {
                TElem::Fin(e) => set.contains(e),
                _ => false,
            },
        }
    }

    /// Distance from `x` to the closure of the set. For balls this is the
    /// defect beyond the radius; for member lists the minimum over members.
    pub fn dist_to(&self, target: &Target, x: &TElem) -> f64 {
        match self {
            TargetSet::Ball { radius, .. } => math::fmax(0.0, target.dist_to_id(x) - radius),
            TargetSet::BallAt { center, radius, .. } => {
                math::fmax(0.0, target.dist(center, x) - radius)
            }
            TargetSet::All => 0.0,
            TargetSet::Finite(set) => set
                .iter()
                .map(|e| target.dist(&TElem::Fin(*e), x))
                .fold(f64::INFINITY, fmin),
        }
    }

    /// Ball shrunk by a margin; other sets are unchanged.
    pub fn shrink(&self, margin: f64) -> TargetSet {
        match self {
            TargetSet::Ball { radius, closed } => {
                TargetSet::Ball { radius: radius - margin, closed: *closed }
            }
            other => other.clone(),
        }
    }

    pub fn is_symmetric(&self, target: &Target) -> bool {
        match self {
            TargetSet::Ball { .. } | TargetSet::All => true,
            TargetSet::BallAt { center, .. } => target.dist(center, &target.id()) < 1e-12,
            TargetSet::Finite(set) => {
                let Target::Fin(g) = target else { return false };
                set.contains(&g.id()) && set.iter().all(|e| set.contains(&g.inv(*e)))
            }
        }
    }

    /// Deterministic net of the set at roughly the given spacing, used to
    /// build finite test families. Unbounded sets yield an empty net.
    pub fn net(&self, target: &Target, spacing: f64) -> Vec<TElem> {
        match (self, target) {
            (TargetSet::Finite(set), _) => set.iter().map(|e| TElem::Fin(*e)).collect(),
            (TargetSet::All, Target::Fin(g)) => match g.elements() {
                Ok(els) => els.into_iter().map(TElem::Fin).collect(),
                Err(_) => Vec::new(),
            },
            (TargetSet::Ball { radius, .. }, Target::Fin(g)) => match g.elements() {
                Ok(els) => els
                    .into_iter()
                    .filter(|e| g.dist_to_id(*e) <= *radius)
                    .map(TElem::Fin)
                    .collect(),
                Err(_) => Vec::new(),
            },
            (TargetSet::Ball { radius, .. }, Target::Model(m)) => {
                model_ball_net(m, *radius, spacing)
            }
            (TargetSet::All, Target::Model(m)) => match m {
                ModelGroup::Torus { radii } => {
                    let r = PI * radii.iter().cloned().fold(0.0_f64, math::fmax) * 2.0;
                    model_ball_net(m, r, spacing)
                }
                ModelGroup::Rotations => model_ball_net(m, PI, spacing),
                _ => Vec::new(),
            },
            (TargetSet::BallAt { .. }, _) => Vec::new(),
        }
    }
}

fn model_ball_net(m: &ModelGroup, radius: f64, spacing: f64) -> Vec<TElem> {
    let mut out = Vec::new();
    match m {
        ModelGroup::Integers => {
            let r = math::floor(radius) as i64;
            for x in -r..=r {
                out.push(TElem::Model(MElem::Coords(alloc::vec![x as f64])));
            }
            out
        }
        ModelGroup::Euclidean { dim } => {
            let steps = math::ceil(radius / spacing) as i64;
            let mut idx = alloc::vec![-steps; *dim];
            loop {
                let v: Vec<f64> = idx.iter().map(|&i| i as f64 * spacing).collect();
                if math::norm(&v) <= radius + 1e-12 {
                    out.push(TElem::Model(MElem::Coords(v)));
                }
                let mut d = 0;
                loop {
                    if d == *dim {
                        return out;
                    }
                    idx[d] += 1;
                    if idx[d] <= steps {
                        break;
                    }
                    idx[d] = -steps;
                    d += 1;
                }
            }
        }
        ModelGroup::Torus { radii } => {
            let dim = radii.len();
            let steps: Vec<i64> = radii
                .iter()
                .map(|r| {
                    let max_angle = fmin(PI, radius / r);
                    math::ceil(max_angle * r / spacing) as i64
                })
                .collect();
            let mut idx: Vec<i64> = steps.iter().map(|s| -s).collect();
            loop {
                let angles: Vec<f64> = idx
                    .iter()
                    .zip(radii)
                    .map(|(&i, r)| math::wrap_angle(i as f64 * spacing / r))
                    .collect();
                let e = MElem::Coords(angles);
                if m.dist_to_id(&e) <= radius + 1e-12 {
                    out.push(TElem::Model(e));
                }
                let mut d = 0;
                loop {
                    if d == dim {
                        return out;
                    }
                    idx[d] += 1;
                    if idx[d] <= steps[d] {
                        break;
                    }
                    idx[d] = -steps[d];
                    d += 1;
                }
            }
        }
        ModelGroup::Rotations => {
            out.push(TElem::Model(m.id()));
            let mut dirs = Vec::new();
            for x in -1i64..=1 {
                for y in -1i64..=1 {
                    for z in -1i64..=1 {
                        if (x, y, z) == (0, 0, 0) {
                            continue;
                        }
                        let v = [x as f64, y as f64, z as f64];
                        let n = math::norm(&v);
                        dirs.push([v[0] / n, v[1] / n, v[2] / n]);
                    }
                }
            }
            let reach = fmin(radius, PI - 1e-6);
            let steps = math::ceil(reach / spacing).max(1.0) as usize;
            for k in 1..=steps {
                let t = reach * k as f64 / steps as f64;
                for d in &dirs {
                    out.push(TElem::Model(m.exp(&[d[0] * t, d[1] * t, d[2] * t])));
                }
            }
            out
        }
    }
}

/// Smallest distance from a point of `k` to a target point outside `u`;
/// infinite when `u` covers the whole group, negative-infinity sentinel when
/// the pair shape is unsupported.
pub fn set_gap(target: &Target, k: &TargetSet, u: &TargetSet) -> f64 {
    match (k, u) {
        (_, TargetSet::All) => f64::INFINITY,
        (TargetSet::Ball { radius: rk, .. }, TargetSet::Ball { radius: ru, .. }) => ru - rk,
        (TargetSet::Finite(ks), TargetSet::Finite(us)) => {
            let Target::Fin(g) = target else { return f64::NEG_INFINITY };
            let Ok(all) = g.elements() else { return f64::NEG_INFINITY };
            let mut gap = f64::INFINITY;
            for a in ks {
                for b in &all {
                    if !us.contains(b) {
                        gap = fmin(gap, g.dist(*a, *b));
                    }
                }
            }
            gap
        }
        _ => f64::NEG_INFINITY,
    }
}

/// A symmetric subset of a finite source group.
#[derive(Clone, Debug, PartialEq)]
pub struct SymSet {
    pub members: BTreeSet<El>,
}

impl SymSet {
    pub fn new(members: BTreeSet<El>) -> Self {
        Self { members }
    }

    pub fn from_iter<I: IntoIterator<Item = El>>(iter: I) -> Self {
        Self { members: iter.into_iter().collect() }
    }

    pub fn contains(&self, e: &El) -> bool {
        self.members.contains(e)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &El> {
        self.members.iter()
    }

    /// Symmetric: contains the identity and is closed under inversion.
    pub fn is_symmetric(&self, g: &FinGroup) -> bool {
        self.members.contains(&g.id())
            && self.members.iter().all(|e| self.members.contains(&g.inv(*e)))
    }

    /// The product set of `n` copies of this set (`n >= 1`); since the
    /// identity is a member, these sets are nested in `n`.
    pub fn power_set(&self, g: &FinGroup, n: usize, cap: usize) -> Result<SymSet, GroupError> {
        let mut acc = self.members.clone();
        for _ in 1..n {
            let mut next = BTreeSet::new();
            for a in &acc {
                for b in &self.members {
                    next.insert(g.mul(*a, *b));
                    if next.len() > cap {
                        return Err(GroupError::TooLarge { order: next.len(), cap });
                    }
                }
            }
            acc = next;
        }
        Ok(SymSet::new(acc))
    }
}

/// Closure of a generating set inside a finite group, with cap.
pub fn subgroup_closure(g: &FinGroup, gens: &[El]) -> Result<Vec<El>, GroupError> {
    let mut set: BTreeSet<El> = BTreeSet::new();
    set.insert(g.id());
    let mut frontier: Vec<El> = alloc::vec![g.id()];
    let mut gen_all: Vec<El> = gens.to_vec();
    for e in gens {
        gen_all.push(g.inv(*e));
    }
    while let Some(x) = frontier.pop() {
        for s in &gen_all {
            let p = g.mul(*s, x);
            if set.insert(p) {
                if set.len() > GROUP_SIZE_CAP {
                    return Err(GroupError::TooLarge { order: set.len(), cap: GROUP_SIZE_CAP });
                }
                frontier.push(p);
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// All subgroups generated by at most two elements, deduplicated. That
/// covers the full subgroup lattice for every group this crate ships
/// (cyclic, rank-2 abelian, and S3-sized tables).
pub fn enumerate_small_subgroups(g: &FinGroup) -> Result<Vec<Vec<El>>, GroupError> {
    let els = g.elements()?;
    let mut seen: BTreeSet<Vec<El>> = BTreeSet::new();
    seen.insert(alloc::vec![g.id()]);
    for (i, a) in els.iter().enumerate() {
        let sub = subgroup_closure(g, &[*a])?;
        seen.insert(sub);
        for b in els.iter().skip(i + 1) {
            let sub = subgroup_closure(g, &[*a, *b])?;
            seen.insert(sub);
        }
    }
    Ok(seen.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::full_isometry_group;
    use alloc::vec;

    #[test]
    fn cyclic_arcs() {
        let g = FinGroup::Cyclic { n: 8, step: 0.25 };
        assert_eq!(g.dist([1, 0, 0], [0, 0, 0]), 0.25);
        assert_eq!(g.dist([7, 0, 0], [0, 0, 0]), 0.25);
        assert_eq!(g.dist([4, 0, 0], [0, 0, 0]), 1.0);
        assert_eq!(g.mul([5, 0, 0], [6, 0, 0]), [3, 0, 0]);
        assert_eq!(g.inv([3, 0, 0]), [5, 0, 0]);
    }

    #[test]
    fn heis_polar_inverse_is_negation() {
        let g = FinGroup::heis(7, 1.0).unwrap();
        for a in g.elements().unwrap() {
            let i = g.inv(a);
            assert_eq!(g.mul(a, i), g.id());
            assert_eq!(g.mul(i, a), g.id());
        }
    }

    #[test]
    fn heis_is_associative_and_nonabelian() {
        let g = FinGroup::heis(5, 1.0).unwrap();
        let els = g.elements().unwrap();
        let sample = [els[3], els[17], els[44], els[101], els[7]];
        for &a in &sample {
            for &b in &sample {
                for &c in &sample {
                    assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
                }
            }
        }
        let x = [1, 0, 0];
        let y = [0, 1, 0];
        assert_ne!(g.mul(x, y), g.mul(y, x));
    }

    #[test]
    fn padic_metric_is_ultrametric() {
        let g = FinGroup::Padic { p: 2, k: 4 };
        assert_eq!(g.dist([8, 0, 0], [0, 0, 0]), 0.125);
        assert_eq!(g.dist([4, 0, 0], [0, 0, 0]), 0.25);
        assert_eq!(g.dist([3, 0, 0], [0, 0, 0]), 1.0);
        let els = g.elements().unwrap();
        for &a in &els {
            for &b in &els {
                for &c in &els {
                    let lhs = g.dist(a, c);
                    let rhs = math::fmax(g.dist(a, b), g.dist(b, c));
                    assert!(lhs <= rhs + 1e-12);
                }
            }
        }
    }

    #[test]
    fn table_from_isometries_round_trips() {
        let m = FiniteMetricSpace::new(
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            0,
        )
        .unwrap();
        let iso = full_isometry_group(&m).unwrap();
        let t = TableGroup::from_isometries(&m, &iso);
        let g = FinGroup::Table(t);
        assert_eq!(g.order(), 6);
        let els = g.elements().unwrap();
        for &a in &els {
            assert_eq!(g.mul(a, g.inv(a)), g.id());
        }
    }

    #[test]
    fn torus_model_round_trip() {
        let m = ModelGroup::Torus { radii: vec![1.0, 0.5] };
        let v = [0.3, -0.2];
        let e = m.exp(&v);
        let back = m.log(&e).unwrap();
        assert!((back[0] - 0.3).abs() < 1e-12);
        assert!((back[1] + 0.2).abs() < 1e-12);
        // The antipode sits outside the chart; past-pi inputs wrap into it.
        assert!(m.log(&m.exp(&[PI, 0.0])).is_none());
        let wrapped = m.log(&m.exp(&[PI + 0.1, 0.0])).unwrap();
        assert!((wrapped[0] + (PI - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn rotation_model_round_trip() {
        let m = ModelGroup::Rotations;
        let v = [0.4, -0.1, 0.7];
        let e = m.exp(&v);
        let back = m.log(&e).unwrap();
        for i in 0..3 {
            assert!((back[i] - v[i]).abs() < 1e-12, "coord {i}: {} vs {}", back[i], v[i]);
        }
        assert!((m.dist_to_id(&e) - math::norm(&v)).abs() < 1e-12);
        // metric invariant under left translation
        let a = m.exp(&[0.2, 0.3, -0.5]);
        let d0 = m.dist(&a, &e);
        let k = m.exp(&[1.0, 0.0, 0.4]);
        let d1 = m.dist(&m.mul(&k, &a), &m.mul(&k, &e));
        assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn euclidean_net_covers_ball() {
        let m = ModelGroup::Euclidean { dim: 2 };
        let set = TargetSet::Ball { radius: 1.0, closed: false };
        let net = set.net(&Target::Model(m.clone()), 0.2);
        assert!(!net.is_empty());
        for p in &net {
            let TElem::Model(e) = p else { panic!() };
            assert!(m.dist_to_id(e) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn symmetric_subset_power_sets_nest() {
        let g = FinGroup::CyclicLine { n: 101, step: 1.0 };
        let a = SymSet::from_iter([[100, 0, 0], [0, 0, 0], [1, 0, 0]].map(|e| g.canon(e)));
        assert!(a.is_symmetric(&g));
        let a2 = a.power_set(&g, 2, 10_000).unwrap();
        let a3 = a.power_set(&g, 3, 10_000).unwrap();
        assert!(a.members.iter().all(|e| a2.contains(e)));
        assert!(a2.members.iter().all(|e| a3.contains(e)));
        assert_eq!(a3.len(), 7);
    }

    #[test]
    fn subgroup_enumeration_s3_table() {
        let m = FiniteMetricSpace::new(
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            0,
        )
        .unwrap();
        let iso = full_isometry_group(&m).unwrap();
        let g = FinGroup::Table(TableGroup::from_isometries(&m, &iso));
        let subs = enumerate_small_subgroups(&g).unwrap();
        // S3 has exactly 6 subgroups.
        assert_eq!(subs.len(), 6);
    }

    #[test]
    fn set_gap_between_balls() {
        let t = Target::Model(ModelGroup::Euclidean { dim: 1 });
        let k = TargetSet::Ball { radius: 0.3, closed: true };
        let u = TargetSet::Ball { radius: 0.5, closed: false };
        assert!((set_gap(&t, &k, &u) - 0.2).abs() < 1e-12);
        assert_eq!(set_gap(&t, &k, &TargetSet::All), f64::INFINITY);
    }
}
