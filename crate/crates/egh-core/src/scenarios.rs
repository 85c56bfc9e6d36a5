//! Deterministic scenario generators: the example families every checker
//! and the whole regression suite run on. Regeneration is bit-identical.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use core::f64::consts::PI;

use crate::approx::{ApproximationMap, PhiMap};
use crate::gh::Triple;
use crate::group::{El, FinGroup, ModelGroup, SymSet, Target, TargetSet};
use crate::iso::{full_isometry_group, Isometry, IsometryGroup};
use crate::math;
use crate::metric::FiniteMetricSpace;

/// Tripod graph with three legs: vertices a, b, c, x, y, z (indices 0..5),
/// triangle edges (a,b), (b,c), (c,a) and leg edges (a,x), (b,y), (c,z),
/// every edge of length `i`, shortest-path metric, basepoint x.
#[derive(Clone, Debug)]
pub struct HexagonScenario {
    pub triple: Triple,
    /// Indices of {identity, leaf swap fixing the basepoint leg} in the
    /// isometry group.
    pub h_indices: Vec<usize>,
}

pub const HEXAGON_A: usize = 0;
pub const HEXAGON_B: usize = 1;
pub const HEXAGON_C: usize = 2;
pub const HEXAGON_X: usize = 3;
pub const HEXAGON_Y: usize = 4;
pub const HEXAGON_Z: usize = 5;

pub fn hexagon_graph(i: u32) -> HexagonScenario {
    let len = i as f64;
    let edges = [
        (HEXAGON_A, HEXAGON_X),
        (HEXAGON_B, HEXAGON_Y),
        (HEXAGON_C, HEXAGON_Z),
        (HEXAGON_A, HEXAGON_B),
        (HEXAGON_B, HEXAGON_C),
        (HEXAGON_C, HEXAGON_A),
    ];
    let space = graph_metric(6, &edges, len, HEXAGON_X);
    let group = full_isometry_group(&space).expect("six-point space");
    // the swap of b and c carries y and z along and fixes a and x
    let swap = Isometry { perm: alloc::vec![0, 2, 1, 3, 5, 4] };
    let index = group.index_map();
    let h_indices = alloc::vec![group.identity_index(), index[&swap.perm]];
    let triple = Triple { space, group };
    HexagonScenario { triple, h_indices }
}

/// Shortest-path metric of an unweighted edge list with uniform edge length.
fn graph_metric(n: usize, edges: &[(usize, usize)], len: f64, basepoint: usize) -> FiniteMetricSpace {
    let inf = f64::INFINITY;
    let mut d = alloc::vec![alloc::vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v) in edges {
        d[u][v] = len;
        d[v][u] = len;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetricSpace::new(d, basepoint).expect("graph metric is square")
}

/// Approximation of the tripod's isometry group into the trivial limit
/// group: everything maps to the identity, the regular neighborhoods are
/// the displacement-below-one sets on both sides. This is the sequence the
/// maximal-small extraction runs on; at finite scale the tripod-to-ray
/// distance itself is pinned at the 1/5 cap (three leaves pairwise 3i apart
/// cannot embed in a line), so the maps are built directly.
pub fn hexagon_approximation(i: u32) -> ApproximationMap {
    let s = hexagon_graph(i);
    let table = crate::group::TableGroup::from_isometries(&s.triple.space, &s.triple.group);
    let p = s.triple.space.basepoint();
    let a_src = SymSet::from_iter(
        s.triple
            .group
            .elements
            .iter()
            .enumerate()
            .filter(|(_, g)| s.triple.space.d(g.apply(p), p) < 1.0)
            .map(|(idx, _)| [idx as i64, 0, 0]),
    );
    let trivial = FinGroup::Table(crate::group::TableGroup {
        n: 1,
        mul: alloc::vec![0],
        inv: alloc::vec![0],
        id: 0,
        metric: alloc::vec![0.0],
    });
    let phi = PhiMap::Table(
        (0..s.triple.group.order())
            .map(|idx| ([idx as i64, 0, 0], crate::group::TElem::Fin([0, 0, 0])))
            .collect(),
    );
    ApproximationMap {
        source: FinGroup::Table(table),
        target: Target::Fin(trivial),
        phi,
        a_src,
        a_tgt: TargetSet::Finite(BTreeSet::from([[0, 0, 0]])),
    }
}

/// Straight segment of integer points `0..=l`, basepoint 0, trivial group;
/// the finite stand-in for a ray.
pub fn truncated_ray(l: usize) -> Triple {
    let n = l + 1;
    let mut rows = alloc::vec![alloc::vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (i as f64 - j as f64).abs();
        }
    }
    Triple::pointed(FiniteMetricSpace::new(rows, 0).unwrap())
}

pub fn point_triple() -> Triple {
    Triple::pointed(FiniteMetricSpace::new(alloc::vec![alloc::vec![0.0]], 0).unwrap())
}

/// Symmetric sample of a round sphere of radius `1/i` with its full finite
/// symmetry group; `rotation_indices` picks the orientation-preserving part.
#[derive(Clone, Debug)]
pub struct SphereSample {
    pub triple: Triple,
    pub rotation_indices: Vec<usize>,
}

/// For `n = 1`, `mesh` is the number of sample points of the circle; for
/// `n = 2` it is the subdivision depth of the octahedral sample.
pub fn collapsing_sphere(i: u32, n: usize, mesh: u32) -> SphereSample {
    let radius = 1.0 / f64::from(i);
    match n {
        1 => {
            let k = mesh as usize;
            let mut rows = alloc::vec![alloc::vec![0.0; k]; k];
            for (a, row) in rows.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    let diff = (a as i64 - b as i64).rem_euclid(k as i64);
                    let steps = diff.min(k as i64 - diff) as f64;
                    *v = radius * 2.0 * PI * steps / k as f64;
                }
            }
            let space = FiniteMetricSpace::new(rows, 0).unwrap();
            let group = full_isometry_group(&space).expect("polygon symmetries");
            // rotations are exactly the cyclic shifts
            let rotation_indices = group
                .elements
                .iter()
                .enumerate()
                .filter(|(_, g)| {
                    let shift = g.perm[0];
                    (0..k).all(|j| g.perm[j] == (j + shift) % k)
                })
                .map(|(idx, _)| idx)
                .collect();
            SphereSample { triple: Triple { space, group }, rotation_indices }
        }
        2 => {
            let tri = crate::borsuk::SymmetricTriangulation::build(3, mesh as usize)
                .expect("octahedral sample");
            let verts = &tri.vertices;
            let m = verts.len();
            let mut rows = alloc::vec![alloc::vec![0.0; m]; m];
            for (a, row) in rows.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    let dot: f64 = verts[a].iter().zip(&verts[b]).map(|(x, y)| x * y).sum();
                    *v = radius * math::acos(dot);
                }
            }
            let space = FiniteMetricSpace::new(rows, 0).unwrap();
            let group = full_isometry_group(&space).expect("octahedral symmetries");
            // Orientation via the images of the coordinate poles; the
            // builder interned them first: +e_0, -e_0, +e_1, -e_1, +e_2, -e_2.
            let rotation_indices = group
                .elements
                .iter()
                .enumerate()
                .filter(|(_, g)| {
                    let c0 = &verts[g.perm[0]];
                    let c1 = &verts[g.perm[2]];
                    let c2 = &verts[g.perm[4]];
                    let det = c0[0] * (c1[1] * c2[2] - c1[2] * c2[1])
                        - c0[1] * (c1[0] * c2[2] - c1[2] * c2[0])
                        + c0[2] * (c1[0] * c2[1] - c1[1] * c2[0]);
                    det > 0.0
                })
                .map(|(idx, _)| idx)
                .collect();
            SphereSample { triple: Triple { space, group }, rotation_indices }
        }
        _ => panic!("sphere samples are built for n in {{1, 2}}"),
    }
}

/// The five one-condition-failure families, indexed by the condition that
/// is designed to fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    I,
    II,
    III,
    IV,
    V,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::I,
        Condition::II,
        Condition::III,
        Condition::IV,
        Condition::V,
    ];

    /// 0-based position in a condition report.
    pub fn index(self) -> usize {
        match self {
            Condition::I => 0,
            Condition::II => 1,
            Condition::III => 2,
            Condition::IV => 3,
            Condition::V => 4,
        }
    }
}

impl core::fmt::Display for Condition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            Condition::I => "I",
            Condition::II => "II",
            Condition::III => "III",
            Condition::IV => "IV",
            Condition::V => "V",
        };
        write!(f, "{s}")
    }
}

/// Finite realization of the family designed to fail exactly the named
/// condition at the default tolerance, for indices past a small threshold.
///
///   I    truncated integers into the real line with a fixed three-element
///        neighborhood: the image cannot meet small opens away from it
///   II   identity on truncated integers with a growing neighborhood
///        upstairs and a fixed one downstairs: images escape every
///        thickening
///   III  polar nilpotent grid mapped to its abelian shadow by coordinate
///        identity: an inverse-respecting bijection that is nowhere near
///        multiplicative
///   IV   planar grid projected to a line: far second-coordinate elements
///        land inside compacts without belonging to the neighborhood
///   V    dense scrambled rounding of a cyclic group onto the circle: a
///        bijective homomorphism whose source-balls lift nothing
pub fn counterexample(which: Condition, i: u32) -> ApproximationMap {
    let i = i as i64;
    match which {
        Condition::I => {
            let n = 20 * i + 1;
            let g = FinGroup::CyclicLine { n, step: 1.0 };
            let a_src = SymSet::from_iter([g.canon([-1, 0, 0]), [0, 0, 0], [1, 0, 0]]);
            ApproximationMap {
                source: g,
                target: Target::Model(ModelGroup::Euclidean { dim: 1 }),
                phi: PhiMap::CenteredScale { modulus: n, scale: 1.0 },
                a_src,
                a_tgt: TargetSet::Ball { radius: 1.0, closed: false },
            }
        }
        Condition::II => {
            let n = 20 * i;
            let g = FinGroup::CyclicLine { n, step: 1.0 };
            let a_src = SymSet::from_iter((-i..=i).map(|k| g.canon([k, 0, 0])));
            ApproximationMap {
                source: g,
                target: Target::Model(ModelGroup::Integers),
                phi: PhiMap::CenteredScale { modulus: n, scale: 1.0 },
                a_src,
                a_tgt: TargetSet::Ball { radius: 1.0, closed: true },
            }
        }
        Condition::III => {
            let m = (2 * (i / 5) + 3).min(9);
            let step = 1.0 / m as f64;
            let heis = FinGroup::heis(m, step).expect("odd modulus");
            let abelian = FinGroup::Grid3 { m, step };
            let a_src = SymSet::from_iter(
                heis.elements()
                    .expect("small grid")
                    .into_iter()
                    .filter(|&e| heis.dist_to_id(e) <= 0.4),
            );
            ApproximationMap {
                source: heis,
                target: Target::Fin(abelian),
                phi: PhiMap::CoordsIdentity,
                a_src,
                a_tgt: TargetSet::Ball { radius: 0.4, closed: true },
            }
        }
        Condition::IV => {
            let modulus = 16 * i;
            let step = 1.0 / i as f64;
            let g = FinGroup::Grid2 { m: modulus, step };
            let mut a = BTreeSet::new();
            let reach = i;
            for x in -reach..=reach {
                for y in -reach..=reach {
                    let e = g.canon([x, y, 0]);
                    if g.dist_to_id(e) < 1.0 {
                        a.insert(e);
                    }
                }
            }
            ApproximationMap {
                source: g,
                target: Target::Model(ModelGroup::Euclidean { dim: 1 }),
                phi: PhiMap::ProjectFirst { modulus, step },
                a_src: SymSet::new(a),
                a_tgt: TargetSet::Ball { radius: 1.0, closed: false },
            }
        }
        Condition::V => {
            // Grid fine enough that the lifting construction's source balls
            // (radius gap/3 at the default tolerance) hold actual neighbors.
            let n = 24 * i;
            let g = FinGroup::Cyclic { n, step: 2.0 * PI / n as f64 };
            let a_src = SymSet::from_iter(g.elements().expect("cyclic grid"));
            ApproximationMap {
                source: g,
                target: Target::Model(ModelGroup::Torus { radii: alloc::vec![1.0] }),
                phi: PhiMap::AngleScale { n, q: 12 * i + 1 },
                a_src,
                a_tgt: TargetSet::All,
            }
        }
    }
}

/// Identity map on `Z_{p^k}` with the p-adic ultrametric: the tower whose
/// nested subgroups defeat any stable maximal small subgroup.
pub fn cyclic_tower(p: i64, k: u32) -> ApproximationMap {
    let g = FinGroup::Padic { p, k };
    let a_src = SymSet::from_iter(g.elements().expect("tower fits the cap"));
    ApproximationMap {
        source: g.clone(),
        target: Target::Fin(g),
        phi: PhiMap::CoordsIdentity,
        a_src,
        a_tgt: TargetSet::Ball { radius: 1.0, closed: true },
    }
}

#[derive(Clone, Debug)]
pub struct TowerLevel {
    pub delta: f64,
    pub members: Vec<El>,
}

#[derive(Clone, Debug)]
pub struct TowerReport {
    /// Zero sets of the escape norm on the tower, localized at finer and
    /// finer balls, listed from the finest level to the coarsest.
    pub levels: Vec<TowerLevel>,
    /// Every candidate maximum is strictly dominated at the next level.
    pub unstable: bool,
}

/// Sweeps localization levels `delta = p^{-j}` from fine to coarse and
/// extracts the escape-norm zero set at each; on the tower the zero sets
/// grow strictly, so no level is a stable maximum.
pub fn tower_instability(p: i64, k: u32) -> TowerReport {
    let map = cyclic_tower(p, k);
    let mut levels = Vec::new();
    for j in (1..k).rev() {
        let delta = math::powi(p as f64, -(j as i32));
        let localized = crate::approx::localize(
            &map,
            &TargetSet::Ball { radius: delta, closed: true },
            3,
        )
        .expect("tower balls nest");
        let z = crate::escape::zero_set(&localized.map.source, &localized.map.a_src)
            .expect("tower fits the cap");
        levels.push(TowerLevel { delta, members: z.members });
    }
    let unstable = levels.windows(2).all(|w| {
        let fine: BTreeSet<El> = w[0].members.iter().copied().collect();
        let coarse: BTreeSet<El> = w[1].members.iter().copied().collect();
        fine.is_subset(&coarse) && fine.len() < coarse.len()
    });
    TowerReport { levels, unstable }
}

/// Flat torus with factor radii `(1, 1/i)` sampled on a `grid x grid`
/// lattice, its translation group, and the first-angle approximation into
/// the unit circle.
#[derive(Clone, Debug)]
pub struct TorusCollapseScenario {
    pub triple: Triple,
    pub map: ApproximationMap,
    /// Second-factor translations as indices into the triple's group, in
    /// the same order as the abstract grid elements.
    pub h_indices: Vec<usize>,
    /// The same subgroup as abstract elements.
    pub second_factor: Vec<El>,
}

/// Blow-up scale keeping `n_max = 3` products inside the logarithm chart.
pub const TORUS_BLOWUP_SCALE: u32 = 2;

pub fn torus_collapse(i: u32, grid: i64) -> TorusCollapseScenario {
    assert!(i >= 2, "the second factor must fit inside the regular neighborhood");
    assert!(grid >= 8);
    let gname = FinGroup::TorusGrid { g: grid, radii: [1.0, 1.0 / f64::from(i)] };
    let n = (grid * grid) as usize;
    let point = |a: i64, b: i64| (a.rem_euclid(grid) * grid + b.rem_euclid(grid)) as usize;
    let mut rows = alloc::vec![alloc::vec![0.0; n]; n];
    for a1 in 0..grid {
        for b1 in 0..grid {
            for a2 in 0..grid {
                for b2 in 0..grid {
                    let d = gname.dist([a1, b1, 0], [a2, b2, 0]);
                    rows[point(a1, b1)][point(a2, b2)] = d;
                }
            }
        }
    }
    let space = FiniteMetricSpace::new(rows, 0).unwrap();

    // Translation group, element (s, t) moves (a, b) to (a+s, b+t).
    let elements: Vec<Isometry> = (0..grid)
        .flat_map(|s| {
            (0..grid).map(move |t| (s, t))
        })
        .map(|(s, t)| {
            let mut perm = alloc::vec![0usize; n];
            for a in 0..grid {
                for b in 0..grid {
                    perm[point(a, b)] = point(a + s, b + t);
                }
            }
            Isometry { perm }
        })
        .collect();
    let generators = alloc::vec![point(1, 0), point(0, 1)];
    let group = IsometryGroup { elements, generators };
    let triple = Triple { space, group };

    let h_indices: Vec<usize> = (0..grid).map(|t| point(0, t)).collect();
    let second_factor: Vec<El> = (0..grid).map(|t| [0, t, 0]).collect();

    let a_src = SymSet::from_iter(
        gname
            .elements()
            .expect("grid fits the cap")
            .into_iter()
            .filter(|&e| gname.dist_to_id(e) < 2.0),
    );
    let map = ApproximationMap {
        source: gname,
        target: Target::Model(ModelGroup::Torus { radii: alloc::vec![1.0] }),
        phi: PhiMap::TorusAngleFirst { grid },
        a_src,
        a_tgt: TargetSet::Ball { radius: 2.0, closed: false },
    };
    TorusCollapseScenario { triple, map, h_indices, second_factor }
}

/// Euclidean-plane escape context: the unit ball of the plane.
pub fn algebra_r2() -> (ModelGroup, TargetSet) {
    (ModelGroup::Euclidean { dim: 2 }, TargetSet::Ball { radius: 1.0, closed: false })
}

/// Two-torus escape context: a ball inside the chart.
pub fn algebra_t2() -> (ModelGroup, TargetSet) {
    (
        ModelGroup::Torus { radii: alloc::vec![1.0, 1.0] },
        TargetSet::Ball { radius: 0.8, closed: false },
    )
}

/// Rotation-group escape context: a geodesic ball around the identity.
pub fn algebra_so3() -> (ModelGroup, TargetSet) {
    (ModelGroup::Rotations, TargetSet::Ball { radius: 0.5, closed: false })
}

/// Deterministic direction sample on the unit sphere of R^dim.
pub fn fixed_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let n = math::norm(&v);
        if n > 1e-3 {
            out.push(v.iter().map(|x| x / n).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;

    #[test]
    fn hexagon_distances_and_symmetries() {
        let s = hexagon_graph(1);
        let m = &s.triple.space;
        assert!(validate_metric(m).is_empty());
        assert_eq!(m.d(HEXAGON_X, HEXAGON_A), 1.0);
        assert_eq!(m.d(HEXAGON_X, HEXAGON_Y), 3.0);
        assert_eq!(m.d(HEXAGON_Y, HEXAGON_Z), 3.0);
        assert_eq!(s.triple.group.order(), 6);

        let s2 = hexagon_graph(2);
        let m2 = &s2.triple.space;
        // the swap of a and b moves x to distance 3i
        let idx = s2.triple.group.index_map();
        let swap_ab = Isometry { perm: alloc::vec![1, 0, 2, 4, 3, 5] };
        assert!(idx.contains_key(&swap_ab.perm));
        assert_eq!(m2.d(HEXAGON_X, HEXAGON_Y), 6.0);
    }

    #[test]
    fn hexagon_h_is_the_leaf_swap() {
        let s = hexagon_graph(4);
        let h = &s.triple.group.elements[s.h_indices[1]];
        assert_eq!(h.perm, alloc::vec![0, 2, 1, 3, 5, 4]);
        // fixes every point of the basepoint ball of radius i
        let m = &s.triple.space;
        for x in 0..6 {
            if m.d(HEXAGON_X, x) <= 4.0 {
                assert_eq!(h.apply(x), x);
            }
        }
    }

    #[test]
    fn circle_sample_counts() {
        let s = collapsing_sphere(1, 1, 8);
        assert_eq!(s.triple.space.len(), 8);
        assert_eq!(s.triple.group.order(), 16);
        assert_eq!(s.rotation_indices.len(), 8);
        assert!((s.triple.space.diameter() - PI).abs() < 1e-12);
        assert!(validate_metric(&s.triple.space).is_empty());
    }

    #[test]
    fn octahedron_sample_rotations() {
        let s = collapsing_sphere(2, 2, 0);
        assert_eq!(s.triple.space.len(), 6);
        assert_eq!(s.triple.group.order(), 48);
        assert_eq!(s.rotation_indices.len(), 24);
        assert!((s.triple.space.diameter() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn regeneration_is_identical() {
        assert_eq!(hexagon_graph(3).triple, hexagon_graph(3).triple);
        assert_eq!(counterexample(Condition::IV, 10), counterexample(Condition::IV, 10));
        assert_eq!(cyclic_tower(2, 4), cyclic_tower(2, 4));
        let a = torus_collapse(4, 8);
        let b = torus_collapse(4, 8);
        assert_eq!(a.triple, b.triple);
        assert_eq!(a.map, b.map);
        assert_eq!(fixed_directions(3, 5, 7), fixed_directions(3, 5, 7));
    }

    #[test]
    fn tower_structure() {
        let t = cyclic_tower(2, 3);
        assert_eq!(t.source.order(), 8);
        let rep = tower_instability(2, 5);
        assert!(rep.unstable);
        let orders: Vec<usize> = rep.levels.iter().map(|l| l.members.len()).collect();
        assert_eq!(orders, alloc::vec![2, 4, 8, 16]);
    }

    #[test]
    fn torus_scenario_shape() {
        let s = torus_collapse(4, 8);
        assert_eq!(s.triple.space.len(), 64);
        assert_eq!(s.triple.group.order(), 64);
        assert!(validate_metric(&s.triple.space).is_empty());
        assert_eq!(s.h_indices.len(), 8);
        // second-factor displacement is bounded by the small circumference
        let m = &s.triple.space;
        for &hi in &s.h_indices {
            let h = &s.triple.group.elements[hi];
            let mut disp = 0.0_f64;
            for x in 0..m.len() {
                disp = math::fmax(disp, m.d(h.apply(x), x));
            }
            assert!(disp <= PI / 4.0 + 1e-12);
        }
    }

    #[test]
    fn scramble_is_a_bijective_homomorphism() {
        let map = counterexample(Condition::V, 10);
        let FinGroup::Cyclic { n, .. } = map.source else { panic!() };
        // q coprime to n makes the map bijective; angles add exactly
        let q = 12 * 10 + 1;
        let mut seen = BTreeSet::new();
        for k in 0..n {
            seen.insert((q * k).rem_euclid(n));
        }
        assert_eq!(seen.len(), n as usize);
    }
}
