//! Isometries of finite metric spaces as permutations: enumeration by
//! backtracking over distance profiles, closure of generating sets, the
//! basepoint metric on the group, orbits and quotient constructions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::math::{fmax, fmin};
use crate::metric::{validate_metric, FiniteMetricSpace};
use crate::{GROUP_SIZE_CAP, TOL_METRIC};

/// A distance-preserving permutation of the point indices of a fixed space.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Isometry {
    pub perm: Vec<usize>,
}

impl Isometry {
    pub fn identity(n: usize) -> Self {
        Self { perm: (0..n).collect() }
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.perm[x]
    }

    /// `(a * b)(x) = a(b(x))`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { perm: other.perm.iter().map(|&x| self.perm[x]).collect() }
    }

    pub fn inverse(&self) -> Isometry {
        let mut inv = alloc::vec![0; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        Isometry { perm: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// Checks that a permutation preserves all pairwise distances.
pub fn is_isometry(m: &FiniteMetricSpace, g: &Isometry) -> bool {
    let n = m.len();
    if g.perm.len() != n {
        return false;
    }
    let mut seen = alloc::vec![false; n];
    for &j in &g.perm {
        if j >= n || seen[j] {
            return false;
        }
        seen[j] = true;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (m.d(g.apply(i), g.apply(j)) - m.d(i, j)).abs() > TOL_METRIC {
                return false;
            }
        }
    }
    true
}

/// A group of isometries of one space, closed under composition and inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometryGroup {
    pub elements: Vec<Isometry>,
    pub generators: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IsoError {
    NotAnIsometry { generator: usize },
    GroupTooLarge { cap: usize },
    NotASubgroup,
    NotNormal { g: usize, h: usize },
}

impl core::fmt::Display for IsoError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            IsoError::NotAnIsometry { generator } => {
                write!(f, "generator {generator} does not preserve distances")
            }
            IsoError::GroupTooLarge { cap } => write!(f, "group closure exceeded cap {cap}"),
            IsoError::NotASubgroup => write!(f, "given elements do not form a subgroup"),
            IsoError::NotNormal { g, h } => {
                write!(f, "subgroup not normal: conjugation of element {h} by element {g} escapes")
            }
        }
    }
}

impl core::error::Error for IsoError {}

impl IsometryGroup {
    pub fn trivial(n: usize) -> Self {
        Self { elements: alloc::vec![Isometry::identity(n)], generators: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_map(&self) -> BTreeMap<Vec<usize>, usize> {
        self.elements.iter().enumerate().map(|(i, g)| (g.perm.clone(), i)).collect()
    }

    pub fn identity_index(&self) -> usize {
        self.elements.iter().position(Isometry::is_identity).expect("group contains identity")
    }

    /// Orbit of a point index, sorted.
    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut o: BTreeSet<usize> = BTreeSet::new();
        for g in &self.elements {
            o.insert(g.apply(x));
        }
        o.into_iter().collect()
    }

    /// All orbits plus the point-to-orbit index map.
    pub fn orbits(&self, n: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut proj = alloc::vec![usize::MAX; n];
        let mut orbits = Vec::new();
        for x in 0..n {
            if proj[x] != usize::MAX {
                continue;
            }
            let o = self.orbit(x);
            for &y in &o {
                proj[y] = orbits.len();
            }
            orbits.push(o);
        }
        (orbits, proj)
    }
}

/// All distance-preserving permutations, by backtracking with
/// distance-profile pruning. Worst case exponential; the size cap guards it.
pub fn full_isometry_group(m: &FiniteMetricSpace) -> Result<IsometryGroup, IsoError> {
    let n = m.len();
    // Sorted distance profile per point; candidate images must match.
    let mut profiles: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut p: Vec<f64> = (0..n).map(|j| m.d(i, j)).collect();
        p.sort_by(f64::total_cmp);
        profiles.push(p);
    }
    let compatible = |x: usize, y: usize| {
        profiles[x]
            .iter()
            .zip(&profiles[y])
            .all(|(a, b)| (a - b).abs() <= TOL_METRIC)
    };
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for x in 0..n {
        candidates.push((0..n).filter(|&y| compatible(x, y)).collect());
    }

    let mut out: Vec<Isometry> = Vec::new();
    let mut img: Vec<usize> = Vec::with_capacity(n);
    let mut used = alloc::vec![false; n];

    fn search(
        m: &FiniteMetricSpace,
        candidates: &[Vec<usize>],
        img: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Isometry>,
    ) -> Result<(), IsoError> {
        let k = img.len();
        if k == m.len() {
            if out.len() >= GROUP_SIZE_CAP {
                return Err(IsoError::GroupTooLarge { cap: GROUP_SIZE_CAP });
            }
            out.push(Isometry { perm: img.clone() });
            return Ok(());
        }
        'cand: for &y in &candidates[k] {
            if used[y] {
                continue;
            }
            for a in 0..k {
                if (m.d(img[a], y) - m.d(a, k)).abs() > TOL_METRIC {
                    continue 'cand;
                }
            }
            used[y] = true;
            img.push(y);
            search(m, candidates, img, used, out)?;
            img.pop();
            used[y] = false;
        }
        Ok(())
    }

    search(m, &candidates, &mut img, &mut used, &mut out)?;
    out.sort();
    let generators = (0..out.len()).collect();
    Ok(IsometryGroup { elements: out, generators })
}

/// Smallest group containing the generators, by breadth-first products.
pub fn closure(m: &FiniteMetricSpace, gens: &[Isometry]) -> Result<IsometryGroup, IsoError> {
    for (i, g) in gens.iter().enumerate() {
        if !is_isometry(m, g) {
            return Err(IsoError::NotAnIsometry { generator: i });
        }
    }
    let n = m.len();
    let mut elements: BTreeSet<Vec<usize>> = BTreeSet::new();
    elements.insert(Isometry::identity(n).perm);
    let mut frontier: Vec<Isometry> = alloc::vec![Isometry::identity(n)];
    let mut gen_set: Vec<Isometry> = gens.to_vec();
    for g in gens {
        gen_set.push(g.inverse());
    }
    while let Some(g) = frontier.pop() {
        for s in &gen_set {
            let p = s.compose(&g);
            if elements.insert(p.perm.clone()) {
                if elements.len() > GROUP_SIZE_CAP {
                    return Err(IsoError::GroupTooLarge { cap: GROUP_SIZE_CAP });
                }
                frontier.push(p);
            }
        }
    }
    let elements: Vec<Isometry> = elements.into_iter().map(|perm| Isometry { perm }).collect();
    let index = elements
        .iter()
        .enumerate()
        .map(|(i, g)| (g.perm.clone(), i))
        .collect::<BTreeMap<_, _>>();
    let generators = gens.iter().map(|g| index[&g.perm]).collect();
    Ok(IsometryGroup { elements, generators })
}

/// The basepoint metric on the isometry group,
/// `inf_{r>0} ( 1/r + sup_{x in B_r(p)} d(gx, hx) )`.
///
/// The sup is a nondecreasing step function of `r` with breakpoints at the
/// distinct distances from the basepoint, so the infimum is the minimum of
/// finitely many interval values together with the non-attained limit for
/// large `r`.
pub fn dp_distance(m: &FiniteMetricSpace, g: &Isometry, h: &Isometry) -> f64 {
    let p = m.basepoint();
    let n = m.len();
    let mut radii: Vec<f64> = (0..n).map(|x| m.d(p, x)).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let disp: Vec<f64> = (0..n).map(|x| m.d(g.apply(x), h.apply(x))).collect();

    // sup of the displacement over the closed ball of radius radii[j].
    let mut sup_at = Vec::with_capacity(radii.len());
    let mut best = 0.0;
    for &r in &radii {
        for x in 0..n {
            if m.d(p, x) <= r {
                best = fmax(best, disp[x]);
            }
        }
        sup_at.push(best);
    }

    let mut inf = *sup_at.last().expect("non-empty space"); // r -> infinity limit
    for j in 0..radii.len() - 1 {
        inf = fmin(inf, 1.0 / radii[j + 1] + sup_at[j]);
    }
    inf
}

/// Oracle used by tests: sample the defining expression on a dense grid of
/// radii; the true infimum is a lower bound of every sample.
pub fn dp_distance_grid_oracle(
    m: &FiniteMetricSpace,
    g: &Isometry,
    h: &Isometry,
    r_max: f64,
    steps: usize,
) -> f64 {
    let p = m.basepoint();
    let n = m.len();
    let mut best = f64::INFINITY;
    for k in 1..=steps {
        let r = r_max * k as f64 / steps as f64;
        let mut sup = 0.0;
        for x in 0..n {
            if m.d(p, x) < r {
                sup = fmax(sup, m.d(g.apply(x), h.apply(x)));
            }
        }
        best = fmin(best, 1.0 / r + sup);
    }
    best
}

/// Quotient space by a group action: points are orbits, the distance is the
/// minimum over orbit representatives, the basepoint is the orbit of the
/// basepoint. Returns the space and the point-to-orbit projection.
pub fn quotient(m: &FiniteMetricSpace, g: &IsometryGroup) -> (FiniteMetricSpace, Vec<usize>) {
    let (orbits, proj) = g.orbits(m.len());
    let k = orbits.len();
    let mut rows = alloc::vec![alloc::vec![0.0; k]; k];
    for a in 0..k {
        for b in (a + 1)..k {
            let mut d = f64::INFINITY;
            for &x in &orbits[a] {
                for &y in &orbits[b] {
                    d = fmin(d, m.d(x, y));
                }
            }
            rows[a][b] = d;
            rows[b][a] = d;
        }
    }
    let q = FiniteMetricSpace::new(rows, proj[m.basepoint()])
        .expect("quotient matrix is square by construction");
    debug_assert!(validate_metric(&q).is_empty(), "quotient of an isometric action is a metric");
    (q, proj)
}

/// One coset of the quotient group with its induced action on orbits. The
/// induced permutation need not be faithful.
#[derive(Clone, Debug)]
pub struct Coset {
    /// Index of a representative in the numerator group.
    pub representative: usize,
    pub induced: Isometry,
}

#[derive(Clone, Debug)]
pub struct QuotientAction {
    pub space: FiniteMetricSpace,
    pub projection: Vec<usize>,
    pub cosets: Vec<Coset>,
}

impl QuotientAction {
    /// Indices (into the numerator group) of all elements whose induced
    /// permutation belongs to the given downstairs set: the preimage of a
    /// downstairs subgroup under the quotient map.
    pub fn preimage(
        &self,
        numerator: &IsometryGroup,
        h_indices: &[usize],
        downstairs: &[Isometry],
    ) -> Vec<usize> {
        let down: BTreeSet<Vec<usize>> = downstairs.iter().map(|g| g.perm.clone()).collect();
        let index = numerator.index_map();
        let mut out = BTreeSet::new();
        for c in &self.cosets {
            if down.contains(&c.induced.perm) {
                let rep = &numerator.elements[c.representative];
                for &hi in h_indices {
                    let el = rep.compose(&numerator.elements[hi]);
                    out.insert(index[&el.perm]);
                }
            }
        }
        out.into_iter().collect()
    }

    /// The isometry group actually realized on the quotient: induced
    /// permutations with duplicates collapsed.
    pub fn faithful(&self) -> IsometryGroup {
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in &self.cosets {
            set.insert(c.induced.perm.clone());
        }
        let elements: Vec<Isometry> = set.into_iter().map(|perm| Isometry { perm }).collect();
        let generators = (0..elements.len()).collect();
        IsometryGroup { elements, generators }
    }
}

/// Quotient of `g` by a normal subgroup `h` (given as element indices into
/// `g`), acting on the quotient space. Errors with a violating conjugation
/// when `h` is not normal.
pub fn quotient_group(
    m: &FiniteMetricSpace,
    g: &IsometryGroup,
    h_indices: &[usize],
) -> Result<QuotientAction, IsoError> {
    let index = g.index_map();
    let h_set: BTreeSet<usize> = h_indices.iter().copied().collect();
    // Subgroup check.
    for &a in &h_set {
        for &b in &h_set {
            let p = g.elements[a].compose(&g.elements[b]);
            match index.get(&p.perm) {
                Some(i) if h_set.contains(i) => {}
                _ => return Err(IsoError::NotASubgroup),
            }
        }
    }
    // Normality check: g h g^-1 stays in h.
    for (gi, ge) in g.elements.iter().enumerate() {
        let ginv = ge.inverse();
        for &hi in &h_set {
            let c = ge.compose(&g.elements[hi]).compose(&ginv);
            match index.get(&c.perm) {
                Some(i) if h_set.contains(i) => {}
                _ => return Err(IsoError::NotNormal { g: gi, h: hi }),
            }
        }
    }

    let h_group = IsometryGroup {
        elements: h_set.iter().map(|&i| g.elements[i].clone()).collect(),
        generators: Vec::new(),
    };
    let (space, projection) = quotient(m, &h_group);
    let (orbits, _) = h_group.orbits(m.len());

    // Enumerate cosets; each acts on orbits through any representative.
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut cosets = Vec::new();
    for (gi, ge) in g.elements.iter().enumerate() {
        let mut key: Vec<usize> = h_set
            .iter()
            .map(|&hi| index[&ge.compose(&g.elements[hi]).perm])
            .collect();
        key.sort_unstable();
        if !seen.insert(key) {
            continue;
        }
        let induced = Isometry {
            perm: orbits.iter().map(|o| projection[ge.apply(o[0])]).collect(),
        };
        cosets.push(Coset { representative: gi, induced });
    }
    Ok(QuotientAction { space, projection, cosets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_point() -> FiniteMetricSpace {
        FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0).unwrap()
    }

    fn line3() -> FiniteMetricSpace {
        FiniteMetricSpace::new(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
            0,
        )
        .unwrap()
    }

    fn triangle() -> FiniteMetricSpace {
        FiniteMetricSpace::new(
            vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
            0,
        )
        .unwrap()
    }

    #[test]
    fn two_point_group_has_order_two() {
        let g = full_isometry_group(&two_point()).unwrap();
        assert_eq!(g.order(), 2);
    }

    #[test]
    fn scalene_is_rigid() {
        let m = FiniteMetricSpace::new(
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.5], vec![2.0, 2.5, 0.0]],
            0,
        )
        .unwrap();
        let g = full_isometry_group(&m).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn equilateral_triangle_group_is_s3() {
        let g = full_isometry_group(&triangle()).unwrap();
        assert_eq!(g.order(), 6);
    }

    #[test]
    fn closure_of_identity_is_trivial() {
        let m = triangle();
        let g = closure(&m, &[Isometry::identity(3)]).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn closure_of_cycle_and_transpositions() {
        let m = triangle();
        let three_cycle = Isometry { perm: vec![1, 2, 0] };
        assert_eq!(closure(&m, &[three_cycle]).unwrap().order(), 3);
        let t1 = Isometry { perm: vec![1, 0, 2] };
        let t2 = Isometry { perm: vec![0, 2, 1] };
        assert_eq!(closure(&m, &[t1, t2]).unwrap().order(), 6);
    }

    #[test]
    fn closure_rejects_non_isometry() {
        let m = line3();
        let bad = Isometry { perm: vec![1, 0, 2] };
        assert!(matches!(closure(&m, &[bad]), Err(IsoError::NotAnIsometry { .. })));
    }

    #[test]
    fn dp_zero_for_equal_elements() {
        let m = line3();
        let id = Isometry::identity(3);
        assert_eq!(dp_distance(&m, &id, &id), 0.0);
    }

    #[test]
    fn dp_reflection_on_line() {
        let m = line3();
        let refl = Isometry { perm: vec![2, 1, 0] };
        let id = Isometry::identity(3);
        assert!((dp_distance(&m, &refl, &id) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dp_matches_grid_oracle() {
        let m = triangle();
        let g = full_isometry_group(&m).unwrap();
        for a in &g.elements {
            for b in &g.elements {
                let exact = dp_distance(&m, a, b);
                let grid = dp_distance_grid_oracle(&m, a, b, 2000.0, 40_000);
                // The sampled value sits above the infimum by at most the
                // residual 1/r_max plus one step of the 1/r term.
                assert!(exact <= grid + 1e-9, "infimum exceeds a sampled value");
                assert!(grid - exact <= 6e-4, "exact {exact} vs grid {grid}");
            }
        }
    }

    #[test]
    fn dp_left_invariant_on_s3() {
        let m = triangle();
        let g = full_isometry_group(&m).unwrap();
        for a in &g.elements {
            for b in &g.elements {
                let d = dp_distance(&m, a, b);
                for k in &g.elements {
                    let ka = k.compose(a);
                    let kb = k.compose(b);
                    assert!((dp_distance(&m, &ka, &kb) - d).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn quotient_by_trivial_is_isometric() {
        let m = line3();
        let g = IsometryGroup::trivial(3);
        let (q, proj) = quotient(&m, &g);
        assert_eq!(q.len(), 3);
        assert_eq!(proj, vec![0, 1, 2]);
        assert_eq!(q.d(0, 2), 2.0);
    }

    #[test]
    fn quotient_two_points_by_full_group() {
        let m = two_point();
        let g = full_isometry_group(&m).unwrap();
        let (q, _) = quotient(&m, &g);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn quotient_is_one_lipschitz() {
        let m = triangle();
        let g = closure(&m, &[Isometry { perm: vec![1, 0, 2] }]).unwrap();
        let (q, proj) = quotient(&m, &g);
        for x in 0..3 {
            for y in 0..3 {
                assert!(q.d(proj[x], proj[y]) <= m.d(x, y) + 1e-12);
            }
        }
    }

    #[test]
    fn quotient_group_by_whole_group() {
        let m = two_point();
        let g = full_isometry_group(&m).unwrap();
        let all: Vec<usize> = (0..g.order()).collect();
        let qa = quotient_group(&m, &g, &all).unwrap();
        assert_eq!(qa.cosets.len(), 1);
        assert_eq!(qa.space.len(), 1);
    }

    #[test]
    fn quotient_group_by_trivial() {
        let m = triangle();
        let g = full_isometry_group(&m).unwrap();
        let id = g.identity_index();
        let qa = quotient_group(&m, &g, &[id]).unwrap();
        assert_eq!(qa.cosets.len(), 6);
        assert_eq!(qa.faithful().order(), 6);
    }

    #[test]
    fn non_normal_subgroup_rejected() {
        let m = triangle();
        let g = full_isometry_group(&m).unwrap();
        let index = g.index_map();
        let swap01 = index[&vec![1usize, 0, 2]];
        let id = g.identity_index();
        let err = quotient_group(&m, &g, &[id, swap01]);
        assert!(matches!(err, Err(IsoError::NotNormal { .. })));
    }

    #[test]
    fn quotient_by_a3_has_two_cosets() {
        let m = triangle();
        let g = full_isometry_group(&m).unwrap();
        let index = g.index_map();
        let a3 = vec![
            g.identity_index(),
            index[&vec![1usize, 2, 0]],
            index[&vec![2usize, 0, 1]],
        ];
        let qa = quotient_group(&m, &g, &a3).unwrap();
        assert_eq!(qa.space.len(), 1);
        assert_eq!(qa.cosets.len(), 2);
    }
}
