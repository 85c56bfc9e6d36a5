//! Antipodally symmetric sphere triangulations and the piecewise-affine
//! near-zero finder for odd vertex samples.
//!
//! The base complex is the boundary of the n-dimensional cross-polytope,
//! whose vertex set is exactly antipodal; edgewise subdivision preserves the
//! symmetry because midpoints and normalization commute with negation
//! bit-for-bit. Supported sphere dimensions: n in {2, 3, 4}.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lp::barycentric_zero;
use crate::math::{self, fmax, fmin};

#[derive(Clone, Debug, PartialEq)]
pub enum BorsukError {
    UnsupportedDimension { n: usize },
    DimensionGate { n: usize, k: usize },
    ValuesNotOdd { vertex: usize },
    WrongLength { expected: usize, got: usize },
    NoZeroFound,
}

impl core::fmt::Display for BorsukError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BorsukError::UnsupportedDimension { n } => {
                write!(f, "cross-polytope triangulations are built for n in 2..=4, got {n}")
            }
            BorsukError::DimensionGate { n, k } => {
                write!(f, "sphere dimension {} must be at least the target dimension {k} (n > k)", n - 1)
            }
            BorsukError::ValuesNotOdd { vertex } => {
                write!(f, "values are not odd at vertex {vertex}")
            }
            BorsukError::WrongLength { expected, got } => {
                write!(f, "expected {expected} vertex values, got {got}")
            }
            BorsukError::NoZeroFound => {
                write!(f, "no affine zero in any simplex; the complex is broken")
            }
        }
    }
}

impl core::error::Error for BorsukError {}

/// A triangulation of the unit sphere in R^n, invariant under negation.
#[derive(Clone, Debug)]
pub struct SymmetricTriangulation {
    /// Ambient dimension n; the complex triangulates the (n-1)-sphere.
    pub ambient: usize,
    pub vertices: Vec<Vec<f64>>,
    /// Top simplices, each with `ambient` vertex indices.
    pub simplices: Vec<Vec<usize>>,
    /// Involution pairing each vertex with its exact negation.
    pub antipode: Vec<usize>,
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = math::norm(v);
    v.iter().map(|x| x / n).collect()
}

fn key(v: &[f64]) -> Vec<u64> {
    // Fold -0.0 onto 0.0 so negated vertices hash identically.
    v.iter().map(|x| if *x == 0.0 { 0.0f64.to_bits() } else { x.to_bits() }).collect()
}

/// Sign-canonical key, identical for v and -v; used for choices that must
/// commute with the antipodal map.
fn canonical_key(v: &[f64]) -> Vec<u64> {
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let a = key(v);
    let b = key(&neg);
    if a <= b {
        a
    } else {
        b
    }
}

struct Builder {
    vertices: Vec<Vec<f64>>,
    index: BTreeMap<Vec<u64>, usize>,
}

impl Builder {
    fn intern(&mut self, v: Vec<f64>) -> usize {
        let k = key(&v);
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        let i = self.vertices.len();
        self.index.insert(k, i);
        self.vertices.push(v);
        i
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let m: Vec<f64> = self.vertices[a]
            .iter()
            .zip(&self.vertices[b])
            .map(|(x, y)| (x + y) / 2.0)
            .collect();
        self.intern(normalize(&m))
    }
}

fn chord(a: &[f64], b: &[f64]) -> f64 {
    math::dist(a, b)
}

impl SymmetricTriangulation {
    /// Boundary of the n-cross-polytope, edgewise subdivided `subdivisions`
    /// times, with vertices projected to the unit sphere.
    pub fn build(ambient: usize, subdivisions: usize) -> Result<Self, BorsukError> {
        if !(2..=4).contains(&ambient) {
            return Err(BorsukError::UnsupportedDimension { n: ambient });
        }
        let mut b = Builder { vertices: Vec::new(), index: BTreeMap::new() };
        for i in 0..ambient {
            let mut plus = alloc::vec![0.0; ambient];
            plus[i] = 1.0;
            let mut minus = alloc::vec![0.0; ambient];
            minus[i] = -1.0;
            b.intern(plus);
            b.intern(minus);
        }
        // One facet per sign pattern: vertex i is +-e_i.
        let mut simplices: Vec<Vec<usize>> = Vec::new();
        for mask in 0..(1u32 << ambient) {
            let mut s = Vec::with_capacity(ambient);
            for i in 0..ambient {
                s.push(2 * i + ((mask >> i) & 1) as usize);
            }
            simplices.push(s);
        }
        for _ in 0..subdivisions {
            simplices = subdivide_once(&mut b, &simplices, ambient);
        }
        let antipode = antipode_map(&b.vertices)?;
        Ok(Self { ambient, vertices: b.vertices, simplices, antipode })
    }

    /// Largest simplex diameter (chordal).
    pub fn mesh(&self) -> f64 {
        let mut m = 0.0;
        for s in &self.simplices {
            for (i, &a) in s.iter().enumerate() {
                for &b in &s[i + 1..] {
                    m = fmax(m, chord(&self.vertices[a], &self.vertices[b]));
                }
            }
        }
        m
    }

    /// Every ridge ((n-2)-face) must be shared by exactly two simplices and
    /// the simplex set must be closed under the antipodal involution.
    pub fn validate(&self) -> bool {
        let mut ridge_count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for s in &self.simplices {
            for drop in 0..s.len() {
                let mut r: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != drop)
                    .map(|(_, &v)| v)
                    .collect();
                r.sort_unstable();
                *ridge_count.entry(r).or_insert(0) += 1;
            }
        }
        if !ridge_count.values().all(|&c| c == 2) {
            return false;
        }
        let set: alloc::collections::BTreeSet<Vec<usize>> = self
            .simplices
            .iter()
            .map(|s| {
                let mut t = s.clone();
                t.sort_unstable();
                t
            })
            .collect();
        self.simplices.iter().all(|s| {
            let mut t: Vec<usize> = s.iter().map(|&v| self.antipode[v]).collect();
            t.sort_unstable();
            set.contains(&t)
        })
    }

    /// All edges of the complex, deduplicated.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = alloc::collections::BTreeSet::new();
        for s in &self.simplices {
            for (i, &a) in s.iter().enumerate() {
                for &b in &s[i + 1..] {
                    set.insert((a.min(b), a.max(b)));
                }
            }
        }
        set.into_iter().collect()
    }
}

fn antipode_map(vertices: &[Vec<f64>]) -> Result<Vec<usize>, BorsukError> {
    let index: BTreeMap<Vec<u64>, usize> =
        vertices.iter().enumerate().map(|(i, v)| (key(v), i)).collect();
    let mut out = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        match index.get(&key(&neg)) {
            Some(&j) => out.push(j),
            None => return Err(BorsukError::ValuesNotOdd { vertex: i }),
        }
    }
    Ok(out)
}

fn subdivide_once(b: &mut Builder, simplices: &[Vec<usize>], ambient: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in simplices {
        match ambient {
            2 => {
                let m = b.midpoint(s[0], s[1]);
                out.push(alloc::vec![s[0], m]);
                out.push(alloc::vec![m, s[1]]);
            }
            3 => {
                let m01 = b.midpoint(s[0], s[1]);
                let m02 = b.midpoint(s[0], s[2]);
                let m12 = b.midpoint(s[1], s[2]);
                out.push(alloc::vec![s[0], m01, m02]);
                out.push(alloc::vec![s[1], m01, m12]);
                out.push(alloc::vec![s[2], m02, m12]);
                out.push(alloc::vec![m01, m02, m12]);
            }
            4 => {
                let m: BTreeMap<(usize, usize), usize> = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
                    .into_iter()
                    .map(|(i, j)| ((i, j), b.midpoint(s[i], s[j])))
                    .collect();
                for c in 0..4 {
                    let mut t = alloc::vec![s[c]];
                    for o in 0..4 {
                        if o != c {
                            let p = (c.min(o), c.max(o));
                            t.push(m[&p]);
                        }
                    }
                    out.push(t);
                }
                // Interior octahedron: three candidate diagonals; pick the
                // shortest with a sign-canonical tie-break so the choice
                // commutes with the antipodal map.
                let diags = [
                    ((0, 1), (2, 3)),
                    ((0, 2), (1, 3)),
                    ((0, 3), (1, 2)),
                ];
                let mut best: Option<(f64, Vec<u64>, usize)> = None;
                for (idx, (p, q)) in diags.into_iter().enumerate() {
                    let a = m[&p];
                    let c = m[&q];
                    let len = chord(&b.vertices[a], &b.vertices[c]);
                    let mut k = canonical_key(&b.vertices[a]);
                    let mut k2 = canonical_key(&b.vertices[c]);
                    if k2 < k {
                        core::mem::swap(&mut k, &mut k2);
                    }
                    k.extend(k2);
                    let better = match &best {
                        None => true,
                        Some((bl, bk, _)) => {
                            len < bl - 1e-12 || ((len - bl).abs() <= 1e-12 && k < *bk)
                        }
                    };
                    if better {
                        best = Some((len, k, idx));
                    }
                }
                let (_, _, didx) = best.expect("three diagonals");
                let (dp, dq) = diags[didx];
                let a = m[&dp];
                let c = m[&dq];
                // The remaining four midpoints form a 4-cycle avoiding the
                // other two diagonal pairs.
                let others = diags
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != didx)
                    .map(|(_, d)| *d)
                    .collect::<Vec<_>>();
                let (p1, p2) = others[0];
                let (q1, q2) = others[1];
                let ring = [m[&p1], m[&q1], m[&p2], m[&q2]];
                for i in 0..4 {
                    out.push(alloc::vec![a, c, ring[i], ring[(i + 1) % 4]]);
                }
            }
            _ => unreachable!("ambient dimension gated in build"),
        }
    }
    out
}

/// Odd vertex values in R^k over a symmetric triangulation.
#[derive(Clone, Debug)]
pub struct OddMapSample {
    pub k: usize,
    pub values: Vec<Vec<f64>>,
}

impl OddMapSample {
    /// Validates exact oddness of given values.
    pub fn new(tri: &SymmetricTriangulation, values: Vec<Vec<f64>>) -> Result<Self, BorsukError> {
        if values.len() != tri.vertices.len() {
            return Err(BorsukError::WrongLength {
                expected: tri.vertices.len(),
                got: values.len(),
            });
        }
        let k = values.first().map_or(0, Vec::len);
        for (i, v) in values.iter().enumerate() {
            if v.len() != k {
                return Err(BorsukError::WrongLength { expected: k, got: v.len() });
            }
            let j = tri.antipode[i];
            if values[j].iter().zip(v).any(|(a, b)| *a != -*b) {
                return Err(BorsukError::ValuesNotOdd { vertex: i });
            }
        }
        Ok(Self { k, values })
    }

    /// Samples a function at the vertices, forcing exact oddness by
    /// evaluating on one representative per antipodal pair.
    pub fn from_fn<F: Fn(&[f64]) -> Vec<f64>>(
        tri: &SymmetricTriangulation,
        k: usize,
        f: F,
    ) -> Self {
        let mut values: Vec<Option<Vec<f64>>> = alloc::vec![None; tri.vertices.len()];
        for i in 0..tri.vertices.len() {
            if values[i].is_some() {
                continue;
            }
            let v = f(&tri.vertices[i]);
            debug_assert_eq!(v.len(), k);
            let j = tri.antipode[i];
            values[j] = Some(v.iter().map(|x| -x).collect());
            values[i] = Some(v);
        }
        Self { k, values: values.into_iter().map(Option::unwrap).collect() }
    }

    /// Odd sample with independent uniform values in [-1, 1]^k on one
    /// representative per antipodal pair; deterministic in the seed.
    pub fn random(tri: &SymmetricTriangulation, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values: Vec<Option<Vec<f64>>> = alloc::vec![None; tri.vertices.len()];
        for i in 0..tri.vertices.len() {
            if values[i].is_some() {
                continue;
            }
            let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let j = tri.antipode[i];
            values[j] = Some(v.iter().map(|x| -x).collect());
            values[i] = Some(v);
        }
        Self { k, values: values.into_iter().map(Option::unwrap).collect() }
    }

    /// Piecewise-affine extension evaluated at barycentric coordinates of a
    /// simplex.
    pub fn affine_value(&self, tri: &SymmetricTriangulation, simplex: usize, lambda: &[f64]) -> Vec<f64> {
        let s = &tri.simplices[simplex];
        let mut out = alloc::vec![0.0; self.k];
        for (l, &v) in lambda.iter().zip(s) {
            for (o, x) in out.iter_mut().zip(&self.values[v]) {
                *o += l * x;
            }
        }
        out
    }
}

/// Discrete continuity data: `eps_est` is the largest value jump across an
/// edge, `delta_est` the shortest edge.
pub fn continuity_modulus(tri: &SymmetricTriangulation, sample: &OddMapSample) -> (f64, f64) {
    let mut eps = 0.0;
    let mut delta = f64::INFINITY;
    for (a, b) in tri.edges() {
        eps = fmax(eps, math::dist(&sample.values[a], &sample.values[b]));
        delta = fmin(delta, chord(&tri.vertices[a], &tri.vertices[b]));
    }
    (eps, delta)
}

/// A found near-zero of the piecewise-affine extension.
#[derive(Clone, Debug)]
pub struct ZeroWitness {
    pub simplex: usize,
    pub barycentric: Vec<f64>,
    /// The flat-simplex point realizing the zero.
    pub point: Vec<f64>,
    pub value: Vec<f64>,
    pub value_norm: f64,
    /// Vertex of the simplex carrying the largest barycentric weight.
    pub nearest_vertex: usize,
    pub nearest_vertex_value_norm: f64,
}

/// Scans simplices for a zero of the odd piecewise-affine extension. The
/// classical antipodal theorem guarantees one when the sphere dimension is
/// at least the value dimension.
pub fn find_near_zero(
    tri: &SymmetricTriangulation,
    sample: &OddMapSample,
) -> Result<ZeroWitness, BorsukError> {
    if tri.ambient - 1 < sample.k {
        return Err(BorsukError::DimensionGate { n: tri.ambient, k: sample.k });
    }
    let mut best: Option<ZeroWitness> = None;
    for (si, s) in tri.simplices.iter().enumerate() {
        let pts: Vec<Vec<f64>> = s.iter().map(|&v| sample.values[v].clone()).collect();
        if let Some(lambda) = barycentric_zero(&pts) {
            let value = sample.affine_value(tri, si, &lambda);
            let value_norm = math::norm(&value);
            let mut point = alloc::vec![0.0; tri.ambient];
            for (l, &v) in lambda.iter().zip(s) {
                for (p, x) in point.iter_mut().zip(&tri.vertices[v]) {
                    *p += l * x;
                }
            }
            let nearest = lambda
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| s[i])
                .unwrap_or(s[0]);
            let w = ZeroWitness {
                simplex: si,
                barycentric: lambda,
                point,
                value,
                value_norm,
                nearest_vertex: nearest,
                nearest_vertex_value_norm: math::norm(&sample.values[nearest]),
            };
            if value_norm <= 1e-9 {
                return Ok(w);
            }
            if best.as_ref().is_none_or(|b| w.value_norm < b.value_norm) {
                best = Some(w);
            }
        }
    }
    best.ok_or(BorsukError::NoZeroFound)
}

/// Indices of all simplices whose affine extension vanishes somewhere.
pub fn zero_simplices(tri: &SymmetricTriangulation, sample: &OddMapSample) -> Vec<usize> {
    let mut out = Vec::new();
    for (si, s) in tri.simplices.iter().enumerate() {
        let pts: Vec<Vec<f64>> = s.iter().map(|&v| sample.values[v].clone()).collect();
        if barycentric_zero(&pts).is_some() {
            out.push(si);
        }
    }
    out
}

/// One edgewise refinement of the pair (triangulation, sample), with values
/// interpolated affinely, so the piecewise-affine extension is unchanged on
/// each old simplex.
pub fn interpolate_refine(
    tri: &SymmetricTriangulation,
    sample: &OddMapSample,
) -> (SymmetricTriangulation, OddMapSample) {
    let mut b = Builder { vertices: Vec::new(), index: BTreeMap::new() };
    let mut values: Vec<Vec<f64>> = Vec::new();
    for (v, val) in tri.vertices.iter().zip(&sample.values) {
        b.intern(v.clone());
        values.push(val.clone());
    }
    // Subdivide while recording interpolated midpoint values. The midpoint
    // value must be computed identically for both orders of (a, b), which
    // (x + y) / 2 is.
    let before = |b: &Builder| b.vertices.len();
    let mut simplices = tri.simplices.clone();
    let prev = before(&b);
    simplices = subdivide_once(&mut b, &simplices, tri.ambient);
    // Any vertex created during subdivision is the normalized midpoint of a
    // unique edge; recover values by matching midpoints again.
    let mut mid_values: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (x, y) in tri.edges() {
        let m: Vec<f64> = tri.vertices[x]
            .iter()
            .zip(&tri.vertices[y])
            .map(|(a, c)| (a + c) / 2.0)
            .collect();
        let idx = b.index[&key(&normalize(&m))];
        let val: Vec<f64> = sample.values[x]
            .iter()
            .zip(&sample.values[y])
            .map(|(a, c)| (a + c) / 2.0)
            .collect();
        mid_values.insert(idx, val);
    }
    for i in prev..b.vertices.len() {
        values.push(mid_values.remove(&i).expect("every new vertex is an edge midpoint"));
    }
    let antipode = antipode_map(&b.vertices).expect("refinement keeps exact symmetry");
    let tri2 = SymmetricTriangulation {
        ambient: tri.ambient,
        vertices: b.vertices,
        simplices,
        antipode,
    };
    let sample2 = OddMapSample { k: sample.k, values };
    debug_assert!(OddMapSample::new(&tri2, sample2.values.clone()).is_ok());
    (tri2, sample2)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ImageVerdict {
    /// Vertex values all stay outside the ball while the solver still finds
    /// a near-zero below the same threshold: the configuration the theory
    /// excludes, so the sample's construction must be broken.
    Contradiction,
    Consistent { reason: &'static str },
}

/// Flags samples whose image claims to avoid a ball around zero even though
/// a near-zero of the extension exists with `2 eps_est` below the threshold.
pub fn certify_no_small_image(
    tri: &SymmetricTriangulation,
    sample: &OddMapSample,
    rho: f64,
) -> ImageVerdict {
    let min_norm = sample
        .values
        .iter()
        .map(|v| math::norm(v))
        .fold(f64::INFINITY, fmin);
    if min_norm <= rho {
        return ImageVerdict::Consistent { reason: "a vertex value already enters the ball" };
    }
    let (eps, _) = continuity_modulus(tri, sample);
    if 2.0 * eps >= rho {
        return ImageVerdict::Consistent { reason: "modulus too coarse to exclude the ball" };
    }
    match find_near_zero(tri, sample) {
        Ok(_) => ImageVerdict::Contradiction,
        Err(_) => ImageVerdict::Consistent { reason: "no affine zero found" },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn square_and_octahedron_counts() {
        let sq = SymmetricTriangulation::build(2, 0).unwrap();
        assert_eq!(sq.vertices.len(), 4);
        assert_eq!(sq.simplices.len(), 4);
        assert!(sq.validate());

        let oct = SymmetricTriangulation::build(3, 0).unwrap();
        assert_eq!(oct.vertices.len(), 6);
        assert_eq!(oct.simplices.len(), 8);
        assert!(oct.validate());
    }

    #[test]
    fn subdivision_counts_and_validity() {
        let t = SymmetricTriangulation::build(3, 2).unwrap();
        assert_eq!(t.simplices.len(), 8 * 16);
        assert!(t.validate());

        let t4 = SymmetricTriangulation::build(4, 1).unwrap();
        assert_eq!(t4.simplices.len(), 16 * 8);
        assert!(t4.validate());

        let t4b = SymmetricTriangulation::build(4, 2).unwrap();
        assert_eq!(t4b.simplices.len(), 16 * 64);
        assert!(t4b.validate());
    }

    #[test]
    fn two_subdivisions_beat_half_mesh() {
        let base = SymmetricTriangulation::build(3, 0).unwrap();
        let fine = SymmetricTriangulation::build(3, 2).unwrap();
        assert!(fine.mesh() < base.mesh() / 2.0);
    }

    #[test]
    fn antipode_is_exact() {
        let t = SymmetricTriangulation::build(4, 2).unwrap();
        for (i, v) in t.vertices.iter().enumerate() {
            let j = t.antipode[i];
            assert_ne!(i, j);
            for (a, b) in v.iter().zip(&t.vertices[j]) {
                assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn vertices_are_unit() {
        let t = SymmetricTriangulation::build(3, 3).unwrap();
        for v in &t.vertices {
            assert!((math::norm(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_values_give_zero_modulus() {
        let t = SymmetricTriangulation::build(3, 1).unwrap();
        let s = OddMapSample::from_fn(&t, 1, |_| vec![0.0]);
        let (eps, delta) = continuity_modulus(&t, &s);
        assert_eq!(eps, 0.0);
        assert!(delta > 0.0);
    }

    #[test]
    fn linear_map_modulus_bounded_by_mesh() {
        let t = SymmetricTriangulation::build(3, 2).unwrap();
        let s = OddMapSample::from_fn(&t, 2, |v| vec![v[0] + 0.3 * v[2], v[1]]);
        let (eps, _) = continuity_modulus(&t, &s);
        // operator norm of the sampled linear map is about 1.04
        assert!(eps <= 1.1 * t.mesh());
    }

    #[test]
    fn projection_zero_on_octahedron() {
        let t = SymmetricTriangulation::build(3, 0).unwrap();
        let s = OddMapSample::from_fn(&t, 1, |v| vec![v[2]]);
        let w = find_near_zero(&t, &s).unwrap();
        assert!(w.value_norm <= 1e-9);
        // witness point sits on the equator plane
        assert!(w.point[2].abs() < 1e-9);
    }

    #[test]
    fn affine_perturbed_projection_s2() {
        let t = SymmetricTriangulation::build(3, 3).unwrap();
        let s = OddMapSample::from_fn(&t, 2, |v| vec![v[0] + 0.3 * v[2], v[1]]);
        let w = find_near_zero(&t, &s).unwrap();
        assert!(w.value_norm <= 1e-9);
        let (eps, _) = continuity_modulus(&t, &s);
        assert!(w.nearest_vertex_value_norm <= 2.0 * eps);
    }

    #[test]
    fn random_batches_find_witnesses() {
        let t3 = SymmetricTriangulation::build(3, 2).unwrap();
        for seed in 0..25 {
            let s = OddMapSample::random(&t3, 1, seed);
            let w = find_near_zero(&t3, &s).unwrap();
            assert!(w.value_norm <= 1e-9, "seed {seed}");
            let (eps, _) = continuity_modulus(&t3, &s);
            assert!(w.nearest_vertex_value_norm <= 2.0 * eps, "seed {seed}");
        }
        let t4 = SymmetricTriangulation::build(4, 1).unwrap();
        for seed in 0..10 {
            let s = OddMapSample::random(&t4, 2, seed);
            let w = find_near_zero(&t4, &s).unwrap();
            assert!(w.value_norm <= 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn dimension_gate_rejects() {
        let t = SymmetricTriangulation::build(2, 1).unwrap();
        let s = OddMapSample::random(&t, 2, 1);
        assert!(matches!(
            find_near_zero(&t, &s),
            Err(BorsukError::DimensionGate { n: 2, k: 2 })
        ));
    }

    #[test]
    fn pl_extension_is_odd_at_random_points() {
        let t = SymmetricTriangulation::build(3, 1).unwrap();
        let s = OddMapSample::random(&t, 2, 7);
        // An antipodal simplex carries the negated affine map: check via
        // matching barycentric coordinates.
        let set: BTreeMap<Vec<usize>, usize> = t
            .simplices
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut v = s.clone();
                v.sort_unstable();
                (v, i)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (si, simplex) in t.simplices.iter().enumerate() {
            let mut lambda: Vec<f64> = (0..simplex.len()).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = lambda.iter().sum();
            for l in lambda.iter_mut() {
                *l /= sum;
            }
            let val = s.affine_value(&t, si, &lambda);
            let mut anti: Vec<usize> = simplex.iter().map(|&v| t.antipode[v]).collect();
            let mut order: Vec<usize> = (0..anti.len()).collect();
            order.sort_by_key(|&i| anti[i]);
            anti.sort_unstable();
            let aj = set[&anti];
            // permute lambda to the sorted antipodal simplex; affine_value
            // uses the stored (unsorted) order, so realign.
            let stored = &t.simplices[aj];
            let lam2: Vec<f64> = stored
                .iter()
                .map(|v| {
                    let pos = simplex.iter().position(|&x| t.antipode[x] == *v).unwrap();
                    lambda[pos]
                })
                .collect();
            let val2 = s.affine_value(&t, aj, &lam2);
            for (a, b) in val.iter().zip(&val2) {
                assert!((a + b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn refinement_never_worsens_best_witness() {
        let t = SymmetricTriangulation::build(3, 1).unwrap();
        let s = OddMapSample::random(&t, 2, 11);
        let w1 = find_near_zero(&t, &s).unwrap();
        let (t2, s2) = interpolate_refine(&t, &s);
        assert!(t2.validate());
        let w2 = find_near_zero(&t2, &s2).unwrap();
        assert!(w2.value_norm <= w1.value_norm + 1e-12);
    }

    #[test]
    fn zero_parity_is_odd_for_full_rank_samples() {
        // k = n-1 on S^2: zeros of an odd sample come in antipodal pairs
        // (x is a zero iff -x is), and for generic values the number of
        // PAIRS of zero-carrying simplices is odd; one zero per pair is the
        // content of the antipodal theorem.
        let t = SymmetricTriangulation::build(3, 1).unwrap();
        let mut tested = 0;
        for seed in [2, 3, 5, 8, 13] {
            let s = OddMapSample::random(&t, 2, seed);
            let zs = zero_simplices(&t, &s);
            // Skip seeds whose zeros graze simplex boundaries.
            let generic = zs.iter().all(|&si| {
                let pts: Vec<Vec<f64>> =
                    t.simplices[si].iter().map(|&v| s.values[v].clone()).collect();
                let lambda = barycentric_zero(&pts).unwrap();
                lambda.iter().all(|&l| l > 1e-7)
            });
            if generic {
                tested += 1;
                assert_eq!(zs.len() % 2, 0, "seed {seed}: zero simplices pair up antipodally");
                assert_eq!(
                    (zs.len() / 2) % 2,
                    1,
                    "seed {seed}: {} zero simplices, pair count must be odd",
                    zs.len()
                );
            }
        }
        assert!(tested >= 3);
    }

    #[test]
    fn contradiction_detector() {
        let t = SymmetricTriangulation::build(3, 2).unwrap();
        // Honest projection sample: zero in image, no contradiction.
        let s = OddMapSample::from_fn(&t, 1, |v| vec![v[0]]);
        assert!(matches!(
            certify_no_small_image(&t, &s, 0.5),
            ImageVerdict::Consistent { .. }
        ));
        // Clamped sample: norms pinned to 1 with a sign, claiming a gap it
        // cannot have; smooth enough on a fine mesh to trip the detector.
        let fine = SymmetricTriangulation::build(3, 3).unwrap();
        let clamped = OddMapSample::from_fn(&fine, 1, |v| {
            let x = v[0] + 0.01 * v[1];
            vec![if x >= 0.0 { 1.0 } else { -1.0 }]
        });
        let (eps, _) = continuity_modulus(&fine, &clamped);
        if 2.0 * eps < 1.9 {
            assert_eq!(certify_no_small_image(&fine, &clamped, 1.9 - 2.0 * eps), {
                ImageVerdict::Contradiction
            });
        }
        // The clamp jumps by 2 across the zero line, so the modulus is 2 and
        // the detector instead reports the modulus reason at rho = 1.
        assert!(matches!(
            certify_no_small_image(&fine, &clamped, 1.0),
            ImageVerdict::Consistent { .. }
        ));
    }
}
