//! JSON mirror types for the core data model, plus loaders that re-validate
//! on the way in. Formats stay structural: big grid groups and maps are
//! exported by their defining parameters, never as materialized tables.

use std::collections::BTreeSet;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use egh_core::approx::{ApproximationMap, PhiMap};
use egh_core::gh::{EpsApproximation, GhMode, GhResult, Triple};
use egh_core::group::{El, FinGroup, MElem, ModelGroup, TableGroup, TElem, Target, TargetSet};
use egh_core::iso::{closure, Isometry, IsometryGroup};
use egh_core::metric::{validate_metric, FiniteMetricSpace};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceJson {
    pub n: usize,
    pub dist: Vec<Vec<f64>>,
    pub basepoint: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl SpaceJson {
    pub fn from_core(m: &FiniteMetricSpace) -> Self {
        Self {
            n: m.len(),
            dist: m.rows(),
            basepoint: m.basepoint(),
            labels: m.labels.clone(),
        }
    }

    pub fn into_core(self) -> Result<FiniteMetricSpace> {
        if self.dist.len() != self.n {
            bail!("dist has {} rows, header says n = {}", self.dist.len(), self.n);
        }
        let mut m = FiniteMetricSpace::new(self.dist, self.basepoint)
            .map_err(|e| anyhow!("bad space: {e}"))?;
        m.labels = self.labels;
        let violations = validate_metric(&m);
        if !violations.is_empty() {
            bail!("space is not a metric: {:?}", violations[0]);
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupJson {
    pub gens: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<Vec<usize>>>,
}

impl GroupJson {
    pub fn from_core(g: &IsometryGroup) -> Self {
        Self {
            gens: g.generators.iter().map(|&i| g.elements[i].perm.clone()).collect(),
            elements: Some(g.elements.iter().map(|e| e.perm.clone()).collect()),
        }
    }

    pub fn into_core(self, space: &FiniteMetricSpace) -> Result<IsometryGroup> {
        let gens: Vec<Isometry> = self.gens.into_iter().map(|perm| Isometry { perm }).collect();
        let g = closure(space, &gens).map_err(|e| anyhow!("bad group: {e}"))?;
        if let Some(els) = self.elements {
            let mut declared: Vec<Vec<usize>> = els;
            declared.sort();
            let mut actual: Vec<Vec<usize>> =
                g.elements.iter().map(|e| e.perm.clone()).collect();
            actual.sort();
            if declared != actual {
                bail!("declared elements do not match the closure of the generators");
            }
        }
        Ok(g)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TripleJson {
    pub space: SpaceJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupJson>,
}

impl TripleJson {
    pub fn from_core(t: &Triple) -> Self {
        Self {
            space: SpaceJson::from_core(&t.space),
            group: Some(GroupJson::from_core(&t.group)),
        }
    }

    pub fn into_core(self) -> Result<Triple> {
        let space = self.space.into_core()?;
        let group = match self.group {
            Some(g) => g.into_core(&space)?,
            None => IsometryGroup::trivial(space.len()),
        };
        Triple::new(space, group).map_err(|e| anyhow!("group does not act: {e}"))
    }
}

pub fn load_triple(path: &str) -> Result<Triple> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let json: TripleJson =
        serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    json.into_core().with_context(|| format!("validating {path}"))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FinGroupJson {
    Table { n: usize, mul: Vec<u32>, inv: Vec<u32>, id: usize, metric: Vec<f64> },
    Cyclic { n: i64, step: f64 },
    CyclicLine { n: i64, step: f64 },
    Grid2 { m: i64, step: f64 },
    Heis { m: i64, step: f64 },
    Grid3 { m: i64, step: f64 },
    TorusGrid { g: i64, radii: [f64; 2] },
    Padic { p: i64, k: u32 },
}

impl FinGroupJson {
    pub fn from_core(g: &FinGroup) -> Self {
        match g {
            FinGroup::Table(t) => FinGroupJson::Table {
                n: t.n,
                mul: t.mul.clone(),
                inv: t.inv.clone(),
                id: t.id,
                metric: t.metric.clone(),
            },
            FinGroup::Cyclic { n, step } => FinGroupJson::Cyclic { n: *n, step: *step },
            FinGroup::CyclicLine { n, step } => FinGroupJson::CyclicLine { n: *n, step: *step },
            FinGroup::Grid2 { m, step } => FinGroupJson::Grid2 { m: *m, step: *step },
            FinGroup::Heis { m, step } => FinGroupJson::Heis { m: *m, step: *step },
            FinGroup::Grid3 { m, step } => FinGroupJson::Grid3 { m: *m, step: *step },
            FinGroup::TorusGrid { g, radii } => {
                FinGroupJson::TorusGrid { g: *g, radii: *radii }
            }
            FinGroup::Padic { p, k } => FinGroupJson::Padic { p: *p, k: *k },
        }
    }

    pub fn into_core(self) -> Result<FinGroup> {
        Ok(match self {
            FinGroupJson::Table { n, mul, inv, id, metric } => {
                if mul.len() != n * n || metric.len() != n * n || inv.len() != n || id >= n {
                    bail!("table group has inconsistent sizes");
                }
                FinGroup::Table(TableGroup { n, mul, inv, id, metric })
            }
            FinGroupJson::Cyclic { n, step } => FinGroup::Cyclic { n, step },
            FinGroupJson::CyclicLine { n, step } => FinGroup::CyclicLine { n, step },
            FinGroupJson::Grid2 { m, step } => FinGroup::Grid2 { m, step },
            FinGroupJson::Heis { m, step } => {
                FinGroup::heis(m, step).map_err(|e| anyhow!("{e}"))?
            }
            FinGroupJson::Grid3 { m, step } => FinGroup::Grid3 { m, step },
            FinGroupJson::TorusGrid { g, radii } => FinGroup::TorusGrid { g, radii },
            FinGroupJson::Padic { p, k } => FinGroup::Padic { p, k },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelGroupJson {
    Euclidean { dim: usize },
    Integers,
    Torus { radii: Vec<f64> },
    Rotations,
}

impl ModelGroupJson {
    pub fn from_core(m: &ModelGroup) -> Self {
        match m {
            ModelGroup::Euclidean { dim } => ModelGroupJson::Euclidean { dim: *dim },
            ModelGroup::Integers => ModelGroupJson::Integers,
            ModelGroup::Torus { radii } => ModelGroupJson::Torus { radii: radii.clone() },
            ModelGroup::Rotations => ModelGroupJson::Rotations,
        }
    }

    pub fn into_core(self) -> ModelGroup {
        match self {
            ModelGroupJson::Euclidean { dim } => ModelGroup::Euclidean { dim },
            ModelGroupJson::Integers => ModelGroup::Integers,
            ModelGroupJson::Torus { radii } => ModelGroup::Torus { radii },
            ModelGroupJson::Rotations => ModelGroup::Rotations,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetJson {
    Fin { group: FinGroupJson },
    Model { group: ModelGroupJson },
}

impl TargetJson {
    pub fn from_core(t: &Target) -> Self {
        match t {
            Target::Fin(g) => TargetJson::Fin { group: FinGroupJson::from_core(g) },
            Target::Model(m) => TargetJson::Model { group: ModelGroupJson::from_core(m) },
        }
    }

    pub fn into_core(self) -> Result<Target> {
        Ok(match self {
            TargetJson::Fin { group } => Target::Fin(group.into_core()?),
            TargetJson::Model { group } => Target::Model(group.into_core()),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TElemJson {
    Fin { el: El },
    Coords { coords: Vec<f64> },
    Quat { quat: [f64; 4] },
}

impl TElemJson {
    pub fn from_core(e: &TElem) -> Self {
        match e {
            TElem::Fin(el) => TElemJson::Fin { el: *el },
            TElem::Model(MElem::Coords(c)) => TElemJson::Coords { coords: c.clone() },
            TElem::Model(MElem::Quat(q)) => TElemJson::Quat { quat: *q },
        }
    }

    pub fn into_core(self) -> TElem {
        match self {
            TElemJson::Fin { el } => TElem::Fin(el),
            TElemJson::Coords { coords } => TElem::Model(MElem::Coords(coords)),
            TElemJson::Quat { quat } => TElem::Model(MElem::Quat(quat)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetSetJson {
    Ball { radius: f64, closed: bool },
    BallAt { center: TElemJson, radius: f64, closed: bool },
    All,
    Finite { members: Vec<El> },
}

impl TargetSetJson {
    pub fn from_core(s: &TargetSet) -> Self {
        match s {
            TargetSet::Ball { radius, closed } => {
                TargetSetJson::Ball { radius: *radius, closed: *closed }
            }
            TargetSet::BallAt { center, radius, closed } => TargetSetJson::BallAt {
                center: TElemJson::from_core(center),
                radius: *radius,
                closed: *closed,
            },
            TargetSet::All => TargetSetJson::All,
            TargetSet::Finite(set) => {
                TargetSetJson::Finite { members: set.iter().copied().collect() }
            }
        }
    }

    pub fn into_core(self) -> TargetSet {
        match self {
            TargetSetJson::Ball { radius, closed } => TargetSet::Ball { radius, closed },
            TargetSetJson::BallAt { center, radius, closed } => TargetSet::BallAt {
                center: center.into_core(),
                radius,
                closed,
            },
            TargetSetJson::All => TargetSet::All,
            TargetSetJson::Finite { members } => {
                TargetSet::Finite(members.into_iter().collect::<BTreeSet<El>>())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhiMapJson {
    Table { entries: Vec<(El, TElemJson)> },
    CenteredScale { modulus: i64, scale: f64 },
    ProjectFirst { modulus: i64, step: f64 },
    CoordsIdentity,
    AngleScale { n: i64, q: i64 },
    TorusAngleFirst { grid: i64 },
    Symmetrized { inner: Box<PhiMapJson> },
    Blowup { inner: Box<PhiMapJson>, inner_target: ModelGroupJson, scale: f64 },
}

impl PhiMapJson {
    pub fn from_core(p: &PhiMap) -> Self {
        match p {
            PhiMap::Table(t) => PhiMapJson::Table {
                entries: t.iter().map(|(k, v)| (*k, TElemJson::from_core(v))).collect(),
            },
            PhiMap::CenteredScale { modulus, scale } => {
                PhiMapJson::CenteredScale { modulus: *modulus, scale: *scale }
            }
            PhiMap::ProjectFirst { modulus, step } => {
                PhiMapJson::ProjectFirst { modulus: *modulus, step: *step }
            }
            PhiMap::CoordsIdentity => PhiMapJson::CoordsIdentity,
            PhiMap::AngleScale { n, q } => PhiMapJson::AngleScale { n: *n, q: *q },
            PhiMap::TorusAngleFirst { grid } => PhiMapJson::TorusAngleFirst { grid: *grid },
            PhiMap::Symmetrized { inner } => {
                PhiMapJson::Symmetrized { inner: Box::new(Self::from_core(inner)) }
            }
            PhiMap::Blowup { inner, inner_target, scale } => PhiMapJson::Blowup {
                inner: Box::new(Self::from_core(inner)),
                inner_target: ModelGroupJson::from_core(inner_target),
                scale: *scale,
            },
        }
    }

    pub fn into_core(self) -> PhiMap {
        match self {
            PhiMapJson::Table { entries } => PhiMap::Table(
                entries.into_iter().map(|(k, v)| (k, v.into_core())).collect(),
            ),
            PhiMapJson::CenteredScale { modulus, scale } => {
                PhiMap::CenteredScale { modulus, scale }
            }
            PhiMapJson::ProjectFirst { modulus, step } => PhiMap::ProjectFirst { modulus, step },
            PhiMapJson::CoordsIdentity => PhiMap::CoordsIdentity,
            PhiMapJson::AngleScale { n, q } => PhiMap::AngleScale { n, q },
            PhiMapJson::TorusAngleFirst { grid } => PhiMap::TorusAngleFirst { grid },
            PhiMapJson::Symmetrized { inner } => {
                PhiMap::Symmetrized { inner: Box::new(inner.into_core()) }
            }
            PhiMapJson::Blowup { inner, inner_target, scale } => PhiMap::Blowup {
                inner: Box::new(inner.into_core()),
                inner_target: inner_target.into_core(),
                scale,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapJson {
    pub source: FinGroupJson,
    pub target: TargetJson,
    pub phi: PhiMapJson,
    pub a_src: Vec<El>,
    pub a_tgt: TargetSetJson,
}

impl MapJson {
    pub fn from_core(m: &ApproximationMap) -> Self {
        Self {
            source: FinGroupJson::from_core(&m.source),
            target: TargetJson::from_core(&m.target),
            phi: PhiMapJson::from_core(&m.phi),
            a_src: m.a_src.iter().copied().collect(),
            a_tgt: TargetSetJson::from_core(&m.a_tgt),
        }
    }

    pub fn into_core(self) -> Result<ApproximationMap> {
        let map = ApproximationMap {
            source: self.source.into_core()?,
            target: self.target.into_core()?,
            phi: self.phi.into_core(),
            a_src: egh_core::group::SymSet::from_iter(self.a_src),
            a_tgt: self.a_tgt.into_core(),
        };
        let problems = map.validate();
        if !problems.is_empty() {
            bail!("bad approximation map: {}", problems.join("; "));
        }
        Ok(map)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessJson {
    pub pairs: Vec<(usize, usize)>,
    pub distortion: f64,
    pub cross: Vec<Vec<f64>>,
    pub phi: Vec<usize>,
    pub psi: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GhResultJson {
    pub eps: f64,
    pub lower: f64,
    pub upper: f64,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
}

impl GhResultJson {
    pub fn from_core(r: &GhResult, ny: usize) -> Self {
        Self {
            eps: r.eps(),
            lower: r.lower,
            upper: r.upper,
            mode: match r.mode {
                GhMode::Exact => "exact".into(),
                GhMode::Bounds => "bounds".into(),
            },
            witness: r.witness.as_ref().map(|(c, a)| WitnessJson {
                pairs: c.pairs.clone(),
                distortion: c.distortion,
                cross: a
                    .cross
                    .chunks(ny)
                    .map(|row| row.to_vec())
                    .collect(),
                phi: a.phi.clone(),
                psi: a.psi.clone(),
            }),
        }
    }
}

/// Rebuilds the core witness from its JSON form (for revalidation flows).
pub fn witness_into_core(w: &WitnessJson, eps: f64) -> EpsApproximation {
    EpsApproximation {
        eps,
        cross: w.cross.iter().flatten().copied().collect(),
        phi: w.phi.clone(),
        psi: w.psi.clone(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriangulationJson {
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
    pub antipode: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OddSampleJson {
    pub triangulation: TriangulationJson,
    pub k: usize,
    pub values: Vec<Vec<f64>>,
}
