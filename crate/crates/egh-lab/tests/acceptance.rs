//! Acceptance suite: every exit criterion of the laboratory, one test per
//! criterion, each printing a single pass/fail line with its runtime.
//! Tolerances and runtime budgets are pinned in the assertions.

use std::collections::BTreeSet;
use std::time::Instant;

use egh_core::approx::{
    blowup, check_conditions, detect_small, localize, maximal_small, quotient_sequence,
    verify_blowup_bounds,
};
use egh_core::borsuk::{continuity_modulus, find_near_zero, OddMapSample, SymmetricTriangulation};
use egh_core::escape::{
    check_limsup_formula, check_norm_continuity_bound, convex_hull_norm, escape_norm,
    escape_norm_model, estimate_gleason_constant_model, tau_and_algebra_norm, zero_set,
    DEFAULT_M_CAP,
};
use egh_core::gh::{
    check_almost_morphism, equivariant_gh, pointed_gh, EpsApproximation, GhMode, Triple,
};
use egh_core::group::{
    enumerate_small_subgroups, El, FinGroup, MElem, ModelGroup, SymSet, TableGroup, TargetSet,
};
use egh_core::iso::{closure, full_isometry_group, quotient_group, IsoError, Isometry, IsometryGroup};
use egh_core::metric::{hausdorff_distance, validate_metric, FiniteMetricSpace};
use egh_core::scenarios::{
    algebra_r2, algebra_so3, algebra_t2, collapsing_sphere, counterexample, fixed_directions,
    hexagon_approximation, hexagon_graph, point_triple, torus_collapse, tower_instability,
    Condition, HEXAGON_X, TORUS_BLOWUP_SCALE,
};

fn finish(name: &str, started: Instant, pass: bool, budget_s: f64, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    let in_budget = elapsed < budget_s;
    let verdict = if pass && in_budget { "PASS" } else { "FAIL" };
    let line = format!("ACCEPTANCE {name}: {verdict} ({elapsed:.2}s / {budget_s:.0}s) {detail}");
    println!("{line}");
    assert!(pass && in_budget, "{line}");
}

#[test]
fn c01_hexagon_reproduction() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for i in [1u32, 2, 4, 8] {
        let s = hexagon_graph(i);
        pass &= s.triple.group.order() == 6;

        // Displacement curve of H vanishes identically up to radius i,
        // in exact integer arithmetic.
        let v = detect_small(&[(s.triple.clone(), s.h_indices.clone())], 0.0, f64::from(i));
        pass &= v[0].subgroup_ok && v[0].small_at;
        for (r, c) in v[0].radii.iter().zip(&v[0].curve) {
            if *r <= f64::from(i) {
                pass &= *c == 0.0;
            }
        }

        // Every other nontrivial subgroup displaces the basepoint by
        // exactly 3i or more.
        let table = TableGroup::from_isometries(&s.triple.space, &s.triple.group);
        let fin = FinGroup::Table(table);
        let h_set: BTreeSet<El> = s.h_indices.iter().map(|&i| [i as i64, 0, 0]).collect();
        let p = s.triple.space.basepoint();
        for sub in enumerate_small_subgroups(&fin).unwrap() {
            let sub_set: BTreeSet<El> = sub.iter().copied().collect();
            if sub.len() == 1 || sub_set == h_set {
                continue;
            }
            let disp = sub
                .iter()
                .map(|e| {
                    let g = &s.triple.group.elements[e[0] as usize];
                    s.triple.space.d(g.apply(p), p)
                })
                .fold(0.0_f64, f64::max);
            pass &= disp >= 3.0 * f64::from(i);
        }

        // Escape-norm extraction agrees and fails normality in the full
        // group; the quotient constructor names the violation.
        let map = hexagon_approximation(i);
        let loc = localize(&map, &map.a_tgt.clone(), 3).unwrap();
        let ms = maximal_small(&[loc.map], 0.05).unwrap();
        pass &= ms[0].is_subgroup
            && ms[0].members.len() == 2
            && ms[0].contains_all_small
            && ms[0].normal_in_span
            && ms[0].normal_in_full == Some(false);
        let q = quotient_sequence(&[(s.triple.clone(), s.h_indices.clone())]);
        pass &= matches!(q, Err(IsoError::NotNormal { .. }));
        detail = format!("last index {i}: H order 2, non-normal confirmed");
    }
    finish("c01 hexagon-reproduction", t0, pass, 1.0, &detail);
}

#[test]
fn c02_counterexample_matrix() {
    let t0 = Instant::now();
    let mut pass = true;
    for i in [10u32, 20] {
        for which in Condition::ALL {
            let map = counterexample(which, i);
            let reports = check_conditions(&[map], 0.05, 3, None).unwrap();
            let failing = reports[0].failing();
            if failing != vec![which.index()] {
                pass = false;
                println!("  family {which} index {i}: failing {failing:?}");
            }
        }
    }
    finish("c02 counterexample-matrix", t0, pass, 30.0, "5 families x {10, 20}");
}

// ---------------------------------------------------------------------
// Criterion 3: an independent exhaustive oracle over all relations.

fn oracle_feasible(tx: &Triple, ty: &Triple, pairs: &[(usize, usize)], eps: f64) -> bool {
    let (mx, my) = (&tx.space, &ty.space);
    let (nx, ny) = (mx.len(), my.len());
    let (p, q) = (mx.basepoint(), my.basepoint());
    if !pairs.contains(&(p, q)) {
        return false;
    }
    for (i, &(x, y)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[i..] {
            if (mx.d(x, x2) - my.d(y, y2)).abs() > eps + 1e-12 {
                return false;
            }
        }
    }
    let cross = |x: usize, y: usize| -> f64 {
        let mut best = f64::INFINITY;
        for &(x2, y2) in pairs {
            best = best.min(mx.d(x, x2) + my.d(y2, y));
        }
        best + eps / 2.0
    };
    if cross(p, q) >= eps {
        return false;
    }
    let cutoff = 1.0 / eps;
    for x in 0..nx {
        if mx.d(p, x) < cutoff
            && !(0..ny).any(|y| my.d(q, y) < cutoff && cross(x, y) < eps)
        {
            return false;
        }
    }
    for y in 0..ny {
        if my.d(q, y) < cutoff
            && !(0..nx).any(|x| mx.d(p, x) < cutoff && cross(x, y) < eps)
        {
            return false;
        }
    }
    let ball = 1.0 / (3.0 * eps);
    let bx: Vec<usize> = (0..nx).filter(|&x| mx.d(p, x) < ball).collect();
    let by: Vec<usize> = (0..ny).filter(|&y| my.d(q, y) < ball).collect();
    for g in &tx.group.elements {
        if mx.d(g.apply(p), p) >= ball {
            continue;
        }
        let ok = ty.group.elements.iter().any(|h| {
            bx.iter().all(|&x| {
                by.iter().all(|&y| {
                    (cross(x, y) - cross(g.apply(x), h.apply(y))).abs() < eps
                })
            })
        });
        if !ok {
            return false;
        }
    }
    for h in &ty.group.elements {
        if my.d(h.apply(q), q) >= ball {
            continue;
        }
        let ok = tx.group.elements.iter().any(|g| {
            bx.iter().all(|&x| {
                by.iter().all(|&y| {
                    (cross(x, y) - cross(g.apply(x), h.apply(y))).abs() < eps
                })
            })
        });
        if !ok {
            return false;
        }
    }
    true
}

fn oracle_feasible_at(tx: &Triple, ty: &Triple, eps: f64) -> bool {
    let (nx, ny) = (tx.space.len(), ty.space.len());
    let cells = nx * ny;
    let (p, q) = (tx.space.basepoint(), ty.space.basepoint());
    let bp = 1u32 << (p * ny + q);
    let mut rows = vec![0u32; nx];
    let mut cols = vec![0u32; ny];
    for c in 0..cells {
        rows[c / ny] |= 1 << c;
        cols[c % ny] |= 1 << c;
    }
    // pairwise incompatibility at this epsilon
    let mut incompat = vec![0u32; cells];
    for a in 0..cells {
        for b in 0..cells {
            let (xa, ya) = (a / ny, a % ny);
            let (xb, yb) = (b / ny, b % ny);
            if (tx.space.d(xa, xb) - ty.space.d(ya, yb)).abs() > eps + 1e-12 {
                incompat[a] |= 1 << b;
            }
        }
    }
    'mask: for mask in 0u32..(1u32 << cells) {
        if mask & bp == 0 {
            continue;
        }
        if rows.iter().chain(&cols).any(|&m| m & mask == 0) {
            continue;
        }
        let mut rest = mask;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            if incompat[c] & mask != 0 {
                continue 'mask;
            }
            rest &= rest - 1;
        }
        let pairs: Vec<(usize, usize)> = (0..cells)
            .filter(|c| mask & (1 << c) != 0)
            .map(|c| (c / ny, c % ny))
            .collect();
        if oracle_feasible(tx, ty, &pairs, eps) {
            return true;
        }
    }
    false
}

fn oracle_value(tx: &Triple, ty: &Triple) -> f64 {
    if !oracle_feasible_at(tx, ty, 0.2) {
        return 0.2;
    }
    let (mut lo, mut hi) = (0.0, 0.2);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if oracle_feasible_at(tx, ty, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// All pointed spaces with up to `max_n` points and integer distances in
/// {1, 2, 3}, deduplicated under basepoint-fixing relabelings.
fn pointed_corpus(max_n: usize) -> Vec<FiniteMetricSpace> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let m = n * (n - 1) / 2;
        let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
        for code in 0..3usize.pow(m as u32) {
            let mut c = code;
            let mut d = vec![vec![0u8; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = (c % 3 + 1) as u8;
                    c /= 3;
                    d[i][j] = v;
                    d[j][i] = v;
                }
            }
            let mut ok = true;
            'tri: for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if i != j && j != k && i != k && d[i][k] > d[i][j] + d[j][k] {
                            ok = false;
                            break 'tri;
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            // canonical form over permutations fixing the basepoint 0
            let mut perm: Vec<usize> = (1..n).collect();
            let mut best: Option<Vec<u8>> = None;
            permute(&mut perm, 0, &mut |p| {
                let mut full = vec![0usize; n];
                for (a, &b) in p.iter().enumerate() {
                    full[a + 1] = b;
                }
                let mut flat = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        flat.push(d[full[i]][full[j]]);
                    }
                }
                if best.as_ref().is_none_or(|b| flat < *b) {
                    best = Some(flat);
                }
            });
            let key = best.unwrap();
            if seen.insert(key) {
                let rows: Vec<Vec<f64>> =
                    d.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
                out.push(FiniteMetricSpace::new(rows, 0).unwrap());
            }
        }
    }
    out
}

fn permute<F: FnMut(&[usize])>(items: &mut Vec<usize>, k: usize, f: &mut F) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

#[test]
fn c03_gh_oracle_equivalence() {
    let t0 = Instant::now();
    let corpus = pointed_corpus(4);
    let mut pass = true;
    let mut checked = 0usize;
    for (i, a) in corpus.iter().enumerate() {
        for b in corpus.iter().skip(i) {
            let got = pointed_gh(a, b);
            let ta = Triple::pointed(a.clone());
            let tb = Triple::pointed(b.clone());
            let want = oracle_value(&ta, &tb);
            checked += 1;
            if (got.upper - want).abs() > 1e-6 + 1e-9 || got.mode != GhMode::Exact {
                pass = false;
                println!("  pointed mismatch: {} vs oracle {want}", got.upper);
            }
        }
    }
    let pointed_pairs = checked;

    // Equivariant without the trivial-group duplicates: triples built from
    // subgroups of order 2..=4, deduplicated under basepoint-fixing
    // relabelings, paired exhaustively.
    let mut triples: Vec<Triple> = Vec::new();
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    for space in &corpus {
        let Ok(full) = full_isometry_group(space) else { continue };
        let fin = FinGroup::Table(TableGroup::from_isometries(space, &full));
        for sub in enumerate_small_subgroups(&fin).unwrap() {
            if sub.len() < 2 || sub.len() > 4 {
                continue;
            }
            let elements: Vec<Isometry> =
                sub.iter().map(|e| full.elements[e[0] as usize].clone()).collect();
            let group = closure(space, &elements).unwrap();
            // canonical (space, subgroup) key under basepoint-fixing maps
            let n = space.len();
            let mut perm: Vec<usize> = (1..n).collect();
            let mut best: Option<Vec<u64>> = None;
            permute(&mut perm, 0, &mut |p| {
                let mut full_p = vec![0usize; n];
                for (a, &b) in p.iter().enumerate() {
                    full_p[a + 1] = b;
                }
                let mut inv = vec![0usize; n];
                for (a, &b) in full_p.iter().enumerate() {
                    inv[b] = a;
                }
                let mut key: Vec<u64> = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        key.push(space.d(full_p[i], full_p[j]) as u64);
                    }
                }
                let mut gs: Vec<Vec<u64>> = group
                    .elements
                    .iter()
                    .map(|g| {
                        (0..n).map(|i| inv[g.apply(full_p[i])] as u64).collect()
                    })
                    .collect();
                gs.sort();
                for g in gs {
                    key.extend(g);
                }
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            });
            if seen.insert(best.unwrap()) {
                triples.push(Triple { space: space.clone(), group });
            }
        }
    }
    let mut eq_checked = 0usize;
    for (i, a) in triples.iter().enumerate() {
        for b in triples.iter().skip(i) {
            let got = equivariant_gh(a, b);
            let want = oracle_value(a, b);
            eq_checked += 1;
            if (got.upper - want).abs() > 1e-6 + 1e-9 {
                pass = false;
                println!(
                    "  equivariant mismatch: {} vs oracle {want} (|X|={}, |G|={})",
                    got.upper,
                    a.space.len(),
                    a.group.order()
                );
            }
        }
    }
    finish(
        "c03 gh-oracle-equivalence",
        t0,
        pass,
        600.0,
        &format!("{pointed_pairs} pointed pairs, {eq_checked} equivariant pairs ({} triples)", triples.len()),
    );
}

#[test]
fn c04_collapsing_spheres() {
    let t0 = Instant::now();
    let point = point_triple();
    let mut pass = true;
    let mut last = f64::INFINITY;
    let mut values = Vec::new();
    for i in [1u32, 2, 4, 8] {
        let s = collapsing_sphere(i, 1, 16);
        let r = equivariant_gh(&s.triple, &point);
        let mesh = s.triple.space.d(0, 1);
        pass &= matches!(r.mode, GhMode::Exact);
        pass &= r.upper <= core::f64::consts::PI / f64::from(i) + mesh + 1e-6;
        pass &= r.upper <= last + 1e-6;
        last = r.upper;
        values.push(format!("{:.4}", r.upper));
    }
    finish("c04 collapsing-spheres", t0, pass, 60.0, &values.join(" "));
}

#[test]
fn c05_escape_norm_exactness() {
    let t0 = Instant::now();
    let mut pass = true;
    for n in 1..=64i64 {
        let g = FinGroup::Cyclic { n, step: 1.0 };
        for k in 0..=(n / 2) {
            let a = SymSet::from_iter(
                (-k..=k).map(|v| g.canon([v, 0, 0])),
            );
            for s in 0..n {
                let got = escape_norm(&g, &a, [s, 0, 0]);
                // Independent oracle: walk centered representatives.
                let mut want = 0.0;
                let mut acc = 0i64;
                for j in 1..=n {
                    acc = (acc + s).rem_euclid(n);
                    let centered = if 2 * acc > n { acc - n } else { acc };
                    if centered.abs() > k {
                        want = 1.0 / j as f64;
                        break;
                    }
                    if acc == 0 {
                        break;
                    }
                }
                if got != want {
                    pass = false;
                }
                // The closed form 1/(floor(k/|step|)+1) on its validity
                // domain: exits before any wrap can rescue the walk.
                let sc = if 2 * s > n { s - n } else { s };
                if sc != 0 {
                    let jstar = k / sc.abs() + 1;
                    if jstar * sc.abs() <= n / 2 {
                        let closed = 1.0 / (jstar as f64);
                        if (got - closed).abs() > 1e-15 {
                            pass = false;
                        }
                    }
                }
            }
        }
    }
    // The hypothesis-failure family: the whole circle minus one point.
    let m = ModelGroup::Torus { radii: vec![1.0] };
    let a = TargetSet::Ball { radius: core::f64::consts::PI, closed: false };
    let gq = MElem::Coords(vec![core::f64::consts::PI]);
    let seq: Vec<MElem> = (1..=40)
        .map(|j| MElem::Coords(vec![core::f64::consts::PI - 1.0 / f64::from(j)]))
        .collect();
    let rep = check_norm_continuity_bound(&m, &a, &gq, &seq, 200_000);
    pass &= !rep.hypothesis_ok && rep.g_norm == 1.0 && rep.tail_liminf == 0.0;
    finish("c05 escape-norm-exactness", t0, pass, 10.0, "all n <= 64, all intervals");
}

#[test]
fn c06_limsup_formula() {
    let t0 = Instant::now();
    let mut pass = true;
    let grid = 1e-3;
    // Real line, unit ball.
    let line = ModelGroup::Euclidean { dim: 1 };
    let ball = TargetSet::Ball { radius: 1.0, closed: false };
    let ms: Vec<u32> = (1..=1000).collect();
    for v in [0.4, 1.0, 2.3] {
        let rep = check_limsup_formula(&line, &ball, &[v], &ms, grid, 100.0, DEFAULT_M_CAP);
        pass &= rep.lower_chain_ok && rep.upper_chain_ok;
        for (i, &(_, ratio)) in rep.ratios.iter().enumerate() {
            let m = (i + 1) as f64;
            pass &= (ratio - rep.algebra_norm).abs() <= (1.0 / m).max(grid) + 1e-6;
        }
    }
    // Circle arc.
    let circle = ModelGroup::Torus { radii: vec![1.0] };
    let arc = TargetSet::Ball { radius: 0.7, closed: false };
    for v in [0.5, 1.0] {
        let rep = check_limsup_formula(&circle, &arc, &[v], &ms, grid, 100.0, DEFAULT_M_CAP);
        pass &= rep.lower_chain_ok && rep.upper_chain_ok;
        for (i, &(_, ratio)) in rep.ratios.iter().enumerate() {
            let m = (i + 1) as f64;
            pass &= (ratio - rep.algebra_norm).abs() <= (1.0 / m).max(grid) + 1e-6;
        }
    }
    finish("c06 limsup-formula", t0, pass, 10.0, "line and circle, m <= 1000");
}

#[test]
fn c07_convex_hull_sandwich() {
    let t0 = Instant::now();
    let mut pass = true;
    for (name, (model, set)) in
        [("r2", algebra_r2()), ("t2", algebra_t2()), ("so3", algebra_so3())]
    {
        let dim = model.dim();
        let hull_dirs = fixed_directions(dim, 60, 11);
        let ev = convex_hull_norm(&model, &set, &hull_dirs, 0.005, 1e4).unwrap();
        // Words of repeated ball elements give the subadditivity estimate.
        let words: Vec<Vec<MElem>> = fixed_directions(dim, 30, 13)
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let t = 0.05 + 0.03 * (i % 4) as f64;
                let v: Vec<f64> = d.iter().map(|x| x * t).collect();
                vec![model.exp(&v), model.exp(&v), model.exp(&v)]
            })
            .collect();
        let est = estimate_gleason_constant_model(&model, &set, &words, DEFAULT_M_CAP);
        pass &= est.violations.is_empty();
        let c0 = est.c0.max(1.0);
        let probes = fixed_directions(dim, 100, 17);
        for d in &probes {
            let v: Vec<f64> = d.iter().map(|x| x * 0.23).collect();
            let vnorm = tau_and_algebra_norm(&model, &set, &v, 0.002, 1e4).1;
            let Some(gauge) = ev.gauge(&v) else {
                pass = false;
                continue;
            };
            if !(vnorm <= gauge + 1e-6 && gauge <= 2.0 * c0 * vnorm + 1e-6) {
                pass = false;
                println!("  {name}: |v| {vnorm} gauge {gauge} c0 {c0}");
            }
        }
    }
    finish("c07 convex-hull-sandwich", t0, pass, 30.0, "100 directions per family");
}

#[test]
fn c08_near_zero_solver() {
    let t0 = Instant::now();
    let mut pass = true;
    // 100 random odd samples on the 2-sphere into the line.
    let t3 = SymmetricTriangulation::build(3, 3).unwrap();
    for seed in 0..100u64 {
        let sample = OddMapSample::random(&t3, 1, seed);
        let (eps, _) = continuity_modulus(&t3, &sample);
        match find_near_zero(&t3, &sample) {
            Ok(w) => {
                pass &= w.value_norm <= 1e-9;
                pass &= w.nearest_vertex_value_norm <= 2.0 * eps + 1e-12;
            }
            Err(_) => pass = false,
        }
    }
    // 100 random odd samples on the 3-sphere into the plane.
    let t4 = SymmetricTriangulation::build(4, 3).unwrap();
    for seed in 0..100u64 {
        let sample = OddMapSample::random(&t4, 2, seed);
        let (eps, _) = continuity_modulus(&t4, &sample);
        match find_near_zero(&t4, &sample) {
            Ok(w) => {
                pass &= w.value_norm <= 1e-9;
                pass &= w.nearest_vertex_value_norm <= 2.0 * eps + 1e-12;
            }
            Err(_) => pass = false,
        }
    }
    // The dimension gate rejects a circle mapping to the plane.
    let t2 = SymmetricTriangulation::build(2, 1).unwrap();
    let s = OddMapSample::random(&t2, 2, 0);
    pass &= find_near_zero(&t2, &s).is_err();
    finish("c08 near-zero-solver", t0, pass, 120.0, "200 samples + gate");
}

#[test]
fn c09_maximal_small_pipeline() {
    let t0 = Instant::now();
    let mut pass = true;

    // Limit circle: the surviving first factor with its rotations.
    let circle = collapsing_sphere(1, 1, 16);
    let rotations: Vec<Isometry> = circle
        .rotation_indices
        .iter()
        .map(|&i| circle.triple.group.elements[i].clone())
        .collect();
    let limit = Triple {
        space: circle.triple.space.clone(),
        group: closure(&circle.triple.space, &rotations).unwrap(),
    };

    let mut last = f64::INFINITY;
    for i in [2u32, 4, 8] {
        let s = torus_collapse(i, 16);
        let loc = localize(&s.map, &TargetSet::Ball { radius: 0.5, closed: false }, 3).unwrap();
        let ms = maximal_small(&[loc.map], core::f64::consts::PI / f64::from(i) + 1e-9).unwrap();
        pass &= ms[0].is_subgroup
            && ms[0].members == s.second_factor
            && ms[0].normal_in_full == Some(true)
            && ms[0].contains_all_small;

        let q = quotient_sequence(&[(s.triple.clone(), s.h_indices.clone())]).unwrap();
        pass &= q[0].space.len() == 16 && q[0].group.order() == 16;
        let r = equivariant_gh(&q[0], &limit);
        pass &= r.upper <= last + 1e-6;
        last = r.upper;
    }

    // Blow-up of the fine abstract maps at the shipped scale.
    let maps: Vec<_> = [2u32, 4, 8].into_iter().map(|i| torus_collapse(i, 48).map).collect();
    let blown = blowup(&maps, 1, &vec![TORUS_BLOWUP_SCALE; maps.len()]).unwrap();
    let reports = check_conditions(&blown, 0.1, 3, None).unwrap();
    pass &= reports.iter().all(|r| r.all_pass());
    let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7], vec![-0.3, 0.95]];
    let bounds = verify_blowup_bounds(&blown, 0.25, &dirs, 0.01).unwrap();
    pass &= bounds.iter().all(|b| b.pass);

    finish("c09 maximal-small-pipeline", t0, pass, 120.0, "torus collapse i in {2,4,8}");
}

#[test]
fn c10_cyclic_towers() {
    let t0 = Instant::now();
    let rep = tower_instability(2, 5);
    let mut pass = rep.unstable;
    let orders: Vec<usize> = rep.levels.iter().map(|l| l.members.len()).collect();
    pass &= orders == vec![2, 4, 8, 16];
    finish("c10 cyclic-towers", t0, pass, 10.0, &format!("orders {orders:?}"));
}

#[test]
fn c11_invariant_suites() {
    let t0 = Instant::now();
    let mut pass = true;

    // Left-invariance of the basepoint metric, exhaustive on groups of
    // order up to 24.
    let tri_space = FiniteMetricSpace::new(
        vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
        0,
    )
    .unwrap();
    let octagon = collapsing_sphere(1, 1, 8); // dihedral of order 16
    let hexagon = hexagon_graph(2);
    for (space, group) in [
        (&tri_space, full_isometry_group(&tri_space).unwrap()),
        (&octagon.triple.space, octagon.triple.group.clone()),
        (&hexagon.triple.space, hexagon.triple.group.clone()),
    ] {
        assert!(group.order() <= 24);
        for a in &group.elements {
            for b in &group.elements {
                let d = egh_core::iso::dp_distance(space, a, b);
                for k in &group.elements {
                    let dk = egh_core::iso::dp_distance(space, &k.compose(a), &k.compose(b));
                    pass &= (d - dk).abs() < 1e-12;
                }
            }
        }
    }

    // Hausdorff distance is a metric on non-empty subsets of 5-point
    // spaces, exhaustively.
    let line5 = FiniteMetricSpace::new(
        (0..5)
            .map(|i| (0..5).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect(),
        0,
    )
    .unwrap();
    let sphere5 = collapsing_sphere(1, 1, 5).triple.space;
    for m in [&line5, &sphere5] {
        let subsets: Vec<Vec<usize>> = (1u32..32)
            .map(|mask| (0..5).filter(|&i| mask & (1 << i) != 0).collect())
            .collect();
        for a in &subsets {
            for b in &subsets {
                let dab = hausdorff_distance(m, a, b).unwrap();
                let dba = hausdorff_distance(m, b, a).unwrap();
                pass &= (dab - dba).abs() < 1e-12;
                pass &= (dab == 0.0) == (a == b);
                for c in &subsets {
                    let dac = hausdorff_distance(m, a, c).unwrap();
                    let dcb = hausdorff_distance(m, c, b).unwrap();
                    pass &= dab <= dac + dcb + 1e-12;
                }
            }
        }
    }

    // Escape-norm symmetry and power-closure of the zero set.
    let zn = FinGroup::Cyclic { n: 24, step: 2.0 * core::f64::consts::PI / 24.0 };
    for k in [1i64, 3, 6, 12] {
        let a = SymSet::from_iter((-k..=k).map(|v| zn.canon([v, 0, 0])));
        for e in zn.elements().unwrap() {
            pass &= escape_norm(&zn, &a, e) == escape_norm(&zn, &a, zn.inv(e));
            if escape_norm(&zn, &a, e) == 0.0 {
                for p in 0..24 {
                    pass &= escape_norm(&zn, &a, zn.pow(e, p)) == 0.0;
                }
            }
        }
        let z = zero_set(&zn, &a).unwrap();
        pass &= z.is_subgroup;
    }

    // Preimage smallness under quotients: on the collapsed torus, pulling
    // back any downstairs subgroup adds at most twice the collapsed
    // factor's displacement.
    let s = torus_collapse(4, 16);
    let qa = quotient_group(&s.triple.space, &s.triple.group, &s.h_indices).unwrap();
    let down_group = qa.faithful();
    let fin_down = FinGroup::Table(TableGroup::from_isometries(&qa.space, &down_group));
    let r_probe = 10.0;
    let h_disp = {
        let v = detect_small(&[(s.triple.clone(), s.h_indices.clone())], f64::INFINITY, r_probe);
        *v[0].curve.last().unwrap()
    };
    for sub in enumerate_small_subgroups(&fin_down).unwrap() {
        let downstairs: Vec<Isometry> =
            sub.iter().map(|e| down_group.elements[e[0] as usize].clone()).collect();
        let down_disp = {
            let t = Triple { space: qa.space.clone(), group: down_group.clone() };
            let idx: Vec<usize> = sub.iter().map(|e| e[0] as usize).collect();
            let v = detect_small(&[(t, idx)], f64::INFINITY, r_probe);
            *v[0].curve.last().unwrap()
        };
        let pre = qa.preimage(&s.triple.group, &s.h_indices, &downstairs);
        let up_disp = {
            let v = detect_small(&[(s.triple.clone(), pre)], f64::INFINITY, r_probe);
            *v[0].curve.last().unwrap()
        };
        pass &= up_disp <= down_disp + 2.0 * h_disp + 1e-9;
    }

    // Almost-morphism slack is non-negative on every produced witness.
    let mut witnesses: Vec<(Triple, Triple, EpsApproximation)> = Vec::new();
    let tri_group = full_isometry_group(&tri_space).unwrap();
    let tri_triple = Triple::new(tri_space.clone(), tri_group).unwrap();
    if let Some((_, a)) = equivariant_gh(&tri_triple, &tri_triple).witness {
        witnesses.push((tri_triple.clone(), tri_triple.clone(), a));
    }
    let sph = collapsing_sphere(4, 1, 12);
    if let Some((_, a)) = equivariant_gh(&sph.triple, &point_triple()).witness {
        witnesses.push((sph.triple.clone(), point_triple(), a));
    }
    pass &= !witnesses.is_empty();
    for (tx, ty, a) in &witnesses {
        pass &= a.validate(tx, ty).is_empty();
        let p = tx.space.basepoint();
        let q = ty.space.basepoint();
        for g1 in 0..tx.group.order() {
            for g2 in 0..tx.group.order() {
                let small = |gi: usize| {
                    tx.space.d(tx.group.elements[gi].apply(p), p) < 1.0 / (6.0 * a.eps)
                };
                if !(small(g1) && small(g2)) {
                    continue;
                }
                for y in 0..ty.space.len() {
                    if ty.space.d(q, y) < 1.0 / (12.0 * a.eps) {
                        let slack = check_almost_morphism(tx, ty, a, g1, g2, y).unwrap();
                        pass &= slack >= 0.0;
                    }
                }
            }
        }
    }

    // Spaces stay valid metrics across the scenario corpus.
    pass &= validate_metric(&torus_collapse(2, 8).triple.space).is_empty();
    pass &= validate_metric(&collapsing_sphere(2, 2, 1).triple.space).is_empty();

    finish("c11 invariant-suites", t0, pass, 300.0, "metrics, norms, quotients, witnesses");
}
