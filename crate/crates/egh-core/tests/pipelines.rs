//! End-to-end pipelines over the shipped scenarios: the tripod's maximal
//! small subgroup with its failed normality, and the torus collapse with
//! its normal one, quotients, and blow-up.

use egh_core::approx::{
    blowup, check_conditions, detect_small, localize, maximal_small, quotient_sequence,
    verify_blowup_bounds,
};
use egh_core::gh::{equivariant_gh, GhMode};
use egh_core::group::TargetSet;
use egh_core::scenarios::{
    hexagon_approximation, hexagon_graph, point_triple, torus_collapse, truncated_ray,
    TORUS_BLOWUP_SCALE,
};

#[test]
fn hexagon_small_subgroup_pipeline() {
    for i in [1u32, 2, 4, 8] {
        let s = hexagon_graph(i);
        assert_eq!(s.triple.group.order(), 6);

        // Displacement verdicts: the leaf swap fixes the whole ball of
        // radius i around the basepoint; every other nontrivial subgroup
        // moves the basepoint itself by 3i.
        let verdicts = detect_small(
            &[(s.triple.clone(), s.h_indices.clone())],
            0.0,
            f64::from(i),
        );
        assert!(verdicts[0].subgroup_ok);
        assert!(verdicts[0].small_at, "curve must vanish up to radius i");

        // Escape-norm extraction on the directly-built approximation.
        let map = hexagon_approximation(i);
        let loc = localize(&map, &map.a_tgt.clone(), 3).unwrap();
        let ms = maximal_small(&[loc.map], 0.05).unwrap();
        let out = &ms[0];
        assert!(out.is_subgroup);
        assert_eq!(out.members.len(), 2, "identity plus the leaf swap");
        assert!(out.inside_neighborhood);
        assert_eq!(out.image_diameter, 0.0);
        assert!(out.contains_all_small);
        assert!(out.normal_in_span);
        assert_eq!(out.normal_in_full, Some(false), "not normal in the full group");
    }
}

#[test]
fn hexagon_conditions_pass_on_the_shipped_sequence() {
    let maps: Vec<_> = [1u32, 2, 4, 8].map(hexagon_approximation).into_iter().collect();
    let reports = check_conditions(&maps, 0.05, 3, None).unwrap();
    for r in &reports {
        assert!(r.all_pass(), "{:?}", r.failing());
    }
}

#[test]
fn hexagon_vs_ray_sits_at_the_cap() {
    let s = hexagon_graph(1);
    let ray = truncated_ray(3);
    let r = equivariant_gh(&s.triple, &ray);
    assert_eq!(r.mode, GhMode::Exact);
    assert_eq!(r.upper, 0.2);
}

#[test]
fn collapsing_circle_distance_to_point() {
    use egh_core::scenarios::collapsing_sphere;
    let point = point_triple();
    let mut last = f64::INFINITY;
    for i in [1u32, 2, 4, 8] {
        let s = collapsing_sphere(i, 1, 16);
        let r = equivariant_gh(&s.triple, &point);
        assert_eq!(r.mode, GhMode::Exact);
        let mesh = s.triple.space.d(0, 1);
        assert!(
            r.upper <= core::f64::consts::PI / f64::from(i) + mesh + 1e-6,
            "i = {i}: {} vs bound",
            r.upper
        );
        assert!(r.upper <= last + 1e-6, "nonincreasing in i");
        last = r.upper;
    }
}

#[test]
fn torus_collapse_pipeline() {
    // Space-backed half at a coarse grid (displacements and quotients)...
    for i in [2u32, 4, 8] {
        let s = torus_collapse(i, 16);
        let verdicts = detect_small(
            &[(s.triple.clone(), s.h_indices.clone())],
            core::f64::consts::PI / f64::from(i) + 1e-9,
            10.0,
        );
        assert!(verdicts[0].subgroup_ok);
        assert!(verdicts[0].small_at);

        let quotients = quotient_sequence(&[(s.triple.clone(), s.h_indices.clone())]).unwrap();
        let q = &quotients[0];
        assert_eq!(q.space.len(), 16, "first-factor circle survives");
        assert_eq!(q.group.order(), 16);
    }

    // ... and the abstract half at a fine grid: blow-up with unit-ball
    // target passes the checker and the two-sided bounds.
    let maps: Vec<_> = [2u32, 4, 8]
        .into_iter()
        .map(|i| torus_collapse(i, 48).map)
        .collect();
    let schedule = vec![TORUS_BLOWUP_SCALE; maps.len()];
    let blown = blowup(&maps, 1, &schedule).unwrap();
    let reports = check_conditions(&blown, 0.1, 3, None).unwrap();
    for r in &reports {
        assert!(r.all_pass(), "{:?}", r);
    }
    let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7], vec![-0.3, 0.95]];
    let bounds = verify_blowup_bounds(&blown, 0.25, &dirs, 0.01).unwrap();
    for b in &bounds {
        assert!(b.pass, "{b:?}");
    }
}

#[test]
fn torus_zero_set_is_second_factor() {
    let s = torus_collapse(4, 48);
    let loc = localize(&s.map, &TargetSet::Ball { radius: 0.5, closed: false }, 3).unwrap();
    let ms = maximal_small(&[loc.map], core::f64::consts::PI / 4.0 + 1e-9).unwrap();
    let out = &ms[0];
    assert!(out.is_subgroup);
    assert_eq!(out.members, s.second_factor);
    assert!(out.contains_all_small, "missed {:?}", out.missed_small_subgroup);
    assert_eq!(out.normal_in_full, Some(true));
}

#[test]
fn quotient_circles_agree_across_indices() {
    let q2 = quotient_sequence(&[(torus_collapse(2, 16).triple, torus_collapse(2, 16).h_indices)])
        .unwrap();
    let q4 = quotient_sequence(&[(torus_collapse(4, 16).triple, torus_collapse(4, 16).h_indices)])
        .unwrap();
    let r = equivariant_gh(&q2[0], &q4[0]);
    // identical circles: the annealer certifies a near-zero upper bound
    assert!(r.upper <= 1e-5, "upper {}", r.upper);
}
