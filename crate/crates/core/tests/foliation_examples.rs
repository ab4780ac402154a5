use alphabeta::fields::{DistanceOptions, MetricField};
use alphabeta::foliation::{
    endpoint_rank, equidistance_check, homothety_check, srf_cross_check, CrossCheckMode,
    FoliationDescriptor, Transversal, DEFAULT_SVD_TOL,
};
use alphabeta::linalg::{vector, Matrix, Vector};
use alphabeta::{AlphaBetaNorm, Error, PhiSpec};

fn randers_field(b: f64) -> MetricField {
    let n = AlphaBetaNorm::new(Matrix::identity(2, 2), vector(&[b, 0.0]), PhiSpec::randers()).unwrap();
    MetricField::constant(&n, 10.0).unwrap()
}

fn euclid() -> MetricField {
    MetricField::constant(&AlphaBetaNorm::euclidean(2).unwrap(), 10.0).unwrap()
}

#[test]
fn randers_hyperplanes_have_distinct_future_and_past_distances() {
    // crossing unit slab along B costs 1 + b one way and 1 - b the other
    let fol = FoliationDescriptor::parallel_affine(vector(&[1.0, 0.0]));
    let rep = equidistance_check(&randers_field(0.35), &fol, 0.0, &[1.0, 2.0], 16, 1e-6, &DistanceOptions::default())
        .unwrap();
    assert!(rep.pass && rep.sff && rep.reversible.is_none());
    let t = &rep.targets[0];
    let mut pair = [t.future_min, t.past_min];
    pair.sort_by(f64::total_cmp);
    assert!((pair[0] - 0.65).abs() < 1e-8 && (pair[1] - 1.35).abs() < 1e-8, "{pair:?}");
    assert!((rep.targets[1].future_min - 2.0 * t.future_min).abs() < 1e-8);
}

#[test]
fn cross_check_cases() {
    let fol = FoliationDescriptor::parallel_affine(vector(&[1.0, 0.0]));
    let opts = DistanceOptions::default();
    let r = srf_cross_check(&randers_field(0.35), &fol, 0.0, &[1.0], 16, 1e-6, CrossCheckMode::Horizontal, &opts)
        .unwrap();
    assert!(r.finsler_pass && r.alpha_pass);

    let circles = FoliationDescriptor::concentric_alpha(Vector::zeros(2));
    let e = srf_cross_check(&euclid(), &circles, 1.0, &[2.0], 16, 1e-6, CrossCheckMode::Horizontal, &opts)
        .unwrap();
    assert!(e.finsler_pass && e.alpha_pass);

    // B along the leaves violates the horizontal hypothesis
    let tangent = FoliationDescriptor::parallel_affine(vector(&[0.0, 1.0]));
    assert!(matches!(
        srf_cross_check(&randers_field(0.35), &tangent, 0.0, &[1.0], 8, 1e-6, CrossCheckMode::Horizontal, &opts),
        Err(Error::HypothesisViolated(_))
    ));
}

#[test]
fn homothety_examples() {
    let circles = FoliationDescriptor::concentric_alpha(Vector::zeros(2));
    let r = homothety_check(&euclid(), &circles, 2.0, 0.5, 1.0, 16, 1e-9, &Transversal::Outward).unwrap();
    assert!(r.pass);
    assert!((r.levels[0] - 2.5).abs() < 1e-12);

    let planes = FoliationDescriptor::parallel_affine(vector(&[1.0, 1.0]));
    let r = homothety_check(&randers_field(0.3), &planes, 0.0, 0.5, 1.0, 16, 1e-9, &Transversal::Outward).unwrap();
    assert!(r.pass && r.levels[0] > 0.0);
}

#[test]
fn euclidean_circle_ranks() {
    let circles = FoliationDescriptor::concentric_alpha(Vector::zeros(2));
    let r = endpoint_rank(&euclid(), &circles, 1.0, 0.5, 16, DEFAULT_SVD_TOL, &Transversal::Outward).unwrap();
    assert!(r.constant && r.ranks.iter().all(|&k| k == 1) && r.same_leaf);
    let seed = Transversal::Seed { direction: vector(&[0.0, 0.0]) };
    // a zero seed ties everywhere; lexicographic order still gives a consistent answer
    assert!(endpoint_rank(&euclid(), &circles, 1.0, 0.5, 8, DEFAULT_SVD_TOL, &seed).is_ok());
}

#[test]
fn descriptor_json() {
    let text = r#"{"kind": "indicatrix", "center": [0.0, 0.0]}"#;
    let fol: FoliationDescriptor = serde_json::from_str(text).unwrap();
    assert_eq!(fol.singular_set, vec![Vector::zeros(2)]);
    assert!(serde_json::from_str::<FoliationDescriptor>(r#"{"kind": "indicatrix", "center": [0.0], "bogus": 1}"#).is_err());
}
