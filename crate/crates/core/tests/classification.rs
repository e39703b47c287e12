use levymap::classify::{
    check_iii, check_iv, compose_from_witness, construct_witness, corollary2_check, factorization_check,
    ClassifyOptions, Decision, RadiiGrid,
};
use levymap::{exponent_of, Family, LevyTriple};

fn selfdecomposable_fixtures() -> Vec<(&'static str, LevyTriple)> {
    vec![
        ("gamma(1,1)", Family::gamma(1.0, 1.0).triple().unwrap()),
        ("gaussian(0,1)", Family::gaussian(0.0, 1.0).triple().unwrap()),
        ("stable(0.7) cut at 10", Family::stable(0.7, 1.0, Some(10.0)).triple().unwrap()),
    ]
}

#[test]
fn roundtrip_through_witness() {
    for (name, rho0) in selfdecomposable_fixtures() {
        for beta in [1.0, 3.0] {
            let start = std::time::Instant::now();
            let nu = compose_from_witness(&rho0, beta).unwrap();
            let report = check_iv(&nu, beta, &ClassifyOptions::default()).unwrap();
            assert_eq!(report.decision, Decision::Yes, "{name} β={beta}: {:?}", report.refinement_hint);
            let rho = report.witness.unwrap();
            let gap = exponent_of(&rho).unwrap().sup_gap(&exponent_of(&rho0).unwrap()).unwrap();
            assert!(gap < 1e-5, "{name} β={beta}: witness gap {gap:.3e}");
            assert!(factorization_check(&nu, &rho, beta).unwrap().pass);
            let c2 = corollary2_check(&nu, &rho0, beta).unwrap();
            assert!(c2.pass, "{name} β={beta}: {c2:?}");
            println!("{name} β={beta}: witness gap {gap:.2e}, {:?}", start.elapsed());
        }
    }
}

#[test]
fn check_iii_candidate_matches_witness_exponent() {
    let nu = Family::gamma(1.0, 1.0).triple().unwrap();
    let (candidate, valid) = check_iii(&nu, 1.0, &ClassifyOptions::default()).unwrap();
    assert!(valid);
    let witness = exponent_of(&construct_witness(&nu, 1.0).unwrap()).unwrap();
    assert!(candidate.sup_gap(&witness).unwrap() < 1e-5);
}

#[test]
fn refinement_never_turns_yes_into_no() {
    let nu = Family::gamma(1.0, 1.0).triple().unwrap();
    for levels in 0..4 {
        let opts = ClassifyOptions { grid: RadiiGrid { refinement_levels: levels, ..RadiiGrid::default() }, tol: 1e-9 };
        assert_eq!(check_iv(&nu, 1.0, &opts).unwrap().decision, Decision::Yes);
    }
}

#[test]
fn single_atom_fails_even_on_coarse_grid() {
    let nu = Family::compound_poisson(1.0, &[(1.0, 1.0)]).triple().unwrap();
    let opts = ClassifyOptions { grid: RadiiGrid { points: 16, ..RadiiGrid::default() }, tol: 1e-9 };
    let r = check_iv(&nu, 1.0, &opts).unwrap();
    assert_eq!(r.decision, Decision::No);
    assert!(r.failure_evidence.unwrap().mass < -1e-8);
}
