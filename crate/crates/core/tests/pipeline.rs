use reeb_spectra::body::ConvexBody;
use reeb_spectra::certify::{self, Discreteness, SufficientOutcome};
use reeb_spectra::clarke::{self, ClarkeConfig};
use reeb_spectra::ellipsoid::{Ellipsoid, Verdict};
use reeb_spectra::rational::{parse_value, Value};
use reeb_spectra::reeb::{self, OrbitSearchConfig};

fn exact_ellipsoid(a: &[&str]) -> Ellipsoid {
    let v: Vec<Value> = a.iter().map(|s| parse_value(s).unwrap()).collect();
    Ellipsoid::from_values(&v).unwrap()
}

#[test]
fn scan_hits_match_prediction() {
    let e = exact_ellipsoid(&["2/3", "1", "3/2"]);
    assert_eq!(e.classify().verdict, Verdict::Besse);
    let c = e.spectral_invariants(60).unwrap();
    let scan = certify::besse_by_invariants(&c, 3).unwrap();
    let predicted = certify::predicted_hits(&e, 10).unwrap();
    let got: Vec<(usize, Value)> = scan.hits.iter().map(|h| (h.i, h.tau.clone())).collect();
    let want: Vec<(usize, Value)> = predicted.into_iter().filter(|(i, _)| i + 3 <= c.len()).collect();
    assert_eq!(got, want);
    assert!(!scan.zoll);
}

#[test]
fn sufficient_condition_needs_discreteness() {
    let e = exact_ellipsoid(&["1", "2"]);
    let c = e.spectral_invariants(12).unwrap();
    assert!(matches!(certify::besse_sufficient_eh(&c, 2, None).unwrap(), SufficientOutcome::Refused { .. }));
    let att = Discreteness {
        source: "exact ellipsoid spectrum".into(),
    };
    assert!(matches!(certify::besse_sufficient_eh(&c, 2, Some(&att)).unwrap(), SufficientOutcome::Besse { .. }));
}

#[test]
fn systole_orbit_agrees_with_shooting() {
    let body = ConvexBody::from_json(r#"{"type":"ellipsoid","a":[1,2]}"#).unwrap();
    let cfg = ClarkeConfig {
        modes: 16,
        random_starts: 2,
        doubling_check: false,
        ..Default::default()
    };
    let sys = clarke::minimize(&body, &cfg).unwrap();
    let search = reeb::find_closed_orbits(
        &body,
        &OrbitSearchConfig {
            t_max: 1.5,
            seeds: 2,
            ..Default::default()
        },
    )
    .unwrap();
    let shortest = search.orbits.iter().map(|o| o.period).fold(f64::INFINITY, f64::min);
    assert!((sys.systole - shortest).abs() < 1e-6, "{} vs {shortest}", sys.systole);
    let orbit = &sys.orbit;
    assert!(orbit.surface_defect < 1e-6);
}

#[test]
fn json_body_round_trip() {
    let body = ConvexBody::from_json(r#"{"type":"perturbed","a":[1,2],"epsilon":0.001,"quartic":[1,1]}"#).unwrap();
    assert!(!body.is_ellipsoid());
    assert!(body.convexity(200, 1).ok);
}
