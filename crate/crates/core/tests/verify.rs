use minsurf::verify::{run, run_check, GridSize, VerificationReport, VerifyConfig, CHECK_IDS};

#[test]
fn default_suite_passes_with_every_check_once() {
    let report = run(&VerifyConfig::default()).unwrap();
    for id in CHECK_IDS {
        assert_eq!(report.checks.iter().filter(|c| c.check_id == id).count(), 1, "{id}");
    }
    assert_eq!(report.checks.len(), CHECK_IDS.len());
    for c in &report.checks {
        assert!(c.pass, "{}: {:#?}", c.check_id, c.details.iter().filter(|d| !d.pass).collect::<Vec<_>>());
        assert!(!c.details.is_empty());
    }
    assert!(report.summary.all_passed);

    let json = serde_json::to_string(&report).unwrap();
    let back: VerificationReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}

#[test]
fn single_check_selection() {
    let config = VerifyConfig { checks: Some(vec!["universality".into()]), ..VerifyConfig::default() };
    let report = run(&config).unwrap();
    assert_eq!(report.checks.len(), 1);
    let c = report.check("universality").unwrap();
    assert!(c.pass);
    assert!(c.surfaces.len() >= 3);
}

#[test]
fn coarse_grids_pass() {
    let config = VerifyConfig { grids: vec![GridSize::square(64), GridSize::square(128)], ..VerifyConfig::default() };
    let report = run(&config).unwrap();
    assert!(report.summary.all_passed, "{:?}", report.checks.iter().filter(|c| !c.pass).map(|c| &c.check_id).collect::<Vec<_>>());
}

#[test]
fn invalid_configs_are_rejected() {
    let unknown = VerifyConfig { checks: Some(vec!["nope".into()]), ..VerifyConfig::default() };
    assert!(run(&unknown).is_err());
    let empty = VerifyConfig { grids: vec![], ..VerifyConfig::default() };
    assert!(run(&empty).is_err());
    assert!(run_check("nope", &VerifyConfig::default()).is_err());
    assert!(GridSize::parse("4x4").is_err());
    assert_eq!(GridSize::parse("64x65").unwrap(), GridSize { ns: 64, nt: 65 });
}
