use mlsq_core::harness::{self, ExperimentConfig};

const CONFIG: &str = include_str!("data/reference.cfg");
const GOLDEN: &str = include_str!("data/reference_report.json");

#[test]
fn reference_suite_matches_golden_report() {
    let config = ExperimentConfig::parse(CONFIG).unwrap();
    let report = harness::run_suite(&config, &config.checks).unwrap();
    assert!(!report.failed());
    assert_eq!(report.to_json(), GOLDEN);
}

#[test]
fn instance_data_does_not_depend_on_instance_count() {
    let few = ExperimentConfig::parse(CONFIG).unwrap();
    let many = ExperimentConfig::parse(&CONFIG.replace("instances = 8", "instances = 20")).unwrap();
    for k in 0..few.instances {
        assert_eq!(
            harness::generate_instance(&few, k).unwrap(),
            harness::generate_instance(&many, k).unwrap()
        );
    }
}

#[test]
fn digest_tracks_content_not_layout() {
    let a = ExperimentConfig::parse(CONFIG).unwrap();
    let reordered: String = {
        let (head, run) = CONFIG.split_at(CONFIG.find("[run]").unwrap());
        format!("{run}\n{head}")
    };
    let b = ExperimentConfig::parse(&reordered).unwrap();
    assert_eq!(a.digest(), b.digest());
    assert_ne!(a.digest(), a.clone().with_seed(1).digest());
}
