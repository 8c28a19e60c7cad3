use std::fs;

use num_bigint::BigInt;
use shimura_core::brandt::EigenformData;
use shimura_core::pipeline::{self, finish_basis, odd_subsets};
use shimura_core::theta::QExpansion;
use shimura_core::{
    cmd_basis, cmd_brandt, cmd_theta, compute_basis, Error, JobConfig, OutputFormat, Selector, EXIT_COMPUTATION,
    EXIT_CONFIG, EXIT_ZERO_FORM,
};

fn cfg(level: u64, prec: u64, selector: &str) -> JobConfig {
    let mut c = JobConfig::new(level, prec);
    c.selector = Some(selector.parse::<Selector>().unwrap());
    c
}

#[test]
fn subsets_are_ordered_by_size_then_lexicographically() {
    assert_eq!(odd_subsets(&[3, 5, 7]), vec![vec![3], vec![5], vec![7], vec![3, 5, 7]]);
    assert_eq!(odd_subsets(&[11]), vec![vec![11]]);
}

#[test]
fn even_root_number_is_rejected() {
    let err = compute_basis(&cfg(15, 20, "3=1,5=1")).unwrap_err();
    assert!(matches!(err, Error::EvenRootNumber));
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    let err = compute_basis(&cfg(15, 20, "3=-1,5=-1")).unwrap_err();
    assert!(matches!(err, Error::EvenRootNumber));
}

#[test]
fn selector_failures() {
    let err = compute_basis(&cfg(15, 20, "2=1,3=-1,5=1")).unwrap_err();
    assert!(matches!(err, Error::NotFound), "{err}");
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert!(matches!(compute_basis(&cfg(15, 20, "1")), Err(Error::NotFound)));
    let err = compute_basis(&cfg(57, 20, "3=1")).unwrap_err();
    assert!(matches!(err, Error::AmbiguousSelector(2)), "{err}");
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    let b = compute_basis(&cfg(57, 20, "2=-2,3=1")).unwrap();
    assert_eq!(b.eigenform.eigenvalues[&2], -2);
}

#[test]
fn irrational_eigenspace_is_reported() {
    let err = compute_basis(&cfg(35, 20, "5=1,7=-1")).unwrap_err();
    assert!(matches!(err, Error::IrrationalEigenspace), "{err}");
    assert_eq!(err.exit_code(), EXIT_COMPUTATION);
}

#[test]
fn index_selection_walks_algebras_in_order() {
    let first = compute_basis(&cfg(77, 20, "0")).unwrap();
    let second = compute_basis(&cfg(77, 20, "1")).unwrap();
    assert_eq!(first.algebra.ramified, vec![7]);
    assert_eq!(second.algebra.ramified, vec![11]);
}

#[test]
fn invalid_configurations() {
    for level in [1, 9, 30] {
        let err = compute_basis(&JobConfig::new(level, 10)).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
    }
}

#[test]
fn zero_form_has_its_own_status() {
    let t = QExpansion::from_ints(40, &[(3, 1), (8, 2), (12, 1)]);
    let e = EigenformData {
        vector: vec![BigInt::from(1), BigInt::from(-1)],
        eigenvalues: [(2, -1), (3, -1), (5, 1)].into_iter().collect(),
        al_signs: [(3, 1), (5, -1)].into_iter().collect(),
    };
    let err = finish_basis(15, &e, &[t.clone(), t], 10).unwrap_err();
    assert!(matches!(err, Error::ZeroForm));
    assert_eq!(err.exit_code(), EXIT_ZERO_FORM);
}

#[test]
fn warm_cache_matches_cold_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = JobConfig::new(33, 40);
    c.cache_dir = Some(dir.path().to_path_buf());
    let cold = cmd_basis(&c).unwrap();
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 2, "one file per scanned algebra");
    let warm = cmd_basis(&c).unwrap();
    assert_eq!(cold, warm);
    c.cache_dir = None;
    assert_eq!(cold, cmd_basis(&c).unwrap());

    // A cache written for a larger bound serves smaller requests identically.
    c.cache_dir = Some(dir.path().to_path_buf());
    c.precision = 5000;
    cmd_brandt(&c).unwrap();
    c.precision = 40;
    assert_eq!(cold, cmd_basis(&c).unwrap());
}

#[test]
fn corrupt_cache_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = JobConfig::new(15, 20);
    c.cache_dir = Some(dir.path().to_path_buf());
    cmd_basis(&c).unwrap();
    let path = fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    fs::write(&path, "{").unwrap();
    let err = cmd_basis(&c).unwrap_err();
    assert!(matches!(err, Error::Cache(_)));
}

#[test]
fn json_output_reparses_exactly() {
    let b = compute_basis(&JobConfig::new(15, 100)).unwrap();
    let text = pipeline::render_basis(&b, OutputFormat::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let g: QExpansion = serde_json::from_value(v["g"].clone()).unwrap();
    let h: QExpansion = serde_json::from_value(v["h"].clone()).unwrap();
    assert_eq!((g, h), (b.g, b.h));
    assert_eq!(v["class_number"], 2);
    assert_eq!(v["atkin_lehner"]["5"], -1);
    assert_eq!(v["algebra"]["ramified"][0], 5);
}

#[test]
fn text_outputs() {
    let mut c = JobConfig::new(15, 24);
    c.format = OutputFormat::Text;
    let basis = cmd_basis(&c).unwrap();
    assert!(basis.contains("[g]\n1 0\n2 0\n3 1\n"));
    assert!(basis.contains("[h]\n1 0\n2 -4\n3 1\n"));
    let brandt = cmd_brandt(&c).unwrap();
    assert!(brandt.contains("[B(1)]\n1 0\n0 1\n"));
    let theta = cmd_theta(&c).unwrap();
    assert!(theta.contains("[theta 1]") && theta.contains("[theta 2]"));
}
