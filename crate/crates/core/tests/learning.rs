mod common;

use common::three_sigma;
use feo_core::fixtures;
use feo_core::learning::*;
use feo_core::sampler::{sample, SampleRequest};

#[test]
fn mle_recovers_generating_parameters() {
    let truth = fixtures::get("college").unwrap().network().unwrap();
    let n = 100_000;
    let data = sample(&truth, &SampleRequest::new(n, 5)).unwrap();
    let (fit, report) = fit_parameters(&StructureDoc::of(&truth), &data, 0.0).unwrap();
    assert_eq!(report.rows_used, n);
    assert!(report.unseen.is_empty());
    for (v, (est, cpt)) in fit.cpts().iter().zip(truth.cpts()).enumerate() {
        for row in 0..cpt.num_rows() {
            let given: Vec<(String, String)> = truth.row_given(cpt, row).into_iter().collect();
            let given_ref: Vec<(&str, &str)> = given.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            let name = &truth.variable(v).name;
            let (rows, _) = common::frequency(&data, &given_ref, (name, &truth.variable(v).states[0]));
            for s in 0..cpt.cardinality() {
                let p = cpt.prob(row, s);
                let tol = three_sigma(p, rows).max(1e-12);
                assert!((est.prob(row, s) - p).abs() <= tol, "{name} row {row} state {s}");
            }
        }
    }
}

#[test]
fn smoothing_fills_unseen_rows() {
    let data = Dataset::new(
        vec![
            Column { name: "A".into(), kind: ColumnKind::Categorical },
            Column { name: "B".into(), kind: ColumnKind::Categorical },
        ],
        vec![vec!["x".into(), "u".into()], vec!["x".into(), "v".into()], vec!["x".into(), "v".into()]],
    );
    let structure = StructureDoc::from_json(
        r#"{"format_version": 1,
            "variables": [{"name": "A", "states": ["x", "y"]}, {"name": "B", "states": ["u", "v"]}],
            "edges": [["A", "B"]]}"#,
    )
    .unwrap();
    let (net, report) = fit_parameters(&structure, &data, 0.0).unwrap();
    assert_eq!(report.unseen.len(), 1);
    assert_eq!(net.cpt(1).row(1), &[0.5, 0.5]);
    assert!((net.cpt(1).prob(0, 1) - 2.0 / 3.0).abs() < 1e-15);
    let (net, report) = fit_parameters(&structure, &data, 1.0).unwrap();
    assert!(report.unseen.is_empty());
    assert!((net.cpt(1).prob(0, 1) - 3.0 / 5.0).abs() < 1e-15);
    assert!((net.cpt(0).prob(0, 0) - 4.0 / 5.0).abs() < 1e-15);

    assert!(matches!(fit_parameters(&structure, &data, -1.0), Err(LearningError::InvalidSmoothing(_))));
    let bad = Dataset::new(data.columns().to_vec(), vec![vec!["z".into(), "u".into()]]);
    assert!(matches!(fit_parameters(&structure, &bad, 0.0), Err(LearningError::StateMismatch { .. })));
    let empty = Dataset::new(data.columns().to_vec(), vec![]);
    assert!(matches!(fit_parameters(&structure, &empty, 0.0), Err(LearningError::EmptyDataset)));
}

const SCHEMA: &str = r#"{
  "format_version": 1,
  "columns": [
    {"name": "score", "kind": "numeric", "rule": {"type": "median_threshold"}},
    {"name": "grade", "kind": "numeric", "rename": "Grade",
     "rule": {"type": "thresholds", "cuts": [1.5, 3], "labels": ["low", "mid", "top"]}},
    {"name": "sex", "kind": "categorical", "rule": {"type": "label_map", "map": {"M": "male", "F": "female"}}}
  ]
}"#;

#[test]
fn ingest_and_discretize() {
    let csv = "id,score,grade,sex\n1,10,1,M\n2,20,2,F\n3,20,3,F\n4,40,4,M\n5,,1,M\n";
    let schema = Schema::from_json(SCHEMA).unwrap();
    let raw = ingest_reader(csv.as_bytes(), &schema).unwrap();
    assert_eq!(raw.len(), 4);
    assert_eq!(raw.provenance().rows_read, 5);
    assert_eq!(raw.provenance().rows_dropped, 1);
    let names: Vec<&str> = raw.columns().iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["score", "Grade", "sex"]);

    let data = discretize(&raw, &schema.policy()).unwrap();
    let score: Vec<&str> = data.column_values("score").unwrap().collect();
    // median of 10, 20, 20, 40 is 20; ties go low
    assert_eq!(score, ["low", "low", "low", "high"]);
    let grade: Vec<&str> = data.column_values("Grade").unwrap().collect();
    assert_eq!(grade, ["low", "mid", "mid", "top"]);
    let sex: Vec<&str> = data.column_values("sex").unwrap().collect();
    assert_eq!(sex, ["male", "female", "female", "male"]);
    assert!(data
        .provenance()
        .transforms
        .iter()
        .any(|t| matches!(t, Transform::Median { median, low: 3, high: 1, .. } if *median == 20.0)));
}

#[test]
fn ingest_errors() {
    let schema = Schema::from_json(SCHEMA).unwrap();
    let missing = "id,score,sex\n1,2,M\n";
    assert!(matches!(ingest_reader(missing.as_bytes(), &schema), Err(LearningError::MissingColumn(_))));
    let text = "score,grade,sex\nten,1,M\n";
    match ingest_reader(text.as_bytes(), &schema) {
        Err(LearningError::UnparseableValue { row, column, value }) => {
            assert_eq!((row, column.as_str(), value.as_str()), (1, "score", "ten"));
        }
        other => panic!("{other:?}"),
    }
    let unmapped = "score,grade,sex\n1,1,X\n";
    let raw = ingest_reader(unmapped.as_bytes(), &schema).unwrap();
    assert!(matches!(discretize(&raw, &schema.policy()), Err(LearningError::UnmappedLabel { .. })));
}

#[test]
fn export_round_trip() {
    let truth = fixtures::get("campaign").unwrap().network().unwrap();
    let data = sample(&truth, &SampleRequest::new(200, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    export_csv(&data, &path).unwrap();
    let names: Vec<&str> = data.columns().iter().map(|c| c.name.as_str()).collect();
    let back = ingest_csv(&path, &Schema::categorical(&names)).unwrap();
    assert_eq!(back.records(), data.records());
}

#[test]
fn ibm_pipeline_learns_declared_structure() {
    let fx = fixtures::get("ibm-hr").unwrap();
    let raw = fx.raw_data().unwrap().unwrap();
    assert_eq!(raw.len(), 1470);
    let (net, data, report) = fixtures::learn(&fx.schema().unwrap(), &fx.structure().unwrap(), raw).unwrap();
    assert_eq!(report.rows_used, 1470);
    assert_eq!(data.len(), 1470);
    let promo = net.index_of("RecentPromotion").unwrap();
    assert_eq!(net.parents(promo).len(), 3);
    assert_eq!(net.cpt(promo).num_rows(), 5 * 2 * 2);
    for cpt in net.cpts() {
        for row in 0..cpt.num_rows() {
            assert!((cpt.row(row).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
    let promo_median = data.provenance().transforms.iter().find_map(|t| match t {
        Transform::Median { column, median, .. } if column == "RecentPromotion" => Some(*median),
        _ => None,
    });
    assert_eq!(promo_median, Some(1.0));
}

#[test]
fn campus_data_absence_is_reported() {
    if fixtures::campus_csv().is_some() {
        return;
    }
    let err = fixtures::get("campus").unwrap().network().unwrap_err();
    assert!(matches!(err, fixtures::FixtureError::DataUnavailable { .. }));
}
