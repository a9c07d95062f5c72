use citegraph_web_demo::{preprocess, Demo};

#[test]
fn preprocess_returns_a_json_token_list() {
    let tokens: Vec<String> = serde_json::from_str(&preprocess("The jury didn't convict under section 5.")).unwrap();
    assert!(tokens.contains(&"jury".to_string()));
    assert!(!tokens.contains(&"the".to_string()));
}

#[test]
fn demo_answers_queries_and_scans() {
    let demo = Demo::build(90, 3, 3, 4).unwrap();
    assert_eq!(demo.len(), 90);
    let probe = demo.description(10).unwrap();
    let cites = demo.citations(&probe).unwrap();
    assert_eq!(cites.len(), 5);
    assert_eq!(cites[0].track, "cosine_top1");
    assert_eq!(cites[0].relevance_pct, 100);
    assert!(cites.iter().skip(1).all(|c| c.topic == cites[0].topic));

    let rows = demo.scan_rows(2, 5).unwrap();
    assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), [2, 3, 4, 5]);
    let best = rows.iter().max_by(|a, b| a.silhouette.total_cmp(&b.silhouette)).unwrap();
    assert_eq!(best.k, 3);

    let pts = demo.points().unwrap();
    assert_eq!(pts.len(), 90);
    assert!(pts.iter().all(|p| p.x.is_finite() && p.y.is_finite() && p.cluster >= 0));
}

#[test]
fn bad_parameters_are_errors() {
    assert!(Demo::build(30, 12, 3, 1).is_err());
    assert!(Demo::build(5, 2, 9, 1).is_err());
    let demo = Demo::build(20, 2, 2, 1).unwrap();
    assert!(demo.citations("   ").is_err());
    assert!(demo.scan_rows(3, 2).is_err());
}
