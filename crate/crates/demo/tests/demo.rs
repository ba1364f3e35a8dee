use etimd_browser::{explore_fusion, explore_hog, simulate, stripe_block};

#[test]
fn simulation_images_cover_the_frame() {
    let s = simulate("glyph-tile", "etimd", 32, 3, true).unwrap();
    assert_eq!((s.width(), s.height()), (32, 32));
    for rgba in [s.original_rgba(), s.prediction_rgba(), s.error_rgba()] {
        assert_eq!(rgba.len(), 32 * 32 * 4);
        assert!(rgba.chunks(4).all(|p| p[3] == 255));
    }
    assert_eq!(s.records().len(), 16);
    let summary = s.summary();
    assert_eq!(summary["blocks"], 16);
    // the last block of a tiled frame is copied exactly
    let last = s.block_at(31, 31).unwrap();
    assert_eq!((last.x0, last.y0, last.sad), (24, 24, 0));
    assert!(s.block_json(31, 31).contains("\"scan_index\":15"));
    assert_eq!(s.block_json(40, 0), "");
}

#[test]
fn simulation_rejects_bad_arguments() {
    assert!(simulate("no-such", "etimd", 32, 0, true).is_err());
    assert!(simulate("ui", "bogus", 32, 0, true).is_err());
    assert!(simulate("ui", "timd", 30, 0, true).is_err());
}

#[test]
fn hog_explorer_finds_axis_stripes() {
    // angle is the direction along which the value changes
    let rows = explore_hog(16, 90.0, 6.0, false).unwrap();
    assert_eq!(rows["dominant"], 18);
    assert_eq!(rows["class"], "H");
    let cols = explore_hog(16, 0.0, 6.0, true).unwrap();
    assert_eq!(cols["dominant"], 50);
    assert_eq!(cols["bins"].as_array().unwrap().len(), 65);
    assert!(explore_hog(12, 0.0, 6.0, false).is_err());
    assert_eq!(stripe_block(8, 0.0, 4.0, 200).get(0, 0), 412);
}

#[test]
fn fusion_explorer_runs_both_rules() {
    let v = explore_fusion("A18:100\nA50:140, PLANAR:300\nBV:90").unwrap();
    assert_eq!(v["etimd"]["modes"][0], "BV(-8,0)");
    assert_eq!(v["etimd"]["modes"].as_array().unwrap().len(), 3);
    assert_eq!(v["timd"]["modes"], serde_json::json!(["A18", "A50"]));
    let sum: f64 = v["etimd"]["weights"].as_array().unwrap().iter().map(|w| w.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert!(v["timd"].is_object());
    assert!(explore_fusion("").unwrap()["etimd"].is_null());
    assert!(explore_fusion("A99:1").is_err());
    assert!(explore_fusion("A18:1,A18:2").is_err());
    assert!(explore_fusion("A18").is_err());
}
