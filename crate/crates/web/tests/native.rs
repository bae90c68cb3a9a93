use qebt_web::{classify_json, decompose_json, plane};

#[test]
fn classify_reports_identity() {
    let v: serde_json::Value = serde_json::from_str(&classify_json([0.0; 3], [1.0; 3], 1e-9)).unwrap();
    assert_eq!(v["cp"], true);
    assert_eq!(v["ebt"], false);
}

#[test]
fn plane_is_closed_and_symmetric_lens() {
    let p = plane([0.4, 0.3, 0.0], 0.15, 8).unwrap();
    assert_eq!(p.boundary.len(), 16);
    assert_eq!(p.lens.len(), 16);
    // the lens radius along +λ₊ and +λ₋ match
    assert!((p.lens[0] - p.lens[5]).abs() < 1e-9);
    assert!(plane([0.9, 0.9, 0.0], 0.0, 8).is_err());
}

#[test]
fn decompose_reports_method() {
    let v: serde_json::Value = serde_json::from_str(&decompose_json([0.0; 3], [0.3, 0.2, 0.1]).unwrap()).unwrap();
    assert_eq!(v["method"], "constructive");
    assert!(decompose_json([0.0; 3], [1.0; 3]).is_err());
}
