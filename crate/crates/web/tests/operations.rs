use qlab_web::{cp2_characteristic, cp2_eigen, onofri};

#[test]
fn eigenvalue_matches_closed_form() {
    for nu in [0.0, 30.0, 84.0, 12.5] {
        let v = cp2_eigen(nu).unwrap();
        assert_eq!(v[0], nu);
        assert!((v[1] - 2.0 * (nu - 30.0) / 9.0).abs() < 1e-14);
        assert!((v[2] - v[1]).abs() < 1e-9);
        assert!(v[3] < 1e-9);
    }
}

#[test]
fn characteristic_numbers() {
    let v = cp2_characteristic(0.3, -0.2, 0.5, 0.1).unwrap();
    assert!((v[0] - 6.0).abs() < 1e-9);
    assert!((v[1] - 3.0).abs() < 1e-9);
    assert!((v[2] - 3.0).abs() < 1e-9);
    assert!((v[3] - 1.0).abs() < 1e-9);
}

#[test]
fn h_is_dilation_invariant() {
    let v = onofri(1.3, 0.2).unwrap();
    assert!(v[0] > 0.0);
    assert!(v[2] < 1e-6, "{v:?}");
    let id = onofri(1.0, 0.2).unwrap();
    assert!(id[2] < 1e-12);
}
