use qlab::{Config, Error, Format};

#[test]
fn defaults() {
    let c = Config::default();
    assert_eq!((c.seed, c.torus_n, c.torus6_n, c.harmonic_n, c.sphere_n), (7, 32, 16, 16, 48));
    assert_eq!(c.format, Format::Json);
    assert!(c.out.is_none() && c.tolerances.is_empty());
}

#[test]
fn text_with_comments_and_blank_lines() {
    let mut c = Config::default();
    c.apply_text("\n# resolution\ntorus_n = 16\n\nsphere_n=32\nformat=text\nout=/tmp/x.txt\n").unwrap();
    assert_eq!(c.torus_n, 16);
    assert_eq!(c.sphere_n, 32);
    assert_eq!(c.format, Format::Text);
    assert_eq!(c.echo()["out"], "/tmp/x.txt");
}

#[test]
fn rejections() {
    let mut c = Config::default();
    assert!(matches!(c.set("resolution", "3"), Err(Error::UnknownKey(_))));
    assert!(matches!(c.set("tol.nothing.here", "1e-3"), Err(Error::UnknownKey(_))));
    assert!(matches!(c.set("tol.descent", "1e-3"), Err(Error::UnknownKey(_))));
    assert!(matches!(c.set("seed", "-1"), Err(Error::InvalidValue { .. })));
    assert!(matches!(c.set("torus_n", "9"), Err(Error::InvalidValue { .. })));
    assert!(matches!(c.set("format", "xml"), Err(Error::InvalidValue { .. })));
    assert!(matches!(c.set("tol.descent.monotone", "-1"), Err(Error::InvalidValue { .. })));
    assert!(matches!(c.apply_text("seed 3"), Err(Error::Syntax { line: 1 })));
    assert!(c.set("tol.descent.monotone", "1e-12").is_ok());
}
