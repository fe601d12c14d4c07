//! The files under `fixtures/` match the generated models.

use std::path::Path;

use asrefine_core::fixture::Fixture;

#[test]
fn shipped_files_are_current() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for f in Fixture::ALL {
        let path = dir.join(format!("{f}.as"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(text, f.source(), "{f}");
    }
}
