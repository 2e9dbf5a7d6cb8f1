mod support;

use support::*;

#[test]
fn published_schemas_match_types() {
    let dir = docs_api();
    for (name, text) in generated_schemas() {
        let path = dir.join(format!("{name}.json"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(on_disk == text, "{name}.json is out of date; rerun with UPDATE_GOLDEN=1");
    }
}
