use std::path::Path;

use boundlab::lab::parse_config;

#[test]
fn every_preset_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("cfg") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let cfg = parse_config(&text, &dir).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        // the ucb_vs_exp3 file keeps its underscore spelling
        assert_eq!(cfg.name, path.file_stem().unwrap().to_str().unwrap().replace('_', "-"));
        count += 1;
    }
    assert!(count >= 12);
}
