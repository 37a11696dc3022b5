use std::path::Path;

use kelvin_wave::cli::load_config;

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.grid_spec().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 6);
}

#[test]
fn grid_405_config_has_405_squared_points() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let gs = load_config(&dir.join("grid-405.json")).unwrap().grid_spec().unwrap();
    assert_eq!(gs.m_total, 405 * 405);
    assert_eq!(gs.steps, 406);
}
