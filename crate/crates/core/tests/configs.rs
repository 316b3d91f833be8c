use std::path::Path;

use wgcloak::config::{DesignObjective, RunConfig};

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "ini") {
            RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
    let c = RunConfig::load(&dir.join("cloak_penetrable_fish.ini")).unwrap();
    assert_eq!(c.design.objective, DesignObjective::Cloak);
    assert_eq!(c.design.resonators, 2);
    assert_eq!(c.geometry.index_regions[0].n, 6.0);
    let c = RunConfig::load(&dir.join("triangle_sweep.ini")).unwrap();
    assert_eq!(c.geometry.resonators.len(), 1);
    assert_eq!(c.sweep.unwrap().steps, 41);
}
