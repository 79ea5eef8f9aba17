//! Generation-test cache on disk.

use pralab::cache::GenCache;
use pralab::spread::MateTable;
use pralab::{GroupKind, GroupTable};

#[test]
fn save_load_and_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let g = GroupTable::build(GroupKind::Psl, 5, 1).unwrap();
    let mut cache = GenCache::load(dir.path(), &g).unwrap();
    assert!(cache.is_empty());
    let fresh = MateTable::build_cached(&g, &mut cache);
    assert!(cache.is_dirty() && !cache.is_empty());
    let path = cache.save(dir.path()).unwrap();
    assert!(path.ends_with("gen-psl-5.bin"));

    let mut again = GenCache::load(dir.path(), &g).unwrap();
    assert_eq!(again.len(), cache.len());
    let reused = MateTable::build_cached(&g, &mut again);
    assert_eq!(reused.closure_tests(), 0);
    for i in 0..g.order() as u32 {
        assert_eq!(fresh.mates_local(i), reused.mates_local(i));
    }
    assert!(!again.is_dirty());
}

#[test]
fn rejects_foreign_and_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = GroupTable::build(GroupKind::Psl, 5, 1).unwrap();
    let mut cache = GenCache::new(g.kind(), g.q());
    let u = g.parse_elem("1,1,0,1").unwrap();
    cache.generates(&g, &[u]);
    let path = cache.save(dir.path()).unwrap();
    let pgl = GroupTable::build(GroupKind::Pgl, 5, 1).unwrap();
    std::fs::copy(&path, dir.path().join(GenCache::file_name(GroupKind::Pgl, 5))).unwrap();
    assert!(GenCache::load(dir.path(), &pgl).is_err());
    std::fs::write(&path, b"PRALABGC\x09\x00").unwrap();
    assert!(matches!(GenCache::load(dir.path(), &g), Err(pralab::Error::Cache(_))));
}
