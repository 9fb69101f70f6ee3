use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use lru::LruCache;
use pantomorph::remap::Panorama;
use sha2::{Digest, Sha256};

/// In-memory panoramas keyed by the SHA-256 of their uploaded bytes. The
/// least recently used entry is dropped once `capacity` is reached.
pub struct PanoramaStore {
    entries: Mutex<LruCache<String, Arc<Panorama>>>,
}

impl PanoramaStore {
    pub fn new(capacity: usize) -> Self {
        let capacity = NonZeroUsize::new(capacity.max(1)).unwrap();
        Self {
            entries: Mutex::new(LruCache::new(capacity)),
        }
    }

    pub fn content_id(bytes: &[u8]) -> String {
        format!("{:x}", Sha256::digest(bytes))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.lock().unwrap().contains(id)
    }

    pub fn insert(&self, id: String, pano: Panorama) -> Arc<Panorama> {
        let pano = Arc::new(pano);
        self.entries.lock().unwrap().put(id, Arc::clone(&pano));
        pano
    }

    pub fn get(&self, id: &str) -> Option<Arc<Panorama>> {
        self.entries.lock().unwrap().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pantomorph::raster::RgbRaster;

    fn pano() -> Panorama {
        Panorama::new(RgbRaster::filled(4, 2, [0.5; 3])).unwrap()
    }

    #[test]
    fn evicts_least_recently_used() {
        let store = PanoramaStore::new(2);
        store.insert("a".into(), pano());
        store.insert("b".into(), pano());
        assert!(store.get("a").is_some());
        store.insert("c".into(), pano());
        assert!(store.contains("a") && store.contains("c"));
        assert!(!store.contains("b"));
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn ids_are_content_hashes() {
        assert_eq!(
            PanoramaStore::content_id(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
