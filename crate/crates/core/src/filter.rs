//! Profile filtering, the post-filter PropertyOf heuristic and the on-disk
//! network repository.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use log::info;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::RepositoryError;
use crate::network::ConceptNet;
use crate::profile::ProfileQuery;
use crate::relation::{RelationKey, Schema};
use crate::relaxation::{Derivation, HeuristicFlags, PassStats, RelationSet, IS_A, PROPERTY_OF};

/// Selects relations whose profile fits `q`, merges equal keys across the
/// fitting profiles and drops the profiles. The post-filter heuristic runs
/// afterwards when its flag is on.
pub fn build_conceptnet(q: &ProfileQuery, rels: &RelationSet, flags: &HeuristicFlags) -> ConceptNet {
    let selected = rels.iter().filter(|r| r.profile.as_ref().is_some_and(|p| q.matches(p))).cloned();
    let net = ConceptNet::from_relations(q.clone(), selected);
    if flags.post_filter_property_of {
        post_filter_property_heuristic(&net).0
    } else {
        net
    }
}

/// IsA(a, b) with PropertyOf(b, c) yields PropertyOf(a, c). Each pairing is
/// one derivation carrying the ids of both sources. Reflexive IsA is skipped.
pub fn post_filter_property_heuristic(net: &ConceptNet) -> (ConceptNet, PassStats) {
    let mut out = net.clone();
    let mut stats = PassStats { heuristic: "PostFilterPropertyOf".into(), ..PassStats::default() };
    for is_a in net.relations().filter(|r| r.rtype == IS_A && r.param1 != r.param2) {
        for prop in net.relations().filter(|r| r.rtype == PROPERTY_OF && r.param1 == is_a.param2) {
            let key =
                RelationKey { rtype: PROPERTY_OF.into(), param1: is_a.param1.clone(), param2: prop.param2.clone() };
            let mut ids = is_a.ids.clone();
            ids.extend(&prop.ids);
            match out.derive(key, &ids) {
                Derivation::Created => stats.derived += 1,
                Derivation::Merged => stats.merged += 1,
                Derivation::Suppressed => stats.suppressed += 1,
            }
        }
    }
    (out, stats)
}

/// Sidecar metadata written next to each persisted network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub query: [Vec<String>; 5],
    pub canonical_key: String,
    pub built_at: u64,
    pub corpus_digest: String,
}

/// Shared, immutable view of a materialized network.
#[derive(Debug, Clone)]
pub struct NetworkHandle {
    pub key: String,
    pub path: PathBuf,
    net: Arc<ConceptNet>,
}

impl NetworkHandle {
    pub fn net(&self) -> &ConceptNet {
        &self.net
    }

    pub fn shared(&self) -> Arc<ConceptNet> {
        Arc::clone(&self.net)
    }

    /// Whether both handles point at the same in-memory network.
    pub fn same_as(&self, other: &NetworkHandle) -> bool {
        Arc::ptr_eq(&self.net, &other.net)
    }
}

impl std::ops::Deref for NetworkHandle {
    type Target = ConceptNet;

    fn deref(&self) -> &ConceptNet {
        &self.net
    }
}

type Slot = Arc<Mutex<Option<NetworkHandle>>>;

/// Builds, persists and caches networks per canonical profile query.
///
/// Concurrent requests for one query share a per-key lock, so exactly one of
/// them builds and the rest receive the same handle.
#[derive(Debug)]
pub struct NetworkRepository {
    dir: PathBuf,
    relaxed: Arc<RelationSet>,
    flags: HeuristicFlags,
    schema: Schema,
    digest: String,
    builds: AtomicUsize,
    slots: Mutex<HashMap<String, Slot>>,
}

impl NetworkRepository {
    pub fn new(
        dir: impl Into<PathBuf>,
        relaxed: RelationSet,
        flags: HeuristicFlags,
        schema: Schema,
    ) -> Result<Self, RepositoryError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| storage(&dir, e))?;
        let digest = corpus_digest(&relaxed, &flags);
        Ok(Self {
            dir,
            relaxed: Arc::new(relaxed),
            flags,
            schema,
            digest,
            builds: AtomicUsize::new(0),
            slots: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn relaxed(&self) -> &RelationSet {
        &self.relaxed
    }

    pub fn corpus_digest(&self) -> &str {
        &self.digest
    }

    /// Number of networks built from the relaxed set (disk loads excluded).
    pub fn build_count(&self) -> usize {
        self.builds.load(Ordering::SeqCst)
    }

    pub fn network_path(&self, q: &ProfileQuery) -> PathBuf {
        self.dir.join(format!("{}.net", file_stem(&q.canonical_key())))
    }

    /// Whether a network for `q` is cached in memory.
    pub fn is_cached(&self, q: &ProfileQuery) -> bool {
        let slot = self.slots.lock().expect("slot map").get(&q.canonical_key()).cloned();
        slot.is_some_and(|s| s.lock().expect("slot").is_some())
    }

    /// Returns the cached handle, loads a persisted network with a matching
    /// corpus digest, or builds and persists a new one.
    pub fn materialize(&self, q: &ProfileQuery) -> Result<NetworkHandle, RepositoryError> {
        let key = q.canonical_key();
        let slot = {
            let mut slots = self.slots.lock().expect("slot map");
            Arc::clone(slots.entry(key.clone()).or_default())
        };
        let mut guard = slot.lock().expect("slot");
        if let Some(handle) = guard.as_ref() {
            return Ok(handle.clone());
        }
        let path = self.network_path(q);
        let net = match self.load(q, &path)? {
            Some(net) => net,
            None => {
                self.builds.fetch_add(1, Ordering::SeqCst);
                info!("building network for {key}");
                let net = build_conceptnet(q, &self.relaxed, &self.flags);
                self.persist(q, &path, &net)?;
                net
            }
        };
        let handle = NetworkHandle { key, path, net: Arc::new(net) };
        *guard = Some(handle.clone());
        Ok(handle)
    }

    /// Drops the in-memory copy; persisted files stay.
    pub fn forget(&self, q: &ProfileQuery) -> bool {
        self.slots.lock().expect("slot map").remove(&q.canonical_key()).is_some()
    }

    fn load(&self, q: &ProfileQuery, path: &Path) -> Result<Option<ConceptNet>, RepositoryError> {
        let meta_path = meta_path(path);
        if !path.exists() || !meta_path.exists() {
            return Ok(None);
        }
        let meta_text = fs::read_to_string(&meta_path).map_err(|e| storage(&meta_path, e))?;
        let meta: NetworkMeta = serde_json::from_str(&meta_text)?;
        if meta.corpus_digest != self.digest || meta.canonical_key != q.canonical_key() {
            return Ok(None);
        }
        let text = fs::read_to_string(path).map_err(|e| storage(path, e))?;
        let net = ConceptNet::parse(&text, &self.schema, q.clone())
            .map_err(|source| RepositoryError::Corrupt { path: path.display().to_string(), source })?;
        Ok(Some(net))
    }

    fn persist(&self, q: &ProfileQuery, path: &Path, net: &ConceptNet) -> Result<(), RepositoryError> {
        fs::write(path, net.to_text()).map_err(|e| storage(path, e))?;
        let meta = NetworkMeta {
            query: q.to_lists(),
            canonical_key: q.canonical_key(),
            built_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            corpus_digest: self.digest.clone(),
        };
        let meta_path = meta_path(path);
        fs::write(&meta_path, serde_json::to_string_pretty(&meta)?).map_err(|e| storage(&meta_path, e))
    }
}

fn storage(path: &Path, source: std::io::Error) -> RepositoryError {
    RepositoryError::Storage { path: path.display().to_string(), source }
}

fn meta_path(net_path: &Path) -> PathBuf {
    net_path.with_extension("meta.json")
}

fn file_stem(canonical_key: &str) -> String {
    let digest = Sha256::digest(canonical_key.as_bytes());
    hex::encode(&digest[..8])
}

/// Digest of the relaxed relation set and the flags the networks are built with.
pub fn corpus_digest(relaxed: &RelationSet, flags: &HeuristicFlags) -> String {
    let mut hasher = Sha256::new();
    hasher.update(relaxed.to_lines().as_bytes());
    hasher.update(serde_json::to_string(flags).expect("flags serialize").as_bytes());
    hex::encode(hasher.finalize())
}
