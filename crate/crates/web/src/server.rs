//! In-memory DICOMweb archive for tests and demos.
//!
//! Instances are kept as the exact Part 10 streams received. Re-storing a
//! SOP instance UID replaces the earlier instance. Search matches
//! attribute values exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::net::SocketAddr;
use std::path::{Path as FsPath, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use dicom_annot::dataset::dictionary::resolve;
use dicom_annot::dataset::{read_part10, tags, DataElement, DataSet, Tag, Value, VR};
use dicom_annot::uid::is_valid_uid;
use tokio::sync::oneshot;

use crate::json::to_json;
use crate::multipart::{self, Part};

const PROCESSING_FAILURE: i64 = 0xC000;

#[derive(Debug, thiserror::Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("cannot start runtime: {0}")]
    Runtime(std::io::Error),
    #[error("snapshot directory {path}: {source}")]
    Snapshot {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
struct Stored {
    seq: u64,
    study: String,
    series: String,
    sop_class: String,
    bytes: Arc<Vec<u8>>,
    metadata: DataSet,
}

/// Thread-safe instance store shared by server handles.
#[derive(Debug, Clone, Default)]
pub struct InstanceStore {
    inner: Arc<RwLock<HashMap<String, Stored>>>,
    seq: Arc<AtomicU64>,
    snapshot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreOutcome {
    pub sop_class_uid: String,
    pub sop_instance_uid: String,
    pub study_instance_uid: String,
    pub series_instance_uid: String,
}

impl InstanceStore {
    pub fn new() -> Self {
        InstanceStore::default()
    }

    /// A store mirrored to `dir`: existing `.dcm` files are loaded and each
    /// stored instance is written back as `<SOPInstanceUID>.dcm`.
    pub fn with_snapshot(dir: impl AsRef<FsPath>) -> Result<Self, ServerError> {
        let dir = dir.as_ref().to_path_buf();
        let err = |source| ServerError::Snapshot {
            path: dir.clone(),
            source,
        };
        std::fs::create_dir_all(&dir).map_err(err)?;
        let mut store = InstanceStore::new();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "dcm"))
            .collect();
        files.sort();
        for f in files {
            let bytes = std::fs::read(&f).map_err(err)?;
            // Unreadable files are skipped rather than aborting startup.
            let _ = store.insert(bytes);
        }
        store.snapshot = Some(dir);
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores a Part 10 stream, replacing any instance with the same SOP
    /// instance UID.
    pub fn insert(&self, bytes: Vec<u8>) -> Result<StoreOutcome, String> {
        let (_, ds) = read_part10(&bytes).map_err(|e| e.to_string())?;
        let get = |tag, name: &str| -> Result<String, String> {
            let v = ds.string(tag).ok_or_else(|| format!("missing {name}"))?;
            if is_valid_uid(v) {
                Ok(v.to_string())
            } else {
                Err(format!("invalid {name} {v:?}"))
            }
        };
        let outcome = StoreOutcome {
            sop_class_uid: get(tags::SOP_CLASS_UID, "SOPClassUID")?,
            sop_instance_uid: get(tags::SOP_INSTANCE_UID, "SOPInstanceUID")?,
            study_instance_uid: get(tags::STUDY_INSTANCE_UID, "StudyInstanceUID")?,
            series_instance_uid: get(tags::SERIES_INSTANCE_UID, "SeriesInstanceUID")?,
        };
        let mut metadata = DataSet::new();
        for e in ds.iter().filter(|e| !matches!(e.value, Value::Bytes(_))) {
            metadata.put(e.clone());
        }
        if let Some(dir) = &self.snapshot {
            std::fs::write(
                dir.join(format!("{}.dcm", outcome.sop_instance_uid)),
                &bytes,
            )
            .map_err(|e| e.to_string())?;
        }
        let stored = Stored {
            seq: self.seq.fetch_add(1, Ordering::Relaxed),
            study: outcome.study_instance_uid.clone(),
            series: outcome.series_instance_uid.clone(),
            sop_class: outcome.sop_class_uid.clone(),
            bytes: Arc::new(bytes),
            metadata,
        };
        self.inner
            .write()
            .expect("store lock")
            .insert(outcome.sop_instance_uid.clone(), stored);
        Ok(outcome)
    }

    /// The stored Part 10 stream, if the UIDs locate an instance.
    pub fn get(&self, study: &str, series: &str, sop: &str) -> Option<Arc<Vec<u8>>> {
        let inner = self.inner.read().expect("store lock");
        inner
            .get(sop)
            .filter(|s| s.study == study && s.series == series)
            .map(|s| s.bytes.clone())
    }

    fn snapshot_sorted(&self) -> Vec<(String, Stored)> {
        let inner = self.inner.read().expect("store lock");
        let mut all: Vec<(String, Stored)> =
            inner.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        all.sort_by_key(|(_, s)| s.seq);
        all
    }
}

/// A running stub archive; stops when dropped.
pub struct StubServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl StubServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown_now();
    }

    /// Blocks until the server exits.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    fn shutdown_now(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.shutdown_now();
    }
}

/// Serves `store` on 127.0.0.1:`port` (0 picks a free port).
pub fn stub_serve(store: InstanceStore, port: u16) -> Result<StubServer, ServerError> {
    stub_serve_on(store, SocketAddr::from(([127, 0, 0, 1], port)))
}

pub fn stub_serve_on(store: InstanceStore, addr: SocketAddr) -> Result<StubServer, ServerError> {
    let listener =
        std::net::TcpListener::bind(addr).map_err(|source| ServerError::Bind { addr, source })?;
    let local = listener
        .local_addr()
        .map_err(|source| ServerError::Bind { addr, source })?;
    listener
        .set_nonblocking(true)
        .map_err(ServerError::Runtime)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .map_err(ServerError::Runtime)?;
    let (tx, rx) = oneshot::channel::<()>();
    let app = router(store);
    let thread = std::thread::spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)
                .expect("listener registers with runtime");
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
    });
    Ok(StubServer {
        addr: local,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

pub fn router(store: InstanceStore) -> Router {
    Router::new()
        .route("/studies", get(search_studies).post(stow))
        .route("/series", get(search_series))
        .route("/instances", get(search_instances))
        .route(
            "/studies/{study}/series/{series}/instances/{sop}",
            get(wado),
        )
        .fallback(|| async { (StatusCode::NOT_FOUND, "no such resource") })
        .with_state(store)
}

fn dicom_json(status: StatusCode, body: serde_json::Value) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/dicom+json")],
        body.to_string(),
    )
        .into_response()
}

async fn stow(State(store): State<InstanceStore>, headers: HeaderMap, body: Bytes) -> Response {
    let ct = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("");
    let parts = match multipart::decode(&body, ct) {
        Ok(p) => p,
        Err(e) => return (StatusCode::UNSUPPORTED_MEDIA_TYPE, e.to_string()).into_response(),
    };
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for part in parts {
        let mut item = DataSet::new();
        match store.insert(part.body) {
            Ok(o) => {
                item.set_uid(tags::REFERENCED_SOP_CLASS_UID, &o.sop_class_uid);
                item.set_uid(tags::REFERENCED_SOP_INSTANCE_UID, &o.sop_instance_uid);
                item.set_text(
                    tags::RETRIEVE_URL,
                    VR::UR,
                    format!(
                        "/studies/{}/series/{}/instances/{}",
                        o.study_instance_uid, o.series_instance_uid, o.sop_instance_uid
                    ),
                );
                ok.push(item);
            }
            Err(_) => {
                item.set_int(tags::FAILURE_REASON, VR::US, PROCESSING_FAILURE);
                failed.push(item);
            }
        }
    }
    let status = match (ok.is_empty(), failed.is_empty()) {
        (_, true) => StatusCode::OK,
        (false, false) => StatusCode::ACCEPTED,
        (true, false) => StatusCode::CONFLICT,
    };
    let mut response = DataSet::new();
    if !ok.is_empty() {
        response.set_sequence(tags::REFERENCED_SOP_SEQUENCE, ok);
    }
    if !failed.is_empty() {
        response.set_sequence(tags::FAILED_SOP_SEQUENCE, failed);
    }
    dicom_json(status, to_json(&response))
}

async fn wado(
    State(store): State<InstanceStore>,
    Path((study, series, sop)): Path<(String, String, String)>,
) -> Response {
    match store.get(&study, &series, &sop) {
        None => (StatusCode::NOT_FOUND, "instance not found").into_response(),
        Some(bytes) => {
            let boundary = multipart::boundary();
            let body = multipart::encode(&[Part::dicom(bytes.as_ref().clone())], &boundary);
            (
                StatusCode::OK,
                [(
                    header::CONTENT_TYPE,
                    multipart::content_type(&boundary, "application/dicom"),
                )],
                body,
            )
                .into_response()
        }
    }
}

struct Search {
    filters: Vec<(Tag, String)>,
    limit: Option<usize>,
    offset: usize,
}

fn parse_search(params: Vec<(String, String)>) -> Result<Search, String> {
    let mut s = Search {
        filters: Vec::new(),
        limit: None,
        offset: 0,
    };
    for (k, v) in params {
        match k.as_str() {
            "limit" => {
                s.limit = Some(
                    v.parse()
                        .map_err(|_| format!("limit {v:?} is not a count"))?,
                )
            }
            "offset" => {
                s.offset = v
                    .parse()
                    .map_err(|_| format!("offset {v:?} is not a count"))?
            }
            "includefield" | "fuzzymatching" => {}
            key => {
                let tag = resolve(key).ok_or_else(|| format!("unknown attribute {key:?}"))?;
                s.filters.push((tag, v));
            }
        }
    }
    Ok(s)
}

fn matches(ds: &DataSet, filters: &[(Tag, String)]) -> bool {
    filters.iter().all(|(tag, want)| {
        ds.strings(*tag)
            .is_some_and(|vs| vs.iter().any(|v| v == want))
            || ds
                .ints(*tag)
                .is_some_and(|vs| vs.iter().any(|v| v.to_string() == *want))
    })
}

fn copy(from: &DataSet, to: &mut DataSet, wanted: &[Tag]) {
    for &t in wanted {
        if let Some(e) = from.get(t) {
            to.put(e.clone());
        }
    }
}

const STUDY_FIELDS: &[Tag] = &[
    tags::STUDY_DATE,
    tags::STUDY_TIME,
    tags::ACCESSION_NUMBER,
    tags::PATIENT_NAME,
    tags::PATIENT_ID,
    tags::STUDY_INSTANCE_UID,
    tags::STUDY_ID,
    tags::STUDY_DESCRIPTION,
];
const SERIES_FIELDS: &[Tag] = &[
    tags::MODALITY,
    tags::SERIES_DESCRIPTION,
    tags::PATIENT_ID,
    tags::STUDY_INSTANCE_UID,
    tags::SERIES_INSTANCE_UID,
    tags::SERIES_NUMBER,
];
const INSTANCE_FIELDS: &[Tag] = &[
    tags::SOP_CLASS_UID,
    tags::SOP_INSTANCE_UID,
    tags::MODALITY,
    tags::PATIENT_ID,
    tags::STUDY_INSTANCE_UID,
    tags::SERIES_INSTANCE_UID,
    tags::INSTANCE_NUMBER,
    tags::NUMBER_OF_FRAMES,
    tags::ROWS,
    tags::COLUMNS,
];

#[derive(Clone, Copy)]
enum Level {
    Studies,
    Series,
    Instances,
}

fn search(store: &InstanceStore, level: Level, params: Vec<(String, String)>) -> Response {
    let q = match parse_search(params) {
        Ok(q) => q,
        Err(e) => return (StatusCode::BAD_REQUEST, e).into_response(),
    };
    let all = store.snapshot_sorted();
    let hits: Vec<&Stored> = all
        .iter()
        .map(|(_, s)| s)
        .filter(|s| matches(&s.metadata, &q.filters))
        .collect();
    let extra: Vec<Tag> = q.filters.iter().map(|(t, _)| *t).collect();
    let mut records = Vec::new();
    match level {
        Level::Instances => {
            for s in hits {
                let mut r = DataSet::new();
                copy(&s.metadata, &mut r, INSTANCE_FIELDS);
                copy(&s.metadata, &mut r, &extra);
                r.set_uid(tags::SOP_CLASS_UID, &s.sop_class);
                r.set_text(
                    tags::RETRIEVE_URL,
                    VR::UR,
                    format!(
                        "/studies/{}/series/{}/instances/{}",
                        s.study,
                        s.series,
                        r.string(tags::SOP_INSTANCE_UID).unwrap_or("")
                    ),
                );
                records.push(r);
            }
        }
        Level::Series => {
            let mut seen = BTreeSet::new();
            for s in hits.iter().filter(|s| seen.insert(s.series.clone())) {
                let count = all.iter().filter(|(_, o)| o.series == s.series).count();
                let mut r = DataSet::new();
                copy(&s.metadata, &mut r, SERIES_FIELDS);
                copy(&s.metadata, &mut r, &extra);
                r.set_int(
                    tags::NUMBER_OF_SERIES_RELATED_INSTANCES,
                    VR::IS,
                    count as i64,
                );
                records.push(r);
            }
        }
        Level::Studies => {
            let mut seen = BTreeSet::new();
            for s in hits.iter().filter(|s| seen.insert(s.study.clone())) {
                let members: Vec<&Stored> = all
                    .iter()
                    .map(|(_, o)| o)
                    .filter(|o| o.study == s.study)
                    .collect();
                let modalities: BTreeMap<String, ()> = members
                    .iter()
                    .filter_map(|m| {
                        m.metadata
                            .string(tags::MODALITY)
                            .map(|v| (v.to_string(), ()))
                    })
                    .collect();
                let mut r = DataSet::new();
                copy(&s.metadata, &mut r, STUDY_FIELDS);
                copy(&s.metadata, &mut r, &extra);
                r.put(DataElement::new(
                    tags::MODALITIES_IN_STUDY,
                    VR::CS,
                    Value::Text(modalities.into_keys().collect()),
                ));
                r.set_int(
                    tags::NUMBER_OF_STUDY_RELATED_INSTANCES,
                    VR::IS,
                    members.len() as i64,
                );
                records.push(r);
            }
        }
    }
    let page: Vec<serde_json::Value> = records
        .iter()
        .skip(q.offset)
        .take(q.limit.unwrap_or(usize::MAX))
        .map(to_json)
        .collect();
    dicom_json(StatusCode::OK, serde_json::Value::Array(page))
}

async fn search_studies(
    State(store): State<InstanceStore>,
    Query(p): Query<Vec<(String, String)>>,
) -> Response {
    search(&store, Level::Studies, p)
}

async fn search_series(
    State(store): State<InstanceStore>,
    Query(p): Query<Vec<(String, String)>>,
) -> Response {
    search(&store, Level::Series, p)
}

async fn search_instances(
    State(store): State<InstanceStore>,
    Query(p): Query<Vec<(String, String)>>,
) -> Response {
    search(&store, Level::Instances, p)
}
