use std::time::Duration;

use base64::Engine;
use dicom_annot::common::InstanceReference;
use dicom_annot::dataset::{read_part10, tags, write_part10, DataSet, FileMeta, Part10Error};
use dicom_annot::uid::is_valid_uid;

use crate::json::{from_json, JsonError};
use crate::multipart::{self, MultipartError, Part};

/// Identifies a stored instance.
pub type InstanceRef = InstanceReference;

#[derive(Debug, thiserror::Error)]
pub enum WebError {
    #[error("invalid base URL {0:?}: must be absolute http(s)")]
    InvalidUrl(String),
    #[error("invalid UID {0:?}")]
    InvalidUid(String),
    #[error("nothing to store")]
    NothingToStore,
    #[error("HTTP {status}: {excerpt}")]
    Status { status: u16, excerpt: String },
    #[error("connection failed: {0}")]
    Connection(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("archive rejected {} instance(s): {}", .failed.len(), .failed.join(", "))]
    PartialStore {
        stored: Vec<InstanceRef>,
        failed: Vec<String>,
    },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Multipart(#[from] MultipartError),
    #[error(transparent)]
    Json(#[from] JsonError),
    #[error(transparent)]
    Part10(#[from] Part10Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Credentials {
    Bearer(String),
    Basic { user: String, password: String },
}

impl Credentials {
    fn header(&self) -> String {
        match self {
            Credentials::Bearer(t) => format!("Bearer {t}"),
            Credentials::Basic { user, password } => format!(
                "Basic {}",
                base64::engine::general_purpose::STANDARD.encode(format!("{user}:{password}"))
            ),
        }
    }
}

/// QIDO-RS query level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Studies,
    Series,
    Instances,
}

impl Level {
    pub fn path(self) -> &'static str {
        match self {
            Level::Studies => "studies",
            Level::Series => "series",
            Level::Instances => "instances",
        }
    }
}

impl std::str::FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "studies" | "study" => Ok(Level::Studies),
            "series" => Ok(Level::Series),
            "instances" | "instance" => Ok(Level::Instances),
            other => Err(format!(
                "unknown level {other:?}; expected studies, series or instances"
            )),
        }
    }
}

/// A QIDO-RS query: attribute filters plus paging.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Query {
    /// Keyword or hexadecimal tag, and the value to match.
    pub filters: Vec<(String, String)>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl Query {
    pub fn new() -> Self {
        Query::default()
    }

    pub fn filter(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.filters.push((key.into(), value.into()));
        self
    }

    pub fn limit(mut self, n: usize) -> Self {
        self.limit = Some(n);
        self
    }

    pub fn offset(mut self, n: usize) -> Self {
        self.offset = Some(n);
        self
    }
}

/// DICOMweb client. Requests are independent; one client may be shared
/// across threads.
#[derive(Debug, Clone)]
pub struct WebClient {
    base: String,
    credentials: Option<Credentials>,
    agent: ureq::Agent,
}

const EXCERPT: usize = 200;

fn excerpt(body: &[u8]) -> String {
    let text = String::from_utf8_lossy(body);
    let mut s: String = text.chars().take(EXCERPT).collect();
    if text.chars().count() > EXCERPT {
        s.push_str("...");
    }
    s
}

fn check_uid(uid: &str) -> Result<(), WebError> {
    if is_valid_uid(uid) {
        Ok(())
    } else {
        Err(WebError::InvalidUid(uid.to_string()))
    }
}

struct Reply {
    status: u16,
    content_type: String,
    body: Vec<u8>,
}

impl WebClient {
    pub fn new(base_url: &str, timeout: Duration) -> Result<Self, WebError> {
        let parsed =
            url::Url::parse(base_url).map_err(|_| WebError::InvalidUrl(base_url.into()))?;
        if !matches!(parsed.scheme(), "http" | "https") || parsed.host().is_none() {
            return Err(WebError::InvalidUrl(base_url.into()));
        }
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Ok(WebClient {
            base: base_url.trim_end_matches('/').to_string(),
            credentials: None,
            agent: ureq::Agent::new_with_config(config),
        })
    }

    pub fn with_credentials(mut self, credentials: Credentials) -> Self {
        self.credentials = Some(credentials);
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn finish(
        &self,
        result: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<Reply, WebError> {
        let mut resp = result.map_err(|e| WebError::Connection(e.to_string()))?;
        let status = resp.status().as_u16();
        let content_type = resp
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or("")
            .to_string();
        let body = resp
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_to_vec()
            .map_err(|e| WebError::Connection(e.to_string()))?;
        Ok(Reply {
            status,
            content_type,
            body,
        })
    }

    fn get(&self, path: &str, query: &[(String, String)], accept: &str) -> Result<Reply, WebError> {
        let mut req = self
            .agent
            .get(format!("{}/{path}", self.base))
            .header("Accept", accept);
        for (k, v) in query {
            req = req.query(k, v);
        }
        if let Some(c) = &self.credentials {
            req = req.header("Authorization", c.header());
        }
        self.finish(req.call())
    }

    /// STOW-RS of Part 10 streams, sent unchanged.
    pub fn store_part10(&self, streams: &[Vec<u8>]) -> Result<Vec<InstanceRef>, WebError> {
        if streams.is_empty() {
            return Err(WebError::NothingToStore);
        }
        let mut sent = Vec::with_capacity(streams.len());
        for s in streams {
            let (_, ds) = read_part10(s)?;
            let r = InstanceReference::of(&ds).ok_or_else(|| {
                WebError::Protocol(
                    "instance lacks study, series, SOP class or SOP instance UID".into(),
                )
            })?;
            for uid in [
                &r.study_instance_uid,
                &r.series_instance_uid,
                &r.sop_instance_uid,
            ] {
                check_uid(uid)?;
            }
            sent.push(r);
        }
        let boundary = multipart::boundary();
        let parts: Vec<Part> = streams.iter().cloned().map(Part::dicom).collect();
        let mut req = self
            .agent
            .post(format!("{}/studies", self.base))
            .header(
                "Content-Type",
                multipart::content_type(&boundary, "application/dicom"),
            )
            .header("Accept", "application/dicom+json");
        if let Some(c) = &self.credentials {
            req = req.header("Authorization", c.header());
        }
        let reply = self.finish(req.send(&multipart::encode(&parts, &boundary)[..]))?;
        if reply.status >= 400 && reply.status != 409 {
            return Err(WebError::Status {
                status: reply.status,
                excerpt: excerpt(&reply.body),
            });
        }
        let accepted: Vec<String> = if reply.body.is_empty() {
            if reply.status == 409 {
                Vec::new()
            } else {
                sent.iter().map(|r| r.sop_instance_uid.clone()).collect()
            }
        } else {
            let json: serde_json::Value = serde_json::from_slice(&reply.body)
                .map_err(|e| WebError::Protocol(format!("store response: {e}")))?;
            let response = from_json(&json)?;
            response
                .sequence(tags::REFERENCED_SOP_SEQUENCE)
                .unwrap_or_default()
                .iter()
                .filter_map(|i| {
                    i.string(tags::REFERENCED_SOP_INSTANCE_UID)
                        .map(str::to_string)
                })
                .collect()
        };
        let (stored, failed): (Vec<_>, Vec<_>) = sent
            .into_iter()
            .partition(|r| accepted.contains(&r.sop_instance_uid));
        if failed.is_empty() {
            Ok(stored)
        } else {
            Err(WebError::PartialStore {
                stored,
                failed: failed.into_iter().map(|r| r.sop_instance_uid).collect(),
            })
        }
    }

    /// STOW-RS of datasets, each encoded as a Part 10 stream.
    pub fn store_instances(&self, datasets: &[DataSet]) -> Result<Vec<InstanceRef>, WebError> {
        let streams = datasets
            .iter()
            .map(|d| write_part10(&FileMeta::for_dataset(d), d))
            .collect::<Result<Vec<_>, _>>()?;
        self.store_part10(&streams)
    }

    /// WADO-RS of one instance as its Part 10 stream.
    pub fn retrieve_part10(
        &self,
        study: &str,
        series: &str,
        sop: &str,
    ) -> Result<Vec<u8>, WebError> {
        for uid in [study, series, sop] {
            check_uid(uid)?;
        }
        let path = format!("studies/{study}/series/{series}/instances/{sop}");
        let reply = self.get(&path, &[], "multipart/related; type=\"application/dicom\"")?;
        match reply.status {
            404 => return Err(WebError::NotFound(path)),
            s if s >= 400 => {
                return Err(WebError::Status {
                    status: s,
                    excerpt: excerpt(&reply.body),
                })
            }
            _ => {}
        }
        let mut parts = multipart::decode(&reply.body, &reply.content_type)?;
        match parts.len() {
            1 => Ok(parts.remove(0).body),
            n => Err(WebError::Protocol(format!("expected one part, got {n}"))),
        }
    }

    pub fn retrieve_instance(
        &self,
        study: &str,
        series: &str,
        sop: &str,
    ) -> Result<DataSet, WebError> {
        Ok(read_part10(&self.retrieve_part10(study, series, sop)?)?.1)
    }

    /// QIDO-RS; records carry the attributes the archive returned.
    pub fn search(&self, level: Level, query: &Query) -> Result<Vec<DataSet>, WebError> {
        let mut params = query.filters.clone();
        if let Some(l) = query.limit {
            params.push(("limit".into(), l.to_string()));
        }
        if let Some(o) = query.offset {
            params.push(("offset".into(), o.to_string()));
        }
        let reply = self.get(level.path(), &params, "application/dicom+json")?;
        match reply.status {
            204 => return Ok(Vec::new()),
            s if s >= 400 => {
                return Err(WebError::Status {
                    status: s,
                    excerpt: excerpt(&reply.body),
                })
            }
            _ => {}
        }
        if reply.body.iter().all(u8::is_ascii_whitespace) {
            return Ok(Vec::new());
        }
        let json: serde_json::Value = serde_json::from_slice(&reply.body)
            .map_err(|e| WebError::Protocol(format!("search response: {e}")))?;
        let records = json
            .as_array()
            .ok_or_else(|| WebError::Protocol("search response is not an array".into()))?;
        Ok(records.iter().map(from_json).collect::<Result<_, _>>()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_url_must_be_absolute_http() {
        let t = Duration::from_secs(1);
        assert!(WebClient::new("http://localhost:8042/dicom-web/", t).is_ok());
        assert_eq!(
            WebClient::new("https://pacs.example/", t)
                .unwrap()
                .base_url(),
            "https://pacs.example"
        );
        for bad in ["localhost:8042", "ftp://x/", "/studies", ""] {
            assert!(
                matches!(WebClient::new(bad, t), Err(WebError::InvalidUrl(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn authorization_headers() {
        assert_eq!(Credentials::Bearer("abc".into()).header(), "Bearer abc");
        let basic = Credentials::Basic {
            user: "Aladdin".into(),
            password: "open sesame".into(),
        };
        assert_eq!(basic.header(), "Basic QWxhZGRpbjpvcGVuIHNlc2FtZQ==");
    }

    #[test]
    fn excerpt_is_bounded() {
        assert_eq!(excerpt(b"short"), "short");
        assert_eq!(excerpt(&[b'x'; 500]).len(), EXCERPT + 3);
    }
}
