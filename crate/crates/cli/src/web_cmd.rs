use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::Args;
use dicom_annot_web::json::to_json;
use dicom_annot_web::{stub_serve_on, Credentials, InstanceStore, Level, Query, WebClient};

use crate::error::{fail, network, usage, Category, CliResult};
use crate::{read_bytes, write_bytes};

/// Bearer token sent with every request when set.
pub const TOKEN_VAR: &str = "DICOMWEB_TOKEN";

#[derive(Debug, Args)]
pub struct Connection {
    /// DICOMweb base URL, e.g. http://localhost:8042/dicom-web.
    #[arg(long)]
    url: String,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
}

impl Connection {
    fn client(&self) -> CliResult<WebClient> {
        let c = WebClient::new(&self.url, Duration::from_secs(self.timeout)).map_err(usage)?;
        Ok(match std::env::var(TOKEN_VAR) {
            Ok(t) if !t.is_empty() => c.with_credentials(Credentials::Bearer(t)),
            _ => c,
        })
    }
}

#[derive(Debug, Args)]
pub struct Store {
    #[command(flatten)]
    conn: Connection,
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Retrieve {
    #[command(flatten)]
    conn: Connection,
    #[arg(long)]
    study: String,
    #[arg(long)]
    series: String,
    #[arg(long)]
    sop: String,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
pub struct Search {
    #[command(flatten)]
    conn: Connection,
    /// studies, series or instances.
    #[arg(long, default_value = "instances")]
    level: Level,
    /// Exact-match filter KEY=VALUE; KEY is a keyword or 8-digit hex tag.
    #[arg(short = 'q', long = "filter", value_name = "KEY=VALUE")]
    filters: Vec<String>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    offset: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Serve {
    #[arg(long, default_value = "127.0.0.1:8042")]
    listen: SocketAddr,
    /// Load and mirror instances to this directory.
    #[arg(long)]
    dir: Option<PathBuf>,
}

pub fn store(a: &Store) -> CliResult<()> {
    let client = a.conn.client()?;
    let streams = a
        .files
        .iter()
        .map(|p| read_bytes(p))
        .collect::<CliResult<Vec<_>>>()?;
    let refs = client.store_part10(&streams).map_err(network)?;
    for r in refs {
        println!(
            "{} {} {}",
            r.study_instance_uid, r.series_instance_uid, r.sop_instance_uid
        );
    }
    Ok(())
}

pub fn retrieve(a: &Retrieve) -> CliResult<()> {
    let client = a.conn.client()?;
    let bytes = client
        .retrieve_part10(&a.study, &a.series, &a.sop)
        .map_err(network)?;
    write_bytes(&a.output, &bytes)
}

pub fn search(a: &Search) -> CliResult<()> {
    let client = a.conn.client()?;
    let mut q = Query::new();
    for f in &a.filters {
        let (k, v) = f
            .split_once('=')
            .ok_or_else(|| usage(format!("filter {f:?} is not KEY=VALUE")))?;
        q = q.filter(k, v);
    }
    q.limit = a.limit;
    q.offset = a.offset;
    let records = client.search(a.level, &q).map_err(network)?;
    let json = serde_json::Value::Array(records.iter().map(to_json).collect());
    println!(
        "{}",
        serde_json::to_string_pretty(&json).expect("JSON values serialize")
    );
    Ok(())
}

pub fn serve(a: &Serve) -> CliResult<()> {
    let store = match &a.dir {
        Some(d) => InstanceStore::with_snapshot(d).map_err(|e| fail(Category::Io, e))?,
        None => InstanceStore::new(),
    };
    let server = stub_serve_on(store, a.listen).map_err(|e| fail(Category::Network, e))?;
    println!("serving {}", server.url());
    server.wait();
    Ok(())
}
