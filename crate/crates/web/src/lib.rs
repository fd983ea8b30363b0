//! DICOMweb (STOW-RS, WADO-RS, QIDO-RS) client and an in-memory stub
//! archive for exercising it.

mod client;
pub mod json;
pub mod multipart;
pub mod server;

pub use client::{Credentials, InstanceRef, Level, Query, WebClient, WebError};
pub use server::{stub_serve, stub_serve_on, InstanceStore, ServerError, StubServer};
