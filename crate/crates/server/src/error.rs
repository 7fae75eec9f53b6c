use std::io;

use commonsense_core::error::{ProfileError, RepositoryError};
use thiserror::Error;

use crate::xml::Fault;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("malformed XML: {0}")]
    Xml(#[from] quick_xml::Error),
    #[error("unexpected XML structure: {0}")]
    Shape(String),
}

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("no free port in {start}..={end}")]
    PoolExhausted { start: u16, end: u16 },
    #[error("bad port range `{0}`, expected START-END")]
    BadPortRange(String),
    #[error("network build failed: {0}")]
    Build(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Repository(#[from] RepositoryError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl From<ServerError> for Fault {
    fn from(e: ServerError) -> Self {
        match e {
            ServerError::Profile(_) => Fault::bad_params(e.to_string()),
            other => Fault::server(other.to_string()),
        }
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport: {0}")]
    Transport(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{0}")]
    Fault(Fault),
    #[error("unexpected response shape: {0}")]
    Shape(String),
}
