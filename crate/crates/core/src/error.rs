use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Raw sequence ingestion failed at a specific location.
    #[error("ingestion error at frame {frame}, plane {plane}, byte offset {offset}: {msg}")]
    Ingest {
        frame: usize,
        plane: usize,
        offset: usize,
        msg: String,
    },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("encoder error: {0}")]
    Encode(String),

    /// Bitstream decoding failed; `bit_offset` is where the reader stood.
    #[error("decode error at bit {bit_offset}: {msg}")]
    Decode { bit_offset: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn decode(bit_offset: usize, msg: impl Into<String>) -> Self {
        Error::Decode {
            bit_offset,
            msg: msg.into(),
        }
    }
}
