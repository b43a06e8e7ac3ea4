//! Command-line front end and HTTP service for the tablature comparison
//! engine in `tabcompare_core`.

pub mod cli;
pub mod server;
pub mod store;

use sha2::{Digest, Sha256};

/// Content address of an uploaded file or a built document: lowercase
/// hex SHA-256 of the raw bytes.
pub fn content_id(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Whether `id` looks like something [`content_id`] could have produced.
pub fn is_content_id(id: &str) -> bool {
    id.len() == 64 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}
