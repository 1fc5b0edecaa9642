//! Stable content-hash identifiers.
//!
//! Ids are truncated SHA-256 digests so that enumeration output, rendered
//! documents and score stores are diff-able and rerunnable.

use sha2::{Digest, Sha256};

/// 16-hex-char content hash.
pub fn content_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..8])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_short() {
        assert_eq!(content_hash(b"abc"), content_hash(b"abc"));
        assert_ne!(content_hash(b"abc"), content_hash(b"abd"));
        assert_eq!(content_hash(b"abc").len(), 16);
    }
}
