use sha2::{Digest, Sha256};

/// SHA-256 of the empty byte string, hex encoded.
pub const EMPTY_DIGEST: &str = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

/// Hex-encoded SHA-256 of `bytes`.
///
/// Used as the response-cache key, the image store key and the isolation
/// witness carried by every [`Description`](crate::task::Description).
pub fn content_digest(bytes: &[u8]) -> String {
    let out = Sha256::digest(bytes);
    hex::encode(&out[..])
}

/// Digest of the canonical JSON encoding of `value`.
pub(crate) fn json_digest<T: serde::Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("in-memory JSON encoding cannot fail");
    content_digest(&bytes)
}

/// First eight bytes of a digest of `parts`, read as a little-endian integer.
///
/// Seeds per-item RNG streams so a draw depends only on the item, never on
/// call order.
pub(crate) fn seed_from(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let out = hasher.finalize();
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&out[..8]);
    u64::from_le_bytes(buf)
}
