// SPDX-License-Identifier: Apache-2.0

//! Canonical text and deterministic binary encodings.
//!
//! Canonical text is JSON with object keys sorted by their UTF-8 bytes and no
//! insignificant whitespace. The binary form is CBOR restricted to the core
//! deterministic profile: shortest-form heads, definite lengths, and map keys
//! sorted by the bytewise order of their encodings. The decoder rejects any
//! input that is not already in that form.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use ciborium::Value;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{DidDocument, VerifiableCredential};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingKind {
    CanonicalText,
    DeterministicBinary,
}

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("text decoding failed: {0}")]
    Text(#[from] serde_json::Error),
    #[error("binary decoding failed: {0}")]
    Binary(String),
    #[error("binary input is not in deterministic form")]
    NonCanonical,
    #[error("{0} trailing bytes after the encoded item")]
    TrailingBytes(usize),
}

pub fn encode_canonical_text<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    // serde_json's map is a BTreeMap here (no `preserve_order`), so converting
    // through `Value` sorts every object's keys.
    let tree = serde_json::to_value(value).expect("model types have string map keys");
    serde_json::to_vec(&tree).expect("JSON values always serialize")
}

pub fn decode_canonical_text<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, CodecError> {
    Ok(serde_json::from_slice(bytes)?)
}

fn cbor_bytes(value: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    ciborium::into_writer(value, &mut out).expect("writing into a Vec cannot fail");
    out
}

fn canonicalize(value: Value) -> Value {
    match value {
        Value::Map(entries) => {
            let mut keyed: Vec<(Vec<u8>, Value, Value)> = entries
                .into_iter()
                .map(|(k, v)| {
                    let k = canonicalize(k);
                    (cbor_bytes(&k), k, canonicalize(v))
                })
                .collect();
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Map(keyed.into_iter().map(|(_, k, v)| (k, v)).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Tag(tag, inner) => Value::Tag(tag, Box::new(canonicalize(*inner))),
        other => other,
    }
}

pub fn encode_binary<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let tree = Value::serialized(value).expect("model types serialize to CBOR values");
    cbor_bytes(&canonicalize(tree))
}

/// Decode `bytes`, accepting only the exact encoding [`encode_binary`]
/// produces for the decoded value. Alternative shapes that deserialize to
/// the same value, such as an integer array in place of a byte string, are
/// rejected.
pub fn decode_binary<T: Serialize + DeserializeOwned>(bytes: &[u8]) -> Result<T, CodecError> {
    let mut reader = bytes;
    let tree: Value = ciborium::from_reader(&mut reader).map_err(|e| CodecError::Binary(e.to_string()))?;
    if !reader.is_empty() {
        return Err(CodecError::TrailingBytes(reader.len()));
    }
    let value: T = tree.deserialized().map_err(|e| CodecError::Binary(e.to_string()))?;
    if encode_binary(&value) != bytes {
        return Err(CodecError::NonCanonical);
    }
    Ok(value)
}

pub fn encode<T: Serialize + ?Sized>(value: &T, kind: EncodingKind) -> Vec<u8> {
    match kind {
        EncodingKind::CanonicalText => encode_canonical_text(value),
        EncodingKind::DeterministicBinary => encode_binary(value),
    }
}

pub fn decode<T: Serialize + DeserializeOwned>(bytes: &[u8], kind: EncodingKind) -> Result<T, CodecError> {
    match kind {
        EncodingKind::CanonicalText => decode_canonical_text(bytes),
        EncodingKind::DeterministicBinary => decode_binary(bytes),
    }
}

/// Canonical text of the credential with its proofs removed.
pub fn signing_input(vc: &VerifiableCredential) -> Vec<u8> {
    if vc.proofs.is_empty() {
        encode_canonical_text(vc)
    } else {
        encode_canonical_text(&vc.unsigned())
    }
}

/// First 16 hex digits of SHA-256, used for derived identifiers.
pub fn short_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Values that can be measured by [`size_report`].
pub trait Measurable: Serialize {
    fn subject_id(&self) -> String;
}

impl Measurable for VerifiableCredential {
    fn subject_id(&self) -> String {
        self.id.clone()
    }
}

impl Measurable for DidDocument {
    fn subject_id(&self) -> String {
        self.id.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub subject_id: String,
    pub text_bytes: usize,
    pub binary_bytes: usize,
}

impl SizeReport {
    /// Text size over binary size.
    pub fn ratio(&self) -> f64 {
        self.text_bytes as f64 / self.binary_bytes as f64
    }
}

impl fmt::Display for SizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} text={} binary={} ratio={:.4}",
            self.subject_id,
            self.text_bytes,
            self.binary_bytes,
            self.ratio()
        )
    }
}

pub fn size_report<T: Measurable + ?Sized>(value: &T) -> SizeReport {
    SizeReport {
        subject_id: value.subject_id(),
        text_bytes: encode_canonical_text(value).len(),
        binary_bytes: encode_binary(value).len(),
    }
}

/// Write `<name>.txt.json`, `<name>.bin` and `sizes.csv` for each entry.
pub fn write_corpus<T: Measurable>(dir: &Path, entries: &[(String, T)]) -> io::Result<Vec<SizeReport>> {
    fs::create_dir_all(dir)?;
    let mut sizes = csv::Writer::from_path(dir.join("sizes.csv"))?;
    sizes.write_record(["name", "text_bytes", "binary_bytes", "ratio"])?;
    let mut reports = Vec::with_capacity(entries.len());
    for (name, value) in entries {
        let text = encode_canonical_text(value);
        let binary = encode_binary(value);
        fs::write(dir.join(format!("{name}.txt.json")), &text)?;
        fs::write(dir.join(format!("{name}.bin")), &binary)?;
        let report = size_report(value);
        sizes.write_record([
            name.clone(),
            report.text_bytes.to_string(),
            report.binary_bytes.to_string(),
            format!("{:.4}", report.ratio()),
        ])?;
        reports.push(report);
    }
    sizes.flush()?;
    Ok(reports)
}
