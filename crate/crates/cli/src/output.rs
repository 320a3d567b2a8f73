// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::Context as _;
use iotssi::codec::{decode_canonical_text, encode_canonical_text};
use iotssi::fixtures::SIGNING_FRAGMENT;
use iotssi::model::{Did, DidUrl, KeyPair, Signer, SEED_LEN};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Format, KeyArgs};

#[derive(Debug)]
pub enum Failure {
    NotFound(String),
    Malformed(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::NotFound(what) => write!(f, "not found: {what}"),
            Failure::Malformed(what) => write!(f, "malformed input: {what}"),
        }
    }
}

impl std::error::Error for Failure {}

/// A command's result in both output formats.
pub struct Output {
    canonical: Vec<u8>,
    table: String,
}

impl Output {
    pub fn new<T: Serialize + ?Sized>(value: &T, table: String) -> Self {
        Self {
            canonical: encode_canonical_text(value),
            table,
        }
    }

    pub fn render(&self, format: Format) -> String {
        let mut text = match format {
            Format::Table => self.table.clone(),
            Format::CanonicalText => String::from_utf8(self.canonical.clone()).expect("canonical text is UTF-8"),
        };
        if !text.ends_with('\n') {
            text.push('\n');
        }
        text
    }
}

pub struct Outcome {
    pub output: Output,
    pub code: u8,
}

impl Outcome {
    pub fn ok(output: Output) -> Self {
        Self { output, code: 0 }
    }
}

/// On-disk key material. The seed is secret.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct KeyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub did: Option<Did>,
    pub seed: String,
    pub public_key_base58: String,
    pub agreement_public_key_base58: String,
}

impl KeyFile {
    pub fn new(keys: &KeyPair, did: Option<Did>) -> Self {
        Self {
            did,
            seed: hex::encode(keys.seed()),
            public_key_base58: base58(&keys.public_key()),
            agreement_public_key_base58: base58(&keys.agreement_public_key()),
        }
    }

    pub fn keys(&self) -> anyhow::Result<KeyPair> {
        let seed = hex::decode(&self.seed).map_err(|e| Failure::Malformed(format!("key seed: {e}")))?;
        Ok(KeyPair::from_seed(&seed)?)
    }

    pub fn did(&self) -> anyhow::Result<&Did> {
        self.did
            .as_ref()
            .ok_or_else(|| Failure::Malformed("key file names no DID".into()).into())
    }
}

fn base58(bytes: &[u8]) -> String {
    bs58::encode(bytes).into_string()
}

pub fn parse_seed(text: &str) -> anyhow::Result<KeyPair> {
    let seed = hex::decode(text).map_err(|e| Failure::Malformed(format!("seed: {e}")))?;
    if seed.len() != SEED_LEN {
        return Err(Failure::Malformed(format!("seed must be {SEED_LEN} bytes, got {}", seed.len())).into());
    }
    Ok(KeyPair::from_seed(&seed)?)
}

pub fn parse_hex(what: &str, text: &str) -> anyhow::Result<Vec<u8>> {
    Ok(hex::decode(text).map_err(|e| Failure::Malformed(format!("{what}: {e}")))?)
}

pub fn read_key(args: &KeyArgs) -> anyhow::Result<(KeyFile, Signer)> {
    let file: KeyFile = read_canonical(&args.key)?;
    let keys = file.keys()?;
    let method = match &args.method {
        Some(method) => method.clone(),
        None => DidUrl::new(file.did()?.clone(), SIGNING_FRAGMENT)?,
    };
    Ok((file, Signer::new(method, keys)))
}

pub fn read_canonical<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let bytes = fs::read(path).map_err(|e| Failure::NotFound(format!("{}: {e}", path.display())))?;
    decode_canonical_text(&bytes).with_context(|| format!("reading {}", path.display()))
}

pub fn write_canonical<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut bytes = encode_canonical_text(value);
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Fixed-width table with a header row.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_owned() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}
