// SPDX-License-Identifier: Apache-2.0

//! Frozen encodings of the fixture corpus. `IOTSSI_BLESS=1` rewrites them.

use std::fs;
use std::path::PathBuf;

use iotssi::codec::{decode_binary, decode_canonical_text, write_corpus};
use iotssi::fixtures::{build_fixture_corpus, FixtureWorld};
use iotssi::model::VerifiableCredential;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn blessing() -> bool {
    std::env::var_os("IOTSSI_BLESS").is_some()
}

#[test]
fn corpus_encodings_are_frozen() {
    let corpus = build_fixture_corpus(&FixtureWorld::new());
    if blessing() {
        write_corpus(&golden_dir(), &corpus).unwrap();
    }
    let fresh = tempfile::tempdir().unwrap();
    write_corpus(fresh.path(), &corpus).unwrap();
    let mut names: Vec<String> = corpus
        .iter()
        .flat_map(|(n, _)| [format!("{n}.txt.json"), format!("{n}.bin")])
        .collect();
    names.push("sizes.csv".into());
    for name in names {
        let expected = fs::read(golden_dir().join(&name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let actual = fs::read(fresh.path().join(&name)).unwrap();
        assert!(
            expected == actual,
            "{name} drifted; rerun with IOTSSI_BLESS=1 if intended"
        );
    }
}

#[test]
fn frozen_files_decode_to_the_corpus() {
    for (name, vc) in build_fixture_corpus(&FixtureWorld::new()) {
        let text = fs::read(golden_dir().join(format!("{name}.txt.json"))).unwrap();
        let binary = fs::read(golden_dir().join(format!("{name}.bin"))).unwrap();
        assert_eq!(
            decode_canonical_text::<VerifiableCredential>(&text).unwrap(),
            vc,
            "{name}"
        );
        assert_eq!(decode_binary::<VerifiableCredential>(&binary).unwrap(), vc, "{name}");
    }
}

#[test]
fn static_identity_signing_input_is_frozen() {
    let corpus = build_fixture_corpus(&FixtureWorld::new());
    let vc = &corpus.iter().find(|(n, _)| n == "static-identity").unwrap().1;
    let input = vc.signing_input();
    let path = golden_dir().join("static-identity.signing-input.json");
    if blessing() {
        fs::write(&path, &input).unwrap();
    }
    assert!(input.starts_with(br#"{"@context""#));
    assert!(!String::from_utf8_lossy(&input).contains("\"proof\""));
    assert_eq!(fs::read(&path).unwrap(), input);
}
