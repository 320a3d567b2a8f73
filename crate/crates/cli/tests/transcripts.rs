// SPDX-License-Identifier: Apache-2.0

//! Golden command transcripts. Regenerate with `IOTSSI_BLESS=1`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use iotssi::codec::encode_canonical_text;
use iotssi::lifecycle::{verify_credential, verify_presentation};
use iotssi::model::{Did, Timestamp, VerifiablePresentation};
use iotssi::registry::FileRegistry;

const CLOCK: &str = "2023-04-01T10:30:00Z";

const OWNERSHIP_BY_OWNER: &str =
    r#"{"deviceId":"did:iot:device:123456789","owner":"did:iot:user:123456789","purchasedDate":"2023-04-01"}"#;
const BROKEN_SUBJECT: &str = r#"{"deviceId":"did:iot:device:123456789","colour":"blue"}"#;

struct Session {
    dir: tempfile::TempDir,
    transcript: String,
}

impl Session {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("ownership-subject.json"), OWNERSHIP_BY_OWNER).unwrap();
        fs::write(dir.path().join("broken-subject.json"), BROKEN_SUBJECT).unwrap();
        Self {
            dir,
            transcript: String::new(),
        }
    }

    fn work(&self) -> &Path {
        self.dir.path()
    }

    fn registry(&self) -> PathBuf {
        self.work().join("registry")
    }

    /// Run one command line, append it to the transcript, return its output.
    fn run(&mut self, line: &str) -> (u8, String) {
        let args: Vec<&str> = line.split_whitespace().collect();
        let out = Command::new(env!("CARGO_BIN_EXE_iotssi"))
            .args(&args)
            .arg("--clock")
            .arg(CLOCK)
            .env("IOTSSI_REGISTRY", self.registry())
            .current_dir(self.work())
            .output()
            .unwrap();
        let code = out.status.code().unwrap() as u8;
        let work = self.work().display().to_string();
        let stdout = String::from_utf8(out.stdout).unwrap().replace(&work, "$WORK");
        let stderr = String::from_utf8(out.stderr).unwrap().replace(&work, "$WORK");
        self.transcript += &format!("$ iotssi {line}\n{stdout}");
        for l in stderr.lines() {
            self.transcript += &format!("! {l}\n");
        }
        self.transcript += &format!("[exit {code}]\n\n");
        (code, stdout)
    }

    fn check(self, name: &str) {
        let golden = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/transcripts")
            .join(format!("{name}.txt"));
        if std::env::var_os("IOTSSI_BLESS").is_some() {
            fs::write(&golden, &self.transcript).unwrap();
            return;
        }
        let expected = fs::read_to_string(&golden).unwrap_or_default();
        assert!(
            expected == self.transcript,
            "transcript {name} differs from {}\n--- actual ---\n{}",
            golden.display(),
            self.transcript
        );
    }
}

fn installed() -> Session {
    let mut s = Session::new();
    let (code, _) = s.run("fixtures install --keys keys");
    assert_eq!(code, 0);
    s
}

#[test]
fn credential_lifecycle() {
    let mut s = installed();
    s.transcript.clear();
    assert_eq!(s.run("did resolve did:iot:device:123456789").0, 0);
    assert_eq!(s.run("vc verify did:iot:device:vc:own:123456789").0, 0);
    let (code, _) = s.run(
        "vc issue --kind ownership --issuer-kind owner --trust self-issued --scope individual \
         --validity long-term --subject ownership-subject.json --key keys/owner.json --valid-until 2030-01-01T00:00:00Z",
    );
    assert_eq!(code, 2);
    assert!(s.transcript.contains("\n! ownership must not be self-issued\n"));
    assert_eq!(
        s.run("vc revoke did:iot:device:vc:comm:123456789 --key keys/manufacturer.json --reason decommissioned")
            .0,
        0
    );
    let (code, out) = s.run("vc verify did:iot:device:vc:comm:123456789");
    assert_eq!(code, 3);
    assert!(out.contains("FAIL status"));
    assert_eq!(out.matches("FAIL").count(), 1);
    assert_eq!(
        s.run("vc revoke did:iot:device:vc:cap:123456789 --key keys/owner.json")
            .0,
        1
    );
    assert_eq!(s.run("vc status did:iot:device:vc:cap:123456789").0, 0);
    s.check("credential_lifecycle");
}

#[test]
fn input_errors() {
    let mut s = installed();
    s.transcript.clear();
    assert_eq!(s.run("vc status urn:iotvc:unknown").0, 4);
    assert_eq!(s.run("did resolve did:iot:device:000").0, 4);
    assert_eq!(
        s.run(
            "vc issue --kind ownership --issuer-kind manufacturer --trust verified --scope individual \
             --validity long-term --subject broken-subject.json --key keys/manufacturer.json"
        )
        .0,
        5
    );
    assert_eq!(s.run("keygen --seed 0011").0, 5);
    assert_eq!(s.run("policy explain --kind firmware").0, 5);
    assert_eq!(s.run("scenario run --strategy autonomous --script reboot").0, 5);
    s.check("input_errors");
}

#[test]
fn ownership_transfer() {
    let mut s = installed();
    s.transcript.clear();
    let start = "vc transfer-sign --credential did:iot:device:vc:own:123456789 --buyer did:iot:user:987654321 \
                 --key keys/owner.json --out seller.json";
    assert_eq!(s.run(start).0, 0);
    assert_eq!(
        s.run("vc transfer --request seller.json --key keys/manufacturer.json")
            .0,
        1
    );
    assert_eq!(
        s.run("vc transfer-sign --request seller.json --key keys/buyer.json --out both.json")
            .0,
        0
    );
    assert_eq!(
        s.run("vc transfer --request both.json --key keys/manufacturer.json --out new.json")
            .0,
        0
    );
    assert_eq!(
        s.run("vc transfer --request both.json --key keys/manufacturer.json").0,
        1
    );
    assert_eq!(s.run("vc status did:iot:device:vc:own:123456789").0, 0);
    let (code, out) = s.run("vc verify new.json");
    assert_eq!(code, 0);
    assert!(out.contains("3 proof(s) verified"));
    s.check("ownership_transfer");
}

#[test]
fn presentations() {
    let mut s = installed();
    s.transcript.clear();
    let create = "vp create --credential did:iot:device:vc:123456789 --credential did:iot:device:vc:config:123456789 \
                  --holder did:iot:device:123456789 --challenge 5eed --audience did:iot:verifier:123456789 \
                  --key keys/owner.json --out vp.json";
    assert_eq!(s.run(create).0, 0);
    assert_eq!(
        s.run("vp verify vp.json --challenge 5eed --audience did:iot:verifier:123456789")
            .0,
        0
    );
    assert_eq!(
        s.run("vp verify vp.json --challenge 5eee --audience did:iot:verifier:123456789")
            .0,
        3
    );
    assert_eq!(
        s.run("vp verify vp.json --challenge 5eed --audience did:iot:user:987654321")
            .0,
        3
    );
    let stranger = "vp create --credential did:iot:device:vc:123456789 --holder did:iot:device:123456789 \
                    --challenge 5eed --audience did:iot:verifier:123456789 --key keys/buyer.json --out stranger.json";
    assert_eq!(s.run(stranger).0, 0);
    assert_eq!(
        s.run("vp verify stranger.json --challenge 5eed --audience did:iot:verifier:123456789")
            .0,
        3
    );
    s.check("presentations");
}

#[test]
fn keys_and_documents() {
    let mut s = Session::new();
    let seed = "0101010101010101010101010101010101010101010101010101010101010101";
    let seed2 = "0202020202020202020202020202020202020202020202020202020202020202";
    assert_eq!(
        s.run(&format!(
            "keygen --seed {seed} --did did:iot:user:alice --out alice.json"
        ))
        .0,
        0
    );
    assert_eq!(
        s.run(&format!(
            "keygen --seed {seed2} --did did:iot:device:lamp --out lamp.json"
        ))
        .0,
        0
    );
    assert_eq!(
        s.run("did create --key alice.json --service wallet,HttpEndpoint,alice.example")
            .0,
        0
    );
    let lamp = "did create --key lamp.json --controller did:iot:user:alice --controller-key alice.json \
                --service mqtt,MqttEndpoint,broker.example --out lamp-doc.json";
    assert_eq!(s.run(lamp).0, 0);
    assert_eq!(s.run("did resolve did:iot:device:lamp --format canonical-text").0, 0);
    let seed3 = "0303030303030303030303030303030303030303030303030303030303030303";
    assert_eq!(
        s.run(&format!(
            "keygen --seed {seed3} --did did:iot:user:mallory --out mallory.json"
        ))
        .0,
        0
    );
    assert_eq!(s.run("did update --document lamp-doc.json --key mallory.json").0, 1);
    assert_eq!(s.run("did update --document lamp-doc.json --key lamp.json").0, 0);
    assert_eq!(s.run("did update --document lamp-doc.json --key alice.json").0, 0);
    s.check("keys_and_documents");
}

#[test]
fn reports() {
    let mut s = Session::new();
    let (code, out) = s.run("size report --corpus");
    assert_eq!(code, 0);
    for line in out.lines().skip(1) {
        let cells: Vec<usize> = line
            .split_whitespace()
            .skip(1)
            .take(2)
            .map(|c| c.parse().unwrap())
            .collect();
        assert!(cells[1] < cells[0], "{line}");
    }
    assert_eq!(out.lines().count(), 8);
    assert_eq!(s.run("policy explain --kind ownership").0, 0);
    assert_eq!(s.run("policy enumerate --kind static-identity").0, 0);
    assert_eq!(
        s.run("policy enumerate --kind configuration --trusted-hardware --format canonical-text")
            .0,
        0
    );
    assert_eq!(s.run("policy export --out policy.json").0, 0);
    let exported: iotssi::policy::PolicyTable =
        iotssi::codec::decode_canonical_text(&fs::read(s.work().join("policy.json")).unwrap()).unwrap();
    assert_eq!(exported, iotssi::policy::policy_table());
    s.check("reports");
}

#[test]
fn scenarios() {
    let mut s = Session::new();
    for strategy in ["autonomous", "edge-proxy", "owner-wallet"] {
        let (code, out) = s.run(&format!("scenario run --strategy {strategy} --script present-identity"));
        assert_eq!(code, 0);
        assert!(out.contains("verdict: Accept"));
    }
    assert_eq!(
        s.run("scenario run --strategy owner-wallet --script onboard-device --link lora-like")
            .0,
        0
    );
    assert_eq!(
        s.run("scenario run --strategy edge-proxy --script transfer-ownership --csv metrics.csv")
            .0,
        0
    );
    let csv = fs::read_to_string(s.work().join("metrics.csv")).unwrap();
    assert!(csv.starts_with("strategy,participant,messages,bytes,fragments,verdict\n"));
    s.check("scenarios");
}

/// The CLI's canonical-text reports equal the library's own.
#[test]
fn reports_match_library() {
    let mut s = installed();
    s.run("vc revoke did:iot:device:vc:dyn:123456789 --key keys/manufacturer.json");
    let create = "vp create --credential did:iot:device:vc:onboard:123456789 --holder did:iot:device:123456789 \
                  --challenge 01 --audience did:iot:provider:123456789 --key keys/device.json --out vp.json";
    s.run(create);
    let clock = Timestamp::parse(CLOCK).unwrap();
    let registry = FileRegistry::open(s.registry()).unwrap();
    for id in ["did:iot:device:vc:123456789", "did:iot:device:vc:dyn:123456789"] {
        let (_, out) = s.run(&format!("vc verify {id} --format canonical-text"));
        let vc = iotssi::lifecycle::DirectoryStore::open(s.registry().join("credentials")).unwrap();
        let vc = iotssi::lifecycle::CredentialStore::get(&vc, id).unwrap();
        let expected = encode_canonical_text(&verify_credential(&vc, clock, &registry));
        assert_eq!(out.trim_end().as_bytes(), &expected[..]);
    }
    let (_, out) =
        s.run("vp verify vp.json --challenge 01 --audience did:iot:provider:123456789 --format canonical-text");
    let vp: VerifiablePresentation =
        iotssi::codec::decode_canonical_text(&fs::read(s.work().join("vp.json")).unwrap()).unwrap();
    let audience: Did = "did:iot:provider:123456789".parse().unwrap();
    let expected = encode_canonical_text(&verify_presentation(&vp, &[1], &audience, clock, &registry));
    assert_eq!(out.trim_end().as_bytes(), &expected[..]);
}
