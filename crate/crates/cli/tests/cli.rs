use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lorenz-code"));
    c.env_remove("LORENZ_CODE_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn transcript_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/transcripts")
}

fn lcg_file(dir: &Path, n: usize) -> PathBuf {
    let mut x = 1u64;
    let bytes: Vec<u8> = (0..n)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 56) as u8
        })
        .collect();
    let path = dir.join("lcg.bin");
    std::fs::write(&path, bytes).unwrap();
    path
}

/// Runs each command and compares standard output with its stored
/// transcript. `UPDATE_TRANSCRIPTS=1` rewrites them.
#[test]
fn golden_transcripts() {
    let tmp = tempfile::tempdir().unwrap();
    let lcg = lcg_file(tmp.path(), 8192);
    let lcg = lcg.to_str().unwrap();
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("hash_zero", vec!["hash", "--key", "0000000000000000"]),
        ("hash_ascii", vec!["hash", "--key", "ABCDEFGH"]),
        ("keystream", vec!["keystream", "--key", "Lorenz63", "--blocks", "3"]),
        ("integrate", vec!["integrate", "--prec", "64", "--h", "0.01", "--t", "0.5", "--every", "10"]),
        ("mect", vec!["mect", "--prec", "24", "--prec", "53", "--h", "0.01"]),
        ("extrapolate", vec!["extrapolate", "--anchor", "24:17", "--anchor", "53:35", "--target", "256"]),
        ("fit_error_law", vec!["fit-error-law", "--prec", "24", "--t", "5"]),
        ("randtest", vec!["randtest", "--in", lcg, "--format", "csv"]),
        ("collide", vec!["collide", "--n", "4", "--seed", "9", "--format", "csv"]),
    ];
    let update = std::env::var_os("UPDATE_TRANSCRIPTS").is_some();
    for (name, args) in cases {
        let o = run(&args);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let path = transcript_dir().join(format!("{name}.out"));
        if update {
            std::fs::write(&path, &o.stdout).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        assert_eq!(stdout(&o), want, "{name}");
        // a second run is identical
        assert_eq!(run(&args).stdout, o.stdout, "{name}");
    }
}

#[test]
fn hash_matches_library_golden() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/hash8_zero_key.hex");
    let o = run(&["hash", "--key", "0000000000000000"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), std::fs::read_to_string(golden).unwrap());
    let out = stdout(&o);
    assert_eq!(out.trim().len(), 64);
    assert!(out.trim().bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)));
}

#[test]
fn key_formats() {
    let hex = run(&["hash", "--key", "4142434445464748"]);
    let ascii = run(&["hash", "--key", "ABCDEFGH", "--key-format", "ascii"]);
    assert_eq!(hex.stdout, ascii.stdout);
    let forced = run(&["hash", "--key", "ABCDEFGH", "--key-format", "hex"]);
    assert_eq!(forced.status.code(), Some(1));
    assert!(stderr(&forced).starts_with("error[domain]: "));
    let short = run(&["hash", "--key", "abc"]);
    assert_eq!(short.status.code(), Some(1));
    assert_eq!(stderr(&short).lines().count(), 1);
}

#[test]
fn encrypt_decrypt_files() {
    let tmp = tempfile::tempdir().unwrap();
    let plain = tmp.path().join("plain.txt");
    let sealed = tmp.path().join("sealed.lzc");
    let back = tmp.path().join("back.txt");
    std::fs::write(&plain, b"Forty-one bytes of plaintext, in a file.\n").unwrap();
    let p = |x: &PathBuf| x.to_str().unwrap().to_string();
    let enc = run(&["encrypt", "--key", "k3y-k3y!", "--in", &p(&plain), "--out", &p(&sealed)]);
    assert_eq!(enc.status.code(), Some(0), "{}", stderr(&enc));
    let bytes = std::fs::read(&sealed).unwrap();
    assert_eq!(&bytes[..5], b"LZC1\x01");
    assert_eq!(&bytes[5..13], &41u64.to_be_bytes());
    assert_eq!(bytes.len(), 13 + 64);
    let dec = run(&["decrypt", "--key", "k3y-k3y!", "--in", &p(&sealed), "--out", &p(&back)]);
    assert_eq!(dec.status.code(), Some(0), "{}", stderr(&dec));
    assert_eq!(std::fs::read(&back).unwrap(), std::fs::read(&plain).unwrap());
}

#[test]
fn format_and_io_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.lzc");
    std::fs::write(&bad, b"XXXX\x01\0\0\0\0\0\0\0\0").unwrap();
    let out = tmp.path().join("out");
    let o = run(&["decrypt", "--key", "0000000000000000", "--in", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad magic"), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);
    std::fs::write(&bad, b"LZC1\x07\0\0\0\0\0\0\0\0").unwrap();
    let o = run(&["decrypt", "--key", "0000000000000000", "--in", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unsupported version"));
    let missing = tmp.path().join("missing");
    let o = run(&["encrypt", "--key", "0000000000000000", "--in", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[io]: "));
}

#[test]
fn domain_and_usage_errors_exit_1() {
    for args in [
        vec!["hash", "--key", "0000000000000000", "--prec", "128"],
        vec!["hash", "--key", "0000000000000000", "--t", "150"],
        vec!["hash", "--key", "0000000000000000", "--gamma", "20"],
        vec!["hash", "--key", "0000000000000000", "--h", "abc"],
        vec!["hash", "--key", "0000000000000000", "--no-such-flag"],
        vec!["mect", "--prec", "24", "--t-max", "1"],
        vec!["avalanche", "--trials", "10"],
        vec!["extrapolate", "--anchor", "24:17"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert_eq!(stderr(&o).lines().count(), 1, "{args:?}");
        assert!(stderr(&o).starts_with("error["), "{args:?}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("base.conf");
    std::fs::write(&cfg, "# shifted base\ngamma = 30\nt = 210\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let key = "0000000000000000";
    let by_flags = run(&["hash", "--key", key, "--gamma", "30", "--t", "210"]);
    let by_file = run(&["hash", "--key", key, "--config", cfg]);
    let by_env = bin().args(["hash", "--key", key]).env("LORENZ_CODE_CONFIG", cfg).output().unwrap();
    assert_eq!(by_file.stdout, by_flags.stdout);
    assert_eq!(by_env.stdout, by_flags.stdout);
    let default = run(&["hash", "--key", key]);
    assert_ne!(default.stdout, by_file.stdout);
    // flags win over the file
    let mixed = run(&["hash", "--key", key, "--config", cfg, "--gamma", "28", "--t", "200"]);
    assert_eq!(mixed.stdout, default.stdout);
    std::fs::write(tmp.path().join("broken.conf"), "gamma: 30\n").unwrap();
    let o = run(&["hash", "--key", key, "--config", tmp.path().join("broken.conf").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn keystream_raw_output() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("ks.bin");
    let o = run(&["keystream", "--key", "Lorenz63", "--blocks", "2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let raw = std::fs::read(&path).unwrap();
    let hex_out = stdout(&run(&["keystream", "--key", "Lorenz63", "--blocks", "2"]));
    assert_eq!(hex::encode(&raw), hex_out.replace('\n', ""));
}

#[test]
fn help_documents_units() {
    let top = stdout(&run(&["--help"]));
    for sub in ["integrate", "mect", "fit-error-law", "extrapolate", "hash", "keystream", "encrypt", "decrypt", "randtest", "collide", "avalanche"] {
        assert!(top.contains(sub), "{sub}");
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        let text = stdout(&o);
        if text.contains("--h ") || text.contains("--t ") {
            assert!(text.contains("nondimensional time"), "{sub}");
        }
        if text.contains("--prec") {
            assert!(text.contains("bits"), "{sub}");
        }
    }
}
