use accucheck::checker::spec::load_spec_file;
use accucheck::corpus::files;
use accucheck::lang::parse_checked;
use std::path::PathBuf;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Set ACCUCHECK_BLESS=1 to rewrite the shipped files from the expander.
#[test]
fn shipped_corpus_matches_the_expander() {
    let bless = std::env::var_os("ACCUCHECK_BLESS").is_some();
    let mut stale = Vec::new();
    for (name, text) in files() {
        let path = dir().join(&name);
        if bless {
            std::fs::write(&path, &text).unwrap();
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(text.as_str()) {
            stale.push(name);
        }
    }
    assert!(stale.is_empty(), "stale corpus files (rerun with ACCUCHECK_BLESS=1): {stale:?}");
}

#[test]
fn every_program_parses() {
    for e in std::fs::read_dir(dir()).unwrap() {
        let path = e.unwrap().path();
        if path.extension().is_some_and(|x| x == "dpw") {
            let src = std::fs::read_to_string(&path).unwrap();
            parse_checked(&src).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
        }
    }
}

#[test]
fn every_spec_loads() {
    let mut n = 0;
    for e in std::fs::read_dir(dir()).unwrap() {
        let path = e.unwrap().path();
        if path.extension().is_some_and(|x| x == "spec") {
            load_spec_file(&path).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 20, "{n}");
}
