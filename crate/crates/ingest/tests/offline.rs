use std::path::PathBuf;

use dxasp_core::lang::{parse_atom, parse_program, Rule};
use dxasp_ingest::{translate, FixtureClient, KbStore, PromptTemplate, TranslationJob};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(kb_dir: &std::path::Path) -> Vec<u8> {
    let client = FixtureClient::from_jsonl(fixture("pneumonia_response.jsonl")).unwrap();
    let text = std::fs::read_to_string(fixture("pneumonia.txt")).unwrap();
    let mut job = TranslationJob::new("Pneumonia", text, PromptTemplate::structured()).unwrap();
    translate(&client, &mut job, 3).unwrap();
    let saved = KbStore::new(kb_dir).save(&job).unwrap();
    std::fs::read(saved.kb_path).unwrap()
}

#[test]
fn pneumonia_fixture_translates() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = run(dir.path());
    let kb = parse_program(std::str::from_utf8(&bytes).unwrap()).unwrap();
    let link = Rule::fact(parse_atom("linked_symptom(cough_with_mucus, wheezing)").unwrap());
    assert!(kb.rules.contains(&link));
    let target = parse_atom("diagnosis(pneumonia)").unwrap();
    let n = kb
        .rules
        .iter()
        .filter(|r| r.head() == Some(&target) && !r.body().is_empty())
        .count();
    assert!(n >= 2, "{n}");
    assert_eq!(kb.rules.iter().filter(|r| r.is_choice()).count(), 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run(a.path());
    assert_eq!(run(a.path()), first);
    assert_eq!(run(b.path()), first);
    let log = |d: &std::path::Path| std::fs::read(d.join("pneumonia.responses.jsonl")).unwrap();
    assert_eq!(log(a.path()), log(b.path()));
}
