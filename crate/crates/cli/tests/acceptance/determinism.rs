use std::collections::BTreeMap;
use std::process::Command;

use antsreview_core::scenario;

use crate::util::{corpus, corpus_dir, ensure};
use crate::Check;

fn replay(text: &str) -> Result<(String, String), String> {
    let (env, report) = scenario::run_text(text).map_err(|e| e.to_string())?;
    ensure!(report.failures.is_empty(), "assertions failed: {:?}", report.failures);
    let digest = env.state_digest().to_string();
    Ok((scenario::render_log(&report.events, &env.state_digest()), digest))
}

fn binary_log(bin: &str, path: &std::path::Path) -> Result<String, String> {
    let out = Command::new(bin).arg("run").arg(path).output().map_err(|e| format!("{bin}: {e}"))?;
    ensure!(out.status.success(), "{bin} run {} failed", path.display());
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

pub fn run() -> Check {
    let goldens: BTreeMap<String, String> = std::fs::read_to_string(corpus_dir().join("digests.txt"))
        .map_err(|e| e.to_string())?
        .lines()
        .filter_map(|l| l.split_once(' '))
        .map(|(n, d)| (n.to_string(), d.to_string()))
        .collect();
    let corpus = corpus();
    ensure!(corpus.len() == goldens.len(), "{} scenarios but {} goldens", corpus.len(), goldens.len());

    let bin = env!("CARGO_BIN_EXE_antsreview");
    // a second, separately compiled binary (e.g. a release build) may be supplied
    let alt = std::env::var("ANTSREVIEW_ALT_BIN").ok();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;

    for (name, text) in &corpus {
        let path = corpus_dir().join(name);
        let (log, digest) = replay(text).map_err(|e| format!("{name}: {e}"))?;
        let (again, _) = replay(text)?;
        ensure!(log == again, "{name}: two in-process replays differ");
        ensure!(goldens.get(name) == Some(&digest), "{name}: digest {digest} differs from the recorded golden");
        ensure!(binary_log(bin, &path)? == log, "{name}: binary output differs from library replay");
        if let Some(alt) = &alt {
            ensure!(binary_log(alt, &path)? == log, "{name}: {alt} output differs");
        }

        let state = dir.path().join(format!("{name}.json"));
        let empty = dir.path().join("empty.ndjson");
        std::fs::write(&empty, "").map_err(|e| e.to_string())?;
        let saved = Command::new(bin).arg("run").arg(&path).arg("--save-state").arg(&state).output().unwrap();
        ensure!(saved.status.success(), "{name}: --save-state failed");
        let reload = Command::new(bin).arg("run").arg(&empty).arg("--state-file").arg(&state).output().unwrap();
        ensure!(String::from_utf8_lossy(&reload.stdout).trim() == digest, "{name}: reloaded snapshot digest differs");
    }
    let builds = if alt.is_some() { "library, binary, alternate binary" } else { "library, binary" };
    Ok(format!("{} scenarios: {builds} and recorded goldens agree; snapshots reload to the same digest", corpus.len()))
}
