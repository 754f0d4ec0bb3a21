//! JSON-lines preference datasets and the sweep manifest.
//!
//! Each dataset line is an object with `question`, `chosen` and `rejected`
//! fields. The manifest is CSV with header `permutation,p12,p23,seed,path`,
//! the permutation written as `dog>bird>cat` and the path relative to the
//! manifest's directory.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use prefsens_core::dataset::{generate, sweep, DatasetSpec, PreferenceSample, TemplateBank};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Serialize, Deserialize)]
struct Record {
    question: String,
    chosen: String,
    rejected: String,
}

pub fn write_jsonl<W: Write>(samples: &[PreferenceSample], mut out: W) -> std::io::Result<()> {
    for s in samples {
        let rec = Record { question: s.question.clone(), chosen: s.chosen.clone(), rejected: s.rejected.clone() };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn to_jsonl_bytes(samples: &[PreferenceSample]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_jsonl(samples, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Reads a dataset; blank lines are skipped. `origin` names the source in
/// error messages.
pub fn read_jsonl<R: std::io::Read>(input: R, origin: &Path) -> Result<Vec<PreferenceSample>> {
    let mut out = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::parse(origin, k + 1, e.to_string()))?;
        out.push(PreferenceSample { question: rec.question, chosen: rec.chosen, rejected: rec.rejected });
    }
    Ok(out)
}

pub fn write_dataset(samples: &[PreferenceSample], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_jsonl(samples, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Vec<PreferenceSample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(file, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub permutation: String,
    pub p12: f64,
    pub p23: f64,
    pub seed: u64,
    pub path: String,
}

pub fn join_permutation(p: &[String; 3]) -> String {
    p.join(">")
}

pub fn dataset_file_name(spec: &DatasetSpec) -> String {
    format!("{}_p12-{:.2}_p23-{:.2}.jsonl", spec.permutation.join("-"), spec.p12, spec.p23)
}

pub fn write_manifest(entries: &[ManifestEntry], path: &Path) -> Result<()> {
    let to_err = |e: csv::Error| Error::Invalid(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    for e in entries {
        w.serialize(e).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let to_err = |e: csv::Error| Error::Invalid(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(to_err)?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(to_err)
}

/// Generates every dataset of the sweep around `base` into `dir` and writes
/// the manifest. Returns the manifest path.
pub fn write_sweep(base: &DatasetSpec, bank: &TemplateBank, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::new();
    for spec in sweep(base) {
        let name = dataset_file_name(&spec);
        write_dataset(&generate(&spec, bank), &dir.join(&name))?;
        entries.push(ManifestEntry {
            permutation: join_permutation(&spec.permutation),
            p12: spec.p12,
            p23: spec.p23,
            seed: spec.seed,
            path: name,
        });
    }
    let manifest = dir.join(MANIFEST_NAME);
    write_manifest(&entries, &manifest)?;
    Ok(manifest)
}
