//! The golden corpus: `.dtr` files of rule instances, a coverage manifest
//! pinning each case to its expected outcome, and recorded `check` reports.
//!
//! Manifest lines (`#` starts a comment):
//!
//! ```text
//! check  LABEL FILE PROOF CONCLUSION...
//! reject LABEL FILE PROOF CODE
//! eq     LABEL FILE LHS RHS VERDICT
//! normal LABEL FILE PROOF TERM...
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cli::{run_on, show_sequent, Command, Flags};
use crate::rewrite::{equal_with, normalize_with};
use crate::syntax::{parse, print_file, print_term};
use crate::workspace::{load_workspace, term_of, Workspace};

pub const MANIFEST: &str = "coverage.txt";
pub const GOLDEN_DIR: &str = "golden";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{MANIFEST}:{line}: {message}")]
    Manifest { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expected {
    Concludes(String),
    Rejects(String),
    Verdict { rhs: String, verdict: String },
    Normal(String),
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Concludes(c) => write!(f, "{c}"),
            Expected::Rejects(code) => write!(f, "rejects {code}"),
            Expected::Verdict { rhs, verdict } => write!(f, "{verdict} {rhs}"),
            Expected::Normal(t) => write!(f, "normal {t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenCase {
    pub label: String,
    pub file: String,
    pub proof: String,
    pub expected: Expected,
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub label: String,
    pub file: String,
    pub doctrine: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

/// The pass/fail matrix: manifest cases first, then per-file rows.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub rows: Vec<CaseResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> Vec<&CaseResult> {
        self.rows.iter().filter(|r| !r.passed).collect()
    }

    pub fn matrix(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let mark = if r.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark} {:<28} {:<18} {}\n", r.label, r.file, r.doctrine));
            if !r.passed {
                out.push_str(&format!("     expected: {}\n     actual:   {}\n", r.expected, r.actual));
            }
        }
        out
    }
}

/// The corpus shipped at the workspace root.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), CorpusError> {
    fs::write(path, text).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn parse_manifest(text: &str) -> Result<Vec<GoldenCase>, CorpusError> {
    let mut cases = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: &str| CorpusError::Manifest {
            line: n + 1,
            message: message.into(),
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() < 5 {
            return Err(err("expected KIND LABEL FILE NAME ..."));
        }
        let rest = || words[4..].join(" ");
        let expected = match words[0] {
            "check" => Expected::Concludes(rest()),
            "reject" => Expected::Rejects(rest()),
            "normal" => Expected::Normal(rest()),
            "eq" if words.len() == 6 => Expected::Verdict {
                rhs: words[4].into(),
                verdict: words[5].into(),
            },
            "eq" => return Err(err("eq takes LHS RHS VERDICT")),
            other => return Err(err(&format!("unknown case kind `{other}`"))),
        };
        cases.push(GoldenCase {
            label: words[1].into(),
            file: words[2].into(),
            proof: words[3].into(),
            expected,
        });
    }
    Ok(cases)
}

/// Corpus files in name order.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let entries = fs::read_dir(dir).map_err(|e| CorpusError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "dtr"))
        .collect();
    files.sort();
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn golden_path(dir: &Path, file: &Path) -> PathBuf {
    let stem = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    dir.join(GOLDEN_DIR).join(format!("{stem}.check"))
}

fn check_text(ws: &Workspace) -> String {
    run_on(&Command::Check { proof: None }, ws, Flags::default()).to_text()
}

fn canonical(text: &str) -> Result<String, String> {
    parse(text).map(|f| print_file(&f)).map_err(|e| e.to_string())
}

/// Rewrites every file into canonical form and records its `check` report.
pub fn bless(dir: &Path) -> Result<(), CorpusError> {
    fs::create_dir_all(dir.join(GOLDEN_DIR)).map_err(|e| CorpusError::Io {
        path: dir.join(GOLDEN_DIR),
        message: e.to_string(),
    })?;
    for file in corpus_files(dir)? {
        let text = read(&file)?;
        if let Ok(canon) = canonical(&text) {
            write(&file, &canon)?;
        }
        if let Ok(ws) = load_workspace(&file) {
            write(&golden_path(dir, &file), &check_text(&ws))?;
        }
    }
    Ok(())
}

fn run_case(ws: &Workspace, case: &GoldenCase) -> (String, String) {
    let Some(proof) = ws.proof(&case.proof) else {
        return (String::new(), format!("no proof `{}`", case.proof));
    };
    let sketch = ws.sketches.get(&proof.sketch);
    let doctrine = sketch.map(|s| s.doctrine.name.clone()).unwrap_or_default();
    let actual = match (&case.expected, &proof.outcome, sketch) {
        (Expected::Concludes(_), Ok(seq), Some(s)) => show_sequent(s, seq, Flags::default()),
        (Expected::Rejects(_), Err(e), _) => e.code.to_string(),
        (Expected::Verdict { rhs, .. }, Ok(_), Some(s)) => {
            match (
                proof.derivation.as_ref(),
                ws.proof(rhs).and_then(|p| p.derivation.as_ref()),
            ) {
                (Some(l), Some(r)) => match equal_with(s, l, r, ws.budget.eq) {
                    Ok(v) => format!("{v} {rhs}"),
                    Err(e) => e.to_string(),
                },
                _ => format!("no derivation for `{rhs}`"),
            }
        }
        (Expected::Normal(_), Ok(_), Some(s)) => match proof.derivation.as_ref() {
            Some(d) => match normalize_with(s, d, ws.budget.fuel) {
                Ok(nf) => format!("normal {}", print_term(&term_of(&nf))),
                Err(e) => e.to_string(),
            },
            None => "no derivation".into(),
        },
        (_, Ok(seq), _) => format!("accepted {seq}"),
        (_, Err(e), _) => format!("rejected {}: {}", e.code, e.message),
    };
    let actual = match &case.expected {
        Expected::Rejects(_) if !actual.starts_with("accepted") => format!("rejects {actual}"),
        _ => actual,
    };
    (doctrine, actual)
}

/// Runs every manifest case, then the per-file canonical-form, clean-check
/// and golden-report rows.
pub fn corpus_suite(dir: &Path) -> Result<SuiteReport, CorpusError> {
    let cases = parse_manifest(&read(&dir.join(MANIFEST))?)?;
    let files = corpus_files(dir)?;
    let mut loaded: BTreeMap<String, Result<Workspace, String>> = BTreeMap::new();
    for f in &files {
        loaded.insert(file_name(f), load_workspace(f).map_err(|e| e.to_string()));
    }
    let mut report = SuiteReport::default();
    for case in &cases {
        let expected = case.expected.to_string();
        let (doctrine, actual) = match loaded.get(&case.file) {
            Some(Ok(ws)) => run_case(ws, case),
            Some(Err(e)) => (String::new(), e.clone()),
            None => (String::new(), format!("no corpus file `{}`", case.file)),
        };
        report.rows.push(CaseResult {
            label: case.label.clone(),
            file: case.file.clone(),
            doctrine,
            passed: actual == expected,
            expected,
            actual,
        });
    }
    for f in &files {
        let name = file_name(f);
        let text = read(f)?;
        let canon = canonical(&text);
        report.rows.push(CaseResult {
            label: "canonical-form".into(),
            file: name.clone(),
            doctrine: String::new(),
            expected: "print(parse(file)) == file".into(),
            actual: match &canon {
                Ok(c) if *c == text => "identical".into(),
                Ok(_) => "differs from canonical print".into(),
                Err(e) => e.clone(),
            },
            passed: canon.as_deref() == Ok(text.as_str()),
        });
        let (clean, golden) = match &loaded[&name] {
            Ok(ws) => {
                let report = run_on(&Command::Check { proof: None }, ws, Flags::default());
                (report.status.as_str().to_string(), report.to_text())
            }
            Err(e) => (e.clone(), String::new()),
        };
        report.rows.push(CaseResult {
            label: "check-clean".into(),
            file: name.clone(),
            doctrine: String::new(),
            expected: "ok".into(),
            passed: clean == "ok",
            actual: clean,
        });
        let recorded = read(&golden_path(dir, f)).unwrap_or_default();
        report.rows.push(CaseResult {
            label: "golden-report".into(),
            file: name,
            doctrine: String::new(),
            expected: recorded.trim_end().replace('\n', " / "),
            passed: recorded == golden,
            actual: golden.trim_end().replace('\n', " / "),
        });
    }
    Ok(report)
}
