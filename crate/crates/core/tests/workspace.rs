use std::fs;
use std::path::PathBuf;

use anyhow::Result;
use doctrina::corpus::default_dir;
use doctrina::workspace::{load_workspace, parse_workspace, WorkspaceError};

fn invalid_code(text: &str) -> Option<String> {
    match parse_workspace(text) {
        Err(WorkspaceError::Invalid { code, .. }) => Some(code),
        _ => None,
    }
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("doctrina-ws-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn builtin_only_file_with_alias_sort() -> Result<()> {
    let ws = parse_workspace("use doctrine MILL; sketch S over MILL { obj A: lin }")?;
    assert_eq!(ws.sketches.len(), 1);
    assert!(ws.spans.contains_key("sketch S"));
    Ok(())
}

#[test]
fn shipped_dill_file_validates() -> Result<()> {
    let ws = load_workspace(&default_dir().join("dill.dtr"))?;
    assert!(ws.proofs.iter().all(|p| p.outcome.is_ok()));
    assert_eq!(ws.sketches["Store"].doctrine.name, "DILL");
    Ok(())
}

#[test]
fn declared_base_and_doctrine() -> Result<()> {
    let ws = parse_workspace(
        "base line { sort a : lin; hom { pos = exact(a); neg = { a: one } } }\n\
         doctrine Endo on line { cone Twice { obj x : a; vertex a +; proj p0 (x-); } }\n\
         sketch S over Endo { obj A : a; gen f : (A-, A+); }\n\
         proof p in S : . | A |- Twice[A] = proj Twice[A].p0;\n",
    )?;
    assert_eq!(ws.doctrines["Endo"].base.name, "line");
    assert!(ws.proof("p").unwrap().outcome.is_ok());
    Ok(())
}

#[test]
fn restriction_and_extension() -> Result<()> {
    let ws = parse_workspace(
        "doctrine Mult restricts MILL { keep Tensor; }\n\
         doctrine Top extends MILL { cone Top { vertex a -; } }\n\
         sketch S over Mult { obj A : a; }\n\
         proof p in S : |- Lolli[A,A]+ = factor Lolli[A,A] () { p0 => id A };\n",
    )?;
    assert_eq!(ws.doctrines["Mult"].cones.len(), 1);
    assert!(ws.doctrines["Top"].cone("Top").is_some());
    assert_eq!(
        ws.proof("p").unwrap().outcome.as_ref().unwrap_err().code.to_string(),
        "UnknownCone"
    );
    Ok(())
}

#[test]
fn invalid_items_carry_codes() {
    let cases = [
        ("sketch S over NOPE { }", "UnknownDoctrine"),
        ("doctrine D on nope { }", "UnknownBase"),
        ("use doctrine MILL; goal g in T : |- ;", "UnknownSketch"),
        ("sketch S over MILL { } sketch S over MILL { }", "DuplicateName"),
        ("sketch S over MILL { obj A : a; gen g : (A+, A+); }", "InvalidSketch"),
        (
            "sketch S over MILL { obj A : a; } goal g in S : |- A+, A+;",
            "InvalidGoal",
        ),
        (
            "doctrine D on symmulti { cone C { obj r : a; vertex a -; proj p0 (r+); proj p1 (r-); } }",
            "InvalidDoctrine",
        ),
        ("map M : MILL -> CLLX { sort a -> x; }", "InvalidMap"),
        (
            "sketch S over MILL { obj A : a; obj B : a; gen f : (A-, B+); eq e : gen f = id A; }",
            "InvalidEquation",
        ),
        (
            "sketch S over MILL { obj A : a; } proof p in S : |- A-, A+ = id A; expect p rejects Bogus;",
            "UnknownErrorCode",
        ),
    ];
    for (text, code) in cases {
        assert_eq!(invalid_code(text).as_deref(), Some(code), "{text}");
    }
}

#[test]
fn budgets_override_defaults() -> Result<()> {
    let ws = parse_workspace("budget { depth = 3; cut_depth = 0; nodes = 9; fuel = 7; eq_depth = 2; eq_nodes = 5; }")?;
    assert_eq!(ws.budget.search.max_depth, 3);
    assert_eq!(ws.budget.search.max_cut_depth, 0);
    assert_eq!(ws.budget.search.max_nodes, 9);
    assert_eq!(ws.budget.fuel, 7);
    assert!(parse_workspace("budget { speed = 1; }").is_err());
    Ok(())
}

#[test]
fn proofs_reference_earlier_proofs_only() -> Result<()> {
    let ws = parse_workspace(
        "sketch S over MILL { obj A : a; obj B : a; gen f : (A-, B+); }\n\
         proof later in S : |- A-, B+ = ref early;\n\
         proof early in S : |- A-, B+ = gen f;\n\
         proof again in S : |- A-, B+ = ref early;\n",
    )?;
    assert!(ws.proof("later").unwrap().outcome.is_err());
    assert!(ws.proof("again").unwrap().outcome.is_ok());
    Ok(())
}

#[test]
fn includes_resolve_relative_and_detect_cycles() -> Result<()> {
    let dir = scratch("inc");
    fs::create_dir_all(dir.join("lib"))?;
    fs::write(dir.join("lib/defs.dtr"), "sketch S over MILL { obj A : a; }\n")?;
    fs::write(
        dir.join("main.dtr"),
        "use \"lib/defs.dtr\";\nproof p in S : . | A |- A = id A;\n",
    )?;
    let ws = load_workspace(&dir.join("main.dtr"))?;
    assert!(ws.proof("p").unwrap().outcome.is_ok());

    fs::write(dir.join("a.dtr"), "use \"b.dtr\";\n")?;
    fs::write(dir.join("b.dtr"), "use \"a.dtr\";\n")?;
    assert!(load_workspace(&dir.join("a.dtr")).is_err());

    assert!(matches!(
        load_workspace(&dir.join("missing.dtr")),
        Err(WorkspaceError::Io { .. })
    ));
    fs::remove_dir_all(&dir)?;
    Ok(())
}
