//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.
//!
//! Run with `cargo test -p forcelab --release --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::Duration;

use forcelab::lab::{self, LabConfig};
use forcelab::report::VerificationReport;
use forcelab_core::embed::{is_complete_suborder, is_complete_suborder_via_reductions};
use forcelab_core::iterate::hechler_poset;
use forcelab_core::HechlerParams;

const BIN: &str = env!("CARGO_BIN_EXE_forcelab");

// Exhaustive ranges and thresholds.
const EMBEDDING_SIZE: usize = 5;
const COMPLETION_SIZE: usize = 5;
const AMALGAM_BASE_ATOMS: usize = 2;
const AMALGAM_FACTOR_ATOMS: usize = 3;
const AMALGAM_FACTOR_ELEMENTS: usize = 4;
const BCD_ATOMS: usize = 4;
const BCD_BUDGET: Duration = Duration::from_secs(60);
const MIN_RANDOM_TRIPLES: u64 = 1000;
const RANDOM_AMALGAMS: usize = 200;
const RANDOM_HECHLERS: usize = 50;
/// Mismatches and counterexamples tolerated by every criterion.
const MAX_MISMATCHES: usize = 0;

type Verdict = Result<String, String>;

fn cfg() -> LabConfig {
    LabConfig::default()
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn fixtures(dir: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(fixture(dir)).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn forcelab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("FORCELAB_BUDGET_MS").output().expect("binary runs")
}

fn clean(r: &VerificationReport) -> Result<(), String> {
    if !r.exhaustive {
        return Err(format!("{}: sweep incomplete", r.lemma));
    }
    if r.counterexamples.len() > MAX_MISMATCHES {
        return Err(format!("{}: {} counterexample(s), first {}", r.lemma, r.counterexamples.len(), r.counterexamples[0]));
    }
    if r.checked == 0 {
        return Err(format!("{}: nothing checked", r.lemma));
    }
    Ok(())
}

fn stats(r: &VerificationReport, keys: &[&str]) -> String {
    keys.iter().map(|k| format!("{k}={}", r.stat(k))).collect::<Vec<_>>().join(" ")
}

fn c1_criteria_agree() -> Verdict {
    let r = lab::verify_embedding_criteria(EMBEDDING_SIZE, &cfg()).map_err(|e| e.to_string())?;
    clean(&r)?;
    let mut shipped = Vec::new();
    for (file, map, want) in [
        ("invalid/embedding.fl", "inc", false),
        ("valid/trees.fl", "t12", true),
        ("valid/basic.fl", "one_vee", true),
    ] {
        let doc = forcelab::load_str(&std::fs::read_to_string(fixture(file)).unwrap()).map_err(|e| e.to_string())?;
        let inc = doc.inclusion(map).map_err(|e| e.to_string())?;
        let a = is_complete_suborder(&inc).map_err(|e| e.to_string())?;
        let b = is_complete_suborder_via_reductions(&inc);
        if a != want || b != want {
            return Err(format!("{map}: antichain {a}, reduction {b}, expected {want}"));
        }
        shipped.push(format!("{map}={want}"));
    }
    Ok(format!("{} inclusions agree, {}", r.checked, shipped.join(" ")))
}

fn c2_completion() -> Verdict {
    let r = lab::verify_completion(COMPLETION_SIZE, &cfg()).map_err(|e| e.to_string())?;
    clean(&r)?;
    Ok(format!("{} posets", r.checked))
}

fn amalgam_report() -> Result<VerificationReport, String> {
    let r = lab::verify_amalgam_claims(AMALGAM_BASE_ATOMS, AMALGAM_FACTOR_ATOMS, AMALGAM_FACTOR_ELEMENTS, &cfg()).map_err(|e| e.to_string())?;
    clean(&r)?;
    Ok(r)
}

fn c3_amalgam_oracle(r: &VerificationReport) -> Verdict {
    Ok(format!("{} instances, {}", r.checked, stats(r, &["membership.pairs", "trivial_base", "identity"])))
}

fn c4_amalgam_claims(r: &VerificationReport) -> Verdict {
    Ok(format!("{} instances, {}", r.checked, stats(r, &["quotient.subposets"])))
}

fn c5_bcd() -> Verdict {
    let mut c = cfg();
    c.budget = BCD_BUDGET;
    let r = lab::verify_bcd(BCD_ATOMS, &c).map_err(|e| e.to_string())?;
    clean(&r)?;
    if r.hypothesis_stats.is_empty() {
        return Err("no hypothesis statistics".into());
    }
    Ok(format!(
        "{} instances, {}",
        r.checked,
        stats(&r, &["hypotheses.literal", "hypotheses.agreement", "hypotheses.quotient", "refuted.quotient"])
    ))
}

fn c6_two_step() -> Verdict {
    let r = lab::verify_embedding_criteria(EMBEDDING_SIZE, &cfg()).map_err(|e| e.to_string())?;
    clean(&r)?;
    let (complete, eq) = (r.stat("complete"), r.stat("two_step.equivalent"));
    if complete == 0 || complete != eq {
        return Err(format!("complete={complete} equivalent={eq}"));
    }
    Ok(format!("{eq} complete inclusions equivalent"))
}

fn c7_hechler() -> Verdict {
    for m in 1..=3 {
        for h in 0..=2 {
            let p = hechler_poset(HechlerParams::new(m, h).map_err(|e| e.to_string())?);
            let want = (m + 1) * (h + 1).pow(m as u32);
            if p.len() != want {
                return Err(format!("m={m} h={h}: {} elements, expected {want}", p.len()));
            }
            let zero = format!("(0,({}))", vec!["0"; m].join(","));
            if p.label(p.bottom()) != zero {
                return Err(format!("m={m} h={h}: bottom {}", p.label(p.bottom())));
            }
        }
    }
    let d = hechler_poset(HechlerParams::new(2, 1).map_err(|e| e.to_string())?);
    let at = |l: &str| d.index_of(l).ok_or(format!("missing {l}"));
    if !d.le(at("(0,(0,0))")?, at("(1,(0,1))")?) {
        return Err("(0,(0,0)) <= (1,(0,1)) fails".into());
    }
    if d.compat(at("(1,(1,0))")?, at("(1,(0,0))")?) {
        return Err("(1,(1,0)) and (1,(0,0)) are compatible".into());
    }
    Ok("sizes for m<=3 h<=2, bottom, both worked examples".into())
}

fn expected_clauses(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix("# expect:"))
        .map(|l| l.split_whitespace().map(String::from).collect())
        .unwrap_or_default()
}

fn sweet_report() -> Result<VerificationReport, String> {
    let r = lab::verify_sweet_laws(MIN_RANDOM_TRIPLES as usize, RANDOM_AMALGAMS, RANDOM_HECHLERS, &cfg()).map_err(|e| e.to_string())?;
    clean(&r)?;
    Ok(r)
}

fn c8_sweetness(r: &VerificationReport) -> Verdict {
    for f in fixtures("valid") {
        let o = forcelab(&["check", f.to_str().unwrap()]);
        if o.status.code() != Some(0) {
            return Err(format!("{} rejected", f.display()));
        }
    }
    let mut negatives = 0;
    for f in fixtures("invalid") {
        let name = f.file_name().unwrap().to_str().unwrap().to_string();
        let want = expected_clauses(&f);
        let runs: Vec<(Vec<&str>, Vec<String>)> = if name == "extends.fl" {
            vec![
                (vec!["sweet-validate", f.to_str().unwrap(), "t1", "--extends", "merged"], vec!["extends.2".into()]),
                (vec!["sweet-validate", f.to_str().unwrap(), "t1", "--extends", "rooted"], vec!["extends.3".into()]),
            ]
        } else {
            vec![(vec!["check", f.to_str().unwrap()], want.clone())]
        };
        for (args, clauses) in runs {
            let o = forcelab(&args);
            let out = String::from_utf8_lossy(&o.stdout);
            if o.status.code() != Some(1) || clauses.iter().any(|c| !out.contains(c.as_str()) || !want.contains(c)) {
                return Err(format!("{name}: expected {clauses:?}, got\n{out}"));
            }
            negatives += 1;
        }
    }
    let random = r.stat("random.triples");
    if random < MIN_RANDOM_TRIPLES || r.stat("triples.checked") < MIN_RANDOM_TRIPLES || r.stat("limits.checked") == 0 {
        return Err(stats(r, &["random.triples", "triples.checked", "limits.checked"]));
    }
    Ok(format!(
        "{negatives} rejections with the right clause, {}",
        stats(r, &["triples.checked", "triples.proper", "random.triples", "limits.checked"])
    ))
}

fn c9_preservation(r: &VerificationReport) -> Verdict {
    if r.stat("amalgam.preserved") == 0 || r.stat("hechler.preserved") == 0 {
        return Err("no preservation instance checked".into());
    }
    Ok(stats(
        r,
        &[
            "amalgam.preserved",
            "amalgam.obstructed",
            "amalgam.skipped_too_large",
            "corpus.amalgam_pairs_above_cap",
            "hechler.preserved",
            "hechler.skipped_too_large",
        ],
    ))
}

fn c10_towers() -> Verdict {
    let r = lab::verify_tower_laws(&cfg()).map_err(|e| e.to_string())?;
    clean(&r)?;
    Ok(format!(
        "{} cases, {}",
        r.checked,
        stats(&r, &["reflexive", "chain_merge", "hechler", "amalgam.trivial", "amalgam.identity", "amalgam.swap"])
    ))
}

fn c11_determinism() -> Verdict {
    let runs: [&[&str]; 3] = [
        &["--seed", "5", "verify", "sweet", "--caps", "triples=100,amalgams=20,hechlers=5"],
        &["--seed", "5", "verify", "sweet", "--caps", "triples=100,amalgams=20,hechlers=5", "--jobs", "1"],
        &["--seed", "5", "verify", "bcd", "--caps", "3"],
    ];
    let first = forcelab(runs[0]);
    if first.status.code() != Some(0) || forcelab(runs[0]).stdout != first.stdout || forcelab(runs[1]).stdout != first.stdout {
        return Err("sweet reports differ between identical runs".into());
    }
    if forcelab(runs[2]).stdout != forcelab(runs[2]).stdout {
        return Err("bcd reports differ between identical runs".into());
    }
    let dir = std::env::temp_dir().join(format!("forcelab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut n = 0;
    for f in fixtures("valid").into_iter().chain(fixtures("invalid")) {
        let dsl = forcelab(&["emit", f.to_str().unwrap()]);
        let again = dir.join("again.fl");
        std::fs::write(&again, &dsl.stdout).map_err(|e| e.to_string())?;
        let json = forcelab(&["emit", f.to_str().unwrap(), "--format", "json"]);
        let j = dir.join("again.json");
        std::fs::write(&j, &json.stdout).map_err(|e| e.to_string())?;
        if dsl.status.code() != Some(0)
            || forcelab(&["emit", again.to_str().unwrap()]).stdout != dsl.stdout
            || forcelab(&["emit", j.to_str().unwrap()]).stdout != dsl.stdout
        {
            return Err(format!("{} does not round-trip", f.display()));
        }
        n += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("byte-identical reports, {n} fixtures round-trip"))
}

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    })
}

fn main() -> ExitCode {
    let amalgam = guarded(amalgam_report);
    let sweet = guarded(sweet_report);
    let on = |r: &Result<VerificationReport, String>, f: fn(&VerificationReport) -> Verdict| match r {
        Ok(r) => guarded(|| f(r)),
        Err(e) => Err(e.clone()),
    };
    let results: Vec<(&str, Verdict)> = vec![
        ("complete-suborder criteria agree", guarded(c1_criteria_agree)),
        ("completion correctness", guarded(c2_completion)),
        ("amalgam membership oracle", on(&amalgam, c3_amalgam_oracle)),
        ("amalgam finite claims", on(&amalgam, c4_amalgam_claims)),
        ("quotient lemma", guarded(c5_bcd)),
        ("two-step equivalence", guarded(c6_two_step)),
        ("hechler combinatorics", guarded(c7_hechler)),
        ("sweetness suite", on(&sweet, c8_sweetness)),
        ("sweetness preservation", on(&sweet, c9_preservation)),
        ("tower suite", guarded(c10_towers)),
        ("cli determinism", guarded(c11_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        match v {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
