use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use persona_audit::error::Error;
use persona_audit::personas::PersonaSelection;
use persona_audit::provider::{ChatBackend, Completion, Request, SimulatedAnnotator, SimulatedAnnotatorParams};
use persona_audit::report::{
    check_bundle, emit, report_from_cache, run_audit, run_audit_with, AuditConfig, ReportBundle, RunManifest,
};
use serde_json::Value;

fn config(n: usize, seed: u64) -> AuditConfig {
    let mut c = AuditConfig::synthetic(n, seed);
    c.personas = PersonaSelection::Ids(vec!["gender_male".into(), "gender_female".into(), "age_15".into(), "age_65".into()]);
    c.bootstrap.iterations = 200;
    c
}

#[test]
fn ideal_simulation_hits_ideal_values() {
    let out = run_audit(&config(30, 1)).unwrap();
    let b = &out.bundle;
    for r in &b.scores {
        let want = match r.score.metric.as_str() {
            "mae" | "me" => 0.0,
            _ => 100.0,
        };
        assert_eq!(r.score.mean, want, "{r:?}");
        assert_eq!(r.score.std, 0.0);
        assert_eq!(r.score.runs(), 3);
    }
    assert!(b.overflag.iter().all(|r| r.rate == 0.0));
    assert!(b.deltas.iter().all(|d| d.low == 0.0 && d.high == 0.0 && !d.significant));
    assert!(!b.agreement.is_empty());
    assert!(b.agreement.iter().all(|a| a.agreement.mean == Some(1.0)));
    assert!(b.disagreement.iter().all(|d| d.rate == 0.0));
    assert!(b.parse_failures.iter().all(|p| p.failed == 0));
    assert_eq!(out.manifest.work_items, 30 * 5 * 3);
}

#[test]
fn deterministic_bundles() {
    let a = run_audit(&config(20, 4)).unwrap();
    let b = run_audit(&config(20, 4)).unwrap();
    assert_eq!(serde_json::to_string(&a.bundle).unwrap(), serde_json::to_string(&b.bundle).unwrap());
}

struct FailAfter {
    inner: SimulatedAnnotator,
    budget: AtomicUsize,
    calls: Arc<AtomicUsize>,
}

impl ChatBackend for FailAfter {
    fn model_name(&self) -> &str {
        self.inner.model_name()
    }
    fn cache_params(&self) -> Value {
        self.inner.cache_params()
    }
    fn call(&self, req: &Request<'_>) -> persona_audit::error::Result<Completion> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if self.budget.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |b| b.checked_sub(1)).is_err() {
            return Err(Error::Transport {
                status: Some(503),
                attempts: 1,
                message: "down".into(),
            });
        }
        self.inner.call(req)
    }
}

#[test]
fn interrupted_run_resumes_to_same_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(12, 2);
    cfg.simulation = SimulatedAnnotatorParams {
        seed: 2,
        fidelity: 0.7,
        false_mark_rate: 0.1,
        ..Default::default()
    };
    let reference = run_audit(&cfg).unwrap();

    cfg.cache_path = Some(dir.path().join("cache.jsonl"));
    let calls = Arc::new(AtomicUsize::new(0));
    let flaky = FailAfter {
        inner: SimulatedAnnotator::new(cfg.simulation.clone()).unwrap(),
        budget: AtomicUsize::new(70),
        calls: calls.clone(),
    };
    let err = run_audit_with(&cfg, Box::new(flaky)).err().unwrap();
    assert_eq!(err.exit_code(), 3);

    let resumed = run_audit(&cfg).unwrap();
    assert_eq!(resumed.manifest.cache_hits, 70);
    assert_eq!(resumed.bundle, reference.bundle);

    let again = report_from_cache(dir.path().join("cache.jsonl")).unwrap();
    assert_eq!(again.bundle, reference.bundle);
    assert_eq!(again.manifest.backend_calls, 0);
}

#[test]
fn emit_writes_tables_and_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_audit(&config(10, 3)).unwrap();
    let files = emit(&out.bundle, &out.manifest, dir.path()).unwrap();
    assert_eq!(files.len(), 12);
    let scores = std::fs::read_to_string(dir.path().join("scores.csv")).unwrap();
    assert!(scores.starts_with("persona,model,gold_group,subgroup,metric,unit,runs,mean,std,per_run,evaluated,excluded\n"));
    assert!(scores.contains("baseline,simulated,majority,all,mae,percent,3,0.0000,0.0000,0.0000;0.0000;0.0000,"));
    let before = std::fs::read(dir.path().join("bundle.json")).unwrap();
    emit(&out.bundle, &out.manifest, dir.path()).unwrap();
    assert_eq!(before, std::fs::read(dir.path().join("bundle.json")).unwrap());

    let back: ReportBundle = serde_json::from_slice(&before).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&out.bundle).unwrap());
    let manifest: RunManifest =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(check_bundle(&back, manifest.task).is_empty());

    let empty = tempfile::tempdir().unwrap();
    let files = emit(&Default::default(), &out.manifest, empty.path()).unwrap();
    assert_eq!(files.len(), 1);
    assert!(empty.path().join("manifest.json").exists());
}

#[test]
fn missing_cache_entry_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(5, 9);
    cfg.cache_path = Some(dir.path().join("c.jsonl"));
    run_audit(&cfg).unwrap();
    let mut more = cfg.clone();
    more.runs = 4;
    std::fs::write(dir.path().join("run_config.json"), serde_json::to_string(&more).unwrap()).unwrap();
    assert!(matches!(report_from_cache(dir.path().join("c.jsonl")), Err(Error::CacheMiss(_))));
}
