//! End-to-end audit runs: corpus → prompts → provider → parsing → analyses,
//! plus the manifest that makes a run reproducible.

mod analysis;
mod check;
mod emit;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub use analysis::*;
pub use check::check_bundle;
pub use emit::emit;

use crate::corpus::{filter_hatexplain, load_corpus, sample_subset, synthetic_hate3, CorpusFormat, Instance};
use crate::error::{Error, Result};
use crate::label::Task;
use crate::metrics::MaskConventions;
use crate::parsing::{parse_completion, parse_cose, AnnotationRecord};
use crate::personas::{baseline, Persona, PersonaSelection, REGISTRY_VERSION};
use crate::prompting::{plan_run, render, template_hashes, PromptSpec, RenderedPrompt, Variant};
use crate::provider::{
    build_backend, CacheOnly, ChatBackend, Gateway, ProviderConfig, ProviderKind, Request, ResponseCache, SimulatedAnnotatorParams,
};
use crate::stats::BootstrapConfig;

pub const RUN_CONFIG_FILE: &str = "run_config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorpusSource {
    File {
        path: PathBuf,
        format: CorpusFormat,
        /// Apply the HateXplain agreement/rationale filter.
        #[serde(default)]
        filter: bool,
        /// Seeded subset size.
        #[serde(default)]
        sample: Option<usize>,
    },
    Synthetic {
        n: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSettings {
    pub iterations: usize,
    pub confidence: f64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        let d = BootstrapConfig::default();
        BootstrapSettings {
            iterations: d.iterations,
            confidence: d.confidence,
        }
    }
}

fn default_runs() -> u32 {
    3
}

/// JSON run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub corpus: CorpusSource,
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default)]
    pub simulation: SimulatedAnnotatorParams,
    #[serde(default)]
    pub personas: PersonaSelection,
    #[serde(default)]
    pub variant: Variant,
    /// Ask for a `"reasoning"` JSON key instead of think tags.
    #[serde(default)]
    pub reasoning_field: bool,
    #[serde(default = "default_runs")]
    pub runs: u32,
    /// Seeds corpus sampling and the bootstrap.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub bootstrap: BootstrapSettings,
    #[serde(default)]
    pub metrics: MetricToggles,
    #[serde(default)]
    pub conventions: MaskConventions,
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
}

impl AuditConfig {
    /// Simulated run over a synthetic hate3 corpus.
    pub fn synthetic(n: usize, seed: u64) -> Self {
        AuditConfig {
            corpus: CorpusSource::Synthetic { n, seed },
            provider: ProviderConfig::default(),
            simulation: SimulatedAnnotatorParams {
                seed,
                ..Default::default()
            },
            personas: PersonaSelection::default(),
            variant: Variant::Cot,
            reasoning_field: false,
            runs: default_runs(),
            seed,
            bootstrap: BootstrapSettings::default(),
            metrics: MetricToggles::default(),
            conventions: MaskConventions::default(),
            cache_path: None,
        }
    }

    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let mut cfg: AuditConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Config(format!("{}: {} at `{}`", path.display(), e.inner(), e.path())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let CorpusSource::File { path, .. } = &mut self.corpus {
            fix(path);
        }
        if let Some(c) = &mut self.cache_path {
            fix(c);
        }
    }

    pub fn bootstrap_config(&self) -> BootstrapConfig {
        BootstrapConfig {
            iterations: self.bootstrap.iterations,
            confidence: self.bootstrap.confidence,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        self.provider.validate()?;
        self.simulation.validate()?;
        self.bootstrap_config().validate()?;
        if !(self.conventions.iou_threshold > 0.0 && self.conventions.iou_threshold <= 1.0) {
            return Err(Error::Config("iou_threshold must be in (0, 1]".into()));
        }
        self.personas.resolve().map_err(Error::Config)?;
        if let Some(id) = self.simulation.bias.keys().find(|id| crate::personas::by_id(id).is_none()) {
            return Err(Error::Config(format!("simulation.bias names unknown persona `{id}`")));
        }
        Ok(())
    }

    /// Baseline first, then the selection in registry order, without repeats.
    pub fn persona_list(&self) -> Result<Vec<&'static Persona>> {
        let mut out = vec![baseline()];
        for p in self.personas.resolve().map_err(Error::Config)? {
            if !out.iter().any(|q| q.id == p.id) {
                out.push(p);
            }
        }
        Ok(out)
    }

    pub fn load_instances(&self) -> Result<Vec<Instance>> {
        let instances = match &self.corpus {
            CorpusSource::Synthetic { n, seed } => synthetic_hate3(*n, *seed),
            CorpusSource::File { path, format, filter, sample } => {
                let mut v = load_corpus(path, *format)?;
                if *filter {
                    v = filter_hatexplain(v);
                }
                if let Some(n) = sample {
                    v = sample_subset(&v, *n, self.seed)?;
                }
                v
            }
        };
        if instances.is_empty() {
            return Err(Error::InvalidInput("corpus has no instances".into()));
        }
        let task = instances[0].task;
        if let Some(odd) = instances.iter().find(|i| i.task != task) {
            return Err(Error::Validation {
                id: odd.id.clone(),
                message: format!("task {} differs from {}", odd.task, task),
            });
        }
        Ok(instances)
    }

    /// Model name and cache parameters the configured backend reports.
    pub fn backend_identity(&self) -> (String, Value) {
        match self.provider.kind {
            ProviderKind::Simulated => ("simulated".into(), serde_json::to_value(&self.simulation).expect("params serialize")),
            ProviderKind::HttpChat => (self.provider.model_name.clone(), Value::Object(self.provider.effective_params())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub sampling: u64,
    pub simulation: u64,
    pub bootstrap: u64,
}

/// Provenance of one audit. The provider section names the API key
/// variable but never holds the key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_digest: String,
    pub corpus_digest: String,
    pub task: Task,
    pub instances: usize,
    pub registry_version: String,
    pub personas: Vec<String>,
    pub template_hashes: BTreeMap<String, String>,
    pub model_name: String,
    pub runs: u32,
    pub seeds: Seeds,
    pub bootstrap_scheme: String,
    pub work_items: usize,
    pub cache_hits: usize,
    pub backend_calls: usize,
    pub started_ms: u64,
    pub finished_ms: u64,
    pub config: AuditConfig,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

fn digest<T: Serialize>(v: &T) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(v)?)))
}

pub struct AuditOutcome {
    pub bundle: ReportBundle,
    pub manifest: RunManifest,
    pub records: Vec<AnnotationRecord>,
}

/// Runs the configured audit with the configured backend. When a cache is
/// set, the resolved config is saved beside it for `report_from_cache`.
pub fn run_audit(config: &AuditConfig) -> Result<AuditOutcome> {
    config.validate()?;
    let backend = build_backend(&config.provider, &config.simulation)?;
    if let Some(cache) = &config.cache_path {
        save_run_config(config, cache)?;
    }
    run_audit_with(config, backend)
}

fn save_run_config(config: &AuditConfig, cache: &Path) -> Result<()> {
    let dir = cache.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut resolved = config.clone();
    let cwd = std::env::current_dir().map_err(|e| Error::io("reading working directory", e))?;
    resolved.resolve_paths(&cwd);
    let path = dir.join(RUN_CONFIG_FILE);
    let text = serde_json::to_string_pretty(&resolved)? + "\n";
    fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Recomputes every analysis from a cache written by an earlier run; any
/// work item missing from the cache is an error.
pub fn report_from_cache(cache: impl AsRef<Path>) -> Result<AuditOutcome> {
    let cache = cache.as_ref();
    if !cache.is_file() {
        return Err(Error::InvalidInput(format!("cache {} does not exist", cache.display())));
    }
    let dir = cache.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut config = AuditConfig::load(dir.join(RUN_CONFIG_FILE))?;
    config.cache_path = Some(cache.to_path_buf());
    let (model_name, params) = config.backend_identity();
    run_audit_with(&config, Box::new(CacheOnly { model_name, params }))
}

/// Runs the audit against an explicit backend.
pub fn run_audit_with(config: &AuditConfig, backend: Box<dyn ChatBackend>) -> Result<AuditOutcome> {
    config.validate()?;
    let started_ms = now_ms();
    let instances = config.load_instances()?;
    let task = instances[0].task;
    let personas = config.persona_list()?;
    let items = plan_run(&instances, &personas, config.runs)?;

    let mut prompts: HashMap<(usize, &str), RenderedPrompt> = HashMap::new();
    for (i, inst) in instances.iter().enumerate() {
        for p in &personas {
            let spec = PromptSpec {
                task,
                persona: p,
                variant: config.variant,
                reasoning_field: config.reasoning_field,
            };
            prompts.insert((i, p.id.as_str()), render(&spec, inst)?);
        }
    }
    let by_id: HashMap<&str, &Persona> = personas.iter().map(|p| (p.id.as_str(), *p)).collect();
    let reqs: Vec<Request> = items
        .iter()
        .map(|item| Request {
            item,
            instance: &instances[item.instance_index],
            persona: by_id[item.persona_id.as_str()],
            prompt: &prompts[&(item.instance_index, item.persona_id.as_str())],
            variant: config.variant,
        })
        .collect();

    let mut gateway = Gateway::new(backend, config.provider.max_parallel);
    if let Some(path) = &config.cache_path {
        gateway = gateway.with_cache(ResponseCache::open(path)?);
    }
    let responses = gateway.complete_all(&reqs);

    let mut records = Vec::with_capacity(responses.len());
    let mut first_error = None;
    for (req, resp) in reqs.iter().zip(responses) {
        match resp {
            Ok(raw) => {
                let parsed = match task {
                    Task::Cose => parse_cose(&raw.text, &req.instance.options),
                    _ => parse_completion(&raw.text, &req.prompt.schema),
                };
                records.push(AnnotationRecord::from_parsed(req.item, req.instance, &raw.model_name, parsed));
            }
            Err(e) => {
                let transport = matches!(e, Error::Transport { .. });
                if first_error.is_none() || (transport && !matches!(first_error, Some(Error::Transport { .. }))) {
                    first_error = Some(e);
                }
            }
        }
    }
    if let Some(e) = first_error {
        return Err(e);
    }

    let opts = AnalysisOptions {
        toggles: config.metrics,
        conventions: config.conventions,
        bootstrap: config.bootstrap_config(),
    };
    let bundle = analyze(&instances, &personas, &records, &opts)?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config_digest: digest(config)?,
        corpus_digest: digest(&instances)?,
        task,
        instances: instances.len(),
        registry_version: REGISTRY_VERSION.into(),
        personas: personas.iter().map(|p| p.id.clone()).collect(),
        template_hashes: template_hashes(),
        model_name: gateway.model_name().to_string(),
        runs: config.runs,
        seeds: Seeds {
            sampling: config.seed,
            simulation: config.simulation.seed,
            bootstrap: config.seed,
        },
        bootstrap_scheme: "percentile interval over instance resamples of run-averaged per-instance scores".into(),
        work_items: items.len(),
        cache_hits: gateway.cache_hits(),
        backend_calls: gateway.backend_calls(),
        started_ms,
        finished_ms: now_ms(),
        config: config.clone(),
    };
    Ok(AuditOutcome {
        bundle,
        manifest,
        records,
    })
}
