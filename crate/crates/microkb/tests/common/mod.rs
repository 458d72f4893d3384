//! Shared helpers for the integration and acceptance suites.

use std::path::{Path, PathBuf};

use microkb::argumentation::{ask, Answer};
use microkb::engine::{Budget, EngineConfig};
use microkb::explain::TemplateStore;
use microkb::hl::Registry;
use microkb::kb::KnowledgeBase;
use microkb::loader::{load_file, LoadReport};
use microkb::parser::parse_formula;
use microkb::symbol::Symbol;

pub struct Harness {
    pub kb: KnowledgeBase,
    pub templates: TemplateStore,
    pub registry: Registry,
    pub budget: Budget,
    pub config: EngineConfig,
}

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

impl Harness {
    pub fn new() -> Self {
        Harness {
            kb: KnowledgeBase::new(),
            templates: TemplateStore::new(),
            registry: Registry::standard(),
            budget: Budget::default(),
            config: EngineConfig::default(),
        }
    }

    /// Load a fixture file, panicking on any load error.
    pub fn load(&mut self, fixture: &str) -> LoadReport {
        let report = load_file(
            &mut self.kb,
            &mut self.templates,
            &fixture_path(fixture),
            &Symbol::new(microkb::kb::BASE_MT),
        )
        .expect("fixture readable");
        assert!(report.ok(), "load errors in {}: {:?}", fixture, report.errors);
        report
    }

    /// Load a fixture, returning the report even when it has lint errors.
    pub fn load_lenient(&mut self, fixture: &str) -> LoadReport {
        load_file(
            &mut self.kb,
            &mut self.templates,
            &fixture_path(fixture),
            &Symbol::new(microkb::kb::BASE_MT),
        )
        .expect("fixture readable")
    }

    pub fn ask_in(&self, mt: &str, query: &str) -> Answer {
        let f = parse_formula(query).expect("query parses");
        ask(&self.kb, &self.registry, &f, &Symbol::new(mt), &self.budget, &self.config)
            .expect("query runs")
    }
}

/// Print the per-criterion pass line the acceptance suite emits.
pub fn pass(criterion: &str) {
    println!("[PASS] {}", criterion);
}
