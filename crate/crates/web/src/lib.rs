//! Browser demo: animate a shipped scenario step by step, entirely in wasm.
//!
//! [`Demo`] holds the logic and is tested natively; the `wasm_bindgen`
//! exports only convert errors into JS exceptions.

use csmbench::kernel::load_system;
use csmbench::models::{open_shipped, shipped_scenarios};
use csmbench::session::Session;
use csmbench::view::{canonical_json, TraceView};
use wasm_bindgen::prelude::*;

/// Scenario keys offered by the page, smallest first.
pub fn scenario_keys() -> Vec<String> {
    let mut keys = vec!["ping_pong".to_string()];
    keys.extend(
        shipped_scenarios()
            .iter()
            .filter(|s| !s.name.starts_with("full_scale"))
            .map(ToString::to_string),
    );
    keys
}

pub struct Demo {
    session: Session,
}

impl Demo {
    /// `ping_pong`, or a handover scenario such as `Full.baseline`.
    pub fn open(key: &str) -> Result<Demo, String> {
        let def = match key {
            "ping_pong" => open_shipped("ping_pong", None),
            _ => open_shipped("handover", Some(key)),
        }
        .map_err(|e| e.to_string())?;
        let sys = load_system(&def).map_err(|es| format!("{} static error(s)", es.len()))?;
        Ok(Demo {
            session: Session::new(sys),
        })
    }

    pub fn state(&self) -> String {
        canonical_json(&self.session.state_view())
    }

    pub fn steps(&self) -> String {
        canonical_json(&self.session.enabled())
    }

    pub fn trace(&self) -> String {
        canonical_json(&TraceView::new(self.session.system(), self.session.trace()))
    }

    pub fn version(&self) -> u64 {
        self.session.version()
    }

    pub fn fire(&mut self, index: usize, version: u64) -> Result<(), String> {
        self.session.step(index, version).map_err(|e| e.to_string())
    }

    pub fn undo(&mut self) -> Result<(), String> {
        self.session.undo().map_err(|e| e.to_string())
    }

    pub fn auto(&mut self, n: usize, seed: u64) -> usize {
        self.session.auto(n, seed)
    }
}

#[wasm_bindgen]
pub fn scenarios() -> Vec<String> {
    scenario_keys()
}

#[wasm_bindgen(js_name = Demo)]
pub struct JsDemo(Demo);

#[wasm_bindgen(js_class = Demo)]
impl JsDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(key: &str) -> Result<JsDemo, JsError> {
        Demo::open(key).map(JsDemo).map_err(|e| JsError::new(&e))
    }

    pub fn state(&self) -> String {
        self.0.state()
    }

    pub fn steps(&self) -> String {
        self.0.steps()
    }

    pub fn trace(&self) -> String {
        self.0.trace()
    }

    pub fn version(&self) -> u64 {
        self.0.version()
    }

    pub fn fire(&mut self, index: usize, version: u64) -> Result<(), JsError> {
        self.0.fire(index, version).map_err(|e| JsError::new(&e))
    }

    pub fn undo(&mut self) -> Result<(), JsError> {
        self.0.undo().map_err(|e| JsError::new(&e))
    }

    pub fn auto(&mut self, n: usize, seed: u64) -> usize {
        self.0.auto(n, seed)
    }
}
