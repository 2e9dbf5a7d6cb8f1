use csmbench_web::{scenario_keys, Demo};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn offers_desk_scenarios_only() {
    let keys = scenario_keys();
    assert_eq!(keys[0], "ping_pong");
    assert!(keys.contains(&"Full.baseline".to_string()));
    assert!(!keys.iter().any(|k| k.contains("full_scale")));
    for k in &keys {
        Demo::open(k).unwrap();
    }
    assert!(Demo::open("Full.nope").is_err());
}

#[test]
fn baseline_shows_eight_lifelines() {
    let d = Demo::open("Full.baseline").unwrap();
    assert_eq!(parse(&d.state())["instances"].as_array().unwrap().len(), 8);
    assert_eq!(parse(&d.trace())["chart"]["lifelines"].as_array().unwrap().len(), 8);
}

#[test]
fn step_grows_chart_and_undo_shrinks_it() {
    let mut d = Demo::open("ping_pong").unwrap();
    let steps = parse(&d.steps());
    assert_eq!(steps["steps"][0]["step"]["rule"], "serve");
    d.fire(0, d.version()).unwrap();
    let t = parse(&d.trace());
    assert_eq!(t["length"], 1);
    assert_eq!(t["chart"]["events"][0]["kind"], "message");
    assert!(d.fire(0, 0).unwrap_err().contains("stale"));
    d.undo().unwrap();
    assert_eq!(parse(&d.trace())["length"], 0);
    assert!(d.undo().is_err());
}

#[test]
fn auto_is_seeded() {
    let mut a = Demo::open("Full.baseline").unwrap();
    let mut b = Demo::open("Full.baseline").unwrap();
    assert_eq!(a.auto(20, 3), 20);
    b.auto(20, 3);
    assert_eq!(a.trace(), b.trace());
}
