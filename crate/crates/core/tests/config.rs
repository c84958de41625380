use std::fs;

use proptest::prelude::*;

use gaitlink::config::{parse_scenario, to_json, BatchManifest, Overrides};
use gaitlink::impedance::ImpedanceProfile;
use gaitlink::reproduce::{battery, Figure};
use gaitlink::sim::{ImpedanceChoice, ScenarioKind, ScenarioSpec};
use gaitlink::stream::LinkModel;
use gaitlink::Error;

const MINIMAL: &str = r#"{"schema_version":1,"id":"walk","kind":"CoupledWalk","speed":1.1,"duration":30,"impedance":"Z_soft","seed":3}"#;

#[test]
fn every_battery_scenario_round_trips() {
    for figure in Figure::ALL {
        for spec in battery(figure, 9) {
            let again = parse_scenario(&to_json(&spec).unwrap()).unwrap();
            assert_eq!(again, spec, "{}", spec.id);
        }
    }
}

#[test]
fn serialized_defaults_parse_back_identically() {
    let spec = parse_scenario(MINIMAL).unwrap();
    let text = to_json(&spec).unwrap();
    assert_eq!(to_json(&parse_scenario(&text).unwrap()).unwrap(), text);
}

fn kinds() -> impl Strategy<Value = ScenarioKind> {
    prop_oneof![
        Just(ScenarioKind::Transparency),
        Just(ScenarioKind::VirtualTeacherPlayback),
        Just(ScenarioKind::CoupledWalk),
    ]
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(
        kind in kinds(),
        speed in 0.1f64..2.0,
        duration in 1.0f64..600.0,
        seed in any::<u64>(),
        k in (0.0f64..400.0, 0.0f64..400.0, 0.05f64..10.0),
        drop in 0.0f64..0.9,
        window in 0u32..8,
        budget in 0.0f64..0.05,
    ) {
        let mut spec = ScenarioSpec::new("prop", kind, speed, duration, "Z_zero", seed);
        spec.impedance = ImpedanceChoice::Custom(ImpedanceProfile { k_low_f: k.0, k_high_f: k.1, f_cut: k.2 });
        spec.link = LinkModel { drop_probability: drop, reorder_window: window, ..LinkModel::default() };
        spec.latency_budget = budget;
        let again = parse_scenario(&to_json(&spec).unwrap()).unwrap();
        prop_assert_eq!(again, spec);
    }
}

#[test]
fn overrides_beat_the_file_and_the_file_beats_defaults() {
    let mut spec = parse_scenario(
        r#"{"schema_version":1,"id":"walk","kind":"CoupledWalk","speed":1.1,"duration":30,"impedance":"Z_soft","seed":3,"warmup":2}"#,
    )
    .unwrap();
    assert_eq!(spec.warmup, 2.0);
    assert_eq!(spec.max_torque_rate, 200.0);
    Overrides {
        seed: Some(8),
        impedance: Some("Z_stiff".into()),
        speed: None,
        duration: Some(12.0),
    }
    .apply(&mut spec)
    .unwrap();
    assert_eq!(spec.seed, 8);
    assert_eq!(spec.impedance, ImpedanceChoice::Preset("Z_stiff".into()));
    assert_eq!(spec.speed, 1.1);
    assert_eq!(spec.duration, 12.0);
    assert_eq!(spec.warmup, 2.0);
}

#[test]
fn unknown_preset_names_the_valid_ones() {
    let err = parse_scenario(&MINIMAL.replace("Z_soft", "Z_medium")).unwrap_err();
    let text = err.to_string();
    assert!(matches!(err, Error::UnknownPreset { .. }), "{err:?}");
    for name in ["Z_zero", "Z_soft", "Z_stiff", "Z_constant", "Z_designed", "Z1", "Z6"] {
        assert!(text.contains(name), "{text}");
    }
    let mut spec = parse_scenario(MINIMAL).unwrap();
    let overrides = Overrides {
        impedance: Some("Z9".into()),
        ..Overrides::default()
    };
    assert!(overrides.apply(&mut spec).is_err());
}

#[test]
fn invalid_documents_are_rejected() {
    for (doc, needle) in [
        (MINIMAL.replace("\"speed\":1.1", "\"speed\":-1"), "speed"),
        (MINIMAL.replace("\"duration\":30", "\"duration\":0"), "duration"),
        (MINIMAL.replace("\"schema_version\":1", "\"schema_version\":2"), "schema_version"),
        (MINIMAL.replace("\"seed\":3", "\"seed\":3,\"colour\":1"), "colour"),
        (MINIMAL.replace("CoupledWalk", "AsymmetricWalk"), "asymmetry"),
    ] {
        let err = parse_scenario(&doc).unwrap_err().to_string();
        assert!(err.contains(needle), "{needle}: {err}");
    }
}

#[test]
fn manifests_resolve_paths_and_derive_seeds() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("s")).unwrap();
    fs::write(dir.path().join("s/a.json"), MINIMAL.replace("walk", "a")).unwrap();
    fs::write(dir.path().join("s/b.json"), MINIMAL.replace("walk", "b")).unwrap();
    let manifest = dir.path().join("batch.json");
    fs::write(&manifest, r#"{"schema_version":1,"scenarios":["s/a.json","s/b.json"],"seed":42}"#).unwrap();
    let (m, specs) = BatchManifest::load(&manifest).unwrap();
    assert_eq!(m.seed, Some(42));
    assert_eq!(specs.iter().map(|s| s.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    assert_ne!(specs[0].seed, specs[1].seed);
    assert_eq!(BatchManifest::load(&manifest).unwrap().1, specs);

    fs::write(&manifest, r#"{"schema_version":1,"scenarios":["s/a.json","s/a.json"]}"#).unwrap();
    assert!(BatchManifest::load(&manifest).unwrap_err().to_string().contains("duplicate"));
    fs::write(&manifest, r#"{"schema_version":1,"scenarios":["s/missing.json"]}"#).unwrap();
    assert!(BatchManifest::load(&manifest).is_err());
}
