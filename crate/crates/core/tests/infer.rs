mod common;

use bncritic::corpus::{build_md_model, OUTCOMES};
use bncritic::infer::{joint_enumerate, loo_predictives, posterior, Engine, Evidence};
use common::{random_rows, ObservableJoint};

#[test]
fn loo_matches_joint_on_every_corpus_network() {
    for entry in common::corpus() {
        let net = &entry.network;
        let oracle = ObservableJoint::of(net);
        let engine = Engine::new(net).unwrap();
        for row in random_rows(net, 200, 17) {
            let got = engine.loo_predictives(&row).unwrap();
            for (k, pd) in got.iter().enumerate() {
                let want = oracle.loo(&row, k);
                assert!(pd.is_normalized());
                for (a, b) in pd.iter().zip(&want) {
                    assert!((a - b).abs() < 1e-9, "{} row {row:?} node {k}: {a} vs {b}", entry.slug);
                }
            }
        }
    }
}

#[test]
fn md_joint_is_complete() {
    let net = build_md_model();
    let joint = joint_enumerate(&net).unwrap();
    // 4 * 3 * 3 * 4 latent states times 4^5 observable states.
    assert_eq!(joint.len(), 110_592);
    let total: f64 = joint.values().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn healed_posterior_matches_joint() {
    let net = build_md_model();
    let joint = joint_enumerate(&net).unwrap();
    let healed = OUTCOMES.iter().position(|&s| s == "healed").unwrap();
    let mut ev = Evidence::new();
    let mut pairs = Vec::new();
    for name in net.observable_names() {
        ev.insert(name.clone(), healed);
        pairs.push((net.variable_index(&name).unwrap(), healed));
    }
    for latent in ["theta1", "theta2", "theta3", "theta4"] {
        let q = net.variable_index(latent).unwrap();
        let want = joint.conditional(q, &pairs, latent).unwrap();
        let got = posterior(&net, &ev, latent).unwrap();
        for (a, b) in got.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-9, "{latent}: {a} vs {b}");
        }
    }
    // Healed everywhere points to the best skill level.
    let t1 = posterior(&net, &ev, "theta1").unwrap();
    assert_eq!(bncritic::score::modal_state(&t1), t1.len() - 1);
}

#[test]
fn partial_evidence_posteriors_match_joint() {
    let net = build_md_model();
    let joint = joint_enumerate(&net).unwrap();
    let engine = Engine::new(&net).unwrap();
    for row in random_rows(&net, 30, 5) {
        // Keep X1, X3 and X5 only.
        let mut ev = Evidence::new();
        let mut pairs = Vec::new();
        for k in [0usize, 2, 4] {
            let name = format!("X{}", k + 1);
            ev.insert(name.clone(), row[k]);
            pairs.push((net.variable_index(&name).unwrap(), row[k]));
        }
        for q in ["theta1", "theta4", "X2", "X4"] {
            let want = joint.conditional(net.variable_index(q).unwrap(), &pairs, q);
            let got = engine.posterior(&ev, q);
            match (got, want) {
                (Ok(g), Ok(w)) => {
                    for (a, b) in g.iter().zip(w.iter()) {
                        assert!((a - b).abs() < 1e-9);
                    }
                }
                (Err(g), Err(_)) => assert_eq!(g.code(), "ZERO_EVIDENCE_PROBABILITY"),
                (g, w) => panic!("engine {g:?} vs joint {w:?}"),
            }
        }
    }
}

#[test]
fn evidence_order_does_not_matter() {
    let net = build_md_model();
    let forward = Evidence::new().with("X1", 2).with("X3", 1).with("X5", 3);
    let backward = Evidence::new().with("X5", 3).with("X3", 1).with("X1", 2);
    let a = posterior(&net, &forward, "theta2").unwrap();
    let b = posterior(&net, &backward, "theta2").unwrap();
    assert_eq!(a.probabilities(), b.probabilities());
}

#[test]
fn symmetric_observables_get_symmetric_forecasts() {
    // X1 and X2 share parents and tables.
    let net = build_md_model();
    for row in random_rows(&net, 50, 9) {
        let mut swapped = row.clone();
        swapped.swap(0, 1);
        let a = loo_predictives(&net, &row).unwrap();
        let b = loo_predictives(&net, &swapped).unwrap();
        for (x, y) in a[0].iter().zip(b[1].iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn bad_queries_are_reported() {
    let net = build_md_model();
    let engine = Engine::new(&net).unwrap();
    let ev = Evidence::new().with("X1", 0);
    assert_eq!(engine.posterior(&ev, "nope").unwrap_err().code(), "UNKNOWN_VARIABLE");
    assert_eq!(engine.posterior(&ev, "X1").unwrap_err().code(), "QUERY_IN_EVIDENCE");
    let ev = Evidence::new().with("X1", 9);
    assert_eq!(engine.posterior(&ev, "X2").unwrap_err().code(), "STATE_OUT_OF_RANGE");
    let ev = Evidence::new().with("theta1", 0);
    assert_eq!(engine.posterior(&ev, "X2").unwrap_err().code(), "NOT_OBSERVABLE");
    assert_eq!(engine.loo_predictives(&[0, 0]).unwrap_err().code(), "ROW_LENGTH");
}
