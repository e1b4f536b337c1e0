mod common;

use bncritic::corpus::{
    apply_transform, build_md_model, run_study, standard_transforms, touched_observables, ErrorTransform,
    NodeSpec, Strength, DATA_GENERATION, PRIOR_SHIFT,
};
use bncritic::critic::StudyConfig;
use bncritic::infer::joint_enumerate;
use bncritic::network::{config_states, Network};
use bncritic::score::ScoreKind;
use common::{expected_rps, mean_loo_tv, ObservableJoint};

const DELTA: f64 = 0.05;

fn model(slug: &str) -> Network {
    common::corpus()
        .into_iter()
        .find(|e| e.slug == slug)
        .unwrap_or_else(|| panic!("no corpus model {slug}"))
        .network
}

fn marginal_by_name(net: &Network, names: &[&str]) -> Vec<f64> {
    let idx: Vec<usize> = names.iter().map(|n| net.variable_index(n).unwrap()).collect();
    joint_enumerate(net).unwrap().marginal(&idx)
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{x} vs {y}");
    }
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[test]
fn corpus_has_ten_valid_models() {
    let corpus = common::corpus();
    assert_eq!(corpus.len(), 10);
    assert_eq!(corpus[0].name, DATA_GENERATION.0);
    let names: Vec<&str> = corpus[1..].iter().map(|e| e.name.as_str()).collect();
    let recipes: Vec<&str> = standard_transforms().iter().map(|m| m.name).collect();
    assert_eq!(names, recipes);
    for e in &corpus {
        assert!(!bncritic::network::validate(&e.network).has_errors(), "{}", e.slug);
        assert_eq!(e.network.observable_names(), ["X1", "X2", "X3", "X4", "X5"]);
    }
}

#[test]
fn structural_edits_land_where_expected() {
    let base = build_md_model();
    assert!(model("node-exclusion").variable("theta4").is_none());
    assert_eq!(model("node-exclusion").cpt("X4").unwrap().parents, ["theta3"]);
    let inc = model("node-inclusion");
    assert_eq!(inc.variable("theta5").unwrap().states, ["community", "academic"]);
    assert_eq!(inc.cpt("X5").unwrap().parents, ["theta3", "theta4", "theta5"]);
    assert_eq!(
        model("state-exclusion").variable("theta4").unwrap().states,
        ["routine", "custom to patient"]
    );
    assert_eq!(
        model("state-inclusion").variable("theta4").unwrap().states,
        ["trial-and-error", "by-the-book strict", "by-the-book adapted", "custom to patient"]
    );
    let prior = model("prior-probability");
    for (b, p) in base.cpt("theta4").unwrap().table.iter().zip(&prior.cpt("theta4").unwrap().table) {
        assert!((p[0] - b[0] - PRIOR_SHIFT).abs() < 1e-12);
        assert!((b[2] - p[2] - PRIOR_SHIFT).abs() < 1e-12);
        assert_eq!(p[1], b[1]);
    }
    assert_eq!(model("strong-edge-exclusion").cpt("X4").unwrap().parents, ["theta3"]);
    assert_eq!(model("weak-edge-exclusion").cpt("X3").unwrap().parents, ["theta2", "theta3"]);
    assert_eq!(model("strong-edge-inclusion").cpt("X1").unwrap().parents, ["theta2", "theta3", "theta4"]);
    assert_eq!(model("weak-edge-inclusion").cpt("X1").unwrap().parents, ["theta2", "theta3", "theta4"]);
}

#[test]
fn identity_edits_preserve_the_joint() {
    let base = build_md_model();
    let want = joint_enumerate(&base).unwrap();
    let same_rows = ErrorTransform::PerturbPriors {
        node: "theta4".into(),
        rows: base.cpt("theta4").unwrap().table.clone(),
    };
    let net = apply_transform(&base, &same_rows).unwrap();
    assert_close(joint_enumerate(&net).unwrap().values(), want.values(), 1e-12);

    let split = ErrorTransform::SplitState {
        node: "theta4".into(),
        state: "by-the-book".into(),
        labels: ("a".into(), "b".into()),
    };
    let merge = ErrorTransform::MergeStates {
        node: "theta4".into(),
        states: ("a".into(), "b".into()),
        label: "by-the-book".into(),
    };
    let round = apply_transform(&apply_transform(&base, &split).unwrap(), &merge).unwrap();
    assert_eq!(round.variables(), base.variables());
    assert_close(joint_enumerate(&round).unwrap().values(), want.values(), 1e-9);
}

#[test]
fn split_keeps_single_observable_marginals() {
    let base = build_md_model();
    let split = model("state-inclusion");
    for x in ["X1", "X2", "X3", "X4", "X5"] {
        assert_close(&marginal_by_name(&split, &[x]), &marginal_by_name(&base, &[x]), 1e-9);
    }
    // The halves pull apart, so pairs sharing theta4 do change.
    let a = marginal_by_name(&split, &["X4", "X5"]);
    let b = marginal_by_name(&base, &["X4", "X5"]);
    assert!(tv(&a, &b) > 1e-6);
}

#[test]
fn excluding_an_edge_keeps_the_family_marginal() {
    let base = build_md_model();
    let strong = model("strong-edge-exclusion");
    assert_close(
        &marginal_by_name(&strong, &["theta3", "X4"]),
        &marginal_by_name(&base, &["theta3", "X4"]),
        1e-9,
    );
    let weak = model("weak-edge-exclusion");
    assert_close(
        &marginal_by_name(&weak, &["theta2", "theta3", "X3"]),
        &marginal_by_name(&base, &["theta2", "theta3", "X3"]),
        1e-9,
    );
    let node = model("node-exclusion");
    for family in [&["theta3", "X4"][..], &["theta3", "X5"], &["theta2", "theta3", "X3"]] {
        assert_close(&marginal_by_name(&node, family), &marginal_by_name(&base, family), 1e-9);
    }
}

/// Minimum and maximum TV between the child's rows for the first and last
/// state of its last parent.
fn last_parent_tv(net: &Network, child: &str) -> (f64, f64) {
    let cpt = net.cpt(child).unwrap();
    let cards: Vec<usize> = cpt.parents.iter().map(|p| net.variable(p).unwrap().cardinality()).collect();
    let m = *cards.last().unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (r, row) in cpt.table.iter().enumerate() {
        let states = config_states(r, &cards);
        if *states.last().unwrap() != 0 {
            continue;
        }
        let d = tv(row, &cpt.table[r + m - 1]);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

#[test]
fn included_edge_strengths() {
    let (strong, _) = last_parent_tv(&model("strong-edge-inclusion"), "X1");
    let (_, weak) = last_parent_tv(&model("weak-edge-inclusion"), "X1");
    assert!(strong >= 0.3, "{strong}");
    assert!(weak <= 0.1 + 1e-12, "{weak}");
    assert_eq!(Strength::Strong.alpha(), 0.4);
    let (_, node) = last_parent_tv(&model("node-inclusion"), "X4");
    assert!(node <= 0.1 + 1e-12);
}

#[test]
fn base_theta4_edges_have_the_stated_strengths() {
    let base = build_md_model();
    let (_, x3) = last_parent_tv(&base, "X3");
    let (_, x4) = last_parent_tv(&base, "X4");
    assert!(x3 <= 0.1 + 1e-12, "{x3}");
    assert!(x4 >= 0.3, "{x4}");
}

#[test]
fn node_exclusion_clears_the_calibration_margin() {
    let truth = ObservableJoint::of(&build_md_model());
    let excluded = ObservableJoint::of(&model("node-exclusion"));
    let d = mean_loo_tv(&truth, &excluded, 4);
    assert!(d >= DELTA, "mean LOO TV at X5 = {d}");
}

#[test]
fn severity_is_monotone_in_edge_strength() {
    let truth = ObservableJoint::of(&build_md_model());
    let gap = |slug: &str, k: usize| {
        let other = ObservableJoint::of(&model(slug));
        expected_rps(&truth, &truth, k) - expected_rps(&truth, &other, k)
    };
    // Each exclusion affects one node: X4 for the strong edge, X3 for the weak.
    let strong = gap("strong-edge-exclusion", 3);
    let weak = gap("weak-edge-exclusion", 2);
    assert!(strong >= weak, "{strong} < {weak}");
    let global = |slug: &str| (0..5).map(|k| gap(slug, k)).sum::<f64>() / 5.0;
    assert!(global("strong-edge-exclusion") >= global("weak-edge-exclusion"));
}

#[test]
fn bad_transforms_are_rejected() {
    let base = build_md_model();
    let code = |t: ErrorTransform| apply_transform(&base, &t).unwrap_err().code();
    assert_eq!(code(ErrorTransform::ExcludeNode { node: "theta9".into() }), "UNKNOWN_NODE");
    assert_eq!(
        code(ErrorTransform::SplitState {
            node: "theta4".into(),
            state: "improvised".into(),
            labels: ("a".into(), "b".into()),
        }),
        "UNKNOWN_STATE"
    );
    assert_eq!(
        code(ErrorTransform::ExcludeEdge {
            parent: "theta1".into(),
            child: "X1".into(),
        }),
        "INVALID_TRANSFORM"
    );
    assert_eq!(
        code(ErrorTransform::IncludeNode {
            spec: NodeSpec {
                name: "theta5".into(),
                states: vec!["a".into(), "b".into()],
                prior: vec![0.5, 0.5],
                children: vec![("X9".into(), Strength::Weak)],
            },
        }),
        "UNKNOWN_NODE"
    );
}

#[test]
fn transforms_serialize_with_a_tag() {
    let json = serde_json::to_value(&standard_transforms()[0].transform).unwrap();
    assert_eq!(json["transform"], "exclude_node");
    for m in standard_transforms() {
        let text = serde_json::to_string(&m.transform).unwrap();
        let back: ErrorTransform = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m.transform);
    }
}

#[test]
fn study_grid_shape_and_markers() {
    let cfg = StudyConfig {
        sizes: vec![50, 100],
        replicates: 200,
        pool: 300,
        ..StudyConfig::with_seed(11)
    };
    let study = run_study(&cfg, &ScoreKind::ALL).unwrap();
    assert_eq!(study.observed.len(), 100);
    assert_eq!(study.grids.len(), 3);
    let base = build_md_model();
    for g in &study.grids {
        assert_eq!(g.columns, ["Global", "X1", "X2", "X3", "X4", "X5"]);
        assert_eq!(g.rows.len(), 10);
        for (row, m) in g.rows.iter().zip(&study.models) {
            assert_eq!(row.model, m.name);
            assert!(!row.cells[0].touched);
            for (c, cell) in row.cells.iter().enumerate().skip(1) {
                let name = &g.columns[c];
                assert_eq!(cell.touched, touched_observables(&base, &m.network).contains(name));
                assert!(cell.sizes.iter().all(|n| cfg.sizes.contains(n)));
            }
        }
        let table = study.summary_table(g.kind);
        assert!(table.lines().any(|l| l.starts_with("| Data Generation")), "{table}");
    }
    let again = run_study(&cfg, &ScoreKind::ALL).unwrap();
    assert_eq!(again.grids, study.grids);
}
