use std::collections::BTreeMap;

use granite::experiment::mine_repository;
use granite::fixture::{build_fixture, RENAMED_METHOD, REVERTED_METHOD, WHITESPACE_METHOD};
use granite::modules::ModuleId;
use granite::repo::Repo;

#[test]
fn mining_matches_the_script_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let fx = build_fixture(&dir.path().join("repo")).unwrap();
    assert_eq!(fx.chain.len(), 30);
    let mined = mine_repository(&fx.path, "v*").unwrap();
    assert_eq!(mined.releases.len(), fx.releases.len());

    for (got, want) in mined.releases.iter().zip(&fx.releases) {
        assert_eq!(got.pair.r_tag, want.r_tag);
        assert_eq!(got.pair.commits.len(), want.commits);
        let ids: Vec<&ModuleId> = got.modules.iter().map(|m| &m.def.id).collect();
        let expected: Vec<&ModuleId> = want.modules.keys().collect();
        assert_eq!(ids, expected, "module set at {}", want.r_tag);
        for m in &got.modules {
            let t = &want.modules[&m.def.id];
            let seen = (m.loc(), m.changes, m.sizes.delta_release, m.sizes.delta_commit);
            assert_eq!(
                seen,
                (t.loc, t.changes, t.delta_release, t.delta_commit),
                "{} at {}",
                m.def.id,
                want.r_tag
            );
            let p = &got.process[&m.def.id];
            assert_eq!(p.get("commits"), Some(t.prior_changes as f64), "{}", m.def.id);
            assert_eq!(p.get("churn"), Some(t.prior_churn as f64), "{}", m.def.id);
        }
    }
}

#[test]
fn scripted_edge_cases_are_present() {
    let dir = tempfile::tempdir().unwrap();
    let fx = build_fixture(dir.path()).unwrap();
    let first: BTreeMap<String, _> = fx.releases[0]
        .modules
        .iter()
        .map(|(id, t)| (id.to_string(), *t))
        .collect();
    let reverted = first[REVERTED_METHOD];
    assert_eq!((reverted.delta_release, reverted.delta_commit), (0, 4));
    assert_eq!(first[WHITESPACE_METHOD].changes, 2);
    assert_eq!(first[WHITESPACE_METHOD].delta_commit, 3);
    assert_eq!(first[RENAMED_METHOD].delta_commit, 2);

    let repo = Repo::open(&fx.path).unwrap();
    let tip = repo.resolve_commit("v2.0").unwrap();
    let chain = repo.first_parent_ancestry(&tip).unwrap();
    assert!(fx.side_commits.iter().all(|c| !chain.contains(c)));
    assert_eq!(chain.len(), fx.chain.len());
}
