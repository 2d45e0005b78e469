#![allow(dead_code)]

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use softattr::corpus::ItemCatalog;
use softattr::synth::{LowRankConfig, RaterConfig, SyntheticConfig, SyntheticCorpus};
use softattr_service::{
    compute_rankings, AnnotationService, AttributeRankings, EventLog, JudgmentSubmission, ServiceConfig, TaskView,
};

pub fn fixture() -> (ItemCatalog, Vec<AttributeRankings>) {
    let corpus = SyntheticCorpus::generate(&SyntheticConfig {
        world: LowRankConfig { users: 30, items: 60, density: 0.2, ..Default::default() },
        raters: RaterConfig { raters: 2, seen_per_rater: 20, ..Default::default() },
        taggers_per_item: 2,
        ..Default::default()
    })
    .unwrap();
    let attrs: Vec<_> = corpus.attributes.iter().map(|a| a.attribute.clone()).collect();
    let rankings = compute_rankings(&corpus.catalog, &corpus.reviews, &attrs).unwrap();
    (corpus.catalog, rankings)
}

pub fn service(log: EventLog, config: ServiceConfig) -> AnnotationService {
    let (catalog, rankings) = fixture();
    AnnotationService::new(config, catalog, rankings, log).unwrap()
}

/// Random bucket assignment of every candidate.
pub fn random_submission<R: Rng>(task: &TaskView, rng: &mut R) -> JudgmentSubmission {
    let mut sub = JudgmentSubmission { task_id: task.task.task_id.clone(), less: vec![], same: vec![], more: vec![] };
    for c in &task.task.candidates {
        match rng.random_range(0..3) {
            0 => sub.less.push(c.clone()),
            1 => sub.same.push(c.clone()),
            _ => sub.more.push(c.clone()),
        }
    }
    sub
}

/// Drives `raters` sessions through the protocol, with some insufficient
/// seen submissions, re-polled tasks and rejected judgments mixed in.
pub fn workload<R: Rng>(svc: &AnnotationService, raters: usize, rng: &mut R) {
    let ids: Vec<String> = svc.catalog().ids().map(str::to_string).collect();
    for r in 0..raters {
        let s = svc.create_session(&format!("rater{r}")).unwrap();
        if rng.random_bool(0.3) {
            let few: Vec<String> = ids.choose_multiple(rng, 4).cloned().collect();
            svc.submit_seen(&s.session_id, &few).unwrap();
        }
        let n = rng.random_range(11..=40);
        let mut seen: Vec<String> = ids.choose_multiple(rng, n).cloned().collect();
        seen.shuffle(rng);
        svc.submit_seen(&s.session_id, &seen).unwrap();
        for _ in 0..rng.random_range(1..=3) {
            let Ok(task) = svc.next_task(&s.session_id) else { break };
            assert_eq!(svc.next_task(&s.session_id).unwrap(), task);
            if rng.random_bool(0.2) {
                let mut bad = random_submission(&task, rng);
                bad.less.push(task.task.anchor.clone());
                assert!(svc.submit_judgment(&s.session_id, &bad).is_err());
            }
            svc.submit_judgment(&s.session_id, &random_submission(&task, rng)).unwrap();
        }
    }
}
