mod common;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softattr_service::{EventLog, JudgmentSubmission, ServiceConfig};

use common::{random_submission, service};

fn bucket(m: &mut JudgmentSubmission, b: usize) -> &mut Vec<String> {
    match b {
        0 => &mut m.less,
        1 => &mut m.same,
        _ => &mut m.more,
    }
}

/// One random corruption of a valid submission.
fn mutate<R: Rng>(valid: &JudgmentSubmission, anchor: &str, foreign: &[String], rng: &mut R) -> JudgmentSubmission {
    let mut m = valid.clone();
    let all: Vec<String> = valid.less.iter().chain(&valid.same).chain(&valid.more).cloned().collect();
    match rng.random_range(0..6) {
        0 => {
            let victim = all.choose(rng).unwrap().clone();
            for b in 0..3 {
                bucket(&mut m, b).retain(|x| *x != victim);
            }
        }
        1 => {
            let c = all.choose(rng).unwrap().clone();
            bucket(&mut m, rng.random_range(0..3)).push(c);
        }
        2 => {
            let f = foreign.choose(rng).unwrap().clone();
            bucket(&mut m, rng.random_range(0..3)).push(f);
        }
        3 => bucket(&mut m, rng.random_range(0..3)).push(anchor.to_string()),
        4 => {
            let f = foreign.choose(rng).unwrap().clone();
            let b = (0..3).filter(|&b| !bucket(&mut m, b).is_empty()).collect::<Vec<_>>();
            let v = bucket(&mut m, *b.choose(rng).unwrap());
            let i = rng.random_range(0..v.len());
            v[i] = f;
        }
        _ => m.task_id = format!("{}x", m.task_id),
    }
    bucket(&mut m, rng.random_range(0..3)).shuffle(rng);
    m
}

#[test]
fn every_mutated_judgment_is_rejected() {
    let svc = service(EventLog::in_memory(), ServiceConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ids: Vec<String> = svc.catalog().ids().map(str::to_string).collect();
    let mut rejected = 0;
    let mut tried = 0;
    while tried < 1000 {
        let s = svc.create_session(&format!("f{tried}")).unwrap();
        let seen: Vec<String> = ids.choose_multiple(&mut rng, 25).cloned().collect();
        svc.submit_seen(&s.session_id, &seen).unwrap();
        let task = svc.next_task(&s.session_id).unwrap();
        let valid = random_submission(&task, &mut rng);
        let served: Vec<&String> = std::iter::once(&task.task.anchor).chain(&task.task.candidates).collect();
        let foreign: Vec<String> = ids.iter().filter(|i| !served.contains(i)).cloned().collect();
        let log_len = svc.log_records().len();
        for _ in 0..50 {
            let bad = mutate(&valid, &task.task.anchor, &foreign, &mut rng);
            tried += 1;
            if svc.submit_judgment(&s.session_id, &bad).is_err() {
                rejected += 1;
            }
        }
        assert_eq!(svc.log_records().len(), log_len, "a rejected submission reached the log");
        svc.submit_judgment(&s.session_id, &valid).unwrap();
    }
    assert_eq!(rejected, tried);
}
