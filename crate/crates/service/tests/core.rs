mod common;

use common::*;
use glossa::harness::{run_active_learning, OracleAnnotator};
use glossa_service::{SubmitRequest, TicketStatus};

fn gold_request(d: &glossa::synth::SynthData, task_id: &str) -> SubmitRequest {
    let nid = task_id.split('@').next().unwrap();
    SubmitRequest {
        annotator_id: "a".into(),
        tags: gold_strings(d.test.get(nid).unwrap()),
    }
}

fn train(core: &mut glossa_service::Core) {
    let job = core.begin_retrain().expect("work queued");
    core.finish_retrain(job.run().map_err(|e| e.to_string()));
}

#[test]
fn submissions_during_retrain_join_the_next_one() {
    let d = small(21);
    let dir = tempfile::tempdir().unwrap();
    let mut core = open_core(&d, dir.path());
    let t0 = core.ensure_model().unwrap();
    train(&mut core);
    assert!(matches!(core.ticket(t0).unwrap().status, TicketStatus::Done { version: 0, .. }));

    let a = core.next_task().unwrap();
    let (ra, queued) = core.submit(&a.task_id, &gold_request(&d, &a.task_id)).unwrap();
    assert!(queued);
    let t1 = ra.ticket.unwrap();
    let job1 = core.begin_retrain().unwrap();
    assert_eq!(core.ticket(t1).unwrap().status, TicketStatus::Running);

    // The old model keeps serving while job1 trains.
    let b = core.next_task().unwrap();
    assert_eq!(b.model_version, 0);
    let (rb, _) = core.submit(&b.task_id, &gold_request(&d, &b.task_id)).unwrap();
    let t2 = rb.ticket.unwrap();
    assert_ne!(t1, t2);

    core.finish_retrain(job1.run().map_err(|e| e.to_string()));
    assert_eq!(core.learner().snapshot().unwrap().version, 0);
    assert_eq!(core.ticket(t1).unwrap().status, TicketStatus::Running);

    train(&mut core);
    for t in [t1, t2] {
        assert!(matches!(core.ticket(t).unwrap().status, TicketStatus::Done { version: 2, .. }));
    }
    let sentences = |id: &str| d.test.get(id).unwrap().active_sentences().count();
    let expected = d.base.training_sentences().len() + sentences(&a.narrative_id) + sentences(&b.narrative_id);
    assert_eq!(core.learner().pool().len(), expected);
    assert!(core.begin_retrain().is_none());

    drop(core);
    let reopened = open_core(&d, dir.path());
    assert_eq!(reopened.learner().log().len(), 2);
    assert_eq!(reopened.learner().log()[1].model_version, 0);
}

#[test]
fn failed_retrain_keeps_the_old_model_and_the_log() {
    let d = small(22);
    let dir = tempfile::tempdir().unwrap();
    let mut core = open_core(&d, dir.path());
    core.ensure_model();
    train(&mut core);
    let a = core.next_task().unwrap();
    let (r, _) = core.submit(&a.task_id, &gold_request(&d, &a.task_id)).unwrap();
    let _job = core.begin_retrain().unwrap();
    core.finish_retrain(Err("disk on fire".into()));
    assert_eq!(
        core.ticket(r.ticket.unwrap()).unwrap().status,
        TicketStatus::Failed { error: "disk on fire".into() }
    );
    assert_eq!(core.metrics().last_error.as_deref(), Some("disk on fire"));
    assert_eq!(core.learner().snapshot().unwrap().version, 0);
    assert!(core.next_task().is_ok());
    assert_eq!(core.records().len(), 1);

    let retry = core.request_retrain().unwrap();
    train(&mut core);
    assert!(matches!(core.ticket(retry).unwrap().status, TicketStatus::Done { version: 1, .. }));
    assert!(core.metrics().last_error.is_none());
}

#[test]
fn replay_reproduces_the_harness_log() {
    let d = small(23);
    let dir = tempfile::tempdir().unwrap();
    let mut core = open_core(&d, dir.path());
    core.ensure_model();
    while !core.learner().is_done() {
        train(&mut core);
        let t = core.next_task().unwrap();
        core.submit(&t.task_id, &gold_request(&d, &t.task_id)).unwrap();
    }
    let mut reference = learner(&d);
    let expected = run_active_learning(&mut reference, &mut OracleAnnotator).unwrap();
    assert_eq!(core.learner().log(), expected.as_slice());
    drop(core);
    assert_eq!(open_core(&d, dir.path()).learner().log(), expected.as_slice());
}
