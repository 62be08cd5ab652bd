use eig_critic::corpus::{prepare_commit_corpus, prepare_edit_corpus};
use eig_critic::synthetic::{separable_commit_corpus, separable_edit_corpus};
use eig_critic::weights;
use eig_critic::{train, CommitSample, CriticParams, HashEmbedder, SlateSample, TrainConfig, TrainData, TrainOutcome};

struct Corpora {
    edit_train: Vec<SlateSample>,
    edit_dev: Vec<SlateSample>,
    commit_train: Vec<CommitSample>,
    commit_dev: Vec<CommitSample>,
}

fn corpora() -> Corpora {
    let edit = prepare_edit_corpus(&separable_edit_corpus(200, 3), &HashEmbedder).unwrap();
    let commit = prepare_commit_corpus(&separable_commit_corpus(1000, 4), &HashEmbedder).unwrap();
    let (et, ed) = edit.split_at(160);
    let (ct, cd) = commit.split_at(800);
    Corpora {
        edit_train: et.to_vec(),
        edit_dev: ed.to_vec(),
        commit_train: ct.to_vec(),
        commit_dev: cd.to_vec(),
    }
}

fn run(c: &Corpora) -> TrainOutcome {
    let data = TrainData {
        edit_train: &c.edit_train,
        edit_dev: &c.edit_dev,
        commit_train: &c.commit_train,
        commit_dev: &c.commit_dev,
    };
    train(data, &TrainConfig::default(), CriticParams::init(0)).unwrap()
}

#[test]
fn separable_corpora_are_learned_deterministically() {
    let c = corpora();
    let first = run(&c);
    let last = first.metrics.last().unwrap();
    assert_eq!(first.metrics.len(), 8);
    assert!(last.dev_slate_accuracy > 0.95, "{last:?}");
    assert!(last.dev_commit_accuracy > 0.95, "{last:?}");
    let start = &first.metrics[0];
    assert!(last.edit_loss < start.edit_loss, "{:?}", first.metrics);
    assert!(last.commit_loss < start.commit_loss, "{:?}", first.metrics);
    assert!(first.params.is_finite());

    let second = run(&c);
    assert_eq!(first.params.hash(), second.params.hash());
    assert_eq!(first.metrics, second.metrics);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("critic.eigw");
    weights::save(&first.params, &path).unwrap();
    assert_eq!(weights::load(&path).unwrap().hash(), first.params.hash());
}

#[test]
fn slates_need_exactly_one_positive() {
    let mut rows = separable_edit_corpus(3, 9);
    rows[1].labels.iter_mut().for_each(|l| *l = 0);
    let err = prepare_edit_corpus(&rows, &HashEmbedder).unwrap_err().to_string();
    assert!(err.contains(&rows[1].group_id), "{err}");
    assert!(err.contains("row 1"), "{err}");

    let mut rows = separable_edit_corpus(2, 9);
    rows[0].labels.iter_mut().for_each(|l| *l = 1);
    assert!(prepare_edit_corpus(&rows, &HashEmbedder).is_err());
}
