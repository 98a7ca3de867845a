import numpy as np
import pytest

import safewatch as sw


def test_feature_schema():
    names = sw.feature_names()
    assert len(names) == 34
    assert len(sw.view_indices("video")) == 19


def test_synth_features_and_training():
    corpus, truth = sw.generate(sw.preset("tiny", 3))
    ids, X, labels = sw.feature_matrix(corpus)
    assert X.shape == (len(ids), 34)
    assert set(labels) <= {"safe", "unsafe"}
    assert labels == [truth.video_labels[i] for i in ids]

    model = sw.train("forest", X, labels, seed=1)
    assert model.dim == 34
    assert len(model.predict(X)) == len(ids)
    again = sw.loads_model(model.dumps())
    assert again.predict(X) == model.predict(X)
    report = sw.evaluate(model, X, labels)
    assert 0.0 <= report["accuracy"] <= 1.0


def test_corpus_round_trip(tmp_path):
    corpus, _ = sw.generate(sw.preset("tiny", 5))
    assert sw.parse_corpus(corpus.to_jsonl()) == corpus
    corpus.save(tmp_path / "c.jsonl")
    assert sw.load_corpus(tmp_path / "c.jsonl") == corpus


def test_detection_matches_plant():
    corpus, truth = sw.generate(sw.preset("tiny", 2))
    verdicts = sw.detect_unsafe_uploaders(corpus)
    assert [v.grade for v in verdicts] == [u.grade for u in truth.uploaders]
    assert sw.detect_unsafe_commenters(corpus) == truth.unsafe_commenters
    assert sw.grade(0.5) == "moderate"


def test_modularity_and_louvain():
    g = sw.Graph(undirected=True)
    for i in range(6):
        g.add_node(f"n{i}", "unsafe" if i < 3 else "safe")
    for a, b in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        g.add_edge(a, b)
    assert sw.modularity(g, [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5)
    p = sw.louvain(g, seed=1)
    assert p.communities == 2
    assert p.modularity == pytest.approx(0.5)
    t = sw.transitions(g)
    assert t["unsafe_unsafe"] + t["safe_safe"] == t["total"] == 6


def test_planted_recovery():
    g, membership = sw.planted_partition_graph(8, 30, 0.3, 0.01, seed=1)
    p = sw.louvain(g, seed=1)
    assert sw.adjusted_rand_index(p.assignment, membership) >= 0.95


def test_errors_carry_kind():
    with pytest.raises(sw.Error) as info:
        sw.parse_corpus("not json\n")
    assert info.value.kind == "parse"
    with pytest.raises(sw.Error):
        sw.preset("nope")


def test_cli_in_process(tmp_path):
    code, out, err = sw.run_cli(["synth", "--preset", "tiny", "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "corpus.jsonl").exists()
    code, _, err = sw.run_cli(["frobnicate"])
    assert code == 2
    assert err.startswith("safewatch: error exit=2")
