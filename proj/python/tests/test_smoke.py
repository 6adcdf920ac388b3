import json
import math

import numpy as np
import pytest

import linkcloze


def test_metrics_match_definitions():
    r = linkcloze.metrics(tp=8, fp=2, fn=4, tn=6)
    assert r["precision"] == pytest.approx(0.8)
    assert r["recall"] == pytest.approx(8 / 12)
    p, rec = 0.8, 8 / 12
    assert r["f1"] == pytest.approx(2 * p * rec / (p + rec))
    assert r["mcc"] == pytest.approx((8 * 6 - 2 * 4) / math.sqrt(10 * 12 * 8 * 10))
    assert r["acc"] == pytest.approx(14 / 20)
    assert linkcloze.metrics(0, 0, 3, 3)["precision"] is None


def test_auc_counts_ties_as_half():
    assert linkcloze.auc([0.9, 0.5, 0.5, 0.1], [1, 1, 0, 0]) == pytest.approx(0.875)
    assert linkcloze.auc([0.3, 0.4], [1, 1]) is None


def test_wilcoxon_and_cliffs_delta():
    a = [96.1, 95.2, 97.4, 94.8, 96.6, 98.0]
    b = [80.3, 82.1, 79.9, 85.0, 77.4, 83.2]
    assert linkcloze.wilcoxon(a, b) == pytest.approx(0.03125)
    assert linkcloze.cliffs_delta(a, b) == 1.0
    assert linkcloze.cliffs_delta(b, a) == -1.0


def test_label_probability_complements():
    probs = np.random.default_rng(0).random(50)
    probs /= probs.sum()
    pos = linkcloze.label_probability(probs, [1, 2], [3])
    neg = linkcloze.label_probability(probs, [3], [1, 2])
    assert pos + neg == pytest.approx(1.0, abs=1e-12)


def test_pgd_step_stays_in_budget():
    rng = np.random.default_rng(1)
    delta = rng.uniform(-0.5, 0.5, size=(4, 3))
    for _ in range(10):
        delta = linkcloze.pgd_step(delta, rng.normal(size=(4, 3)), 0.3, 0.5)
        assert np.abs(delta).max() <= 0.5


def test_render_and_templates():
    templates = linkcloze.default_templates()
    assert len(templates) >= 1
    _, text = templates[0]
    rendered = linkcloze.render("NPE in logger", "fix NPE", "if (x != null)", text)
    assert "NPE in logger" in rendered
    assert "[MASK]" in rendered


def test_synthetic_corpus_and_split():
    text = linkcloze.synth_overlap(true_links=50, negative_ratio=1.0, seed=3)
    records = [json.loads(line) for line in text.splitlines() if line]
    links = [r for r in records if r["kind"] == "link"]
    assert sum(r["label"] for r in links) == 50
    assert len(links) == 100
    assert linkcloze.split_sizes(text, 7) == (80, 10, 10)
    assert linkcloze.synth_overlap(50, 1.0, 3) == text


def test_cli_round_trip(tmp_path):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text(linkcloze.synth_overlap(true_links=30, negative_ratio=1.0, seed=2))
    code, _, err = linkcloze.run_cli(["prepare", "--corpus", str(corpus), "--out", str(tmp_path / "p")])
    assert code == 0, err
    assert (tmp_path / "p" / "train.jsonl").exists()
    code, _, err = linkcloze.run_cli(["prepare", "--corpus", str(tmp_path / "missing.jsonl"), "--out", "x"])
    assert code == 2
    assert "missing.jsonl" in err
