"""Prompt-based issue-commit link recovery."""

from linkcloze._core import (
    auc,
    cliffs_delta,
    default_templates,
    label_probability,
    metrics,
    pgd_step,
    render,
    run_cli,
    split_sizes,
    synth_overlap,
    wilcoxon,
)

__all__ = [
    "auc",
    "cliffs_delta",
    "default_templates",
    "label_probability",
    "metrics",
    "pgd_step",
    "render",
    "run_cli",
    "split_sizes",
    "synth_overlap",
    "wilcoxon",
]
