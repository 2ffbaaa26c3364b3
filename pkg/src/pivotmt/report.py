"""Figure rendering for experiment reports (headless matplotlib)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_score_figure(systems, path) -> None:
    """Bar chart of BLEU per system."""
    names = sorted(systems)
    scores = [systems[n].score for n in names]
    fig, ax = plt.subplots(figsize=(1.6 + 1.2 * len(names), 3.2))
    ax.bar(names, scores, color="#4878a8")
    ax.set_ylabel("BLEU")
    ax.set_ylim(0, max(100.0, max(scores) + 5))
    for i, s in enumerate(scores):
        ax.text(i, s + 1, f"{s:.1f}", ha="center", fontsize=9)
    ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_em_trace_figure(traces, path) -> None:
    """Per-model EM log-likelihood by iteration."""
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for name in sorted(traces):
        ys = traces[name]
        ax.plot(range(1, len(ys) + 1), ys, marker=".", label=name)
    ax.set_xlabel("EM iteration")
    ax.set_ylabel("corpus log-likelihood")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
