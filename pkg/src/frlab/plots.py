"""Figure rendering for CLI reports (matplotlib, headless Agg backend)."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PALETTE = ["#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb", "#222222"]


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None} if path.suffix == ".png" else None)
    plt.close(fig)
    return path


def _rank_number(v):
    return v.value if v.is_finite else None


def rank_table_figure(table, path, title: str = "") -> Path:
    """Mean Drk and Krk against |B|, plus the distribution of values."""
    by_size: dict[int, list] = {}
    unresolved = 0
    for _a, B, d, k in table.rows:
        dv, kv = _rank_number(d), _rank_number(k)
        if dv is None or kv is None:
            unresolved += 1
            continue
        by_size.setdefault(len(B), []).append((dv, kv))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    sizes = sorted(by_size)
    ax1.plot(sizes, [sum(d for d, _ in by_size[s]) / len(by_size[s]) for s in sizes], "o-", color=PALETTE[0], label="Drk")
    ax1.plot(sizes, [sum(k for _, k in by_size[s]) / len(by_size[s]) for s in sizes], "s--", color=PALETTE[1], label="Krk")
    ax1.set_xlabel("|B|")
    ax1.set_ylabel("mean rank")
    ax1.legend(frameon=False)
    counts_d = Counter(d for vals in by_size.values() for d, _ in vals)
    counts_k = Counter(k for vals in by_size.values() for _, k in vals)
    xs = sorted(set(counts_d) | set(counts_k))
    w = 0.4
    ax2.bar([x - w / 2 for x in xs], [counts_d[x] for x in xs], w, color=PALETTE[0], label="Drk")
    ax2.bar([x + w / 2 for x in xs], [counts_k[x] for x in xs], w, color=PALETTE[1], label="Krk")
    ax2.set_xlabel("rank value")
    ax2.set_ylabel("queries")
    if unresolved:
        ax2.set_title(f"{unresolved} unresolved omitted", fontsize=9)
    fig.suptitle(title or f"rank table {table.fingerprint[:10]}")
    return _save(fig, path)


def limit_figure(build, rates: dict | None, path) -> Path:
    """Adjacency picture of the approximation with the core marked, and clause rates."""
    M = build.structure
    rel = M.signature.names[0] if M.signature.names else None
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4), gridspec_kw={"width_ratios": [1.3, 1]})
    n = M.size
    grid = [[0] * n for _ in range(n)]
    if rel is not None:
        for row in M.tables[rel]:
            if len(row) == 2:
                grid[row[0]][row[1]] = 1
    ax1.imshow(grid or [[0]], cmap="Greys", interpolation="nearest")
    if build.core:
        c = len(build.core)
        ax1.add_patch(plt.Rectangle((-0.5, -0.5), c, c, fill=False, edgecolor=PALETTE[1], lw=2))
    ax1.set_title(f"{build.spec.label if build.spec else ''} n={n}, core={len(build.core)}", fontsize=10)
    ax1.set_xticks([])
    ax1.set_yticks([])
    if rates:
        names = list(rates)
        ax2.barh(names, [rates[k] for k in names], color=PALETTE[2])
        ax2.set_xlim(0, 1)
        ax2.set_xlabel("rate")
    else:
        ax2.axis("off")
    return _save(fig, path)


def involvement_figure(report, path) -> Path:
    """Growth of A_n, B_n per stage and the final partial map as arrows."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    stages = [r.stage for r in report.history]
    ax1.step(stages, [len(r.A) for r in report.history], where="post", color=PALETTE[0], label="|A_n|")
    ax1.step(stages, [len(r.B) for r in report.history], where="post", color=PALETTE[1], ls="--", label="|B_n|")
    ax1.set_xlabel("stage")
    ax1.set_ylabel("size")
    ax1.legend(frameon=False)
    pairs = sorted(report.g.items())
    for i, (a, b) in enumerate(pairs):
        ax2.annotate("", xy=(1, b), xytext=(0, a), arrowprops={"arrowstyle": "->", "color": PALETTE[i % len(PALETTE)], "lw": 1})
    top = max([max(p) for p in pairs], default=1)
    ax2.set_xlim(-0.2, 1.2)
    ax2.set_ylim(-1, top + 1)
    ax2.set_xticks([0, 1], ["dom g", "im g"])
    ax2.set_ylabel("element")
    fig.suptitle(f"{report.spec} / {report.closure}, sigma={dict(sorted(report.sigma.items()))}", fontsize=10)
    return _save(fig, path)


def props_figure(report, path) -> Path:
    """Stacked pass / fail / unresolved counts per property."""
    names = [r.name for r in report.results]
    fig, ax = plt.subplots(figsize=(7, 0.5 + 0.45 * max(len(names), 1)))
    left = [0] * len(names)
    for attr, color in (("passed", PALETTE[2]), ("failed", PALETTE[1]), ("unresolved", PALETTE[6])):
        vals = [getattr(r, attr) for r in report.results]
        ax.barh(names, vals, left=left, color=color, label=attr)
        left = [l + v for l, v in zip(left, vals)]
    ax.set_xscale("symlog")
    ax.set_xlabel("cases")
    ax.legend(frameon=False, fontsize=8, loc="lower right")
    ax.set_title(f"suite {report.suite} (seed {report.seed}): {report.status}")
    return _save(fig, path)


def counts_figure(counts: dict, path, xlabel: str, ylabel: str, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.4))
    keys = list(counts)
    ax.bar([str(k) for k in keys], [counts[k] for k in keys], color=PALETTE[0])
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def support_figure(verdicts: list, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 2.8))
    labels = [f"axiom {i + 1}" for i in range(len(verdicts))]
    colors = [PALETTE[2] if v.holds else PALETTE[1] if v.fails else PALETTE[6] for v in verdicts]
    ax.bar(labels, [v.checked for v in verdicts], color=colors)
    for i, v in enumerate(verdicts):
        ax.text(i, v.checked, v.label, ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("cases checked")
    ax.set_title(title)
    return _save(fig, path)
