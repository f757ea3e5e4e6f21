"""Figure rendering for CLI artifacts: nested disks, orbits, reports.

All figures go straight to files through the Agg backend (no display
needed); PNG metadata is pinned so identical inputs give identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from .action import DiskTree  # noqa: E402

_PNG_META = {"Software": "soldisk"}
_MAX_DRAWN = 4096


def _save(fig, path: str) -> None:
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def save_disk_figure(tree: DiskTree, depth: int, path: str) -> None:
    """Levels 0..depth of the disk tree, projected to the first complex pair."""
    fig, ax = plt.subplots(figsize=(7, 7))
    cmap = plt.get_cmap("viridis")
    ax.add_patch(Circle((0, 0), 1.0, fill=False, color="black", lw=1.2))
    for lv in range(1, depth + 1):
        nodes = tree.level_disks(lv)
        shown = nodes[:_MAX_DRAWN]
        color = cmap(lv / max(depth, 1))
        rad = tree.radius_of(lv)
        for node in shown:
            ax.add_patch(Circle((node.center[0], node.center[1]), rad,
                                fill=False, color=color, lw=0.8))
        note = f" (first {len(shown)})" if len(shown) < len(nodes) else ""
        ax.plot([], [], color=color, label=f"level {lv}: {len(nodes)} disks{note}")
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(f"nested disks to level {depth}")
    if depth >= 1:
        ax.legend(loc="upper right", fontsize=8)
    _save(fig, path)


def save_orbit_figure(samples, path: str) -> None:
    """Scatter of orbit points (first complex pair), colored by word index."""
    pts = np.array([p for _, p in samples])
    fig, ax = plt.subplots(figsize=(7, 7))
    ax.add_patch(Circle((0, 0), 1.0, fill=False, color="black", lw=1.2))
    sc = ax.scatter(pts[:, 0], pts[:, 1], c=np.arange(len(pts)),
                    cmap="viridis", s=14)
    fig.colorbar(sc, ax=ax, label="word index (lexicographic)")
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(f"orbit sample ({len(pts)} points)")
    _save(fig, path)


def save_report_figure(report: dict, path: str) -> None:
    """Measured/bound ratios per check on a log axis; green pass, red fail."""
    rows = [c for c in report["checks"]
            if c.get("measured") is not None and c.get("bound")]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.32 * len(rows) + 1.2)))
    if rows:
        labels, ratios, colors = [], [], []
        for c in rows:
            tag = c["name"]
            if c.get("level") is not None:
                tag += f" L{c['level']}"
            if c.get("generator") is not None:
                tag += f" g{c['generator'] + 1}"
            if c.get("order") is not None:
                tag += f" p{c['order']}"
            labels.append(tag)
            ratios.append(max(c["measured"] / c["bound"], 1e-17))
            if not c.get("asserted", True):
                colors.append("0.6")
            else:
                colors.append("tab:green" if c["pass"] else "tab:red")
        y = np.arange(len(rows))
        ax.barh(y, ratios, color=colors)
        ax.set_yticks(y, labels=labels, fontsize=7)
        ax.invert_yaxis()
        ax.set_xscale("log")
        ax.axvline(1.0, color="black", lw=1.0, ls="--")
        ax.set_xlabel("measured / bound")
    else:
        ax.text(0.5, 0.5, "no measurable checks", ha="center", va="center")
        ax.set_axis_off()
    verdict = "PASS" if report.get("passed") else "FAIL"
    ax.set_title(f"certification {verdict} "
                 f"(seed {report.get('seed')}, order {report.get('order')})")
    fig.tight_layout()
    _save(fig, path)
