"""Plot scripts and figures for sweep CSVs.

:func:`emit_plot_script` writes a standalone matplotlib script with the data
embedded, so the figure can be regenerated without this package.
:func:`render_figure` draws the same figure directly to an image file.
"""

from __future__ import annotations

import json
import math

from .experiments import read_sweep_csv

_SCRIPT = '''#!/usr/bin/env python3
"""{title}. Generated by bisectcert from a {kind} sweep CSV."""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SERIES = {series}
XLABEL = {xlabel!r}
YLABEL = {ylabel!r}
VLINE = {vline!r}

fig, ax = plt.subplots(figsize=(6, 4))
for label, pts in SERIES:
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    ax.plot(xs, ys, marker="o", label=label)
if VLINE is not None:
    ax.axvline(VLINE[0], color="grey", linestyle="--")
    ax.annotate(VLINE[1], (VLINE[0], 0.5), rotation=90, va="center", ha="right")
ax.set_xlabel(XLABEL)
ax.set_ylabel(YLABEL)
ax.set_ylim(-0.05, 1.05)
ax.legend()
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else {default_out!r}, dpi=120)
'''


def _series(kind: str, rows: list[dict]) -> dict:
    live = [r for r in rows if r.get("skipped", "0") != "1"]
    if not live:
        raise ValueError("sweep CSV has no completed cells")
    if kind == "threshold":
        groups: dict[str, list] = {}
        for r in live:
            x = (math.sqrt(float(r["alpha"])) - math.sqrt(float(r["beta"]))) ** 2
            groups.setdefault(f"beta={float(r['beta']):g}, n={r['n']}", []).append((round(x, 6), float(r["certified_rate"])))
        return {
            "series": sorted((k, sorted(v)) for k, v in groups.items()),
            "xlabel": "(sqrt(alpha) - sqrt(beta))^2",
            "ylabel": "certified rate",
            "vline": (2.0, "threshold 2"),
            "title": "Certified recovery against the threshold parameter",
        }
    if kind == "subcritical":
        groups = {}
        for r in live:
            groups.setdefault(f"mean degree={float(r['mean_degree']):g}, n={r['n']}", []).append(
                (float(r["gamma"]), float(r["fail_rate"]))
            )
        return {
            "series": sorted((k, sorted(v)) for k, v in groups.items()),
            "xlabel": "gamma",
            "ylabel": "fail rate",
            "vline": None,
            "title": "Certification failures against gamma",
        }
    raise ValueError(f"unknown sweep kind {kind!r}")


def emit_plot_script(csv_text: str, default_out: str = "figure.png") -> str:
    """Source of a standalone plotting script for a sweep CSV."""
    kind, rows = read_sweep_csv(csv_text)
    spec = _series(kind, rows)
    return _SCRIPT.format(
        title=spec["title"],
        kind=kind,
        series=json.dumps(spec["series"]),
        xlabel=spec["xlabel"],
        ylabel=spec["ylabel"],
        vline=spec["vline"],
        default_out=default_out,
    )


def render_figure(csv_text: str, path) -> None:
    """Draw the sweep figure to ``path`` (format from the file suffix)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    kind, rows = read_sweep_csv(csv_text)
    spec = _series(kind, rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, pts in spec["series"]:
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    if spec["vline"] is not None:
        x, text = spec["vline"]
        ax.axvline(x, color="grey", linestyle="--")
        ax.annotate(text, (x, 0.5), rotation=90, va="center", ha="right")
    ax.set_xlabel(spec["xlabel"])
    ax.set_ylabel(spec["ylabel"])
    ax.set_ylim(-0.05, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
