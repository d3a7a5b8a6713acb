"""Figures for the CLI reports, written as PNG files (Agg backend, no display)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["running_average", "ring_slope", "constant_convergence", "family_averages"]


def _save(fig, outdir: str | Path, name: str) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{name}.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def running_average(X: Sequence[float], avg: Sequence[float], target: float, outdir, name="h3_average",
                    label="average of h3") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(X, avg, "o-", label=label)
    ax.axhline(target, color="k", ls="--", lw=1, label=f"limit {target:.4g}")
    ax.set_xlabel("X")
    ax.set_ylabel("running average")
    ax.legend()
    return _save(fig, outdir, name)


def ring_slope(X: Sequence[float], slope: Sequence[float], main: float, two_term: Sequence[float], outdir,
               name="ring_slope", sign="") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(X, slope, "o-", label="weighted ring count / X")
    ax.semilogx(X, two_term, "s--", label="two-pole prediction / X")
    ax.axhline(main, color="k", ls=":", lw=1, label=f"leading residue {main:.4f}")
    ax.set_xlabel("X")
    ax.set_title(f"cubic rings, sign {sign}")
    ax.legend()
    return _save(fig, outdir, name)


def constant_convergence(truncations: Sequence[float], lower: Sequence[float], upper: Sequence[float],
                         estimate: Sequence[float], outdir, name="constant", reference: float | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(truncations, estimate, "o-", label="truncated value")
    ax.fill_between(truncations, lower, upper, alpha=0.2, label="certified bracket")
    if reference is not None:
        ax.axhline(reference, color="k", ls="--", lw=1, label=f"reference {reference:g}")
    ax.set_ylim(min(lower) - 0.05, min(max(upper), max(estimate) + 0.5))
    ax.set_xlabel("truncation of |disc F|")
    ax.set_title(name)
    ax.legend()
    return _save(fig, outdir, name.replace(":", "_").replace("(", "").replace(")", ""))


def family_averages(report, outdir, name="family_averages") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for fam in report.families:
        pts = [(x, a) for x, a in zip(report.X, fam.avg_h3_relative) if a is not None]
        if not pts:
            continue
        xs, ys = zip(*pts)
        line, = ax.plot(xs, ys, "o-", label=f"{fam.family} (u={fam.u})")
        ax.axhline(float(fam.predictions["cm_relative"]), color=line.get_color(), ls="--", lw=1)
    ax.set_xlabel("X")
    ax.set_ylabel("running average of h3(K/F)")
    ax.legend(fontsize=8)
    return _save(fig, outdir, name)
