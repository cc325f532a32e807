"""Render summary figures next to the delimited output.

One PNG per experiment view, written into the report directory.  Figures are
a presentation layer only: nothing downstream reads them back.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_experiment_figures", "render_lemma_figures"]


def render_experiment_figures(result, outdir) -> list[Path]:
    """Figures for a recovery experiment (scaling or stability)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    summary = result.summary
    if result.config.experiment_id in ("NOISELESS_SCALING", "PER_ELEMENT"):
        points = summary["grid"]
        if points:
            fig, ax = plt.subplots(figsize=(6, 4))
            xs = [p["d"] for p in points]
            ys = [p["success_fraction"] for p in points]
            labels = [f"n={p['n']}" for p in points]
            ax.plot(xs, ys, "o-", color="tab:blue")
            for x, y, lab in zip(xs, ys, labels):
                ax.annotate(lab, (x, y), textcoords="offset points", xytext=(4, 4), fontsize=8)
            ax.set_xlabel("measurements d")
            ax.set_ylabel("success fraction")
            ax.set_ylim(-0.05, 1.05)
            ax.set_title(f"{result.config.experiment_id}: recovery success")
            ax.grid(True, alpha=0.3)
            path = outdir / "success_fraction.png"
            fig.savefig(path, dpi=150, bbox_inches="tight")
            plt.close(fig)
            written.append(path)
    elif result.config.experiment_id == "STABILITY":
        points = summary["per_sigma"]
        if points:
            fig, axes = plt.subplots(1, 2, figsize=(10, 4))
            sigmas = [p["sigma"] for p in points]
            axes[0].plot(sigmas, [p["median_l2"] for p in points], "o-", label="median error")
            axes[0].plot(
                sigmas,
                [p["median_bound"] ** 0.5 for p in points],
                "s--",
                label="sqrt(bound)",
            )
            axes[0].set_xlabel("noise sigma")
            axes[0].set_ylabel("l2 error")
            axes[0].legend()
            axes[0].grid(True, alpha=0.3)
            axes[1].plot(sigmas, [p["within_bound_fraction"] for p in points], "o-", color="tab:green")
            axes[1].set_xlabel("noise sigma")
            axes[1].set_ylabel("within-bound fraction")
            axes[1].set_ylim(-0.05, 1.05)
            axes[1].grid(True, alpha=0.3)
            fig.suptitle("stability: error vs noise level")
            path = outdir / "stability.png"
            fig.savefig(path, dpi=150, bbox_inches="tight")
            plt.close(fig)
            written.append(path)
    return written


def render_lemma_figures(reports, outdir) -> list[Path]:
    """Bar chart of empirical rates against analytic bounds, log scale."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if not reports:
        return []
    fig, ax = plt.subplots(figsize=(max(6, 0.55 * len(reports)), 4))
    names = [r.event_name for r in reports]
    floor = 10.0 ** -6.5
    emp = [max(r.empirical_rate, floor) for r in reports]
    bnd = [max(r.analytic_bound, floor) for r in reports]
    xs = range(len(reports))
    ax.bar([x - 0.2 for x in xs], emp, width=0.4, label="empirical", color="tab:blue")
    ax.bar([x + 0.2 for x in xs], bnd, width=0.4, label="bound", color="tab:orange")
    ax.set_yscale("log")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("rate / bound (floored)")
    ax.set_title("tail checks: empirical vs analytic")
    ax.legend()
    path = outdir / "lemma_checks.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return [path]
