"""Figures written next to CSV tables.  matplotlib is imported on demand."""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def figure_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".png")


def plot_columns(rows: list[dict], x: str, ys: list[str], path: str | Path, title: str = "",
                 step: tuple[str, ...] = ()) -> Path:
    """Line plot of ``ys`` against ``x``; columns in ``step`` drawn as steps."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r[x] for r in rows]
    for col in ys:
        vals = [r[col] for r in rows if col in r]
        if len(vals) != len(xs):
            continue
        if col in step:
            ax.step(xs, vals, where="post", label=col)
        else:
            ax.plot(xs, vals, marker="o", ms=3, label=col)
    ax.set_xlabel(x)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
