"""Render a sweep CSV as a log-log convergence figure.

Plots the under/over pointwise errors and the Hausdorff excess against the
contraction ratio, fits the convergence order over a window with the core
slope fitter, and annotates it.  Rows with zero (exact) error cannot live
on a log axis and are drawn as sentinel markers pinned to the bottom of
the plot instead.
"""

from __future__ import annotations

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from suprelax.harness import CSV_HEADER, SweepRow, slope_fit  # noqa: E402


class SchemaError(Exception):
    pass


def read_sweep_csv(path: str) -> list:
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise SchemaError(
                f"{path}: expected header {CSV_HEADER!r}, got "
                f"{','.join(header) if header else 'empty file'!r}"
            )
        rows = []
        for line in reader:
            if len(line) != len(header):
                raise SchemaError(f"{path}: row with {len(line)} fields")
            vals = [float(v) for v in line]
            rows.append(SweepRow(*vals))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def plot_sweep(csv_path: str, out_path: str, fit_window=(1e-3, 1e-1)):
    """Write the figure; returns the fitted pointwise slope (None if the
    window is exact)."""
    rows = read_sweep_csv(csv_path)
    rho = np.array([r.rho for r in rows])

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    series = [
        ("err_under", "tab:red", "o"),
        ("err_over", "tab:orange", "s"),
        ("haus_excess", "tab:blue", "^"),
    ]
    positive_floor = min(
        (getattr(r, f) for r in rows for f, _, _ in series if getattr(r, f) > 0),
        default=1e-16,
    )
    sentinel = positive_floor * 1e-2
    for field, color, marker in series:
        vals = np.array([getattr(r, field) for r in rows])
        pos = vals > 0
        ax.loglog(rho[pos], vals[pos], marker=marker, ms=4, lw=1, color=color, label=field)
        if np.any(~pos):
            ax.loglog(
                rho[~pos],
                np.full((~pos).sum(), sentinel),
                marker="x",
                ls="none",
                color=color,
                label=f"{field} (exact)",
            )

    try:
        fit = slope_fit(rows, fit_window, "err_max")
    except Exception:
        fit = None
    slope = None
    if fit is not None and not fit.exact:
        slope = fit.slope
        ax.annotate(
            f"fitted order {slope:.2f} on [{fit_window[0]:g}, {fit_window[1]:g}]",
            xy=(0.03, 0.95),
            xycoords="axes fraction",
            va="top",
        )
    elif fit is not None and fit.exact:
        ax.annotate("exact in fit window", xy=(0.03, 0.95), xycoords="axes fraction", va="top")

    ax.set_xlabel("contraction ratio")
    ax.set_ylabel("estimation error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return slope


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="suprelax-plot")
    ap.add_argument("csv", help="sweep CSV produced by `suprelax sweep`")
    ap.add_argument("out", help="output image path (png)")
    ap.add_argument("--fit-lo", type=float, default=1e-3)
    ap.add_argument("--fit-hi", type=float, default=1e-1)
    args = ap.parse_args(argv)
    try:
        slope = plot_sweep(args.csv, args.out, (args.fit_lo, args.fit_hi))
    except (OSError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if slope is not None:
        print(f"wrote {args.out} (fitted order {slope:.2f})")
    else:
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
