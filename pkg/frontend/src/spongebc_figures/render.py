"""Deterministic figure rendering; presentation only, never re-derives numbers.

Conventions: reflection-error axes are log-log with omega/L on the abscissa;
the discretization-error baseline is a black dash-dot line with triangle
markers; the no-sponge extrapolation baseline is grey dotted with stars.
"""

from __future__ import annotations

import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .reader import SchemaError, read_csv  # noqa: E402

FIGURE_KINDS = ("error_curves", "sigma_curves", "reflection", "entropy", "snapshot")


def _legend(ax):
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=7)


def _finite(rows, key):
    return [r for r in rows if r[key] is not None and math.isfinite(r[key])]


def _group(rows, *keys):
    out = defaultdict(list)
    for r in rows:
        out[tuple(r[k] for k in keys)].append(r)
    return out


def _sorted_xy(rows, xkey, ykey):
    pts = sorted((r[xkey], r[ykey]) for r in _finite(_finite(rows, xkey), ykey))
    return [p[0] for p in pts], [p[1] for p in pts]


def render_error_curves(rows, out_path):
    equations = sorted({r["equation"] for r in rows})
    fig, axes = plt.subplots(1, len(equations), figsize=(6 * len(equations), 4.5),
                             squeeze=False)
    for ax, equation in zip(axes[0], equations):
        sub = [r for r in rows if r["equation"] == equation]
        for (method, n), grp in sorted(_group(sub, "method", "n").items()):
            ok = [r for r in grp if r["status"] == "ok"]
            if method == "extrapolation":
                vals = [r["e_abc"] for r in _finite(ok, "e_abc")]
                if vals:
                    ax.axhline(vals[0], color="grey", linestyle=":", marker="*",
                               label=f"extrapolation (n={n:g})")
                continue
            x, y = _sorted_xy(ok, "omega_over_l", "e_abc")
            if x:
                ax.plot(x, y, marker="o", label=f"{method} (n={n:g})")
        # discretization-error baseline, one level per resolution
        for n, grp in sorted(_group(_finite(sub, "e_num"), "n").items()):
            x, y = _sorted_xy(grp, "omega_over_l", "e_num")
            if x:
                ax.plot(x, y, color="black", linestyle="-.", marker="^",
                        label=f"discretization error (n={n[0]:g})")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("sponge length / wavelength")
        ax.set_ylabel("relative reflection error")
        ax.set_title(f"{equation} system")
        _legend(ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_sigma_curves(rows, out_path):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for (method, sigma), grp in sorted(_group(rows, "method", "sigma").items()):
        ok = [r for r in grp if r["status"] == "ok"]
        x, y = _sorted_xy(ok, "omega_over_l", "e_abc")
        if x:
            ax.plot(x, y, marker="o", label=f"{method}, sigma={sigma:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sponge length / wavelength")
    ax.set_ylabel("relative reflection error")
    _legend(ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_reflection(rows, out_path):
    sigma_rows = [r for r in rows if r["sigma"] is not None]
    dx_rows = [r for r in rows if r["sigma"] is None]
    panels = [p for p in
              (("max damping rate", "sigma", sigma_rows), ("cell width", "dx", dx_rows))
              if p[2]]
    fig, axes = plt.subplots(1, len(panels), figsize=(6 * len(panels), 4.5),
                             squeeze=False)
    for ax, (label, xkey, sub) in zip(axes[0], panels):
        for (method,), grp in sorted(_group(sub, "method").items()):
            x_th, y_th = _sorted_xy(grp, xkey, "c_r_theory")
            ax.plot(x_th, y_th, linestyle="--", label=f"{method} theory")
            x_num, y_num = _sorted_xy(grp, xkey, "c_r_num")
            ax.scatter(x_num, y_num, marker="o", label=f"{method} numerical")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(label)
        ax.set_ylabel("reflection coefficient")
        _legend(ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_entropy(rows, out_path):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for (label,), grp in sorted(_group(rows, "label").items()):
        x, y = _sorted_xy(grp, "t", "entropy")
        ax.plot(x, y, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("entropy integrated over the sponge")
    _legend(ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_snapshot(rows, out_path):
    times = sorted({r["t"] for r in rows})
    fig, axes = plt.subplots(4, 1, figsize=(7, 9), sharex=True)
    fields = ("V", "u", "E", "p")
    for t in times[:-1]:
        sub = [r for r in rows if r["t"] == t]
        x, y = _sorted_xy(sub, "x", "u")
        axes[1].plot(x, y, color="grey", alpha=0.3, linewidth=0.7)
    last = [r for r in rows if r["t"] == times[-1]]
    for ax, field in zip(axes, fields):
        x, y = _sorted_xy(last, "x", field)
        ax.plot(x, y, color="C0")
        ax.set_ylabel(field)
    axes[-1].set_xlabel("x")
    axes[0].set_title(f"state at t = {times[-1]:.4g}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


RENDERERS = {
    "error_curves": ("errors", render_error_curves),
    "sigma_curves": ("errors", render_sigma_curves),
    "reflection": ("reflection", render_reflection),
    "entropy": ("entropy", render_entropy),
    "snapshot": ("snapshot", render_snapshot),
}


def render(kind: str, csv_path: str, out_path: str) -> None:
    if kind not in RENDERERS:
        raise SchemaError(f"unknown figure kind {kind!r}; choose from {FIGURE_KINDS}")
    expected, fn = RENDERERS[kind]
    _, rows = read_csv(csv_path, expected_kind=expected)
    fn(rows, out_path)
