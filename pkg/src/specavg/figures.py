"""Figure rendering for the CLI report path.

Every report-producing subcommand accepts --fig PATH and, when given,
renders a matplotlib figure of its rows next to the delimited output.
Rendering is file-only (Agg backend); nothing here opens a window.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "figure.figsize": (6.4, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.fontsize": 9,
}


def _new_axes():
    plt.rcParams.update(_STYLE)
    fig, ax = plt.subplots()
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figure(rows, path):
    """Alignment against sampling probability (or against sample count
    when the sweep was run at fixed p)."""
    fig, ax = _new_axes()
    ps = [r.p for r in rows]
    by_samples = len(set(ps)) == 1 and len(rows) > 1
    xs = [r.n_samples for r in rows] if by_samples else ps
    ax.plot(xs, [r.alignment for r in rows], "o-", label="averaged")
    ax.plot(xs, [r.alignment_median for r in rows], "k-", lw=1,
            label="single-draw median")
    lo = [r.alignment_median - r.alignment_std for r in rows]
    hi = [r.alignment_median + r.alignment_std for r in rows]
    ax.plot(xs, lo, "k:", lw=0.8)
    ax.plot(xs, hi, "k:", lw=0.8)
    if not by_samples and rows[0].pert_fraction is not None:
        ax.plot(xs, [r.pert_fraction for r in rows], "r--",
                label="perturbative fraction")
    if by_samples:
        ax.set_xlabel("number of averaged samples")
    else:
        ax.set_xscale("log")
        ax.set_xlabel("sampling probability p")
    ax.set_ylabel("alignment with ground truth")
    ax.legend()
    _save(fig, path)


def save_pagerank_figure(rows, path):
    fig, ax = _new_axes()
    variants = sorted({r.variant for r in rows})
    for variant in variants:
        sub = [r for r in rows if r.variant == variant]
        xs = [r.p for r in sub]
        label = f" ({variant})" if len(variants) > 1 else ""
        ax.plot(xs, [r.rho for r in sub], "o-", label="averaged" + label)
        ax.plot(xs, [r.rho_median for r in sub], "-", lw=1,
                label="single-draw median" + label)
        ax.plot(xs, [r.pert_fraction for r in sub], "--",
                label="perturbative fraction" + label)
    ax.set_xscale("log")
    ax.set_xlabel("sampling probability p")
    ax.set_ylabel("rank correlation")
    ax.legend()
    _save(fig, path)


def save_blowup_figure(traces, path):
    import numpy as np

    fig, ax = _new_axes()
    ns = sorted({t.n for t in traces})
    med_t = [np.median([t.max_T_over_n for t in traces if t.n == n])
             for n in ns]
    med_op = [np.median([t.opnorm_estimate for t in traces if t.n == n])
              for n in ns]
    ax.plot(ns, med_t, "o-", label="median max diag / n")
    ax.plot(ns, med_op, "s-", label="median scaled operator norm")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("dimension n")
    ax.set_ylabel("median over draws")
    ax.legend()
    _save(fig, path)


def save_speedup_figure(rows, path):
    fig, ax = _new_axes()
    xs = [r["p"] for r in rows]
    ax.plot(xs, [r["ratio"] for r in rows], "o-", label="cost ratio")
    ax.axhline(1.0, color="k", lw=0.8, ls=":")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sampling probability p")
    ax.set_ylabel("(sample + sparse eigensolve) / full eigensolve")
    ax.legend()
    _save(fig, path)


def save_estimate_figure(report, path):
    fig, ax = _new_axes()
    if report.per_sample_alignments is not None:
        ax.hist(report.per_sample_alignments, bins=40, alpha=0.8,
                label="single-draw alignment")
        if report.alignment is not None:
            ax.axvline(report.alignment, color="r",
                       label="averaged alignment")
        ax.set_xlabel("alignment with ground truth")
        ax.set_ylabel("draw count")
        ax.legend()
    else:
        ax.plot(report.nu, lw=0.8)
        ax.set_xlabel("coordinate")
        ax.set_ylabel("averaged eigenvector entry")
    _save(fig, path)
