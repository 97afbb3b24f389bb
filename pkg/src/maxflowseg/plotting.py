"""Report figures rendered next to the CSV output."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "svg.hashsalt": "maxflowseg",
}


def _save(fig, path):
    # Fixed metadata keeps repeated runs byte-identical.
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def plot_convergence(rows, path):
    """Energy and inner residual per outer iteration."""
    outer = [r["outer"] for r in rows]
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7, 2.6), constrained_layout=True)
        ax1.plot(outer, [r["energy"] for r in rows], "o-", color="k", ms=3)
        ax1.set_xlabel("outer iteration")
        ax1.set_ylabel("labeling energy")
        ax2.semilogy(outer, [max(r["residual"], 1e-300) for r in rows], "s-", color="C0",
                     ms=3, label="inner residual")
        deltas = [r["cap_delta"] for r in rows]
        if any(d > 0 for d in deltas):
            ax2.semilogy(outer, [max(d, 1e-300) for d in deltas], "^-", color="C3", ms=3,
                         label="capacity change")
        ax2.set_xlabel("outer iteration")
        ax2.legend(frameon=False)
        _save(fig, path)


def plot_segmentation(image, mask, path, truth=None):
    """Image, mask overlay and (optionally) the ground truth side by side."""
    panels = [("image", image, "gray"), ("mask", mask, "gray")]
    if truth is not None:
        panels.append(("ground truth", truth, "gray"))
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, len(panels), figsize=(2.4 * len(panels), 2.6),
                                 constrained_layout=True)
        for ax, (title, data, cmap) in zip(axes, panels):
            ax.imshow(data, cmap=cmap, vmin=0, vmax=1, interpolation="nearest")
            ax.set_title(title)
            ax.set_axis_off()
        axes[0].contour(np.asarray(mask, dtype=float), levels=[0.5], colors="r", linewidths=0.8)
        _save(fig, path)


def plot_sweep(image, masks, s_levels, t_level, path):
    """Input image followed by one mask per manual source level."""
    with plt.rc_context(RC):
        n = len(masks) + 1
        fig, axes = plt.subplots(1, n, figsize=(2.2 * n, 2.5), constrained_layout=True)
        axes[0].imshow(image, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
        axes[0].set_title("input")
        for ax, mask, s in zip(axes[1:], masks, s_levels):
            ax.imshow(mask, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
            ax.set_title(f"s = {s:g}, t = {t_level:g}")
        for ax in axes:
            ax.set_axis_off()
        _save(fig, path)
