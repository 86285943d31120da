"""PNG figures rendered next to the delimited outputs."""

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .snapshots import atomic_write  # noqa: E402


def _save(fig, path):
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=110)
    plt.close(fig)
    return atomic_write(path, buf.getvalue())


def _heatmap(ax, W, title):
    g = W.grid
    v = W.values
    lim = float(np.abs(v).max()) or 1.0
    im = ax.imshow(v.T, origin="lower", extent=(g.q_min, g.q_max, g.p_min, g.p_max),
                   cmap="RdBu_r", vmin=-lim, vmax=lim, aspect="auto")
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title(title)
    return im


def field_figure(initial, final, path, title=""):
    """Initial and final Wigner functions side by side (diverging colormap, zero white)."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.4))
    _heatmap(axes[0], initial, f"t = {initial.time:.3g}")
    im = _heatmap(axes[1], final, f"t = {final.time:.3g}")
    fig.colorbar(im, ax=axes, shrink=0.85, label="W(q, p)")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def diagnostics_figure(records, path, title=""):
    t = np.array([r.time for r in records])
    series = [("purity", "purity"), ("negativity_volume", "negativity volume"),
              ("sparsity", "kept fraction"), ("shannon_entropy", "entropy (nats)")]
    fig, axes = plt.subplots(2, 2, figsize=(10, 6.5), sharex=True)
    for ax, (name, label) in zip(axes.ravel(), series):
        y = np.array([getattr(r, name) for r in records])
        if name == "negativity_volume" and np.all(y[y != 0] > 0) and np.any(y > 0):
            ax.semilogy(t[y > 0], y[y > 0], marker=".")
        else:
            ax.plot(t, y, marker=".")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel("t")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)


def marginals_figure(W, path, title=""):
    g = W.grid
    rho_q = W.values.sum(axis=1) * g.dp
    rho_p = W.values.sum(axis=0) * g.dq
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.6))
    axes[0].plot(g.q, rho_q)
    axes[0].set_xlabel("q")
    axes[0].set_ylabel("position density")
    axes[1].plot(g.p, rho_p)
    axes[1].set_xlabel("p")
    axes[1].set_ylabel("momentum density")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, path)
