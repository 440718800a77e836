"""Figures for sweep results, written next to the CSV output."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

TITLES = {
    "a": "Bell pair, dephasing only",
    "recovery": "Bell pair with measurement apparatus",
    "esd": "Partially entangled input with measurement apparatus",
}


def render_sweep(result, path, width=5.0, height=3.4):
    """Concurrence and success probability against L2; S_max on a twin axis if present."""
    L2 = result.column("L2")
    fig, ax = plt.subplots(figsize=(width, height))
    ax.plot(L2, result.column("concurrence"), color="k", lw=1.4, label="concurrence")
    if result.scenario != "a":
        ax.plot(L2, result.column("success_prob"), color="0.5", ls="--", lw=1.0,
                label="success probability")
    ax.set_ylim(0, 1.05)
    ax.set_xlabel(r"$L_2$ ($\lambda_0$)" if result.scenario != "a" else r"$L$ ($\lambda_0$)")
    ax.set_ylabel("concurrence")
    handles, labels = ax.get_legend_handles_labels()
    if result.with_chsh:
        ax2 = ax.twinx()
        ax2.plot(L2, result.column("S_max"), color="tab:red", lw=1.0, label=r"$S_{max}$")
        ax2.axhline(2.0, color="tab:red", ls=":", lw=0.8)
        ax2.set_ylabel(r"$S_{max}$")
        h2, l2 = ax2.get_legend_handles_labels()
        handles, labels = handles + h2, labels + l2
    ax.legend(handles, labels, frameon=False, fontsize=8, loc="upper right")
    ax.set_title(TITLES.get(result.scenario, result.scenario), fontsize=9)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return path
