import math
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SVG_HASH_SALT = "eio"


def publication_figure(width: float = 6.0, height: Optional[float] = None):
    golden_ratio = (math.sqrt(5) - 1.0) / 2.0
    height = height or width * golden_ratio
    fig, ax = plt.subplots(figsize=(width, height), facecolor="w")
    ax.tick_params(labelsize=10)
    return fig, ax


def plot_rate_study(table: list[dict], fit: dict, predicted_slope: float, path: Union[str, Path]) -> Path:
    """Log-log Monte-Carlo risk against N₁ with the fitted and the predicted slope; written as SVG."""
    points = [row for row in table if row.get("mc_risk")]
    fig, ax = publication_figure()
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N1")
    ax.set_ylabel("MC risk")
    if points:
        n1 = [row["n1"] for row in points]
        risk = [row["mc_risk"] for row in points]
        ax.plot(n1, risk, "o", color="black", label="Monte Carlo")
        anchor_n1, anchor_risk = n1[0], risk[0]
        ax.plot(
            n1,
            [anchor_risk * (value / anchor_n1) ** predicted_slope for value in n1],
            "--",
            color="gray",
            label=f"predicted slope {predicted_slope:.3f}",
        )
        if fit.get("slope") is not None:
            ax.plot(
                n1,
                [math.exp(fit["intercept"]) * value ** fit["slope"] for value in n1],
                "-",
                color="tab:blue",
                label=f"fitted slope {fit['slope']:.3f}",
            )
        ax.legend(frameon=False)
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path
