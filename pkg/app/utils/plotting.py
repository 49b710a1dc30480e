from pathlib import Path
from typing import List, Sequence, Tuple, Union
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..models.branch import Branch

logger = logging.getLogger(__name__)

MAX_MARKED_MODE = 64


def bifurcation_markers(branches: Sequence[Branch]) -> List[float]:
    """σ_k of every seeded branch plus the σ_k crossed by trivial branches"""
    sigmas = {b.seed.sigma for b in branches if b.seed is not None}
    for b in branches:
        if b.seed is None and len(b):
            eps = b.eps_values()
            low, high = float(eps.min()), float(eps.max())
            for k in range(1, MAX_MARKED_MODE + 1):
                sigma = float(k) ** (b.r - b.s)
                if low <= sigma <= high:
                    sigmas.add(sigma)
    return sorted(sigmas, reverse=True)


def emit_diagram(branches: Sequence[Branch], path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write (ε, ‖u‖_{L²}) per point per branch as CSV plus an SVG of the diagram.

    The two files share path's stem, with .csv and .svg suffixes.
    """
    if not branches:
        raise ValueError("emit_diagram needs at least one branch")
    path = Path(path)
    csv_path, svg_path = path.with_suffix(".csv"), path.with_suffix(".svg")
    csv_path.parent.mkdir(parents=True, exist_ok=True)

    lines = ["label,index,eps,l2"]
    for branch in branches:
        for i, pt in enumerate(branch.points):
            lines.append(f"{branch.label},{i},{float(pt.eps)!r},{float(pt.l2)!r}")
    csv_path.write_text("\n".join(lines) + "\n")

    fig, ax = plt.subplots(figsize=(8, 5))
    try:
        for branch in branches:
            eps, l2 = branch.eps_values(), branch.l2_values()
            if len(branch) == 1:
                ax.plot(eps, l2, marker="o", linestyle="none", label=branch.label)
            else:
                ax.plot(eps, l2, linewidth=1.2, label=branch.label)
        sigmas = bifurcation_markers(branches)
        if sigmas:
            ax.plot(sigmas, [0.0] * len(sigmas), "kx", markersize=7, label="σ_k")
        ax.set_xlabel("ε")
        ax.set_ylabel("‖u‖ L²")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize="small")
        fig.savefig(svg_path, format="svg")
    finally:
        plt.close(fig)

    logger.info(f"Wrote diagram of {len(branches)} branches to {csv_path} and {svg_path}")
    return csv_path, svg_path
