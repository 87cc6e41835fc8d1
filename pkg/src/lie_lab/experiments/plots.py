"""
LIE Lab plots - Optional PNG figures of observer channels and curves.

matplotlib is an optional dependency (``pip install vortex-lie-lab[plot]``);
without it PLOTTING_AVAILABLE is False and only the .dat files are written.
"""

import logging
from pathlib import Path

from ..numerics.solver import Trajectory

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    PLOTTING_AVAILABLE = True
except ImportError:
    PLOTTING_AVAILABLE = False
    plt = None

logger = logging.getLogger("lie-lab.plots")

# Channels drawn on one figure with a shared axis.
CHANNEL_GROUPS: dict[str, tuple[str, ...]] = {
    "energies": ("E", "E1", "E2"),
    "norms": ("phi_s_h1", "phi_ss", "phi_sss_h1", "phi12", "phi3"),
    "planar": ("phi_b", "phi2"),
    "axial": ("x3_offset", "x3_spread", "phi3_mean"),
    "residuals": ("nostretch", "endpoint_lower", "endpoint_upper", "arclength", "symmetry"),
}

STYLE = {
    "figure.figsize": (4.5, 4.5 / 1.618),
    "font.size": 9.0,
    "lines.linewidth": 1.0,
    "axes.linewidth": 0.5,
    "grid.linewidth": 0.25,
    "grid.color": "#AAAAAA",
}


def plot_trajectory(trajectory: Trajectory, directory: Path) -> list[Path]:
    """
    Render channel groups against time and the final curve in 3D.

    Args:
        trajectory: Simulated trajectory
        directory: Destination of the PNG files

    Returns:
        Paths of the written figures; empty without matplotlib
    """
    if not PLOTTING_AVAILABLE:
        logger.debug("matplotlib not installed, skipping PNG plots")
        return []
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    with matplotlib.rc_context(STYLE):
        for group, names in CHANNEL_GROUPS.items():
            present = [name for name in names if name in trajectory.channels]
            if not present:
                continue
            fig, ax = plt.subplots()
            for name in present:
                ax.plot(trajectory.times, trajectory.channels[name], label=name)
            ax.set_xlabel("t")
            ax.grid(True)
            ax.legend(loc="best", frameon=False)
            path = directory / f"{group}.png"
            fig.savefig(path, dpi=150, bbox_inches="tight")
            plt.close(fig)
            written.append(path)

        if trajectory.snapshots:
            fig = plt.figure()
            ax = fig.add_subplot(projection="3d")
            for label, curve in (("t = 0", trajectory.initial), ("final", trajectory.final)):
                ax.plot(*curve.points.T, label=label)
            ax.set_xlabel("x1")
            ax.set_ylabel("x2")
            ax.set_zlabel("x3")
            ax.legend(loc="best", frameon=False)
            path = directory / "curve.png"
            fig.savefig(path, dpi=150, bbox_inches="tight")
            plt.close(fig)
            written.append(path)
    return written
