"""
Deterministic SVG pictures of rank-2 monoids: the lattice points of a window,
the members of the monoid, crosses where the saturation has points the
monoid misses, generator arrows and the rays of the cone.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from itertools import product

import matplotlib
from matplotlib.figure import Figure

from semitoric.errors import UnsupportedRank
from semitoric.lattice import IntVec
from semitoric.monoids import AffineMonoid, holes

logger = logging.getLogger(__name__)

Window = tuple[int, int, int, int]

SVG_PARAMS = {"svg.hashsalt": "semitoric", "svg.fonttype": "none"}


def parse_window(text: str | None, default: int = 4) -> Window:
    """'N' means [0,N]^2; 'xmin,xmax,ymin,ymax' gives the box explicitly."""
    if text is None:
        return 0, default, 0, default
    parts = [int(p) for p in str(text).split(",")]
    if len(parts) == 1:
        if parts[0] < 0:
            raise ValueError("Window size must be non-negative.")
        return 0, parts[0], 0, parts[0]
    if len(parts) != 4:
        raise ValueError("Window is either N or xmin,xmax,ymin,ymax.")
    xmin, xmax, ymin, ymax = parts
    if xmin > xmax or ymin > ymax:
        raise ValueError("Window bounds are inverted.")
    return xmin, xmax, ymin, ymax


@dataclass
class MonoidFigure:
    window: Window
    lattice_points: list[IntVec] = field(default_factory=list)
    members: list[IntVec] = field(default_factory=list)
    crosses: list[IntVec] = field(default_factory=list)
    generators: list[IntVec] = field(default_factory=list)
    rays: list[IntVec] = field(default_factory=list)


def monoid_figure(monoid: AffineMonoid, window: Window) -> MonoidFigure:
    if monoid.ambient_dim != 2:
        raise UnsupportedRank(f"Figures are drawn for rank 2 only, got rank {monoid.ambient_dim}.")
    xmin, xmax, ymin, ymax = window
    points = [tuple(p) for p in product(range(xmin, xmax + 1), range(ymin, ymax + 1))]
    return MonoidFigure(
        window=window,
        lattice_points=points,
        members=[p for p in points if monoid.member(p)],
        crosses=holes(monoid, points),
        generators=list(monoid.generators),
        rays=list(monoid.cone.rays),
    )


class SvgRenderer:
    """Draws a MonoidFigure at a fixed pitch in pixels per lattice step."""

    def __init__(self, pitch: int = 32):
        if pitch <= 0:
            raise ValueError("pitch must be positive.")
        self.pitch = pitch

    def render(self, model: MonoidFigure) -> bytes:
        xmin, xmax, ymin, ymax = model.window
        width, height = xmax - xmin + 2, ymax - ymin + 2
        fig = Figure(figsize=(width * self.pitch / 72, height * self.pitch / 72), dpi=72)
        ax = fig.add_axes((0, 0, 1, 1))
        ax.set_xlim(xmin - 1, xmax + 1)
        ax.set_ylim(ymin - 1, ymax + 1)
        ax.set_aspect("equal")
        ax.axis("off")

        reach = max(width, height)
        for i, (x, y) in enumerate(model.rays):
            scale = reach / max(abs(x), abs(y))
            ax.plot([0, x * scale], [0, y * scale], color="#1f77b4", linewidth=1, gid=f"ray_{i}")
        for x, y in model.lattice_points:
            ax.plot([x], [y], marker="o", markersize=2, color="#bbbbbb", gid=f"lattice_{x}_{y}")
        for x, y in model.members:
            ax.plot([x], [y], marker="o", markersize=6, color="black", gid=f"member_{x}_{y}")
        for x, y in model.crosses:
            ax.plot([x], [y], marker="x", markersize=8, markeredgewidth=2, color="#d62728", gid=f"cross_{x}_{y}")
        for x, y in model.generators:
            ax.arrow(0, 0, x, y, length_includes_head=True, head_width=0.15, color="#2ca02c", gid=f"arrow_{x}_{y}")

        buffer = io.BytesIO()
        with matplotlib.rc_context(SVG_PARAMS):
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        logger.debug("Rendered %d members and %d crosses.", len(model.members), len(model.crosses))
        return buffer.getvalue()


def plot_svg(monoid: AffineMonoid, window: Window, pitch: int = 32) -> bytes:
    return SvgRenderer(pitch).render(monoid_figure(monoid, window))
