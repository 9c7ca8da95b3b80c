"""Phase portrait rendering as standalone SVG text.

Output is deterministic: no randomness, fixed float formatting (8
significant digits), and element order fixed by construction, so the same
inputs produce byte-identical documents.  Styling is embedded CSS keyed by
element classes: `nullcline-s`, `nullcline-i`, `rest-point sink|source|
saddle`, `trajectory`, `separatrix`, `crossing`.

The drawing area maps the unit square to a 600x600 box with a 50-unit
margin; the i axis points up.
"""

from __future__ import annotations

import numpy as np

from .analysis import BasinReport, RegimeVerdict
from .contours import nullcline_segments
from .dynamics import Trajectory
from .equilibria import SADDLE, SINK, SOURCE
from .model import ModelParams

__all__ = ["render_portrait"]

_MARGIN = 50.0
_SIDE = 600.0

_STYLE = """\
  .frame { fill: none; stroke: #444444; stroke-width: 1.5; }
  .nullcline-s { fill: none; stroke: #1f77b4; stroke-width: 1.2; }
  .nullcline-i { fill: none; stroke: #d62728; stroke-width: 1.2; }
  .trajectory { fill: none; stroke: #999999; stroke-width: 0.8; }
  .separatrix { fill: none; stroke: #2ca02c; stroke-width: 1.6;
                stroke-dasharray: 7 4; }
  .rest-point.sink { fill: #000000; stroke: none; }
  .rest-point.source { fill: #ffffff; stroke: #000000; stroke-width: 1.5; }
  .rest-point.saddle { fill: none; stroke: #000000; stroke-width: 2; }
  .crossing { fill: #2ca02c; stroke: none; }
"""


def _fmt(x: float) -> str:
    return f"{float(x):.8g}"


def _map(s: float, i: float) -> tuple[float, float]:
    return _MARGIN + s * _SIDE, _MARGIN + (1.0 - i) * _SIDE


def _path_from_segments(segments, css: str) -> str:
    if not segments:
        return f'<path class="{css}" d=""/>'
    parts = []
    for (x0, y0), (x1, y1) in segments:
        a = _map(x0, y0)
        b = _map(x1, y1)
        parts.append(f"M{_fmt(a[0])} {_fmt(a[1])}L{_fmt(b[0])} {_fmt(b[1])}")
    return f'<path class="{css}" d="{"".join(parts)}"/>'


def _polyline_path(points: np.ndarray, css: str) -> str:
    if len(points) == 0:
        return f'<path class="{css}" d=""/>'
    cmds = []
    for k, (s, i) in enumerate(points):
        x, y = _map(float(s), float(i))
        cmds.append(f'{"M" if k == 0 else "L"}{_fmt(x)} {_fmt(y)}')
    return f'<path class="{css}" d="{"".join(cmds)}"/>'


def _glyph(rp) -> str:
    x, y = _map(rp.s, rp.i)
    if rp.classification == SINK:
        return f'<circle class="rest-point sink" cx="{_fmt(x)}" cy="{_fmt(y)}" r="6"/>'
    if rp.classification == SOURCE:
        return f'<circle class="rest-point source" cx="{_fmt(x)}" cy="{_fmt(y)}" r="6"/>'
    if rp.classification == SADDLE:
        return (
            f'<g class="rest-point saddle">'
            f'<line x1="{_fmt(x - 6)}" y1="{_fmt(y - 6)}" '
            f'x2="{_fmt(x + 6)}" y2="{_fmt(y + 6)}"/>'
            f'<line x1="{_fmt(x - 6)}" y1="{_fmt(y + 6)}" '
            f'x2="{_fmt(x + 6)}" y2="{_fmt(y - 6)}"/></g>'
        )
    # degenerate: small open square, no dedicated style
    return (
        f'<rect class="rest-point degenerate" x="{_fmt(x - 5)}" y="{_fmt(y - 5)}" '
        f'width="10" height="10" fill="none" stroke="#000000"/>'
    )


def render_portrait(
    p: ModelParams,
    verdict: RegimeVerdict,
    basins: BasinReport | None = None,
    trajectories: tuple[Trajectory, ...] = (),
    nullcline_cells: int = 256,
) -> str:
    """Compose the phase portrait SVG document.

    Draws the region triangle, both nullclines, any provided trajectories,
    the stable-manifold separatrix and boundary crossing markers when a
    basin report is given, and one glyph per rest point of the verdict
    (filled disk sink, open disk source, cross saddle).
    """
    total = 2.0 * _MARGIN + _SIDE
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="0 0 {_fmt(total)} {_fmt(total)}">',
        f"<style>\n{_STYLE}</style>",
    ]

    a = _map(0.0, 0.0)
    b = _map(1.0, 0.0)
    c = _map(0.0, 1.0)
    out.append(
        f'<path class="frame" d="M{_fmt(a[0])} {_fmt(a[1])}L{_fmt(b[0])} '
        f'{_fmt(b[1])}L{_fmt(c[0])} {_fmt(c[1])}Z"/>'
    )

    for component, css in ((0, "nullcline-s"), (1, "nullcline-i")):
        segs = [
            seg
            for seg in nullcline_segments(p, component, n=nullcline_cells)
            if seg[0][0] + seg[0][1] <= 1.0 + 2.0 / nullcline_cells
        ]
        out.append(_path_from_segments(segs, css))

    for traj in trajectories:
        if traj.system != "planar":
            raise ValueError("portrait trajectories must be planar")
        out.append(_polyline_path(traj.states, "trajectory"))

    if basins is not None:
        out.append(_polyline_path(basins.manifold_polyline, "separatrix"))
        for crossing in basins.boundary_crossings:
            x, y = _map(crossing.s, crossing.i)
            out.append(
                f'<circle class="crossing" cx="{_fmt(x)}" cy="{_fmt(y)}" r="4"/>'
            )

    for rp in verdict.rest_points:
        out.append(_glyph(rp))

    out.append("</svg>")
    return "\n".join(out) + "\n"
