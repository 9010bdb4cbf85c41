"""Static plots: scalp maps, time courses and signed r-squared maps.

Rendering goes through matplotlib's Agg backend. Output is SVG unless the
file name ends in ``.png``; both are byte-for-byte reproducible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle, Polygon  # noqa: E402

from .data import Data, axis_index  # noqa: E402
from .errors import (  # noqa: E402
    AxisNotFound,
    IoFailure,
    MissingPosition,
    TooFewElectrodes,
    ValueOutOfRange,
)
from .formats import ElectrodeLayout  # noqa: E402

__all__ = [
    "ScalpField",
    "interpolate_scalp",
    "render_scalp",
    "render_timecourse",
    "render_r2_map",
    "SCALP_LIMIT",
    "R2_AXES_RECT",
]

# scalp plots span [-SCALP_LIMIT, SCALP_LIMIT] in both directions, edge to edge
SCALP_LIMIT = 1.2
# figure-fraction rectangle (left, bottom, width, height) of the r2 heat map
R2_AXES_RECT = (0.14, 0.10, 0.70, 0.84)
CMAP = "RdBu_r"

_RC = {
    "svg.hashsalt": "bcikit",
    "svg.fonttype": "path",
    "path.simplify": False,
}


def _tps_kernel(r: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        k = r * r * np.log(r)
    return np.where(r > 0, k, 0.0)


@dataclass(frozen=True, eq=False)
class ScalpField:
    """Thin-plate spline fitted to electrode values and sampled on a grid.

    ``grid[i, j]`` is the value at ``(xs[j], ys[i])``; ``ys`` runs from top
    (+y, nose) to bottom. Grid points outside the head disc are NaN and
    ``mask`` is False there.
    """

    grid: np.ndarray
    mask: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    positions: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    affine: np.ndarray

    def evaluate(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.linalg.norm(pts[:, None, :] - self.positions[None, :, :], axis=2)
        return (_tps_kernel(r) @ self.weights + self.affine[0]
                + pts @ self.affine[1:])


def interpolate_scalp(values, layout: ElectrodeLayout, resolution: int = 64,
                      channels=None) -> ScalpField:
    """Thin-plate spline interpolation of per-channel values over the head.

    ``values`` is either a 1-D :class:`Data` with a channel axis or a
    sequence of numbers together with ``channels``. The spline passes exactly
    through the electrode values and reproduces affine functions.

    Raises
    ------
    MissingPosition
        If a channel has no position in ``layout``.
    TooFewElectrodes
        With fewer than three electrodes.
    """
    if isinstance(values, Data):
        ax = axis_index(values, "channel")
        channels = [str(c) for c in values.axes[ax]]
        v = np.asarray(values.values, dtype=float).reshape(-1)
    else:
        v = np.asarray(values, dtype=float).reshape(-1)
        if channels is None:
            raise ValueError("channel names are required for raw values")
        channels = [str(c) for c in channels]
    if len(channels) != len(v):
        raise ValueError(f"{len(v)} values for {len(channels)} channels")
    missing = [c for c in channels if c not in layout]
    if missing:
        raise MissingPosition(f"no layout position for {missing}")
    if len(v) < 3:
        raise TooFewElectrodes("need at least three electrodes")
    pos = np.array([layout.position(c) for c in channels])

    n = len(v)
    r = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    system = np.zeros((n + 3, n + 3))
    system[:n, :n] = _tps_kernel(r)
    poly = np.column_stack([np.ones(n), pos])
    system[:n, n:] = poly
    system[n:, :n] = poly.T
    rhs = np.concatenate([v, np.zeros(3)])
    sol = np.linalg.lstsq(system, rhs, rcond=None)[0]
    weights, affine = sol[:n], sol[n:]

    xs = np.linspace(-1.0, 1.0, resolution)
    ys = np.linspace(1.0, -1.0, resolution)
    gx, gy = np.meshgrid(xs, ys)
    mask = gx ** 2 + gy ** 2 <= 1.0
    field = ScalpField(np.empty(0), mask, xs, ys, pos, v, weights, affine)
    grid = field.evaluate(np.column_stack([gx.ravel(), gy.ravel()])).reshape(gx.shape)
    grid = np.where(mask, grid, np.nan)
    return ScalpField(grid, mask, xs, ys, pos, v, weights, affine)


def _save(fig, out_path) -> None:
    out = Path(out_path)
    fmt = "png" if out.suffix.lower() == ".png" else "svg"
    meta = {"Date": None} if fmt == "svg" else {"Software": None}
    try:
        fig.savefig(out, format=fmt, metadata=meta)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    finally:
        plt.close(fig)


def _head(ax) -> None:
    ax.add_patch(Circle((0, 0), 1.0, fill=False, lw=2, color="k"))
    ax.add_patch(Polygon([(-0.1, 0.995), (0, 1.1), (0.1, 0.995)], closed=False,
                         fill=False, lw=2, color="k"))
    for side in (-1, 1):
        ear = [(side * 1.0, 0.12), (side * 1.05, 0.1), (side * 1.07, -0.1),
               (side * 1.03, -0.15), (side * 1.0, -0.12)]
        ax.add_patch(Polygon(ear, closed=False, fill=False, lw=2, color="k"))


def render_scalp(field: ScalpField, out_path, color_limits=None, size_px: int = 400,
                 show_electrodes: bool = True) -> None:
    """Draw ``field`` as a head plot.

    Without ``color_limits`` the scale is symmetric, ``+-max|v|``. The head
    disc of radius 1 is centred in a square figure spanning
    ``+-SCALP_LIMIT`` edge to edge.
    """
    with plt.rc_context(_RC):
        if color_limits is None:
            m = float(np.nanmax(np.abs(field.grid))) if field.mask.any() else 0.0
            m = max(m, float(np.max(np.abs(field.values))))
            color_limits = (-m, m) if m > 0 else (-1.0, 1.0)
        fig = plt.figure(figsize=(size_px / 100, size_px / 100), dpi=100)
        ax = fig.add_axes((0, 0, 1, 1))
        ax.set_axis_off()
        ax.imshow(field.grid, cmap=CMAP, vmin=color_limits[0], vmax=color_limits[1],
                  extent=(-1, 1, -1, 1), origin="upper", interpolation="bilinear")
        if show_electrodes:
            ax.plot(field.positions[:, 0], field.positions[:, 1], "k.", ms=3)
        _head(ax)
        ax.set_xlim(-SCALP_LIMIT, SCALP_LIMIT)
        ax.set_ylim(-SCALP_LIMIT, SCALP_LIMIT)
        ax.set_aspect("equal")
        _save(fig, out_path)


def render_timecourse(data: Data, channels, out_path, time_axis: str = "time",
                      channel_axis: str = "channel") -> list[str]:
    """One panel per selected channel, x axis in ms.

    ``(time, channel)`` data gives one line per panel; ``(class, time,
    channel)`` data (e.g. class averages) one line per class. Returns the
    panel titles.
    """
    channels = list(channels)
    if not channels:
        raise AxisNotFound("no channels selected")
    cax = axis_index(data, channel_axis)
    tax = axis_index(data, time_axis)
    names = [str(c) for c in data.axes[cax]]
    missing = [c for c in channels if c not in names]
    if missing:
        raise AxisNotFound(f"channels {missing} not found")
    t = data.axes[tax]
    x = np.moveaxis(data.values, (tax, cax), (-2, -1))
    lead = x.shape[:-2]
    x = x.reshape((-1,) + x.shape[-2:])
    line_labels = ([str(c) for c in data.axes[0]] if data.ndim == 3 and lead
                   else [None] * x.shape[0])
    with plt.rc_context(_RC):
        fig, axs = plt.subplots(len(channels), 1, sharex=True,
                                figsize=(6, 1.8 * len(channels)), dpi=100, squeeze=False)
        for ax, ch in zip(axs[:, 0], channels):
            j = names.index(ch)
            for k in range(x.shape[0]):
                ax.plot(t, x[k, :, j], lw=1, label=line_labels[k])
            ax.set_title(ch)
            ax.axvline(0, color="0.5", lw=0.5)
            ax.set_ylabel(data.units[-1] if data.units[-1] != "#" else "")
        axs[-1, 0].set_xlabel(f"{data.names[tax]} [{data.units[tax]}]")
        if line_labels[0] is not None:
            axs[0, 0].legend(loc="upper right", fontsize=7)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            fig.tight_layout()
        _save(fig, out_path)
    return channels


def render_r2_map(r2: Data, channel_order, out_path, time_axis: str = "time",
                  channel_axis: str = "channel") -> None:
    """Heat map of signed r-squared values, one row per channel.

    Rows follow ``channel_order`` (e.g. frontal to occipital); channels not
    listed follow in their original order. The diverging colour scale is
    symmetric around zero.

    Raises
    ------
    ValueOutOfRange
        If any value lies outside ``[-1, 1]``.
    """
    v = np.asarray(r2.values)
    if np.any(~np.isfinite(v)) or np.any(np.abs(v) > 1.0):
        raise ValueOutOfRange("signed r-squared values must lie in [-1, 1]")
    cax = axis_index(r2, channel_axis)
    tax = axis_index(r2, time_axis)
    names = [str(c) for c in r2.axes[cax]]
    unknown = [c for c in channel_order if c not in names]
    if unknown:
        raise AxisNotFound(f"channels {unknown} not found")
    rows = list(channel_order) + [c for c in names if c not in channel_order]
    mat = np.moveaxis(v, (cax, tax), (0, 1))[[names.index(c) for c in rows]]
    t = np.asarray(r2.axes[tax], dtype=float)
    m = float(np.max(np.abs(mat))) if mat.size else 0.0
    m = m if m > 0 else 1.0
    if len(t) > 1:
        half = 0.5 * (t[1] - t[0])
        extent = (t[0] - half, t[-1] + half, len(rows) - 0.5, -0.5)
    else:
        extent = (-0.5, 0.5, len(rows) - 0.5, -0.5)
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=(6, 4.5), dpi=100)
        ax = fig.add_axes(R2_AXES_RECT)
        im = ax.imshow(mat, cmap=CMAP, vmin=-m, vmax=m, aspect="auto",
                       interpolation="nearest", extent=extent)
        ax.set_yticks(range(len(rows)))
        ax.set_yticklabels(rows, fontsize=max(3, min(8, 400 // max(len(rows), 1))))
        ax.set_xlabel(f"{r2.names[tax]} [{r2.units[tax]}]")
        cb_ax = fig.add_axes((0.87, 0.10, 0.03, 0.84))
        fig.colorbar(im, cax=cb_ax)
        _save(fig, out_path)
