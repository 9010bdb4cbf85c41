import matplotlib
import matplotlib.image as mpimg
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import RBFInterpolator

from bcikit.data import make_data
from bcikit.errors import AxisNotFound, MissingPosition, TooFewElectrodes, ValueOutOfRange
from bcikit.formats import ElectrodeLayout, default_layout, grid_layout
from bcikit.viz import (
    R2_AXES_RECT,
    SCALP_LIMIT,
    interpolate_scalp,
    render_r2_map,
    render_scalp,
    render_timecourse,
)

from conftest import epoched

CH = ["Fz", "Cz", "Pz", "C3", "C4", "F3", "F4", "P3", "P4", "Oz"]


def test_constant_field():
    f = interpolate_scalp(np.full(len(CH), 3.5), default_layout(), 32, CH)
    assert np.allclose(f.grid[f.mask], 3.5, atol=1e-9)
    assert np.all(np.isnan(f.grid[~f.mask]))


def test_passes_through_electrodes(rng):
    lay = default_layout()
    v = rng.standard_normal(len(CH))
    f = interpolate_scalp(v, lay, 48, CH)
    np.testing.assert_allclose(f.evaluate([lay.position(c) for c in CH]), v, atol=1e-9)


def test_grid_snapped_electrodes():
    # electrodes placed exactly on grid nodes
    res = 21
    xs = np.linspace(-1, 1, res)
    nodes = [(xs[i], xs[j]) for i, j in ((10, 10), (5, 10), (15, 10), (10, 4), (10, 16), (7, 7))]
    lay = ElectrodeLayout(tuple(f"e{i}" for i in range(len(nodes))), np.array(nodes))
    v = np.array([1.0, -2, 0.5, 3, -1, 2])
    f = interpolate_scalp(v, lay, res, lay.names)
    for (x, y), val in zip(nodes, v):
        i = int(np.argmin(np.abs(f.ys - y)))
        j = int(np.argmin(np.abs(f.xs - x)))
        assert f.grid[i, j] == pytest.approx(val, abs=1e-6)


def test_matches_thin_plate_oracle(rng):
    lay = default_layout()
    names = list(lay.names[::3])
    v = rng.standard_normal(len(names))
    f = interpolate_scalp(v, lay, 40, names)
    pos = np.array([lay.position(c) for c in names])
    oracle = RBFInterpolator(pos, v, kernel="thin_plate_spline", degree=1)
    pts = rng.uniform(-0.7, 0.7, (200, 2))
    np.testing.assert_allclose(f.evaluate(pts), oracle(pts), atol=1e-8)


def test_reproduces_affine_functions():
    lay = default_layout()
    pos = np.array([lay.position(c) for c in CH])
    v = 2.0 - 3 * pos[:, 0] + 0.5 * pos[:, 1]
    f = interpolate_scalp(v, lay, 30, CH)
    gx, gy = np.meshgrid(f.xs, f.ys)
    np.testing.assert_allclose(f.grid[f.mask], (2.0 - 3 * gx + 0.5 * gy)[f.mask], atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 1000))
def test_affine_equivariance(a, b, seed):
    lay = default_layout()
    v = np.random.default_rng(seed).standard_normal(len(CH))
    f = interpolate_scalp(v, lay, 16, CH)
    g = interpolate_scalp(a * v + b, lay, 16, CH)
    np.testing.assert_allclose(g.grid[g.mask], a * f.grid[f.mask] + b, atol=1e-9 * (1 + abs(a)))


def test_interpolate_from_data_and_errors():
    lay = default_layout()
    d = make_data(np.arange(4.0), [["Cz", "Fz", "Pz", "Oz"]], ["channel"], ["uV"])
    assert interpolate_scalp(d, lay, 8).values.tolist() == [0, 1, 2, 3]
    with pytest.raises(MissingPosition):
        interpolate_scalp([1, 2, 3], lay, 8, ["Cz", "Fz", "XYZ"])
    with pytest.raises(TooFewElectrodes):
        interpolate_scalp([1, 2], lay, 8, ["Cz", "Fz"])


def _pixel(img, x, y):
    h, w = img.shape[:2]
    col = int((x + SCALP_LIMIT) / (2 * SCALP_LIMIT) * w)
    row = int((SCALP_LIMIT - y) / (2 * SCALP_LIMIT) * h)
    return img[row, col, :3]


def test_render_scalp_dipole(tmp_path):
    lay = default_layout()
    ch = ["Fpz", "Fz", "Cz", "Pz", "Oz", "C3", "C4"]
    v = [1.0, 1.0, 0.0, -1.0, -1.0, 0.0, 0.0]
    f = interpolate_scalp(v, lay, 64, ch)
    render_scalp(f, tmp_path / "s.png", show_electrodes=False)
    img = mpimg.imread(tmp_path / "s.png")
    top, bottom = _pixel(img, 0, 0.55), _pixel(img, 0, -0.55)
    # diverging map: red high, blue low
    assert top[0] > top[2] + 0.2 and bottom[2] > bottom[0] + 0.2


def test_render_constant_single_colour(tmp_path):
    f = interpolate_scalp(np.ones(len(CH)), default_layout(), 32, CH)
    render_scalp(f, tmp_path / "c.png", show_electrodes=False)
    img = mpimg.imread(tmp_path / "c.png")
    probes = [_pixel(img, x, y) for x, y in ((0, 0.3), (-0.4, -0.2), (0.5, 0.1), (0.1, -0.6))]
    assert all(np.allclose(p, probes[0], atol=2 / 255) for p in probes)


@pytest.mark.parametrize("suffix", [".svg", ".png"])
def test_render_scalp_deterministic(tmp_path, suffix):
    f = interpolate_scalp(np.arange(len(CH), dtype=float), default_layout(), 32, CH)
    render_scalp(f, tmp_path / f"a{suffix}")
    render_scalp(f, tmp_path / f"b{suffix}")
    a = (tmp_path / f"a{suffix}").read_bytes()
    assert a == (tmp_path / f"b{suffix}").read_bytes() and len(a) > 0


def test_render_grid_layout(tmp_path):
    lay = grid_layout()
    f = interpolate_scalp(np.linspace(-1, 1, 64), lay, 32, lay.names)
    render_scalp(f, tmp_path / "g.svg")
    assert (tmp_path / "g.svg").stat().st_size > 0


def test_timecourse_panels(tmp_path):
    epo = epoched(4, 20, 5)
    titles = render_timecourse(epo, ["c0", "c2", "c4"], tmp_path / "t.svg")
    assert titles == ["c0", "c2", "c4"]
    render_timecourse(epo, ["c0", "c2", "c4"], tmp_path / "u.svg")
    assert (tmp_path / "t.svg").read_bytes() == (tmp_path / "u.svg").read_bytes()
    with pytest.raises(AxisNotFound):
        render_timecourse(epo, [], tmp_path / "x.svg")
    with pytest.raises(AxisNotFound):
        render_timecourse(epo, ["nope"], tmp_path / "x.svg")


def test_timecourse_continuous(tmp_path, cnt):
    render_timecourse(cnt, [str(cnt.axes[1][0])], tmp_path / "c.png")
    assert (tmp_path / "c.png").stat().st_size > 0


def _r2(values, channels):
    t = np.arange(values.shape[0]) * 10.0
    return make_data(values, [t, channels], ["time", "channel"], ["ms", "#"])


def _cell(img, i, j, nrows, ncols):
    h, w = img.shape[:2]
    left, bottom, width, height = R2_AXES_RECT
    x = left + width * (j + 0.5) / ncols
    y = 1 - (bottom + height) + height * (i + 0.5) / nrows
    return img[int(y * h), int(x * w), :3]


def test_r2_map_sign_flip(tmp_path):
    v = np.zeros((6, 4))
    v[2, 1] = 0.8
    v[4, 3] = -0.3
    chans = ["Fz", "Cz", "Pz", "Oz"]
    render_r2_map(_r2(v, chans), chans, tmp_path / "a.png")
    render_r2_map(_r2(-v, chans), chans, tmp_path / "b.png")
    a, b = mpimg.imread(tmp_path / "a.png"), mpimg.imread(tmp_path / "b.png")
    # channel Cz is row 1, time index 2 is column 2
    cmap = matplotlib.colormaps["RdBu_r"]
    pa, pb = _cell(a, 1, 2, 4, 6), _cell(b, 1, 2, 4, 6)
    np.testing.assert_allclose(pa, cmap(1.0)[:3], atol=2 / 255)
    np.testing.assert_allclose(pb, cmap(0.0)[:3], atol=2 / 255)
    assert pa[0] > pa[2] and pb[2] > pb[0]


def test_r2_map_order_and_zero(tmp_path):
    v = np.zeros((5, 3))
    v[:, 2] = 0.5
    chans = ["Oz", "Cz", "Fz"]
    render_r2_map(_r2(v, chans), ["Fz", "Cz", "Oz"], tmp_path / "o.png")
    img = mpimg.imread(tmp_path / "o.png")
    # Fz (the only nonzero channel) is drawn in the first row
    top = matplotlib.colormaps["RdBu_r"](1.0)[:3]
    np.testing.assert_allclose(_cell(img, 0, 2, 3, 5), top, atol=2 / 255)
    assert np.all(_cell(img, 2, 2, 3, 5) > 0.9)
    render_r2_map(_r2(np.zeros((5, 3)), chans), chans, tmp_path / "z.png")
    z = mpimg.imread(tmp_path / "z.png")
    cells = [_cell(z, i, j, 3, 5) for i in range(3) for j in range(5)]
    assert all(np.allclose(c, cells[0], atol=1 / 255) for c in cells)
    assert np.allclose(cells[0], 0.97, atol=0.05)  # mid-scale is near white


def test_r2_map_errors(tmp_path):
    v = np.zeros((3, 2))
    v[0, 0] = 1.5
    with pytest.raises(ValueOutOfRange):
        render_r2_map(_r2(v, ["a", "b"]), ["a", "b"], tmp_path / "x.svg")
    with pytest.raises(AxisNotFound):
        render_r2_map(_r2(np.zeros((3, 2)), ["a", "b"]), ["c"], tmp_path / "x.svg")


def test_r2_map_deterministic(tmp_path):
    v = np.random.default_rng(0).uniform(-1, 1, (8, 4))
    d = _r2(v, ["a", "b", "c", "d"])
    render_r2_map(d, ["d", "c"], tmp_path / "a.svg")
    render_r2_map(d, ["d", "c"], tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
