import pytest

from _purity import CASES, SENTINEL, check_case, cnt, sentinel_pipeline, sentinel_survives


@pytest.mark.parametrize("name,make_inputs,op", CASES, ids=[c[0] for c in CASES])
def test_inputs_unchanged(name, make_inputs, op):
    assert check_case(make_inputs, op)


def test_sentinel_through_pipeline():
    assert sentinel_survives()
    assert sentinel_pipeline().shape[1:] == (2, 3)


def test_extra_is_not_aliased():
    from bcikit.sigproc import select_channels

    d = cnt()
    derived = select_channels(d, ["Cz"])
    derived.extra["sentinel"]["tags"].append("x")
    assert d.extra == SENTINEL
