import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from hybridzeta import zeta_eval
from hybridzeta.errors import DomainError, MissedZeroError, ZeroTableFormatError
from hybridzeta.zeta_eval import (
    HighHeight,
    Provenance,
    ZeroTable,
    find_zeros,
    hardy_z,
    hardy_z_em,
    hardy_z_rs,
    height_of_index,
    load_zero_table,
    riemann_von_mangoldt,
    theta,
    write_zero_table,
    zeta_critical,
    zeta_direct,
    zeta_em,
)

# mpmath (30 digits): t, Z(t), theta(t)
Z_REF = [
    (50.0, -0.34073500595502498275, 26.461366070161409647),
    (100.0, 2.692697056664463475, 87.972165231787219625),
    (500.0, 1.4724478510550852727, 843.79010058818922952),
    (1000.0, 0.99779463752158661399, 2034.5464280380316087),
    (10000.5, 0.29854015111403722438, 31863.766952912004257),
]
ZERO_REF = [
    (1, 14.13472514173469379),
    (2, 21.022039638771554993),
    (3, 25.010857580145688763),
    (100, 236.5242296658162058),
    (1000, 1419.4224809459956865),
]
ZETA_REF = [
    (0.5 + 14j, 0.022241142609993589246 - 0.1032581232664500579j),
    (2 + 100j, 1.1907804087752170159 - 0.053890959354260458324j),
    (0.3 + 7j, 1.0171314988950936839 + 0.43944400689634059683j),
]


@pytest.mark.parametrize("t,z,th", Z_REF)
def test_hardy_z_reference(t, z, th):
    assert hardy_z(t) == pytest.approx(z, abs=1e-9)
    assert theta(t) == pytest.approx(th, abs=1e-10)


def test_rs_accuracy_grows_with_height():
    for t, z, _ in Z_REF[2:]:
        assert abs(hardy_z_rs(t) - z) < 1e-9


def test_theta_small_t_branch():
    t = np.array([0.5, 3.0, 9.9])
    ref = special.loggamma(0.25 + 0.5j * t).imag - 0.5 * t * math.log(math.pi)
    assert np.allclose(theta(t), ref, atol=1e-14)
    assert theta(-3.0) == pytest.approx(-theta(3.0))


@pytest.mark.parametrize("s,ref", ZETA_REF)
def test_zeta_direct_reference(s, ref):
    assert abs(zeta_direct(s) - ref) < 1e-12 * max(1, abs(ref))


def test_zeta_special_values():
    assert zeta_em(2.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert zeta_em(-1.0) == pytest.approx(-1 / 12, rel=1e-12)
    with pytest.raises(DomainError):
        zeta_em(1.0)


def test_rs_vs_em_on_critical_line():
    t = np.linspace(50, 500, 181)
    for tt in t:
        rs = zeta_direct(0.5 + 1j * tt, method="rs")
        em = zeta_direct(0.5 + 1j * tt, method="em")
        assert abs(rs - em) <= 1e-6 * max(1.0, abs(em))


@given(st.floats(-1.5, 2.5), st.floats(5, 80))
@settings(max_examples=40, deadline=None)
def test_functional_equation(sigma, t):
    s = complex(sigma, t)
    chi = 2 ** s * math.pi ** (s - 1) * np.sin(math.pi * s / 2) * special.gamma(1 - s)
    lhs = zeta_em(s)
    rhs = chi * zeta_em(1 - s)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_zeta_critical_matches_z():
    t = 777.7
    assert abs(zeta_critical(t)) == pytest.approx(abs(hardy_z(t)), rel=1e-12)
    assert hardy_z_em(120.0) == pytest.approx(hardy_z(120.0), abs=1e-12)


@pytest.mark.parametrize("n,g", ZERO_REF)
def test_zero_locations(n, g):
    table = find_zeros(g - 1.0, g + 1.0)
    j = n - table.index_offset
    assert table.ordinates[j] == pytest.approx(g, abs=1e-9)


def test_first_three_zeros():
    table = find_zeros(10, 30)
    assert len(table) == 3
    assert table.index_offset == 1
    assert table.provenance is Provenance.COMPUTED
    assert len(find_zeros(15, 20)) == 0


def test_zero_table_union():
    a, b, c = 1000.0, 1013.37, 1030.0
    left, right, whole = find_zeros(a, b), find_zeros(b, c), find_zeros(a, c)
    assert np.allclose(np.concatenate([left.ordinates, right.ordinates]), whole.ordinates, atol=1e-9)


def test_computed_zeros_are_zeros():
    table = find_zeros(5000, 5100)
    for g in table.ordinates:
        nb = max(1.0, abs(hardy_z(g - 0.05)), abs(hardy_z(g + 0.05)))
        assert abs(hardy_z(g)) < 1e-6 * nb


def test_count_matches_riemann_von_mangoldt():
    table = find_zeros(1e4, 1.1e4)
    expected = riemann_von_mangoldt(1.1e4) - riemann_von_mangoldt(1e4)
    assert abs(len(table) - expected) < 3


def test_missed_zero_error(monkeypatch):
    monkeypatch.setattr(zeta_eval, "_brackets", lambda *a, **k: (np.zeros(0), np.zeros(0)))
    with pytest.raises(MissedZeroError) as exc:
        find_zeros(1000, 1100)
    assert exc.value.found == 0 and exc.value.expected > 50


def test_find_zeros_domain():
    with pytest.raises(DomainError):
        find_zeros(30, 10)


def test_height_of_index():
    for n, g in ZERO_REF[3:]:
        assert abs(float(height_of_index(n)) - g) < 1.0


def test_high_height_matches_reference():
    hh = HighHeight("100000000", span=5)
    vals = hh.hardy_z(np.array([0.25, 1.7]))
    # mpmath siegelz at 30 digits
    assert vals[0] == pytest.approx(17.8507329347220860689, abs=1e-7)
    assert vals[1] == pytest.approx(0.140792779992675448519, abs=1e-7)


def test_high_height_agrees_with_double_path():
    hh = HighHeight("250000", span=5)
    x = np.linspace(0, 4, 9)
    assert np.allclose(hh.hardy_z(x), hardy_z(250000 + x), atol=1e-8)


def test_zero_table_io_roundtrip(tmp_path):
    table = find_zeros(10, 60)
    p = tmp_path / "z.txt"
    write_zero_table(table, p, ["window 10 60"])
    back = load_zero_table(p)
    assert back.provenance is Provenance.INGESTED
    assert np.allclose(back.ordinates, table.ordinates, atol=1e-11)
    assert back.index_offset == 1


def test_offset_format(tmp_path):
    p = tmp_path / "z.txt"
    p.write_text("# high zeros\nbase 267653395647\n1.25\n1.5\n")
    t = load_zero_table(p)
    assert t.base_str == "267653395647"
    assert t.offsets.tolist() == [1.25, 1.5]
    t2 = t.rebase("267653395648")
    assert t2.offsets.tolist() == [0.25, 0.5]


def test_table_format_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("# c\n14.1\n21.0\n20.0\n")
    with pytest.raises(ZeroTableFormatError, match="line 4"):
        load_zero_table(p)
    p.write_text("14.1\nabc\n")
    with pytest.raises(ZeroTableFormatError, match="line 2"):
        load_zero_table(p)
    p.write_text("1.0\n")
    with pytest.raises(ZeroTableFormatError):
        load_zero_table(p, fmt="offset")


def test_zero_table_slice_and_validate():
    t = ZeroTable(10.0, np.array([1.0, 2.0, 3.0, 4.0]), 7, Provenance.COMPUTED, "10")
    s = t.slice(11.5, 13.0)
    assert s.offsets.tolist() == [2.0, 3.0] and s.index_offset == 8
    with pytest.raises(ZeroTableFormatError):
        ZeroTable(0.0, np.array([2.0, 1.0])).validate()
