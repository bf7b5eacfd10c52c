from fractions import Fraction
from math import floor, sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dieroll.bounds import (
    QsdEnsemble,
    as10_bound,
    as10_values,
    bounds_table,
    certificate_to_qsd_witness,
    kitaev_bound,
    kitaev_pct,
    lemma1_bound,
    pct,
    purification_witnesses,
    purified_protocol,
    qsd_lower_bound,
    qsd_optimum,
    random_ensemble,
    random_witnesses,
    table_csv,
    theorem1_bound,
    CSV_COLUMNS,
)
from dieroll.cheating import AliceCertificate, subset_alice_certificate
from dieroll.matlin import inner
from dieroll.protocol import build_subset_protocol, reduced_states

# [PAPER] reference truncated percentages, D = 2..10
TABLE = {
    "as10": [75, 66, 62, 60, 58, 57, 56, 55, 55],
    "classical": [100, 66, 50, 50, 50, 42, 37, 33, 33],
    "quantum": [75, 60, 50, 46, 44, 40, 36, 33, 32],
    "kitaev": [70, 57, 50, 44, 40, 37, 35, 33, 31],
}


def subset_ensemble(D, m):
    return QsdEnsemble(tuple(reduced_states(build_subset_protocol(D, m))), tuple([1 / D] * D))


def test_table_rows():
    rows = bounds_table()
    assert [r.D for r in rows] == list(range(2, 11))
    for key, vals in TABLE.items():
        assert [r.percentages[key] for r in rows] == vals, key


def test_pct_exact():
    assert pct(Fraction(2, 3)) == 66
    assert pct(Fraction(1, 2)) == 50
    assert pct(Fraction(29, 100)) == 29  # float 0.29*100 would give 28.999...


def test_classical_bound():
    assert lemma1_bound(5) == Fraction(1, 2)
    assert lemma1_bound(9) == Fraction(1, 3)
    assert lemma1_bound(7) == Fraction(3, 7)


def test_kitaev():
    assert kitaev_pct(2) == 70 and kitaev_bound(2) == pytest.approx(0.70710678)
    assert kitaev_bound(4) == 0.5
    assert kitaev_pct(10) == 31
    for D in range(2, 2000):
        assert kitaev_pct(D) == floor(100 / sqrt(D))


def test_as10():
    assert as10_bound(2) == Fraction(3, 4)
    assert as10_bound(3) == Fraction(2, 3)
    assert abs(float(as10_bound(10**6)) - 0.5) < 1e-5
    a, b = as10_values(10**6)
    assert a > b


def test_quantum_bound():
    assert theorem1_bound(4) == Fraction(1, 2)
    assert theorem1_bound(10) == Fraction(13, 40)
    # both branches give 4/9 at D = 6
    assert theorem1_bound(6) == Fraction(4, 9)
    assert pct(theorem1_bound(6)) == 44


def test_csv_schema():
    text = table_csv(bounds_table(2, 12))
    lines = text.strip().splitlines()
    assert lines[0].split(",") == CSV_COLUMNS
    assert len(lines) == 12
    assert lines[2].startswith("3,2/3,66,3/5,60,")


def test_qsd_optimum_trivial():
    e = QsdEnsemble((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), (0.3, 0.7))
    assert qsd_optimum(e) == pytest.approx(1.0, abs=1e-7)
    single = QsdEnsemble((np.diag([0.5, 0.5]),), (1.0,))
    assert qsd_optimum(single) == pytest.approx(1.0, abs=1e-7)


def test_qsd_optimum_subset():
    assert qsd_optimum(subset_ensemble(4, 2)) == pytest.approx(0.5, abs=1e-7)


def test_qsd_optimum_helstrom(rng):
    # [DERIVED] two states: 1/2 + ||p1 rho1 - p2 rho2||_1 / 2
    e = random_ensemble(rng, 2, 3)
    Delta = e.priors[0] * e.states[0] - e.priors[1] * e.states[1]
    helstrom = 0.5 + 0.5 * np.abs(np.linalg.eigvalsh(Delta)).sum()
    assert qsd_optimum(e) == pytest.approx(helstrom, abs=1e-7)


def test_ensemble_validation():
    with pytest.raises(ValueError):
        QsdEnsemble((np.eye(2),), (1.0,))
    with pytest.raises(ValueError):
        QsdEnsemble((np.diag([1.5, -0.5]),), (1.0,))
    with pytest.raises(ValueError):
        QsdEnsemble((np.diag([1.0, 0.0]),), (0.5,))


def test_qsd_bound_scalar():
    e = QsdEnsemble((np.ones((1, 1)),), (1.0,))
    assert qsd_lower_bound([np.ones((1, 1))], e) == pytest.approx(1.0)


def test_qsd_bound_orthogonal_family():
    # [DERIVED] W_1 = diag(1, K), W_2 = diag(K, 1): bound = 1/(1 + 1/K) -> 1
    e = QsdEnsemble((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), (0.5, 0.5))
    prev = 0.0
    for K in (1.0, 10.0, 1e3, 1e6):
        b = qsd_lower_bound([np.diag([1.0, K]), np.diag([K, 1.0])], e)
        assert b == pytest.approx(K / (K + 1))
        assert b > prev
        prev = b
    assert prev > 1 - 1e-5


def test_qsd_bound_rejects():
    e = QsdEnsemble((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), (0.5, 0.5))
    with pytest.raises(ValueError, match="W_2"):
        qsd_lower_bound([np.eye(2), 2 * np.eye(2)], e)
    with pytest.raises(ValueError):
        qsd_lower_bound([np.diag([1.0, -1.0]), np.eye(2)], e)
    with pytest.raises(ValueError):
        qsd_lower_bound([np.eye(2)], e)


def test_qsd_bound_ignores_priors():
    rng = np.random.default_rng(4)
    e = random_ensemble(rng, 3, 3)
    W = random_witnesses(rng, e)
    e2 = QsdEnsemble(e.states, (0.8, 0.1, 0.1))
    assert qsd_lower_bound(W, e) == qsd_lower_bound(W, e2)


def test_certificate_witnesses_tight():
    # [PAPER] (4,2): bound = 1/(D s) -> 1/m, equal to the optimum up to eps
    D, m = 4, 2
    cert = subset_alice_certificate(D, m, 1e-8)
    e = subset_ensemble(D, m)
    W = certificate_to_qsd_witness(cert, D)
    for Wi, rho in zip(W, e.states):
        assert inner(Wi, rho) == pytest.approx(1.0, abs=1e-10)
    b = qsd_lower_bound(W, e)
    # [DERIVED] sum_a W_a^{-1} = D sum_a Z_a = (m + D (D - m) eps) I
    assert b == pytest.approx(1 / (m + D * (D - m) * 1e-8), rel=1e-12)
    assert b >= 1 / (D * cert.s)
    assert qsd_optimum(e) - b <= D * 1e-8 + 1e-7


def test_identity_certificate_witness():
    W = certificate_to_qsd_witness(AliceCertificate(5.0, [np.eye(3)] * 4), 4)
    rho = np.diag([1.0, 0.0, 0.0])
    for Wi in W:
        np.testing.assert_allclose(Wi, np.eye(3) / 4)
        assert inner(Wi, rho) == pytest.approx(0.25)


def test_orthogonal_certificate_limit():
    # [DERIVED] (3,1): bound -> 1 as eps -> 0
    e = subset_ensemble(3, 1)
    vals = [qsd_lower_bound(certificate_to_qsd_witness(subset_alice_certificate(3, 1, eps), 3), e)
            for eps in (1e-2, 1e-4, 1e-8)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] == pytest.approx(1.0, abs=1e-6)


@given(st.integers(0, 10**6))
@settings(max_examples=25)
def test_bound_below_optimum(seed):
    rng = np.random.default_rng(seed)
    e = random_ensemble(rng, int(rng.integers(1, 5)), int(rng.integers(1, 7)))
    W = random_witnesses(rng, e)
    assert qsd_lower_bound(W, e) <= qsd_optimum(e) + 1e-7


def test_purified_protocol_reduces_to_ensemble(rng):
    e = random_ensemble(rng, 3, 3)
    p = purified_protocol(e)
    for r, rho in zip(reduced_states(p), e.states):
        np.testing.assert_allclose(r, rho, atol=1e-10)


def test_purification_witnesses_valid(rng):
    e = random_ensemble(rng, 3, 2)
    W = purification_witnesses(e)
    for Wi, rho in zip(W, e.states):
        assert inner(Wi, rho) <= 1 + 1e-12
        assert np.linalg.eigvalsh(Wi)[0] > 0
    assert qsd_lower_bound(W, e) <= qsd_optimum(e) + 1e-7
