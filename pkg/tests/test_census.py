import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from singlink.census import (
    crosscheck,
    default_lambda,
    double_point_polynomial,
    framing_index,
    gcd_cascade,
    intersection_sign,
    numeric_census,
    root_classes,
    root_of_unity,
)
from singlink.diskspec import MWForm, MWStage, NotMW, StageKind, mw_classify, parse_config
from singlink.zpoly import Z

HOLO, ANTI = StageKind.HOLO, StageKind.ANTIHOLO


def disk(w1: str, w2: str):
    return parse_config(f"disk d {{ w1 = {w1}; w2 = {w2}; }}").disks[0]


@pytest.mark.parametrize(
    "w1, w2, Q, tau, sl",
    [
        ("z^2", "z^3", (2, 1), (2,), 2),
        ("z^2", "zbar^3", (2, 1), (-4,), -4),
        ("z^4", "z^6 + z^7", (4, 2, 1), (5, 6), 16),
        ("z^3", "i*z^5 + zbar^7", (3, 1, 1), (4, -8), 8),
        ("z^4", "zbar^6 + z^9", (4, 2, 1), (-7, 8), -6),
        ("z", "0", (1,), (), 0),
    ],
)
def test_gcd_cascade(w1, w2, Q, tau, sl):
    cascade = gcd_cascade(mw_classify(disk(w1, w2)))
    assert cascade.Q == Q
    assert cascade.tau == tau
    assert cascade.sl_prop6 == sl


def test_root_classes_of_the_iterated_cusp():
    classes = root_classes(mw_classify(disk("z^4", "z^6 + z^7")))
    assert [c.exponents for c in classes] == [(1, 3), (2,)]
    assert [c.expected_count() for c in classes] == [5, 6]
    assert classes[1].values[0] == pytest.approx(-1)


def test_root_classes_skip_stages_that_keep_the_gcd():
    classes = root_classes(mw_classify(disk("z^3", "i*z^5 + zbar^7")))
    assert [c.exponents for c in classes] == [(1, 2), ()]
    assert classes[0].expected_count() == 4


stage_lists = st.lists(
    st.tuples(st.integers(2, 12), st.sampled_from([HOLO, ANTI])), min_size=1, max_size=4, unique_by=lambda s: s[0]
)


@given(st.integers(2, 6), stage_lists)
def test_root_classes_account_for_the_cascade(N, raw):
    mus = sorted(mu + N for mu, _ in raw)
    kinds = [kind for _, kind in raw]
    if math.gcd(N, *mus) != 1:
        mus.append(N * mus[-1] + 1)
        kinds.append(HOLO)
    m = MWForm(N, tuple(MWStage(mu, 1, kind) for mu, kind in zip(mus, kinds)))
    classes = root_classes(m)
    members = sorted(k for c in classes for k in c.exponents)
    assert members == list(range(1, N))
    signed = sum(len(c.exponents) * (1 if c.stage.kind is HOLO else -1) * c.expected_count() for c in classes)
    assert signed == gcd_cascade(m).sl_prop6


def test_root_of_unity():
    assert root_of_unity(1, 4) == pytest.approx(1j)
    assert root_of_unity(3, 3) == pytest.approx(1)


def test_double_point_polynomial_vanishes_at_double_points():
    m = mw_classify(disk("z^2", "z^3"))
    nu = root_of_unity(1, 2)
    S = double_point_polynomial(m, nu, 1e-3)
    # 2 z^3 + 2e-3 z = 0 at z = +-i sqrt(1e-3)
    z = 1j * math.sqrt(1e-3)
    assert abs(S(z)) < 1e-15
    smoothed = m.P + 1e-3 * Z
    assert smoothed(z) == pytest.approx(smoothed(-z))


def test_default_lambda():
    m = mw_classify(disk("z^2", "z^3"))
    assert default_lambda(m, 1.0) == pytest.approx(1e-3)
    assert default_lambda(m, 0.02) == pytest.approx(1e-5)


def test_trefoil_census():
    census = numeric_census(disk("z^2", "z^3"), lam=1e-3)
    assert census.root_count == 2
    assert [sign for rec in census.records for _, sign in rec.roots] == [1, 1]
    assert census.total_signed == 2
    assert census.signed_pair_count == 1
    assert census.counts_as_expected
    assert census.pairing_residual < 1e-8
    assert census.annulus_clear
    for z, _ in census.records[0].roots:
        assert abs(z) == pytest.approx(math.sqrt(1e-3), rel=1e-8)


def test_mirror_census():
    census = numeric_census(disk("z^2", "zbar^3"), lam=1e-3)
    assert census.root_count == 4
    assert all(sign == -1 for rec in census.records for _, sign in rec.roots)
    assert census.total_signed == -4


def test_iterated_census():
    census = numeric_census(disk("z^4", "z^6 + z^7"), lam=1e-4, workers=2)
    assert [rec.k for rec in census.records] == [1, 2, 3]
    assert [len(rec.roots) for rec in census.records] == [5, 6, 5]
    assert census.total_signed == 16
    assert census.pairing_residual < 1e-8


def test_intersection_sign_of_a_complex_double_point():
    smoothed = disk("z^2", "z^3 + 0.001*z")
    z = 1j * math.sqrt(1e-3)
    assert intersection_sign(smoothed, z, -1) == 1


@pytest.mark.parametrize("w1, w2", [("z^2", "z^3"), ("z^3", "z^4"), ("z^4", "z^6 + z^7")])
def test_framing_index_is_branching_order(w1, w2):
    d = disk(w1, w2)
    assert framing_index(d, 1e-4) == mw_classify(d).N - 1


@pytest.mark.parametrize("name, e, sl", [("trefoil", 3, 2), ("mirror", -3, -4)])
def test_crosscheck_corpus(configs, name, e, sl):
    verdict = crosscheck(configs[name].disks[0], 1e-2, lam=1e-4)
    assert verdict.passed
    assert verdict.verdict == "PASS"
    assert verdict.e_diagram == verdict.e_census == verdict.e_cascade == e
    assert verdict.cascade.sl_prop6 == sl
    assert verdict.framing_ok


def test_crosscheck_uses_given_diagram_values(configs):
    verdict = crosscheck(configs["trefoil"].disks[0], 1e-2, lam=1e-4, e_diagram=5, braid_index=2)
    assert not verdict.passed
    assert verdict.verdict == "FAIL"


def test_trefoil_self_linking_conventions(configs):
    verdict = crosscheck(configs["trefoil"].disks[0], 1e-2, lam=1e-4)
    assert (verdict.sl_paper, verdict.sl_std) == (-1, 1)
    assert verdict.sl_prop6_matches is None
    assert "matches neither" in verdict.notes[0]


@pytest.mark.slow
def test_crosscheck_iterated(configs):
    verdict = crosscheck(configs["iterated"].disks[0], 1e-2, lam=1e-4)
    assert verdict.passed
    assert verdict.e_diagram == 19
    assert verdict.cascade.Q == (4, 2, 1)


MW_FORMS = [
    (2, "z^5"),
    (2, "zbar^5"),
    (3, "z^4"),
    (3, "zbar^4"),
    (3, "z^5 + 0.1*zbar^7"),
    (4, "z^5"),
    (4, "zbar^6 + 0.1*z^9"),
    (4, "z^6 + 0.1*zbar^9"),
    (2, "z^7"),
]


@pytest.mark.parametrize("N, w2", MW_FORMS)
def test_census_matches_cascade(N, w2):
    d = disk(f"z^{N}", w2)
    m = mw_classify(d)
    census = numeric_census(d, lam=1e-5)
    assert census.counts_as_expected
    assert census.total_signed == gcd_cascade(m).sl_prop6
    for rec in census.records:
        signs = {sign for _, sign in rec.roots}
        assert signs == ({1} if m.stages[rec.class_index].kind is HOLO else {-1})


@pytest.mark.slow
@pytest.mark.parametrize("N, w2", [(3, "z^4"), (3, "zbar^4"), (2, "zbar^5")])
def test_diagram_matches_census(N, w2):
    verdict = crosscheck(disk(f"z^{N}", w2), 1e-2, lam=1e-5)
    assert verdict.passed, verdict.notes


def seeded_mw_forms(seed: int, count: int) -> list[tuple[int, str]]:
    """Distinct normal forms with N <= 4 and exponents <= 9, each stage lowering the gcd."""
    rng = random.Random(seed)
    forms: list[tuple[int, str]] = []
    while len(forms) < count:
        N = rng.randint(2, 4)
        g, mu, stages = N, N, []
        while g > 1:
            mu = rng.choice([m for m in range(mu + 1, 10) if math.gcd(g, m) < g])
            g = math.gcd(g, mu)
            stages.append(f"{rng.choice(['z', 'zbar'])}^{mu}")
        form = (N, " + ".join(stages))
        if form not in forms:
            forms.append(form)
    return forms


@pytest.mark.slow
@pytest.mark.parametrize("N, w2", seeded_mw_forms(seed=7, count=20))
def test_crosscheck_on_seeded_normal_forms(N, w2):
    verdict = crosscheck(disk(f"z^{N}", w2), 1e-2)
    assert verdict.census.counts_as_expected
    assert verdict.census.pairing_residual < 1e-8
    assert verdict.e_diagram == N - 1 + verdict.census.total_signed
    assert verdict.passed, verdict.notes


def test_census_rejects_frames(configs):
    with pytest.raises(NotMW):
        numeric_census(configs["hopf"].disks[1])


def test_census_values_are_finite():
    census = numeric_census(disk("z^3", "z^4"), lam=1e-4)
    roots = np.array([z for rec in census.records for z, _ in rec.roots])
    assert np.all(np.isfinite(roots))
    assert len(roots) == 2 * 3
