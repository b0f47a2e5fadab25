import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from singlink.diskspec import (
    BranchedDisk,
    DslSyntaxError,
    DuplicateDisk,
    DuplicateLabel,
    EmptyConfig,
    MWStage,
    NotMW,
    NotNormalForm,
    NotThroughOrigin,
    Rotation,
    SingularityConfig,
    StageKind,
    format_config,
    load_config,
    mw_classify,
    parse_config,
    validate_config,
    validate_disk,
)
from singlink.zpoly import Z, ZPolynomial


def disk(w1: str, w2: str) -> BranchedDisk:
    return parse_config(f"disk d {{ w1 = {w1}; w2 = {w2}; }}").disks[0]


def test_parse_single_disk():
    config = parse_config("disk t { w1 = z^2; w2 = z^3; }")
    assert config.labels == ["t"]
    assert config.disks[0].w1 == Z * Z
    assert config.disks[0].w2 == Z * Z * Z


def test_parse_coefficients_and_comments():
    text = """
    # comment line
    disk a {
        w1 = 2*z;       # trailing comment
        w2 = i*z^2*zbar - (1.5-0.5i)*zbar^3 + 0.25*z^4;
    }
    """
    d = parse_config(text).disks[0]
    assert d.w1 == 2 * Z
    assert d.w2.coefficient(2, 1) == 1j
    assert d.w2.coefficient(0, 3) == -(1.5 - 0.5j)
    assert d.w2.coefficient(4, 0) == 0.25
    assert d.line == 3


def test_parse_frame_clause():
    d = parse_config("disk b { w1 = z; w2 = 0; frame = rot(1,3,pi/3) * rot(2,4,1*pi/3); }").disks[0]
    assert d.frame == (Rotation(1, 3, math.pi / 3), Rotation(2, 4, math.pi / 3))
    assert np.allclose(d.frame_matrix @ d.frame_matrix.T, np.eye(4))


@pytest.mark.parametrize(
    "text, line, col, expected, found",
    [
        ("disk x { w1 = z^2 }", 1, 19, "';'", "'}'"),
        ("disk x {\n  w1 = z^2;\n  w3 = z; }", 3, 3, "'w2'", "'w3'"),
        ("disk { w1 = z; w2 = 0; }", 1, 6, "an identifier", "'{'"),
        ("disk x { w1 = z^; w2 = 0; }", 1, 17, "a number", "';'"),
        ("disk x { w1 = z^2.5; w2 = 0; }", 1, 17, "an integer", "'2.5'"),
        ("disk x { w1 = z; w2 = 0; frame = rot(1,1,pi); }", 1, 34, "two distinct axes in 1..4", "rot(1,1,...)"),
        ("disk x { w1 = z; w2 = 0; frame = rot(1,2,pi/0); }", 1, 45, "a nonzero divisor", "'0'"),
        ("disk x { w1 = z $ 2; w2 = 0; }", 1, 17, "';'", "'$'"),
        ("disk x { w1 = z;", 1, 17, "'w2'", "end of input"),
    ],
)
def test_syntax_errors_carry_location(text, line, col, expected, found):
    with pytest.raises(DslSyntaxError) as info:
        parse_config(text)
    assert (info.value.line, info.value.col) == (line, col)
    assert expected in info.value.expected
    assert info.value.found == found


def test_expected_alternatives_are_listed():
    with pytest.raises(DslSyntaxError) as info:
        parse_config("disk x { w1 = z^2 }")
    assert info.value.expected == "'*', '+', '-' or ';'"


@pytest.mark.parametrize(
    "text, col, expected",
    [
        ("disk x { w1 = z; w2 = 1e400*z^2; }", 22, "a finite number"),
        ("disk x { w1 = z; w2 = (1.0-1e999i)*z^2; }", 27, "a finite number"),
        ("disk x { w1 = z; w2 = 0; frame = rot(1,3,1e400); }", 42, "a finite number"),
        ("disk x { w1 = z; w2 = 0; frame = rot(1,3,1e308*pi); }", 42, "a finite angle"),
        ("disk x { w1 = z; w2 = 1e308*z^2 + 1e308*z^2; }", 22, "finite coefficients"),
    ],
)
def test_non_finite_literals_are_syntax_errors(text, col, expected):
    with pytest.raises(DslSyntaxError) as info:
        parse_config(text)
    assert (info.value.line, info.value.col) == (1, col)
    assert info.value.expected == expected


def test_syntax_error_names_the_file(corpus):
    with pytest.raises(DslSyntaxError) as info:
        load_config(corpus / "malformed.sing")
    assert str(info.value) == "malformed.sing: line 4, col 1: expected '*', '+', '-' or ';', found '}'"


def test_duplicate_label():
    with pytest.raises(DuplicateLabel):
        parse_config("disk a { w1 = z; w2 = 0; } disk a { w1 = z^2; w2 = z^3; }")


@pytest.mark.parametrize("text", ["", "   # only a comment\n"])
def test_empty_config(text):
    with pytest.raises(EmptyConfig):
        parse_config(text)


@pytest.mark.parametrize(
    "w1, w2, N",
    [("z^3", "zbar^5", 3), ("z", "0", 1), ("z^2 + z*zbar^2", "z^3", 2), ("2*z^2", "z^2*zbar", 2)],
)
def test_validate_disk(w1, w2, N):
    c = validate_disk(disk(w1, w2))
    assert c.N == N
    assert c.branching_order == N - 1


@pytest.mark.parametrize(
    "w1, w2, error",
    [
        ("zbar^2", "z^3", NotNormalForm),
        ("z^2 + zbar^2", "z^3", NotNormalForm),
        ("-z^2", "z^3", NotNormalForm),
        ("i*z^2", "z^3", NotNormalForm),
        ("0", "z", NotNormalForm),
        ("z^2", "z^2", NotNormalForm),
        ("z", "z", NotNormalForm),
        ("z^2 + 1", "z^3", NotThroughOrigin),
        ("z^2", "z^3 + 0.5", NotThroughOrigin),
    ],
)
def test_validate_disk_rejects(w1, w2, error):
    with pytest.raises(error):
        validate_disk(disk(w1, w2))


def test_validate_config_rejects_duplicates():
    config = parse_config("disk a { w1 = z^2; w2 = z^3; } disk b { w1 = z^2; w2 = z^3; }")
    with pytest.raises(DuplicateDisk):
        validate_config(config)


def test_validate_config_warns_on_shared_tangent_plane(caplog):
    config = parse_config("disk a { w1 = z^2; w2 = z^3; } disk b { w1 = z^2; w2 = z^5; }")
    validate_config(config)
    assert "share their tangent plane" in caplog.text


def test_framed_copies_are_distinct(configs):
    classes = validate_config(configs["hopf"])
    assert [c.N for c in classes] == [1, 1]


@pytest.mark.parametrize(
    "w1, w2, N, stages",
    [
        ("z^2", "z^3", 2, [MWStage(3, 1, StageKind.HOLO)]),
        ("z^4", "z^6 + z^7", 4, [MWStage(6, 1, StageKind.HOLO), MWStage(7, 1, StageKind.HOLO)]),
        ("z^2", "2*zbar^3", 2, [MWStage(3, 2, StageKind.ANTIHOLO)]),
        ("z^3", "zbar^7 + i*z^5", 3, [MWStage(5, 1j, StageKind.HOLO), MWStage(7, 1, StageKind.ANTIHOLO)]),
        ("z", "0", 1, []),
    ],
)
def test_mw_classify(w1, w2, N, stages):
    m = mw_classify(disk(w1, w2))
    assert m.N == N
    assert list(m.stages) == stages
    assert validate_disk(m.disk()).N == N


@pytest.mark.parametrize(
    "w1, w2, reason",
    [
        ("z^2", "z^4 + z^6", "not coprime"),
        ("z^2", "z^3 + zbar^3", "both z^3 and zbar^3"),
        ("z^2", "z^2*zbar^3", "mixed monomial"),
        ("z^2 + z^3", "z^5", "not exactly z^2"),
        ("2*z^2", "z^5", "not exactly z^2"),
    ],
)
def test_mw_classify_rejects(w1, w2, reason):
    with pytest.raises(NotMW) as info:
        mw_classify(disk(w1, w2))
    assert reason in info.value.reason


def test_mw_classify_rejects_frames(configs):
    a, b = configs["hopf"].disks
    assert mw_classify(a).N == 1
    with pytest.raises(NotMW):
        mw_classify(b)


def test_mirrored_negates_x4():
    d = parse_config("disk b { w1 = z^2; w2 = z^3 + z^4*zbar; frame = rot(1,4,0.3) * rot(2,3,0.2); }").disks[0]
    z = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    assert np.allclose(d.mirrored().point(z), d.point(z) @ flip)


def test_mirror_of_the_trefoil_disk(configs):
    assert configs["trefoil"].mirrored().disks[0] == configs["mirror"].disks[0]


terms = st.dictionaries(
    st.tuples(st.integers(0, 5), st.integers(0, 5)),
    st.builds(complex, st.floats(-5, 5), st.floats(-5, 5)),
    max_size=4,
)
labels = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in ("z", "zbar", "i", "pi", "rot", "disk", "w1", "w2", "frame")
)
angles = st.floats(-3.0, 3.0, allow_nan=False)
rotations = st.builds(
    lambda ij, a: Rotation(ij[0], ij[1], a),
    st.sampled_from([(i, j) for i in range(1, 5) for j in range(1, 5) if i != j]),
    angles,
)


@given(st.lists(st.tuples(labels, terms, terms, st.lists(rotations, max_size=2)), min_size=1, max_size=3, unique_by=lambda t: t[0]))
def test_format_then_parse_is_identity(items):
    disks = tuple(
        BranchedDisk(ZPolynomial.from_dict(a), ZPolynomial.from_dict(b), label, tuple(frame))
        for label, a, b, frame in items
    )
    config = SingularityConfig(disks, "random")
    parsed = parse_config(format_config(config), "random")
    assert parsed.disks == disks
