"""Singularity configurations: the ``.sing`` DSL, disk validation and
Micallef-White classification.

A configuration is a list of branched disks ``f = (w1, w2)`` meeting at the
origin of C^2 = R^4. Each disk is written in its normal chart, where the
lowest part of the map is ``(z^N, 0)``; an optional ``frame`` clause rotates
the image rigidly so that several disks can meet transversally::

    # transverse pair
    disk a { w1 = z; w2 = 0; }
    disk b { w1 = z; w2 = 0; frame = rot(1,3,pi/3) * rot(2,4,pi/3); }
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np
from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from singlink.common import InputError
from singlink.zpoly import ZPolynomial

logger = logging.getLogger(__name__)


class DslSyntaxError(InputError):
    """The text does not follow the .sing grammar"""

    def __init__(self, line: int, col: int, expected: str, found: str):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        self.source: str | None = None
        super().__init__(line, col, expected, found)

    def __str__(self):
        where = f"line {self.line}, col {self.col}"
        if self.source:
            where = f"{self.source}: {where}"
        return f"{where}: expected {self.expected}, found {self.found}"


class DuplicateLabel(InputError):
    """Two disks share a label"""


class EmptyConfig(InputError):
    """The configuration contains no disk"""


class DuplicateDisk(InputError):
    """Two disks define the same map"""


class NotNormalForm(InputError):
    """The disk is not written in its normal chart"""


class NotThroughOrigin(InputError):
    """The disk does not pass through the singular point"""


class NotMW(InputError):
    """The disk is not in Micallef-White form"""

    def __init__(self, label: str, reason: str):
        self.label = label
        self.reason = reason
        super().__init__(f"disk {label}: {reason}")


class Rotation(NamedTuple):
    """Rotation by ``angle`` in the (x_i, x_j) coordinate plane, 1-based."""

    i: int
    j: int
    angle: float

    def matrix(self) -> np.ndarray:
        return givens(self.i - 1, self.j - 1, self.angle)


def givens(a: int, b: int, angle: float) -> np.ndarray:
    """4x4 rotation sending e_a towards e_b by ``angle``."""
    g = np.eye(4)
    c, s = math.cos(angle), math.sin(angle)
    g[a, a] = c
    g[a, b] = -s
    g[b, a] = s
    g[b, b] = c
    return g


@dataclass(frozen=True)
class BranchedDisk:
    w1: ZPolynomial
    w2: ZPolynomial
    label: str = "disk"
    frame: tuple[Rotation, ...] = ()
    line: int = field(default=0, compare=False)

    @cached_property
    def frame_matrix(self) -> np.ndarray:
        return reduce(np.matmul, (r.matrix() for r in self.frame), np.eye(4))

    @cached_property
    def _partials(self) -> tuple[ZPolynomial, ZPolynomial, ZPolynomial, ZPolynomial]:
        return (
            self.w1.wirtinger("dz"),
            self.w1.wirtinger("dzbar"),
            self.w2.wirtinger("dz"),
            self.w2.wirtinger("dzbar"),
        )

    def same_map(self, other: BranchedDisk) -> bool:
        return (self.w1, self.w2) == (other.w1, other.w2) and np.allclose(
            self.frame_matrix, other.frame_matrix, rtol=0, atol=1e-14
        )

    def complex_values(self, z):
        return self.w1(z), self.w2(z)

    def wirtinger_values(self, z):
        """(w1_z, w1_zbar, w2_z, w2_zbar) at z."""
        return tuple(p(z) for p in self._partials)

    def to_real(self, a, b) -> np.ndarray:
        raw = np.stack([np.real(a), np.imag(a), np.real(b), np.imag(b)], axis=-1)
        if self.frame:
            return raw @ self.frame_matrix.T
        return raw

    def point(self, z) -> np.ndarray:
        """Image f(z) in R^4 (frame applied); shape (..., 4)."""
        return self.to_real(*self.complex_values(z))

    def derivatives(self, z) -> tuple[np.ndarray, np.ndarray]:
        """(df/dx, df/dy) at z in R^4, frame applied."""
        a, b, c, d = self.wirtinger_values(z)
        dx = self.to_real(a + b, c + d)
        dy = self.to_real(1j * (a - b), 1j * (c - d))
        return dx, dy

    def tangent_plane_at_origin(self) -> np.ndarray:
        """Orthogonal projector onto R * span(e1, e2)."""
        basis = self.frame_matrix[:, :2]
        return basis @ basis.T

    def mirrored(self) -> BranchedDisk:
        """The disk composed with x4 -> -x4."""
        frame = tuple(
            Rotation(r.i, r.j, -r.angle) if (r.i == 4) != (r.j == 4) else r
            for r in self.frame
        )
        return BranchedDisk(self.w1, self.w2.conj_poly(), self.label, frame, self.line)


@dataclass(frozen=True)
class SingularityConfig:
    disks: tuple[BranchedDisk, ...]
    name: str = "<string>"

    def __len__(self):
        return len(self.disks)

    def __iter__(self) -> Iterator[BranchedDisk]:
        return iter(self.disks)

    @property
    def labels(self) -> list[str]:
        return [d.label for d in self.disks]

    def mirrored(self) -> SingularityConfig:
        return SingularityConfig(tuple(d.mirrored() for d in self.disks), f"{self.name}-mirror")


class DiskClassification(NamedTuple):
    N: int
    branching_order: int


class StageKind(enum.Enum):
    HOLO = "holo"
    ANTIHOLO = "antiholo"


class MWStage(NamedTuple):
    mu: int
    coeff: complex
    kind: StageKind


@dataclass(frozen=True)
class MWForm:
    N: int
    stages: tuple[MWStage, ...]

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(s.mu for s in self.stages)

    @property
    def P(self) -> ZPolynomial:
        return ZPolynomial(
            tuple(
                (s.mu, 0, s.coeff) if s.kind is StageKind.HOLO else (0, s.mu, s.coeff)
                for s in self.stages
            )
        )

    def disk(self, label: str = "mw") -> BranchedDisk:
        return BranchedDisk(ZPolynomial.monomial(self.N), self.P, label)


# grammar

_GRAMMAR = r"""
start: disk*

disk: "disk" IDENT "{" "w1" "=" poly ";" "w2" "=" poly ";" ["frame" "=" frame ";"] "}"

poly: [SIGN] term (SIGN term)*

term: coefficient "*" monomial -> scaled
    | coefficient              -> constant
    | monomial                 -> unit

coefficient: NUMBER                                -> real
           | "i"                                   -> imaginary_unit
           | "(" [SIGN] NUMBER SIGN NUMBER "i" ")" -> complex_number

monomial: factor ("*" factor)*

factor: "z" ["^" NUMBER]    -> z_factor
      | "zbar" ["^" NUMBER] -> zbar_factor

frame: rotation ("*" rotation)*

rotation: "rot" "(" NUMBER "," NUMBER "," angle ")"

angle: [SIGN] magnitude ["/" NUMBER]

magnitude: "pi"            -> whole_pi
         | NUMBER          -> plain_angle
         | NUMBER "*" "pi" -> pi_multiple

SIGN: /[+-]/
NUMBER: /\d+(\.\d*)?([eE][+-]?\d+)?/
IDENT: /[A-Za-z_][A-Za-z0-9_]*/
COMMENT: /#[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_PARSER = Lark(_GRAMMAR, parser="lalr", propagate_positions=True)

_IGNORED = {"WS", "COMMENT"}
_TERMINAL_TEXT = {
    "$END": ["end of input"],
    "<END-OF-FILE>": ["end of input"],
    "IDENT": ["an identifier"],
    "NUMBER": ["a number"],
    "SIGN": ["'+'", "'-'"],
}


def _describe_terminal(name: str) -> list[str]:
    if name in _TERMINAL_TEXT:
        return _TERMINAL_TEXT[name]
    try:
        pattern = _PARSER.get_terminal(name).pattern
    except KeyError:
        return [name.lower()]
    return [repr(pattern.value)] if pattern.type == "str" else [name.lower()]


def _expected_text(names) -> str:
    items = sorted({text for n in names if n not in _IGNORED for text in _describe_terminal(n)})
    if len(items) <= 1:
        return items[0] if items else "nothing"
    return f"{', '.join(items[:-1])} or {items[-1]}"


def _end_of_input(text: str) -> tuple[int, int]:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def _syntax_error(e: UnexpectedInput, text: str) -> DslSyntaxError:
    if isinstance(e, UnexpectedToken):
        if e.token.type == "$END":
            line, col = _end_of_input(text)
            return DslSyntaxError(line, col, _expected_text(e.expected), "end of input")
        return DslSyntaxError(e.line, e.column, _expected_text(e.expected), repr(str(e.token)))
    if isinstance(e, UnexpectedCharacters):
        return DslSyntaxError(e.line, e.column, _expected_text(e.allowed or ()), repr(e.char))
    line, col = _end_of_input(text)
    return DslSyntaxError(line, col, _expected_text(getattr(e, "expected", ())), "end of input")


def _integer(tok: Token) -> int:
    if not tok.isdigit():
        raise DslSyntaxError(tok.line, tok.column, "an integer", repr(str(tok)))
    return int(tok)


def _real(tok: Token) -> float:
    value = float(tok)
    if not math.isfinite(value):
        raise DslSyntaxError(tok.line, tok.column, "a finite number", repr(str(tok)))
    return value


def _signed(sign: Token | None, value):
    return -value if sign == "-" else value


class _DiskBuilder(Transformer):
    """Turns a .sing parse tree into BranchedDisk values."""

    def start(self, disks):
        return disks

    @v_args(meta=True)
    def disk(self, meta, children):
        label, w1, w2, frame = children
        return BranchedDisk(w1, w2, str(label), frame or (), meta.line)

    @v_args(meta=True)
    def poly(self, meta, children):
        lead, first, *rest = children
        acc = _signed(lead, first)
        for op, term in zip(rest[::2], rest[1::2]):
            acc = acc - term if op == "-" else acc + term
        if not all(cmath.isfinite(c) for _, _, c in acc.terms):
            raise DslSyntaxError(meta.line, meta.column, "finite coefficients", "an overflowing sum")
        return acc

    def scaled(self, children):
        coef, (j, k) = children
        return ZPolynomial.monomial(j, k, coef)

    def constant(self, children):
        return ZPolynomial.monomial(0, 0, children[0])

    def unit(self, children):
        j, k = children[0]
        return ZPolynomial.monomial(j, k)

    def real(self, children):
        return complex(_real(children[0]))

    def imaginary_unit(self, children):
        return 1j

    def complex_number(self, children):
        sign, re_part, im_sign, im_part = children
        return complex(_signed(sign, _real(re_part)), _signed(im_sign, _real(im_part)))

    def monomial(self, factors):
        return sum(j for j, _ in factors), sum(k for _, k in factors)

    def z_factor(self, children):
        power = children[0]
        return (1 if power is None else _integer(power)), 0

    def zbar_factor(self, children):
        power = children[0]
        return 0, (1 if power is None else _integer(power))

    def frame(self, rotations):
        return tuple(rotations)

    @v_args(meta=True)
    def rotation(self, meta, children):
        i_tok, j_tok, angle = children
        i, j = _integer(i_tok), _integer(j_tok)
        if not (1 <= i <= 4 and 1 <= j <= 4) or i == j:
            raise DslSyntaxError(meta.line, meta.column, "two distinct axes in 1..4", f"rot({i},{j},...)")
        return Rotation(i, j, angle)

    @v_args(meta=True)
    def angle(self, meta, children):
        sign, value, divisor = children
        if divisor is not None:
            k = _integer(divisor)
            if k == 0:
                raise DslSyntaxError(divisor.line, divisor.column, "a nonzero divisor", repr(str(divisor)))
            value /= k
        if not math.isfinite(value):
            raise DslSyntaxError(meta.line, meta.column, "a finite angle", "an overflowing angle")
        return _signed(sign, value)

    def whole_pi(self, children):
        return math.pi

    def plain_angle(self, children):
        return _real(children[0])

    def pi_multiple(self, children):
        return _real(children[0]) * math.pi


def parse_config(text: str, name: str = "<string>") -> SingularityConfig:
    try:
        disks = _DiskBuilder().transform(_PARSER.parse(text))
    except UnexpectedInput as e:
        raise _syntax_error(e, text) from None
    except VisitError as e:
        raise e.orig_exc from None
    seen: dict[str, int] = {}
    for d in disks:
        if d.label in seen:
            raise DuplicateLabel(f"disk label {d.label!r} on line {d.line} already used on line {seen[d.label]}")
        seen[d.label] = d.line
    if not disks:
        raise EmptyConfig(f"{name}: no disk defined")
    return SingularityConfig(tuple(disks), name)


def load_config(path: str | Path) -> SingularityConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from e
    try:
        return parse_config(text, path.stem)
    except DslSyntaxError as e:
        e.source = path.name
        raise


def format_config(config: SingularityConfig) -> str:
    """Render a configuration as .sing text that parses back to it."""
    blocks = []
    for d in config.disks:
        lines = [f"disk {d.label} {{", f"    w1 = {d.w1};", f"    w2 = {d.w2};"]
        if d.frame:
            rots = " * ".join(f"rot({r.i},{r.j},{r.angle!r})" for r in d.frame)
            lines.append(f"    frame = {rots};")
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# validation


def validate_disk(d: BranchedDisk) -> DiskClassification:
    if d.w1.coefficient(0, 0) != 0 or d.w2.coefficient(0, 0) != 0:
        raise NotThroughOrigin(f"disk {d.label}: constant term present, f(0) != 0")
    if d.w1.is_zero():
        raise NotNormalForm(f"disk {d.label}: w1 vanishes identically")
    N, leading = d.w1.lowest_order()
    (j, k, c), *rest = leading.terms
    if rest or k != 0 or c.imag != 0 or c.real <= 0:
        raise NotNormalForm(
            f"disk {d.label}: lowest part of w1 is {leading}, not a positive multiple of z^{N}"
        )
    low = d.w2.truncated(N)
    if not low.is_zero():
        raise NotNormalForm(
            f"disk {d.label}: w2 has terms of order <= {N}: {low}"
        )
    return DiskClassification(N, N - 1)


def validate_config(config: SingularityConfig) -> list[DiskClassification]:
    """Validate every disk and check the disks are pairwise distinct."""
    if not config.disks:
        raise EmptyConfig(f"{config.name}: no disk defined")
    classes = [validate_disk(d) for d in config.disks]
    for n, a in enumerate(config.disks):
        for b in config.disks[n + 1 :]:
            if a.same_map(b):
                raise DuplicateDisk(f"disks {a.label} and {b.label} define the same map")
            if np.allclose(a.tangent_plane_at_origin(), b.tangent_plane_at_origin(), atol=1e-12):
                logger.warning(
                    f"disks {a.label} and {b.label} share their tangent plane at the origin; "
                    "isolatedness of the singular point is assumed"
                )
    return classes


def mw_classify(d: BranchedDisk) -> MWForm:
    """Read (z^N, sum a_j z^mu_j + b_j zbar^mu_j) off a disk."""
    N = validate_disk(d).N
    if d.frame:
        raise NotMW(d.label, "disk carries a frame")
    if d.w1 != ZPolynomial.monomial(N):
        raise NotMW(d.label, f"w1 = {d.w1} is not exactly z^{N}")
    by_mu: dict[int, MWStage] = {}
    for j, k, c in d.w2.terms:
        if j and k:
            raise NotMW(d.label, f"mixed monomial z^{j}*zbar^{k} in w2")
        mu = j or k
        kind = StageKind.HOLO if j else StageKind.ANTIHOLO
        if mu in by_mu:
            raise NotMW(d.label, f"both z^{mu} and zbar^{mu} present")
        by_mu[mu] = MWStage(mu, c, kind)
    stages = tuple(by_mu[mu] for mu in sorted(by_mu))
    if stages and stages[0].mu <= N:
        raise NotMW(d.label, f"lowest exponent {stages[0].mu} is not above N = {N}")
    if math.gcd(N, *(s.mu for s in stages)) != 1:
        raise NotMW(d.label, "exponents of N and w2 are not coprime")
    return MWForm(N, stages)
