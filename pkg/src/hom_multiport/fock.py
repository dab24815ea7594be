"""Bosonic creation-operator polynomials over labelled optical modes.

States are written the way they appear on paper: ``a0*b0`` is one photon in
mode ``a0`` and one in ``b0``; ``0.5*f0**2`` is a two-photon amplitude in
``f0``.  A linear optical element acts by substituting each creation operator
with a linear combination of output operators (:func:`substitute`).  Fock-space
quantities (kets, norms, probabilities) carry the usual ``sqrt(prod n_i!)``
weight of a monomial.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from itertools import groupby
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from ._tolerances import EPS_NORM, EPS_ZERO

__all__ = [
    "ModeLabel",
    "CreationMonomial",
    "OperatorPolynomial",
    "FockKet",
    "FockAlgebraError",
    "DegenerateInputError",
    "InvalidMapError",
    "InhomogeneousStateError",
    "canonicalize",
    "creation",
    "substitute",
    "to_fock",
    "from_fock",
    "norm",
    "probability",
    "coincidence_probability",
    "fock_inner",
    "equal_up_to_global_phase",
    "canonical_phase",
    "occupation",
]

PORTS = "abcdef"
POLARIZATIONS = ("H", "V")
DIRECTIONS = ("", "L", "R")


class FockAlgebraError(ValueError):
    """Base class for invalid operations on operator polynomials."""


class DegenerateInputError(FockAlgebraError):
    pass


class InvalidMapError(FockAlgebraError):
    pass


class InhomogeneousStateError(FockAlgebraError):
    pass


_MODE_RE = re.compile(
    r"^(?P<port>[a-f])(?P<site>\d+)(?P<pol>[HV])?(?::(?P<dir>[LR]))?(?:@(?P<t>\d+))?$"
)


@dataclass(frozen=True, order=True)
class ModeLabel:
    """One optical mode.

    Field order defines the canonical total order used for monomials.
    ``direction`` is ``"R"``/``"L"`` for right/left moving amplitudes and
    ``""`` when no direction is attached.  ``time_bin`` is only meaningful for
    exit modes, where it stamps the step at which the amplitude left.
    """

    port: str
    site: int = 0
    polarization: str = "H"
    direction: str = ""
    time_bin: int = 0

    def __post_init__(self):
        if self.port not in PORTS or len(self.port) != 1:
            raise ValueError(f"unknown port {self.port!r}")
        if self.site < 0:
            raise ValueError("site must be non-negative")
        if self.polarization not in POLARIZATIONS:
            raise ValueError(f"unknown polarization {self.polarization!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.time_bin < 0:
            raise ValueError("time_bin must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "ModeLabel":
        """Parse ``"a0"``, ``"e1V"``, ``"f0H:L@2"`` style labels."""
        m = _MODE_RE.match(text.strip())
        if m is None:
            raise ValueError(f"cannot parse mode label {text!r}")
        return cls(
            port=m["port"],
            site=int(m["site"]),
            polarization=m["pol"] or "H",
            direction=m["dir"] or "",
            time_bin=int(m["t"] or 0),
        )

    def with_(self, **changes) -> "ModeLabel":
        return replace(self, **changes)

    def __str__(self) -> str:
        text = f"{self.port}{self.site}{self.polarization}"
        if self.direction:
            text += f":{self.direction}"
        if self.time_bin:
            text += f"@{self.time_bin}"
        return text


CreationMonomial = tuple  # canonically sorted tuple of ModeLabel


def canonicalize(modes: Iterable[ModeLabel]) -> CreationMonomial:
    """Sort a product of creation operators into canonical order.

    Raises:
        DegenerateInputError: for an empty product.
    """
    result = tuple(sorted(modes))
    if not result:
        raise DegenerateInputError("a creation monomial needs at least one mode")
    return result


def occupation(monomial: CreationMonomial) -> tuple[tuple[ModeLabel, int], ...]:
    """Photon count per distinct mode of a canonical monomial."""
    return tuple((m, len(list(g))) for m, g in groupby(monomial))


def _fock_weight(monomial: CreationMonomial) -> int:
    w = 1
    for _, n in occupation(monomial):
        w *= math.factorial(n)
    return w


Scalar = Union[int, float, complex]


class OperatorPolynomial:
    """Immutable complex-weighted sum of creation monomials.

    Supports ``+``, ``-``, ``*`` (by scalars and polynomials), ``/`` by a
    scalar and positive integer powers, so that paper expressions can be
    typed directly::

        a0, b0 = creation("a0"), creation("b0")
        state = -0.25 * (a0 - b0) ** 2
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Sequence[ModeLabel], Scalar] | None = None):
        acc: dict[CreationMonomial, complex] = {}
        if terms:
            for modes, coeff in terms.items():
                key = canonicalize(modes)
                acc[key] = acc.get(key, 0j) + complex(coeff)
        self._terms = MappingProxyType(_pruned(acc))

    @classmethod
    def _from_canonical(cls, terms: dict) -> "OperatorPolynomial":
        obj = cls.__new__(cls)
        obj._terms = MappingProxyType(_pruned(terms))
        return obj

    @classmethod
    def from_mode(cls, mode: ModeLabel, coefficient: Scalar = 1) -> "OperatorPolynomial":
        return cls._from_canonical({(mode,): complex(coefficient)})

    @property
    def terms(self) -> Mapping[CreationMonomial, complex]:
        return self._terms

    def items(self):
        return sorted(self._terms.items())

    def __iter__(self) -> Iterator[CreationMonomial]:
        return iter(sorted(self._terms))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def modes(self) -> tuple[ModeLabel, ...]:
        return tuple(sorted({m for mono in self._terms for m in mono}))

    @property
    def degrees(self) -> frozenset[int]:
        return frozenset(len(mono) for mono in self._terms)

    def is_homogeneous(self) -> bool:
        return len(self.degrees) <= 1

    @property
    def degree(self) -> int:
        """Common degree of all terms (0 for the zero polynomial)."""
        degs = self.degrees
        if len(degs) > 1:
            raise InhomogeneousStateError(f"mixed degrees {sorted(degs)}")
        return next(iter(degs), 0)

    def map_modes(self, fn: Callable[[ModeLabel], ModeLabel]) -> "OperatorPolynomial":
        """Relabel every mode; terms that collide are summed."""
        acc: dict[CreationMonomial, complex] = {}
        for mono, c in self._terms.items():
            key = tuple(sorted(fn(m) for m in mono))
            acc[key] = acc.get(key, 0j) + c
        return OperatorPolynomial._from_canonical(acc)

    def filter(self, keep: Callable[[CreationMonomial], bool]) -> "OperatorPolynomial":
        return OperatorPolynomial._from_canonical(
            {k: c for k, c in self._terms.items() if keep(k)}
        )

    # arithmetic

    def __add__(self, other):
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0j) + c
        return OperatorPolynomial._from_canonical(acc)

    def __neg__(self):
        return OperatorPolynomial._from_canonical({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, OperatorPolynomial):
            acc: dict[CreationMonomial, complex] = {}
            for k1, c1 in self._terms.items():
                for k2, c2 in other._terms.items():
                    key = tuple(sorted(k1 + k2))
                    acc[key] = acc.get(key, 0j) + c1 * c2
            return OperatorPolynomial._from_canonical(acc)
        if isinstance(other, (int, float, complex)):
            z = complex(other)
            return OperatorPolynomial._from_canonical({k: z * c for k, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * (1 / complex(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 1:
            raise ValueError("only positive integer powers are supported")
        result = self
        for _ in range(n - 1):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    __hash__ = None

    def isclose(self, other: "OperatorPolynomial", tol: float = EPS_NORM) -> bool:
        """True when the coefficient-wise difference has max modulus <= tol."""
        diff = self - other
        return all(abs(c) <= tol for c in diff._terms.values())

    def __repr__(self) -> str:
        return f"OperatorPolynomial({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.items():
            factors = "*".join(
                str(m) if n == 1 else f"{m}^{n}" for m, n in occupation(mono)
            )
            parts.append(f"({_fmt_complex(c)})*{factors}")
        return " + ".join(parts)


def _pruned(terms: dict) -> dict:
    return {k: c for k, c in terms.items() if abs(c) >= EPS_ZERO}


def _fmt_complex(z: complex) -> str:
    re_, im = float(f"{z.real:.12g}"), float(f"{z.imag:.12g}")
    if im == 0:
        return f"{re_ + 0.0:.12g}"
    return f"{re_ + 0.0:.12g}{im + 0.0:+.12g}j"


def creation(mode: Union[str, ModeLabel], coefficient: Scalar = 1) -> OperatorPolynomial:
    """Degree-1 polynomial for a single creation operator."""
    if isinstance(mode, str):
        mode = ModeLabel.parse(mode)
    return OperatorPolynomial.from_mode(mode, coefficient)


def substitute(
    poly: OperatorPolynomial,
    mode_map: Mapping[ModeLabel, OperatorPolynomial],
) -> OperatorPolynomial:
    """Apply a linear mode transformation to every creation operator.

    Modes missing from ``mode_map`` pass through unchanged.  Because creation
    operators commute, the result is the product of the images expanded and
    collected, so the degree of every term is preserved.

    Raises:
        InvalidMapError: if an image is not a homogeneous degree-1 polynomial.
    """
    for mode, image in mode_map.items():
        if image and image.degrees != frozenset({1}):
            raise InvalidMapError(f"image of {mode} has degree {sorted(image.degrees)}, expected 1")

    images = {m: tuple(((k[0], c) for k, c in img.terms.items())) for m, img in mode_map.items()}
    acc: dict[CreationMonomial, complex] = {}
    for mono, coeff in poly.terms.items():
        partial: dict[tuple, complex] = {(): coeff}
        for factor in mono:
            image = images.get(factor)
            if image is None:
                partial = {k + (factor,): c for k, c in partial.items()}
                continue
            nxt: dict[tuple, complex] = {}
            for k, c in partial.items():
                for out, w in image:
                    key = k + (out,)
                    nxt[key] = nxt.get(key, 0j) + c * w
            partial = nxt
        for k, c in partial.items():
            key = tuple(sorted(k))
            acc[key] = acc.get(key, 0j) + c
    return OperatorPolynomial._from_canonical(acc)


@dataclass(frozen=True)
class FockKet:
    """A photon-number basis state with its amplitude."""

    occupation: tuple[tuple[ModeLabel, int], ...]
    amplitude: complex

    @property
    def probability(self) -> float:
        return abs(self.amplitude) ** 2

    @property
    def photon_number(self) -> int:
        return sum(n for _, n in self.occupation)

    @property
    def monomial(self) -> CreationMonomial:
        return tuple(m for m, n in self.occupation for _ in range(n))

    @property
    def label(self) -> str:
        return "|" + " ".join(str(m) if n == 1 else f"{m}^{n}" for m, n in self.occupation) + ">"


def _require_homogeneous(poly: OperatorPolynomial) -> None:
    if not poly.is_homogeneous():
        raise InhomogeneousStateError(
            f"state mixes photon numbers {sorted(poly.degrees)}"
        )


def to_fock(poly: OperatorPolynomial) -> list[FockKet]:
    """Expand a homogeneous polynomial into normalized-basis Fock kets.

    The ket amplitude of a monomial with occupations ``n_i`` is its coefficient
    times ``sqrt(prod n_i!)``.
    """
    _require_homogeneous(poly)
    return [
        FockKet(occupation(mono), c * math.sqrt(_fock_weight(mono)))
        for mono, c in poly.items()
    ]


def from_fock(kets: Iterable[FockKet]) -> OperatorPolynomial:
    """Inverse of :func:`to_fock`."""
    acc = {}
    for ket in kets:
        mono = ket.monomial
        acc[mono] = acc.get(mono, 0j) + ket.amplitude / math.sqrt(_fock_weight(mono))
    return OperatorPolynomial(acc)


def fock_inner(p: OperatorPolynomial, q: OperatorPolynomial) -> complex:
    """Fock-space inner product <p|q> (antilinear in ``p``)."""
    small, big = (p, q) if len(p) <= len(q) else (q, p)
    total = 0j
    for mono, c in small.terms.items():
        other = big.terms.get(mono)
        if other is not None:
            cp, cq = (c, other) if small is p else (other, c)
            total += cp.conjugate() * cq * _fock_weight(mono)
    return total


def norm(poly: OperatorPolynomial) -> float:
    _require_homogeneous(poly)
    return math.sqrt(sum(abs(c) ** 2 * _fock_weight(m) for m, c in poly.terms.items()))


def probability(
    poly: OperatorPolynomial,
    pattern: Union[Mapping[ModeLabel, int], Sequence[ModeLabel]],
) -> float:
    """Probability of one occupation pattern, normalized by the state norm.

    ``pattern`` is either a ``{mode: count}`` mapping or a list of modes with
    repetition (a monomial).
    """
    if isinstance(pattern, Mapping):
        modes = [m for m, n in pattern.items() for _ in range(n)]
    else:
        modes = list(pattern)
    mono = canonicalize(modes)
    total = norm(poly)
    if total == 0:
        raise DegenerateInputError("probability of the zero state is undefined")
    c = poly.terms.get(mono, 0j)
    return abs(c) ** 2 * _fock_weight(mono) / total**2


def coincidence_probability(poly: OperatorPolynomial, mode_a: ModeLabel, mode_b: ModeLabel) -> float:
    """Probability that one photon is found in ``mode_a`` and one in ``mode_b``."""
    if poly and poly.degree != 2:
        raise FockAlgebraError(f"coincidence needs a two-photon state, got degree {poly.degree}")
    if mode_a == mode_b:
        raise FockAlgebraError("coincidence needs two distinct modes")
    return probability(poly, (mode_a, mode_b))


def canonical_phase(poly: OperatorPolynomial) -> OperatorPolynomial:
    """Rotate so that the first term (canonical order) is positive real."""
    if not poly:
        return poly
    first = poly.items()[0][1]
    return poly * (abs(first) / first)


def equal_up_to_global_phase(
    p: OperatorPolynomial, q: OperatorPolynomial, tol: float = EPS_NORM
) -> bool:
    """True when ``q == exp(i theta) p`` for some theta, within ``tol`` in Fock norm."""
    if not p and not q:
        return True
    overlap = fock_inner(p, q)
    if abs(overlap) == 0:
        return False
    phase = overlap / abs(overlap)
    diff = q - p * phase
    return math.sqrt(sum(abs(c) ** 2 * _fock_weight(m) for m, c in diff.terms.items())) <= tol

