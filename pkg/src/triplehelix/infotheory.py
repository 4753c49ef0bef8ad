"""Entropy, transmission and expected-information measures.

Everything is computed in bits (log base 2). Three-dimensional transmission
and expected information are reported in millibits, i.e. 1000 x bits.
Counts are treated as the population: no bias correction is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, HelixError, InvalidDistributionError

#: Tolerance on the unit sum of a probability vector.
SUM_TOL = 1e-9
#: Maximum allowed disagreement between the two forms of T(xyz), in bits.
DUAL_FORM_TOL = 1e-9
#: Default additive smoothing for expected_info when enabled.
DEFAULT_ALPHA = 0.5

MILLIBITS_PER_BIT = 1000.0


def to_millibits(bits: float) -> float:
    return bits * MILLIBITS_PER_BIT


def _as_probs(p, name="distribution") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.size == 0:
        raise InvalidDistributionError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistributionError(f"{name} contains non-finite values")
    if np.any(arr < 0):
        raise InvalidDistributionError(f"{name} has negative entries")
    total = math.fsum(arr.ravel())
    if abs(total - 1.0) > SUM_TOL:
        raise InvalidDistributionError(f"{name} sums to {total!r}, not 1")
    return arr


def normalize(counts) -> np.ndarray:
    """Turn a non-negative count array into probabilities of the same shape."""
    arr = np.asarray(counts, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InvalidDistributionError("counts must be finite and non-negative")
    total = math.fsum(arr.ravel())
    if total <= 0:
        raise InvalidDistributionError("counts sum to zero")
    return arr / total


def _h(probs: np.ndarray) -> float:
    # 0 log 0 == 0; compensated summation since cells span several magnitudes
    p = probs[probs > 0]
    return max(0.0, -math.fsum(p * np.log2(p)))


def entropy(d) -> float:
    """Shannon entropy H = -sum p log2 p of a distribution, in bits.

    Accepts any array shape; the array is treated as one joint distribution.

    >>> entropy([0.5, 0.5])
    1.0
    """
    return _h(_as_probs(d).ravel())


def conditional_entropy(j) -> float:
    """H(X|Y) = H(XY) - H(Y) for a joint matrix with X on rows, Y on columns."""
    arr = _as_probs(j, "joint")
    if arr.ndim != 2:
        raise InvalidDistributionError("joint must be a 2-D matrix")
    h = _h(arr.ravel()) - _h(arr.sum(axis=0))
    return max(0.0, h)


def transmission2(j) -> float:
    """Mutual information T(XY) = H(X) + H(Y) - H(XY) in bits, clamped at 0."""
    arr = _as_probs(j, "joint")
    if arr.ndim != 2:
        raise InvalidDistributionError("joint must be a 2-D matrix")
    t = _h(arr.sum(axis=1)) + _h(arr.sum(axis=0)) - _h(arr.ravel())
    # rounding can leave about -1e-16 for independent joints
    return max(0.0, t)


@dataclass(frozen=True)
class ContingencyCube:
    """2x2x2 counts indexed ``counts[u, i, g]`` by sector presence (0/1)."""

    counts: np.ndarray
    n: float = field(init=False)

    def __post_init__(self):
        arr = np.array(self.counts, dtype=float)
        if arr.shape != (2, 2, 2):
            raise ValueError(f"cube must be 2x2x2, got shape {arr.shape}")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("cube counts must be finite and non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "n", math.fsum(arr.ravel()))

    @classmethod
    def from_cells(cls, cells: dict) -> "ContingencyCube":
        """Build from a mapping ``(u, i, g) -> count``; missing cells are 0."""
        arr = np.zeros((2, 2, 2))
        for (u, i, g), c in cells.items():
            arr[int(u), int(i), int(g)] = c
        return cls(arr)

    def __getitem__(self, cell):
        return self.counts[cell]

    def scaled(self, k) -> "ContingencyCube":
        return ContingencyCube(self.counts * k)


@dataclass(frozen=True)
class TransmissionReport:
    h_u: float
    h_i: float
    h_g: float
    h_ui: float
    h_ug: float
    h_ig: float
    h_uig: float
    t_ui: float
    t_ug: float
    t_ig: float
    t_uig_mbits: float
    n: float

    @property
    def t_uig(self) -> float:
        """Three-dimensional transmission in bits."""
        return self.t_uig_mbits / MILLIBITS_PER_BIT


def _transmission3_ratio_form(p: np.ndarray) -> float:
    # sum P(xyz) log{[P(xy) P(xz) P(yz)] / [P(x) P(y) P(z) P(xyz)]}
    p_xy = p.sum(axis=2)
    p_xz = p.sum(axis=1)
    p_yz = p.sum(axis=0)
    p_x = p.sum(axis=(1, 2))
    p_y = p.sum(axis=(0, 2))
    p_z = p.sum(axis=(0, 1))
    terms = []
    for x, y, z in zip(*np.nonzero(p > 0)):
        ratio = (p_xy[x, y] * p_xz[x, z] * p_yz[y, z]) / (
            p_x[x] * p_y[y] * p_z[z] * p[x, y, z]
        )
        terms.append(p[x, y, z] * math.log2(ratio))
    return math.fsum(terms)


def transmission3(cube: ContingencyCube) -> TransmissionReport:
    """Signed three-dimensional transmission of a contingency cube.

    All seven entropies are computed from the cell frequencies ``counts / n``.
    T(uig) is taken from the entropy identity

        T = H(u) + H(i) + H(g) - H(ui) - H(ug) - H(ig) + H(uig)

    and cross-checked against the probability-ratio form; the two must
    agree within ``DUAL_FORM_TOL`` bits. T may be negative.

    Raises
    ------
    HelixError
        If the cube is empty (n = 0).
    ArithmeticError
        If the two formulations disagree.
    """
    if not isinstance(cube, ContingencyCube):
        cube = ContingencyCube(cube)
    if cube.n <= 0:
        raise HelixError("transmission3 needs a cube with n >= 1")
    p = cube.counts / cube.n

    h_u = _h(p.sum(axis=(1, 2)))
    h_i = _h(p.sum(axis=(0, 2)))
    h_g = _h(p.sum(axis=(0, 1)))
    h_ui = _h(p.sum(axis=2).ravel())
    h_ug = _h(p.sum(axis=1).ravel())
    h_ig = _h(p.sum(axis=0).ravel())
    h_uig = _h(p.ravel())

    t_bits = math.fsum([h_u, h_i, h_g, -h_ui, -h_ug, -h_ig, h_uig])
    t_ratio = _transmission3_ratio_form(p)
    if abs(t_bits - t_ratio) > DUAL_FORM_TOL:
        raise ArithmeticError(
            f"transmission forms disagree: {t_bits!r} vs {t_ratio!r} bits"
        )

    return TransmissionReport(
        h_u=h_u,
        h_i=h_i,
        h_g=h_g,
        h_ui=h_ui,
        h_ug=h_ug,
        h_ig=h_ig,
        h_uig=h_uig,
        t_ui=max(0.0, h_u + h_i - h_ui),
        t_ug=max(0.0, h_u + h_g - h_ug),
        t_ig=max(0.0, h_i + h_g - h_ig),
        t_uig_mbits=to_millibits(t_bits),
        n=cube.n,
    )


def expected_info(observed, predicted, alpha: float | None = None) -> float:
    """Expected information of the message, ``1000 * sum q log2(q / p)``.

    ``observed`` (q) is what arrived, ``predicted`` (p) what was forecast.
    The value is 0 for a perfect prediction and grows as the prediction
    worsens.

    Parameters
    ----------
    observed, predicted : array_like
        Probability vectors over the same support. When ``alpha`` is given
        they are instead read as non-negative counts: ``alpha`` is added to
        every cell of both before normalization.
    alpha : float, optional
        Additive smoothing. Without it, observed mass on a cell with zero
        predicted probability raises :class:`DivergenceError`.

    Returns
    -------
    float
        Millibits, always >= 0.
    """
    if alpha is not None:
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        q = normalize(np.asarray(observed, dtype=float) + alpha)
        p = normalize(np.asarray(predicted, dtype=float) + alpha)
    else:
        q = _as_probs(observed, "observed").ravel()
        p = _as_probs(predicted, "predicted").ravel()
    q = q.ravel()
    p = p.ravel()
    if q.shape != p.shape:
        raise InvalidDistributionError(
            f"support mismatch: observed has {q.size} cells, predicted {p.size}"
        )
    mask = q > 0
    if np.any(p[mask] == 0):
        bad = [int(k) for k in np.nonzero(mask & (p == 0))[0]]
        raise DivergenceError(
            f"observed mass on zero-probability predicted cells {bad}; enable smoothing"
        )
    terms = q[mask] * np.log2(q[mask] / p[mask])
    return max(0.0, to_millibits(math.fsum(terms)))
