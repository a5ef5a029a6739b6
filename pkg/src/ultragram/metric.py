"""Finite metric spaces represented as dense distance matrices.

Covers file ingestion (CSV/JSON), metric and ultrametric validation,
the spectrum of distinct distance values, entrywise power transforms,
and a seeded generator of random ultrametric spaces.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputFormatError

# Absolute tolerance under which an asymmetric input pair is averaged
# instead of rejected.
SYMMETRY_ATOL = 1e-12

# Two distances count as "the same value" when they differ by at most
# this factor times the largest entry of the matrix.
DISTANCE_MATCH_RTOL = 1e-12


def _default_labels(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(n))


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """A finite metric space on labeled points, stored as a dense matrix.

    The constructor validates the structural invariants (square, finite,
    zero diagonal, exactly symmetric, positive off-diagonal) and freezes
    the underlying array. Loaders are responsible for symmetrizing noisy
    input before construction.
    """

    entries: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InputFormatError(f"distance matrix must be square, got shape {entries.shape}")
        n = entries.shape[0]
        if n < 1:
            raise InputFormatError("distance matrix must have at least one point")
        if not np.isfinite(entries).all():
            raise InputFormatError("distance matrix contains non-finite entries")
        if (entries < 0).any():
            i, j = np.argwhere(entries < 0)[0]
            raise InputFormatError(f"negative distance at ({i}, {j})")
        if (np.diag(entries) != 0).any():
            i = int(np.argwhere(np.diag(entries) != 0)[0][0])
            raise InputFormatError(f"nonzero diagonal entry at index {i}")
        if (entries != entries.T).any():
            i, j = np.argwhere(entries != entries.T)[0]
            raise InputFormatError(f"asymmetric entries at ({i}, {j}); symmetrize before constructing")
        off = ~np.eye(n, dtype=bool)
        if (entries[off] == 0).any():
            i, j = [(i, j) for i, j in np.argwhere(entries == 0) if i != j][0]
            raise InputFormatError(f"zero distance between distinct points ({i}, {j})")
        entries.setflags(write=False)
        labels = tuple(self.labels) if self.labels else _default_labels(n)
        if len(labels) != n:
            raise InputFormatError(f"{len(labels)} labels for {n} points")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "labels", labels)

    @property
    def n_points(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a metric or ultrametric check.

    ``violations`` holds one ``(i, j, k, kind)`` witness per failing
    triple, where ``kind`` is ``"triangle"`` or ``"strong_triangle"``.
    """

    is_metric: bool
    is_ultrametric: bool
    violations: tuple[tuple[int, int, int, str], ...]
    tolerance_used: float


@dataclass(frozen=True)
class DistanceSpectrum:
    """The distinct nonzero distances of a space, sorted ascending.

    ``multiplicity[k]`` counts the unordered point pairs realizing
    ``alphas[k]``.
    """

    alphas: tuple[float, ...]
    multiplicity: tuple[int, ...]

    @property
    def ell(self) -> int:
        return len(self.alphas)


def distance_tolerance(D: DistanceMatrix) -> float:
    """Absolute tolerance for comparing distance values of ``D``."""
    return DISTANCE_MATCH_RTOL * float(D.entries.max()) if D.n_points > 1 else 0.0


def _scan_triples(D: DistanceMatrix):
    """Collect triangle and strong-triangle violations over all triples."""
    M = D.entries
    n = D.n_points
    tol = distance_tolerance(D)
    triangle = []
    strong = []
    for k in range(n):
        col = M[:, k][:, None]
        row = M[k, :][None, :]
        tri_bad = M > col + row + tol
        str_bad = M > np.maximum(col, row) + tol
        for bad, out, kind in ((tri_bad, triangle, "triangle"), (str_bad, strong, "strong_triangle")):
            for i, j in np.argwhere(bad):
                if i < j and i != k and j != k:
                    out.append((int(i), int(j), int(k), kind))
    return triangle, strong, tol


def validate_metric(D: DistanceMatrix) -> ValidationReport:
    """Check the triangle inequality on every triple of points.

    The report also carries the ultrametric flag so callers get both
    answers from one scan; its witness list only contains plain
    triangle-inequality failures.
    """
    triangle, strong, tol = _scan_triples(D)
    return ValidationReport(
        is_metric=not triangle,
        is_ultrametric=not strong,
        violations=tuple(triangle),
        tolerance_used=tol,
    )


def validate_ultrametric(D: DistanceMatrix) -> ValidationReport:
    """Check the strong triangle inequality d(x,y) <= max(d(x,z), d(y,z))."""
    triangle, strong, tol = _scan_triples(D)
    return ValidationReport(
        is_metric=not triangle,
        is_ultrametric=not strong,
        violations=tuple(strong),
        tolerance_used=tol,
    )


def distinct_distances(D: DistanceMatrix) -> DistanceSpectrum:
    """Sorted distinct nonzero distances with pair multiplicities.

    Values closer than ``DISTANCE_MATCH_RTOL`` times the largest entry
    are merged into one group; the group's smallest member is reported.
    """
    n = D.n_points
    if n < 2:
        return DistanceSpectrum(alphas=(), multiplicity=())
    vals = np.sort(D.entries[np.triu_indices(n, k=1)], kind="stable")
    tol = distance_tolerance(D)
    alphas: list[float] = []
    counts: list[int] = []
    for v in vals:
        if alphas and v - alphas[-1] <= tol:
            counts[-1] += 1
        else:
            alphas.append(float(v))
            counts.append(1)
    return DistanceSpectrum(alphas=tuple(alphas), multiplicity=tuple(counts))


def power_transform(D: DistanceMatrix, p: float) -> DistanceMatrix:
    """Entrywise p-th power of the distances, with the convention 0**0 = 0.

    At p = 0 every off-diagonal entry becomes 1 (the discrete metric)
    while the diagonal stays 0. For p > 0 the transform preserves the
    ultrametric property since it is order-preserving.
    """
    if p < 0:
        raise ValueError(f"power transform requires p >= 0, got {p}")
    if p == 0:
        powered = (D.entries > 0).astype(float)
    else:
        powered = np.power(D.entries, p)
    return DistanceMatrix(powered, D.labels)


def generate_random_ultrametric(
    n_points: int,
    level_values,
    seed: int,
) -> DistanceMatrix:
    """Random ultrametric space, deterministic in ``seed``.

    Builds a random rooted hierarchy by recursive partition. The root
    takes the largest level value; every internal node picks a strictly
    smaller level for each child block, and the distance between two
    points is the level of their lowest common ancestor. Blocks that run
    out of levels become equilateral at the smallest level.
    """
    levels = [float(v) for v in level_values]
    if n_points < 3:
        raise ValueError(f"generator requires n_points >= 3, got {n_points}")
    if not levels:
        raise ValueError("at least one level value is required")
    if any(v <= 0 for v in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("level values must be strictly increasing and positive")

    rng = np.random.default_rng(seed)
    M = np.zeros((n_points, n_points))

    def split(members: np.ndarray, level_idx: int) -> None:
        if members.size <= 1:
            return
        value = levels[level_idx]
        if level_idx == 0:
            M[np.ix_(members, members)] = value
            M[members, members] = 0.0
            return
        k = int(rng.integers(2, members.size + 1))
        perm = rng.permutation(members)
        cuts = np.sort(rng.choice(np.arange(1, members.size), size=k - 1, replace=False))
        blocks = np.split(perm, cuts)
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                M[np.ix_(blocks[a], blocks[b])] = value
                M[np.ix_(blocks[b], blocks[a])] = value
        for block in blocks:
            if block.size > 1:
                split(block, int(rng.integers(0, level_idx)))

    split(np.arange(n_points), len(levels) - 1)
    return DistanceMatrix(M)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _read_text(source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _parse_csv(text: str):
    rows = [row for row in csv.reader(text.splitlines()) if row and any(c.strip() for c in row)]
    if not rows:
        raise InputFormatError("empty CSV input")
    labels = None
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        labels = [c.strip() for c in rows[0]]
        rows = rows[1:]
    matrix = []
    for r, row in enumerate(rows):
        try:
            matrix.append([float(c) for c in row])
        except ValueError as exc:
            raise InputFormatError(f"non-numeric value in CSV row {r}: {exc}") from None
    return matrix, labels


def _parse_json(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise InputFormatError('JSON input must be an object with a "matrix" key')
    labels = obj.get("labels")
    if labels is not None and not all(isinstance(x, str) for x in labels):
        raise InputFormatError("JSON labels must be strings")
    return obj["matrix"], labels


def load_distance_matrix(source, format: str = "csv") -> DistanceMatrix:
    """Parse a distance matrix from a path, byte string, or open stream.

    Rows must form a square numeric matrix. Asymmetries up to
    ``SYMMETRY_ATOL`` (absolute) are averaged away; anything larger is
    rejected, as are negative entries, a nonzero diagonal, and zero
    off-diagonal entries (duplicate points).
    """
    text = _read_text(source)
    if format == "csv":
        matrix, labels = _parse_csv(text)
    elif format == "json":
        matrix, labels = _parse_json(text)
    else:
        raise ValueError(f"unknown format {format!r}")

    try:
        M = np.array(matrix, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputFormatError(f"matrix rows do not form a rectangular numeric array: {exc}") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputFormatError(f"matrix must be square, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise InputFormatError("matrix contains non-finite entries")
    if (M < 0).any():
        i, j = np.argwhere(M < 0)[0]
        raise InputFormatError(f"negative distance at ({i}, {j})")
    if (np.diag(M) != 0).any():
        i = int(np.argwhere(np.diag(M) != 0)[0][0])
        raise InputFormatError(f"nonzero diagonal entry at index {i}")
    gap = np.abs(M - M.T).max() if M.size else 0.0
    if gap > SYMMETRY_ATOL:
        i, j = np.argwhere(np.abs(M - M.T) > SYMMETRY_ATOL)[0]
        raise InputFormatError(f"asymmetry {gap:g} at ({i}, {j}) exceeds tolerance {SYMMETRY_ATOL:g}")
    M = (M + M.T) / 2.0
    return DistanceMatrix(M, tuple(labels) if labels else ())


def matrix_to_csv(D: DistanceMatrix) -> str:
    """CSV text with a label header; floats at full round-trip precision."""
    lines = [",".join(D.labels)]
    for row in D.entries:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def matrix_to_json(D: DistanceMatrix) -> str:
    """JSON text that reloads bit-exactly (shortest round-trip floats)."""
    payload = {"labels": list(D.labels), "matrix": [[float(v) for v in row] for row in D.entries]}
    return json.dumps(payload) + "\n"


def save_distance_matrix(D: DistanceMatrix, target, format: str = "csv") -> None:
    """Write ``D`` to a path or text stream in the given format."""
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    text = matrix_to_csv(D) if format == "csv" else matrix_to_json(D)
    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)
