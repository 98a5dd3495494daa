"""Discrete-attribute datasets and their empirical distributions.

Tables of categorical columns are the input to every analysis in the
package: CSV ingestion, equal-width binning of numeric columns,
replication-based expansion, and empirical joint/conditional tables.
All types are immutable after construction and all operations are pure.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, InputError

#: Tolerance used when checking that probability tables are normalized.
PROB_TOL = 1e-9


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct category labels with a stable label->index map."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise InputError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise InputError("alphabet contains duplicate symbols")

    @property
    def size(self) -> int:
        return len(self.symbols)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise InputError(f"symbol {symbol!r} not in alphabet") from None


def _locked(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """N records of per-attribute symbol indices plus the attribute schema."""

    schema: tuple[tuple[str, Alphabet], ...]
    records: np.ndarray  # shape (N, n_attributes), integer indices

    def __post_init__(self):
        rec = np.asarray(self.records, dtype=np.int64)
        if rec.ndim != 2:
            raise InputError("records must be a 2-d array of symbol indices")
        if rec.shape[1] != len(self.schema):
            raise DimensionMismatchError(
                f"records have {rec.shape[1]} columns, schema has {len(self.schema)}"
            )
        for j, (name, alphabet) in enumerate(self.schema):
            col = rec[:, j]
            if col.size and (col.min() < 0 or col.max() >= alphabet.size):
                raise InputError(f"column {name!r} has indices outside its alphabet")
        object.__setattr__(self, "records", _locked(rec))

    @property
    def n_records(self) -> int:
        return self.records.shape[0]

    @property
    def n_attributes(self) -> int:
        return len(self.schema)

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.schema)

    def alphabet(self, i: int) -> Alphabet:
        return self.schema[i][1]

    def column(self, i: int) -> np.ndarray:
        return self.records[:, i]

    def attribute_index(self, name: str) -> int:
        try:
            return self.attribute_names.index(name)
        except ValueError:
            raise InputError(f"no attribute named {name!r}") from None


@dataclass(frozen=True)
class JointDistribution:
    """Empirical joint table of two attributes; entries sum to one."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    matrix: np.ndarray  # shape (m, t), nonnegative, sums to 1

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.shape != (len(self.row_labels), len(self.col_labels)):
            raise DimensionMismatchError("joint matrix shape does not match labels")
        if (mat < 0).any():
            raise InputError("joint probabilities must be nonnegative")
        if abs(mat.sum() - 1.0) > PROB_TOL:
            raise InputError(f"joint probabilities sum to {mat.sum()}, expected 1")
        object.__setattr__(self, "matrix", _locked(mat))

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self.col_labels, self.row_labels, self.matrix.T)

    def row_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def col_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def to_json(self) -> dict:
        return {
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "matrix": self.matrix.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointDistribution":
        return cls(tuple(obj["row_labels"]), tuple(obj["col_labels"]),
                   np.asarray(obj["matrix"], dtype=np.float64))


@dataclass(frozen=True)
class ConditionalDistribution:
    """Row-stochastic table P(col symbol | row symbol).

    Rows whose conditioning symbol had zero marginal mass are flagged in
    ``valid`` (all-zero row, excluded from every supremum) rather than
    fabricated; inventing such a row would invent leakage the data cannot
    witness.
    """

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    matrix: np.ndarray  # shape (m, t)
    valid: np.ndarray = None  # shape (m,), bool; None means all rows usable

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.shape != (len(self.row_labels), len(self.col_labels)):
            raise DimensionMismatchError("conditional matrix shape does not match labels")
        if (mat < 0).any():
            raise InputError("conditional probabilities must be nonnegative")
        valid = self.valid
        if valid is None:
            valid = np.ones(mat.shape[0], dtype=bool)
        valid = np.asarray(valid, dtype=bool)
        if valid.shape != (mat.shape[0],):
            raise DimensionMismatchError("valid mask length does not match row count")
        rows = mat[valid]
        if rows.size and np.abs(rows.sum(axis=1) - 1.0).max() > PROB_TOL:
            raise InputError("every non-flagged conditional row must sum to 1")
        object.__setattr__(self, "matrix", _locked(mat))
        object.__setattr__(self, "valid", _locked(valid))

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    def valid_rows(self) -> np.ndarray:
        return np.flatnonzero(self.valid)

    def to_json(self) -> dict:
        return {
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "matrix": self.matrix.tolist(),
            "valid": self.valid.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConditionalDistribution":
        valid = obj.get("valid")
        return cls(
            tuple(obj["row_labels"]),
            tuple(obj["col_labels"]),
            np.asarray(obj["matrix"], dtype=np.float64),
            None if valid is None else np.asarray(valid, dtype=bool),
        )


def bin_numeric(values, bin_count: int) -> tuple[np.ndarray, Alphabet]:
    """Equal-width binning of real values over [min, max].

    The maximum value maps to the last bin. If all values are equal the
    result degenerates to a single bin regardless of ``bin_count``.
    """
    if bin_count < 1:
        raise InputError(f"bin count must be >= 1, got {bin_count}")
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0 or not np.isfinite(vals).all():
        raise InputError("binning requires at least one value and all values finite")
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        labels = (f"[{lo:.6g},{hi:.6g}]",)
        return np.zeros(vals.shape, dtype=np.int64), Alphabet(labels)
    edges = np.linspace(lo, hi, bin_count + 1)
    idx = np.minimum(np.digitize(vals, edges[1:-1], right=False), bin_count - 1)
    labels = tuple(
        f"[{edges[i]:.6g},{edges[i + 1]:.6g}" + (")" if i < bin_count - 1 else "]")
        for i in range(bin_count)
    )
    return idx.astype(np.int64), Alphabet(labels)


def load_csv(path, schema_hints: dict | None = None) -> Dataset:
    """Read a header-bearing CSV into a Dataset.

    Categorical alphabets use first-appearance order. ``schema_hints`` maps a
    column name either to an int (treat as numeric, equal-width bin into that
    many bins) or to a list of labels (declared alphabet and ordering).
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    hints = dict(schema_hints or {})
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file, header row required") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise InputError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            rows.append(row)
    if not rows:
        raise InputError(f"{path}: no data rows")
    unknown = set(hints) - set(header)
    if unknown:
        raise InputError(f"schema hints for unknown columns: {sorted(unknown)}")

    columns: list[np.ndarray] = []
    schema: list[tuple[str, Alphabet]] = []
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        hint = hints.get(name)
        if isinstance(hint, int):
            try:
                numeric = [float(c) for c in cells]
            except ValueError as exc:
                raise InputError(f"column {name!r} declared numeric: {exc}") from None
            idx, alphabet = bin_numeric(numeric, hint)
        else:
            if hint is not None:
                alphabet = Alphabet(tuple(hint))
            else:
                seen: dict[str, int] = {}
                for c in cells:
                    if c not in seen:
                        seen[c] = len(seen)
                alphabet = Alphabet(tuple(seen))
            idx = np.fromiter((alphabet.index(c) for c in cells), dtype=np.int64,
                              count=len(cells))
        columns.append(idx)
        schema.append((name, alphabet))
    return Dataset(tuple(schema), np.column_stack(columns))


def write_csv(d: Dataset, path) -> None:
    """Write a Dataset back to CSV with symbol labels."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(d.attribute_names)
        symbol_tables = [alphabet.symbols for _, alphabet in d.schema]
        for row in d.records:
            writer.writerow([symbol_tables[j][v] for j, v in enumerate(row)])


def expand_dataset(d: Dataset, r: int) -> Dataset:
    """Replicate every record ``r`` times (record i becomes rows i*r..i*r+r-1).

    Attribute-level empirical distributions are unchanged; the extra rows
    only buy statistical resolution for downstream estimates.
    """
    if r < 1:
        raise InputError(f"expansion factor must be >= 1, got {r}")
    if r == 1:
        return d
    return Dataset(d.schema, np.repeat(d.records, r, axis=0))


def empirical_joint(d: Dataset, i: int, j: int) -> JointDistribution:
    """Empirical joint distribution of attributes i (rows) and j (cols)."""
    if i == j:
        raise InputError("joint distribution requires two distinct attributes")
    if d.n_records == 0:
        raise InputError("empty dataset")
    m, t = d.alphabet(i).size, d.alphabet(j).size
    counts = np.bincount(d.column(i) * t + d.column(j), minlength=m * t)
    matrix = counts.reshape(m, t).astype(np.float64) / d.n_records
    return JointDistribution(d.alphabet(i).symbols, d.alphabet(j).symbols, matrix)


def conditional_from_joint(joint: JointDistribution, given: str = "rows") -> ConditionalDistribution:
    """Condition a joint table on one of its variables.

    ``given="rows"`` returns P(col | row); ``given="cols"`` returns
    P(row | col) with the conditioning symbols as output rows. Conditioning
    symbols with zero marginal mass are flagged, not smoothed.
    """
    if given == "cols":
        return conditional_from_joint(joint.transpose(), given="rows")
    if given != "rows":
        raise InputError(f"given must be 'rows' or 'cols', got {given!r}")
    mass = joint.row_marginal()
    valid = mass > 0
    matrix = np.zeros_like(joint.matrix)
    matrix[valid] = joint.matrix[valid] / mass[valid, None]
    return ConditionalDistribution(joint.row_labels, joint.col_labels, matrix, valid)


def load_conditional_json(path) -> ConditionalDistribution:
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
        return ConditionalDistribution.from_json(obj)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: not a valid conditional table: {exc}") from None
