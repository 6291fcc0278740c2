"""
Standard-form convex quadratic program.

    minimize    1/2 x'Qx + c'x + const      (Q diagonal, nonnegative)
    subject to  A_eq x  = b_eq
                A_in x <= b_in

Every variable has a named slot in the VariableIndex and every row carries
the tag of the constraint family it realizes plus a unique label.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..errors import DimensionMismatchError

logger = logging.getLogger(__name__)

Key = Union[int, Tuple[int, int]]


@dataclass(frozen=True)
class VariableBlock:
    """
    A contiguous block of variables.

    Timed blocks hold one slot per (key, t) with t = 1..period laid out
    key-major; untimed blocks hold one slot per key.
    """
    name: str
    keys: Tuple[Key, ...]
    period: Optional[int]
    offset: int

    @property
    def size(self) -> int:
        return len(self.keys) * (self.period or 1)

    def index(self, key: Key, t: Optional[int] = None) -> int:
        position = self.keys.index(key)
        if self.period is None:
            return self.offset + position
        if t is None or not 1 <= t <= self.period:
            raise IndexError(f"time {t} outside 1..{self.period} for block {self.name}")
        return self.offset + position * self.period + (t - 1)


class VariableIndex:
    """Map between named variables and column positions."""

    def __init__(self):
        self._blocks: Dict[str, VariableBlock] = {}
        self._size = 0

    def add_block(self, name: str, keys: Sequence[Key], period: Optional[int]) -> VariableBlock:
        block = VariableBlock(name=name, keys=tuple(keys), period=period, offset=self._size)
        self._blocks[name] = block
        self._size += block.size
        return block

    @property
    def size(self) -> int:
        return self._size

    @property
    def block_names(self) -> List[str]:
        return list(self._blocks)

    def has_block(self, name: str) -> bool:
        return name in self._blocks

    def block(self, name: str) -> VariableBlock:
        return self._blocks[name]

    def index(self, name: str, key: Key, t: Optional[int] = None) -> int:
        return self._blocks[name].index(key, t)

    def slice(self, name: str) -> slice:
        block = self._blocks[name]
        return slice(block.offset, block.offset + block.size)

    def label(self, column: int) -> str:
        """Human-readable name of a column, e.g. ``gamma[2,t=3]``."""
        for block in self._blocks.values():
            if block.offset <= column < block.offset + block.size:
                local = column - block.offset
                if block.period is None:
                    return f"{block.name}[{_key_text(block.keys[local])}]"
                key = block.keys[local // block.period]
                return f"{block.name}[{_key_text(key)},t={local % block.period + 1}]"
        raise IndexError(column)

    def labels(self) -> List[str]:
        return [self.label(column) for column in range(self._size)]

    def __eq__(self, other) -> bool:
        return isinstance(other, VariableIndex) and self._blocks == other._blocks

    def __repr__(self) -> str:
        blocks = ", ".join(f"{b.name}:{b.size}" for b in self._blocks.values())
        return f"VariableIndex({blocks})"


def _key_text(key: Key) -> str:
    if isinstance(key, tuple):
        return f"{key[0]}-{key[1]}"
    return str(key)


ROW_FAMILIES: Dict[str, str] = {
    "gen_cap": "generation capacity",
    "flow": "line flow from phase angles",
    "flow_cap": "line flow limit",
    "level": "storage level within capacity",
    "capacity": "storage capacity budget",
    "ramp": "charge and discharge ramp",
    "balance": "power balance",
    "periodic": "periodic storage level",
    "slack": "slack bus phase angle",
    "pin": "pinned zero capacity",
    "implied": "implied capacity budget",
}


@dataclass(frozen=True)
class RowInfo:
    """Source tag and unique label of one constraint row."""
    tag: str
    label: str


@dataclass(frozen=True)
class Violation:
    kind: str          # "eq" or "in"
    row: int
    tag: str
    label: str
    value: float


@dataclass
class FeasibilityReport:
    """
    Per-row signed violations of a point.

    Equality violations are A_eq x - b_eq; inequality violations are
    A_in x - b_in (positive means violated).
    """
    eq_violation: np.ndarray
    in_violation: np.ndarray
    eq_rows: Tuple[RowInfo, ...]
    in_rows: Tuple[RowInfo, ...]
    tol: float

    @property
    def max_eq(self) -> float:
        return float(np.max(np.abs(self.eq_violation))) if self.eq_violation.size else 0.0

    @property
    def max_in(self) -> float:
        return float(max(np.max(self.in_violation), 0.0)) if self.in_violation.size else 0.0

    @property
    def max_violation(self) -> float:
        return max(self.max_eq, self.max_in)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def violations(self) -> List[Violation]:
        """Rows violated beyond tolerance, largest first."""
        found = []
        for row in np.flatnonzero(np.abs(self.eq_violation) > self.tol):
            info = self.eq_rows[row]
            found.append(Violation("eq", int(row), info.tag, info.label, float(self.eq_violation[row])))
        for row in np.flatnonzero(self.in_violation > self.tol):
            info = self.in_rows[row]
            found.append(Violation("in", int(row), info.tag, info.label, float(self.in_violation[row])))
        return sorted(found, key=lambda v: -abs(v.value))

    def flagged_tags(self) -> List[str]:
        return sorted({v.tag for v in self.violations()})

    def max_by_tag(self) -> Dict[str, float]:
        summary: Dict[str, float] = {}
        for info, value in zip(self.eq_rows, np.abs(self.eq_violation)):
            summary[info.tag] = max(summary.get(info.tag, 0.0), float(value))
        for info, value in zip(self.in_rows, self.in_violation):
            summary[info.tag] = max(summary.get(info.tag, 0.0), float(max(value, 0.0)))
        return summary

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "max_violation": self.max_violation,
            "flagged_tags": self.flagged_tags(),
            "violations": [v.__dict__ for v in self.violations()],
        }


@dataclass(frozen=True)
class ConvexProgram:
    """
    Immutable standard-form QP.

    ``network``, ``demand`` and ``spec`` reference the model the program
    was built from; they are None for programs made from raw matrices.
    """
    variables: VariableIndex
    q_diag: np.ndarray
    c: np.ndarray
    const: float
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    eq_rows: Tuple[RowInfo, ...]
    a_in: sp.csr_matrix
    b_in: np.ndarray
    in_rows: Tuple[RowInfo, ...]
    period: Optional[int] = None
    network: Any = None
    demand: Any = None
    spec: Any = None
    _row_lookup: Dict[str, Tuple[str, int]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        lookup = {info.label: ("eq", i) for i, info in enumerate(self.eq_rows)}
        lookup.update({info.label: ("in", i) for i, info in enumerate(self.in_rows)})
        object.__setattr__(self, "_row_lookup", lookup)

    @classmethod
    def from_matrices(
        cls,
        q_diag,
        c,
        a_eq=None,
        b_eq=None,
        a_in=None,
        b_in=None,
        const: float = 0.0,
    ) -> "ConvexProgram":
        """Wrap raw matrices; columns are named ``x[i]`` and rows ``raw``."""
        c = np.asarray(c, dtype=float)
        n = c.size
        variables = VariableIndex()
        variables.add_block("x", list(range(n)), None)
        a_eq = sp.csr_matrix(a_eq) if a_eq is not None else sp.csr_matrix((0, n))
        a_in = sp.csr_matrix(a_in) if a_in is not None else sp.csr_matrix((0, n))
        b_eq = np.asarray(b_eq if b_eq is not None else [], dtype=float)
        b_in = np.asarray(b_in if b_in is not None else [], dtype=float)
        return cls(
            variables=variables,
            q_diag=np.asarray(q_diag, dtype=float).reshape(n),
            c=c,
            const=float(const),
            a_eq=a_eq,
            b_eq=b_eq,
            eq_rows=tuple(RowInfo("raw", f"eq:{i}") for i in range(a_eq.shape[0])),
            a_in=a_in,
            b_in=b_in,
            in_rows=tuple(RowInfo("raw", f"in:{i}") for i in range(a_in.shape[0])),
        )

    @property
    def n_vars(self) -> int:
        return self.variables.size

    @property
    def n_eq(self) -> int:
        return self.a_eq.shape[0]

    @property
    def n_in(self) -> int:
        return self.a_in.shape[0]

    def hessian(self) -> sp.dia_matrix:
        return sp.diags(self.q_diag)

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_vars,):
            raise DimensionMismatchError(
                f"Point has shape {x.shape}, program has {self.n_vars} variables"
            )
        return x

    def eval_objective(self, x) -> float:
        """1/2 x'Qx + c'x + const."""
        x = self._check_point(x)
        return float(0.5 * np.dot(self.q_diag * x, x) + np.dot(self.c, x) + self.const)

    def residuals(self, x, tol: float = 1e-6) -> FeasibilityReport:
        """Signed violation of every row at ``x``."""
        x = self._check_point(x)
        return FeasibilityReport(
            eq_violation=self.a_eq @ x - self.b_eq,
            in_violation=self.a_in @ x - self.b_in,
            eq_rows=self.eq_rows,
            in_rows=self.in_rows,
            tol=tol,
        )

    def row(self, label: str) -> Tuple[str, int]:
        """Locate a row by label; returns ("eq" | "in", index)."""
        return self._row_lookup[label]

    def rows_with_tag(self, tag: str) -> Tuple[List[int], List[int]]:
        eq = [i for i, info in enumerate(self.eq_rows) if info.tag == tag]
        ineq = [i for i, info in enumerate(self.in_rows) if info.tag == tag]
        return eq, ineq

    def tags(self) -> List[str]:
        return sorted({info.tag for info in self.eq_rows + self.in_rows})

    def without_tags(self, tags: Iterable[str]) -> "ConvexProgram":
        """Copy with every row of the given tags removed; columns untouched."""
        drop = set(tags)
        keep_eq = [i for i, info in enumerate(self.eq_rows) if info.tag not in drop]
        keep_in = [i for i, info in enumerate(self.in_rows) if info.tag not in drop]
        return ConvexProgram(
            variables=self.variables,
            q_diag=self.q_diag,
            c=self.c,
            const=self.const,
            a_eq=self.a_eq[keep_eq],
            b_eq=self.b_eq[keep_eq],
            eq_rows=tuple(self.eq_rows[i] for i in keep_eq),
            a_in=self.a_in[keep_in],
            b_in=self.b_in[keep_in],
            in_rows=tuple(self.in_rows[i] for i in keep_in),
            period=self.period,
            network=self.network,
            demand=self.demand,
            spec=self.spec,
        )

    def dump_triplets(self, out: TextIO) -> None:
        """
        Write Q, A_eq, b_eq, A_in, b_in as ``row col value`` triplets.

        Each matrix starts with a ``# name rows cols`` header; vectors are
        written with col 0. Constraint matrices append the row tags they
        contain to the header and list every row as
        ``#: row label (constraint family)`` before the triplets.
        """
        n = self.n_vars
        sections = [
            ("Q", sp.coo_matrix(self.hessian()), (n, n), None),
            ("A_eq", self.a_eq.tocoo(), self.a_eq.shape, self.eq_rows),
            ("b_eq", sp.coo_matrix(self.b_eq.reshape(-1, 1)), (self.n_eq, 1), None),
            ("A_in", self.a_in.tocoo(), self.a_in.shape, self.in_rows),
            ("b_in", sp.coo_matrix(self.b_in.reshape(-1, 1)), (self.n_in, 1), None),
        ]
        for name, matrix, shape, rows in sections:
            header = f"# {name} {shape[0]} {shape[1]}"
            if rows is None:
                out.write(header + "\n")
            else:
                tags = list(dict.fromkeys(info.tag for info in rows))
                out.write(header + ("  " + " ".join(tags) if tags else "") + "\n")
                for i, info in enumerate(rows):
                    out.write(f"#: {i} {info.label} ({ROW_FAMILIES.get(info.tag, info.tag)})\n")
            for row, col, value in sorted(zip(matrix.row, matrix.col, matrix.data)):
                out.write(f"{int(row)} {int(col)} {float(value)!r}\n")

    def summary(self) -> Dict[str, Any]:
        counts: Dict[str, int] = {}
        for info in self.eq_rows + self.in_rows:
            counts[info.tag] = counts.get(info.tag, 0) + 1
        return {
            "variables": self.n_vars,
            "equalities": self.n_eq,
            "inequalities": self.n_in,
            "rows_by_tag": counts,
        }
