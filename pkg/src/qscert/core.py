"""Chain models: validated generators / substochastic kernels and model files.

A continuous model is a Markov generator ``L`` on the surviving states plus a
nonnegative killing vector ``V``; the full process lives on the extended space
with one extra trap state, whose generator row is zero and whose column
receives ``V``.  A discrete model is a substochastic matrix ``Q`` plus the
absorption probabilities ``a`` with row sums ``Q 1 + a = 1``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NegativeRate,
    RowSumViolation,
    SchemaError,
)

DIAG_TOL = 1e-12
ROWSUM_TOL = 1e-12
DIST_TOL = 1e-10


def _readonly(a, dtype=float):
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def probability_vector(w, n=None, tol=DIST_TOL):
    """Validate ``w`` as a probability vector: nonnegative, sums to one."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or (n is not None and w.size != n):
        raise DimensionMismatch(f"distribution has shape {w.shape}, expected ({n},)")
    if w.min() < 0:
        raise NegativeEntry(f"distribution has negative weight {w.min()!r}")
    if abs(w.sum() - 1.0) > tol:
        raise RowSumViolation(f"distribution sums to {w.sum()!r}, not 1")
    return _readonly(w)


@dataclass(frozen=True)
class StateSpace:
    """Ordered surviving states; the trap state is implicit and never a member."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(labels) == 0:
            raise DimensionMismatch("state space must contain at least one state")
        if len(set(labels)) != len(labels):
            raise SchemaError("state labels must be distinct")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return len(self.labels)

    def index(self, label):
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown state {label!r}") from None


def _strongly_connected(adj):
    """Strong connectivity of a boolean adjacency matrix (dense, n small)."""
    n = adj.shape[0]
    if n == 1:
        return True

    def reach(a):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = np.array([0])
        while frontier.size:
            nxt = a[frontier].any(axis=0) & ~seen
            seen |= nxt
            frontier = np.flatnonzero(nxt)
        return seen.all()

    return reach(adj) and reach(adj.T)


@dataclass(frozen=True, eq=False)
class ContinuousAbsorbingChain:
    states: StateSpace
    rates: np.ndarray          # Markov generator L, diagonal = -row sum of off-diagonals
    killing: np.ndarray        # V >= 0, jump rates into the trap
    irreducible: bool
    absorbing: bool            # False iff V == 0 (degenerate, accepted)
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.states.n

    def sub_generator(self):
        """The surviving-states minor L - V of the full generator."""
        return self.rates - np.diag(self.killing)

    def full_generator(self):
        """The (n+1) x (n+1) generator with the trap state last."""
        n = self.n
        full = np.zeros((n + 1, n + 1))
        full[:n, :n] = self.sub_generator()
        full[:n, n] = self.killing
        return full

    def __eq__(self, other):
        if not isinstance(other, ContinuousAbsorbingChain):
            return NotImplemented
        return (
            self.states.labels == other.states.labels
            and np.array_equal(self.rates, other.rates)
            and np.array_equal(self.killing, other.killing)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DiscreteAbsorbingChain:
    states: StateSpace
    sub: np.ndarray            # substochastic matrix Q
    absorb: np.ndarray         # absorption probabilities a, Q 1 + a = 1 rowwise
    irreducible: bool
    absorbing: bool
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.states.n

    def full_kernel(self):
        """The (n+1) x (n+1) stochastic matrix with the trap state last."""
        n = self.n
        full = np.zeros((n + 1, n + 1))
        full[:n, :n] = self.sub
        full[:n, n] = self.absorb
        full[n, n] = 1.0
        return full

    def __eq__(self, other):
        if not isinstance(other, DiscreteAbsorbingChain):
            return NotImplemented
        return (
            self.states.labels == other.states.labels
            and np.array_equal(self.sub, other.sub)
            and np.array_equal(self.absorb, other.absorb)
        )

    __hash__ = None


def build_continuous(states, rates, killing, meta=None):
    """Validate and assemble a continuous chain.

    The diagonal of ``rates`` is always recomputed from the off-diagonal
    entries (single source of truth); if the supplied diagonal disagreed
    beyond 1e-12 the largest deviation is recorded under
    ``meta["diagonal_adjusted"]``.
    """
    if not isinstance(states, StateSpace):
        states = StateSpace(tuple(states))
    n = states.n
    L = np.array(rates, dtype=float)
    V = np.array(killing, dtype=float)
    if L.shape != (n, n):
        raise DimensionMismatch(f"rates have shape {L.shape}, expected ({n}, {n})")
    if V.shape != (n,):
        raise DimensionMismatch(f"killing has shape {V.shape}, expected ({n},)")
    off = L.copy()
    np.fill_diagonal(off, 0.0)
    if off.min() < 0:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        raise NegativeRate(f"rate ({states.labels[i]} -> {states.labels[j]}) = {off[i, j]!r} < 0")
    if V.min() < 0:
        i = int(np.argmin(V))
        raise NegativeRate(f"killing rate at {states.labels[i]} = {V[i]!r} < 0")
    new_diag = -off.sum(axis=1)
    adjust = float(np.abs(np.diag(L) - new_diag).max())
    L = off
    np.fill_diagonal(L, new_diag)
    meta = dict(meta or {})
    if adjust > DIAG_TOL:
        meta["diagonal_adjusted"] = adjust
    irreducible = _strongly_connected(off > 0)
    absorbing = bool(V.max() > 0)
    if not absorbing:
        meta.setdefault("non_absorbing", True)
    return ContinuousAbsorbingChain(
        states=states,
        rates=_readonly(L),
        killing=_readonly(V),
        irreducible=irreducible,
        absorbing=absorbing,
        meta=meta,
    )


def build_discrete(states, sub, absorb, meta=None):
    """Validate and assemble a discrete chain: rows of (Q | a) must sum to 1."""
    if not isinstance(states, StateSpace):
        states = StateSpace(tuple(states))
    n = states.n
    Q = np.array(sub, dtype=float)
    a = np.array(absorb, dtype=float)
    if Q.shape != (n, n):
        raise DimensionMismatch(f"sub has shape {Q.shape}, expected ({n}, {n})")
    if a.shape != (n,):
        raise DimensionMismatch(f"absorb has shape {a.shape}, expected ({n},)")
    if Q.min() < 0:
        i, j = np.unravel_index(np.argmin(Q), Q.shape)
        raise NegativeEntry(f"sub[{states.labels[i]}, {states.labels[j]}] = {Q[i, j]!r} < 0")
    if a.min() < 0:
        i = int(np.argmin(a))
        raise NegativeEntry(f"absorb[{states.labels[i]}] = {a[i]!r} < 0")
    rowsums = Q.sum(axis=1) + a
    worst = int(np.argmax(np.abs(rowsums - 1.0)))
    if abs(rowsums[worst] - 1.0) > ROWSUM_TOL:
        raise RowSumViolation(
            f"row {states.labels[worst]} of (Q | a) sums to {float(rowsums[worst])!r}, not 1"
        )
    irreducible = _strongly_connected(Q > 0)
    absorbing = bool(a.max() > 0)
    meta = dict(meta or {})
    if not absorbing:
        meta.setdefault("non_absorbing", True)
    return DiscreteAbsorbingChain(
        states=states,
        sub=_readonly(Q),
        absorb=_readonly(a),
        irreducible=irreducible,
        absorbing=absorbing,
        meta=meta,
    )


# -- model files --------------------------------------------------------------

def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def serialize_model(chain, indent=2):
    """Serialize a chain to the JSON model format at full float precision."""
    doc = {"states": list(chain.states.labels)}
    if isinstance(chain, ContinuousAbsorbingChain):
        doc["kind"] = "continuous"
        doc["rates"] = chain.rates.tolist()
        doc["killing"] = chain.killing.tolist()
    elif isinstance(chain, DiscreteAbsorbingChain):
        doc["kind"] = "discrete"
        doc["sub"] = chain.sub.tolist()
        doc["absorb"] = chain.absorb.tolist()
    else:
        raise SchemaError(f"cannot serialize object of type {type(chain).__name__}")
    if chain.meta:
        doc["meta"] = _json_safe(chain.meta)
    return json.dumps(doc, indent=indent, sort_keys=True)


def _require(doc, key, types, kind):
    if key not in doc:
        raise SchemaError(f"model of kind {kind!r} is missing required field {key!r}")
    value = doc[key]
    if not isinstance(value, types):
        raise SchemaError(f"field {key!r} has type {type(value).__name__}")
    return value


def parse_model(text):
    """Parse the JSON model format; inverse of :func:`serialize_model`.

    A ``"builtin"`` field of the form ``"name:key=value,key=value"`` replaces
    the matrices with a generated model (see :mod:`qscert.models`).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise SchemaError("model file must contain a JSON object")

    if "builtin" in doc:
        from .models import make_builtin_ref

        chain = make_builtin_ref(_require(doc, "builtin", str, doc.get("kind", "builtin")))
        declared = doc.get("kind")
        actual = "continuous" if isinstance(chain, ContinuousAbsorbingChain) else "discrete"
        if declared is not None and declared != actual:
            raise SchemaError(f"field 'kind' is {declared!r} but builtin expands to {actual!r}")
        if isinstance(doc.get("meta"), dict):
            chain.meta.update(doc["meta"])
        return chain

    kind = _require(doc, "kind", str, "?")
    states = _require(doc, "states", list, kind)
    meta = doc.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise SchemaError("field 'meta' must be an object")
    try:
        if kind == "continuous":
            rates = _require(doc, "rates", list, kind)
            killing = _require(doc, "killing", list, kind)
            return build_continuous(states, rates, killing, meta=meta)
        if kind == "discrete":
            sub = _require(doc, "sub", list, kind)
            absorb = _require(doc, "absorb", list, kind)
            return build_discrete(states, sub, absorb, meta=meta)
    except (ValueError, TypeError) as e:
        raise SchemaError(f"malformed matrix data: {e}") from None
    raise SchemaError(f"unknown model kind {kind!r}")


def model_hash(chain):
    """Stable hex digest of the model content (states and matrices only)."""
    doc = json.loads(serialize_model(chain))
    doc.pop("meta", None)
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
