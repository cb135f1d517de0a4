"""Independent references: mesh discretization, midpoint corrections, exact moments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as nppoly

from .basis import BasisKind, Interval, basis_integrals, gauss_rule, phi_matrix
from .coefficients import CoeffTensor
from .errors import ArgumentError, CapabilityError
from .kernel import WeightPoly, WeightSpec
from .rng import DOMAIN_PATH, normal_stream
from .sampler import GaussianTable, IntegralSpec, TruncationOrders

__all__ = [
    "MeshPath",
    "PairPartition",
    "draw_path",
    "coarsen_path",
    "table_from_path",
    "discretize_ito",
    "strat_reference",
    "enumerate_pair_partitions",
    "truncated_moment",
]


@dataclass(frozen=True)
class MeshPath:
    """Uniformish mesh t = tau_0 < ... < tau_N = T with increments; row 0 is dtau."""

    mesh: np.ndarray
    increments: np.ndarray

    def __post_init__(self) -> None:
        if self.mesh.ndim != 1 or self.mesh.size < 2:
            raise ArgumentError("mesh needs at least two points")
        if not np.all(np.diff(self.mesh) > 0):
            raise ArgumentError("mesh must be strictly increasing")
        if self.increments.shape != (self.increments.shape[0], self.mesh.size - 1):
            raise ArgumentError("increments must have one column per mesh step")
        if not np.array_equal(self.increments[0], np.diff(self.mesh)):
            raise ArgumentError("increment row 0 must equal mesh differences exactly")
        self.mesh.setflags(write=False)
        self.increments.setflags(write=False)

    @property
    def m(self) -> int:
        return self.increments.shape[0] - 1

    @property
    def steps(self) -> int:
        return self.mesh.size - 1

    def interval(self) -> Interval:
        return Interval(float(self.mesh[0]), float(self.mesh[-1]))


@dataclass(frozen=True)
class PairPartition:
    """Partition of {1..k} into disordered pairs plus leftover singles."""

    pairs: tuple[tuple[int, int], ...]
    singles: tuple[int, ...]


def draw_path(m: int, n_steps: int, iv: Interval, seed: int, stream: int = 0) -> MeshPath:
    """Wiener increments of m components on a uniform n_steps mesh over [t, T]."""
    if m < 1:
        raise ArgumentError(f"need m >= 1 components, got {m}")
    if n_steps < 1:
        raise ArgumentError(f"need n_steps >= 1, got {n_steps}")
    mesh = iv.t + iv.length() * (np.arange(n_steps + 1) / n_steps)
    mesh[0], mesh[-1] = iv.t, iv.T
    dtau = np.diff(mesh)
    increments = np.empty((m + 1, n_steps))
    increments[0] = dtau
    root = np.sqrt(dtau)
    for i in range(1, m + 1):
        increments[i] = root * normal_stream(seed, stream, i, n_steps, DOMAIN_PATH)
    return MeshPath(mesh=mesh, increments=increments)


def coarsen_path(path: MeshPath, factor: int) -> MeshPath:
    """Merge groups of `factor` consecutive steps; Wiener rows sum bit-exactly."""
    if factor < 1 or path.steps % factor != 0:
        raise ArgumentError(f"factor {factor} must divide the {path.steps} steps")
    mesh = path.mesh[::factor].copy()
    cuts = np.arange(0, path.steps, factor)
    increments = np.add.reduceat(path.increments, cuts, axis=1)
    # Row 0 must stay exactly the mesh differences, not their rounded sums.
    increments[0] = np.diff(mesh)
    return MeshPath(mesh=mesh, increments=increments)


def table_from_path(
    path: MeshPath, max_j: int, basis: BasisKind, phi: np.ndarray | None = None
) -> GaussianTable:
    """Couple a table to a path: zeta_j = sum_l phi_j(tau_l) dw_l, left endpoints.

    Pass phi = phi_matrix(basis, max_j, path.mesh[:-1], iv) to amortize the
    basis evaluation across many paths on a shared mesh.
    """
    iv = path.interval()
    if phi is None:
        phi = phi_matrix(basis, max_j, path.mesh[:-1], iv)
    if phi.shape != (max_j + 1, path.steps):
        raise ArgumentError(f"phi must have shape {(max_j + 1, path.steps)}, got {phi.shape}")
    values = np.empty((path.m + 1, max_j + 1))
    values[0] = basis_integrals(basis, iv, max_j)
    values[1:] = path.increments[1:] @ phi.T
    return GaussianTable(m=path.m, max_j=max_j, values=values, basis=basis, iv=iv, seed=0)


def _check_path(ispec: IntegralSpec, path: MeshPath) -> None:
    if path.mesh[0] != ispec.iv.t or path.mesh[-1] != ispec.iv.T:
        raise ArgumentError(
            f"path covers [{path.mesh[0]}, {path.mesh[-1]}], spec wants [{ispec.iv.t}, {ispec.iv.T}]"
        )
    if max(ispec.indices) > path.m:
        raise ArgumentError(f"path has {path.m} components, need {max(ispec.indices)}")


def discretize_ito(ispec: IntegralSpec, path: MeshPath) -> float:
    """Prelimit nested sum over strictly increasing mesh indices, left endpoints."""
    _check_path(ispec, path)
    t = ispec.iv.t
    left = path.mesh[:-1]
    acc = None
    for psi, i_l in zip(ispec.spec.weights, ispec.indices):
        layer = np.asarray(psi.value(left, t)) * path.increments[i_l]
        if acc is not None:
            # Exclusive prefix sum enforces j_{l-1} < j_l across levels.
            prefix = np.empty_like(acc)
            prefix[0] = 0.0
            np.cumsum(acc[:-1], out=prefix[1:])
            layer = layer * prefix
        acc = layer
    return float(np.sum(acc))


def _merge_weights(a: WeightPoly, b: WeightPoly) -> WeightPoly:
    prod = nppoly.polymul(np.array(a.coeffs), np.array(b.coeffs))
    return WeightPoly(tuple(float(c) for c in prod))


def strat_reference(ispec: IntegralSpec, path: MeshPath) -> float:
    """Ito discretization plus deterministic/reduced midpoint corrections, k <= 3."""
    k = ispec.spec.k
    if k > 3:
        raise CapabilityError(f"reference corrections implemented for k <= 3, got {k}")
    total = discretize_ito(ispec, path)
    if k == 1:
        return total
    w = ispec.spec.weights
    idx = ispec.indices
    if k == 2:
        if idx[0] == idx[1] != 0:
            merged = _merge_weights(w[0], w[1])
            rule = gauss_rule(merged.degree // 2 + 1, ispec.iv)
            total += 0.5 * rule.integrate(np.asarray(merged.value(rule.nodes, ispec.iv.t)))
        return total
    if idx[0] == idx[1] != 0:
        reduced = IntegralSpec(
            spec=WeightSpec((_merge_weights(w[0], w[1]), w[2])),
            indices=(0, idx[2]), basis=ispec.basis, iv=ispec.iv,
        )
        total += 0.5 * discretize_ito(reduced, path)
    if idx[1] == idx[2] != 0:
        reduced = IntegralSpec(
            spec=WeightSpec((w[0], _merge_weights(w[1], w[2]))),
            indices=(idx[0], 0), basis=ispec.basis, iv=ispec.iv,
        )
        total += 0.5 * discretize_ito(reduced, path)
    return total


def enumerate_pair_partitions(k: int, r: int) -> list[PairPartition]:
    """All partitions of {1..k} into r disordered pairs and k - 2r singles."""
    if k < 0 or r < 0 or 2 * r > k:
        raise ArgumentError(f"need 0 <= 2r <= k, got k={k}, r={r}")
    out: list[PairPartition] = []

    def rec(
        remaining: tuple[int, ...],
        pairs: tuple[tuple[int, int], ...],
        singles: tuple[int, ...],
    ) -> None:
        if len(pairs) == r:
            out.append(PairPartition(pairs=pairs, singles=singles + remaining))
            return
        if len(remaining) < 2 * (r - len(pairs)):
            return
        first, rest = remaining[0], remaining[1:]
        # The smallest free index is either paired with each later one or kept
        # single, so every partition appears exactly once, pairs sorted.
        for pos in range(len(rest)):
            rec(rest[:pos] + rest[pos + 1 :], pairs + ((first, rest[pos]),), singles)
        rec(rest, pairs, singles + (first,))

    rec(tuple(range(1, k + 1)), (), ())
    return out


def _moment_positions(
    ispecs: list[IntegralSpec], orders: list[TruncationOrders]
) -> list[tuple[int, int, int, int]]:
    """Flatten to (operand, axis, component, p) per tensor axis."""
    out = []
    for op, (ispec, o) in enumerate(zip(ispecs, orders)):
        for axis, (comp, p) in enumerate(zip(ispec.indices, o.p)):
            out.append((op, axis, comp, p))
    return out


def truncated_moment(
    ispecs: IntegralSpec | list[IntegralSpec],
    tensors: CoeffTensor | list[CoeffTensor],
    orders: TruncationOrders | list[TruncationOrders],
) -> float:
    """Exact E[X] or E[X Y] of truncated expansions via pair-partition matching."""
    if isinstance(ispecs, IntegralSpec):
        ispecs, tensors, orders = [ispecs], [tensors], [orders]
    ispecs, tensors, orders = list(ispecs), list(tensors), list(orders)
    if len(ispecs) not in (1, 2) or len(tensors) != len(ispecs) or len(orders) != len(ispecs):
        raise ArgumentError("need one or two specs with matching tensors and orders")
    basis, iv = ispecs[0].basis, ispecs[0].iv
    if any(s.basis is not basis for s in ispecs) or any(s.iv != iv for s in ispecs):
        raise ArgumentError("specs must share basis and interval")
    total_k = sum(s.spec.k for s in ispecs)
    if total_k > 8:
        raise CapabilityError(f"total multiplicity {total_k} > 8 not supported")
    for ispec, tensor, o in zip(ispecs, tensors, orders):
        if tensor.kind is not basis or tensor.spec != ispec.spec or tensor.iv != iv:
            raise ArgumentError("tensor does not match its spec")
        if len(o.p) != ispec.spec.k or any(p > q for p, q in zip(o.p, tensor.orders)):
            raise ArgumentError(f"orders {o.p} exceed tensor orders {tensor.orders}")

    positions = _moment_positions(ispecs, orders)
    gauss = [n for n, (_, _, comp, _) in enumerate(positions) if comp != 0]
    if len(gauss) % 2 == 1:
        return 0.0
    dt_pos = [n for n, (_, _, comp, _) in enumerate(positions) if comp == 0]
    dt_values = basis_integrals(basis, iv, max((positions[n][3] for n in dt_pos), default=0))

    contributions = []
    for matching in enumerate_pair_partitions(len(gauss), len(gauss) // 2):
        keep = True
        for a, b in matching.pairs:
            if positions[gauss[a - 1]][2] != positions[gauss[b - 1]][2]:
                keep = False
                break
        if not keep:
            continue
        labels = [""] * len(positions)
        trims = [list(o.p) for o in orders]
        next_label = iter("abcdefghijklmnop")
        for a, b in matching.pairs:
            na, nb = gauss[a - 1], gauss[b - 1]
            lab = next(next_label)
            labels[na] = labels[nb] = lab
            p = min(positions[na][3], positions[nb][3])
            trims[positions[na][0]][positions[na][1]] = p
            trims[positions[nb][0]][positions[nb][1]] = p
        for n in dt_pos:
            labels[n] = next(next_label)
        operands = []
        terms = []
        for op, tensor in enumerate(tensors):
            operands.append(tensor.data[tuple(slice(0, p + 1) for p in trims[op])])
            terms.append("".join(labels[n] for n, pos in enumerate(positions) if pos[0] == op))
        for n in dt_pos:
            operands.append(dt_values[: positions[n][3] + 1])
            terms.append(labels[n])
        contributions.append(float(np.einsum(",".join(terms) + "->", *operands)))
    return math.fsum(contributions)
