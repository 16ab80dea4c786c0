"""Finite stochastic kernels and the categorical operations on them.

A kernel is a row-stochastic matrix between products of finite carriers.
States are kernels out of the empty product; joint states additionally
name their tensor factors with wires.  Entries are addressed row-major:
lexicographic by factor order, then by element order within each factor,
which is exactly numpy's C-order reshape convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import InitVar, dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainMismatch, ParamMismatch, ShapeMismatch, UnknownWire

DEFAULT_ATOL = 1e-9


@dataclass(frozen=True)
class FinSet:
    """An ordered finite set of named elements."""

    label: str
    elements: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise ShapeMismatch(f"carrier {self.label!r} has no elements")
        if len(set(self.elements)) != len(self.elements):
            raise ShapeMismatch(f"carrier {self.label!r} repeats an element")

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, element: str) -> int:
        try:
            return self.elements.index(element)
        except ValueError:
            raise ShapeMismatch(
                f"{element!r} is not an element of carrier {self.label!r}"
            ) from None


Factors = tuple[FinSet, ...]


def _factors(spec: FinSet | Iterable[FinSet]) -> Factors:
    if isinstance(spec, FinSet):
        return (spec,)
    return tuple(spec)


def _flat_size(factors: Factors) -> int:
    return math.prod(f.size for f in factors)


def _shape(factors: Factors) -> tuple[int, ...]:
    return tuple(f.size for f in factors)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Row-stochastic matrix between products of finite carriers.

    ``matrix[i, j]`` is the probability of the j-th codomain tuple given
    the i-th domain tuple.  A kernel with empty ``dom`` is a state (one
    row); a kernel with empty ``cod`` has a single all-ones column.
    """

    dom: Factors
    cod: Factors
    matrix: np.ndarray
    atol: InitVar[float] = DEFAULT_ATOL

    def __post_init__(self, atol: float):
        dom = _factors(self.dom)
        cod = _factors(self.cod)
        object.__setattr__(self, "dom", dom)
        object.__setattr__(self, "cod", cod)
        mat = np.array(self.matrix, dtype=float)
        want = (_flat_size(dom), _flat_size(cod))
        if mat.shape != want:
            raise ShapeMismatch(
                f"matrix shape {mat.shape} does not match interface {want}"
            )
        if mat.min(initial=0.0) < -atol:
            raise ShapeMismatch(f"negative entry {mat.min():g} in kernel matrix")
        bad = np.abs(mat.sum(axis=1) - 1.0)
        if bad.max(initial=0.0) > atol:
            raise ShapeMismatch(
                f"row sums deviate from 1 by up to {bad.max():g} (atol={atol:g})"
            )
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def state(cls, probs, cod: FinSet | Iterable[FinSet], atol: float = DEFAULT_ATOL) -> "Kernel":
        """Build a state (kernel out of the empty product) from a flat vector."""
        row = np.asarray(probs, dtype=float).reshape(1, -1)
        return cls((), _factors(cod), row, atol)

    @property
    def dom_shape(self) -> tuple[int, ...]:
        return _shape(self.dom)

    @property
    def cod_shape(self) -> tuple[int, ...]:
        return _shape(self.cod)

    @property
    def array(self) -> np.ndarray:
        """The matrix reshaped with one axis per dom factor then cod factor."""
        return self.matrix.reshape(self.dom_shape + self.cod_shape)


def max_abs_diff(f: Kernel, g: Kernel) -> float:
    """Largest entrywise deviation between two kernels of equal interface."""
    if f.dom != g.dom or f.cod != g.cod:
        raise DomainMismatch("kernels have different interfaces")
    if f.matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(f.matrix - g.matrix)))


def deterministic_kernel(
    dom: FinSet | Iterable[FinSet],
    cod: FinSet | Iterable[FinSet],
    fn: Callable[[tuple[str, ...]], Sequence[str]],
) -> Kernel:
    """Kernel whose rows are point masses given by ``fn`` on element tuples."""
    dom = _factors(dom)
    cod = _factors(cod)
    mat = np.zeros((_flat_size(dom), _flat_size(cod)))
    cod_shape = _shape(cod)
    for i, xs in enumerate(itertools.product(*(f.elements for f in dom))):
        ys = tuple(fn(xs))
        if len(ys) != len(cod):
            raise ShapeMismatch(
                f"map returned {len(ys)} values for {len(cod)} codomain factors"
            )
        idx = tuple(f.index(y) for f, y in zip(cod, ys))
        j = int(np.ravel_multi_index(idx, cod_shape)) if cod else 0
        mat[i, j] = 1.0
    return Kernel(dom, cod, mat)


def identity(factors: FinSet | Iterable[FinSet]) -> Kernel:
    return deterministic_kernel(factors, factors, lambda xs: xs)


def copy_kernel(factors: FinSet | Iterable[FinSet]) -> Kernel:
    fs = _factors(factors)
    return deterministic_kernel(fs, fs + fs, lambda xs: xs + xs)


def discard_kernel(factors: FinSet | Iterable[FinSet]) -> Kernel:
    return deterministic_kernel(factors, (), lambda xs: ())


def swap_kernel(x: FinSet, y: FinSet) -> Kernel:
    return deterministic_kernel((x, y), (y, x), lambda xs: (xs[1], xs[0]))


def structural(kind: str, carrier: FinSet, second: FinSet | None = None) -> Kernel:
    """Dispatch for the structural kernels: copy, discard, swap, identity."""
    if kind == "copy":
        return copy_kernel(carrier)
    if kind == "discard":
        return discard_kernel(carrier)
    if kind == "identity":
        return identity(carrier)
    if kind == "swap":
        if second is None:
            raise ShapeMismatch("swap needs a second carrier")
        return swap_kernel(carrier, second)
    raise ShapeMismatch(f"unknown structural kind {kind!r}")


def uniform_state(factors: FinSet | Iterable[FinSet]) -> Kernel:
    fs = _factors(factors)
    n = _flat_size(fs)
    return Kernel.state(np.full(n, 1.0 / n), fs)


def compose(g: Kernel, f: Kernel) -> Kernel:
    """Sequential composite g after f, by the Chapman-Kolmogorov sum."""
    if f.cod != g.dom:
        raise DomainMismatch(
            f"cannot compose: intermediate interfaces differ "
            f"({[c.label for c in f.cod]} vs {[d.label for d in g.dom]})"
        )
    return Kernel(f.dom, g.cod, f.matrix @ g.matrix)


def tensor(f: Kernel, g: Kernel) -> Kernel:
    """Parallel composite; probabilities multiply across the two legs."""
    return Kernel(f.dom + g.dom, f.cod + g.cod, np.kron(f.matrix, g.matrix))


@dataclass(frozen=True, eq=False)
class JointState:
    """A state whose tensor factors are addressed by wire names."""

    kernel: Kernel
    wire_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "wire_names", tuple(self.wire_names))
        if self.kernel.dom:
            raise ShapeMismatch("a joint state must not have inputs")
        if len(self.wire_names) != len(self.kernel.cod):
            raise ShapeMismatch(
                f"{len(self.wire_names)} wire names for "
                f"{len(self.kernel.cod)} factors"
            )
        if len(set(self.wire_names)) != len(self.wire_names):
            raise ShapeMismatch("wire names repeat")

    @classmethod
    def from_array(
        cls,
        array,
        wires: Sequence[tuple[str, FinSet]],
        atol: float = DEFAULT_ATOL,
    ) -> "JointState":
        names = tuple(name for name, _ in wires)
        carriers = tuple(carrier for _, carrier in wires)
        row = np.asarray(array, dtype=float).reshape(1, -1)
        return cls(Kernel((), carriers, row, atol), names)

    @property
    def array(self) -> np.ndarray:
        """Probabilities reshaped with one axis per wire."""
        return self.kernel.matrix.reshape(self.kernel.cod_shape)

    def carrier(self, wire: str) -> FinSet:
        return self.kernel.cod[self.wire_index(wire)]

    def wire_index(self, wire: str) -> int:
        try:
            return self.wire_names.index(wire)
        except ValueError:
            raise UnknownWire(f"no wire named {wire!r}") from None

    def wire_indices(self, wires: Iterable[str]) -> list[int]:
        return [self.wire_index(w) for w in wires]


def marginalize(p: JointState, keep: Iterable[str]) -> JointState:
    """Sum out every wire not listed in ``keep``; kept wire order is p's."""
    keep_set = set(keep)
    for w in keep_set:
        if w not in p.wire_names:
            raise UnknownWire(f"no wire named {w!r}")
    kept = [w for w in p.wire_names if w in keep_set]
    drop = tuple(i for i, w in enumerate(p.wire_names) if w not in keep_set)
    arr = p.array.sum(axis=drop) if drop else p.array
    return JointState.from_array(arr, [(w, p.carrier(w)) for w in kept])


def reindex(p: JointState, order: Sequence[str]) -> JointState:
    """Permute the tensor factors of p into the given wire order."""
    order = list(order)
    perm = p.wire_indices(order)
    if sorted(perm) != list(range(len(p.wire_names))):
        raise ShapeMismatch("order is not a permutation of the wires")
    arr = p.array.transpose(perm)
    return JointState.from_array(arr, [(w, p.carrier(w)) for w in order])


def is_deterministic(f: Kernel, atol: float = DEFAULT_ATOL) -> bool:
    """True iff every row is a point mass within atol.

    For finite kernels this is equivalent to copy-naturality: the
    composite of f with copy equals copy followed by f on both branches.
    """
    m = f.matrix
    return bool(np.all((m <= atol) | (m >= 1.0 - atol)))


def conditional(p: Kernel, given: Sequence[int]) -> Kernel:
    """Conditional of p onto the non-``given`` factors.

    ``given`` lists positions of codomain factors.  The result consumes
    those factors (in the order listed) followed by p's original inputs,
    and emits the remaining codomain factors in their original order, so
    that recomposing marginal and conditional reproduces p on every
    input of positive mass.  Rows at zero-mass inputs are uniform.
    """
    given = [int(i) for i in given]
    if len(set(given)) != len(given):
        raise ShapeMismatch("given positions repeat")
    if any(i < 0 or i >= len(p.cod) for i in given):
        raise ShapeMismatch("given position out of range")
    rest = [i for i in range(len(p.cod)) if i not in given]
    ndom = len(p.dom)
    perm = [ndom + i for i in given] + list(range(ndom)) + [ndom + i for i in rest]
    x_factors = tuple(p.cod[i] for i in given)
    y_factors = tuple(p.cod[i] for i in rest)
    nx = _flat_size(x_factors) * _flat_size(p.dom)
    ny = _flat_size(y_factors)
    t = p.array.transpose(perm).reshape(nx, ny)
    mass = t.sum(axis=1, keepdims=True)
    null = mass == 0.0
    out = t / np.where(null, 1.0, mass)
    out = np.where(null, 1.0 / ny, out)
    return Kernel(x_factors + p.dom, y_factors, out)


def as_equal_residual(f: Kernel, g: Kernel, p: Kernel, atol: float = DEFAULT_ATOL) -> float:
    """Largest rowwise deviation between f and g on the support of p.

    Supported inputs are those x with max_a p(x|a) > atol.
    """
    if f.dom != g.dom or f.cod != g.cod:
        raise DomainMismatch("kernels have different interfaces")
    if p.cod != f.dom:
        raise DomainMismatch("state does not land in the kernels' domain")
    support = p.matrix.max(axis=0) > atol
    if not support.any():
        return 0.0
    diff = np.abs(f.matrix[support] - g.matrix[support])
    return float(diff.max())


def as_equal(f: Kernel, g: Kernel, p: Kernel, atol: float = DEFAULT_ATOL) -> bool:
    """Rowwise equality of f and g on the support of p, within atol."""
    return as_equal_residual(f, g, p, atol) <= atol


@dataclass(frozen=True)
class CSReport:
    """Outcome of the pairing-equality check and its a.s.-equality consequent."""

    antecedent_holds: bool
    consequent_holds: bool
    antecedent_residual: float
    consequent_residual: float

    @property
    def implication_holds(self) -> bool:
        return (not self.antecedent_holds) or self.consequent_holds


def _pairing(u: Kernel, v: Kernel, p: Kernel) -> Kernel:
    return compose(tensor(u, v), compose(copy_kernel(p.cod), p))


def cs_check(
    p: Kernel,
    f: Kernel,
    g: Kernel,
    antecedent_atol: float = 1e-12,
    consequent_atol: float = 1e-6,
) -> CSReport:
    """Check the implication: equal pairings against p force a.s. equality.

    The antecedent asks that the three two-output composites pairing
    (f,f), (f,g) and (g,g) over a copy of p's output agree pairwise; the
    consequent is a.s. equality of f and g with respect to p.  The
    antecedent is held to a stricter tolerance because deviations enter
    the pairings quadratically.
    """
    if f.dom != g.dom or f.cod != g.cod:
        raise DomainMismatch("kernels have different interfaces")
    if p.cod != f.dom:
        raise DomainMismatch("state does not land in the kernels' domain")
    ff = _pairing(f, f, p)
    fg = _pairing(f, g, p)
    gg = _pairing(g, g, p)
    ante = max(max_abs_diff(ff, fg), max_abs_diff(fg, gg), max_abs_diff(ff, gg))
    cons = as_equal_residual(f, g, p, consequent_atol)
    return CSReport(
        antecedent_holds=ante <= antecedent_atol,
        consequent_holds=cons <= consequent_atol,
        antecedent_residual=ante,
        consequent_residual=cons,
    )


@dataclass(frozen=True, eq=False)
class ParamKernel:
    """Kernel whose final input factor is a parameter shared along composites."""

    base: Kernel

    def __post_init__(self):
        if not self.base.dom:
            raise ShapeMismatch("a parametric kernel needs a parameter factor")

    @property
    def param(self) -> FinSet:
        return self.base.dom[-1]

    @property
    def dom(self) -> Factors:
        return self.base.dom[:-1]

    @property
    def cod(self) -> Factors:
        return self.base.cod

    def slices(self) -> list[Kernel]:
        """The ordinary kernels obtained by fixing each parameter value."""
        na = _flat_size(self.dom)
        nw = self.param.size
        ny = _flat_size(self.cod)
        t = self.base.matrix.reshape(na, nw, ny)
        return [Kernel(self.dom, self.cod, t[:, w, :]) for w in range(nw)]


def param_lift(k: Kernel, param: FinSet) -> ParamKernel:
    """View an ordinary kernel as parametric, ignoring the parameter."""
    return ParamKernel(tensor(k, discard_kernel(param)))


def parametric_compose(g: ParamKernel, f: ParamKernel) -> ParamKernel:
    """Composite that feeds one shared parameter value to both factors."""
    if f.param != g.param:
        raise ParamMismatch(
            f"parameter factors differ ({f.param.label!r} vs {g.param.label!r})"
        )
    if f.cod != g.dom:
        raise DomainMismatch("cannot compose: intermediate interfaces differ")
    na = _flat_size(f.dom)
    nw = f.param.size
    nx = _flat_size(f.cod)
    ny = _flat_size(g.cod)
    f3 = f.base.matrix.reshape(na, nw, nx)
    g3 = g.base.matrix.reshape(nx, nw, ny)
    out = np.einsum("awx,xwy->awy", f3, g3).reshape(na * nw, ny)
    return ParamKernel(Kernel(f.dom + (f.param,), g.cod, out))


def parametric_tensor(f: ParamKernel, g: ParamKernel) -> ParamKernel:
    """Parallel composite that copies the shared parameter to both legs."""
    if f.param != g.param:
        raise ParamMismatch(
            f"parameter factors differ ({f.param.label!r} vs {g.param.label!r})"
        )
    na = _flat_size(f.dom)
    nb = _flat_size(g.dom)
    nw = f.param.size
    ny = _flat_size(f.cod)
    nz = _flat_size(g.cod)
    f3 = f.base.matrix.reshape(na, nw, ny)
    g3 = g.base.matrix.reshape(nb, nw, nz)
    out = np.einsum("awy,bwz->abwyz", f3, g3).reshape(na * nb * nw, ny * nz)
    return ParamKernel(Kernel(f.dom + g.dom + (f.param,), f.cod + g.cod, out))


def parametric_as_equal(
    f: ParamKernel, g: ParamKernel, p: ParamKernel, atol: float = DEFAULT_ATOL
) -> bool:
    """Slice-wise a.s. equality of two parametric kernels."""
    return all(
        as_equal(fs, gs, ps, atol)
        for fs, gs, ps in zip(f.slices(), g.slices(), p.slices())
    )


def parametric_cs_check(
    p: ParamKernel,
    f: ParamKernel,
    g: ParamKernel,
    antecedent_atol: float = 1e-12,
    consequent_atol: float = 1e-6,
) -> CSReport:
    """The two-sided check of cs_check, run in the parametric category.

    The pairings are built with parametric composition and tensor (the
    copy discards the parameter), and the consequent is slice-wise a.s.
    equality.
    """
    if f.param != g.param or f.param != p.param:
        raise ParamMismatch("parameter factors differ")
    if f.dom != g.dom or f.cod != g.cod:
        raise DomainMismatch("kernels have different interfaces")
    if p.cod != f.dom:
        raise DomainMismatch("state does not land in the kernels' domain")
    cp = parametric_compose(param_lift(copy_kernel(p.cod), p.param), p)
    ff = parametric_compose(parametric_tensor(f, f), cp)
    fg = parametric_compose(parametric_tensor(f, g), cp)
    gg = parametric_compose(parametric_tensor(g, g), cp)
    ante = max(
        max_abs_diff(ff.base, fg.base),
        max_abs_diff(fg.base, gg.base),
        max_abs_diff(ff.base, gg.base),
    )
    cons = max(
        as_equal_residual(fs, gs, ps, consequent_atol)
        for fs, gs, ps in zip(f.slices(), g.slices(), p.slices())
    )
    return CSReport(
        antecedent_holds=ante <= antecedent_atol,
        consequent_holds=cons <= consequent_atol,
        antecedent_residual=ante,
        consequent_residual=cons,
    )
