"""Declaration registry: manifolds, metrics, tensors, constants, conventions.

A session owns every name a computation can reference.  Declaring a metric on
a curved manifold also declares its curvature tensors (Riemann, Ricci, the
Ricci scalar RS, and Weyl) plus the associated covariant derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .errors import DeclarationError, UndeclaredHeadError
from .perm import SymmetrySpec

INTERNAL_PERTURBATION = "#dg"
INTERNAL_AUX = "#aux"
INTERNAL_GDELTA = "#gdelta"


@dataclass(frozen=True)
class TensorDecl:
    name: str
    rank: int
    spec: SymmetrySpec
    print_name: str
    is_metric: bool = False
    metric: str | None = None
    curvature: str | None = None  # "riemann" | "ricci" | "scalar" | "weyl"
    traceless: bool = False


@dataclass(frozen=True)
class Manifold:
    name: str
    dimension: object  # int or sympy.Symbol
    alphabet: tuple[str, ...]


@dataclass(frozen=True)
class Metric:
    name: str
    manifold: str
    signature: int  # -1 Lorentzian (one negative eigenvalue), +1 Riemannian
    derivative: str
    flat: bool


@dataclass
class Session:
    manifolds: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    tensors: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    derivatives: dict = field(default_factory=dict)  # deriv name -> metric name
    riemann_sign: int = 1
    ricci_sign: int = 1
    curvature_relations: bool = True
    ansatz_counter: int = 0

    # -- declarations -------------------------------------------------------

    def _check_fresh(self, name: str):
        taken = (
            name in self.manifolds
            or name in self.metrics
            or name in self.tensors
            or name in self.constants
            or name in self.derivatives
        )
        if taken:
            raise DeclarationError(f"name {name!r} already declared")

    def declare_manifold(self, name: str, dimension, alphabet) -> Manifold:
        self._check_fresh(name)
        if self.manifolds:
            raise DeclarationError("only one manifold per session")
        if isinstance(dimension, str):
            dimension = self.declare_constant(dimension)
        m = Manifold(name, dimension, tuple(alphabet))
        self.manifolds[name] = m
        return m

    def declare_constant(self, name: str) -> sp.Symbol:
        if name in self.constants:
            return self.constants[name]
        self._check_fresh(name)
        sym = sp.Symbol(name)
        self.constants[name] = sym
        return sym

    def declare_tensor(
        self, name: str, rank: int, spec: SymmetrySpec | None = None,
        print_name: str | None = None, **kw,
    ) -> TensorDecl:
        if not name.startswith("#"):
            self._check_fresh(name)
        if spec is None:
            spec = SymmetrySpec.trivial(rank)
        if spec.rank != rank:
            raise DeclarationError(
                f"symmetry on {spec.rank} slots for rank-{rank} tensor {name}"
            )
        decl = TensorDecl(name, rank, spec, print_name or name, **kw)
        self.tensors[name] = decl
        return decl

    def declare_metric(
        self, name: str, manifold: str, signature: int = -1,
        derivative: str | None = None, flat: bool = False,
        print_name: str | None = None,
    ) -> Metric:
        if manifold not in self.manifolds:
            raise UndeclaredHeadError(f"manifold {manifold!r} not declared")
        if self.metrics:
            raise DeclarationError("only one metric per session")
        self._check_fresh(name)
        derivative = derivative or ("PD" if flat else "CD")
        metric = Metric(name, manifold, signature, derivative, flat)
        self.declare_tensor(
            name, 2, SymmetrySpec.symmetric(2), print_name or "g",
            is_metric=True, metric=name,
        )
        self.metrics[name] = metric
        self.derivatives[derivative] = name
        if not flat:
            self.declare_tensor(
                "Riemann", 4, SymmetrySpec.riemann(), "R",
                metric=name, curvature="riemann",
            )
            self.declare_tensor(
                "Ricci", 2, SymmetrySpec.symmetric(2), "R",
                metric=name, curvature="ricci",
            )
            self.declare_tensor(
                "RS", 0, SymmetrySpec.trivial(0), "R",
                metric=name, curvature="scalar",
            )
            self.declare_tensor(
                "Weyl", 4, SymmetrySpec.riemann(), "W",
                metric=name, curvature="weyl", traceless=True,
            )
        self.declare_tensor(
            INTERNAL_PERTURBATION, 2, SymmetrySpec.symmetric(2), "h",
            metric=name,
        )
        return metric

    # -- lookups ------------------------------------------------------------

    def tensor(self, head: str) -> TensorDecl:
        try:
            return self.tensors[head]
        except KeyError:
            raise UndeclaredHeadError(f"tensor {head!r} not declared") from None

    def is_metric(self, head: str) -> bool:
        decl = self.tensors.get(head)
        return decl is not None and decl.is_metric

    def the_manifold(self) -> Manifold:
        if not self.manifolds:
            raise DeclarationError("no manifold declared")
        return next(iter(self.manifolds.values()))

    def the_metric(self) -> Metric:
        if not self.metrics:
            raise DeclarationError("no metric declared")
        return next(iter(self.metrics.values()))

    def derivative_name(self) -> str:
        return self.the_metric().derivative

    def is_flat(self) -> bool:
        return self.the_metric().flat

    def dimension_value(self):
        return sp.sympify(self.the_manifold().dimension)

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.the_manifold().alphabet

    def alphabet_rank(self, label: str):
        """Sort key for labels: alphabet letters first, then generated names."""
        try:
            return (0, self.alphabet.index(label))
        except ValueError:
            return (1, label)

    def next_constants(self, count: int) -> list[sp.Symbol]:
        out = []
        for _ in range(count):
            self.ansatz_counter += 1
            out.append(self.declare_constant(f"C{self.ansatz_counter}"))
        return out

    def curvature_head(self, kind: str) -> str:
        for name, decl in self.tensors.items():
            if decl.curvature == kind:
                return name
        raise UndeclaredHeadError(f"no {kind} curvature tensor declared")


def standard_session(dimension=None, flat=False, signature=-1) -> Session:
    """Default session: manifold M with alphabet a..m, one metric g."""
    s = Session()
    letters = tuple("abcdefghijklm")
    s.declare_manifold("M", dimension if dimension is not None else "dim", letters)
    s.declare_metric("g", "M", signature=signature, flat=flat)
    return s
