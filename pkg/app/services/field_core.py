"""
Prime-field arithmetic and the structured decode systems.

All field arithmetic runs on galois FieldArrays. Integers that come from
messages or configuration are reduced into the field at the boundary.
"""

from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import galois
import numpy as np
from pydantic import BaseModel, Field

from app.logging_config import get_logger
from app.models.params import SchemeCase, SchemeParams, as_case
from app.utils.errors import (
    DimensionMismatch,
    FieldConfigError,
    SingularSystem,
    ZeroInverse,
)


logger = get_logger(__name__)

FieldElement = galois.FieldArray
IntLike = Union[int, np.integer, galois.FieldArray]


class FieldConfig:
    """
    Modulus plus the globally known evaluation constants.

    f holds ell distinct constants, alpha holds one distinct nonzero constant
    per database; no f_i may coincide with any alpha_n.
    """

    def __init__(self, q: int, f: Sequence[int], alpha: Sequence[int]):
        if q < 2 or not galois.is_prime(q):
            raise FieldConfigError(f"q={q} is not prime")

        f = tuple(int(v) for v in f)
        alpha = tuple(int(v) for v in alpha)
        for name, values in (("f", f), ("alpha", alpha)):
            if any(not 0 <= v < q for v in values):
                raise FieldConfigError(f"{name} constants must lie in [0, {q})")
            if len(set(values)) != len(values):
                raise FieldConfigError(f"{name} constants must be distinct: {values}")
        if 0 in alpha:
            raise FieldConfigError("alpha constants must be nonzero")
        if set(f) & set(alpha):
            raise FieldConfigError(f"f and alpha share constants: {sorted(set(f) & set(alpha))}")
        if len(f) + len(alpha) + 1 > q:
            raise FieldConfigError(
                f"q={q} too small for {len(f)} f-constants and {len(alpha)} databases"
            )

        self.q = q
        self.f = f
        self.alpha = alpha
        self.GF = galois.GF(q)

    @classmethod
    def default(cls, q: int, ell: int, n_databases: int) -> "FieldConfig":
        """f_i = i and alpha_n = ell + n."""
        return cls(q, range(1, ell + 1), range(ell + 1, ell + n_databases + 1))

    @classmethod
    def for_params(cls, params: SchemeParams) -> "FieldConfig":
        return cls.default(params.q, params.ell, params.num_databases)

    @property
    def ell(self) -> int:
        return len(self.f)

    @property
    def n_databases(self) -> int:
        return len(self.alpha)

    def alpha_of(self, n: int) -> int:
        """Evaluation constant of database n (1-based)."""
        if not 1 <= n <= len(self.alpha):
            raise DimensionMismatch(f"database index {n} outside 1..{len(self.alpha)}")
        return self.alpha[n - 1]

    def element(self, value: IntLike) -> FieldElement:
        return self.GF(int(value) % self.q)

    def vector(self, values: Iterable[IntLike]) -> FieldElement:
        return self.GF([int(v) % self.q for v in values])

    def powers(self, base: int, exponents: Iterable[int]) -> FieldElement:
        """base ** e for each exponent; negative exponents need a nonzero base."""
        return self.GF([pow(int(base), e, self.q) for e in exponents])

    def check_matches(self, params: SchemeParams) -> None:
        """Raise unless the constants fit the scheme parameters."""
        if (self.q, self.ell, self.n_databases) != (
            params.q,
            params.ell,
            params.num_databases,
        ):
            raise FieldConfigError(
                f"field config (q={self.q}, ell={self.ell}, N={self.n_databases}) does not "
                f"match params (q={params.q}, ell={params.ell}, N={params.num_databases})"
            )

    def __repr__(self) -> str:
        return f"FieldConfig(q={self.q}, f={self.f}, alpha={self.alpha})"


def field_inv(x: IntLike, cfg: FieldConfig) -> FieldElement:
    """
    Multiplicative inverse in F_q.

    Raises:
        ZeroInverse: If x is zero mod q
    """
    value = int(x) % cfg.q
    if value == 0:
        raise ZeroInverse("zero has no multiplicative inverse")
    return cfg.element(value) ** -1


def random_elements(
    cfg: FieldConfig, shape: Union[int, Tuple[int, ...]], rng: Optional[np.random.Generator]
) -> FieldElement:
    """Uniform iid field elements; all zero when rng is None (zero-noise builds)."""
    if rng is None:
        return cfg.GF.Zeros(shape)
    return cfg.GF.Random(shape, seed=rng)


def kron(a: FieldElement, b: FieldElement) -> FieldElement:
    """Kronecker product of two 2-D field matrices."""
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(rows, cols)


def diagonal(values: FieldElement) -> FieldElement:
    """Square diagonal matrix from a 1-D field vector."""
    size = values.shape[0]
    out = type(values).Zeros((size, size))
    out[np.arange(size), np.arange(size)] = values
    return out


class GammaDiagonal:
    """
    diag((f_k - alpha_n)^-1) for one database.

    The inverse diagonal, entry k = f_k - alpha_n, is the prefactor used by
    case 1 answers and case 3 queries.
    """

    def __init__(self, n: int, cfg: FieldConfig):
        alpha = cfg.alpha_of(n)
        self.n = n
        self.inverse_diag = cfg.vector(fk - alpha for fk in cfg.f)
        self.diag = self.inverse_diag ** -1

    def matrix(self) -> FieldElement:
        return diagonal(self.diag)

    def inverse_matrix(self) -> FieldElement:
        return diagonal(self.inverse_diag)


class LayoutKind(str, Enum):
    """Unknown layout of a decode system."""

    CAUCHY = "cauchy"
    NEGATIVE_POWER = "negative_power"


class DecodeLayout(BaseModel):
    """
    Row layout of a decode system.

    CAUCHY rows are [1/(f_1-a), ..., 1/(f_ell-a), 1, a, ..., a^d] and
    NEGATIVE_POWER rows are [a^-ell, ..., a^-1, 1, a, ..., a^d].
    """

    kind: LayoutKind = Field(..., description="Row family")
    ell: int = Field(..., ge=1, description="Number of data unknowns")
    degree: int = Field(..., ge=0, description="Degree d of the interference polynomial")

    @classmethod
    def for_case(cls, case: Union[int, SchemeCase], ell: int) -> "DecodeLayout":
        case = as_case(case)
        if case == SchemeCase.UNCODED_WITHIN:
            return cls(kind=LayoutKind.CAUCHY, ell=ell, degree=ell + 1)
        if case == SchemeCase.CODED_WITHIN:
            return cls(kind=LayoutKind.NEGATIVE_POWER, ell=ell, degree=2 * ell)
        if case == SchemeCase.UNCODED_TWO_STAGE:
            return cls(kind=LayoutKind.CAUCHY, ell=ell, degree=ell + 3)
        return cls(kind=LayoutKind.NEGATIVE_POWER, ell=ell, degree=4 * ell)

    @property
    def size(self) -> int:
        """Number of unknowns, equal to the required number of databases."""
        return self.ell + self.degree + 1

    def row(self, alpha: int, cfg: FieldConfig) -> List[int]:
        q = cfg.q
        if self.kind == LayoutKind.CAUCHY:
            head = [pow(fk - alpha, -1, q) for fk in cfg.f[: self.ell]]
        else:
            head = [pow(alpha, -i, q) for i in range(self.ell, 0, -1)]
        return head + [pow(alpha, j, q) for j in range(self.degree + 1)]

    def matrix(self, cfg: FieldConfig, alphas: Optional[Sequence[int]] = None) -> FieldElement:
        """Stack one row per evaluation constant (all databases by default)."""
        alphas = cfg.alpha if alphas is None else alphas
        return cfg.GF([self.row(a, cfg) for a in alphas])

    class Config:
        frozen = True


def solve_mixed_vandermonde(
    rows: FieldElement, rhs: FieldElement, layout: DecodeLayout
) -> FieldElement:
    """
    Solve a decode system.

    Args:
        rows: Square matrix built by ``layout.matrix``
        rhs: One answer per row
        layout: Layout the rows follow

    Returns:
        The full solution vector; its first ``layout.ell`` entries are the
        data unknowns (in W_ell..W_1 order for NEGATIVE_POWER layouts)

    Raises:
        DimensionMismatch: If the shapes do not fit the layout
        SingularSystem: If the matrix is not invertible
    """
    size = layout.size
    if rows.shape != (size, size) or rhs.shape != (size,):
        raise DimensionMismatch(
            f"decode system needs a {size}x{size} matrix and {size} answers, "
            f"got {rows.shape} and {rhs.shape}"
        )
    try:
        return np.linalg.solve(rows, rhs)
    except np.linalg.LinAlgError as e:
        logger.warning(
            "Singular decode system",
            extra={"layout": layout.kind.value, "ell": layout.ell, "degree": layout.degree},
        )
        raise SingularSystem(f"decode matrix is singular: {e}") from e


def lagrange_denominator(k: int, cfg: FieldConfig) -> FieldElement:
    """prod over r != k of (f_r - f_k), with k 1-based."""
    if not 1 <= k <= cfg.ell:
        raise DimensionMismatch(f"k={k} outside 1..{cfg.ell}")
    fk = cfg.f[k - 1]
    product = 1
    for r, fr in enumerate(cfg.f, start=1):
        if r != k:
            product = product * (fr - fk) % cfg.q
    return cfg.element(product)
