"""Fermionic phase space: symbols over (π_j, ψ_j) and a finite Fock model.

The registry order is π_1, ψ_1, ..., π_n, ψ_n followed by any external odd
parameters (sources such as α, α*), which the star product treats as
constants.

Fock conventions: b_j is the Jordan-Wigner annihilator on occupation
bitstrings (mode 1 is the most significant bit), ψ̂_j = √ħ b_j and
π̂_j = i√ħ b_j†, so that {ψ̂_j, π̂_k} = iħ δ_jk.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from .grassmann import (
    GeneratorRegistry,
    GrassmannElement,
    RegistryError,
    berezin_integrate,
    grassmann_exp,
    left_derivative,
    parity,
    right_derivative,
    substitute,
)

__all__ = [
    "FermiSpace",
    "FockOperator",
    "fermi_star",
    "fermi_star_integral",
    "fermi_weyl_quantize",
    "fermi_trace",
    "fermi_wigner",
    "phase_space_integral",
    "fock_annihilator",
]


def _popcount(n: int) -> int:
    return bin(n).count("1")


@dataclass(frozen=True)
class FermiSpace:
    """n fermionic degrees of freedom plus named external odd parameters."""

    n: int = 1
    externals: tuple[str, ...] = ()
    hbar: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one fermionic degree of freedom")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "externals", tuple(self.externals))

    @staticmethod
    def pi_name(j: int) -> str:
        return f"pi{j}"

    @staticmethod
    def psi_name(j: int) -> str:
        return f"psi{j}"

    @cached_property
    def registry(self) -> GeneratorRegistry:
        names = []
        for j in range(1, self.n + 1):
            names += [self.pi_name(j), self.psi_name(j)]
        return GeneratorRegistry(names + list(self.externals))

    @cached_property
    def external_registry(self) -> GeneratorRegistry:
        return GeneratorRegistry(self.externals)

    @property
    def phase_names(self) -> tuple[str, ...]:
        return self.registry.names[: 2 * self.n]

    def pi(self, j: int = 1) -> GrassmannElement:
        return self.registry.gen(self.pi_name(j))

    def psi(self, j: int = 1) -> GrassmannElement:
        return self.registry.gen(self.psi_name(j))

    def ext(self, name: str) -> GrassmannElement:
        return self.registry.gen(name)

    def one(self) -> GrassmannElement:
        return self.registry.one()

    def phase_basis(self) -> list[GrassmannElement]:
        """The 4^n canonical monomials in π, ψ only."""
        k = 2 * self.n
        return [GrassmannElement(self.registry, {m: 1.0 + 0j}) for m in range(1 << k)]

    def _check(self, f: GrassmannElement) -> None:
        if f.registry != self.registry:
            raise RegistryError("symbol is not over this phase space's registry")


def fermi_star(space: FermiSpace, f: GrassmannElement, g: GrassmannElement) -> GrassmannElement:
    """f exp{(iħ/2) Σ_j (←∂π_j →∂ψ_j + ←∂ψ_j →∂π_j)} g.

    Each power of the bidifferential operator adds one more right
    derivative on f and one more left derivative on g; the series stops
    once either side is exhausted.
    """
    space._check(f)
    space._check(g)
    pairs_of_gens = []
    for j in range(1, space.n + 1):
        pairs_of_gens.append((space.pi_name(j), space.psi_name(j)))
        pairs_of_gens.append((space.psi_name(j), space.pi_name(j)))
    result = f * g
    pairs: list[tuple[GrassmannElement, GrassmannElement]] = [(f, g)]
    half = 1j * space.hbar / 2
    k = 0
    while pairs:
        k += 1
        nxt = []
        for F, G in pairs:
            for a, b in pairs_of_gens:
                F1 = right_derivative(F, a)
                if F1.is_zero():
                    continue
                G1 = left_derivative(G, b)
                if G1.is_zero():
                    continue
                nxt.append((F1, G1))
        pairs = nxt
        if not pairs:
            break
        term = space.registry.zero()
        for F, G in pairs:
            term = term + F * G
        result = result + (half**k / math.factorial(k)) * term
    return result


def fermi_star_integral(space: FermiSpace, f: GrassmannElement, g: GrassmannElement) -> GrassmannElement:
    """Integral form of the product with shifted copies of the phase space.

    (iħ/2)^{2n} ∫ f(π+Π', ψ+Ψ') g(π+Π'', ψ+Ψ'') exp{−(2i/ħ) Σ_j (Π'_j Ψ''_j − Π''_j Ψ'_j)}
    with the measure integrating, per degree of freedom, Ψ'' then Π'' then Ψ'
    then Π' (innermost first, left measure).
    """
    space._check(f)
    space._check(g)
    if space.n > 2:
        raise ValueError("integral form limited to n <= 2")
    n = space.n
    extra = []
    for j in range(1, n + 1):
        extra += [f"Pi'{j}", f"Psi'{j}", f"Pi''{j}", f"Psi''{j}"]
    big = space.registry.extend(*extra)
    lift = {name: big.gen(name) for name in space.registry.names}
    shift1 = dict(lift)
    shift2 = dict(lift)
    for j in range(1, n + 1):
        shift1[space.pi_name(j)] = big.gen(space.pi_name(j)) + big.gen(f"Pi'{j}")
        shift1[space.psi_name(j)] = big.gen(space.psi_name(j)) + big.gen(f"Psi'{j}")
        shift2[space.pi_name(j)] = big.gen(space.pi_name(j)) + big.gen(f"Pi''{j}")
        shift2[space.psi_name(j)] = big.gen(space.psi_name(j)) + big.gen(f"Psi''{j}")
    F = substitute(f, shift1, big)
    G = substitute(g, shift2, big)
    kernel = big.zero()
    for j in range(1, n + 1):
        kernel = kernel + big.gen(f"Pi'{j}") * big.gen(f"Psi''{j}") - big.gen(f"Pi''{j}") * big.gen(f"Psi'{j}")
    integrand = F * G * grassmann_exp((-2j / space.hbar) * kernel)
    order = []
    for j in range(1, n + 1):
        order += [f"Psi''{j}", f"Pi''{j}", f"Psi'{j}", f"Pi'{j}"]
    res = berezin_integrate(integrand, order, "left")
    res = (1j * space.hbar / 2) ** (2 * n) * res
    low = (1 << len(space.registry)) - 1
    if any(m & ~low for m in res.terms):
        raise AssertionError("integration variables left behind")
    return GrassmannElement(space.registry, res.terms)


def phase_space_integral(space: FermiSpace, f: GrassmannElement) -> GrassmannElement:
    """∫ Dπ Dψ f, normalised so that ∫ π_1ψ_1...π_nψ_n = 1."""
    space._check(f)
    order = []
    for j in range(1, space.n + 1):
        order += [space.pi_name(j), space.psi_name(j)]
    res = berezin_integrate(f, order, "left")
    return _restrict(res, space)


def _restrict(res: GrassmannElement, space: FermiSpace) -> GrassmannElement:
    """Re-express an element free of π, ψ over the external registry."""
    k = 2 * space.n
    if any(m & ((1 << k) - 1) for m in res.terms):
        raise ValueError("element still depends on phase-space generators")
    return GrassmannElement(space.external_registry, {m >> k: c for m, c in res.terms.items()})


# -- Fock model ----------------------------------------------------------------

_SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_ID = np.eye(2, dtype=complex)


def fock_annihilator(j: int, n: int) -> np.ndarray:
    """Jordan-Wigner b_j for n modes (j counted from 1)."""
    mats = [_Z] * (j - 1) + [_SIGMA] + [_ID] * (n - j)
    return reduce(np.kron, mats)


def _number_parity(n: int) -> np.ndarray:
    return np.array([_popcount(i) & 1 for i in range(1 << n)])


class FockOperator:
    """Σ_r M_r ⊗ e_r: complex 2^n matrices paired with external monomials.

    The Grassmann factor sits to the right of the operator, so a product
    picks up (−1)^{|e_r|} on the odd blocks of the right factor.
    """

    __slots__ = ("n", "ext", "blocks")

    def __init__(self, n: int, ext: GeneratorRegistry, blocks: dict[int, np.ndarray]):
        self.n = n
        self.ext = ext
        dim = 1 << n
        self.blocks = {}
        for m, M in blocks.items():
            M = np.asarray(M, dtype=complex)
            if M.shape != (dim, dim):
                raise ValueError("block has the wrong shape")
            if np.any(M != 0):
                self.blocks[m] = M

    @classmethod
    def from_matrix(cls, M: np.ndarray, n: int, ext: GeneratorRegistry | None = None) -> FockOperator:
        return cls(n, ext or GeneratorRegistry(()), {0: M})

    @property
    def dim(self) -> int:
        return 1 << self.n

    def matrix(self) -> np.ndarray:
        """The plain matrix; only valid without external dependence."""
        if any(m for m in self.blocks):
            raise ValueError("operator has Grassmann-valued entries")
        return self.blocks.get(0, np.zeros((self.dim, self.dim), dtype=complex))

    def entry(self, i: int, j: int) -> GrassmannElement:
        return GrassmannElement(self.ext, {m: complex(M[i, j]) for m, M in self.blocks.items()})

    def _split(self, M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        par = _number_parity(self.n)
        odd = (par[:, None] ^ par[None, :]).astype(bool)
        return np.where(odd, 0, M), np.where(odd, M, 0)

    def __add__(self, other: FockOperator) -> FockOperator:
        out = {m: M.copy() for m, M in self.blocks.items()}
        for m, M in other.blocks.items():
            out[m] = out.get(m, 0) + M
        return FockOperator(self.n, self.ext, out)

    def __sub__(self, other: FockOperator) -> FockOperator:
        return self + other * -1

    def __mul__(self, other) -> FockOperator:
        if not isinstance(other, FockOperator):
            return FockOperator(self.n, self.ext, {m: M * other for m, M in self.blocks.items()})
        if other.ext != self.ext or other.n != self.n:
            raise RegistryError("Fock operators over different spaces")
        out: dict[int, np.ndarray] = {}
        for r, A in self.blocks.items():
            for s, B in other.blocks.items():
                if r & s:
                    continue
                even, odd = self._split(B)
                prod = A @ (even - odd if _popcount(r) & 1 else even + odd)
                sign = _grassmann_merge_sign(r, s)
                out[r | s] = out.get(r | s, 0) + sign * prod
        return FockOperator(self.n, self.ext, out)

    __rmul__ = lambda self, c: self * c  # noqa: E731

    def allclose(self, other: FockOperator, tol: float = 1e-12) -> bool:
        keys = set(self.blocks) | set(other.blocks)
        zero = np.zeros((self.dim, self.dim))
        return all(np.allclose(self.blocks.get(k, zero), other.blocks.get(k, zero), atol=tol, rtol=0) for k in keys)

    def __repr__(self) -> str:
        return f"FockOperator(n={self.n}, blocks={ {m: M.tolist() for m, M in self.blocks.items()} })"


def _grassmann_merge_sign(s: int, t: int) -> int:
    swaps = 0
    while t:
        low = t & -t
        swaps += _popcount(s & ~((low << 1) - 1))
        t ^= low
    return -1 if swaps & 1 else 1


def _operator_for(space: FermiSpace, name: str) -> np.ndarray:
    rh = math.sqrt(space.hbar)
    for j in range(1, space.n + 1):
        if name == space.psi_name(j):
            return rh * fock_annihilator(j, space.n)
        if name == space.pi_name(j):
            return 1j * rh * fock_annihilator(j, space.n).conj().T
    raise RegistryError(f"{name!r} is not a phase-space generator")


def _weyl_word(space: FermiSpace, names: Sequence[str]) -> np.ndarray:
    """Antisymmetrised average of the operator products for one monomial."""
    dim = 1 << space.n
    k = len(names)
    if k == 0:
        return np.eye(dim, dtype=complex)
    ops = [_operator_for(space, nm) for nm in names]
    total = np.zeros((dim, dim), dtype=complex)
    for perm in itertools.permutations(range(k)):
        inv = sum(1 for a in range(k) for b in range(a + 1, k) if perm[a] > perm[b])
        prod = reduce(np.matmul, (ops[i] for i in perm))
        total += -prod if inv & 1 else prod
    return total / math.factorial(k)


def fermi_weyl_quantize(space: FermiSpace, f: GrassmannElement) -> FockOperator:
    space._check(f)
    if space.n > 3:
        raise ValueError("Fock model limited to n <= 3")
    k = 2 * space.n
    low = (1 << k) - 1
    blocks: dict[int, np.ndarray] = {}
    cache: dict[int, np.ndarray] = {}
    for m, c in f.terms.items():
        phase, ext = m & low, m >> k
        if phase not in cache:
            cache[phase] = _weyl_word(space, f.monomial_names(phase))
        # canonical order already puts π/ψ before the externals
        blocks[ext] = blocks.get(ext, 0) + complex(c) * cache[phase]
    return FockOperator(space.n, space.external_registry, blocks)


def fermi_trace(space: FermiSpace, A: FockOperator, graded: bool = True):
    """(iħ)^{-n} times the supertrace (default) or the plain diagonal sum.

    Only the graded version obeys tr{AB} = (−1)^{e_A e_B} tr{BA}.
    """
    signs = np.where(_number_parity(space.n) == 1, -1.0, 1.0) if graded else np.ones(A.dim)
    norm = (1j * space.hbar) ** (-space.n)
    terms = {m: norm * complex(np.sum(signs * np.diag(M))) for m, M in A.blocks.items()}
    out = GrassmannElement(A.ext, terms)
    if not A.ext.names:
        return out.body()
    return out


@dataclass
class _QuantizerInverse:
    basis_masks: list[int]
    solve: np.ndarray


_INVERSE_CACHE: dict[tuple[int, float], _QuantizerInverse] = {}


def _quantizer_inverse(space: FermiSpace) -> _QuantizerInverse:
    key = (space.n, space.hbar)
    if key not in _INVERSE_CACHE:
        plain = FermiSpace(space.n, (), space.hbar)
        masks = list(range(1 << (2 * space.n)))
        cols = [_weyl_word(plain, GrassmannElement(plain.registry, {}).monomial_names(m)).ravel() for m in masks]
        Q = np.array(cols).T
        _INVERSE_CACHE[key] = _QuantizerInverse(masks, np.linalg.inv(Q))
    return _INVERSE_CACHE[key]


def fermi_wigner(space: FermiSpace, rho: FockOperator | np.ndarray) -> GrassmannElement:
    """Symbol of a density matrix, normalised so ∫DπDψ ρ_W = ħ^{-n} str(ρ).

    The symbol is (−i)^n times the inverse Weyl image of ρ.
    """
    if space.n > 2:
        raise ValueError("Wigner symbols limited to n <= 2")
    M = rho.matrix() if isinstance(rho, FockOperator) else np.asarray(rho, dtype=complex)
    inv = _quantizer_inverse(space)
    coeffs = inv.solve @ M.ravel()
    plain = FermiSpace(space.n, (), space.hbar)
    sym = GrassmannElement(plain.registry, {m: complex(c) for m, c in zip(inv.basis_masks, coeffs) if abs(c) > 1e-15})
    sym = (-1j) ** space.n * sym
    return GrassmannElement(space.registry, sym.terms)


def symbol_parity(f: GrassmannElement) -> str:
    return parity(f)
