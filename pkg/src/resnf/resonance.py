"""Exact resonance structure of a diagonal linear part.

A frequency model stores each eigenvalue ``lambda_k`` as an exact
Gaussian-rational coordinate vector over a small basis of named real
symbols that are assumed rationally independent.  Resonance questions
(``lambda . p = 0``?) are decided exactly on the coordinates; numeric
symbol values are used for divisions, flows and Diophantine audits, and
a coherence audit verifies that within the truncation window the values
produce exactly the same vanishing pattern as the symbols.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    CutoffTooSmall,
    ModelError,
    NormalFormError,
    UniqueFactorizationViolation,
)
from .fields import GR_ZERO, GaussianRational, VectorField
from .indexing import (
    Mode,
    MultiIndex,
    TruncationContext,
    format_mode,
    iter_indices,
    mode_key,
    mode_momentum,
    mode_weight,
    smoothing_gap,
)

CoordVector = dict[int, GaussianRational]
"""Sparse symbol-index -> Gaussian-rational coefficient map; canonical
form never stores zero coefficients, so emptiness is the zero test."""


def _canon(coord: Mapping[int, GaussianRational]) -> CoordVector:
    return {i: c for i, c in coord.items() if not c.is_zero}


def _coord_sub(a: CoordVector, b: CoordVector) -> CoordVector:
    out = dict(a)
    for i, c in b.items():
        acc = out.get(i, GR_ZERO) - c
        if acc.is_zero:
            out.pop(i, None)
        else:
            out[i] = acc
    return out


class FrequencyModel:
    """Eigenvalues of the diagonal linear part over a symbol basis.

    Parameters
    ----------
    name : str
        Label used in reports.
    symbols : sequence of (name, value)
        Basis of reals assumed rationally independent.  Values are exact
        ``Fraction`` stand-ins (enables exact arithmetic end-to-end) or
        floats (restricts the model to numeric audits).
    coordinates : mapping Mode -> mapping symbol-name -> coefficient
        Gaussian-rational coordinates of each eigenvalue.  Coefficients
        may be int, Fraction, GaussianRational, or an (re, im) pair.
    alpha, phases :
        Optional growth exponent and phase map declaring the asymptotic
        eigenvalue shape ``<k>**alpha * exp(i*phi_k)`` used by the
        Diophantine fast path; when absent the eigenvalues themselves
        are used.
    separation : float, optional
        Declared lower bound for ``|exp(i*phi_k) - exp(i*phi_k')|`` on
        opposite modes; carried into reports.
    """

    __slots__ = (
        "name",
        "symbol_names",
        "symbol_values",
        "_coords",
        "alpha",
        "phases",
        "separation",
    )

    def __init__(
        self,
        name: str,
        symbols: Sequence[tuple[str, Fraction | float]],
        coordinates: Mapping[Mode, Mapping[str, object]],
        *,
        alpha: float | None = None,
        phases: Mapping[Mode, float] | None = None,
        separation: float | None = None,
    ):
        self.name = name
        self.symbol_names = tuple(nm for nm, _ in symbols)
        if len(set(self.symbol_names)) != len(self.symbol_names):
            raise ModelError("duplicate symbol names in frequency model")
        self.symbol_values = tuple(val for _, val in symbols)
        index = {nm: i for i, nm in enumerate(self.symbol_names)}
        coords: dict[Mode, CoordVector] = {}
        for k, row in coordinates.items():
            if not isinstance(k, Mode):
                k = Mode(*k)
            vec: CoordVector = {}
            for sym, coeff in row.items():
                if sym not in index:
                    raise ModelError("unknown symbol %r for mode %s" % (sym, (k,)))
                g = _as_coeff(coeff)
                if not g.is_zero:
                    vec[index[sym]] = g
            coords[k] = vec
        self._coords = coords
        self.alpha = None if alpha is None else float(alpha)
        self.phases = None if phases is None else {
            (k if isinstance(k, Mode) else Mode(*k)): float(v)
            for k, v in phases.items()
        }
        self.separation = None if separation is None else float(separation)

    # -- capabilities ----------------------------------------------------

    @property
    def exact_capable(self) -> bool:
        """True when all symbol values are rational, so divisions by
        divisor values stay exact."""
        return all(isinstance(v, Fraction) for v in self.symbol_values)

    def covered_modes(self) -> tuple[Mode, ...]:
        return tuple(sorted(self._coords, key=mode_key))

    def validate(self, ctx: TruncationContext) -> None:
        """Check the model covers the context with nonzero eigenvalues."""
        for k in ctx.modes():
            vec = self._coords.get(k)
            if vec is None:
                raise ModelError("mode %s has no eigenvalue in model %s" % (format_mode(k), self.name))
            if not vec:
                raise ModelError(
                    "eigenvalue of mode %s is zero; the linear part must be "
                    "nondegenerate" % format_mode(k)
                )

    # -- exact coordinates ------------------------------------------------

    def coord(self, k: Mode) -> CoordVector:
        try:
            return self._coords[k]
        except KeyError:
            raise ModelError("mode %s not covered by model %s" % (format_mode(k), self.name)) from None

    def combination_coord(self, p: MultiIndex) -> CoordVector:
        """Exact coordinates of ``lambda . p`` for a signed index ``p``."""
        acc: CoordVector = {}
        for k, e in p.items():
            for i, c in self.coord(k).items():
                cur = acc.get(i, GR_ZERO) + c * e
                if cur.is_zero:
                    acc.pop(i, None)
                else:
                    acc[i] = cur
        return acc

    def is_resonant_combination(self, p: MultiIndex) -> bool:
        """Exact test of ``lambda . p = 0`` (symbolic, value-independent)."""
        return not self.combination_coord(p)

    def divisor_coord(self, q: MultiIndex, k: Mode) -> CoordVector:
        return _coord_sub(self.combination_coord(q), self.coord(k))

    def is_resonant_pair(self, q: MultiIndex, k: Mode) -> bool:
        """Exact test of ``lambda . (q - e_k) = 0``."""
        return not self.divisor_coord(q, k)

    # -- numeric values ----------------------------------------------------

    def coord_value_exact(self, vec: CoordVector) -> GaussianRational:
        if not self.exact_capable:
            raise ModelError(
                "model %s has irrational symbol values; exact arithmetic "
                "is unavailable" % self.name
            )
        acc = GR_ZERO
        for i, c in vec.items():
            acc = acc + c * self.symbol_values[i]
        return acc

    def coord_value_float(self, vec: CoordVector) -> complex:
        acc = 0j
        for i, c in vec.items():
            acc += complex(c) * float(self.symbol_values[i])
        return acc

    def coord_value(self, vec: CoordVector, ctx: TruncationContext):
        return (
            self.coord_value_exact(vec) if ctx.exact else self.coord_value_float(vec)
        )

    def eigenvalue(self, k: Mode, ctx: TruncationContext):
        return self.coord_value(self.coord(k), ctx)

    def eigenvalue_complex(self, k: Mode) -> complex:
        return self.coord_value_float(self.coord(k))

    def divisor_value(self, q: MultiIndex, k: Mode, ctx: TruncationContext):
        return self.coord_value(self.divisor_coord(q, k), ctx)

    def asymptotic_eigenvalue(self, k: Mode) -> complex:
        """The declared model shape ``<k>**alpha * exp(i*phi_k)``; falls
        back to the eigenvalue itself when no shape is declared."""
        if self.alpha is None or self.phases is None or k not in self.phases:
            return self.eigenvalue_complex(k)
        return mode_weight(k) ** self.alpha * cmath.exp(1j * self.phases[k])

    # -- derived fields -----------------------------------------------------

    def linear_field(self, ctx: TruncationContext) -> VectorField:
        """The diagonal linear vector field ``sum_k lambda_k x_k d/dx_k``."""
        self.validate(ctx)
        return VectorField(
            ctx,
            (
                (k, MultiIndex.unit(k), self.eigenvalue(k, ctx))
                for k in ctx.modes()
            ),
        )

    def __repr__(self):
        return "FrequencyModel(%s, %d modes, %d symbols)" % (
            self.name,
            len(self._coords),
            len(self.symbol_names),
        )


def _as_coeff(value) -> GaussianRational:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return GaussianRational(Fraction(value[0]), Fraction(value[1]))
    raise ModelError("cannot interpret %r as an exact coefficient" % (value,))


def _integer_view(model: FrequencyModel, modes: tuple[Mode, ...]):
    """Rescale the model onto integers for the enumeration loops.

    Zero tests and equalities are invariant under a common positive
    scale, so coordinates (and, for exact models, values) are multiplied
    by the lcm of their denominators once and the inner loops run on
    plain integer arithmetic.  Returns ``(icoords, ivalues, fvalues)``
    where ``icoords[k]`` is a sorted ``(symbol, re, im)`` tuple usable as
    an equality key, ``ivalues[k]`` is an integer ``(re, im)`` pair (or
    ``None`` for float-valued models) and ``fvalues[k]`` is the complex
    eigenvalue.
    """
    coords = {k: model.coord(k) for k in modes}
    cden = 1
    for vec in coords.values():
        for c in vec.values():
            cden = math.lcm(cden, c.re.denominator, c.im.denominator)
    icoords = {
        k: tuple(
            (i, int(c.re * cden), int(c.im * cden))
            for i, c in sorted(vec.items())
        )
        for k, vec in coords.items()
    }
    ivalues = None
    if model.exact_capable:
        vals = {k: model.coord_value_exact(vec) for k, vec in coords.items()}
        vden = 1
        for v in vals.values():
            vden = math.lcm(vden, v.re.denominator, v.im.denominator)
        ivalues = {
            k: (int(v.re * vden), int(v.im * vden)) for k, v in vals.items()
        }
    fvalues = {k: model.coord_value_float(vec) for k, vec in coords.items()}
    return icoords, ivalues, fvalues


def _combination_key(
    q: MultiIndex, icoords: Mapping[Mode, tuple[tuple[int, int, int], ...]]
) -> tuple[tuple[int, int, int], ...]:
    """Integer equality key of ``lambda . q`` (same form as ``icoords``)."""
    acc: dict[int, list[int]] = {}
    for k, e in q.items():
        for i, re_c, im_c in icoords[k]:
            cur = acc.get(i)
            if cur is None:
                acc[i] = [re_c * e, im_c * e]
            else:
                cur[0] += re_c * e
                cur[1] += im_c * e
    return tuple((i, v[0], v[1]) for i, v in sorted(acc.items()) if v[0] or v[1])


# ---------------------------------------------------------------------------
# resonance module enumeration
# ---------------------------------------------------------------------------


class ResonanceModule:
    """Window enumeration of the resonance structure of a model.

    Holds the nonnegative resonance lattice elements up to the degree
    cutoff, the extracted generator sets, the signed one-step translates
    per direction, and the derived order bounds.
    """

    __slots__ = (
        "model",
        "ctx",
        "q_generators",
        "p_generators",
        "module_elements",
        "M",
        "M1",
        "m_star_bound",
        "m_star_minimal",
        "violations",
        "resonant_pair_count",
        "_pair_sums",
    )

    def __init__(
        self,
        model: FrequencyModel,
        ctx: TruncationContext,
        q_generators: tuple[MultiIndex, ...],
        p_generators: dict[Mode, tuple[MultiIndex, ...]],
        module_elements: frozenset[MultiIndex],
        violations: tuple[tuple[int, MultiIndex, Mode], ...],
        resonant_pair_count: int,
    ):
        self.model = model
        self.ctx = ctx
        self.q_generators = q_generators
        self.p_generators = p_generators
        self.module_elements = module_elements
        self.M = max((g.degree for g in q_generators), default=0)
        self.M1 = max(
            (
                (p + MultiIndex.unit(k)).degree
                for k, gens in p_generators.items()
                for p in gens
            ),
            default=0,
        )
        self.m_star_bound = 2 * self.M + self.M1
        self.m_star_minimal = 1 + max((s for s, _, _ in violations), default=-1)
        self.violations = violations
        self.resonant_pair_count = resonant_pair_count
        sums = set()
        for i, a in enumerate(q_generators):
            for b in q_generators[i:]:
                sums.add(a + b)
        self._pair_sums = tuple(sorted(sums, key=lambda s: s.sort_key()))

    def classify(self, q: MultiIndex) -> int:
        """Ideal class of a nonnegative exponent: 2 if two generators
        (repetition allowed) fit inside ``q``, 1 if one does, else 0."""
        for s in self._pair_sums:
            if q.contains(s):
                return 2
        for g in self.q_generators:
            if q.contains(g):
                return 1
        return 0

    def summary(self) -> dict:
        return {
            "model": self.model.name,
            "q_generators": [str(g) for g in self.q_generators],
            "p_generators": {
                format_mode(k): [str(p) for p in gens]
                for k, gens in sorted(self.p_generators.items(), key=lambda it: mode_key(it[0]))
                if gens
            },
            "module_count": len(self.module_elements),
            "resonant_pair_count": self.resonant_pair_count,
            "M": self.M,
            "M1": self.M1,
            "m_star_bound": self.m_star_bound,
            "m_star_minimal": self.m_star_minimal,
            "violation_count": len(self.violations),
            "window_degree": self.ctx.degree_cutoff,
            "window_note": (
                "generator sets are certified only within the enumeration "
                "window; elements beyond degree %d are not examined"
                % self.ctx.degree_cutoff
            ),
        }

    def __repr__(self):
        return (
            "ResonanceModule(%d generators, M=%d, M1=%d, minimal order %d)"
            % (len(self.q_generators), self.M, self.M1, self.m_star_minimal)
        )


def classify_exponent(q: MultiIndex, module: ResonanceModule) -> int:
    return module.classify(q)


def split_ideals(
    x: VectorField, module: ResonanceModule
) -> tuple[VectorField, VectorField, VectorField]:
    """Split a field into its class-0, class-1 and class-2 parts."""
    x0 = x.project(lambda k, q: module.classify(q) == 0)
    x1 = x.project(lambda k, q: module.classify(q) == 1)
    x2 = x.project(lambda k, q: module.classify(q) == 2)
    return x0, x1, x2


def enumerate_resonance(ctx: TruncationContext, model: FrequencyModel) -> ResonanceModule:
    """Enumerate the resonance lattice and translates within the window.

    Walks every nonnegative exponent ``q`` with ``|q| <= D`` (module
    candidates and, per direction ``k``, the signed translates
    ``q - e_k``), decides resonance exactly on symbol coordinates, and
    cross-checks that numeric symbol values vanish in exactly the same
    places (a value-coherence audit guarding the divisions performed by
    the solvers over the larger field window ``|q| <= D + 1``).
    """
    model.validate(ctx)
    D = ctx.degree_cutoff
    modes = ctx.modes()
    momentum_on = ctx.momentum_enabled

    icoords, ivalues, fvalues = _integer_view(model, modes)
    exactly = ivalues is not None
    mom_of = {k: mode_momentum(k) for k in modes}

    module_elements: list[MultiIndex] = []
    resonant_pairs: list[tuple[MultiIndex, Mode]] = []
    for q in iter_indices(modes, D + 1, min_degree=1):
        acc: dict[int, list[int]] = {}
        vre = vim = 0
        fval = 0j
        for k, e in q.items():
            for i, re_c, im_c in icoords[k]:
                cur = acc.get(i)
                if cur is None:
                    acc[i] = [re_c * e, im_c * e]
                else:
                    cur[0] += re_c * e
                    cur[1] += im_c * e
            if exactly:
                iv = ivalues[k]
                vre += iv[0] * e
                vim += iv[1] * e
            else:
                fval += fvalues[k] * e
        combo_key = tuple(
            (i, v[0], v[1]) for i, v in sorted(acc.items()) if v[0] or v[1]
        )
        if exactly:
            value_zero_q = vre == 0 and vim == 0
        else:
            value_zero_q = abs(fval) <= 1e-9
        _require_coherent(model, q, None, not combo_key, value_zero_q)
        if (
            q.degree <= D
            and not combo_key
            and (not momentum_on or q.momentum_sum == 0)
        ):
            module_elements.append(q)
        momentum_q = q.momentum_sum if momentum_on else 0
        in_window = q.degree <= D
        for k in modes:
            if momentum_on and momentum_q != mom_of[k]:
                continue
            # divisor lambda.(q - e_k) vanishes iff the integer keys agree
            symbolic_zero = combo_key == icoords[k]
            if exactly:
                iv = ivalues[k]
                value_zero = vre == iv[0] and vim == iv[1]
            else:
                value_zero = abs(fval - fvalues[k]) <= 1e-9
            _require_coherent(model, q, k, symbolic_zero, value_zero)
            if symbolic_zero and in_window:
                resonant_pairs.append((q, k))

    module_elements.sort(key=lambda e: (e.degree, e.sort_key()))
    element_set = frozenset(module_elements)

    q_generators = _extract_generators(module_elements, element_set)
    for g in q_generators:
        if g.degree >= D:
            raise CutoffTooSmall(
                "module generator %s touches the degree window %d; raise the "
                "cutoff to certify completeness" % (g, D)
            )
    _check_unique_factorization(module_elements, q_generators)

    p_generators, translate_elements = _extract_translates(
        resonant_pairs, element_set, q_generators
    )
    for k, gens in p_generators.items():
        for p in gens:
            if (p + MultiIndex.unit(k)).degree >= D:
                raise CutoffTooSmall(
                    "translate generator %s for direction %s touches the "
                    "degree window %d" % (p, format_mode(k), D)
                )
    _check_translate_factorization(
        translate_elements, p_generators, element_set, q_generators
    )

    violations = _scan_violations(resonant_pairs, q_generators)

    return ResonanceModule(
        model,
        ctx,
        q_generators,
        p_generators,
        element_set,
        violations,
        len(resonant_pairs),
    )


def _require_coherent(model, q, k, symbolic_zero: bool, numeric_zero: bool) -> None:
    if symbolic_zero != numeric_zero:
        where = "lambda . %s" % (q,)
        if k is not None:
            where = "divisor of x^%s d/dx_%s" % (q, format_mode(k))
        raise ModelError(
            "symbol coordinates and numeric values disagree about the "
            "vanishing of %s in model %s: the declared values are not "
            "independent enough for this window" % (where, model.name)
        )


def _extract_generators(
    elements: list[MultiIndex], element_set: frozenset[MultiIndex]
) -> tuple[MultiIndex, ...]:
    generators = []
    for e in elements:
        decomposable = any(
            a.degree < e.degree and e.contains(a) and (e - a) in element_set
            for a in elements
        )
        if not decomposable:
            generators.append(e)
    return tuple(generators)


def _count_factorizations(
    target: MultiIndex, generators: tuple[MultiIndex, ...], _memo=None
) -> int:
    """Number of multisets of generators summing to ``target``."""
    if _memo is None:
        _memo = {}

    def rec(rem: MultiIndex, i: int) -> int:
        if rem.is_zero:
            return 1
        if i >= len(generators):
            return 0
        key = (rem, i)
        if key in _memo:
            return _memo[key]
        total = rec(rem, i + 1)
        if rem.contains(generators[i]):
            total += rec(rem - generators[i], i)
        _memo[key] = total
        return total

    return rec(target, 0)


def _check_unique_factorization(
    elements: list[MultiIndex], generators: tuple[MultiIndex, ...]
) -> None:
    for e in elements:
        n = _count_factorizations(e, generators)
        if n != 1:
            raise UniqueFactorizationViolation(
                "lattice element %s admits %d generator factorizations; the "
                "frequency model violates the unique-sum hypothesis" % (e, n)
            )


def _extract_translates(
    resonant_pairs: list[tuple[MultiIndex, Mode]],
    element_set: frozenset[MultiIndex],
    q_generators: tuple[MultiIndex, ...],
):
    """Per direction, the signed resonant translates outside the lattice
    and their minimal elements."""
    per_direction: dict[Mode, list[MultiIndex]] = {}
    for q, k in resonant_pairs:
        p = q - MultiIndex.unit(k)
        if p.is_zero or p in element_set:
            continue  # lattice translates are not "new" directions
        per_direction.setdefault(k, []).append(p)
    p_generators: dict[Mode, tuple[MultiIndex, ...]] = {}
    for k, plist in per_direction.items():
        plist.sort(key=lambda p: (p.l1, p.sort_key()))
        pset = set(plist)
        gens = []
        for p in plist:
            reducible = any(
                (p - g) in pset for g in q_generators if not (p - g).is_zero
            )
            if not reducible:
                gens.append(p)
        p_generators[k] = tuple(gens)
    return p_generators, per_direction


def _check_translate_factorization(
    translate_elements: dict[Mode, list[MultiIndex]],
    p_generators: dict[Mode, tuple[MultiIndex, ...]],
    element_set: frozenset[MultiIndex],
    q_generators: tuple[MultiIndex, ...],
) -> None:
    for k, plist in translate_elements.items():
        gens = p_generators.get(k, ())
        for p in plist:
            ways = 0
            for g in gens:
                rem = p - g
                if rem.is_zero:
                    ways += 1
                elif rem.is_nonnegative and rem in element_set:
                    ways += _count_factorizations(rem, q_generators)
            if ways != 1:
                raise UniqueFactorizationViolation(
                    "translate %s (direction %s) admits %d factorizations "
                    "as generator plus lattice element" % (p, format_mode(k), ways)
                )


def _scan_violations(
    resonant_pairs: list[tuple[MultiIndex, Mode]],
    q_generators: tuple[MultiIndex, ...],
) -> tuple[tuple[int, MultiIndex, Mode], ...]:
    """Resonant field exponents that are not absorbed by two generators;
    their maximal scaling order determines the minimal valid cutoff."""
    pair_sums = []
    for i, a in enumerate(q_generators):
        for b in q_generators[i:]:
            pair_sums.append(a + b)
    out = []
    for q, k in resonant_pairs:
        if any(q.contains(s) for s in pair_sums):
            continue
        out.append((q.degree - 1, q, k))
    out.sort(key=lambda row: (row[0], row[1].sort_key(), mode_key(row[2])))
    return tuple(out)


# ---------------------------------------------------------------------------
# Diophantine audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiophantineReport:
    """Result of the small-divisor lower-bound scan."""

    tau: float
    gamma_max: float
    worst_p: MultiIndex | None
    enumerated_count: int
    degree_bound: int
    mode_cutoff: int
    fast_path_hits: int
    fast_path_enabled: bool
    unconstrained: bool

    def as_dict(self) -> dict:
        return {
            "tau": self.tau,
            "gamma_max": self.gamma_max if not self.unconstrained else None,
            "worst_p": None if self.worst_p is None else str(self.worst_p),
            "enumerated_count": self.enumerated_count,
            "degree_bound": self.degree_bound,
            "mode_cutoff": self.mode_cutoff,
            "fast_path_hits": self.fast_path_hits,
            "fast_path_enabled": self.fast_path_enabled,
            "unconstrained": self.unconstrained,
        }


def _signed_candidates(modes, degree_bound: int):
    """Signed vectors with entries >= -1, at most one negative entry,
    l1 norm <= bound: exactly the translates ``q - e_k`` reachable from
    nonnegative exponents."""
    for base in iter_indices(modes, degree_bound):
        if not base.is_zero:
            yield base
        if base.degree + 1 <= degree_bound:
            for k in modes:
                if base.get(k) == 0:
                    yield base.add_unit(k, -1)


def diophantine_audit(
    model: FrequencyModel,
    ctx: TruncationContext,
    tau: float,
    degree_bound: int,
    *,
    use_fast_path: bool = True,
) -> DiophantineReport:
    """Scan all non-resonant signed combinations in the window and report
    the largest Diophantine constant they allow.

    The fast path skips the weight-product evaluation for vectors whose
    asymptotic combination is large (those have ``|lambda . p| >= 1``,
    hence weighted value >= 1); the skip happens only when it provably
    cannot change the minimum, so the result is bit-identical with the
    brute-force scan.  On every fast-path hit the implied lower bound is
    still asserted against the exact eigenvalues.
    """
    model.validate(ctx)
    modes = ctx.modes()
    momentum_on = ctx.momentum_enabled

    icoords, _, fvalues = _integer_view(model, modes)
    asymptotics = {k: model.asymptotic_eigenvalue(k) for k in modes}
    gamma_max = math.inf
    worst: MultiIndex | None = None
    count = 0
    fast_hits = 0
    for p in _signed_candidates(modes, degree_bound):
        if momentum_on and p.momentum_sum != 0:
            continue
        if not _combination_key(p, icoords):
            continue
        count += 1
        value = abs(sum(fvalues[k] * e for k, e in p.items()))
        if use_fast_path:
            asymptotic = sum(e * asymptotics[k] for k, e in p.items())
            if abs(asymptotic) >= 2 * p.l1:
                fast_hits += 1
                if value < 1.0:
                    raise ModelError(
                        "asymptotic fast-path premise held for %s but "
                        "|lambda . p| = %g < 1; the declared eigenvalue "
                        "shape is inconsistent with the model" % (p, value)
                    )
                if gamma_max < 1.0:
                    continue  # cannot lower a minimum already below 1
        weighted = value
        for m, e in p.items():
            weighted *= (1 + e * e * mode_weight(m) ** 2) ** tau
        if weighted < gamma_max:
            gamma_max = weighted
            worst = p
    return DiophantineReport(
        tau=float(tau),
        gamma_max=gamma_max,
        worst_p=worst,
        enumerated_count=count,
        degree_bound=degree_bound,
        mode_cutoff=ctx.mode_cutoff,
        fast_path_hits=fast_hits,
        fast_path_enabled=use_fast_path,
        unconstrained=count == 0,
    )


# ---------------------------------------------------------------------------
# small-divisor / smoothing weight audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightAuditRow:
    delta: float
    max_value: float
    implied_constant: float
    worst_q: str
    worst_k: str


@dataclass(frozen=True)
class WeightAuditReport:
    """Scan of ``exp(-delta * gap) / |divisor|`` over non-resonant terms."""

    rows: tuple[WeightAuditRow, ...]
    enumerated_count: int
    case0_checked: int
    case0_passed: bool
    monotone_in_delta: bool
    c_constant: float

    @property
    def passed(self) -> bool:
        return self.case0_passed and self.monotone_in_delta

    def as_dict(self) -> dict:
        return {
            "rows": [
                {
                    "delta": r.delta,
                    "max_value": r.max_value,
                    "implied_constant": r.implied_constant,
                    "worst_q": r.worst_q,
                    "worst_k": r.worst_k,
                }
                for r in self.rows
            ],
            "enumerated_count": self.enumerated_count,
            "case0_checked": self.case0_checked,
            "case0_passed": self.case0_passed,
            "monotone_in_delta": self.monotone_in_delta,
            "c_constant": self.c_constant,
        }


def small_divisor_audit(
    model: FrequencyModel,
    ctx: TruncationContext,
    deltas: Sequence[float],
    *,
    gamma: float | None = None,
    tau: float = 2.0,
    c_constant: float = 1.0,
) -> WeightAuditReport:
    """Bound the smoothing-weighted small divisors over the window.

    For every non-resonant stored term shape ``x^q d/dx_k`` the audit
    evaluates ``exp(-delta * gap(q, k)) / |lambda . (q - e_k)|`` and
    reports the maximum per ``delta`` together with the constant implied
    by an ``exp(c/delta**6)`` envelope.  Terms supported on weight-one
    modes additionally get the pointwise closed-form chain checked when
    a Diophantine constant ``gamma`` is supplied.
    """
    model.validate(ctx)
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas):
        raise NormalFormError("smoothing audit requires positive delta")
    modes = ctx.modes()
    momentum_on = ctx.momentum_enabled
    theta = ctx.theta

    maxima = {d: 0.0 for d in deltas}
    worst: dict[float, tuple[MultiIndex, Mode] | None] = {d: None for d in deltas}
    count = 0
    case0_checked = 0
    case0_passed = True
    icoords, _, fvalues = _integer_view(model, modes)
    for q in iter_indices(modes, ctx.degree_cutoff + 1, min_degree=1):
        combo_key = _combination_key(q, icoords)
        combo_value = sum(fvalues[k] * e for k, e in q.items())
        momentum_q = q.momentum_sum if momentum_on else 0
        for k in modes:
            if momentum_on and momentum_q != mode_momentum(k):
                continue
            if combo_key == icoords[k]:
                continue
            count += 1
            divisor = abs(combo_value - fvalues[k])
            gap = smoothing_gap(q, k, theta)
            for d in deltas:
                val = math.exp(-d * gap) / divisor
                if val > maxima[d]:
                    maxima[d] = val
                    worst[d] = (q, k)
            if gamma is not None and _is_case0(q, k):
                case0_checked += 1
                if not _case0_chain_holds(model, q, k, deltas, gamma, tau):
                    case0_passed = False

    rows = tuple(
        WeightAuditRow(
            delta=d,
            max_value=maxima[d],
            implied_constant=maxima[d] * math.exp(-c_constant / d ** 6),
            worst_q="-" if worst[d] is None else str(worst[d][0]),
            worst_k="-" if worst[d] is None else format_mode(worst[d][1]),
        )
        for d in sorted(deltas)
    )
    monotone = all(
        rows[i].max_value >= rows[i + 1].max_value - 1e-12
        for i in range(len(rows) - 1)
    )
    return WeightAuditReport(
        rows=rows,
        enumerated_count=count,
        case0_checked=case0_checked,
        case0_passed=case0_passed,
        monotone_in_delta=monotone,
        c_constant=float(c_constant),
    )


def _is_case0(q: MultiIndex, k: Mode) -> bool:
    """Support (including the direction) entirely on weight-one modes."""
    return mode_weight(k) == 1 and all(mode_weight(m) == 1 for m in q.modes())


def _case0_chain_holds(
    model: FrequencyModel,
    q: MultiIndex,
    k: Mode,
    deltas: Sequence[float],
    gamma: float,
    tau: float,
) -> bool:
    """Pointwise closed-form chain on weight-one support:

    exp(-d*(|q|-1))/|divisor| <= (1/gamma) exp(-d*(|q|-1)) prod(1+p_h^2)^tau
                              <= (1/gamma) exp(-d*|q|/2) |q|^(12*tau),

    the second step requiring |q| >= 2.
    """
    p = q - MultiIndex.unit(k)
    divisor = abs(model.coord_value_float(model.combination_coord(p)))
    prod = 1.0
    for _, e in p.items():
        prod *= (1 + e * e) ** tau
    n = q.degree
    slack = 1 + 1e-9
    for d in deltas:
        lhs = math.exp(-d * (n - 1)) / divisor
        mid = math.exp(-d * (n - 1)) * prod / gamma
        if lhs > mid * slack:
            return False
        if n >= 2:
            right = math.exp(-d * n / 2) * n ** (12 * tau) / gamma
            if mid > right * slack:
                return False
    return True
