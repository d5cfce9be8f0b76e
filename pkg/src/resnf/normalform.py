"""Homological solvers, Lie-series pushforward and the normalization driver.

The driver conjugates a truncated field ``D(lambda) + P`` to the form
``D(lambda) + Z + N`` where ``Z`` is diagonal resonant below the cutoff
order and ``N`` lies in the square of the resonance ideal.  The free
part ``X`` (ideal classes 0 and 1, order >= mstar) is removed by time-1
flows of generating fields solving a triangular pair of homological
equations; every step at least doubles the order of ``X``, so the
truncated iteration terminates unconditionally.  Analytic smallness
conditions are evaluated and reported as diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    AlreadyNormal,
    HypothesisViolation,
    NonterminatingSeries,
    NormalFormError,
    ProblemFileError,
    ResonantTermInRange,
)
from .fields import VectorField, bracket
from .indexing import TruncationContext, format_mode
from .resonance import FrequencyModel, ResonanceModule

CHI = 1.5
"""Super-exponential decay rate of the iterative scheme (fixed)."""


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecomposedField:
    """A field split as ``D(lambda) + Z + X + N``.

    ``Z`` holds the diagonal resonant terms of order 1..mstar-1, ``X``
    the class-0/1 terms of order >= mstar (all non-resonant), ``N`` the
    class-2 terms of order >= mstar.  The linear part is carried by the
    model reference, not stored as terms.
    """

    model: FrequencyModel
    module: ResonanceModule
    ctx: TruncationContext
    mstar: int
    z: VectorField
    x: VectorField
    n: VectorField

    @property
    def is_normal(self) -> bool:
        return self.x.is_zero

    def assemble(self) -> VectorField:
        """The full field ``D + Z + X + N``."""
        return self.model.linear_field(self.ctx) + self.z + self.x + self.n

    def __repr__(self):
        return "DecomposedField(Z:%d, X:%d, N:%d terms, mstar=%d)" % (
            self.z.term_count(),
            self.x.term_count(),
            self.n.term_count(),
            self.mstar,
        )


def resolve_mstar(module: ResonanceModule, mstar: int | None) -> int:
    if mstar is None:
        return module.m_star_minimal
    if mstar < module.m_star_minimal:
        raise HypothesisViolation(
            "cutoff order %d is below the certified minimal order %d; "
            "class-0/1 terms would include unsolvable resonant terms"
            % (mstar, module.m_star_minimal)
        )
    return mstar


def decompose(
    w: VectorField,
    model: FrequencyModel,
    module: ResonanceModule,
    mstar: int | None = None,
) -> DecomposedField:
    """Split ``w`` into linear part, ``Z``, ``X`` and ``N``.

    Raises HypothesisViolation when the linear part differs from the
    model, when a kernel term below the cutoff order is non-diagonal
    (outside the diagonal-kernel hypothesis), or when non-resonant
    terms below the cutoff order remain (prenormalize first).
    """
    ctx = w.ctx
    mstar = resolve_mstar(module, mstar)
    linear = w.project(lambda k, q: q.degree == 1)
    if not (linear - model.linear_field(ctx)).is_zero:
        raise HypothesisViolation(
            "linear part differs from the diagonal part of model %s"
            % model.name
        )
    z_terms, x_terms, n_terms = [], [], []
    for k, q, c in w.terms():
        order = q.degree - 1
        if order == 0:
            continue
        if order < mstar:
            if not model.is_resonant_pair(q, k):
                raise HypothesisViolation(
                    "non-resonant term x^%s d/dx_%s of order %d below the "
                    "cutoff order %d; prenormalize first"
                    % (q, format_mode(k), order, mstar)
                )
            if q.get(k) < 1:
                raise HypothesisViolation(
                    "resonant non-diagonal term x^%s d/dx_%s: the kernel "
                    "below the cutoff order must be diagonal" % (q, format_mode(k))
                )
            z_terms.append((k, q, c))
        elif module.classify(q) == 2:
            n_terms.append((k, q, c))
        else:
            x_terms.append((k, q, c))
    return DecomposedField(
        model,
        module,
        ctx,
        mstar,
        VectorField(ctx, z_terms),
        VectorField(ctx, x_terms),
        VectorField(ctx, n_terms),
    )


def _require_diagonal_resonant(z: VectorField, model: FrequencyModel) -> None:
    for k, q, _ in z.terms():
        if q.get(k) < 1 or not model.is_resonant_pair(q, k):
            raise HypothesisViolation(
                "Z term x^%s d/dx_%s is not diagonal resonant" % (q, format_mode(k))
            )


def _project_class(field: VectorField, module: ResonanceModule, klass: int) -> VectorField:
    return field.project(lambda k, q: module.classify(q) == klass)


# ---------------------------------------------------------------------------
# homological equations
# ---------------------------------------------------------------------------


def solve_linear_homological(y: VectorField, model: FrequencyModel) -> VectorField:
    """The unique ``F`` with ``[D(lambda), F] = Y``, termwise
    ``F_q^(k) = Y_q^(k) / (lambda . (q - e_k))``."""
    ctx = y.ctx

    def divide(k, q, c):
        if model.is_resonant_pair(q, k):
            raise ResonantTermInRange(
                "term x^%s d/dx_%s has zero divisor; it lies in the kernel, "
                "not the range" % (q, format_mode(k))
            )
        return c / model.divisor_value(q, k, ctx)

    return y.map_coefficients(divide)


def _a_inverse(y: VectorField, model: FrequencyModel) -> VectorField:
    """Invert ``A = [., D(lambda)]`` termwise (``A`` acts as minus the
    divisor on each monomial term)."""
    ctx = y.ctx

    def divide(k, q, c):
        if model.is_resonant_pair(q, k):
            raise ResonantTermInRange(
                "resonant term x^%s d/dx_%s inside a class-0/1 block: the "
                "ideal classification and the kernel structure disagree"
                % (q, format_mode(k))
            )
        return -(c / model.divisor_value(q, k, ctx))

    return y.map_coefficients(divide)


def solve_extended_homological(
    x_i: VectorField,
    klass: int,
    z: VectorField,
    n: VectorField,
    model: FrequencyModel,
    module: ResonanceModule,
    f0: VectorField | None = None,
) -> VectorField:
    """Solve the class-``klass`` homological equation of the main step.

    For ``klass = 0``: ``Pi0 [F0, D + Z] = -X0``.  For ``klass = 1``:
    ``Pi1 ([F1, D + Z] + [F0, Z + N]) = -X1`` with ``F0`` supplied.  The
    operator ``A + B`` (``A`` the diagonal bracket with ``D``, ``B`` the
    projected bracket with ``Z``) is inverted exactly via
    ``(A+B)^-1 = A^-1 - A^-1 B A^-1``, valid because ``A^-1 B`` is
    nilpotent of order two; the defining identity is re-checked term by
    term and a violation raises NormalFormError.
    """
    if klass not in (0, 1):
        raise ValueError("klass must be 0 or 1")
    ctx = x_i.ctx
    _require_diagonal_resonant(z, model)
    y = -x_i
    if klass == 1:
        if f0 is None:
            f0 = VectorField.zero(ctx)
        y = y - _project_class(bracket(f0, z + n), module, 1)
    a_y = _a_inverse(y, model)
    f = a_y - _a_inverse(_project_class(bracket(a_y, z), module, klass), model)

    residual = _project_class(
        bracket(f, model.linear_field(ctx) + z), module, klass
    ) + x_i
    if klass == 1:
        residual = residual + _project_class(bracket(f0, z + n), module, 1)
    if not residual.is_zero:
        raise NormalFormError(
            "homological residual is nonzero (nilpotency of the extended "
            "solve failed); %d residual terms" % residual.term_count()
        )
    return f


# ---------------------------------------------------------------------------
# Lie series
# ---------------------------------------------------------------------------


def lie_series_terms(f: VectorField, w: VectorField) -> list[VectorField]:
    """The terms ``ad_F^k(W)/k!`` of the exponential Lie series, up to
    and excluding the first zero term; exact at truncation."""
    ctx = w.ctx
    if f.is_zero:
        return [w]
    order = f.order()
    if order == 0:
        raise NonterminatingSeries(
            "generator has an order-0 part; the Lie series need not "
            "terminate at truncation"
        )
    bound = math.ceil((ctx.degree_cutoff + 1) / order)
    terms = [w]
    current = w
    k = 0
    while True:
        k += 1
        factor = Fraction(1, k) if ctx.exact else 1.0 / k
        current = bracket(f, current).scale(factor)
        if current.is_zero:
            break
        if k > bound:
            raise NormalFormError(
                "Lie series exceeded the degree bound %d; generator order "
                "bookkeeping is inconsistent" % bound
            )
        terms.append(current)
    return terms


def pushforward_exp(f: VectorField, w: VectorField) -> VectorField:
    """Pushforward of ``w`` along the time-1 flow of ``f``:
    ``exp(ad_F) W``, summed exactly at truncation."""
    terms = lie_series_terms(f, w)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def pushforward_exp_reversed(f: VectorField, w: VectorField) -> VectorField:
    """Verification twin of :func:`pushforward_exp`: recomputes the Lie
    series independently and folds the sum in reversed order; in exact
    arithmetic the two must agree term by term."""
    ctx = w.ctx
    if f.is_zero:
        return w
    if f.order() == 0:
        raise NonterminatingSeries("generator has an order-0 part")
    collected = []
    current = w
    k = 0
    while not current.is_zero:
        collected.append(current)
        k += 1
        factor = Fraction(1, k) if ctx.exact else 1.0 / k
        current = bracket(f, current).scale(factor)
        if k > ctx.degree_cutoff + 2:
            raise NormalFormError("Lie series failed to terminate")
    out = VectorField.zero(ctx)
    for t in reversed(collected):
        out = out + t
    return out


# ---------------------------------------------------------------------------
# KAM step and driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KamConstants:
    """Run parameters and the adjustable absolute constants of the
    smallness diagnostics; none of them affects the exact algebra."""

    gamma: float = 1.0
    k1: float = 1.0
    c: float = 1.0
    frak_c: float = 1.0
    r0: float = 1.0
    s0: float = 0.0
    rho: float = 0.1
    sigma: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0 or self.r0 <= 0 or self.sigma <= 0:
            raise NormalFormError("gamma, r0 and sigma must be positive")
        if self.rho >= self.r0 / 5:
            raise NormalFormError("the step requires rho < r0/5")

    def rho_n(self, n: int) -> float:
        return self.rho / 10.0 * 2.0 ** -n

    def sigma_n(self, n: int) -> float:
        if n == 0:
            return self.sigma / 8.0
        return 9.0 * self.sigma / (4.0 * math.pi ** 2 * n * n)

    def log_sup_k(self) -> float:
        """``log K`` of the summability constant: ``K = frak_c * sup_n
        2^(9n) exp(C' n^12) exp(-chi^n (2 - chi))`` computed in log
        space (the supremum is astronomically large but finite)."""
        cprime = 2.0 ** 9 * (4.0 * math.pi ** 2 / (9.0 * self.sigma)) ** 6 * self.c
        ln_chi = math.log(CHI)
        best = -math.inf
        for n in range(0, 4000):
            e = n * ln_chi
            if e > 700.0:
                break
            g = 9.0 * n * math.log(2.0) + cprime * float(n) ** 12 - (2.0 - CHI) * math.exp(e)
            if g > best:
                best = g
        return math.log(self.frak_c) + best

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "k1": self.k1,
            "c": self.c,
            "frak_c": self.frak_c,
            "r0": self.r0,
            "s0": self.s0,
            "rho": self.rho,
            "sigma": self.sigma,
            "chi": CHI,
        }


@dataclass(frozen=True)
class KamStepRecord:
    """Per-step diagnostics of the iteration."""

    step: int
    ord_x: int
    ord_x_next: int | None
    generator_order: int
    series_terms: int
    eps: float
    theta: float
    r: float
    s: float
    rho: float
    sigma: float
    smallness_lhs_log: float
    smallness_rhs_log: float
    smallness_ok: bool

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "ord_x": self.ord_x,
            "ord_x_next": self.ord_x_next,
            "generator_order": self.generator_order,
            "series_terms": self.series_terms,
            "eps": self.eps,
            "theta": self.theta,
            "r": self.r,
            "s": self.s,
            "rho": self.rho,
            "sigma": self.sigma,
            "smallness_lhs_log": self.smallness_lhs_log,
            "smallness_rhs_log": self.smallness_rhs_log,
            "smallness_ok": self.smallness_ok,
        }


@dataclass(frozen=True)
class KamTrace:
    """Diagnostics of a full normalization run."""

    records: tuple[KamStepRecord, ...]
    constants: KamConstants
    convergence_lhs_log: float | None
    convergence_rhs_log: float | None
    convergence_ok: bool | None

    def as_dict(self) -> dict:
        return {
            "records": [r.as_dict() for r in self.records],
            "constants": self.constants.as_dict(),
            "convergence_lhs_log": self.convergence_lhs_log,
            "convergence_rhs_log": self.convergence_rhs_log,
            "convergence_ok": self.convergence_ok,
        }


@dataclass(frozen=True)
class TransformLog:
    """Ordered generating fields of the composed conjugation.

    The forward map composes the time-1 flows with the last entry
    acting first; the inverse composes the time -1 flows with the first
    entry acting first, undoing it.  Entries are labeled by the stage
    that produced them:
    ``prenormalize`` generators have order < mstar, ``kam`` generators
    lie in classes 0/1 with order >= mstar.
    """

    entries: tuple[tuple[str, VectorField], ...] = ()

    def __post_init__(self):
        for stage, _ in self.entries:
            if stage not in ("prenormalize", "kam"):
                raise NormalFormError("unknown transform stage %r" % stage)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def fields(self) -> tuple[VectorField, ...]:
        return tuple(f for _, f in self.entries)

    def extend(self, entries: Iterable[tuple[str, VectorField]]) -> "TransformLog":
        return TransformLog(self.entries + tuple(entries))

    def to_lines(self) -> list[str]:
        lines: list[str] = []
        for i, (stage, f) in enumerate(self.entries):
            lines.append("# generator %d | stage %s" % (i, stage))
            lines.extend(f.to_lines())
        return lines

    @classmethod
    def from_lines(cls, ctx: TruncationContext, lines: Iterable[str]) -> "TransformLog":
        entries: list[tuple[str, VectorField]] = []
        stage: str | None = None
        block: list[str] = []

        def flush():
            if stage is not None:
                entries.append((stage, VectorField.from_lines(ctx, block)))

        for line in lines:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                flush()
                parts = line.lstrip("#").split("|")
                if len(parts) != 2 or not parts[1].strip().startswith("stage"):
                    raise ProblemFileError("malformed generator header %r" % line)
                stage = parts[1].strip().split()[1]
                block = []
            else:
                if stage is None:
                    raise ProblemFileError("generator lines before any header")
                block.append(line)
        flush()
        return cls(tuple(entries))


def prenormalize(
    w: VectorField,
    model: FrequencyModel,
    module: ResonanceModule,
    mstar: int | None = None,
) -> tuple[VectorField, TransformLog]:
    """Degree-by-degree elimination of all non-resonant terms of order
    below the cutoff order; below that order only kernel terms remain."""
    mstar = resolve_mstar(module, mstar)
    out, entries = _eliminate_orders(w, model, range(1, mstar), "prenormalize")
    return out, TransformLog(entries)


def poincare_dulac(
    w: VectorField, model: FrequencyModel
) -> tuple[VectorField, TransformLog]:
    """Classical full normal form: eliminate every non-resonant term of
    every order in the window.  Serves as an independent reference for
    the iterative driver (both leave the same kernel-diagonal part)."""
    ctx = w.ctx
    out, entries = _eliminate_orders(
        w, model, range(1, ctx.degree_cutoff + 1), "prenormalize"
    )
    return out, TransformLog(entries)


def _eliminate_orders(
    w: VectorField,
    model: FrequencyModel,
    orders: Sequence[int],
    stage: str,
) -> tuple[VectorField, list[tuple[str, VectorField]]]:
    out = w
    entries: list[tuple[str, VectorField]] = []
    for d in orders:
        y = out.project_degree(d).project(
            lambda k, q: not model.is_resonant_pair(q, k)
        )
        if y.is_zero:
            continue
        f = solve_linear_homological(y, model)
        out = pushforward_exp(f, out)
        entries.append((stage, f))
    return out, entries


def kam_step(
    dec: DecomposedField,
    constants: KamConstants | None = None,
    step_index: int = 0,
    r_n: float | None = None,
    s_n: float | None = None,
) -> tuple[DecomposedField, VectorField, KamStepRecord]:
    """One main step: solve the triangular homological pair, push the
    field forward along the generator's time-1 flow, redecompose.

    Exact postconditions (checked, violations raise NormalFormError):
    ``Z`` unchanged; ``ord(X+) >= 2 ord(X)``.  The analytic smallness
    check is evaluated in log space and reported, not enforced.
    """
    if dec.x.is_zero:
        raise AlreadyNormal("X = 0: the field is already in normal form")
    constants = constants or KamConstants()
    r = constants.r0 if r_n is None else r_n
    s = constants.s0 if s_n is None else s_n
    rho = constants.rho_n(step_index)
    sigma = constants.sigma_n(step_index)

    x0 = _project_class(dec.x, dec.module, 0)
    x1 = _project_class(dec.x, dec.module, 1)
    if not (dec.x - x0 - x1).is_zero:
        raise HypothesisViolation("X has class-2 terms; decompose is stale")
    f0 = solve_extended_homological(x0, 0, dec.z, dec.n, dec.model, dec.module)
    f1 = solve_extended_homological(
        x1, 1, dec.z, dec.n, dec.model, dec.module, f0=f0
    )
    f = f0 + f1
    if f.order() is not None and f.order() < dec.mstar:
        raise NormalFormError(
            "generator order %d below the cutoff order %d" % (f.order(), dec.mstar)
        )
    if not _project_class(f, dec.module, 2).is_zero:
        raise NormalFormError("generator has class-2 terms")

    series = lie_series_terms(f, dec.assemble())
    w_plus = series[0]
    for t in series[1:]:
        w_plus = w_plus + t
    dec_plus = decompose(w_plus, dec.model, dec.module, dec.mstar)

    if not (dec_plus.z - dec.z).is_zero:
        raise NormalFormError("Z changed across a step; main-step structure violated")
    old_ord = dec.x.order()
    new_ord = dec_plus.x.order()
    if new_ord is not None and new_ord < 2 * old_ord:
        raise NormalFormError(
            "order doubling failed: ord(X+) = %d < 2 * %d" % (new_ord, old_ord)
        )

    gamma = constants.gamma
    norm_x = dec.x.majorant_norm(r, s).upper
    norm_z = dec.z.majorant_norm(r, s).upper
    norm_n = dec.n.majorant_norm(r, s).upper
    eps = norm_x / gamma
    theta = (norm_z + norm_n) / gamma + eps
    zn = (norm_z + norm_n) / gamma
    smallness_lhs = 3.0 * math.log1p(zn) + math.log(eps)
    smallness_rhs = (
        math.log(constants.k1)
        + 4.0 * math.log(rho / r)
        - 2.0 ** 8 * constants.c / sigma ** 6
    )
    record = KamStepRecord(
        step=step_index,
        ord_x=old_ord,
        ord_x_next=new_ord,
        generator_order=f.order(),
        series_terms=len(series) - 1,
        eps=eps,
        theta=theta,
        r=r,
        s=s,
        rho=rho,
        sigma=sigma,
        smallness_lhs_log=smallness_lhs,
        smallness_rhs_log=smallness_rhs,
        smallness_ok=smallness_lhs <= smallness_rhs,
    )
    return dec_plus, f, record


def normalize(
    w: VectorField,
    model: FrequencyModel,
    module: ResonanceModule,
    mstar: int | None = None,
    constants: KamConstants | None = None,
) -> tuple[DecomposedField, TransformLog, KamTrace]:
    """Full driver: prenormalize below the cutoff order, then iterate
    main steps until ``X = 0`` at truncation.

    Termination is guaranteed in at most ``ceil(log2((D+1)/mstar)) + 1``
    steps by order doubling; exceeding the bound raises NormalFormError.
    """
    ctx = w.ctx
    mstar = resolve_mstar(module, mstar)
    constants = constants or KamConstants()
    out, prelog = prenormalize(w, model, module, mstar)
    dec = decompose(out, model, module, mstar)

    max_steps = max(0, math.ceil(math.log2((ctx.degree_cutoff + 1) / mstar))) + 1
    entries = list(prelog.entries)
    records: list[KamStepRecord] = []
    r_n, s_n = constants.r0, constants.s0
    step = 0
    while not dec.x.is_zero:
        if step >= max_steps:
            raise NormalFormError(
                "iteration exceeded the doubling bound of %d steps" % max_steps
            )
        dec, f, record = kam_step(dec, constants, step, r_n, s_n)
        entries.append(("kam", f))
        records.append(record)
        r_n -= 5.0 * constants.rho_n(step)
        s_n += 2.0 * constants.sigma_n(step)
        step += 1

    if records:
        eps0, theta0 = records[0].eps, records[0].theta
        log_k = constants.log_sup_k()
        convergence_lhs = math.log(eps0) if eps0 > 0 else -math.inf
        convergence_rhs = -7.0 * math.log1p(theta0) - log_k
        convergence_ok = convergence_lhs <= convergence_rhs
    else:
        convergence_lhs = convergence_rhs = convergence_ok = None
    trace = KamTrace(
        records=tuple(records),
        constants=constants,
        convergence_lhs_log=convergence_lhs,
        convergence_rhs_log=convergence_rhs,
        convergence_ok=convergence_ok,
    )
    return dec, TransformLog(tuple(entries)), trace


# ---------------------------------------------------------------------------
# numeric transform evaluation
# ---------------------------------------------------------------------------


def apply_transform(
    log: TransformLog,
    point: Sequence[complex],
    direction: str = "forward",
    steps: int = 64,
) -> tuple[complex, ...]:
    """Evaluate the composed conjugation map at a numeric point.

    ``forward`` is the composition of the time-1 flows of the recorded
    generators (the last recorded generator acts first); it carries
    normal-form coordinates back to the original coordinates, so the
    original field's flow is ``forward`` conjugated with the normalized
    field's flow.  ``inverse`` composes the time -1 flows in entry
    order and undoes ``forward``.  Each flow is integrated with a
    fixed-step RK4; accuracy is the caller's concern (more steps,
    smaller points).
    """
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    state = tuple(complex(v) for v in point)
    if not log.entries:
        return state
    fields = [f.as_float() for f in log.fields()]
    if direction == "forward":
        fields = fields[::-1]
        time = 1.0
    else:
        time = -1.0
    positions = fields[0].ctx.mode_positions()
    for f in fields:
        state = _rk4_flow(f, state, time, steps, positions)
    return state


def _rk4_flow(f, state, time, steps, positions):
    if len(state) != len(positions):
        raise ValueError(
            "point has %d coordinates; context has %d modes"
            % (len(state), len(positions))
        )
    h = time / steps
    x = list(state)
    for _ in range(steps):
        k1 = f.evaluate(x, positions)
        k2 = f.evaluate([xi + 0.5 * h * ki for xi, ki in zip(x, k1)], positions)
        k3 = f.evaluate([xi + 0.5 * h * ki for xi, ki in zip(x, k2)], positions)
        k4 = f.evaluate([xi + h * ki for xi, ki in zip(x, k3)], positions)
        x = [
            xi + h / 6.0 * (a + 2.0 * b + 2.0 * c + d)
            for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
        ]
    return tuple(x)
