"""Countable-state MDPs under Markov policies.

Only marginals matter for ``E c(x_n, a_n)``, so a Markov policy (a
distribution over ``A(x)`` for every step ``n`` and state ``x``) is pushed
forward on exact rational state distributions.  Two constructions turn any
0/1 sequence ``u`` into an expected-cost sequence equal to ``u``: a single
state with a time-varying choice between a cost-1 and a cost-0 action, and
a deterministic rightward chain whose state ``x`` costs ``u_x``.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

from . import abel
from .seqcore import BlockSequence, RealSequence, SpecError, from_spec, shift
from .tauberian import AnalyzeConfig, LimitEstimate, LimitsReport, RelationClass, _assemble, analyze, naive_grid

__all__ = [
    "DEFAULT_SUPPORT_CAP",
    "EqualityReport",
    "MDPConfig",
    "MarkovDecisionModel",
    "MarkovPolicy",
    "ValueQuadruple",
    "chain_construction",
    "cycle_model",
    "discounted_values",
    "expected_cost_sequence",
    "finite_stationary_equality_check",
    "from_model_spec",
    "random_unichain",
    "single_state_construction",
    "value_quadruple",
]

DEFAULT_SUPPORT_CAP = 100_000

State = Hashable
Action = Hashable


def _as_fraction(x, where: str) -> Fraction:
    try:
        return Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError):
        raise SpecError(f"{where}: not a rational number: {x!r}") from None


@dataclass(frozen=True)
class MarkovDecisionModel:
    """Rule-based model: every query is answered on demand.

    ``n_states`` is the size of a finite state set ``0..n-1`` or None for the
    countable set of naturals.  ``transported`` tags models built from a
    0/1 sequence so analyses can use that sequence's closed forms.
    """

    actions: Callable[[State], Sequence[Action]] = field(repr=False)
    transition: Callable[[State, Action], Mapping[State, Fraction]] = field(repr=False)
    cost: Callable[[State, Action], Fraction] = field(repr=False)
    cost_lower_bound: Fraction = Fraction(0)
    n_states: int | None = None
    description: str = ""
    transported: BlockSequence | None = field(default=None, repr=False)

    @property
    def finite(self) -> bool:
        return self.n_states is not None

    def states(self) -> range:
        if self.n_states is None:
            raise ValueError("countable model has no finite state list")
        return range(self.n_states)

    def checked_actions(self, x: State) -> Sequence[Action]:
        acts = self.actions(x)
        if not acts:
            raise ValueError(f"state {x!r} has no available actions")
        return acts

    def checked_transition(self, x: State, a: Action) -> Mapping[State, Fraction]:
        row = self.transition(x, a)
        if sum(row.values()) != 1 or any(q < 0 for q in row.values()):
            raise ValueError(f"p(.|{x!r},{a!r}) is not a probability mass function")
        if self.n_states is not None and any(not 0 <= y < self.n_states for y in row):
            raise ValueError(f"p(.|{x!r},{a!r}) leaves the state set")
        return row

    def checked_cost(self, x: State, a: Action) -> Fraction:
        c = Fraction(self.cost(x, a))
        if c < self.cost_lower_bound:
            raise ValueError(f"c({x!r},{a!r}) = {c} is below the declared bound {self.cost_lower_bound}")
        return c

    @classmethod
    def from_tables(cls, actions: Mapping[int, Sequence[Action]],
                    transitions: Mapping[tuple[int, Action], Mapping[int, Fraction]],
                    costs: Mapping[tuple[int, Action], Fraction], description: str = "") -> MarkovDecisionModel:
        n = len(actions)
        if sorted(actions) != list(range(n)):
            raise ValueError("finite models use states 0..n-1")
        trans = {k: {int(y): Fraction(q) for y, q in row.items()} for k, row in transitions.items()}
        cst = {k: Fraction(v) for k, v in costs.items()}
        acts = {x: tuple(a) for x, a in actions.items()}
        model = cls(lambda x: acts[x], lambda x, a: trans[(x, a)], lambda x, a: cst[(x, a)],
                    min(cst.values(), default=Fraction(0)), n, description)
        for x in range(n):
            for a in model.checked_actions(x):
                if (x, a) not in trans or (x, a) not in cst:
                    raise ValueError(f"missing transition or cost for ({x}, {a!r})")
                model.checked_transition(x, a)
        return model


@dataclass(frozen=True)
class MarkovPolicy:
    """``rule(n, x)`` gives the action distribution at step ``n`` in state ``x``."""

    rule: Callable[[int, State], Mapping[Action, Fraction]] = field(repr=False)
    stationary: bool = False
    description: str = ""
    transported: BlockSequence | None = field(default=None, repr=False)

    @classmethod
    def stationary_map(cls, phi: Mapping[State, Action] | Callable[[State], Action],
                       description: str = "stationary") -> MarkovPolicy:
        pick = phi if callable(phi) else phi.__getitem__
        return cls(lambda n, x: {pick(x): Fraction(1)}, True, description)

    def distribution(self, n: int, x: State, model: MarkovDecisionModel) -> Mapping[Action, Fraction]:
        dist = self.rule(n, x)
        allowed = model.checked_actions(x)
        if sum(dist.values()) != 1 or any(q < 0 for q in dist.values()):
            raise ValueError(f"policy at step {n}, state {x!r} is not a distribution")
        if any(a not in allowed and q != 0 for a, q in dist.items()):
            raise ValueError(f"policy at step {n}, state {x!r} puts mass outside A(x)")
        return dist

    def action_of(self, x: State) -> Action:
        if not self.stationary:
            raise ValueError("only stationary policies have a fixed action per state")
        (a,) = [a for a, q in self.rule(0, x).items() if q]
        return a


def expected_cost_sequence(m: MarkovDecisionModel, p: MarkovPolicy, x0: State, horizon: int,
                           support_cap: int = DEFAULT_SUPPORT_CAP, exact: bool = True) -> list:
    """``E c(x_n, a_n)`` for ``n < horizon`` by forward recursion on state marginals.

    With ``exact=False`` masses are floats, which keeps long horizons cheap;
    conservation is then checked to ``1e-9``.
    """
    num = Fraction if exact else float
    mu: dict = {x0: num(1)}
    out = []
    for n in range(horizon):
        term = num(0)
        nxt: dict = defaultdict(num)
        for x, px in mu.items():
            for a, pa in p.distribution(n, x, m).items():
                if not pa:
                    continue
                w = px * num(pa)
                term += w * num(m.checked_cost(x, a))
                for y, q in m.checked_transition(x, a).items():
                    if q:
                        nxt[y] += w * num(q)
        out.append(term)
        total = sum(nxt.values())
        if (total != 1) if exact else abs(total - 1) > 1e-9:
            raise AssertionError(f"probability mass not conserved at step {n + 1}")
        if len(nxt) > support_cap:
            raise ValueError(f"reachable support {len(nxt)} exceeds cap {support_cap} at step {n + 1}")
        mu = nxt
    return out


def single_state_construction(u: BlockSequence) -> tuple[MarkovDecisionModel, MarkovPolicy]:
    """One state, actions a (cost 1) and b (cost 0), and ``pi_n(a) = u_n``."""
    stay = {0: Fraction(1)}
    costs = {"a": Fraction(1), "b": Fraction(0)}
    model = MarkovDecisionModel(lambda x: ("a", "b"), lambda x, a: stay, lambda x, a: costs[a],
                                Fraction(0), 1, f"single-state[{u.description}]", u)

    def rule(n, x):
        return {"a": Fraction(1)} if u.term(n) else {"b": Fraction(1)}

    return model, MarkovPolicy(rule, False, f"pi_n(a) = u_n ({u.description})", u)


def chain_construction(u: BlockSequence) -> tuple[MarkovDecisionModel, MarkovPolicy]:
    """States 0, 1, 2, ...; the only action moves x to x+1 and costs ``u_x``."""
    model = MarkovDecisionModel(lambda x: ("a",), lambda x, a: {x + 1: Fraction(1)},
                                lambda x, a: Fraction(u.term(x)), Fraction(0), None,
                                f"chain[{u.description}]", u)
    return model, MarkovPolicy.stationary_map(lambda x: "a", "the unique policy")


def _solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def discounted_values(m: MarkovDecisionModel, phi: MarkovPolicy, alpha) -> list[Fraction]:
    """Exact ``v_alpha`` of a stationary policy on a finite model: ``(I - alpha P) v = c``."""
    if not m.finite:
        raise ValueError("exact discounted values need a finite model")
    if not phi.stationary:
        raise ValueError("exact discounted values need a stationary policy")
    alpha = Fraction(alpha)
    n = m.n_states
    mat = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    rhs = []
    for x in range(n):
        dist = phi.distribution(0, x, m)
        c = Fraction(0)
        for a, pa in dist.items():
            c += pa * m.checked_cost(x, a)
            for y, q in m.checked_transition(x, a).items():
                mat[x][y] -= alpha * pa * q
        rhs.append(c)
    return _solve(mat, rhs)


@dataclass(frozen=True)
class MDPConfig:
    """``horizon``: exact expected costs used for Cesàro windows ``[horizon/2, horizon]``.
    ``grid``: discount factors; the upper half feeds the Abel extremes.
    """

    horizon: int = 512
    grid: tuple[Fraction, ...] = field(default_factory=lambda: naive_grid(1.5, 3.0, 0.25))
    delta: Fraction = Fraction(1, 100)
    naive_tol: float = 1e-9
    support_cap: int = DEFAULT_SUPPORT_CAP
    analyze: AnalyzeConfig = field(default_factory=AnalyzeConfig)


@dataclass(frozen=True)
class ValueQuadruple:
    """``w_*, w_lower, w_upper, w^*``: lower/upper Cesàro and Abel limits of ``E c(x_n, a_n)``."""

    w_lowstar: LimitEstimate
    w_lowbar: LimitEstimate
    w_bar: LimitEstimate
    w_star: LimitEstimate
    report: LimitsReport

    @property
    def relation_class(self) -> RelationClass:
        return self.report.relation_class

    @property
    def limits(self) -> tuple[Fraction, ...]:
        return self.report.limits

    def chain_holds(self) -> bool:
        return self.report.consistent


def _spread_estimate(lo: Fraction, hi: Fraction, source: str, pick_low: bool) -> LimitEstimate:
    v = lo if pick_low else hi
    return LimitEstimate(v, Fraction(0), v, hi - lo, "window", source)


def value_quadruple(m: MarkovDecisionModel, p: MarkovPolicy, x0: State = 0,
                    config: MDPConfig | None = None) -> ValueQuadruple:
    """Lower/upper Cesàro and Abel limits of the expected one-step costs from ``x0``.

    Models or policies tagged with a 0/1 sequence delegate to
    :func:`tauberkit.tauberian.analyze` (the chain from ``x0`` sees the shifted
    sequence).  Otherwise Cesàro extremes come from exact costs over
    ``[horizon/2, horizon]`` and Abel extremes from exact linear solves
    (finite model, stationary policy) or naive summation.
    """
    config = config or MDPConfig()
    seq = p.transported or m.transported
    if seq is not None:
        if m.transported is not None and m.n_states is None:
            seq = shift(seq, int(x0))
        r = analyze(seq, config.analyze)
        return ValueQuadruple(*r.estimates, r)
    H = config.horizon
    costs = expected_cost_sequence(m, p, x0, H, config.support_cap)
    partial = Fraction(0)
    window = []
    for n, c in enumerate(costs, start=1):
        partial += c
        if n >= H // 2:
            window.append(partial / n)
    c_lo, c_hi = min(window), max(window)
    grid = sorted(Fraction(a) for a in config.grid)
    tail = grid[len(grid) // 2:]
    if m.finite and p.stationary:
        abel_vals = [(1 - a) * discounted_values(m, p, a)[x0] for a in tail]
        a_lo, a_hi = min(abel_vals), max(abel_vals)
        a_source = "exact discounted solve"
        a_rad = Fraction(0)
    else:
        bound = float(max(max(abs(c) for c in costs), abs(m.cost_lower_bound), 1))
        need = max(abel._naive_horizon(float(a), config.naive_tol, bound) for a in tail)
        full = costs if need <= H else expected_cost_sequence(m, p, x0, need, config.support_cap, exact=False)
        rs = RealSequence(lambda n: full[n], None, Fraction(max(bound, max(abs(float(c)) for c in full))))
        balls = [abel.eval_naive(rs, a, config.naive_tol) for a in tail]
        a_lo = min(b.mid for b in balls)
        a_hi = max(b.mid for b in balls)
        a_rad = max(b.rad for b in balls)
        a_source = "naive summation"
    estimates = [
        _spread_estimate(c_lo, c_hi, f"cesaro window [{H // 2}, {H}]", True),
        LimitEstimate(a_lo, a_rad, a_lo, a_hi - a_lo + a_rad, "window", a_source),
        LimitEstimate(a_hi, a_rad, a_hi, a_hi - a_lo + a_rad, "window", a_source),
        _spread_estimate(c_lo, c_hi, f"cesaro window [{H // 2}, {H}]", False),
    ]
    r = _assemble(estimates, Fraction(config.delta), m.description)
    return ValueQuadruple(*estimates, r)


@dataclass(frozen=True)
class EqualityReport:
    holds: bool
    common_value: Fraction
    spread: Fraction
    quadruple: ValueQuadruple


def finite_stationary_equality_check(m: MarkovDecisionModel, phi: MarkovPolicy, x0: State = 0,
                                     config: MDPConfig | None = None) -> EqualityReport:
    """All four values of a stationary policy on a finite model agree within ``config.delta``."""
    if not m.finite:
        raise ValueError("equality check needs a finite state set")
    if not phi.stationary:
        raise ValueError("equality check needs a stationary policy")
    config = config or MDPConfig()
    q = value_quadruple(m, phi, x0, config)
    points = [e.value for e in (q.w_lowstar, q.w_lowbar, q.w_bar, q.w_star)]
    spread = max(points) - min(points)
    # the Abel value at the discount closest to 1
    alpha = max(Fraction(a) for a in config.grid)
    common = (1 - alpha) * discounted_values(m, phi, alpha)[x0]
    return EqualityReport(spread <= Fraction(config.delta), common, spread, q)


def cycle_model(costs: Sequence) -> MarkovDecisionModel:
    """Deterministic cycle ``0 -> 1 -> ... -> n-1 -> 0`` with the given state costs."""
    n = len(costs)
    if n == 0:
        raise ValueError("cycle needs at least one state")
    return MarkovDecisionModel.from_tables(
        {x: ("a",) for x in range(n)},
        {(x, "a"): {(x + 1) % n: Fraction(1)} for x in range(n)},
        {(x, "a"): Fraction(c) for x, c in enumerate(costs)},
        f"cycle{tuple(str(c) for c in costs)}",
    )


def random_unichain(rng: random.Random, n_states: int, denominator: int = 6
                    ) -> tuple[MarkovDecisionModel, MarkovPolicy]:
    """Random finite model whose every row charges state 0, so one recurrent class.

    Probabilities are multiples of ``1/denominator``; costs are in ``[0, 1]``.
    The returned stationary policy picks a random action per state.
    """
    actions, trans, costs = {}, {}, {}
    for x in range(n_states):
        acts = tuple("ab"[: rng.randint(1, 2)])
        actions[x] = acts
        for a in acts:
            weights = [rng.randint(0, 3) for _ in range(n_states)]
            weights[0] += 1
            total = sum(weights)
            # spread `denominator` units proportionally, remainder to state 0
            units = [w * denominator // total for w in weights]
            units[0] += denominator - sum(units)
            trans[(x, a)] = {y: Fraction(k, denominator) for y, k in enumerate(units) if k}
            costs[(x, a)] = Fraction(rng.randint(0, denominator), denominator)
    model = MarkovDecisionModel.from_tables(actions, trans, costs, f"random-unichain({n_states})")
    phi = {x: rng.choice(actions[x]) for x in range(n_states)}
    return model, MarkovPolicy.stationary_map(phi, f"stationary {phi}")


def from_model_spec(doc: dict) -> tuple[MarkovDecisionModel, MarkovPolicy, State]:
    """Parse a model document.

    Presets: ``{"preset": "single-state" | "chain", "sequence": {...}, "initial_state": k}``
    and ``{"preset": "cycle", "costs": ["1", "0"]}``.
    Finite tables: ``{"actions": {"0": ["a"], ...}, "transitions": {"0": {"a": {"1": "1"}}},
    "costs": {"0": {"a": "1"}}, "policy": {"0": "a"} or {"0": {"a": "1/2", "b": "1/2"}},
    "initial_state": 0}``.
    """
    if not isinstance(doc, dict):
        raise SpecError("model spec must be a mapping")
    x0 = doc.get("initial_state", 0)
    if not isinstance(x0, int) or x0 < 0:
        raise SpecError("field 'initial_state': must be a non-negative integer")
    if doc.get("preset") == "cycle":
        try:
            m = cycle_model([_as_fraction(c, "costs") for c in doc.get("costs", ())])
        except ValueError as exc:
            raise SpecError(f"field 'costs': {exc}") from None
        if x0 >= m.n_states:
            raise SpecError("field 'initial_state': outside the state set")
        return m, MarkovPolicy.stationary_map(lambda x: "a", "the unique policy"), x0
    if "preset" in doc:
        name = doc["preset"]
        if "sequence" not in doc:
            raise SpecError(f"field 'sequence': preset {name!r} needs a sequence spec")
        u = from_spec(doc["sequence"])
        if name == "single-state":
            if x0 != 0:
                raise SpecError("field 'initial_state': single-state model only has state 0")
            m, p = single_state_construction(u)
        elif name == "chain":
            m, p = chain_construction(u)
        else:
            raise SpecError(f"field 'preset': unknown model preset {name!r}")
        return m, p, x0
    for key in ("actions", "transitions", "costs", "policy"):
        if key not in doc:
            raise SpecError(f"field {key!r} is required for a finite model")
    try:
        actions = {int(x): list(a) for x, a in doc["actions"].items()}
    except (AttributeError, ValueError):
        raise SpecError("field 'actions': expected a mapping state -> list of actions") from None
    trans, costs = {}, {}
    for x, acts in actions.items():
        for a in acts:
            try:
                row = doc["transitions"][str(x)][a]
                cost = doc["costs"][str(x)][a]
            except (KeyError, TypeError):
                raise SpecError(f"field 'transitions'/'costs': missing entry for state {x}, action {a!r}") from None
            trans[(x, a)] = {int(y): _as_fraction(q, f"transitions[{x}][{a}][{y}]") for y, q in row.items()}
            costs[(x, a)] = _as_fraction(cost, f"costs[{x}][{a}]")
    try:
        model = MarkovDecisionModel.from_tables(actions, trans, costs, doc.get("description", "finite model"))
    except ValueError as exc:
        raise SpecError(f"model tables: {exc}") from None
    pol = doc["policy"]
    if not isinstance(pol, dict):
        raise SpecError("field 'policy': expected a mapping state -> action or distribution")
    if all(isinstance(v, str) for v in pol.values()):
        phi = {int(x): a for x, a in pol.items()}
        policy = MarkovPolicy.stationary_map(phi)
    else:
        dists = {int(x): {a: _as_fraction(q, f"policy[{x}][{a}]") for a, q in d.items()} for x, d in pol.items()}
        policy = MarkovPolicy(lambda n, x: dists[x], False, "randomized stationary")
    if x0 >= model.n_states:
        raise SpecError("field 'initial_state': outside the state set")
    return model, policy, x0
