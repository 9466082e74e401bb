"""Quantum-advantage calculus for Carleman lattice Boltzmann time marching.

Every probability and cost is evaluated in log space: quantities such as
``10^-4000`` or ``G^N`` with ``N`` near Avogadro's number are not
representable as floats.

``log_base`` selects the logarithm inside the qubit ratio ``k log G / G``:
``"e"`` (natural, the default) or ``"2"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ConfigError, DomainError

AVOGADRO = 6e23
FLOPS_PER_DOF = 1e3
LN2 = math.log(2.0)


def _ln_log(G: float, log_base: str) -> float:
    """``ln(log_b G)``."""
    if log_base in ("e", "natural", "ln"):
        return math.log(math.log(G))
    if log_base in ("2", "log2"):
        return math.log(math.log2(G))
    raise DomainError(f"unknown log base {log_base!r}; use 'e' or '2'")


@dataclass
class FlowScenario:
    name: str
    Re: Optional[float] = None
    U: Optional[float] = None
    L: Optional[float] = None
    nu: Optional[float] = None
    k: int = 2
    q_a: Sequence[int] = field(default_factory=lambda: [7])

    def __post_init__(self):
        if self.Re is None:
            if None in (self.U, self.L, self.nu):
                raise DomainError(f"scenario {self.name!r} needs Re or all of U, L, nu")
            self.Re = self.U * self.L / self.nu
        if not self.Re >= 1:
            raise DomainError(f"Reynolds number must be >= 1, got {self.Re}")

    @property
    def G(self) -> float:
        return self.Re**2.25

    @property
    def log10_G(self) -> float:
        return 2.25 * math.log10(self.Re)

    @property
    def T_classical(self) -> float:
        return self.G ** (1.0 / 3.0)

    @property
    def N_dof(self) -> float:
        return self.Re**3

    @property
    def flops(self) -> float:
        return FLOPS_PER_DOF * self.Re**3


def scenario_derive(s: FlowScenario) -> dict:
    return {
        "name": s.name,
        "Re": s.Re,
        "G": s.G,
        "T_classical": s.T_classical,
        "N_dof": s.N_dof,
        "flops": s.flops,
        "qubits": qubit_count(s.G, s.k),
    }


# water faucet, full airliner (G = 1e15), global weather
DEFAULT_SCENARIOS = (
    FlowScenario("faucet", U=1.0, L=0.01, nu=1e-6),
    FlowScenario("airliner", Re=10 ** (20 / 3)),
    FlowScenario("weather", Re=1e12),
)


def qubit_count(G: float, k: int) -> int:
    """``ceil(k log2 G)`` qubits for ``G^k`` Carleman variables."""
    if G < 1 or k < 1:
        raise DomainError("G and k must be >= 1")
    return math.ceil(k * math.log2(G) - 1e-9)


def ln_msp(G: float, T: float, k: int, log_base: str = "e") -> float:
    """Natural log of the minimum success probability."""
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if G <= 1:
        raise DomainError(f"G must exceed 1, got {G}")
    ln_ratio = math.log(k) + _ln_log(G, log_base) - math.log(G)
    if ln_ratio >= 0:
        raise DomainError(f"k log G >= G for G={G!r}, k={k}")
    return ln_ratio / T


def msp(G: float, T: float, k: int = 2, log_base: str = "e") -> float:
    """Minimum single-step success probability ``(k log G / G)^(1/T)``."""
    return math.exp(ln_msp(G, T, k, log_base))


def msp_direct(G: float, T: float, k: int = 2, log_base: str = "e") -> float:
    """Straight evaluation of the same formula, for cross-checks."""
    lg = math.log(G) if log_base == "e" else math.log2(G)
    return (k * lg / G) ** (1.0 / T)


def log10_win_over_nbse(G: float, k: int, N: float, T: float) -> float:
    if not N >= k:
        raise DomainError(f"need N >= k, got N={N}, k={k}")
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    return (k - N) / T * math.log10(G)


def win_over_nbse(G: float, k: int, N: float, T: float) -> float:
    """Threshold ``G^((k - N)/T)`` above which the Carleman march beats the
    N-body Schrodinger route."""
    return 10.0 ** log10_win_over_nbse(G, k, N, T)


def nbse_max_steps(G: float, k: int, N: float, p: float) -> float:
    """Largest ``T`` with ``p >= G^((k - N)/T)``, i.e. ``(N - k) log G / -log p``."""
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    return (N - k) * math.log10(G) / -math.log10(p)


def max_steps(G: float, k: int, q_a: int, log_base: str = "e") -> Optional[int]:
    """Largest ``T`` with ``msp(G, T, k) <= 2^(-2 q_a)``.

    Returns None when the bound is 1 (``q_a = 0``, no limit) and 0 when even
    a single step is out of reach.
    """
    if q_a < 0:
        raise DomainError(f"q_a must be >= 0, got {q_a}")
    if q_a == 0:
        return None
    ln_bound = -2 * q_a * LN2
    gap = -ln_msp(G, 1, k, log_base)  # ln G - ln(k log G)
    T = math.floor(gap / (2 * q_a * LN2))
    # guard the floor against rounding at the boundary
    while T >= 1 and ln_msp(G, T, k, log_base) > ln_bound:
        T -= 1
    while ln_msp(G, T + 1, k, log_base) <= ln_bound:
        T += 1
    return max(T, 0)


def clb_beats_ns(G: float, k: int, T: float, p: float) -> bool:
    """``p >= (k log2 G / G)^(1/T)``."""
    return math.log(p) >= ln_msp(G, T, k, log_base="2")


@dataclass
class Comparison:
    metric: str
    log10_nbse: float
    log10_clb: float
    log10_ns: float

    @property
    def winner(self) -> str:
        costs = {"NBSE": self.log10_nbse, "CLB": self.log10_clb, "NS": self.log10_ns}
        return min(costs, key=costs.get)


def compare_three_ways(G: float, k: int, N: float, T: float, p: float) -> dict:
    """log10 costs of the N-body Schrodinger (NBSE), Carleman lattice
    Boltzmann (CLB) and classical Navier-Stokes (NS) routes.

    ``raw``: ``T G^N``, ``T G^k p^-T``, ``T G``.
    ``qubits``: ``N log2 G``, ``k log2 G``, ``G``.
    ``advantage``: qubit counts with the CLB count inflated by ``p^-T``;
    CLB wins against NS here exactly when ``clb_beats_ns`` holds.
    """
    if min(G, k, N, T) <= 0 or not 0 < p <= 1:
        raise DomainError("counts must be positive and 0 < p <= 1")
    lg = math.log10(G)
    lt = math.log10(T)
    l2g = math.log2(G)
    raw = Comparison("raw", lt + N * lg, lt + k * lg - T * math.log10(p), lt + lg)
    qubits = Comparison(
        "qubits", math.log10(N * l2g), math.log10(k * l2g), lg
    )
    adv = Comparison(
        "advantage",
        math.log10(N * l2g),
        math.log10(k * l2g) - T * math.log10(p),
        lg,
    )
    return {
        "raw": raw,
        "qubits": qubits,
        "advantage": adv,
        "clb_beats_ns": clb_beats_ns(G, k, T, p),
    }


def one_step_threshold(G: float, k: int = 2) -> tuple[float, float]:
    """Single-step break-even probability two ways: qubit count over grid
    size, and the T = 1 minimum success probability."""
    return qubit_count(G, k) / G, msp(G, 1, k)


# -- scenario files ----------------------------------------------------------

_SCENARIO_KEYS = {"name", "Re", "U", "L", "nu", "k", "q_a"}


def parse_scenarios(text: str) -> list[FlowScenario]:
    """Blank-line separated blocks of ``key=value`` lines; ``#`` starts a
    comment.  ``q_a`` accepts a comma-separated list."""
    blocks: list[dict] = []
    current: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if current:
                blocks.append(current)
                current = {}
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCENARIO_KEYS:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r}; valid keys: {sorted(_SCENARIO_KEYS)}"
            )
        current[key] = value
    if current:
        blocks.append(current)
    out = []
    for b in blocks:
        if "name" not in b:
            raise ConfigError("scenario block without a name")
        try:
            kw = {
                key: float(b[key]) for key in ("Re", "U", "L", "nu") if key in b
            }
            if "k" in b:
                kw["k"] = int(b["k"])
            if "q_a" in b:
                kw["q_a"] = [int(v) for v in b["q_a"].split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"scenario {b['name']!r}: {exc}") from None
        out.append(FlowScenario(b["name"], **kw))
    return out
