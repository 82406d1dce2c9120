"""FLOP accounting for the two ESN detectors.

Two sets of closed forms are kept side by side: the per-frame table columns,
which are specialised to K = 16 (direct threshold prediction) and K = 1
(sample prediction), and the general (N, K) expressions they are derived
from. :func:`consistency_report` compares the two term by term.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import CostConsistencyError, InvalidInputError, UnsupportedParametersError


@dataclass(frozen=True)
class CostParams:
    N: int
    K: int
    n_max: int
    n0: int
    N_d: int
    N_s: int = 16
    m: int = 4
    L: int = 2

    def __post_init__(self):
        for name in ("N", "K", "n_max", "N_d", "N_s"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be positive")
        if self.n0 < 0 or self.m < 0 or self.L < 0:
            raise InvalidInputError("n0, m and L must be non-negative")
        if self.n0 >= self.n_max:
            raise InvalidInputError("need n0 < n_max")


METHOD2_DEFAULTS = CostParams(N=112, K=16, n_max=996, n0=100, N_d=1152)
METHOD1_DEFAULTS = CostParams(N=80, K=1, n_max=484, n0=100, N_d=540, N_s=16, m=4, L=2)


@dataclass(frozen=True)
class FlopCount:
    products: int
    summations: int

    def __post_init__(self):
        if self.products < 0 or self.summations < 0:
            raise InvalidInputError("FLOP counts must be non-negative")

    def __add__(self, other: "FlopCount") -> "FlopCount":
        return FlopCount(self.products + other.products, self.summations + other.summations)

    def scaled(self, k: int) -> "FlopCount":
        return FlopCount(self.products * k, self.summations * k)


@dataclass(frozen=True)
class CostBreakdown:
    training: FlopCount
    prediction: FlopCount       # per data symbol
    threshold: FlopCount        # per data symbol
    N_d: int

    @property
    def total(self) -> FlopCount:
        return self.training + (self.prediction + self.threshold).scaled(self.N_d)


# -- table columns --------------------------------------------------------

def method2_breakdown(p: CostParams) -> CostBreakdown:
    if p.K != 16:
        raise UnsupportedParametersError("the direct-prediction column is specialised to K = 16")
    N, d = p.N, p.n_max - p.n0
    training = FlopCount(
        (N * N + 18 * N) * p.n_max + (N + 16) * (N + 17) * d + (N + 16) ** 2 * (N + 17),
        (N * N + 15 * N + 2) * p.n_max + (N + 16) * (N + 17) * d + (N + 16) ** 2 * (N + 18) + 1,
    )
    prediction = FlopCount(N * N + 19 * N + 16, N * N + 16 * N + 17)
    return CostBreakdown(training, prediction, FlopCount(0, 0), p.N_d)


def method1_breakdown(p: CostParams) -> CostBreakdown:
    if p.K != 1:
        raise UnsupportedParametersError("the sample-prediction column is specialised to K = 1")
    N, d, ns = p.N, p.n_max - p.n0, p.N_s
    training = FlopCount(
        (N * N + 2 * N) * p.n_max * ns + (N + 1) * (N + 2) * d * ns + (N + 1) ** 2 * (N + 2),
        (N * N + 1) * p.n_max * ns + (N + 1) * (N + 2) * d * ns + N * (N + 1) ** 2 + N * N,
    )
    prediction = FlopCount(8 * (N * N + 3 * N + 1), 8 * (N * N + N + 1))
    threshold = FlopCount((p.m + 1) * p.L, p.m * p.L)
    return CostBreakdown(training, prediction, threshold, p.N_d)


def method2_frame_cost(p: CostParams = METHOD2_DEFAULTS) -> FlopCount:
    """Printed one-frame total for direct threshold prediction."""
    N, d = p.N, p.n_max - p.n0
    if p.K != 16:
        raise UnsupportedParametersError("the direct-prediction column is specialised to K = 16")
    return FlopCount(
        (N * N + 18 * N) * p.n_max + (N + 16) * (N + 17) * d
        + p.N_d * (N * N + 19 * N + 16) + (N + 16) ** 2 * (N + 17),
        (N * N + 15 * N + 2) * p.n_max + (N + 16) * (N + 17) * d
        + p.N_d * (N * N + 16 * N + 17) + (N + 16) ** 2 * (N + 18) + 1,
    )


def method1_frame_cost(p: CostParams = METHOD1_DEFAULTS) -> FlopCount:
    """Printed one-frame total for sample prediction plus threshold calculation."""
    if p.K != 1:
        raise UnsupportedParametersError("the sample-prediction column is specialised to K = 1")
    N, d, ns = p.N, p.n_max - p.n0, p.N_s
    return FlopCount(
        (N * N + 2 * N) * p.n_max * ns + (N + 1) * (N + 2) * d * ns
        + 8 * p.N_d * (N * N + 3 * N + 1) + p.N_d * (p.m + 1) * p.L + (N + 1) ** 2 * (N + 2),
        (N * N + 1) * p.n_max * ns + (N + 1) * (N + 2) * d * ns
        + 8 * p.N_d * (N * N + N + 1) + p.N_d * p.m * p.L + N * (N + 1) ** 2 + N * N,
    )


def per_symbol_average(frame: FlopCount, N_d: int) -> tuple[float, float]:
    """Frame cost divided by the number of data symbols (pilots excluded)."""
    if N_d < 1:
        raise InvalidInputError("N_d must be >= 1")
    return frame.products / N_d, frame.summations / N_d


def per_symbol_exact(frame: FlopCount, N_d: int) -> tuple[Fraction, Fraction]:
    if N_d < 1:
        raise InvalidInputError("N_d must be >= 1")
    return Fraction(frame.products, N_d), Fraction(frame.summations, N_d)


# -- general (N, K) expressions -------------------------------------------------

def general_direct_breakdown(p: CostParams) -> CostBreakdown:
    """Direct threshold prediction for any input width K."""
    N, K, d = p.N, p.K, p.n_max - p.n0
    M = N + K
    update = FlopCount((N * N + N * K + 2 * N) * p.n_max, (N * N + N * (K - 1) + 2) * p.n_max)
    readout = FlopCount(
        M * M * (d + 1) + M * d + M ** 3,
        M * M * (d - 1) + M * (d - 1) + M ** 3 + M * (M - 1) + 1,
    )
    prediction = FlopCount(N * N + N * K + 3 * N + K, N * N + N * K + K + 1)
    return CostBreakdown(update + readout, prediction, FlopCount(0, 0), p.N_d)


def general_sample_breakdown(p: CostParams) -> CostBreakdown:
    """Oversampled sample prediction (8 iterated steps) plus threshold calculation."""
    N, K, ns = p.N, p.K, p.N_s
    M = N + K
    n = (p.n_max - p.n0) * ns
    update = FlopCount((N * N + N * K + N) * p.n_max * ns, (N * N + N * K - N + 1) * p.n_max * ns)
    readout = FlopCount(
        M * M * (n + 1) + M * n + M ** 3,
        M * M * (n - 1) + M * (n - 1) + M ** 3 + M * (M - 1) + 1,
    )
    prediction = FlopCount(8 * (N * N + N * K + 2 * N + K), 8 * (N * N + N * K + K))
    threshold = FlopCount((p.m + 1) * p.L, p.m * p.L)
    return CostBreakdown(update + readout, prediction, threshold, p.N_d)


@dataclass(frozen=True)
class Mismatch:
    method: str
    row: str
    kind: str
    table: int
    general: int

    @property
    def delta(self) -> int:
        return self.table - self.general


def consistency_report(p2: CostParams = METHOD2_DEFAULTS,
                       p1: CostParams = METHOD1_DEFAULTS) -> list[Mismatch]:
    """Every row/column where the table disagrees with the general form."""
    out = []
    pairs = (("method2", method2_breakdown(p2), general_direct_breakdown(p2)),
             ("method1", method1_breakdown(p1), general_sample_breakdown(p1)))
    for method, table, general in pairs:
        for row in ("training", "prediction", "threshold"):
            a, b = getattr(table, row), getattr(general, row)
            for kind in ("products", "summations"):
                if getattr(a, kind) != getattr(b, kind):
                    out.append(Mismatch(method, row, kind, getattr(a, kind), getattr(b, kind)))
    return out


def check_consistency(p2: CostParams = METHOD2_DEFAULTS, p1: CostParams = METHOD1_DEFAULTS) -> None:
    mismatches = consistency_report(p2, p1)
    if mismatches:
        detail = "; ".join(f"{m.method} {m.row} {m.kind}: table {m.table} vs general {m.general}"
                           for m in mismatches)
        raise CostConsistencyError(detail)


def solve_path_count(avg_products: float, p: CostParams = METHOD1_DEFAULTS) -> float:
    """Path count L implied by a per-symbol product average (sample-prediction column)."""
    base = method1_frame_cost(CostParams(p.N, p.K, p.n_max, p.n0, p.N_d, p.N_s, p.m, 0))
    return (avg_products * p.N_d - base.products) / (p.N_d * (p.m + 1))


# -- presentation -----------------------------------------------------------------

def cost_table(p2: CostParams = METHOD2_DEFAULTS, p1: CostParams = METHOD1_DEFAULTS):
    """Rows ``(method, products_per_frame, summations_per_frame, products_per_symbol,
    summations_per_symbol)``."""
    rows = []
    for name, frame, nd in (("method1", method1_frame_cost(p1), p1.N_d),
                            ("method2", method2_frame_cost(p2), p2.N_d)):
        ps, ss = per_symbol_average(frame, nd)
        rows.append((name, frame.products, frame.summations, ps, ss))
    return rows


def format_csv(rows) -> str:
    lines = ["method,products_per_frame,summations_per_frame,products_per_symbol,summations_per_symbol"]
    lines += [f"{m},{p},{s},{ps:.3f},{ss:.3f}" for m, p, s, ps, ss in rows]
    return "\n".join(lines) + "\n"


def format_text(rows) -> str:
    header = ("method", "products/frame", "summations/frame", "products/symbol", "summations/symbol")
    body = [(m, f"{p:,}", f"{s:,}", f"{ps:.3f}", f"{ss:.3f}") for m, p, s, ps, ss in rows]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                              for i, (c, w) in enumerate(zip(r, widths)))
    return "\n".join([fmt(header), fmt(tuple("-" * w for w in widths)), *map(fmt, body)]) + "\n"
