"""Self-checks of the structural identities the library relies on.

Each check returns a :class:`CheckResult` carrying the worst residual it
measured and the tolerance it was held to.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .. import fresnel
from ..channel import ChannelSpec, channel_matrix, effective_channel, sample_channel
from ..diversity import error_matrix, order_set, witness_error
from ..modem import BPSK, PAM4, QPSK, Kind, ModulationParams, demodulate, modulate, modulation_matrix
from ..numerics import numerical_rank
from ..papr import overall_papr_exhaustive


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


def _check(name, residual, tol, detail="") -> CheckResult:
    residual = float(residual)
    return CheckResult(name, bool(residual <= tol), residual, tol, detail)


def check_dfnt_unitary() -> CheckResult:
    worst = 0.0
    for n in range(1, 33):
        phi = fresnel.dfnt_matrix(n)
        worst = max(worst, np.linalg.norm(phi @ phi.conj().T - np.eye(n)))
    return _check("dfnt_unitary", worst, 1e-12, "N = 1..32")


def check_fresnel_commutation() -> CheckResult:
    worst = 0.0
    for n in range(2, 13):
        phi = fresnel.dfnt_matrix(n)
        for q in range(-n, n + 1):
            lhs = phi @ fresnel.phase_diag_matrix(n, q) @ phi.conj().T
            rhs = fresnel.alpha(q, n) * fresnel.phase_diag_matrix(n, q) @ fresnel.cyclic_shift_matrix(n, q)
            worst = max(worst, np.linalg.norm(lhs - rhs))
    return _check("fresnel_commutation", worst, 1e-10, "N = 2..12, |q| <= N")


def check_idfnt_circulant() -> CheckResult:
    worst = 0.0
    for n in range(1, 17):
        inv = fresnel.idfnt_matrix(n)
        col0 = inv[:, 0]
        for c in range(n):
            worst = max(worst, np.max(np.abs(inv[:, c] - fresnel.cyclic_shift_matrix(n, c) @ col0)))
    return _check("idfnt_circulant", worst, 1e-12, "N = 1..16")


def check_kron_circulant() -> CheckResult:
    worst = 0.0
    for m in range(1, 5):
        for n in range(1, 7):
            big = np.kron(fresnel.idfnt_matrix(n), np.eye(m))
            t = np.zeros(m)
            t[0] = 1.0
            first = np.kron(fresnel.idfnt_first_column(n), t)
            k = m * n
            circ = np.column_stack([np.roll(first, c) for c in range(k)])
            worst = max(worst, np.max(np.abs(big - circ)))
    return _check("kron_circulant", worst, 1e-12, "M = 1..4, N = 1..6")


def _random_tuple(rng):
    return int(rng.integers(1, 9)), int(rng.integers(1, 9)), int(rng.integers(0, 4)), int(rng.integers(0, 3))


def check_effective_channel(draws: int = 200, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        M, N, L, Q = _random_tuple(rng)
        spec = ChannelSpec(L, Q, M * N)
        p = ModulationParams(M, N)
        h = sample_channel(spec, rng)
        a = modulation_matrix(p)
        brute = a.conj().T @ channel_matrix(h, spec) @ a
        closed = effective_channel(h, spec, p)
        worst = max(worst, np.linalg.norm(closed - brute) / np.linalg.norm(brute))
    return _check("effective_channel_closed_form", worst, 1e-9, f"{draws} random (M, N, L, Q)")


def check_max_order_grid() -> CheckResult:
    bad = 0
    for L in range(4):
        for Q in range(3):
            rho = (L + 1) * (2 * Q + 1)
            for M in range(1, 9):
                for N in range(1, 9):
                    size = order_set(L, Q, M, N).size
                    if size > min(rho, M * N):
                        bad += 1
                    if M >= L + 1 and N >= 2 * Q + 1 and size != rho:
                        bad += 1
            K = 12
            if order_set(L, Q, K, 1).size != min(L + 1, K):
                bad += 1
            if K >= L + 2 * Q + 1 and order_set(L, Q, 1, K).size != L + 2 * Q + 1:
                bad += 1
    return _check("max_order_condition_grid", bad, 0, "L <= 3, Q <= 2, M, N <= 8; mismatches counted")


def check_error_factorization(draws: int = 100, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        M, N, L, Q = _random_tuple(rng)
        K = M * N
        spec = ChannelSpec(L, Q, K)
        p = ModulationParams(M, N)
        h = sample_channel(spec, rng)
        s = QPSK.points[rng.integers(0, 4, K)]
        e = s - QPSK.points[rng.integers(0, 4, K)]
        if not np.any(e):
            e[0] = s[0] - QPSK.points[0] if s[0] != QPSK.points[0] else s[0] - QPSK.points[1]
        lhs = effective_channel(h, spec, p) @ e
        rhs = error_matrix(s, e, spec, p) @ h
        worst = max(worst, np.linalg.norm(lhs - rhs) / (np.linalg.norm(h) * np.linalg.norm(e)))
    return _check("error_matrix_factorization", worst, 1e-9, f"{draws} random draws")


def check_witnesses(seed: int = 5) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for K, M, N, L, Q in ((8, 2, 4, 1, 1), (12, 2, 6, 1, 1), (12, 4, 3, 1, 1), (12, 12, 1, 1, 1), (12, 1, 12, 1, 1), (8, 8, 1, 1, 0)):
        spec = ChannelSpec(L, Q, K)
        p = ModulationParams(M, N)
        s = QPSK.points[rng.integers(0, 4, K)]
        size = order_set(L, Q, M, N).size
        if numerical_rank(error_matrix(s, witness_error(QPSK, K, "e1", s), spec, p)) != size:
            bad += 1
        const = np.full(K, QPSK.points[0])
        e0 = witness_error(QPSK, K, "e0", const)
        if numerical_rank(error_matrix(const, e0, spec, p)) > 2 * Q + 1:
            bad += 1
    return _check("diversity_witnesses", bad, 0, "e1 attains |O|; e0 rank <= 2Q+1")


def check_modem_round_trip(seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for kind in Kind:
        for M, N in ((1, 1), (4, 3), (2, 6), (1, 12), (12, 1), (5, 7)):
            p = ModulationParams(M, N, kind)
            s = rng.standard_normal(p.K) + 1j * rng.standard_normal(p.K)
            worst = max(worst, np.linalg.norm(demodulate(modulate(s, p), p) - s))
            worst = max(worst, abs(np.linalg.norm(modulate(s, p)) - np.linalg.norm(s)))
            worst = max(worst, np.linalg.norm(modulate(s, p) - modulation_matrix(p) @ s))
    return _check("modem_round_trip", worst, 1e-10, "all kinds, assorted (M, N)")


OVERALL_PAPR_REFERENCE = {
    ("bpsk", 3): 2.33, ("bpsk", 5): 3.59, ("bpsk", 9): 5.28, ("bpsk", 12): 7.97,
    ("qpsk", 3): 2.82, ("qpsk", 5): 4.44, ("qpsk", 9): 7.90,
    ("4pam", 3): 4.2, ("4pam", 5): 6.46, ("4pam", 9): 9.51,
}


def check_overall_papr() -> CheckResult:
    worst = 0.0
    consts = {"bpsk": BPSK, "qpsk": QPSK, "4pam": PAM4}
    for (name, N), ref in OVERALL_PAPR_REFERENCE.items():
        value, _ = overall_papr_exhaustive(ModulationParams(1, N), consts[name])
        worst = max(worst, abs(value - ref))
    return _check("overall_papr_table", worst, 0.01, "reference values for N <= 9 and BPSK N = 12")


CHECKS = (
    check_dfnt_unitary,
    check_fresnel_commutation,
    check_idfnt_circulant,
    check_kron_circulant,
    check_effective_channel,
    check_max_order_grid,
    check_error_factorization,
    check_witnesses,
    check_modem_round_trip,
    check_overall_papr,
)


def run_verify() -> list[CheckResult]:
    return [check() for check in CHECKS]


def report_json(results) -> str:
    return json.dumps(
        {"passed": all(r.passed for r in results), "checks": [asdict(r) for r in results]}, indent=2
    ) + "\n"


def report_csv(results) -> str:
    lines = ["check,passed,residual,tolerance,detail"]
    for r in results:
        lines.append(f'{r.name},{str(r.passed).lower()},{r.residual!r},{r.tolerance!r},"{r.detail}"')
    return "\n".join(lines) + "\n"
