"""Generating-polynomial engine for the ripple recursion.

Row ``u`` is held as ``Q_u(x) = sum_{r>=1} Q(u, r) x^(r-1)`` plus the
absorbed mass ``Q(u, 0)`` on the side. One step is

    Q_{u-1}(x) = [(q x + 1 - q)^(u-1) Q_u(x / (q x + 1 - q)) - (1 - q)^(u-1) Q_u(0)] / x

Substituting the Mobius argument and expanding the power gives, per output
coefficient, ``sum_s c_s C(u-s, j) q^j (1-q)^(u-1-r)`` with ``j = r+1-s``.
Splitting the binomial into factorials turns the whole composition into a
single convolution

    Q(u-1, r) = (1-q)^t / (t! a^(r+1)) * sum_{s+j=r+1} [c_s (u-s)! a^s] [(q a)^j / j!]

with ``t = u-1-r`` and a balancing base ``a = u``. The convolution is done
exactly on fixed-point integers packed into one big integer (Kronecker
substitution); GMP multiplies those with FFT-based evaluation and
interpolation at roots of unity. Probabilities are carried as integers
scaled by ``2**precision_bits`` between rounds, so the only error per round
is one rounding per coefficient.
"""

from __future__ import annotations

import math

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpz

from .degree_dist import DegreeDistribution
from .errors import PrecisionLoss, ValidationError
from .finite_length import FiniteLengthResult, QVector, _degree_one_prob, precompute_q
from .sampler import CodeParameters

DRIFT_LIMIT = 1e-4
_GUARD = 16


def _pack(values: list, slot_bits: int) -> mpz:
    nbytes = slot_bits // 8
    buf = b"".join(int(v).to_bytes(nbytes, "little") for v in values)
    return mpz(int.from_bytes(buf, "little"))


def _unpack(value: mpz, slot_bits: int, lo: int, hi: int) -> list[mpz]:
    nbytes = slot_bits // 8
    raw = int(gmpy2.f_mod_2exp(value, slot_bits * hi)).to_bytes(nbytes * hi, "little")
    return [mpz(int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little")) for i in range(lo, hi)]


def _slot_bits(a_bits: int, b_bits: int, terms: int) -> int:
    bits = a_bits + b_bits + terms.bit_length() + 2
    return (bits + 7) // 8 * 8


def initial_coefficients(k: int, p1: float, P: int) -> tuple[list[mpz], mpz]:
    """Fixed-point ``Q(k, r)`` for ``r = 1..k`` and ``Q(k, 0)``.

    Coefficients of ``((p x + 1 - p)^k - (1 - p)^k) / x``.
    """
    prec = P + 64 + k.bit_length()
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        p = mpfr(p1)
        one_m = 1 - p
        scale = mpfr(2) ** P
        if p1 <= 0.0:
            return [mpz(0)] * k, mpz(2) ** P
        if p1 >= 1.0:
            return [mpz(0)] * (k - 1) + [mpz(2) ** P], mpz(0)
        # term_r = C(k, r) p^r (1-p)^(k-r) built from r = 0 upward in log-free form
        term = one_m**k
        coeffs = []
        z0 = gmpy2.rint(term * scale)
        ratio = p / one_m
        for r in range(1, k + 1):
            term = term * ratio * (k - r + 1) / r
            coeffs.append(mpz(gmpy2.rint(term * scale)))
        return coeffs, mpz(z0)


def transfer(coeffs: list[mpz], z0: mpz, q: float, P: int) -> tuple[list[mpz], mpz]:
    """One polynomial step from row ``u = len(coeffs)`` to row ``u - 1``.

    ``coeffs[s-1]`` is ``Q(u, s) * 2**P`` for ``s = 1..u``; ``z0`` is
    ``Q(u, 0) * 2**P``.
    """
    u = len(coeffs)
    if u < 2:
        raise ValidationError("transfer needs u >= 2")
    F = P + u.bit_length() + _GUARD
    prec = P + 64 + 2 * u.bit_length()
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        qm = mpfr(q)
        one_m = 1 - qm
        # absorbed mass: Q(u-1, 0) = Q(u, 0) + Q(u, 1) (1-q)^(u-1)
        z0_next = z0 + mpz(gmpy2.rint(coeffs[0] * one_m ** (u - 1)))
    if q <= 0.0:
        return list(coeffs[1:]), z0_next
    if q >= 1.0:
        # every remaining symbol joins the ripple
        return [mpz(0)] * (u - 2) + [sum(coeffs, mpz(0))], z0_next

    a = u
    # A_s = c_s (u-s)! a^s, exact
    A = []
    fact = mpz(1)
    facts = [mpz(1)] * u
    for i in range(1, u):
        fact *= i
        facts[i] = fact
    apow = mpz(1)
    for s in range(1, u + 1):
        apow *= a
        A.append(coeffs[s - 1] * facts[u - s] * apow)
    # B_j = (q a)^j / j! in fixed point with F fractional bits
    qa_bits = math.ceil(1.4427 * q * a) + 2
    with gmpy2.context(gmpy2.get_context(), precision=F + qa_bits + 64 + u.bit_length()):
        qa = mpfr(q) * a
        two_f = mpfr(2) ** F
        b = mpfr(1)
        B = []
        for j in range(u):
            B.append(mpz(gmpy2.floor(b * two_f)))
            b = b * qa / (j + 1)

    slot = _slot_bits(max(x.bit_length() for x in A), max(x.bit_length() for x in B), u)
    # slot index of A_s is s-1, of B_j is j; their product lands in slot r = s-1+j
    prod = _pack(A, slot) * _pack(B, slot)
    conv = _unpack(prod, slot, 1, u)  # r = 1..u-1

    out = [mpz(0)] * (u - 1)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        one_m = 1 - mpfr(q)
        two_mf = mpfr(2) ** (-F)
        # w_r = (1-q)^t / (t! a^(r+1)), walked from r = u-1 (t = 0) downward
        w = mpfr(1) / mpfr(a) ** u
        for r in range(u - 1, 0, -1):
            t = u - 1 - r
            if t > 0:
                w = w * one_m * a / t
            out[r - 1] = mpz(gmpy2.rint(mpfr(conv[r - 1]) * w * two_mf))
    return out, z0_next


def dp_poly(
    dist: DegreeDistribution,
    params: CodeParameters,
    precision_bits: int = 128,
    full_table: bool = False,
    drift_limit: float = DRIFT_LIMIT,
) -> FiniteLengthResult:
    """Failure probability through the polynomial recursion.

    Raises :class:`PrecisionLoss` when the total mass of a row drifts from
    one by more than ``drift_limit``; raise ``precision_bits`` or use the
    naive engine in that case.
    """
    if precision_bits < 8:
        raise ValidationError("precision_bits must be at least 8")
    P = int(precision_bits)
    k = params.k
    qp = precompute_q(dist, params)
    coeffs, z0 = initial_coefficients(k, _degree_one_prob(dist, params), P)
    one = mpz(2) ** P
    table = [] if full_table else None
    worst = 0.0

    def check(u):
        nonlocal worst
        total = sum(coeffs, z0)
        dev = abs(float(gmpy2.mpq(total - one, one)))
        worst = max(worst, dev)
        if dev > drift_limit:
            raise PrecisionLoss(
                f"row u={u} mass drifted by {dev:.3g} at {P} bits; "
                "raise precision_bits or use the naive engine"
            )
        if table is not None:
            probs = np.array([float(gmpy2.mpq(x, one)) for x in [z0, *coeffs]])
            table.append(QVector(u, probs))

    check(k)
    for u in range(k, 1, -1):
        coeffs, z0 = transfer(coeffs, z0, float(qp.q[u]), P)
        check(u - 1)
    return FiniteLengthResult(float(gmpy2.mpq(z0, one)), "poly", worst, table)
