"""Certified search for a superspecial prime of a moduli point j0 on E_6.

Given the minimal polynomial of j0 (and e = [L : Q(j0)]), pick one of the
three admissible cases, sieve primes l, and for each D in {-4l, -l, -3l}
evaluate the norm N = d^{h'} |Nm P_D(j0)| and the symbol (D/N).  A value of
-1 forces a prime p | N with (D/p) = -1, which is extracted by factoring N
and written to a self-contained certificate.

All arithmetic here is exact; floating point only enters through P_D.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import gcd

from sympy import factorint, isprime, pollard_rho, primerange

from . import __version__, polys
from . import cm_uniformization as cm
from .quadratic_arith import jacobi_steps, kronecker
from .reduction_checks import ELLIPTIC_J, run_checks

L_MAX = 5000
CASE_PRIORITY = (3, 2, 1)
TRIAL_LIMIT = 10**6

# residue of l mod 24 and D as a function of l, per case
CASE_FAMILY = {1: (13, lambda l: -4 * l), 2: (19, lambda l: -l), 3: (1, lambda l: -3 * l)}


class HypothesisError(ValueError):
    """The input violates a hypothesis of the construction."""


class DegenerateError(RuntimeError):
    """j0 is itself a root of P_D, so Nm P_D(j0) = 0."""


class ChainError(RuntimeError):
    """Stepwise reciprocity and direct Kronecker evaluation disagree."""


class SearchExhausted(RuntimeError):
    def __init__(self, msg, stats):
        super().__init__(msg)
        self.stats = stats


# --------------------------------------------------------------------------
# Input.
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModuliInput:
    minpoly: tuple                 # monic, Fractions, leading first
    degree_mult: int = 1
    real_conjugates: tuple = ()    # isolating intervals (lo, hi), ascending
    n: int = 0
    d: int = 1

    @property
    def g(self) -> int:
        return len(self.minpoly) - 1

    @property
    def field_degree(self) -> int:
        """[L : Q] = e * g."""
        return self.degree_mult * self.g

    @property
    def r(self) -> int:
        return len(self.real_conjugates)

    def minpoly_str(self) -> list[str]:
        return [str(c) for c in self.minpoly]


def parse_moduli(minpoly, degree_mult: int = 1) -> ModuliInput:
    """Validate j0 given by its minimal polynomial (string or coefficient list)."""
    coeffs = polys.parse_poly(minpoly) if isinstance(minpoly, str) else tuple(Fraction(c) for c in minpoly)
    while coeffs and coeffs[0] == 0:
        coeffs = coeffs[1:]
    if len(coeffs) < 2:
        raise HypothesisError("minimal polynomial must have degree at least 1")
    if degree_mult < 1:
        raise HypothesisError("degree_mult must be a positive integer")
    coeffs = tuple(c / coeffs[0] for c in coeffs)
    if not polys.is_irreducible(coeffs):
        raise HypothesisError(f"{polys.format_poly(coeffs)} is reducible over Q")
    if coeffs[-1] == 0:
        raise HypothesisError("j0 = 0 is an elliptic point (CM by Z[i])")
    if polys.evaluate(coeffs, ELLIPTIC_J) == 0:
        raise HypothesisError("j0 = -16/27 is an elliptic point (CM by Z[sqrt(-6)])")
    g = len(coeffs) - 1
    norm = ((-1) ** g * coeffs[-1]) ** degree_mult
    n, d = norm.numerator, norm.denominator
    if gcd(gcd(n, d), 6) != 1:
        raise HypothesisError(f"gcd(n, d, 6) != 1 for Nm(j0) = {norm}")
    return ModuliInput(minpoly=coeffs, degree_mult=degree_mult,
                       real_conjugates=tuple(polys.real_root_intervals(coeffs)), n=n, d=d)


def _shifted_poly(inp: ModuliInput) -> tuple:
    """Monic minimal polynomial of 27 j0 + 16."""
    g = inp.g
    comp = polys.compose_affine(inp.minpoly, Fraction(1, 27), Fraction(-16, 27))
    return tuple(c * 27**g for c in comp)


def norm_of_shift(inp: ModuliInput) -> Fraction:
    """Nm_{L/Q}(27 j0 + 16)."""
    t = _shifted_poly(inp)
    return ((-1) ** inp.g * t[-1]) ** inp.degree_mult


# --------------------------------------------------------------------------
# Local data at 2 and 3, the prime set, the case.
# --------------------------------------------------------------------------

def local_valuation_signs(inp: ModuliInput, q: int) -> str:
    vals = polys.root_valuations(inp.minpoly, q)
    if all(v == 0 for v in vals):
        return "all_zero"
    if all(v <= 0 for v in vals):
        return "all_nonpositive"
    if all(v >= 0 for v in vals):
        return "all_nonnegative"
    return "mixed"


def _nonpos(cls):
    return cls in ("all_zero", "all_nonpositive")


def _nonneg(cls):
    return cls in ("all_zero", "all_nonnegative")


def _primes_of(coeffs) -> set:
    out = set()
    for c in coeffs:
        out |= set(factorint(Fraction(c).denominator))
    a0 = Fraction(coeffs[-1])
    if a0 != 0:
        out |= set(factorint(abs(a0.numerator)))
    return out


def prime_set(inp: ModuliInput) -> tuple[int, ...]:
    """{2, 3} together with the primes occurring in j0 or 27 j0 + 16."""
    s = {2, 3} | _primes_of(inp.minpoly) | _primes_of(_shifted_poly(inp))
    s.discard(1)
    return tuple(sorted(s))


def _count_in(inp, lo, hi) -> int:
    # conjugates are never at -16/27 or 0 (rejected in parse_moduli)
    return polys.count_roots_between(inp.minpoly, lo, hi)


@dataclass(frozen=True)
class CaseSelection:
    case: int | None
    satisfied: tuple
    trace: dict

    @property
    def applicable(self) -> bool:
        return self.case is not None


def case_select(inp: ModuliInput, force: int | None = None) -> CaseSelection:
    """Evaluate the three conditions exactly; the chosen case follows CASE_PRIORITY."""
    v2, v3 = local_valuation_signs(inp, 2), local_valuation_signs(inp, 3)
    shift = norm_of_shift(inp)
    v3dQ = polys.vp(inp.d * shift, 3)
    LQ = inp.field_degree
    n_I2 = _count_in(inp, ELLIPTIC_J, 0)
    n_I3 = _count_in(inp, 0, None)
    n_I1 = _count_in(inp, None, ELLIPTIC_J)
    real = inp.r >= 1
    trace = {
        "v2": v2, "v3": v3, "field_degree": LQ, "d": inp.d, "v3(d*Nm(27j0+16))": v3dQ,
        "real_conjugates": inp.r, "in_I1": n_I1, "in_I2": n_I2, "in_I3": n_I3,
        "parity_odd": (LQ + v3dQ) % 2 == 1,
    }
    cond = {
        1: real and _nonpos(v2) and _nonpos(v3) and ((LQ + v3dQ) % 2 == 1 or n_I2 > 0),
        2: real and _nonneg(v2) and _nonpos(v3) and n_I3 > 0,
        3: real and LQ % 2 == 0 and _nonneg(v2) and _nonneg(v3) and (n_I1 + n_I3) > 0,
    }
    trace["conditions"] = {str(k): v for k, v in cond.items()}
    satisfied = tuple(k for k in (1, 2, 3) if cond[k])
    if force is not None:
        chosen = force if cond.get(force) else None
    else:
        chosen = next((k for k in CASE_PRIORITY if cond[k]), None)
    return CaseSelection(case=chosen, satisfied=satisfied, trace=trace)


# --------------------------------------------------------------------------
# Clearing denominators and the norm profile.
# --------------------------------------------------------------------------

def _allowed_primes(case: int, S) -> set:
    drop = {1: set(), 2: {2}, 3: {2, 3}}[case]
    return set(S) - drop


def choose_clearing_d(inp: ModuliInput, case: int) -> int:
    """Least d with d * prod_{sigma in T} sigma(j0) integral for every T.

    At q the worst subset multiplies all conjugates of negative valuation;
    their valuations sum to min_k v_q(a_k), each root counted e times.
    """
    allowed = _allowed_primes(case, prime_set(inp))
    d = 1
    for q in prime_set(inp):
        m = min(polys.vp(c, q) for c in inp.minpoly if c != 0)
        if m < 0:
            if q not in allowed:
                raise HypothesisError(f"case {case} forbids clearing the prime {q}")
            d *= q ** (-inp.degree_mult * m)
    return d


@dataclass(frozen=True)
class NormProfile:
    nm: Fraction          # Nm_{L/Q}(P_D(j0))
    P: Fraction           # |nm|
    Q: Fraction           # |Nm(27 j0 + 16)|
    s: int
    s_prime: int
    dchain: int
    h_prime: int
    N: int
    dQ: Fraction
    v3dQ: int
    v2Q: int


def norm_profile(inp: ModuliInput, P: cm.HeegnerPolynomial, dchain: int) -> NormProfile:
    """Nm P_D(j0) = (prod P_D(alpha) over roots of minpoly)^e with the integral P_D (leading coefficient b included)."""
    res = polys.norm_value(inp.minpoly, P.coeffs)
    if res == 0:
        raise DegenerateError(f"j0 is a root of P_{P.D} (a CM point of discriminant {P.D})")
    nm = res**inp.degree_mult
    shift = norm_of_shift(inp)
    h = P.degree
    N = dchain**h * abs(nm)
    if N.denominator != 1:
        raise HypothesisError(f"N = {N} is not integral; the clearing integer {dchain} is too small")
    dQ = dchain * abs(shift)
    return NormProfile(nm=nm, P=abs(nm), Q=abs(shift), s=1 if nm > 0 else -1,
                       s_prime=1 if shift > 0 else -1, dchain=dchain, h_prime=h, N=int(N),
                       dQ=dQ, v3dQ=polys.vp(dQ, 3), v2Q=polys.vp(abs(shift), 2))


def sign_by_real_conjugates(inp: ModuliInput, coeffs) -> int:
    """Product of sign(f(j_i)) over real conjugates, each counted e times."""
    order = polys.merged_real_roots({"f": coeffs, "J": inp.minpoly})
    lead = 1 if coeffs[0] > 0 else -1
    sign = 1
    for i, (key, _) in enumerate(order):
        if key == "J":
            above = sum(1 for k, _ in order[i + 1:] if k == "f")
            sign *= lead * (-1) ** above
    return sign**inp.degree_mult


# --------------------------------------------------------------------------
# Sieve and root placement.
# --------------------------------------------------------------------------

def sieve_l(case: int, S, l_max: int = L_MAX):
    """Primes l <= l_max in the residue class of the case, with the symbol conditions."""
    res = CASE_FAMILY[case][0]
    odd = [q for q in S if q not in (2, 3)]
    for l in primerange(5, l_max + 1):
        if l % 24 != res or l in S:
            continue
        if case == 1 and all(kronecker(-l, q) == 1 for q in odd):
            yield l
        elif case == 2 and all(kronecker(q, l) == 1 and kronecker(-l, q) == 1 for q in odd):
            yield l
        elif case == 3 and all(kronecker(-3 * l, q) == 1 for q in odd):
            yield l


@dataclass(frozen=True)
class Placement:
    ok: bool
    rule: str
    detail: str = ""


def _order(inp, P, extra=None):
    tagged = {"P": P.coeffs, "J": inp.minpoly, "E": (Fraction(27), Fraction(16)), "Z": (Fraction(1), Fraction(0))}
    if extra:
        tagged.update(extra)
    return [k for k, _ in polys.merged_real_roots(tagged)]


def _first_after(seq, start, wanted, stop):
    """True if a `wanted` key appears after index `start` before any key in `stop`."""
    for k in seq[start + 1:]:
        if k == wanted:
            return True
        if k in stop:
            return False
    return False


def root_placement_ok(case: int, P: cm.HeegnerPolynomial, inp: ModuliInput, prof: NormProfile) -> Placement:
    LQ = inp.field_degree
    if case == 1:
        parity = (LQ + prof.v3dQ) % 2
        if parity == 1:
            # reflect the conjugates through -16/27 to compare distances exactly
            refl = polys.compose_affine(inp.minpoly, Fraction(-1), Fraction(-32, 27))
            refl = tuple(c * (-1) ** inp.g for c in refl)
            try:
                seq = _order(inp, P, {"R": refl})
            except ValueError:
                return Placement(False, "odd", "root at a comparison endpoint")
            ok = _first_after(seq, seq.index("E"), "P", {"J", "R", "Z"})
            return Placement(ok, "odd: root in (-16/27, -16/27 + min|j_i + 16/27|)")
        seq = _order(inp, P)
        iE, iZ = seq.index("E"), seq.index("Z")
        inside = [i for i in range(iE + 1, iZ) if seq[i] == "J"]
        if not inside:
            return Placement(False, "even", "no real conjugate in (-16/27, 0)")
        ok = _first_after(seq, inside[0], "P", {"J"})
        return Placement(ok, "even: root in (j_t, j_t+1), j_t least conjugate in (-16/27, 0)")
    if case == 2:
        parity = (LQ + prof.v3dQ + prof.v2Q) % 2
        seq = _order(inp, P)
        iE, iZ = seq.index("E"), seq.index("Z")
        n = sum(1 for i in range(iE + 1, iZ) if seq[i] == "J")
        pos = [i for i in range(iZ + 1, len(seq)) if seq[i] == "J"]
        if not pos:
            return Placement(False, "", "no real conjugate in (0, oo)")
        above = (parity == 1) == (n % 2 == 1)
        if above:
            ok = _first_after(seq, pos[0], "P", {"J"})
            rule = "root in (j_t, j_t+1)"
        else:
            ok = _first_after(seq, iZ, "P", {"J"})
            rule = "root in (0, j_t)"
        return Placement(ok, f"parity {'odd' if parity else 'even'}, n = {n}: {rule}")
    if case == 3:
        seq = _order(inp, P)
        ps = [i for i, k in enumerate(seq) if k == "P"]
        if len(ps) != 2:
            return Placement(False, "two real roots", f"P_D has {len(ps)} real roots")
        between = sum(1 for i in range(ps[0] + 1, ps[1]) if seq[i] == "J")
        return Placement(between % 2 == 1, "odd number of conjugates between the real roots",
                         f"{between} between")
    raise ValueError(f"unknown case {case}")


# --------------------------------------------------------------------------
# The symbol chain.
# --------------------------------------------------------------------------

@dataclass
class ChainRow:
    label: str
    symbols: tuple          # ((top, bottom), ...)
    const: int = 1          # closed-form factor
    value: int = 0

    def as_dicts(self) -> list[dict]:
        if not self.symbols:
            return [{"symbol": self.label, "top": None, "bottom": None, "value": self.value}]
        return [{"symbol": self.label, "top": str(t), "bottom": str(b), "value": kronecker(t, b)}
                for t, b in self.symbols]


@dataclass
class Chain:
    rows: list
    value: int
    consistent: bool
    steps: list = field(default_factory=list)   # reciprocity steps of (D/N)

    def transcript(self) -> list[dict]:
        out = []
        for r in self.rows:
            out.extend(r.as_dicts())
        out.extend(s.as_dict() for s in self.steps)
        return out


def _symbol(t: int, b: int) -> int:
    v = kronecker(t, b)
    if b > 0 and b % 2 == 1:
        w, _ = jacobi_steps(t, b)
        if w != v:
            raise ChainError(f"({t}/{b}): stepwise {w} but direct {v}")
    return v


def _int(x) -> int:
    x = Fraction(x)
    if x.denominator != 1:
        raise HypothesisError(f"{x} is not an integer")
    return x.numerator


def jacobi_chain(case: int, l: int, inp: ModuliInput, prof: NormProfile) -> Chain:
    """The proof's equalities for (D/N), each row evaluated on its own."""
    N, s, sp, LQ = prof.N, prof.s, prof.s_prime, inp.field_degree
    if gcd(N, 6) != 1:
        raise HypothesisError("gcd(N, 6) != 1")
    if N % l == 0:
        raise HypothesisError("l divides N; use p = l")
    D = CASE_FAMILY[case][1](l)
    if case == 1:
        dQ = _int(prof.dQ)
        rows = [
            ChainRow("(-4l/N)", ((D, N),)),
            ChainRow("(-1/N)(l/N)", ((-1, N), (l, N))),
            ChainRow("(-1/N)(N/l)", ((-1, N), (N, l))),
            ChainRow("(-1/N)(dQ/l)", ((-1, N), (dQ, l))),
            ChainRow("(-1/N)(l/dQ)", ((-1, N), (l, dQ))),
            ChainRow("(-1/N)(-1/dQ)(-l/dQ)", ((-1, N), (-1, dQ), (-l, dQ))),
            ChainRow("ss'(-1)^([L:Q]+v3(dQ))", (), s * sp * (-1) ** (LQ + prof.v3dQ)),
        ]
    elif case == 2:
        dQ = _int(prof.dQ)
        rows = [
            ChainRow("(-l/N)", ((D, N),)),
            ChainRow("(N/l)", ((N, l),)),
            ChainRow("(ss'3^[L:Q]dQ/l)", ((s * sp * 3**LQ * dQ, l),)),
            ChainRow("ss'(-1)^([L:Q]+v3(dQ)+v2(Q))", (), s * sp * (-1) ** (LQ + prof.v3dQ + prof.v2Q)),
        ]
    else:
        rows = [
            ChainRow("(-3l/N)", ((D, N),)),
            ChainRow("(N/3l)", ((N, 3 * l),)),
            ChainRow("(-1/3l)(d^h'Nm/3l)", ((-1, 3 * l), (s * N, 3 * l))),
            ChainRow("(-1/3l)", ((-1, 3 * l),)),
        ]
    for r in rows:
        v = r.const
        for t, b in r.symbols:
            v *= _symbol(t, b)
        r.value = v
    _, steps = jacobi_steps(D, N)
    vals = {r.value for r in rows}
    return Chain(rows=rows, value=rows[0].value, consistent=len(vals) == 1, steps=steps)


# --------------------------------------------------------------------------
# Factoring N.
# --------------------------------------------------------------------------

def prime_divisors(N: int, max_rho: int = 8) -> tuple[list[int], int]:
    """Prime divisors found by trial division to 10^6 and Pollard rho; second item is the unsplit cofactor."""
    found = factorint(N, limit=TRIAL_LIMIT)
    primes, rest = [], 1
    stack = []
    for q, e in found.items():
        (primes if isprime(q) else stack).append(q)
    while stack:
        m = stack.pop()
        if isprime(m):
            primes.append(m)
            continue
        f = None
        for seed in range(max_rho):
            f = pollard_rho(m, seed=seed + 1, retries=2)
            if f:
                break
        if not f:
            rest *= m
            continue
        stack.extend([f, m // f])
    return sorted(set(primes)), rest


# --------------------------------------------------------------------------
# Certificates.
# --------------------------------------------------------------------------

CERT_FIELDS = ("case", "D", "l", "p", "minpoly", "degree_mult", "dchain", "N", "h_prime", "pd",
               "chain", "checks", "toolchain")


def _digest(body: dict) -> str:
    blob = json.dumps({k: body.get(k) for k in CERT_FIELDS}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class Certificate:
    case: int
    D: int
    l: int
    p: int
    minpoly: list
    degree_mult: int
    dchain: int
    N: str
    h_prime: int
    pd: dict
    chain: list
    checks: dict
    toolchain: dict
    digest: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        return cls(**{k: d[k] for k in CERT_FIELDS}, digest=d.get("digest", ""))


def _table_hash() -> str:
    path = cm.table_path()
    if not path.exists():
        return "none"
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


@dataclass
class SearchConfig:
    l_max: int = L_MAX
    precision: int = 60
    max_doublings: int = 5
    use_table: bool = True
    force_case: int | None = None
    exclude: tuple = ()


def _checks(D, p, S, prof, place, sel, inp, dchain) -> dict:
    return {"p_not_in_S": p not in S, "p_coprime_6": gcd(p, 6) == 1,
            "D_over_p": kronecker(D, p), "vpN": polys.vp(prof.N, p) if prof.N % p == 0 else 0,
            "root_placement": place.rule, "satisfied_cases": list(sel.satisfied),
            # the theorem reads v3 from d in lowest terms, the chain from dchain
            "d_parity_matches": polys.vp(inp.d, 3) % 2 == polys.vp(dchain, 3) % 2}


def _reject(stats, reason):
    stats["rejected"][reason] = stats["rejected"].get(reason, 0) + 1


def find_superspecial(inp: ModuliInput, config: SearchConfig | None = None, log=None) -> Certificate:
    cfg = config or SearchConfig()
    sel = case_select(inp, cfg.force_case)
    if not sel.applicable:
        raise HypothesisError(f"no case applies (trace: {sel.trace})")
    case = sel.case
    S = prime_set(inp)
    dchain = choose_clearing_d(inp, case)
    stats = {"case": case, "S": list(S), "candidates": 0, "rejected": {}}
    for l in sieve_l(case, S, cfg.l_max):
        stats["candidates"] += 1
        D = CASE_FAMILY[case][1](l)
        try:
            P = cm.get_heegner_poly(D, cfg.precision, cfg.use_table, cfg.max_doublings)
        except (cm.UniformizationError, ValueError):
            _reject(stats, "P_D not computed")
            continue
        if not run_checks(P).ok:
            _reject(stats, "reduction checks failed")
            continue
        prof = norm_profile(inp, P, dchain)
        if gcd(prof.N, 6) != 1:
            _reject(stats, "gcd(N, 6) != 1")
            continue
        place = root_placement_ok(case, P, inp, prof)
        if not place.ok:
            _reject(stats, "root placement")
            continue
        if prof.N % l == 0:
            chain_rows = [{"symbol": "l | N", "top": str(l), "bottom": str(prof.N), "value": 0}]
            candidates = [l] if l not in cfg.exclude else []
        else:
            try:
                chain = jacobi_chain(case, l, inp, prof)
            except HypothesisError:
                _reject(stats, "chain hypotheses")
                continue
            if not chain.consistent:
                _reject(stats, "proof rows disagree")
                continue
            if chain.value != -1:
                _reject(stats, "(D/N) = +1")
                continue
            chain_rows = chain.transcript()
            primes, rest = prime_divisors(prof.N)
            candidates = [q for q in primes if kronecker(D, q) == -1 and q not in S
                          and q % 2 and q % 3 and q not in cfg.exclude]
            if not candidates:
                _reject(stats, "unfactored cofactor" if rest > 1 else "no usable p")
                continue
        if not candidates:
            _reject(stats, "excluded p")
            continue
        p = candidates[0]
        if log:
            log(f"case {case}: l = {l}, D = {D}, p = {p}")
        cert = Certificate(
            case=case, D=D, l=l, p=p, minpoly=inp.minpoly_str(), degree_mult=inp.degree_mult,
            dchain=dchain, N=str(prof.N), h_prime=P.degree,
            pd={"b": str(P.b), "coeffs": [str(c) for c in P.coeffs]},
            chain=chain_rows,
            checks=_checks(D, p, S, prof, place, sel, inp, dchain),
            toolchain={"version": __version__, "precision": P.precision, "table_hash": _table_hash()},
        )
        cert.digest = _digest(cert.to_dict())
        stats["found"] = l
        return cert
    raise SearchExhausted(f"no certificate with l <= {cfg.l_max}", stats)


# --------------------------------------------------------------------------
# Verification.
# --------------------------------------------------------------------------

@dataclass
class Verification:
    ok: bool
    reasons: list

    def as_dict(self) -> dict:
        return {"ok": self.ok, "reasons": list(self.reasons)}


def verify_certificate(cert, inp: ModuliInput | None = None, precision: int = 60,
                       use_table: bool = True) -> Verification:
    """Recompute every claim from (minpoly, case, l, p); the transcript is only compared."""
    body = cert.to_dict() if isinstance(cert, Certificate) else dict(cert)
    reasons = []
    missing = [k for k in CERT_FIELDS if k not in body]
    if missing:
        return Verification(False, [f"missing fields: {', '.join(missing)}"])
    if body.get("digest") != _digest(body):
        reasons.append("digest mismatch")
    try:
        case, D, l, p = int(body["case"]), int(body["D"]), int(body["l"]), int(body["p"])
        cert_inp = parse_moduli([Fraction(c) for c in body["minpoly"]], int(body["degree_mult"]))
    except (HypothesisError, ValueError, TypeError) as exc:
        return Verification(False, reasons + [f"malformed certificate: {exc}"])
    if inp is not None and (inp.minpoly != cert_inp.minpoly or inp.degree_mult != cert_inp.degree_mult):
        reasons.append("minpoly mismatch")
    inp = cert_inp
    if case not in CASE_FAMILY:
        return Verification(False, reasons + [f"unknown case {case}"])
    sel = case_select(inp)
    if case not in sel.satisfied:
        reasons.append(f"case {case} hypotheses not satisfied")
    res, fam = CASE_FAMILY[case]
    if not isprime(l) or l % 24 != res:
        reasons.append(f"l = {l} is not a prime = {res} mod 24")
    if D != fam(l):
        reasons.append(f"D = {D} does not have the shape of case {case}")
    S = prime_set(inp)
    if l in S:
        reasons.append("l lies in the excluded prime set")
    if not isprime(p):
        reasons.append(f"p = {p} is not prime")
    if p in S:
        reasons.append("excluded prime")
    if p in (2, 3):
        reasons.append("p divides 6")
    if D % p == 0:
        if p != l:
            reasons.append("(D/p) ≠ −1")
    elif kronecker(D, p) != -1:
        reasons.append("(D/p) ≠ −1")
    if reasons and any(r.startswith(("l =", "D =")) for r in reasons):
        return Verification(False, reasons)
    try:
        P = cm.get_heegner_poly(D, precision, use_table, max_doublings=5)
    except (cm.UniformizationError, ValueError) as exc:
        return Verification(False, reasons + [f"P_D not recomputable: {exc}"])
    if [str(c) for c in P.coeffs] != list(body["pd"].get("coeffs", [])) or str(P.b) != str(body["pd"].get("b")):
        reasons.append("P_D mismatch")
    if not run_checks(P).ok:
        reasons.append("P_D fails the reduction checks")
    try:
        dchain = choose_clearing_d(inp, case)
        prof = norm_profile(inp, P, dchain)
    except (HypothesisError, DegenerateError) as exc:
        return Verification(False, reasons + [str(exc)])
    if int(body["dchain"]) != dchain:
        reasons.append("dchain mismatch")
    if str(body["N"]) != str(prof.N):
        reasons.append("N mismatch")
    if int(body["h_prime"]) != P.degree:
        reasons.append("h' mismatch")
    if prof.N % p != 0:
        reasons.append("v_p(N) = 0")
    place = root_placement_ok(case, P, inp, prof)
    if not place.ok:
        reasons.append("root placement fails")
    if body["checks"] != _checks(D, p, S, prof, place, sel, inp, dchain):
        reasons.append("checks mismatch")
    tool = body["toolchain"]
    if not isinstance(tool, dict) or tool.get("version") != __version__:
        reasons.append("toolchain mismatch")
    if prof.N % l == 0:
        expect = [{"symbol": "l | N", "top": str(l), "bottom": str(prof.N), "value": 0}]
    else:
        try:
            expect = jacobi_chain(case, l, inp, prof).transcript()
        except HypothesisError as exc:
            expect = None
            reasons.append(f"chain not evaluable: {exc}")
    if expect is not None and body["chain"] != expect:
        reasons.append("chain mismatch")
    return Verification(not reasons, reasons)
