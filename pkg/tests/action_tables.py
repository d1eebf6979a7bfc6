"""Closed-form actions of g_-1 and g_1 on conformal tractor-type bundles.

Each table is written directly in components (functions, vectors, forms on
R^n with the Euclidean metric) and compared with the action matrices of the
tensor constructions through their ambient embeddings.  Nothing here calls
the representation machinery except to read off its matrices.
"""
import itertools

import numpy as np

from bggseq.graded_lie import build_graded_algebra
from bggseq.reps import dual_letter_index, parse_rep

# coefficient of f2 * eta in the zeta1 slot of the eta-action on S^2_0 V
def printed_f2_coeff(n):
    return (2 - n) / n


def consistent_f2_coeff(n):
    return -(n + 2) / n


# -- standard representation ---------------------------------------------

def std_eta(eta, f, zeta, h):
    return np.r_[-(eta @ zeta), h * eta, 0.0]


def std_alpha(alpha, f, zeta, h):
    return np.r_[0.0, -f * alpha, alpha @ zeta]


def std_table_residual(n, trials, seed):
    alg = build_graded_algebra("conformal", n)
    rep = parse_rep(alg, "std")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f, h = rng.standard_normal(2)
        zeta, eta, alpha = rng.standard_normal((3, n))
        v = np.r_[f, zeta, h]
        worst = max(worst, np.abs(rep.rho(alg.vector(eta)) @ v - std_eta(eta, f, zeta, h)).max(),
                    np.abs(rep.rho(alg.covector(alpha)) @ v - std_alpha(alpha, f, zeta, h)).max())
    return float(worst)


# -- trace-free symmetric square ---------------------------------------------

def _odot(u, v):
    return np.outer(u, v) + np.outer(v, u)


def _tf_odot(u, v):
    n = len(u)
    return _odot(u, v) - 2.0 / n * (u @ v) * np.eye(n)


def s2_encode(n, f1, zeta1, phi, f2, zeta2, f3):
    """Ambient symmetric tensor on V = (f, zeta, h) realizing the components."""
    e = np.eye(n + 2)
    low, top = e[0], e[-1]

    def lift(x):
        return np.r_[0.0, x, 0.0]

    t = f1 * _odot(low, low) + _odot(lift(zeta1), low) + _odot(lift(zeta2), top) + f3 * _odot(top, top)
    t[1:n + 1, 1:n + 1] += phi
    t += -f2 * _odot(low, top) + f2 / n * sum(_odot(e[i], e[i]) for i in range(1, n + 1))
    return t


def s2_eta(n, eta, f1, zeta1, phi, f2, zeta2, f3, f2_coeff):
    return (-(eta @ zeta1), -phi @ eta + f2_coeff * f2 * eta, _tf_odot(eta, zeta2), eta @ zeta2,
            2 * f3 * eta, 0.0)


def s2_alpha(n, alpha, f1, zeta1, phi, f2, zeta2, f3):
    return (0.0, -2 * f1 * alpha, -_tf_odot(alpha, zeta1), -(alpha @ zeta1),
            phi @ alpha + (n + 2) / n * f2 * alpha, alpha @ zeta2)


def _random_s2(rng, n):
    a = rng.standard_normal((n, n))
    phi = a + a.T
    phi -= np.trace(phi) / n * np.eye(n)
    return (rng.standard_normal(), rng.standard_normal(n), phi, rng.standard_normal(),
            rng.standard_normal(n), rng.standard_normal())


def s2_table_residual(n, trials, seed, f2_coeff):
    alg = build_graded_algebra("conformal", n)
    rep = parse_rep(alg, "sym0(2, std)")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        comps = _random_s2(rng, n)
        eta, alpha = rng.standard_normal((2, n))
        v = rep.from_ambient(s2_encode(n, *comps))
        want_eta = s2_encode(n, *s2_eta(n, eta, *comps, f2_coeff)).reshape(-1)
        want_alpha = s2_encode(n, *s2_alpha(n, alpha, *comps)).reshape(-1)
        worst = max(worst, np.abs(rep.ambient(rep.rho(alg.vector(eta)) @ v) - want_eta).max(),
                    np.abs(rep.ambient(rep.rho(alg.covector(alpha)) @ v) - want_alpha).max())
    return float(worst)


# -- exterior powers of the dual ---------------------------------------------

def _perm_sign(p):
    inversions = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return -1 if inversions % 2 else 1


def random_alternating(rng, n, k):
    """Full antisymmetric array of a random k-form on R^n (a scalar for k = 0)."""
    if k == 0:
        return np.array(rng.standard_normal())
    t = np.zeros((n,) * k)
    for idx in itertools.combinations(range(n), k):
        c = rng.standard_normal()
        for p in itertools.permutations(range(k)):
            t[tuple(idx[q] for q in p)] = _perm_sign(p) * c
    return t


def wedge_one(a, phi):
    """a ^ phi with (a ^ phi)(v_0..v_p) = sum_i (-1)^i a(v_i) phi(.. no v_i ..)."""
    p = phi.ndim
    n = len(a)
    out = np.zeros((n,) * (p + 1))
    for idx in itertools.product(range(n), repeat=p + 1):
        out[idx] = sum((-1) ** i * a[idx[i]] * phi[idx[:i] + idx[i + 1:]] for i in range(p + 1))
    return out


def interior(v, phi):
    return np.tensordot(v, phi, axes=(0, 0))


def lk_encode(n, k, phi1, phi2, phi3, phi4):
    """The k-form on V = (f, zeta, h) that the four component forms describe."""
    out = np.zeros((n + 2,) * k)
    for idx in itertools.product(range(n + 2), repeat=k):
        lows = [i for i, x in enumerate(idx) if x == 0]
        tops = [i for i, x in enumerate(idx) if x == n + 1]
        rest = tuple(x - 1 for x in idx if 1 <= x <= n)
        if not lows and not tops:
            out[idx] = phi2[rest]
        elif not lows and len(tops) == 1:
            out[idx] = (-1) ** tops[0] * phi1[rest]
        elif len(lows) == 1 and not tops:
            out[idx] = (-1) ** lows[0] * phi4[rest]
        elif len(lows) == 1 and len(tops) == 1:
            i, j = lows[0], tops[0]
            out[idx] = (-1) ** (i + j) * (1 if i < j else -1) * phi3[rest]
    return out


def lk_eta(eta, phi1, phi2, phi3, phi4):
    return (-interior(eta, phi2) + wedge_one(eta, phi3), wedge_one(eta, phi4), interior(eta, phi4),
            np.zeros_like(phi4))


def lk_alpha(alpha, phi1, phi2, phi3, phi4):
    return (np.zeros_like(phi1), -wedge_one(alpha, phi1), interior(alpha, phi1),
            interior(alpha, phi2) + wedge_one(alpha, phi3))


def lk_table_residual(n, k, trials, seed):
    alg = build_graded_algebra("conformal", n)
    rep = parse_rep(alg, f"alt({k}, dual(std))")
    slots = dual_letter_index(alg)

    def ambient(t):
        # dual-letter slot p is the functional on the standard basis vector slots[p]
        return t[np.ix_(*[slots] * k)].reshape(-1)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        comps = (random_alternating(rng, n, k - 1), random_alternating(rng, n, k),
                 random_alternating(rng, n, k - 2), random_alternating(rng, n, k - 1))
        eta, alpha = rng.standard_normal((2, n))
        v = rep.from_ambient(ambient(lk_encode(n, k, *comps)))
        for elem, image in ((alg.vector(eta), lk_eta(eta, *comps)), (alg.covector(alpha), lk_alpha(alpha, *comps))):
            got = rep.ambient(rep.rho(elem) @ v)
            worst = max(worst, np.abs(got - ambient(lk_encode(n, k, *image))).max())
    return float(worst)


# -- adjoint ------------------------------------------------------------------

def conformal_brace(eta, phi):
    """{eta, phi} as a matrix: xi -> phi(eta) xi + phi(xi) eta - <xi, eta> phi."""
    return (phi @ eta) * np.eye(len(eta)) + np.outer(eta, phi) - np.outer(phi, eta)


def adjoint_table_residual(n, trials, seed):
    alg = build_graded_algebra("conformal", n)
    rep = parse_rep(alg, "adjoint")
    rng = np.random.default_rng(seed)

    def encode(zeta, endo, phi):
        return alg.coords(alg.vector(zeta) + alg.g0_element(endo) + alg.covector(phi))

    worst = 0.0
    for _ in range(trials):
        s = rng.standard_normal((n, n))
        endo = s - s.T + rng.standard_normal() * np.eye(n)
        zeta, phi, eta, alpha = rng.standard_normal((4, n))
        v = encode(zeta, endo, phi)
        want_eta = encode(-endo @ eta, conformal_brace(eta, phi), np.zeros(n))
        want_alpha = encode(np.zeros(n), -conformal_brace(zeta, alpha), alpha @ endo)
        worst = max(worst, np.abs(rep.rho(alg.vector(eta)) @ v - want_eta).max(),
                    np.abs(rep.rho(alg.covector(alpha)) @ v - want_alpha).max())
    return float(worst)
