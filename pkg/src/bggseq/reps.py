"""Graded representations built from the standard one by tensorial constructions.

Every representation keeps a basis sorted by grade (the eigenvalue of the
grading element minus its lowest value).  Tensorial representations also
remember their letters (a word over ``std`` and ``dual``) and an isometric
embedding into the tensor product of those letters, which is what the
trace-free projections and the closed-form cross-checks work with.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

import numpy as np

from .graded_lie import GradedLieAlgebra, commutator

HOMOMORPHISM_TOL = 1e-11


class RepError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GradedRep:
    alg: GradedLieAlgebra
    action: np.ndarray  # (alg.dim, d, d)
    grades: np.ndarray  # (d,) non-decreasing
    lowest_weight: float
    name: str
    letters: tuple | None = None  # e.g. ("std", "dual")
    embedding: np.ndarray | None = None  # (d, ambient) rows orthonormal

    @property
    def dim(self) -> int:
        return len(self.grades)

    @property
    def top_grade(self) -> int:
        return int(self.grades.max())

    def grade_dims(self) -> tuple[int, ...]:
        return tuple(int(np.sum(self.grades == j)) for j in range(self.top_grade + 1))

    def grade_slice(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.grades == j)

    def rho(self, a: np.ndarray) -> np.ndarray:
        """Action matrix of an arbitrary algebra element."""
        return np.tensordot(self.alg.coords(a), self.action, axes=1)

    def rho_coeffs(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, float), self.action, axes=1)

    @property
    def x_action(self) -> np.ndarray:
        return self.action[self.alg.x_index]

    @property
    def z_action(self) -> np.ndarray:
        return self.action[self.alg.z_index]

    @property
    def g0_action(self) -> np.ndarray:
        return self.action[self.alg.g0_index]

    def ambient(self, v: np.ndarray) -> np.ndarray:
        return v @ self.embedding

    def from_ambient(self, t: np.ndarray) -> np.ndarray:
        return self.embedding @ np.asarray(t).reshape(-1)


def _finish(alg, action, name, letters=None, embedding=None) -> GradedRep:
    """Sort the basis by the spectrum of the grading element."""
    e = np.tensordot(alg.coords(alg.E), action, axes=1)
    diag = np.diag(e).copy()
    if np.abs(e - np.diag(diag)).max() > 1e-10:
        raise RepError(f"grading element is not diagonal on {name}")
    lam = float(diag.min())
    raw = diag - lam
    grades = np.rint(raw).astype(int)
    if np.abs(raw - grades).max() > 1e-9:
        raise RepError(f"non-integral grading on {name}")
    order = np.argsort(grades, kind="stable")
    action = action[:, order][:, :, order]
    grades = grades[order]
    if embedding is not None:
        embedding = embedding[order]
    present = set(grades.tolist())
    if present != set(range(grades.max() + 1)):
        raise RepError(f"grading string of {name} is broken: {sorted(present)}")
    return GradedRep(alg, action, grades, lam, name, letters, embedding)


def _std_permutation(alg: GradedLieAlgebra) -> np.ndarray:
    n = alg.n
    if alg.kind == "conformal":
        return np.array([n + 1, *range(1, n + 1), 0])
    return np.array([*range(1, n + 1), 0])


def standard_rep(alg: GradedLieAlgebra) -> GradedRep:
    perm = _std_permutation(alg)
    action = alg.basis[:, perm][:, :, perm]
    d = len(perm)
    return _finish(alg, action, "std", ("std",), np.eye(d))


def trivial_rep(alg: GradedLieAlgebra) -> GradedRep:
    return GradedRep(alg, np.zeros((alg.dim, 1, 1)), np.zeros(1, int), 0.0, "trivial", (), np.ones((1, 1)))


def adjoint_rep(alg: GradedLieAlgebra) -> GradedRep:
    c = alg.structure_constants()
    action = np.transpose(c, (0, 2, 1))  # ad(b_i)[k, j] = c[i, j, k]
    return _finish(alg, action, "adjoint")


def dual_rep(rep: GradedRep) -> GradedRep:
    action = -np.transpose(rep.action, (0, 2, 1))
    letters = None
    if rep.letters is not None:
        letters = tuple("dual" if x == "std" else "std" for x in rep.letters)
    emb = rep.embedding
    if emb is not None:
        emb = _dualize_embedding(rep, emb)
    return _finish(rep.alg, action, f"dual({rep.name})", letters, emb)


def dual_letter_index(alg: GradedLieAlgebra) -> np.ndarray:
    """For each dual-letter basis slot, the standard basis index it pairs with."""
    d = len(_std_permutation(alg))
    std = standard_rep(alg)
    # dual grades reverse the standard ones; stable sort of reversed grades
    return np.argsort(std.grades.max() - std.grades, kind="stable")[:d]


def _dualize_embedding(rep, emb):
    # letter coordinates: a std slot indexed by standard index i becomes the dual
    # functional on i, which sits in the dual letter at position pos[i]
    alg = rep.alg
    idx = dual_letter_index(alg)
    pos = np.argsort(idx)
    d = len(idx)
    k = len(rep.letters)
    perms = []
    for letter in rep.letters:
        if letter == "std":
            perms.append(pos)  # std -> dual: slot i goes to pos[i]
        else:
            perms.append(idx)  # dual -> std: slot p goes to idx[p]
    t = emb.reshape((emb.shape[0],) + (d,) * k)
    out = np.zeros_like(t)
    for src in itertools.product(range(d), repeat=k):
        dst = tuple(p[s] for p, s in zip(perms, src))
        out[(slice(None),) + dst] = t[(slice(None),) + src]
    return out.reshape(emb.shape[0], -1)


def _kron_action(reps) -> np.ndarray:
    dims = [r.dim for r in reps]
    total = np.zeros((reps[0].alg.dim, math.prod(dims), math.prod(dims)))
    for slot, r in enumerate(reps):
        left = np.eye(math.prod(dims[:slot]))
        right = np.eye(math.prod(dims[slot + 1 :]))
        for i in range(reps[0].alg.dim):
            total[i] += np.kron(np.kron(left, r.action[i]), right)
    return total


def _kron_embedding(reps):
    if any(r.embedding is None for r in reps):
        return None, None
    emb = np.ones((1, 1))
    letters = ()
    for r in reps:
        emb = np.kron(emb, r.embedding)
        letters += r.letters
    return emb, letters


def tensor_rep(*reps: GradedRep) -> GradedRep:
    action = _kron_action(reps)
    emb, letters = _kron_embedding(reps)
    name = "tensor(" + ", ".join(r.name for r in reps) + ")"
    return _finish(reps[0].alg, action, name, letters, emb)


def _power_subspace(d: int, k: int, alternating: bool) -> np.ndarray:
    """Orthonormal basis (columns) of symmetric or alternating k-tensors on R^d."""
    combos = (itertools.combinations(range(d), k) if alternating
              else itertools.combinations_with_replacement(range(d), k))
    cols = []
    for word in combos:
        v = np.zeros((d,) * k)
        for perm in set(itertools.permutations(range(k))):
            idx = tuple(word[p] for p in perm)
            sign = _perm_parity(perm) if alternating else 1
            v[idx] += sign
        cols.append(v.reshape(-1) / np.linalg.norm(v))
    return np.array(cols).T


def _perm_parity(perm) -> int:
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def _power_rep(rep: GradedRep, k: int, alternating: bool) -> GradedRep:
    if k < 1 or (alternating and k > rep.dim):
        raise RepError(f"invalid power {k} of {rep.name}")
    sub = _power_subspace(rep.dim, k, alternating)
    full = _kron_action([rep] * k)
    action = np.einsum("pi,apq,qj->aij", sub, full, sub, optimize=True)
    emb, letters = _kron_embedding([rep] * k)
    if emb is not None:
        emb = sub.T @ emb
    kind = "alt" if alternating else "sym"
    return _finish(rep.alg, action, f"{kind}({k}, {rep.name})", letters, emb)


def sym_power(rep: GradedRep, k: int) -> GradedRep:
    return _power_rep(rep, k, alternating=False)


def alt_power(rep: GradedRep, k: int) -> GradedRep:
    return _power_rep(rep, k, alternating=True)


def letter_forms(alg: GradedLieAlgebra):
    """Invariant pairings between letters, keyed by (letter, letter)."""
    std = standard_rep(alg)
    d = std.dim
    idx = dual_letter_index(alg)
    pairing = np.zeros((d, d))  # std slot i, dual slot p
    for p, i in enumerate(idx):
        pairing[i, p] = 1.0
    forms = {("std", "dual"): pairing, ("dual", "std"): pairing.T}
    if alg.kind == "conformal":
        perm = _std_permutation(alg)
        b = alg.form[np.ix_(perm, perm)]
        forms[("std", "std")] = b
        binv = np.linalg.inv(b)
        forms[("dual", "dual")] = pairing.T @ binv @ pairing
    return forms


def contraction_maps(rep: GradedRep) -> list[np.ndarray]:
    """All invariant pair contractions, as maps from rep coordinates."""
    if rep.letters is None:
        raise RepError(f"{rep.name} carries no tensor structure")
    forms = letter_forms(rep.alg)
    k = len(rep.letters)
    d = standard_rep(rep.alg).dim
    maps = []
    for s, t in itertools.combinations(range(k), 2):
        key = (rep.letters[s], rep.letters[t])
        if key not in forms:
            continue
        t_full = rep.embedding.reshape((rep.dim,) + (d,) * k)
        letters = "abcdefghij"[:k]
        rest = "".join(c for i, c in enumerate(letters) if i not in (s, t))
        spec = f"z{letters},{letters[s]}{letters[t]}->z{rest}"
        maps.append(np.einsum(spec, t_full, forms[key]).reshape(rep.dim, -1))
    if not maps:
        raise RepError(f"no invariant contraction exists on {rep.name}")
    return maps


def _kernel(m: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    # absolute threshold: an all-noise matrix must count as zero
    _, s, vt = np.linalg.svd(m)
    r = int(np.sum(s > tol * max(1.0, s.max(initial=0.0))))
    return vt[r:].T


def trace_free(rep: GradedRep) -> GradedRep:
    stacked = np.hstack(contraction_maps(rep))  # (dim, m); kernel of its transpose
    blocks = []
    for j in range(rep.top_grade + 1):
        idx = rep.grade_slice(j)
        ns = _kernel(stacked[idx].T)
        if ns.size:
            full = np.zeros((rep.dim, ns.shape[1]))
            full[idx] = ns
            blocks.append(full)
    basis = np.hstack(blocks)
    action = np.einsum("pi,apq,qj->aij", basis, rep.action, basis, optimize=True)
    emb = basis.T @ rep.embedding
    return _finish(rep.alg, action, f"tf({rep.name})", rep.letters, emb)


def restrict(rep: GradedRep, basis: np.ndarray, name: str) -> GradedRep:
    """Subrepresentation on orthonormal columns ``basis``."""
    action = np.einsum("pi,apq,qj->aij", basis, rep.action, basis, optimize=True)
    emb = None if rep.embedding is None else basis.T @ rep.embedding
    return _finish(rep.alg, action, name, rep.letters, emb)


# -- expression grammar -----------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokens(text: str):
    for num, word, punct in _TOKEN.findall(text):
        if num:
            yield ("num", int(num))
        elif word:
            yield ("word", word)
        elif punct.strip():
            yield ("punct", punct)


def parse_rep(alg: GradedLieAlgebra, text: str) -> GradedRep:
    """Build a representation from ``std``, ``dual(X)``, ``sym0(2, X)``,
    ``sym(k, X)``, ``alt(k, X)``, ``tensor(X, Y, ...)``, ``adjoint``,
    ``trivial`` or ``tf(X)``."""
    toks = list(_tokens(text))
    pos = 0

    def take(kind=None, value=None):
        nonlocal pos
        if pos >= len(toks):
            raise RepError(f"unexpected end of rep expression {text!r}")
        tok = toks[pos]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            raise RepError(f"unexpected token {tok[1]!r} in {text!r}")
        pos += 1
        return tok[1]

    def expr():
        name = take("word")
        if name == "std":
            return standard_rep(alg)
        if name == "adjoint":
            return adjoint_rep(alg)
        if name == "trivial":
            return trivial_rep(alg)
        take("punct", "(")
        if name in ("sym", "alt", "sym0"):
            k = take("num")
            take("punct", ",")
            inner = expr()
            take("punct", ")")
            if name == "alt":
                return alt_power(inner, k)
            out = sym_power(inner, k)
            return trace_free(out) if name == "sym0" else out
        args = [expr()]
        while toks[pos][1] == ",":
            take("punct", ",")
            args.append(expr())
        take("punct", ")")
        if name == "dual" and len(args) == 1:
            return dual_rep(args[0])
        if name == "tf" and len(args) == 1:
            return trace_free(args[0])
        if name == "tensor":
            return tensor_rep(*args)
        raise RepError(f"unknown rep constructor {name!r}")

    rep = expr()
    if pos != len(toks):
        raise RepError(f"trailing input in rep expression {text!r}")
    return rep


def construct_rep(ctor: str, *bases: GradedRep, k: int | None = None) -> GradedRep:
    if ctor == "dual":
        return dual_rep(bases[0])
    if ctor == "tensor":
        return tensor_rep(*bases)
    if ctor == "sym_power":
        return sym_power(bases[0], k)
    if ctor == "alt_power":
        return alt_power(bases[0], k)
    if ctor == "trace_free":
        return trace_free(bases[0])
    raise RepError(f"unknown constructor {ctor!r}")


# -- actions and checks -----------------------------------------------

def bullet_action(rep: GradedRep, elem: np.ndarray, v: np.ndarray) -> np.ndarray:
    return rep.rho(elem) @ v


def grading_decompose(rep: GradedRep, v: np.ndarray) -> list[np.ndarray]:
    v = np.asarray(v, float)
    parts = []
    for j in range(rep.top_grade + 1):
        w = np.zeros_like(v)
        idx = rep.grade_slice(j)
        w[idx] = v[idx]
        if np.any(w):
            parts.append(w)
    return parts


def equivariance_residual(rep: GradedRep) -> dict[str, float]:
    alg = rep.alg
    c = alg.structure_constants()
    act = rep.action
    hom = 0.0
    for i in range(alg.dim):
        for j in range(alg.dim):
            lhs = np.tensordot(c[i, j], act, axes=1)
            hom = max(hom, float(np.abs(lhs - commutator(act[i], act[j])).max()))
    xs, zs = rep.x_action, rep.z_action
    ab_minus = max(float(np.abs(commutator(a, b)).max()) for a in xs for b in xs)
    ab_plus = max(float(np.abs(commutator(a, b)).max()) for a in zs for b in zs)
    eq_t = eq_tstar = 0.0
    for k in alg.g0_index:
        phi = alg.basis[k]
        for x_idx in alg.x_index:
            img = commutator(phi, alg.basis[x_idx])
            r = commutator(act[k], act[x_idx]) - rep.rho(img)
            eq_t = max(eq_t, float(np.abs(r).max()))
        for z_idx in alg.z_index:
            img = commutator(phi, alg.basis[z_idx])
            r = commutator(act[k], act[z_idx]) - rep.rho(img)
            eq_tstar = max(eq_tstar, float(np.abs(r).max()))
    shift = 0.0
    for i, g in enumerate(alg.grades):
        m = act[i]
        for j in range(rep.top_grade + 1):
            src = rep.grade_slice(j)
            outside = np.flatnonzero(rep.grades != j + g)
            if outside.size and src.size:
                shift = max(shift, float(np.abs(m[np.ix_(outside, src)]).max()))
    return {
        "homomorphism": hom,
        "abelian_minus": ab_minus,
        "abelian_plus": ab_plus,
        "equivariance_vectors": eq_t,
        "equivariance_covectors": eq_tstar,
        "grade_shift": shift,
    }


def duality_residual(rep: GradedRep) -> float:
    """|<rho*(A) l, v> + <l, rho(A) v>| in the dual rep's own basis."""
    dual = dual_rep(rep)
    # dual basis vectors are functionals on rep: recover that pairing from grades
    pairing = _dual_pairing(rep, dual)
    worst = 0.0
    for i in range(rep.alg.dim):
        lhs = dual.action[i].T @ pairing  # <rho* l, v> as matrix (l, v)
        rhs = pairing @ rep.action[i]
        worst = max(worst, float(np.abs(lhs + rhs).max()))
    return worst


def _dual_pairing(rep: GradedRep, dual: GradedRep) -> np.ndarray:
    # the dual basis is the coordinate-dual basis permuted; find the permutation
    # by matching the transposed action matrices
    neg_t = -np.transpose(rep.action, (0, 2, 1))
    d = rep.dim
    pairing = np.zeros((d, d))
    order = np.argsort(-rep.grades, kind="stable")  # same sort _finish applied
    for new, old in enumerate(order):
        pairing[new, old] = 1.0
    # sanity: pairing should conjugate neg_t into dual.action
    test = np.einsum("pi,aij,qj->apq", pairing, neg_t, pairing)
    if np.abs(test - dual.action).max() > 1e-12:
        raise RepError("dual basis does not match the transposed action")
    return pairing


def grading_spectrum(rep: GradedRep) -> np.ndarray:
    return np.diag(rep.rho(rep.alg.E))
