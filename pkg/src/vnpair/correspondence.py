"""Two-sided Hilbert modules realized as commuting pairs of representations.

A correspondence from an algebra A on C^k to an algebra B on C^n is stored
as a carrier space C^h together with a representation of the commutant of B
and a commuting representation of A. The element picture, the space of
maps x: C^n -> C^h intertwining the commutant representation with plain
right multiplication, is derived on demand; x* y then lands in B and plays
the role of the B-valued inner product.

Taking commutants swaps the two representations and is exact: no numerics
are involved beyond what was already stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import algebra as alg
from . import numkernel as nk
from .errors import (AlgebraMismatch, DimensionMismatch, GramNotPSD,
                     InvalidCorrespondence, NotIntertwining, NotIsometric,
                     PolarRetryExhausted, SingularInput)

#: attempts at drawing an invertible element of an intertwiner space
MAX_POLAR_RETRIES = 8


def rep_apply(domain: alg.VnAlgebra, images: np.ndarray, x) -> np.ndarray:
    """Apply the representation with the given basis images to x in span."""
    return np.tensordot(domain.coefficients(x), images, axes=(0, 0))


def rep_residuals(domain: alg.VnAlgebra, images: np.ndarray) -> dict:
    """Worst-case unitality, multiplicativity, and adjoint residuals."""
    d, n = domain.dim, domain.ambient_dim
    h = images.shape[1]
    out = {}
    unit = rep_apply(domain, images, np.eye(n))
    out["unital"] = float(np.linalg.norm(unit - np.eye(h)))
    prods = np.einsum("aij,bjk->abik", domain.basis, domain.basis)
    coeffs = np.einsum("dij,abij->dab", domain.basis.conj(), prods)
    lhs = np.einsum("dab,dij->abij", coeffs, images)
    rhs = np.einsum("aij,bjk->abik", images, images)
    out["multiplicative"] = float(
        np.linalg.norm((lhs - rhs).reshape(d * d, -1), axis=1).max())
    adj_coeffs = np.einsum("dij,aij->da", domain.basis.conj(),
                           domain.basis.conj().transpose(0, 2, 1))
    lhs_star = np.einsum("da,dij->aij", adj_coeffs, images)
    rhs_star = images.conj().transpose(0, 2, 1)
    out["star"] = float(np.linalg.norm((lhs_star - rhs_star).reshape(d, -1), axis=1).max())
    return out


class Correspondence:
    """Commuting pair (representation of B-commutant, representation of A).

    Attributes
    ----------
    left, right : the algebras A and B.
    left_commutant, right_commutant : their commutants, stored so that
        taking commutants twice reproduces the original fields exactly.
    carrier_dim : dimension h of the carrier space.
    rho : images of the basis of ``left`` on the carrier.
    rho_prime : images of the basis of ``right_commutant`` on the carrier.
    """

    def __init__(self, left, right, left_commutant, right_commutant,
                 rho, rho_prime, carrier_dim,
                 tol: nk.Tolerance = nk.DEFAULT_TOL, check: bool = True):
        self.left = left
        self.right = right
        self.left_commutant = left_commutant
        self.right_commutant = right_commutant
        self.carrier_dim = int(carrier_dim)
        self.rho = np.asarray(rho, dtype=complex)
        self.rho_prime = np.asarray(rho_prime, dtype=complex)
        h = self.carrier_dim
        if self.rho.shape != (left.dim, h, h):
            raise DimensionMismatch(
                f"rho shape {self.rho.shape}, expected {(left.dim, h, h)}")
        if self.rho_prime.shape != (right_commutant.dim, h, h):
            raise DimensionMismatch(
                f"rho_prime shape {self.rho_prime.shape}, "
                f"expected {(right_commutant.dim, h, h)}")
        if left.ambient_dim != left_commutant.ambient_dim or \
                right.ambient_dim != right_commutant.ambient_dim:
            raise DimensionMismatch("algebra and commutant live on different spaces")
        if check:
            self._check_light(tol)

    def _check_light(self, tol: nk.Tolerance) -> None:
        # unitality of both representations and commutation of their ranges;
        # the full homomorphism laws are covered by validate()
        h = self.carrier_dim
        eye = np.eye(h)
        res = float(np.linalg.norm(self.rho_of(np.eye(self.left.ambient_dim)) - eye))
        if res > tol.bound(np.sqrt(h)):
            raise InvalidCorrespondence(f"left action not unital, residual {res:.3e}")
        res = float(np.linalg.norm(
            self.rho_prime_of(np.eye(self.right.ambient_dim)) - eye))
        if res > tol.bound(np.sqrt(h)):
            raise InvalidCorrespondence(f"commutant action not unital, residual {res:.3e}")
        ab = np.einsum("aij,bjk->abik", self.rho, self.rho_prime)
        ba = np.einsum("bij,ajk->abik", self.rho_prime, self.rho)
        res = float(np.linalg.norm((ab - ba).reshape(ab.shape[0] * ab.shape[1], -1),
                                   axis=1).max()) if ab.size else 0.0
        if res > tol.bound(1.0):
            raise InvalidCorrespondence(f"ranges do not commute, residual {res:.3e}")

    def rho_of(self, a) -> np.ndarray:
        return rep_apply(self.left, self.rho, a)

    def rho_prime_of(self, b) -> np.ndarray:
        return rep_apply(self.right_commutant, self.rho_prime, b)

    @cached_property
    def element_space(self) -> np.ndarray:
        """Orthonormal basis of {x: rho_prime(b') x = x b' for all b'}."""
        pairs = list(zip(self.rho_prime, self.right_commutant.basis))
        return nk.commuting_null_space(
            pairs, (self.carrier_dim, self.right.ambient_dim))

    def element_coefficients(self, x) -> np.ndarray:
        basis = self.element_space
        return basis.conj().reshape(basis.shape[0], -1) @ np.asarray(x, dtype=complex).reshape(-1)

    def validate(self, tol: nk.Tolerance = nk.DEFAULT_TOL) -> dict:
        """Full invariant check; raises InvalidCorrespondence on failure."""
        worst = {}
        worst.update({"rho_" + k: v for k, v in
                      rep_residuals(self.left, self.rho).items()})
        worst.update({"rho_prime_" + k: v for k, v in
                      rep_residuals(self.right_commutant, self.rho_prime).items()})
        x = self.element_space
        # inner products of elements land in the right algebra
        inner = np.einsum("iab,jac->ijbc", x.conj(), x)
        flat = inner.reshape(-1, self.right.ambient_dim ** 2)
        resid = flat - (flat @ self.right.flat.conj().T) @ self.right.flat
        worst["inner_in_right"] = float(
            np.linalg.norm(resid, axis=1).max()) if flat.size else 0.0
        # elements reach the whole carrier
        cols = x.transpose(1, 0, 2).reshape(self.carrier_dim, -1)
        worst["nondegenerate"] = 0.0 if nk.numeric_rank(cols, tol) == self.carrier_dim \
            else 1.0
        bad = {k: v for k, v in worst.items() if v > tol.bound(1.0)}
        if bad:
            raise InvalidCorrespondence(f"invariants violated: {bad}")
        return worst


def of_endomorphism(theta, right_commutant=None,
                    tol: nk.Tolerance = nk.DEFAULT_TOL) -> Correspondence:
    """Correspondence whose left action twists by the endomorphism.

    Carrier is the ambient space, the commutant of the domain acts as
    itself, and the domain acts through the map. The element space then
    recovers the span of the domain algebra.
    """
    b = theta.domain
    bp = right_commutant if right_commutant is not None else alg.commutant(b, tol)
    return Correspondence(left=b, right=b, left_commutant=bp, right_commutant=bp,
                          rho=theta.basis_images, rho_prime=bp.basis,
                          carrier_dim=b.ambient_dim, tol=tol)


def intertwiner_space(theta, right_commutant=None,
                      tol: nk.Tolerance = nk.DEFAULT_TOL) -> Correspondence:
    """Correspondence over the commutant whose elements intertwine the map.

    The element space consists of the x with theta(b) x = x b; the commutant
    algebra acts by plain multiplication on both sides.
    """
    b = theta.domain
    bp = right_commutant if right_commutant is not None else alg.commutant(b, tol)
    return Correspondence(left=bp, right=bp, left_commutant=b, right_commutant=b,
                          rho=bp.basis, rho_prime=theta.basis_images,
                          carrier_dim=b.ambient_dim, tol=tol)


def identity_correspondence(b, right_commutant=None,
                            tol: nk.Tolerance = nk.DEFAULT_TOL) -> Correspondence:
    """The algebra itself as a correspondence over itself."""
    bp = right_commutant if right_commutant is not None else alg.commutant(b, tol)
    return Correspondence(left=b, right=b, left_commutant=bp, right_commutant=bp,
                          rho=b.basis, rho_prime=bp.basis,
                          carrier_dim=b.ambient_dim, tol=tol)


def commutant(e: Correspondence) -> Correspondence:
    """Commutant correspondence: the same carrier with the two actions swapped.

    This is purely structural; applying it twice returns a correspondence
    whose fields are identical to the original ones.
    """
    return Correspondence(left=e.right_commutant, right=e.left_commutant,
                          left_commutant=e.right, right_commutant=e.left,
                          rho=e.rho_prime, rho_prime=e.rho,
                          carrier_dim=e.carrier_dim, check=False)


class TensorProduct:
    """Interior tensor product of composable correspondences.

    The raw spanning family consists of simple tensors (element of e) x
    (carrier vector of f); their Gram matrix, evaluated through the left
    action of f on inner products, is diagonalized and eigenvalues below
    the relative cutoff are quotiented away. ``phi`` maps raw coordinates
    isometrically onto the quotient carrier.
    """

    def __init__(self, e: Correspondence, f: Correspondence,
                 tol: nk.Tolerance = nk.DEFAULT_TOL):
        if not alg.equals(e.right, f.left, tol):
            raise AlgebraMismatch("right algebra of e and left algebra of f differ")
        self.e = e
        self.f = f
        x = e.element_space
        de, hf = x.shape[0], f.carrier_dim
        inner = np.einsum("iab,kac->ikbc", x.conj(), x)  # x_i* x_k, values in B
        coeffs = np.einsum("dbc,ikbc->ikd", f.left.basis.conj(), inner)
        # G[(i,j),(k,l)] = rho_f(x_i* x_k)[j,l]
        gram = np.einsum("ikd,djl->ijkl", coeffs, f.rho).reshape(de * hf, de * hf)
        gram = (gram + gram.conj().T) / 2.0
        lam, vec = np.linalg.eigh(gram)
        top = float(lam[-1]) if lam.size else 0.0
        if lam.size and lam[0] < -tol.eps * max(top, 1.0):
            raise GramNotPSD(f"Gram matrix eigenvalue {lam[0]:.3e} below zero")
        keep = lam > tol.eps * max(top, 1.0)
        lam_kept, vec_kept = lam[keep], vec[:, keep]
        self.carrier_dim = int(lam_kept.size)
        self.phi = (np.sqrt(lam_kept)[:, None] * vec_kept.conj().T)
        self.phi_pinv = vec_kept / np.sqrt(lam_kept)[None, :]
        self.left_basis = x

        rho = np.array([self.lift_left(a) for a in e.rho])
        rho_prime = np.array([self.lift_right(r) for r in f.rho_prime])
        self.corr = Correspondence(
            left=e.left, right=f.right,
            left_commutant=e.left_commutant, right_commutant=f.right_commutant,
            rho=rho, rho_prime=rho_prime, carrier_dim=self.carrier_dim, tol=tol)

    def _left_coeff(self, op: np.ndarray) -> np.ndarray:
        """Matrix of x -> op @ x on the element basis of e."""
        x = self.e.element_space
        moved = np.einsum("ij,bjk->bik", op, x)
        return np.einsum("aij,bij->ab", x.conj(), moved)

    @property
    def _phi3(self) -> np.ndarray:
        # phi with its raw axis split into (element index, f-carrier index);
        # avoids materializing kron factors in the hot paths below
        return self.phi.reshape(self.carrier_dim, -1, self.f.carrier_dim)

    def lift_left(self, op) -> np.ndarray:
        """Operator op (tensor) id on the quotient, op acting on e's carrier."""
        m = self._left_coeff(np.asarray(op, dtype=complex))
        raw = np.einsum("piv,ik->pkv", self._phi3, m)
        return raw.reshape(self.carrier_dim, -1) @ self.phi_pinv

    def lift_right(self, op) -> np.ndarray:
        """Operator id (tensor) op on the quotient, op acting on f's carrier."""
        op = np.asarray(op, dtype=complex)
        raw = np.einsum("piu,uv->piv", self._phi3, op)
        return raw.reshape(self.carrier_dim, -1) @ self.phi_pinv

    def embed(self, x, h) -> np.ndarray:
        """Quotient coordinates of the simple tensor x (tensor) h."""
        return self.embed_matrix(x) @ np.asarray(h, dtype=complex)

    def embed_matrix(self, x) -> np.ndarray:
        """Matrix h -> embed(x, h), shape (carrier_dim, f.carrier_dim)."""
        a = self.e.element_coefficients(x)
        return np.tensordot(a, self._phi3, axes=(0, 1))


def tensor_product(e: Correspondence, f: Correspondence,
                   tol: nk.Tolerance = nk.DEFAULT_TOL) -> TensorProduct:
    return TensorProduct(e, f, tol)


def tensor(e: Correspondence, f: Correspondence,
           tol: nk.Tolerance = nk.DEFAULT_TOL) -> Correspondence:
    """Interior tensor product, returning just the resulting correspondence."""
    return TensorProduct(e, f, tol).corr


def tensor_commutant_iso(e: Correspondence, f: Correspondence,
                         tol: nk.Tolerance = nk.DEFAULT_TOL,
                         tp: TensorProduct | None = None,
                         tp_swapped: TensorProduct | None = None) -> np.ndarray:
    """Unitary between the carriers witnessing the order-reversing identity.

    The commutant of the tensor product of e and f is canonically the tensor
    product of the commutant of f with the commutant of e. On spanning
    vectors the map sends x (tensor) y' g to y' (tensor) x g, with x an
    element of e, y' an element of the commutant of f, and g a vector of
    the shared middle space. The returned matrix maps the carrier of
    tensor(e, f) to the carrier of tensor(commutant(f), commutant(e)) and
    is checked to be unitary and to intertwine both actions.
    """
    t1 = tp if tp is not None else TensorProduct(e, f, tol)
    t2 = tp_swapped if tp_swapped is not None else \
        TensorProduct(commutant(f), commutant(e), tol)
    x = e.element_space
    yp = t2.e.element_space  # elements of the commutant of f
    src = []
    dst = []
    for xi in x:
        for ypj in yp:
            src.append(t1.embed_matrix(xi) @ ypj)        # columns over g
            dst.append(t2.embed_matrix(ypj) @ xi)
    src = np.concatenate(src, axis=1)
    dst = np.concatenate(dst, axis=1)
    w = nk.lstsq_map(src, dst)
    res = float(np.linalg.norm(w @ src - dst))
    if res > tol.bound(float(np.linalg.norm(src)), float(np.linalg.norm(dst))):
        raise NotIsometric(f"spanning identity fails, residual {res:.3e}")
    if w.shape[0] != w.shape[1]:
        raise NotIsometric(f"carrier dimensions differ: {w.shape}")
    res = float(np.linalg.norm(w.conj().T @ w - np.eye(w.shape[0])))
    if res > tol.bound(np.sqrt(w.shape[0])):
        raise NotIsometric(f"not unitary, residual {res:.3e}")
    for img1, img2 in zip(t1.corr.rho, t2.corr.rho_prime):
        r = float(np.linalg.norm(w @ img1 - img2 @ w))
        if r > tol.bound(nk.frobenius(img1)):
            raise NotIntertwining(f"left-algebra intertwining fails, residual {r:.3e}")
    for img1, img2 in zip(t1.corr.rho_prime, t2.corr.rho):
        r = float(np.linalg.norm(w @ img1 - img2 @ w))
        if r > tol.bound(nk.frobenius(img1)):
            raise NotIntertwining(f"commutant intertwining fails, residual {r:.3e}")
    return w


@dataclass(frozen=True)
class MultiplicityTable:
    """Joint multiplicities of the commuting pair on the carrier.

    counts[i][j] is how often the pair (i-th block of the left algebra,
    j-th block of the right commutant) occurs; two correspondences over the
    same algebras are unitarily equivalent exactly when their tables and
    carrier dimensions agree.
    """

    left_blocks: tuple[tuple[int, int], ...]
    right_blocks: tuple[tuple[int, int], ...]
    counts: tuple[tuple[int, ...], ...]
    carrier_dim: int


@dataclass(frozen=True)
class IsoDecision:
    """Outcome of an equivalence test: a unitary, or the two distinct tables."""

    unitary: np.ndarray | None
    table_left: MultiplicityTable
    table_right: MultiplicityTable

    @property
    def isomorphic(self) -> bool:
        return self.unitary is not None

    def __bool__(self) -> bool:
        return self.isomorphic


def _table_against(e: Correspondence, left_sig, right_sig,
                   tol: nk.Tolerance) -> MultiplicityTable:
    counts = []
    for (a_i, _), z in zip(left_sig.blocks, left_sig.central_projections):
        row = []
        pz = e.rho_of(z)
        for (b_j, _), zp in zip(right_sig.blocks, right_sig.central_projections):
            prod = pz @ e.rho_prime_of(zp)
            tr = float(np.trace(prod).real)
            rank = int(round(tr))
            if abs(tr - rank) > 1e-6:
                rank = nk.numeric_rank(prod, tol)
            if rank % (a_i * b_j) != 0:
                raise InvalidCorrespondence(
                    f"joint rank {rank} not divisible by {a_i}*{b_j}")
            row.append(rank // (a_i * b_j))
        counts.append(tuple(row))
    return MultiplicityTable(left_blocks=left_sig.blocks,
                             right_blocks=right_sig.blocks,
                             counts=tuple(counts), carrier_dim=e.carrier_dim)


def find_isomorphism(e: Correspondence, f: Correspondence,
                     tol: nk.Tolerance = nk.DEFAULT_TOL,
                     seed: int = 0) -> IsoDecision:
    """Unitary equivalence of two correspondences over the same algebras.

    Joint multiplicity tables are computed against one shared set of central
    projections. When they match, a generic element of the joint
    intertwiner space is drawn and its unitary polar part is verified; when
    they do not, the two tables are the obstruction certificate.
    """
    if not alg.equals(e.left, f.left, tol) or not alg.equals(e.right, f.right, tol):
        raise AlgebraMismatch("correspondences live over different algebra pairs")
    left_sig = alg.block_decompose(e.left, tol, seed=seed)
    right_sig = alg.block_decompose(e.right_commutant, tol, seed=seed)
    te = _table_against(e, left_sig, right_sig, tol)
    tf = _table_against(f, left_sig, right_sig, tol)
    if te.counts != tf.counts or te.carrier_dim != tf.carrier_dim:
        return IsoDecision(unitary=None, table_left=te, table_right=tf)

    rho_f = np.array([rep_apply(f.left, f.rho, b) for b in e.left.basis])
    rho_prime_f = np.array([rep_apply(f.right_commutant, f.rho_prime, b)
                            for b in e.right_commutant.basis])
    pairs = list(zip(rho_f, e.rho)) + list(zip(rho_prime_f, e.rho_prime))
    kernel = nk.commuting_null_space(pairs, (f.carrier_dim, e.carrier_dim), tol)
    if kernel.shape[0] == 0:
        raise PolarRetryExhausted("intertwiner space is zero despite equal tables")
    for attempt in range(MAX_POLAR_RETRIES):
        rng = np.random.default_rng([seed, attempt, 91])
        t = np.tensordot(nk.random_complex(kernel.shape[0], rng), kernel, axes=(0, 0))
        try:
            u = nk.polar_unitary(t, tol)
        except SingularInput:
            continue
        res = max(float(np.linalg.norm(u @ be - bf @ u))
                  for be, bf in zip(e.rho, rho_f))
        res = max(res, max(float(np.linalg.norm(u @ be - bf @ u))
                           for be, bf in zip(e.rho_prime, rho_prime_f)))
        if res <= tol.bound(1.0):
            return IsoDecision(unitary=u, table_left=te, table_right=tf)
    raise PolarRetryExhausted(
        f"no invertible intertwiner after {MAX_POLAR_RETRIES} draws")
