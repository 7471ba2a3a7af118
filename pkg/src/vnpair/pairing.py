"""Pairing of an endomorphism of an algebra with one of its commutant.

A single unitary U pairs theta on B with theta_prime on B' when conjugation
implements both maps with opposite orientations: U* b U = theta(b) and
U b' U* = theta_prime(b'). The engine verifies candidate unitaries, converts
pairings to bimodule isomorphisms between the twisted correspondence of
theta and the commutant of the twisted correspondence of theta_prime and
back, decides pairability through the multiplicity tables, and links two
pairable endomorphisms by an operator cocycle.
"""

from __future__ import annotations

import numpy as np

from . import algebra as alg
from . import correspondence as corr
from . import endo as endo_mod
from . import numkernel as nk
from . import prodsys as ps
from .errors import (CocycleResidual, DomainsNotCommutant, NotFaithful,
                     NotPairedInput, NotUnitary, NotUnitaryImage,
                     PairingCheckFailed, RelationB, RelationBPrime)


class PairingCertificate:
    """Outcome of a pairing decision.

    Either carries the implementing unitary, or the two joint multiplicity
    tables whose mismatch obstructs any pairing.
    """

    def __init__(self, unitary=None, table_left=None, table_right=None,
                 residuals=None):
        self.unitary = None if unitary is None else np.asarray(unitary,
                                                               dtype=complex)
        self.table_left = table_left
        self.table_right = table_right
        self.residuals = dict(residuals) if residuals else {}

    @property
    def paired(self) -> bool:
        return self.unitary is not None

    def __bool__(self) -> bool:
        return self.paired


class CorrespondenceIso:
    """Bimodule unitary between two correspondences on explicit carriers.

    The carrier matrix intertwines both actions; on element spaces it acts
    by left multiplication, which is the whole map by right-linearity.
    """

    def __init__(self, source, target, carrier_unitary, residuals=None):
        self.source = source
        self.target = target
        self.carrier_unitary = np.asarray(carrier_unitary, dtype=complex)
        self.residuals = dict(residuals) if residuals else {}

    def apply(self, x) -> np.ndarray:
        return self.carrier_unitary @ np.asarray(x, dtype=complex)


def _check_unitary(u, n, tol: nk.Tolerance) -> np.ndarray:
    u = nk.as_matrix(u, "U")
    if u.shape != (n, n):
        raise NotUnitary(f"expected shape {(n, n)}, got {u.shape}")
    res = float(np.linalg.norm(u.conj().T @ u - np.eye(n)))
    if res > tol.bound(np.sqrt(n)):
        raise NotUnitary(f"U is not unitary, residual {res:.3e}")
    return u


def _commutant_domains(theta, theta_prime, tol: nk.Tolerance):
    b = theta.domain
    bp = theta_prime.domain
    match = alg.equals(bp, alg.commutant(b, tol), tol)
    if not match:
        raise DomainsNotCommutant(
            f"second domain is not the commutant of the first, "
            f"distance {match.residual:.3e}")
    return b, bp


def check_pairing(u, theta, theta_prime, horizon: int = 4,
                  tol: nk.Tolerance = nk.DEFAULT_TOL) -> PairingCertificate:
    """Verify that conjugation by u implements both maps, plus all powers.

    u* b u must equal theta(b) on the basis of B, u b' u* must equal
    theta_prime(b') on the basis of B', and the same relations must hold
    for u^k against the k-th iterates up to the horizon.
    """
    b, bp = _commutant_domains(theta, theta_prime, tol)
    n = b.ambient_dim
    u = _check_unitary(u, n, tol)
    worst_b = max(float(np.linalg.norm(u.conj().T @ x @ u - theta(x)))
                  for x in b.basis)
    if worst_b > tol.bound(1.0):
        raise RelationB(
            f"u* b u does not implement the map on B, residual {worst_b:.3e}")
    worst_bp = max(float(np.linalg.norm(u @ y @ u.conj().T - theta_prime(y)))
                   for y in bp.basis)
    if worst_bp > tol.bound(1.0):
        raise RelationBPrime(
            f"u b' u* does not implement the map on B', residual {worst_bp:.3e}")
    worst_pow = 0.0
    uk = u.copy()
    th = theta
    thp = theta_prime
    for _ in range(2, horizon + 1):
        uk = uk @ u
        th = endo_mod.compose(theta, th, tol)
        thp = endo_mod.compose(theta_prime, thp, tol)
        for x in b.basis:
            worst_pow = max(worst_pow, float(
                np.linalg.norm(uk.conj().T @ x @ uk - th(x))))
        for y in bp.basis:
            worst_pow = max(worst_pow, float(
                np.linalg.norm(uk @ y @ uk.conj().T - thp(y))))
    if worst_pow > tol.bound(1.0):
        raise RelationB(
            f"powers of u fail to implement the iterates, residual {worst_pow:.3e}")
    return PairingCertificate(unitary=u, residuals={
        "relation_b": worst_b, "relation_b_prime": worst_bp,
        "powers": worst_pow})


def isomorphism_from_pairing(u, theta, theta_prime,
                             tol: nk.Tolerance = nk.DEFAULT_TOL) -> CorrespondenceIso:
    """The bimodule unitary x -> u x induced by a verified pairing.

    Source is the twisted correspondence of theta; target is the commutant
    of the twisted correspondence of theta_prime. The map is checked to
    preserve inner products, to be right-linear, to interchange the left
    actions through theta, and to hit the whole target element space.
    """
    cert = check_pairing(u, theta, theta_prime, horizon=1, tol=tol)
    u = cert.unitary
    b = theta.domain
    bp = theta_prime.domain
    source = corr.of_endomorphism(theta, right_commutant=bp, tol=tol)
    target = corr.commutant(corr.of_endomorphism(theta_prime,
                                                 right_commutant=b, tol=tol))
    x = source.element_space
    worst = {"inner": 0.0, "right_linear": 0.0, "left_covariant": 0.0,
             "target_span": 0.0}
    moved = np.einsum("ij,bjk->bik", u, x)
    inner_src = np.einsum("iab,jac->ijbc", x.conj(), x)
    inner_dst = np.einsum("iab,jac->ijbc", moved.conj(), moved)
    worst["inner"] = float(np.abs(inner_dst - inner_src).max())
    for xi in x:
        uxi = u @ xi
        for bj in b.basis:
            worst["right_linear"] = max(worst["right_linear"], float(
                np.linalg.norm(u @ (xi @ bj) - uxi @ bj)))
            worst["left_covariant"] = max(worst["left_covariant"], float(
                np.linalg.norm(u @ (theta(bj) @ xi) - bj @ uxi)))
    y = target.element_space
    flat_moved = moved.reshape(moved.shape[0], -1)
    flat_y = y.reshape(y.shape[0], -1)
    if y.shape[0] != x.shape[0]:
        worst["target_span"] = 1.0
    else:
        proj = flat_moved - (flat_moved @ flat_y.conj().T) @ flat_y
        back = flat_y - (flat_y @ flat_moved.conj().T) @ flat_moved
        worst["target_span"] = max(float(np.linalg.norm(proj, axis=1).max()),
                                   float(np.linalg.norm(back, axis=1).max()))
    bad = {k: v for k, v in worst.items() if v > tol.bound(1.0)}
    if bad:
        raise PairingCheckFailed(f"induced bimodule map fails: {bad}")
    return CorrespondenceIso(source, target, u, residuals=worst)


def _eq33_residuals(u, theta, theta_prime, tol: nk.Tolerance) -> dict:
    """Rebuild the dilation-level map and compare with multiplication by u.

    The map sends the dilated simple tensor built from (x, y, h) through the
    product of the source system on one side and through the image elements
    acting on the dilation space on the other; solving for it on a spanning
    family must return left multiplication by u.
    """
    b = theta.domain
    n = b.ambient_dim
    p = ps.from_endomorphism(theta, 1, tol)
    pf = ps.commutant_system(ps.from_endomorphism(theta_prime, 1, tol), tol)
    wf = ps.identity_right_dilation(pf, tol)
    v1 = p.products[(0, 1)]
    t01 = p.tensors[(0, 1)]
    src, dst = [], []
    for xi in p.members[0].element_space:
        left = v1 @ t01.embed_matrix(xi)
        for xj in p.members[1].element_space:
            src.append(left @ xj)
            dst.append(xi @ (wf.maps[1] @ wf.tensors[1].embed_matrix(u @ xj)))
    src = np.concatenate(src, axis=1)
    dst = np.concatenate(dst, axis=1)
    u33 = nk.lstsq_map(src, dst)
    solve = float(np.linalg.norm(u33 @ src - dst))
    return {"eq33_solve": solve, "eq33_match": float(np.linalg.norm(u33 - u))}


def pairing_from_isomorphism(iso, theta, theta_prime,
                             tol: nk.Tolerance = nk.DEFAULT_TOL) -> PairingCertificate:
    """Recover the pairing unitary from a bimodule isomorphism.

    The image of the identity element determines the whole map by
    right-linearity; it must be unitary and pass the pairing checks, and
    the dilation-level map it induces must equal left multiplication by it.
    """
    b = theta.domain
    n = b.ambient_dim
    if isinstance(iso, CorrespondenceIso):
        u = iso.apply(np.eye(n, dtype=complex))
    else:
        u = np.asarray(iso, dtype=complex) @ np.eye(n, dtype=complex)
    res = float(np.linalg.norm(u.conj().T @ u - np.eye(n)))
    if u.shape != (n, n) or res > tol.bound(np.sqrt(n)):
        raise NotUnitaryImage(
            f"image of the identity is not unitary, residual {res:.3e}")
    try:
        cert = check_pairing(u, theta, theta_prime, tol=tol)
    except (NotUnitary, RelationB, RelationBPrime) as exc:
        raise PairingCheckFailed(
            f"recovered unitary fails the pairing relations: {exc}") from exc
    eq33 = _eq33_residuals(u, theta, theta_prime, tol)
    bad = {k: v for k, v in eq33.items() if v > tol.bound(np.sqrt(n))}
    if bad:
        raise PairingCheckFailed(f"dilation-level map deviates: {bad}")
    cert.residuals.update(eq33)
    return cert


def can_pair(theta, theta_prime, tol: nk.Tolerance = nk.DEFAULT_TOL,
             seed: int = 0) -> PairingCertificate:
    """Decide pairability through the correspondence isomorphism test.

    Paired outcomes carry a verified unitary; unpaired outcomes carry the
    two joint multiplicity tables that differ.
    """
    if not endo_mod.is_faithful(theta, tol):
        raise NotFaithful("first map is not faithful")
    if not endo_mod.is_faithful(theta_prime, tol):
        raise NotFaithful("second map is not faithful")
    b, bp = _commutant_domains(theta, theta_prime, tol)
    e = corr.of_endomorphism(theta, right_commutant=bp, tol=tol)
    f = corr.commutant(corr.of_endomorphism(theta_prime,
                                            right_commutant=b, tol=tol))
    decision = corr.find_isomorphism(e, f, tol, seed=seed)
    if not decision:
        return PairingCertificate(unitary=None,
                                  table_left=decision.table_left,
                                  table_right=decision.table_right)
    iso = CorrespondenceIso(e, f, decision.unitary)
    cert = pairing_from_isomorphism(iso, theta, theta_prime, tol)
    cert.table_left = decision.table_left
    cert.table_right = decision.table_right
    return cert


def restriction_symmetry(u, b, tol: nk.Tolerance = nk.DEFAULT_TOL):
    """Whether conjugation preserves the algebra, tested on both sides.

    Returns the pair (u* (span b) u inside span b, u (span b') u* inside
    span b'). The two verdicts agree on every unitary; tests treat any
    disagreement as a bug, not as data.
    """
    n = b.ambient_dim
    u = _check_unitary(u, n, tol)
    bp = alg.commutant(b, tol)
    down = max(float(b.contains(u.conj().T @ x @ u).residual) for x in b.basis)
    up = max(float(bp.contains(u @ y @ u.conj().T).residual) for y in bp.basis)
    return (down <= tol.bound(1.0), up <= tol.bound(1.0))


def cocycle_link(theta1, theta2, theta_prime, horizon: int,
                 tol: nk.Tolerance = nk.DEFAULT_TOL, seed: int = 0):
    """Unitary cocycle in B linking two endomorphisms paired with the same map.

    c_1 is the quotient of the two pairing unitaries; the family follows the
    recursion c_{s+t} = c_s theta1^s(c_t) and conjugates the iterates of
    theta1 onto the iterates of theta2. Returns the list c_1..c_N.
    """
    cert1 = can_pair(theta1, theta_prime, tol, seed=seed)
    if not cert1:
        raise NotPairedInput("first map does not pair with the given partner")
    cert2 = can_pair(theta2, theta_prime, tol, seed=seed)
    if not cert2:
        raise NotPairedInput("second map does not pair with the given partner")
    b = theta1.domain
    c1 = cert2.unitary.conj().T @ cert1.unitary
    report = b.contains(c1)
    if not report:
        raise CocycleResidual(
            f"link is not in the algebra, residual {report.residual:.3e}",
            step=1, residual=float(report.residual))
    powers1 = [endo_mod.identity(b), theta1]
    powers2 = [endo_mod.identity(b), theta2]
    for _ in range(horizon - 1):
        powers1.append(endo_mod.compose(theta1, powers1[-1], tol))
        powers2.append(endo_mod.compose(theta2, powers2[-1], tol))
    family = [c1]
    for s in range(1, horizon):
        family.append(family[-1] @ powers1[s](c1))
    for k, c in enumerate(family, start=1):
        worst = max(float(np.linalg.norm(c @ powers1[k](x) @ c.conj().T
                                         - powers2[k](x)))
                    for x in b.basis)
        if worst > tol.bound(1.0):
            raise CocycleResidual(
                f"conjugation fails at step {k}, residual {worst:.3e}",
                step=k, residual=worst)
    worst_split = 0.0
    for s in range(1, horizon):
        for t in range(1, horizon - s + 1):
            worst_split = max(worst_split, float(np.linalg.norm(
                family[s + t - 1] - family[s - 1] @ powers1[s](family[t - 1]))))
    if worst_split > tol.bound(1.0):
        raise CocycleResidual(
            f"cocycle identity fails on a splitting, residual {worst_split:.3e}",
            step=None, residual=worst_split)
    return family
