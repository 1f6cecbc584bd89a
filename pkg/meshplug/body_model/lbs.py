"""
Linear blend skinning over the kinematic tree, and its forward-mode Jacobian.

Stage order: shape blend shapes, joint regression on the shaped rest mesh,
chain of per-joint rotations, skinning, translation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import DimensionMismatchError
from ..rotations import rodrigues, rodrigues_jacobian
from .params import BodyParams, Mesh
from .spec import NUM_BETAS, BodyModelSpec


@dataclass(frozen=True)
class _Chain:
    shaped: np.ndarray  # N x 3
    rest_joints: np.ndarray  # J x 3
    local_rotations: np.ndarray  # J x 3 x 3
    global_rotations: np.ndarray  # J x 3 x 3
    global_translations: np.ndarray  # J x 3, posed joint positions


def _check_params(spec: BodyModelSpec, params: BodyParams) -> None:
    if params.joint_count != spec.joint_count:
        raise DimensionMismatchError(
            f"pose is invalid: spec has {spec.joint_count} joints, params have {params.joint_count}."
        )


def shaped_vertices(spec: BodyModelSpec, shape: np.ndarray) -> np.ndarray:
    return spec.template_vertices + np.einsum("s,snc->nc", np.asarray(shape, dtype=np.float64), spec.shape_blendshapes)


def root_pivot(spec: BodyModelSpec, shape: np.ndarray) -> np.ndarray:
    """Rest-pose root joint of the shaped mesh; the pivot of root rotations."""
    return spec.joint_regressor[0] @ shaped_vertices(spec, shape)


def regress_joints(spec: BodyModelSpec, vertices: np.ndarray) -> np.ndarray:
    return spec.joint_regressor @ np.asarray(vertices, dtype=np.float64)


def _forward_chain(spec: BodyModelSpec, params: BodyParams) -> _Chain:
    shaped = shaped_vertices(spec, params.shape)
    rest_joints = spec.joint_regressor @ shaped
    local = rodrigues(params.pose)

    parents = spec.parents
    global_rot = np.empty_like(local)
    global_trans = np.empty_like(rest_joints)
    global_rot[0] = local[0]
    global_trans[0] = rest_joints[0]
    for k in range(1, spec.joint_count):
        p = parents[k]
        global_rot[k] = global_rot[p] @ local[k]
        global_trans[k] = global_rot[p] @ (rest_joints[k] - rest_joints[p]) + global_trans[p]
    return _Chain(shaped, rest_joints, local, global_rot, global_trans)


def _skin(spec: BodyModelSpec, chain: _Chain) -> np.ndarray:
    # per-joint affine x -> G_k (x - J_k) + t_k, blended by skinning weights
    offsets = chain.global_translations - np.einsum("kab,kb->ka", chain.global_rotations, chain.rest_joints)
    rotated = np.einsum("nk,kab,nb->na", spec.skinning_weights, chain.global_rotations, chain.shaped)
    return rotated + spec.skinning_weights @ offsets


def lbs_forward(spec: BodyModelSpec, params: BodyParams) -> Mesh:
    """
    M(theta, beta) plus translation.

    Joints come from the kinematic chain; both joints and vertices include
    the translation.

    :param spec: body model.
    :param params: pose/shape/translation sized for `spec`.
    :return: posed Mesh.
    """
    _check_params(spec, params)
    chain = _forward_chain(spec, params)
    vertices = _skin(spec, chain) + params.translation
    joints = chain.global_translations + params.translation
    return Mesh(vertices, spec.faces, joints)


def parameter_count(spec: BodyModelSpec) -> int:
    return 3 * spec.joint_count + NUM_BETAS + 3


def lbs_jacobian(spec: BodyModelSpec, params: BodyParams, with_vertices: bool = True) -> Tuple[Mesh, np.ndarray, np.ndarray]:
    """
    Posed mesh plus d(joints)/d(params) and d(vertices)/d(params).

    Parameters are ordered as `BodyParams.as_vector()`. Derivatives are
    propagated forward through the tree: for G_k = G_p * L_k,
    dR_k = dR_p R_k + R_p dR_k(own) and dt_k = dR_p (J_k - J_p) + R_p (dJ_k - dJ_p) + dt_p.

    :return: (mesh, joint Jacobian J x 3 x P, vertex Jacobian N x 3 x P or None)
    """
    _check_params(spec, params)
    chain = _forward_chain(spec, params)
    n_joints = spec.joint_count
    n_params = parameter_count(spec)
    shape_start = 3 * n_joints
    trans_start = shape_start + NUM_BETAS

    # d(rest joints)/d(beta): J x 3 x 10
    joint_shape_dirs = np.einsum("kn,snc->kcs", spec.joint_regressor, spec.shape_blendshapes)
    d_rest = np.zeros((n_joints, 3, n_params))
    d_rest[:, :, shape_start:trans_start] = joint_shape_dirs

    d_rot = np.zeros((n_joints, n_params, 3, 3))
    d_trans = np.zeros((n_joints, 3, n_params))
    parents = spec.parents
    for k in range(n_joints):
        own = rodrigues_jacobian(params.pose[k])
        cols = slice(3 * k, 3 * k + 3)
        if k == 0:
            d_rot[0, cols] = own
            d_trans[0] = d_rest[0]
            continue
        p = parents[k]
        d_rot[k] = np.einsum("pab,bc->pac", d_rot[p], chain.local_rotations[k])
        d_rot[k, cols] += np.einsum("ab,ibc->iac", chain.global_rotations[p], own)
        bone = chain.rest_joints[k] - chain.rest_joints[p]
        d_trans[k] = (
            np.einsum("pab,b->ap", d_rot[p], bone)
            + chain.global_rotations[p] @ (d_rest[k] - d_rest[p])
            + d_trans[p]
        )

    d_joints = d_trans.copy()
    d_joints[:, :, trans_start:] += np.eye(3)

    vertices = _skin(spec, chain) + params.translation
    joints = chain.global_translations + params.translation
    mesh = Mesh(vertices, spec.faces, joints)
    if not with_vertices:
        return mesh, d_joints, None

    weights = spec.skinning_weights
    rel = chain.shaped[:, None, :] - chain.rest_joints[None, :, :]
    d_verts = np.einsum("nk,kpab,nkb->nap", weights, d_rot, rel)
    d_verts += np.einsum("nk,kap->nap", weights, d_trans)
    # R_k (dv_s - dJ_k), only shape columns are nonzero
    shape_dirs = np.transpose(spec.shape_blendshapes, (1, 2, 0))  # N x 3 x 10
    d_verts[:, :, shape_start:trans_start] += np.einsum("nk,kab,nbs->nas", weights, chain.global_rotations, shape_dirs)
    d_verts[:, :, shape_start:trans_start] -= np.einsum(
        "nk,kab,kbs->nas", weights, chain.global_rotations, joint_shape_dirs
    )
    d_verts[:, :, trans_start:] += np.eye(3)
    return mesh, d_joints, d_verts


__all__ = [
    "lbs_forward",
    "lbs_jacobian",
    "parameter_count",
    "root_pivot",
    "regress_joints",
    "shaped_vertices",
]
