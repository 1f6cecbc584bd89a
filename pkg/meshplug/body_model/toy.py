"""
A small SMPL-like body for tests and demos.

Eight joints (pelvis, spine, neck, head, two arms of two segments), each
bone wrapped in a closed tube of vertex rings. Conventions: meters, y points
down (up is -y) and the body faces -z, i.e. toward a level camera.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .spec import NUM_BETAS, BodyModelSpec, validate_body_spec

JOINT_NAMES = (
    "pelvis",
    "spine",
    "neck",
    "head",
    "left_shoulder",
    "left_elbow",
    "right_shoulder",
    "right_elbow",
)
PARENTS = (-1, 0, 1, 2, 2, 4, 2, 6)

RING_SIZE = 8
RING_FRACTIONS = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
_BLENDSHAPE_SEED = 1126


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class _Segment:
    joint: int
    start: np.ndarray
    end: np.ndarray
    radius: float
    end_joint: Optional[int]


def _rest_joints() -> np.ndarray:
    joints = np.zeros((8, 3))
    joints[1] = (0.0, -0.22, 0.01)
    joints[2] = (0.0, -0.48, 0.0)
    joints[3] = (0.0, -0.56, -0.01)
    joints[4] = (0.17, -0.46, 0.0)
    joints[5] = joints[4] + 0.28 * _unit((0.6, 0.6, -0.5))
    joints[6] = joints[4] * (-1.0, 1.0, 1.0)
    joints[7] = joints[5] * (-1.0, 1.0, 1.0)
    return joints


def _segments(joints: np.ndarray) -> List[_Segment]:
    left_hand = joints[5] + 0.26 * _unit((0.3, 0.8, -0.5))
    right_hand = left_hand * (-1.0, 1.0, 1.0)
    head_top = joints[3] + (0.0, -0.22, 0.0)
    return [
        _Segment(0, joints[0], joints[1], 0.13, 1),
        _Segment(1, joints[1], joints[2], 0.12, 2),
        _Segment(2, joints[2], joints[3], 0.05, 3),
        _Segment(3, joints[3], head_top, 0.09, None),
        _Segment(4, joints[4], joints[5], 0.045, 5),
        _Segment(5, joints[5], left_hand, 0.04, None),
        _Segment(6, joints[6], joints[7], 0.045, 7),
        _Segment(7, joints[7], right_hand, 0.04, None),
    ]


def _ring_basis(direction: np.ndarray):
    helper = np.array([1.0, 0.0, 0.0]) if abs(direction[2]) > 0.9 else np.array([0.0, 0.0, 1.0])
    u = _unit(np.cross(direction, helper))
    w = np.cross(direction, u)
    return u, w


def toy_body_spec() -> BodyModelSpec:
    """
    Deterministic 8-joint body spec satisfying every BodyModelSpec invariant.

    The first ring of each bone is centred on its joint and skinned rigidly
    to it; the joint regressor averages that ring, so regressor * posed
    vertices reproduces the chain joints to rounding.
    """
    joints = _rest_joints()
    segments = _segments(joints)
    n_joints = len(JOINT_NAMES)

    angles = 2.0 * np.pi * np.arange(RING_SIZE) / RING_SIZE
    vertices, weights, owners, fractions, radial = [], [], [], [], []
    faces = []
    regressor_rings = {}

    for seg in segments:
        direction = _unit(seg.end - seg.start)
        u, w = _ring_basis(direction)
        base = len(vertices)
        for ring_index, t in enumerate(RING_FRACTIONS):
            center = seg.start + t * (seg.end - seg.start)
            row = np.zeros(n_joints)
            if t == 1.0 and seg.end_joint is not None:
                row[seg.joint] = 0.5
                row[seg.end_joint] = 0.5
            else:
                row[seg.joint] = 1.0
            if ring_index == 0:
                regressor_rings[seg.joint] = list(range(len(vertices), len(vertices) + RING_SIZE))
            for phi in angles:
                offset = np.cos(phi) * u + np.sin(phi) * w
                vertices.append(center + seg.radius * offset)
                radial.append(offset)
                weights.append(row)
                owners.append(seg.joint)
                fractions.append(t)

        start_cap = len(vertices)
        vertices.append(seg.start.copy())
        radial.append(np.zeros(3))
        weights.append(weights[base])
        owners.append(seg.joint)
        fractions.append(0.0)
        end_cap = len(vertices)
        vertices.append(seg.end.copy())
        radial.append(np.zeros(3))
        weights.append(weights[base + (len(RING_FRACTIONS) - 1) * RING_SIZE])
        owners.append(seg.joint)
        fractions.append(1.0)

        for ring_index in range(len(RING_FRACTIONS) - 1):
            a0 = base + ring_index * RING_SIZE
            b0 = a0 + RING_SIZE
            for m in range(RING_SIZE):
                m1 = (m + 1) % RING_SIZE
                faces.append((a0 + m, b0 + m, b0 + m1))
                faces.append((a0 + m, b0 + m1, a0 + m1))
        last = base + (len(RING_FRACTIONS) - 1) * RING_SIZE
        for m in range(RING_SIZE):
            m1 = (m + 1) % RING_SIZE
            faces.append((start_cap, base + m1, base + m))
            faces.append((end_cap, last + m, last + m1))

    template = np.array(vertices)
    skinning = np.array(weights)
    owners = np.array(owners)
    fractions = np.array(fractions)
    radial = np.array(radial)
    n_verts = template.shape[0]

    regressor = np.zeros((n_joints, n_verts))
    for joint, ring in regressor_rings.items():
        regressor[joint, ring] = 1.0 / RING_SIZE

    blendshapes = np.zeros((NUM_BETAS, n_verts, 3))
    # overall size about the pelvis
    blendshapes[0] = 0.05 * (template - joints[0])
    # girth
    blendshapes[1] = 0.015 * radial
    # arm length, stretched about each shoulder
    left_arm, right_arm = np.isin(owners, (4, 5)), np.isin(owners, (6, 7))
    blendshapes[2, left_arm] = 0.04 * (template[left_arm] - joints[4])
    blendshapes[2, right_arm] = 0.04 * (template[right_arm] - joints[6])
    # torso length: everything above the spine moves up
    blendshapes[3, owners >= 2] = (0.0, -0.03, 0.0)
    spine = owners == 1
    blendshapes[3, spine] = np.outer(fractions[spine], (0.0, -0.03, 0.0))
    # shoulder width
    blendshapes[4, left_arm] = (0.02, 0.0, 0.0)
    blendshapes[4, right_arm] = (-0.02, 0.0, 0.0)
    # head size
    head = owners == 3
    blendshapes[5, head] = 0.03 * (template[head] - joints[3])
    # remaining directions: fixed low-amplitude fields
    rng = np.random.default_rng(_BLENDSHAPE_SEED)
    blendshapes[6:] = 0.004 * rng.standard_normal((NUM_BETAS - 6, n_verts, 3))

    spec = BodyModelSpec(
        template_vertices=template,
        faces=np.array(faces, dtype=np.int64),
        joint_regressor=regressor,
        parents=np.array(PARENTS, dtype=np.int64),
        skinning_weights=skinning,
        shape_blendshapes=blendshapes,
    )
    return validate_body_spec(spec)


__all__ = ["JOINT_NAMES", "PARENTS", "toy_body_spec"]
