"""Naive sequential forward kinematics, one configuration at a time.

This is the reference implementation the batched engine is checked against,
and the per-sample baseline for throughput comparisons.  It is deliberately
written with none of the engine's machinery: plain Python lists, explicit
elementary-matrix products for origins, and Rodrigues' formula for rotation
about an axis.  Keep it dumb; its value is its independence.
"""

from __future__ import annotations

import math

from .urdf import JointType

__all__ = ["fk_single", "fk_batch"]


def _identity():
    return [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]


def _mat_mul(a, b):
    out = [[0.0] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += a[i][k] * b[k][j]
            out[i][j] = acc
    return out


def _translation(x, y, z):
    t = _identity()
    t[0][3], t[1][3], t[2][3] = x, y, z
    return t


def _rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return [[1.0, 0.0, 0.0, 0.0], [0.0, c, -s, 0.0], [0.0, s, c, 0.0], [0.0, 0.0, 0.0, 1.0]]


def _rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return [[c, 0.0, s, 0.0], [0.0, 1.0, 0.0, 0.0], [-s, 0.0, c, 0.0], [0.0, 0.0, 0.0, 1.0]]


def _rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return [[c, -s, 0.0, 0.0], [s, c, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]


def _rpy(roll, pitch, yaw):
    return _mat_mul(_rot_z(yaw), _mat_mul(_rot_y(pitch), _rot_x(roll)))


def _rodrigues(axis, theta):
    """Rotation of theta about a unit axis: R = I + sin K + (1 - cos) K^2."""
    ax, ay, az = axis
    c, s = math.cos(theta), math.sin(theta)
    k = [[0.0, -az, ay], [az, 0.0, -ax], [-ay, ax, 0.0]]
    out = _identity()
    for i in range(3):
        for j in range(3):
            kk = sum(k[i][l] * k[l][j] for l in range(3))
            out[i][j] = (1.0 if i == j else 0.0) + s * k[i][j] + (1.0 - c) * kk
    return out


def _plane_uv(axis):
    # same convention as the engine: Gram-Schmidt against the coordinate
    # axis with the smallest |component|, then a cross-product completion
    ax = list(axis)
    seed = min(range(3), key=lambda i: abs(ax[i]))
    e = [0.0, 0.0, 0.0]
    e[seed] = 1.0
    dot = e[0] * ax[0] + e[1] * ax[1] + e[2] * ax[2]
    u = [e[i] - dot * ax[i] for i in range(3)]
    norm = math.sqrt(sum(c * c for c in u))
    u = [c / norm for c in u]
    v = [
        ax[1] * u[2] - ax[2] * u[1],
        ax[2] * u[0] - ax[0] * u[2],
        ax[0] * u[1] - ax[1] * u[0],
    ]
    return u, v


def _joint_motion(joint, thetas):
    jt = joint.joint_type
    if jt is JointType.FIXED:
        return _identity()
    if jt in (JointType.REVOLUTE, JointType.CONTINUOUS):
        return _rodrigues(joint.axis, thetas[0])
    if jt is JointType.PRISMATIC:
        ax, ay, az = joint.axis
        d = thetas[0]
        return _translation(d * ax, d * ay, d * az)
    if jt is JointType.PLANAR:
        u, v = _plane_uv(joint.axis)
        du, dv = thetas
        return _translation(
            du * u[0] + dv * v[0],
            du * u[1] + dv * v[1],
            du * u[2] + dv * v[2],
        )
    # floating: translation then the composed rpy rotation
    x, y, z, roll, pitch, yaw = thetas
    return _mat_mul(_translation(x, y, z), _rpy(roll, pitch, yaw))


def fk_single(chain, thetas, want_intermediates=False):
    """Base-to-end transform (nested 4x4 lists) of one configuration."""
    thetas = list(thetas)
    if len(thetas) != chain.m:
        raise ValueError(f"expected {chain.m} joint values, got {len(thetas)}")
    t = _identity()
    inters = []
    offset = 0
    for _, joint in chain.segments:
        x, y, z = joint.origin_xyz
        roll, pitch, yaw = joint.origin_rpy
        t = _mat_mul(t, _mat_mul(_translation(x, y, z), _rpy(roll, pitch, yaw)))
        dof = joint.dof
        t = _mat_mul(t, _joint_motion(joint, thetas[offset : offset + dof]))
        offset += dof
        if want_intermediates:
            inters.append([row[:] for row in t])
    return inters if want_intermediates else t


def fk_batch(chain, theta_batch, want_intermediates=False):
    """Sequential loop over configurations, one row of theta_batch each."""
    results = []
    for row in theta_batch:
        if not hasattr(row, "__len__"):
            row = [row]
        results.append(fk_single(chain, [float(v) for v in row], want_intermediates))
    return results
