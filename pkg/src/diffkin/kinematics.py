"""Batched forward kinematics over a kinematic chain.

The pipeline mirrors a scatter/map/scan structure: a flat joint-value batch
theta (b*m,) is scattered through a precomputed index matrix P into the
6-DoF parameter tensor Q (b, n, 6); every Q row is expanded into a joint
transform; each joint transform is premultiplied by its segment's static
link transform; and an inclusive cumulative matrix product along the chain
axis yields every intermediate (and the final) base-to-frame transform.

Two execution paths share that structure: a vectorized numpy path for plain
float batches, and a scalar path over nested lists for object inputs, where
any DiffScalar entries propagate derivatives through the same math.

Joints with an arbitrary axis are handled by conjugation: motion about axis
``a`` equals R_align . canonical-slot-motion . R_align^T, where R_align maps
the canonical axis onto ``a``.  R_align is folded into the segment's static
transform and R_align^T into the following segment's, so the scatter/scan
pipeline itself only ever sees canonical slots.  Axis-aligned joints
(axis = +-e_i) use their slot directly with the sign folded into the theta
scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import transforms
from .urdf import JointType, KinematicChain

__all__ = [
    "ShapeError",
    "FkEngine",
    "new_engine",
    "scatter_thetas",
    "joint_transforms",
    "combine_link_joint",
    "scan_compose",
    "forward",
    "pose_jacobian",
    "limit_violations",
]


class ShapeError(ValueError):
    """Input dimensions inconsistent with the engine's chain and batch size."""


_AXIS_TOL = 1e-9

# Large batches run through the float pipeline in blocks of this many
# configurations: beyond it the (b, n, 4, 4) working set falls out of cache
# and per-sample cost climbs.  Blocking changes no arithmetic (batch elements
# never interact), so results are bitwise identical to a single pass.
_BLOCK_ROWS = 256

_IDENTITY_ROWS = (
    (1.0, 0.0, 0.0, 0.0),
    (0.0, 1.0, 0.0, 0.0),
    (0.0, 0.0, 1.0, 0.0),
    (0.0, 0.0, 0.0, 1.0),
)


def _aligned_axis(axis):
    """(coordinate index, sign) if axis is +-e_i within tolerance, else None."""
    a = np.asarray(axis, dtype=float)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        if np.abs(a - e).max() <= _AXIS_TOL:
            return i, 1.0
        if np.abs(a + e).max() <= _AXIS_TOL:
            return i, -1.0
    return None


def plane_basis(axis):
    """Deterministic orthonormal (u, v) spanning the plane perpendicular to axis.

    u is the Gram-Schmidt projection of the coordinate axis with the
    smallest-magnitude component of ``axis`` (ties to the lowest index);
    v = axis x u completes the right-handed triad (u, v, axis).
    """
    a = np.asarray(axis, dtype=float)
    seed = int(np.argmin(np.abs(a)))
    e = np.zeros(3)
    e[seed] = 1.0
    u = e - a * a[seed]
    u /= np.linalg.norm(u)
    v = np.cross(a, u)
    return u, v


def _align_rotation(columns):
    r = np.eye(4)
    r[:3, :3] = np.column_stack(columns)
    return r


@dataclass(frozen=True)
class _Segment:
    pre: np.ndarray  # 4x4 static transform: origin with any alignment folded in
    slots: tuple  # Q slots written by this joint's dof, in theta order
    scales: tuple  # per-dof sign/scale applied to theta before scatter
    offsets: tuple  # per-dof index into a single configuration's theta vector
    post: np.ndarray | None  # alignment inverse pending after this joint
    pre_rows: tuple  # same matrices as nested tuples for the scalar path
    post_rows: tuple | None


def _build_segment(joint, dof_offset):
    pre = transforms.sixdof_to_transform(joint.origin_params()).astype(float)
    jt = joint.joint_type
    align = None
    if jt is JointType.FIXED:
        slots, scales = (), ()
    elif jt is JointType.FLOATING:
        slots, scales = (0, 1, 2, 3, 4, 5), (1.0,) * 6
    elif jt is JointType.PLANAR:
        u, v = plane_basis(joint.axis)
        slots, scales = (0, 1), (1.0, 1.0)
        r = _align_rotation((u, v, np.asarray(joint.axis, dtype=float)))
        if not np.array_equal(r, np.eye(4)):
            align = r
    else:  # revolute, continuous, prismatic: one dof about/along `axis`
        hit = _aligned_axis(joint.axis)
        rotational = jt is not JointType.PRISMATIC
        if hit is not None:
            i, sign = hit
            slots, scales = ((3 + i,) if rotational else (i,)), (sign,)
        else:
            # canonical z slot, conjugated onto the actual axis
            slots, scales = ((5,) if rotational else (2,)), (1.0,)
            a = np.asarray(joint.axis, dtype=float)
            u, v = plane_basis(a)
            align = _align_rotation((u, v, a))
    offsets = tuple(range(dof_offset, dof_offset + len(slots)))
    return pre, align, slots, scales, offsets


class FkEngine:
    """Immutable forward-kinematics evaluator for one chain at one batch size.

    All shape-independent work (static transforms, the index matrix, axis
    alignment) happens at construction; forward calls only scatter, build
    joint transforms, and scan.
    """

    def __init__(self, chain: KinematicChain, batch_size: int, dtype=np.float64):
        if batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {batch_size}")
        self.chain = chain
        self.batch_size = int(batch_size)
        self.n = chain.n
        self.m = chain.m
        self.dtype = np.dtype(dtype)
        if self.dtype not in (np.dtype(np.float64), np.dtype(np.float32)):
            raise ValueError(f"unsupported dtype {dtype!r}")

        segments = []
        carry = None  # alignment inverse awaiting the next static transform
        dof_offset = 0
        for _, joint in chain.segments:
            pre, align, slots, scales, offsets = _build_segment(joint, dof_offset)
            dof_offset += len(slots)
            if carry is not None:
                pre = carry @ pre
            post = None
            if align is not None:
                pre = pre @ align
                post = align.T.copy()
            carry = post
            segments.append(
                _Segment(
                    pre=pre,
                    slots=slots,
                    scales=scales,
                    offsets=offsets,
                    post=post,
                    pre_rows=tuple(tuple(row) for row in pre),
                    post_rows=tuple(tuple(row) for row in post) if post is not None else None,
                )
            )
        self._segments = tuple(segments)

        b, n, m = self.batch_size, self.n, self.m
        if n:
            self._tl = np.stack([seg.pre for seg in segments]).astype(self.dtype)
        else:
            self._tl = np.empty((0, 4, 4), dtype=self.dtype)

        slot_per_dof = np.array([s for seg in segments for s in seg.slots], dtype=np.intp)
        row_per_dof = np.array(
            [i for i, seg in enumerate(segments) for _ in seg.slots], dtype=np.intp
        )
        scale_per_dof = np.array([s for seg in segments for s in seg.scales])
        self._rows_per_dof = row_per_dof
        self._slots_per_dof = slot_per_dof
        self._scale_per_dof = scale_per_dof.astype(self.dtype)
        self._index_matrix = np.column_stack(
            [
                np.repeat(np.arange(b, dtype=np.intp), m),
                np.tile(row_per_dof, b),
                np.tile(slot_per_dof, b),
            ]
        )
        self._scale_tile = np.tile(scale_per_dof, b).astype(self.dtype)
        # per-row post-corrections for the float path, applied after the scan
        self._float_posts = tuple(
            (i, seg.post.astype(self.dtype)) for i, seg in enumerate(segments) if seg.post is not None
        )
        self._final_post = None
        if self._float_posts and self._float_posts[-1][0] == self.n - 1:
            self._final_post = self._float_posts[-1][1]

    # aliases matching the tensor-pipeline notation
    @property
    def b(self):
        return self.batch_size

    @property
    def index_matrix(self):
        """(b*m, 3) rows of (batch index, joint row, parameter slot)."""
        return self._index_matrix.copy()

    @property
    def link_transforms(self):
        """The precomputed static per-segment transforms, shape (n, 4, 4)."""
        return self._tl.copy()

    # -- pipeline stages (float path) ---------------------------------------

    def _check_flat(self, flat):
        if flat.size != self.batch_size * self.m:
            raise ShapeError(
                f"expected {self.batch_size * self.m} joint values "
                f"(batch {self.batch_size} x dof {self.m}), got {flat.size}"
            )

    def scatter_thetas(self, thetas):
        """Scatter a flat theta batch into the (b, n, 6) parameter tensor.

        The tensor starts from fresh zeros on every call; only the index
        matrix rows are written, so unaddressed cells are exactly zero.
        """
        flat = np.asarray(thetas, dtype=self.dtype).ravel()
        self._check_flat(flat)
        q = np.zeros((self.batch_size, self.n, 6), dtype=self.dtype)
        if flat.size:
            p = self._index_matrix
            q[p[:, 0], p[:, 1], p[:, 2]] = flat * self._scale_tile
        return q

    def combine_link_joint(self, tj):
        """Per-cell static-times-joint product: TLJ[k, i] = TL[i] @ TJ[k, i]."""
        return np.matmul(self._tl, tj)

    def forward(self, thetas, want_intermediates=False):
        """Full pipeline: scatter -> joint transforms -> combine -> scan.

        Returns the (b, 4, 4) final transforms, or all cumulative
        (b, n, 4, 4) transforms with ``want_intermediates``.  Object-dtype
        input (e.g. containing DiffScalar entries) runs the scalar path and
        is differentiable end-to-end.
        """
        arr = thetas if isinstance(thetas, np.ndarray) else np.asarray(thetas)
        if arr.dtype == object:
            return self._forward_generic(arr.ravel().tolist(), want_intermediates)
        flat = np.asarray(arr, dtype=self.dtype).ravel()
        self._check_flat(flat)
        if flat.size and not np.isfinite(flat).all():
            raise ValueError("non-finite joint value in theta batch")
        b, n, m = self.batch_size, self.n, self.m
        if n == 0:
            if want_intermediates:
                return np.empty((b, 0, 4, 4), dtype=self.dtype)
            return np.broadcast_to(np.eye(4, dtype=self.dtype), (b, 4, 4)).copy()
        flat2d = flat.reshape(b, m)
        if want_intermediates:
            if b <= _BLOCK_ROWS:
                return self._intermediates_block(flat2d)
            out = np.empty((b, n, 4, 4), dtype=self.dtype)
            for start in range(0, b, _BLOCK_ROWS):
                stop = min(start + _BLOCK_ROWS, b)
                out[start:stop] = self._intermediates_block(flat2d[start:stop])
            return out
        out = np.empty((b, 4, 4), dtype=self.dtype)
        for start in range(0, b, _BLOCK_ROWS):
            stop = min(start + _BLOCK_ROWS, b)
            self._finals_block(flat2d[start:stop], out[start:stop])
        return out

    def _joint_transforms_block(self, flat2d):
        q = np.zeros((flat2d.shape[0], self.n, 6), dtype=self.dtype)
        if self.m:
            q[:, self._rows_per_dof, self._slots_per_dof] = flat2d * self._scale_per_dof
        return transforms.sixdof_batch_to_transforms(q)

    def _intermediates_block(self, flat2d):
        tj = self._joint_transforms_block(flat2d)
        cum = scan_compose(self.combine_link_joint(tj))
        for i, post in self._float_posts:
            cum[:, i] = cum[:, i] @ post
        return cum

    def _finals_block(self, flat2d, out):
        # finals only: fold the running product directly into the output
        # slice, without materializing the (b, n, 4, 4) cumulative tensor
        tj = self._joint_transforms_block(flat2d)
        n, post = self.n, self._final_post
        if n == 1 and post is None:
            np.matmul(self._tl[0], tj[:, 0], out=out)
            return
        cur = np.matmul(self._tl[0], tj[:, 0])
        for i in range(1, n):
            term = np.matmul(self._tl[i], tj[:, i])
            if i == n - 1 and post is None:
                np.matmul(cur, term, out=out)
                return
            cur = cur @ term
        np.matmul(cur, post, out=out)

    # -- scalar path ---------------------------------------------------------

    def _forward_generic(self, flat, want_intermediates):
        b, m, n = self.batch_size, self.m, self.n
        if len(flat) != b * m:
            raise ShapeError(
                f"expected {b * m} joint values (batch {b} x dof {m}), got {len(flat)}"
            )
        shape = (b, n, 4, 4) if want_intermediates else (b, 4, 4)
        out = np.empty(shape, dtype=object)
        for k in range(b):
            config = flat[k * m : (k + 1) * m]
            cum = None
            for i, seg in enumerate(self._segments):
                cell = seg.pre_rows
                if seg.slots:
                    params = [0.0] * 6
                    for slot, scale, off in zip(seg.slots, seg.scales, seg.offsets):
                        v = config[off]
                        params[slot] = v if scale == 1.0 else v * scale
                    cell = _mm4(cell, transforms.sixdof_rows(params))
                cum = cell if cum is None else _mm4(cum, cell)
                if want_intermediates:
                    rows = cum if seg.post_rows is None else _mm4(cum, seg.post_rows)
                    out[k, i] = np.array(rows, dtype=object)
            if not want_intermediates:
                if n == 0:
                    out[k] = np.array(_IDENTITY_ROWS, dtype=object)
                else:
                    last = self._segments[-1]
                    rows = cum if last.post_rows is None else _mm4(cum, last.post_rows)
                    out[k] = np.array(rows, dtype=object)
        return out


def _mm4(a, b):
    """4x4 matrix product over nested rows of plain or differentiable scalars."""
    b0, b1, b2, b3 = b
    out = []
    for row in a:
        a0, a1, a2, a3 = row
        out.append(
            [
                a0 * b0[0] + a1 * b1[0] + a2 * b2[0] + a3 * b3[0],
                a0 * b0[1] + a1 * b1[1] + a2 * b2[1] + a3 * b3[1],
                a0 * b0[2] + a1 * b1[2] + a2 * b2[2] + a3 * b3[2],
                a0 * b0[3] + a1 * b1[3] + a2 * b2[3] + a3 * b3[3],
            ]
        )
    return out


# -- module-level operation wrappers ----------------------------------------


def new_engine(chain: KinematicChain, batch_size: int, dtype=np.float64) -> FkEngine:
    return FkEngine(chain, batch_size, dtype=dtype)


def scatter_thetas(engine: FkEngine, thetas):
    return engine.scatter_thetas(thetas)


def joint_transforms(q):
    """Expand every (batch, joint) parameter row of Q into its 4x4 transform."""
    q = np.asarray(q)
    if q.dtype == object:
        lead = q.shape[:-1]
        out = np.empty(lead + (4, 4), dtype=object)
        for idx in np.ndindex(lead):
            out[idx] = np.array(transforms.sixdof_rows(list(q[idx])), dtype=object)
        return out
    return transforms.sixdof_batch_to_transforms(q)


def combine_link_joint(engine: FkEngine, tj):
    return engine.combine_link_joint(tj)


def scan_compose(tlj):
    """Inclusive cumulative matrix product along the chain axis (axis -3)."""
    tlj = np.asarray(tlj)
    n = tlj.shape[-3]
    out = np.empty_like(tlj)
    if n == 0:
        return out
    out[..., 0, :, :] = tlj[..., 0, :, :]
    for i in range(1, n):
        out[..., i, :, :] = out[..., i - 1, :, :] @ tlj[..., i, :, :]
    return out


def forward(engine: FkEngine, thetas, want_intermediates=False):
    return engine.forward(thetas, want_intermediates=want_intermediates)


def pose_jacobian(engine: FkEngine, thetas):
    """6 x m pose Jacobians, one per batch configuration.

    Rows follow the pose layout (x, y, z, alpha, beta, gamma); columns follow
    the chain's theta layout.  Computed in a single seeded forward pass: all
    configurations share the m-wide tangent space because cross-configuration
    derivatives are structurally zero.
    """
    from . import autodiff as ad

    flat = np.asarray(thetas, dtype=float).ravel()

    def pipeline(seeded):
        finals = engine._forward_generic(list(seeded), want_intermediates=False)
        return [transforms.pose_values_from_transform(finals[k]) for k in range(engine.batch_size)]

    return ad.batch_jacobian(pipeline, flat, engine.m, batch_size=engine.batch_size)


def limit_violations(chain: KinematicChain, thetas):
    """URDF limit violations in a theta batch (forward never enforces limits).

    Returns (config index, joint name, dof index within joint, value, lower,
    upper) tuples.
    """
    if chain.m == 0:
        return []
    flat = np.asarray(thetas, dtype=float).reshape(-1, chain.m)
    violations = []
    offset = 0
    for _, joint in chain.segments:
        if joint.limits is not None:
            lo, hi = joint.limits.lower, joint.limits.upper
            for d in range(joint.dof):
                col = flat[:, offset + d]
                for k in np.nonzero((col < lo) | (col > hi))[0]:
                    violations.append((int(k), joint.name, d, float(col[k]), lo, hi))
        offset += joint.dof
    return violations
