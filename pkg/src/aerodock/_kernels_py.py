"""Pure-numpy implementations of the hot simulation kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension. :mod:`aerodock.kernels` picks one at import time.
"""
import math

import numpy as np

BACKEND = "python"

_E3 = np.array([0.0, 0.0, 1.0])


def _hat(w):
    return np.array([[0.0, -w[2], w[1]],
                     [w[2], 0.0, -w[0]],
                     [-w[1], w[0], 0.0]])


def so3_log(E):
    """Rotation vector of the rotation matrix ``E``."""
    c = 0.5 * (E[0, 0] + E[1, 1] + E[2, 2] - 1.0)
    c = min(1.0, max(-1.0, c))
    theta = math.acos(c)
    vee = np.array([E[2, 1] - E[1, 2], E[0, 2] - E[2, 0], E[1, 0] - E[0, 1]])
    if theta < 1e-8:
        return 0.5 * vee
    if math.pi - theta < 1e-6:
        # axis from the symmetric part; sign from the largest diagonal entry
        B = 0.5 * (E + np.eye(3))
        k = int(np.argmax(np.diag(B)))
        axis = B[:, k] / math.sqrt(max(B[k, k], 1e-300))
        axis = axis / np.linalg.norm(axis)
        return theta * axis
    return (theta / (2.0 * math.sin(theta))) * vee


def so3_exp(phi):
    theta = math.sqrt(phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2])
    K = _hat(phi)
    if theta < 1e-8:
        return np.eye(3) + K + 0.5 * (K @ K)
    s = math.sin(theta) / theta
    c = (1.0 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + s * K + c * (K @ K)


def relax_attitude(R, R_des, alpha):
    """Move ``R`` a fraction ``alpha`` of the geodesic towards ``R_des``."""
    if alpha >= 1.0:
        return np.array(R_des, dtype=float, copy=True)
    Rn = R @ so3_exp(alpha * so3_log(R.T @ R_des))
    # one Newton step of the polar decomposition keeps drift at round-off
    return 0.5 * Rn @ (3.0 * np.eye(3) - Rn.T @ Rn)


def vehicle_step(p, v, R, R_des, thrust, mass, f_ext, dt, tau_att, g):
    """Advance one vehicle by ``dt``.

    The thrust axis is taken at the attitude half a step into the
    relaxation (second order in ``dt``); with ``tau_att = 0`` it is the
    commanded attitude. Velocity is updated first, then position with the
    trapezoid of old and new velocity.
    """
    alpha = 1.0 if tau_att <= 0.0 else 1.0 - math.exp(-dt / tau_att)
    alpha_mid = 1.0 if tau_att <= 0.0 else 1.0 - math.exp(-0.5 * dt / tau_att)
    R_new = relax_attitude(R, R_des, alpha)
    R_mid = relax_attitude(R, R_des, alpha_mid)
    acc = -R_mid[:, 2] * (thrust / mass) + g * _E3 + f_ext
    v_new = v + acc * dt
    p_new = p + 0.5 * (v + v_new) * dt
    return p_new, v_new, R_new


def thrust_attitude(a_cmd, yaw, mass, g, eps):
    """Invert ``m a = -R T e3 + m g e3`` for a thrust axis and magnitude.

    Returns ``(R_des, T, saturated)``.
    """
    t = g * _E3 - a_cmd
    n = math.sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2])
    saturated = False
    if n < eps:
        saturated = True
        t = _E3 * eps if n < 1e-12 else t * (eps / n)
        n = eps
    b3 = t / n
    xc = np.array([math.cos(yaw), math.sin(yaw), 0.0])
    b2 = np.cross(b3, xc)
    nb2 = np.linalg.norm(b2)
    if nb2 < 1e-9:
        # thrust axis along the heading: build the frame from the lateral axis
        b1 = np.cross(np.array([-math.sin(yaw), math.cos(yaw), 0.0]), b3)
        b1 = b1 / np.linalg.norm(b1)
        b2 = np.cross(b3, b1)
    else:
        b2 = b2 / nb2
        b1 = np.cross(b2, b3)
    R_des = np.column_stack((b1, b2, b3))
    return R_des, mass * n, saturated


def downwash_mean(dp, w0, z_c, sigma0, k_spread, c_a, lambda_r):
    """Mean downwash acceleration at relative position ``dp`` (follower - leader)."""
    dz = dp[2]
    if dz <= 0.0:
        return np.zeros(3)
    r2 = dp[0] * dp[0] + dp[1] * dp[1]
    sigma = sigma0 + k_spread * dz
    w = w0 * z_c / (z_c + dz) * math.exp(-r2 / (2.0 * sigma * sigma))
    axial = c_a * w * w
    radial = lambda_r * axial / sigma
    return np.array([radial * dp[0], radial * dp[1], axial])


def pendulum_step(q, w, anchor_acc, d_p, damping, g, dt):
    """Damped spherical pendulum in the (accelerating) anchor frame.

    ``q`` is the anchor-to-bob vector and ``w`` its rate; returns both
    updated with the cable-length constraint re-imposed.
    """
    n = q / np.linalg.norm(q)
    a = g * _E3 - anchor_acc - damping * w
    a = a - np.dot(a, n) * n - (np.dot(w, w) / d_p) * n
    w_new = w + a * dt
    q_new = q + w_new * dt
    q_new = q_new * (d_p / np.linalg.norm(q_new))
    n_new = q_new / d_p
    w_new = w_new - np.dot(w_new, n_new) * n_new
    return q_new, w_new


def mlp_forward(h, W1, b1, W2, b2, W3, b3):
    """Single-sample forward pass of the two-hidden-layer tanh network."""
    z1 = np.tanh(W1 @ h + b1)
    z2 = np.tanh(W2 @ z1 + b2)
    return W3 @ z2 + b3
