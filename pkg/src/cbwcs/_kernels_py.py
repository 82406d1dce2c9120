"""Pure-Python/numpy reference for the sequential kernels.

Signatures mirror ``_kernels.pyx`` exactly. The reservoir matrix arrives in
CSR form (``indptr, indices, data``) and is densified here; for the reservoir
sizes used in this package a dense matvec beats scipy.sparse call overhead.
"""

import numpy as np


def _dense(n, indptr, indices, data):
    W = np.zeros((n, n))
    for row in range(n):
        lo, hi = indptr[row], indptr[row + 1]
        W[row, indices[lo:hi]] = data[lo:hi]
    return W


def esn_teacher_states(w_in, indptr, indices, data, w_fb, inputs, teachers, r0, theta0):
    """Teacher-forced run; row n of the result is r(n).

    ``r(n) = tanh(W_in u(n) + W r(n-1) + w_fb * teacher(n-1))`` with
    ``teacher(-1) = theta0``.
    """
    n_res = w_in.shape[0]
    W = _dense(n_res, indptr, indices, data)
    drive = inputs @ w_in.T
    states = np.empty((inputs.shape[0], n_res))
    r = np.array(r0, dtype=float)
    fb = float(theta0)
    for n in range(inputs.shape[0]):
        r = np.tanh(drive[n] + W @ r + w_fb * fb)
        states[n] = r
        fb = teachers[n]
    return states


def esn_predict(w_in, indptr, indices, data, w_fb, w_out, inputs, r0, theta0):
    """Free-running readout with output feedback. Returns ``(outputs, r_last)``."""
    n_res, k_in = w_in.shape
    W = _dense(n_res, indptr, indices, data)
    drive = inputs @ w_in.T
    w_r, w_u = w_out[:n_res], w_out[n_res:]
    direct = inputs @ w_u
    out = np.empty(inputs.shape[0])
    r = np.array(r0, dtype=float)
    fb = float(theta0)
    for n in range(inputs.shape[0]):
        r = np.tanh(drive[n] + W @ r + w_fb * fb)
        fb = float(w_r @ r) + direct[n]
        out[n] = fb
    return out, r


def feedback_decode(y_dec, past_coefs, history):
    """Decision-feedback detection against ``sum_k c[k-1] * s_hat[n-k]``.

    ``history`` holds the P symbols preceding ``y_dec[0]`` (oldest first).
    """
    P = past_coefs.shape[0]
    buf = np.concatenate([np.asarray(history, dtype=float), np.zeros(y_dec.shape[0])])
    for n in range(y_dec.shape[0]):
        theta = 0.0
        for k in range(1, P + 1):
            theta += past_coefs[k - 1] * buf[P + n - k]
        buf[P + n] = 1.0 if y_dec[n] >= theta else -1.0
    return buf[P:].copy()


def method1_decode(w_in, indptr, indices, data, w_fb, w_out, stream, ns, decision_index,
                   first, history, past_coefs, fut_coef, horizon):
    """Scalar-ESN future-bit prediction followed by decision feedback.

    ``stream`` is the concatenation of all symbol windows (``ns`` samples per
    symbol). The reservoir observes every real sample with teacher feedback
    (the previous step's target, which is the current sample). For each symbol ``n >= first``, after the last
    sample of window ``n`` it free-runs ``horizon - 1`` further steps from a
    copy of the state; the ``horizon``-th prediction is the decision sample of
    symbol ``n+1``, whose sign is the predicted future bit.

    Returns ``(decisions, predicted_bits)`` for symbols ``first..``.
    """
    n_res = w_in.shape[0]
    W = _dense(n_res, indptr, indices, data)
    w_in_v = w_in[:, 0]
    w_r, w_u = w_out[:n_res], float(w_out[n_res])
    n_sym = stream.shape[0] // ns
    P = past_coefs.shape[0]
    n_dec = n_sym - first
    buf = np.concatenate([np.asarray(history, dtype=float), np.zeros(n_dec)])
    fut = np.empty(n_dec)
    w_obs = w_in_v + w_fb
    r = np.zeros(n_res)
    for n in range(n_sym):
        base = n * ns
        for j in range(ns):
            # teacher feedback: the previous step's target is this sample
            r = np.tanh(w_obs * stream[base + j] + W @ r)
        if n < first:
            continue
        v = float(w_r @ r) + w_u * stream[base + ns - 1]
        rp = r
        for _ in range(horizon - 1):
            rp = np.tanh(w_in_v * v + W @ rp + w_fb * v)
            v = float(w_r @ rp) + w_u * v
        bit = 1.0 if v >= 0.0 else -1.0
        m = n - first
        theta = fut_coef * bit
        for k in range(1, P + 1):
            theta += past_coefs[k - 1] * buf[P + m - k]
        y = stream[base + decision_index - 1]
        buf[P + m] = 1.0 if y >= theta else -1.0
        fut[m] = bit
    return buf[P:].copy(), fut
