"""Time the compiled kernels against the numpy fallback on frame-sized inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from cbwcs import _kernels_py, esn

try:
    from cbwcs import _kernels as _compiled
except ImportError:
    _compiled = None


def workloads():
    rng = np.random.default_rng(0)
    w2 = esn.init_weights(esn.EsnConfig(seed=0))
    w2 = w2.with_readout(rng.standard_normal(128) * 0.05)
    inputs = rng.standard_normal((996, 16)) * 0.3
    teachers = rng.standard_normal(996) * 0.1

    w1 = esn.init_weights(esn.EsnConfig(N=80, K=1, seed=1))
    w1 = w1.with_readout(rng.standard_normal(81) * 0.05)
    stream = rng.standard_normal(2048 * 16) * 0.3
    coefs = np.array([-0.09, 0.02, -0.005, 0.001])
    hist = np.ones(4)
    y = rng.standard_normal(1052) * 0.3

    return {
        "esn_teacher_states (996 x N=112)": lambda k: k.esn_teacher_states(
            *w2.kernel_args(), inputs, teachers, np.zeros(112), 0.0),
        "esn_predict (996 x N=112)": lambda k: k.esn_predict(
            *w2.kernel_args(), w2.w_out, inputs, np.zeros(112), 0.0),
        "feedback_decode (1052 bits)": lambda k: k.feedback_decode(y, coefs, hist),
        "method1_decode (1052 bits, N=80)": lambda k: k.method1_decode(
            *w1.kernel_args(), w1.w_out, stream, 16, 8, 996, hist, coefs, -0.08, 8),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return
    print(f"{'kernel':36s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s}")
    for name, call in workloads().items():
        n = 1 if "method1" in name else 5
        py = min(timeit.repeat(lambda: call(_kernels_py), number=n, repeat=args.repeat)) / n
        cy = min(timeit.repeat(lambda: call(_compiled), number=n, repeat=args.repeat)) / n
        print(f"{name:36s} {py * 1e3:12.3f} {cy * 1e3:12.3f} {py / cy:8.1f}x")


if __name__ == "__main__":
    main()
