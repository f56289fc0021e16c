"""Compare the compiled and numpy deformable sampling kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 32,64,128]

Times the gather (forward) and scatter (backward) kernels on random
offsets at several feature-map sizes, plus one full deform_conv2d
forward/backward, and checks that both backends agree.
"""

import argparse
import time

import numpy as np

from deformseg import kernels, ops
from deformseg.deform import DeformableKernelField, deform_conv2d
from deformseg.kernels import _deform_py
from deformseg.tensor import Tensor, backward


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_case(size, channels, repeat, rng):
    x = rng.normal(size=(2, channels, size, size)).astype(np.float32)
    off = rng.normal(scale=1.5, size=(2, 18, size, size)).astype(np.float32)
    g = rng.normal(size=(channels, 9, 2, size, size)).astype(np.float32)
    rows = []
    backends = [("python", _deform_py)]
    if kernels.compiled_backend is not None:
        backends.append(("cython", kernels.compiled_backend))
    ref = None
    for name, mod in backends:
        gather = best_of(lambda: mod.deform_gather(x, off, 3, 1, 1), repeat)
        scatter = best_of(lambda: mod.deform_scatter(x, off, g, 3, 1, 1, True, True), repeat)
        val = mod.deform_gather(x, off, 3, 1, 1)
        if ref is None:
            ref = val
        else:
            np.testing.assert_allclose(val, ref, rtol=1e-4, atol=1e-5)
        rows.append((name, gather, scatter))
    return rows


def layer_case(size, channels, repeat, rng):
    x = rng.normal(size=(1, channels, size, size)).astype(np.float32)
    w = rng.normal(size=(channels, channels, 3, 3)).astype(np.float32)
    off = rng.normal(size=(1, 18, size, size)).astype(np.float32)

    def step():
        xt = Tensor(x, requires_grad=True)
        ot = Tensor(off, requires_grad=True)
        y = deform_conv2d(xt, Tensor(w, requires_grad=True), None, DeformableKernelField(ot), 1, 1)
        backward(ops.mean(y))

    out = []
    original = kernels.BACKEND
    for name in ("python", "cython"):
        if name == "cython" and kernels.compiled_backend is None:
            continue
        kernels.use_backend(name)
        out.append((name, best_of(step, repeat)))
    kernels.use_backend(original)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="32,64,128")
    ap.add_argument("--channels", type=int, default=8)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'size':>6} {'backend':>8} {'gather ms':>10} {'scatter ms':>11} {'speedup':>8}")
    for size in (int(s) for s in args.sizes.split(",")):
        rows = kernel_case(size, args.channels, args.repeat, rng)
        base = rows[0][1] + rows[0][2]
        for name, ga, sc in rows:
            print(f"{size:>6} {name:>8} {ga * 1e3:>10.2f} {sc * 1e3:>11.2f} {base / (ga + sc):>7.1f}x")
    print()
    print(f"deform_conv2d forward+backward, 1x{args.channels}x{{size}}^2, 3x3")
    for size in (int(s) for s in args.sizes.split(",")):
        for name, t in layer_case(size, args.channels, args.repeat, rng):
            print(f"{size:>6} {name:>8} {t * 1e3:>10.2f} ms")


if __name__ == "__main__":
    main()
