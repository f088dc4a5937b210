"""Compare the compiled kernels against the numpy fallback.

Runs each hot kernel on a representative workload in both backends and
prints wall time plus speedup.  The two implementations are imported
directly, so the EXCITONKIT_PURE_PYTHON switch is not needed here.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import sys
import time

import numpy as np

from excitonkit import _purepy
from excitonkit.correlations import GRID_SHAPE
from excitonkit.evolution import build_liouvillian, propagate
from excitonkit.network import PRESETS
from excitonkit.states import reduce_two_site, trace_out_sink

try:
    from excitonkit import _kernels
except ImportError:
    _kernels = None


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads():
    spec = PRESETS["fmo"]()
    gen = build_liouvillian(spec)
    rho0 = np.zeros((spec.dim, spec.dim), dtype=complex)
    rho0[1, 1] = 1.0
    rk4_args = (gen.h_rad, gen.diss_rad, gen.deph_rad, gen.sink_rad,
                gen.k_index, rho0, 0.001, 2000, 10)

    # a mid-trajectory state with spread coherences for the entropy kernels
    traj = propagate(spec, t_end=0.5, dt=0.001, sample_every=0.5)
    rho_ns = trace_out_sink(traj.states[-1])
    sigma = reduce_two_site(rho_ns, 1, 2)
    thetas = np.linspace(0.0, np.pi, GRID_SHAPE[0])
    phis = np.arange(GRID_SHAPE[1]) * (2.0 * np.pi / GRID_SHAPE[1])
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    tt, pp = tt.ravel(), pp.ravel()

    return [
        ("rk4_evolve (fmo, 2 ps at 1 fs)", "rk4_evolve", rk4_args),
        ("site_conditional_entropies (7 sites, 2048 bases)",
         "site_conditional_entropies", (rho_ns, 3, tt, pp)),
        ("pair_conditional_entropies (2048 bases)",
         "pair_conditional_entropies", (sigma, tt, pp)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats per kernel, best is reported")
    args = parser.parse_args(argv)

    if _kernels is None:
        print("compiled extension not built; nothing to compare against",
              file=sys.stderr)
        return 1

    print(f"{'kernel':<52} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for label, name, call_args in _workloads():
        ref = getattr(_purepy, name)(*call_args)
        got = getattr(_kernels, name)(*call_args)
        err = np.max(np.abs(np.asarray(ref) - np.asarray(got)))
        if err > 1e-10:
            print(f"backend mismatch on {name}: {err:.2e}", file=sys.stderr)
            return 1
        t_py = _best_of(lambda: getattr(_purepy, name)(*call_args),
                        args.repeats)
        t_c = _best_of(lambda: getattr(_kernels, name)(*call_args),
                       args.repeats)
        print(f"{label:<52} {t_py * 1e3:>8.1f}ms {t_c * 1e3:>8.1f}ms "
              f"{t_py / t_c:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
