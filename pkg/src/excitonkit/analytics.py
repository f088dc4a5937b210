"""Multiparty analytics along trajectories.

For a nodal site i the monogamy score compares the site-vs-rest correlation
Q_{i:R} with the sum of pairwise correlations Q_{R_i} = sum_{j != i}
Q(rho_{j:i}), where the pair state lists j first (so discord measures j):

    delta Q_i = Q_{i:R} - Q_{R_i}.

For negativity squared both terms are squared before combining.  The sink is
traced out before every correlation evaluation; R always means the other
N - 1 sites.

The bipartition collection {Q_{i:R}} over all sites tracks which site holds
the largest share of correlation at each instant; detect_route segments its
argmax timeline into dominance intervals, and classify_sites groups sites by
correlation-sharing features accumulated over several runs.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from . import correlations
from .correlations import GRID_SHAPE, MEASURES
from .evolution import Trajectory
from .network import ConfigError
from .states import reduce_two_site, trace_out_sink


def site_vs_rest(rho_ns, site, measure, grid=GRID_SHAPE, refine=True):
    """Q_{i:R} on a sink-free compact state for one measure tag."""
    if measure == "negativity":
        return correlations.negativity_site_vs_rest(rho_ns, site)
    if measure == "negativity2":
        return correlations.negativity_site_vs_rest(rho_ns, site) ** 2
    if measure == "discord":
        return correlations.discord_site_vs_rest(rho_ns, site, grid=grid,
                                                 refine=refine)
    raise ValueError(f"unknown measure '{measure}' (known: {MEASURES})")


def pair_value(rho_ns, j, i, measure, grid=GRID_SHAPE, refine=True):
    """Q(rho_{j:i}) with site j as the first (measured) party."""
    sigma = reduce_two_site(rho_ns, j, i)
    if measure == "negativity":
        return correlations.negativity(sigma, (2, 2))
    if measure == "negativity2":
        return correlations.negativity(sigma, (2, 2)) ** 2
    if measure == "discord":
        return correlations.discord(sigma, (2, 2), grid=grid, refine=refine)
    raise ValueError(f"unknown measure '{measure}' (known: {MEASURES})")


def monogamy_score(rho_ns, site, measure, grid=GRID_SHAPE, refine=True):
    """Return (Q_{i:R}, Q_{R_i}, delta Q_i) for nodal site i.

    rho_ns must be the compact sink-free state (dimension N + 1); use
    trace_out_sink on trajectory samples first.
    """
    n = rho_ns.shape[0] - 1
    total = site_vs_rest(rho_ns, site, measure, grid=grid, refine=refine)
    bipartite = 0.0
    for j in range(1, n + 1):
        if j != site:
            bipartite += pair_value(rho_ns, j, site, measure, grid=grid,
                                    refine=refine)
    return total, bipartite, total - bipartite


def collection(rho_ns, measure, grid=GRID_SHAPE, refine=True):
    """The bipartition collection: Q_{i:R} for every site i, shape (N,)."""
    n = rho_ns.shape[0] - 1
    return np.array([site_vs_rest(rho_ns, i, measure, grid=grid, refine=refine)
                     for i in range(1, n + 1)])


@dataclass(frozen=True)
class CorrelationSeries:
    """Per-site monogamy components over a trajectory's time grid.

    Arrays have shape (len(t), len(sites)); delta = total - bipartite holds
    exactly by construction.
    """

    measure: str
    t: np.ndarray
    sites: tuple
    total: np.ndarray
    bipartite: np.ndarray
    delta: np.ndarray


def _resolve_threads(threads):
    if threads is None:
        raw = os.environ.get("EXCITONKIT_THREADS", "")
        try:
            threads = int(raw) if raw else 1
        except ValueError:
            raise ConfigError(f"EXCITONKIT_THREADS={raw!r} is not an integer")
    if threads < 1:
        raise ConfigError("thread count must be >= 1")
    return threads


def _map_state_chunks(worker, states_ns, threads):
    """Apply worker to chunks of the state stack, preserving sample order."""
    if threads == 1 or len(states_ns) < 2 * threads:
        return [worker(states_ns)]
    chunks = np.array_split(states_ns, min(4 * threads, len(states_ns)))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, chunks))


def _monogamy_chunk(states_ns, sites, measure, grid, refine):
    out = np.empty((len(states_ns), len(sites), 2))
    for a, rho in enumerate(states_ns):
        for b, i in enumerate(sites):
            tot, bip, _ = monogamy_score(rho, i, measure, grid=grid,
                                         refine=refine)
            out[a, b, 0] = tot
            out[a, b, 1] = bip
    return out


def _collection_chunk(states_ns, measure, grid, refine):
    return np.array([collection(rho, measure, grid=grid, refine=refine)
                     for rho in states_ns])


def series(traj: Trajectory, measure: str, sites=None, grid=GRID_SHAPE,
           refine=True, threads=None) -> CorrelationSeries:
    """Evaluate monogamy components at every trajectory sample.

    sites defaults to all of 1..N.  threads > 1 fans the evaluation out
    across worker processes (samples are independent); the default comes
    from EXCITONKIT_THREADS, else 1.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure '{measure}' (known: {MEASURES})")
    n = traj.spec.n_sites
    sites = tuple(range(1, n + 1)) if sites is None else tuple(int(s) for s in sites)
    for s in sites:
        if not 1 <= s <= n:
            raise ValueError(f"nodal site {s} out of range 1..{n}")
    threads = _resolve_threads(threads)
    states_ns = np.array([trace_out_sink(rho) for rho in traj.states])
    worker = partial(_monogamy_chunk, sites=sites, measure=measure, grid=grid,
                     refine=refine)
    rows = np.concatenate(_map_state_chunks(worker, states_ns, threads))
    total = rows[:, :, 0]
    bipartite = rows[:, :, 1]
    return CorrelationSeries(measure=measure, t=traj.t.copy(), sites=sites,
                             total=total, bipartite=bipartite,
                             delta=total - bipartite)


def collection_series(traj: Trajectory, measure: str, grid=GRID_SHAPE,
                      refine=True, threads=None):
    """Q_{i:R}(t) for all sites, shape (len(t), N); skips the pair terms."""
    if measure not in MEASURES:
        raise ValueError(f"unknown measure '{measure}' (known: {MEASURES})")
    threads = _resolve_threads(threads)
    states_ns = np.array([trace_out_sink(rho) for rho in traj.states])
    worker = partial(_collection_chunk, measure=measure, grid=grid,
                     refine=refine)
    values = np.concatenate(_map_state_chunks(worker, states_ns, threads))
    return traj.t.copy(), values


# ---------------------------------------------------------------------------
# Route detection
# ---------------------------------------------------------------------------

DWELL_DEFAULT = 0.05
FLOOR_DEFAULT = 1e-4
TIE_TOL_DEFAULT = 1e-9


@dataclass(frozen=True)
class RouteReport:
    """Dominance segmentation of a bipartition-collection timeline.

    intervals are (site, t_start, t_end) in ps, time-ordered and
    non-overlapping, each spanning at least the dwell threshold; route is
    the interval site sequence (consecutive repeats removed by
    construction).  ties lists the distinct site groups that were ever
    degenerate at the top of the collection, a symmetry diagnostic.
    """

    measure: str
    dwell: float
    floor: float
    intervals: tuple
    route: tuple
    ties: tuple

    def to_json(self) -> str:
        doc = {
            "measure": self.measure,
            "dwell_ps": _round12(self.dwell),
            "floor": _round12(self.floor),
            "route": list(self.route),
            "intervals": [
                {"site": s, "t_start_ps": _round12(a), "t_end_ps": _round12(b)}
                for s, a, b in self.intervals
            ],
            "ties": [list(group) for group in self.ties],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _round12(x):
    return float(f"{float(x):.12g}")


def _label_runs(labels):
    runs = []
    for lab in labels:
        if runs and runs[-1][0] == lab:
            runs[-1][1] += 1
        else:
            runs.append([lab, 1])
    return runs


def _merge_short_runs(runs, min_count):
    """Absorb runs shorter than min_count samples into their neighbors.

    The shortest offender is relabeled after its longer neighbor (previous
    wins ties), adjacent equal labels are fused, and the scan repeats until
    every surviving run meets the threshold.
    """
    runs = [list(r) for r in runs]
    while len(runs) > 1:
        idx = None
        for i, (_, cnt) in enumerate(runs):
            if cnt < min_count and (idx is None or cnt < runs[idx][1]):
                idx = i
        if idx is None:
            break
        prev_cnt = runs[idx - 1][1] if idx > 0 else -1
        next_cnt = runs[idx + 1][1] if idx < len(runs) - 1 else -1
        target = idx - 1 if prev_cnt >= next_cnt else idx + 1
        runs[idx][0] = runs[target][0]
        fused = []
        for lab, cnt in runs:
            if fused and fused[-1][0] == lab:
                fused[-1][1] += cnt
            else:
                fused.append([lab, cnt])
        runs = fused
    if len(runs) == 1 and runs[0][1] < min_count:
        return []
    return runs


def detect_route(t, values, measure="", dwell=DWELL_DEFAULT,
                 floor=FLOOR_DEFAULT, tie_tol=TIE_TOL_DEFAULT) -> RouteReport:
    """Segment a collection timeline into dominance intervals.

    t is a uniform sample grid (ps); values has shape (len(t), N) holding
    Q_{i:R} per site.  Samples whose maximum is below floor are labeled
    undefined and can only pad or separate intervals.  Runs shorter than
    dwell (in ps) are merged into their neighbors.  Sites whose values sit
    within tie_tol of the sample maximum are recorded as tie groups.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.ndim != 1 or len(t) == 0 or values.shape[0] != len(t):
        raise ValueError("empty or mismatched collection series")
    if len(t) < 2:
        raise ValueError("need at least two samples to segment")
    steps = np.diff(t)
    dt_grid = float(steps[0])
    if dt_grid <= 0 or np.max(np.abs(steps - dt_grid)) > 1e-9:
        raise ValueError("collection series must be uniformly sampled")

    peak = np.max(values, axis=1)
    labels = np.where(peak >= floor, np.argmax(values, axis=1) + 1, 0)
    tie_groups = set()
    for s in range(len(t)):
        if peak[s] < floor:
            continue
        tied = np.nonzero(values[s] >= peak[s] - tie_tol)[0] + 1
        if len(tied) > 1:
            tie_groups.add(tuple(int(x) for x in tied))

    min_count = max(1, int(np.ceil(dwell / dt_grid - 1e-9)))
    runs = _merge_short_runs(_label_runs(labels), min_count)

    intervals = []
    pos = 0
    for lab, cnt in runs:
        if lab != 0:
            intervals.append((int(lab), float(t[pos]), float(t[pos + cnt - 1])))
        pos += cnt
    route = tuple(s for s, _, _ in intervals)
    return RouteReport(measure=measure, dwell=float(dwell), floor=float(floor),
                       intervals=tuple(intervals), route=route,
                       ties=tuple(sorted(tie_groups)))


# ---------------------------------------------------------------------------
# Site grouping
# ---------------------------------------------------------------------------

FEATURE_WINDOW = (0.0, 2.0)
PEAK_CAP = 0.5


class DegenerateGroupingError(ValueError):
    """Raised when the per-site features cannot distinguish any sites."""


@dataclass(frozen=True)
class RunBundle:
    """One run's inputs to classify_sites.

    populations has shape (len(t), N); negativity and discord are
    CorrelationSeries over all N sites on the same time grid.
    """

    t: np.ndarray
    populations: np.ndarray
    negativity: CorrelationSeries
    discord: CorrelationSeries


@dataclass(frozen=True)
class GroupReport:
    """Partition of the sites with the feature matrix that produced it.

    Feature columns: pooled f1, pooled f2, then one capped-peak-population
    column per run (see site_features and classify_sites).
    """

    groups: tuple
    sites: tuple
    features: np.ndarray

    def to_json(self) -> str:
        doc = {
            "groups": [list(g) for g in self.groups],
            "sites": list(self.sites),
            "features": {
                str(site): [_round12(v) for v in row]
                for site, row in zip(self.sites, self.features)
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def site_features(bundle: RunBundle, window=FEATURE_WINDOW) -> np.ndarray:
    """Per-site feature triple of one run over the (t_lo, t_hi] window.

    f1: fraction of samples with delta N_i above the pairwise sum N_{R_i}
        (strongly non-monogamous sharing of entanglement).
    f2: fraction of samples with the pairwise discord sum D_{R_i} above the
        total D_{i:R} (discord spread among pairs).
    f3: peak site population, saturated at PEAK_CAP.  A site holding half
        the excitation is already the dominant host; without the cap the
        seeded site's t -> 0 transient peak depends on how close to zero
        the first sample lands, which is a sampling artifact.
    """
    t = np.asarray(bundle.t, dtype=float)
    mask = (t > window[0]) & (t <= window[1] + 1e-12)
    if not np.any(mask):
        raise ValueError("feature window contains no samples")
    neg = bundle.negativity
    dis = bundle.discord
    f1 = np.mean(neg.delta[mask] > neg.bipartite[mask], axis=0)
    f2 = np.mean(dis.bipartite[mask] > dis.total[mask], axis=0)
    f3 = np.minimum(np.max(bundle.populations[mask], axis=0), PEAK_CAP)
    return np.column_stack([f1, f2, f3])


def classify_sites(bundles, n_groups=3, window=FEATURE_WINDOW) -> GroupReport:
    """Group sites by their correlation-sharing features across runs.

    The time-fraction features f1 and f2 are pooled over the samples of
    every run (a fraction of all observed time), while the capped peak
    population contributes one column per run: which initial state manages
    to populate a site is exactly what separates the early-transfer hosts
    from the bridge sites, so the peaks must not be collapsed across runs.
    Sites are then merged by nearest-neighbor (single-linkage)
    agglomeration into exactly n_groups clusters.
    """
    bundles = list(bundles)
    if not bundles:
        raise ValueError("classify_sites needs at least one run bundle")
    hits1 = hits2 = total = 0
    peaks = []
    for b in bundles:
        t = np.asarray(b.t, dtype=float)
        mask = (t > window[0]) & (t <= window[1] + 1e-12)
        if not np.any(mask):
            raise ValueError("feature window contains no samples")
        hits1 = hits1 + np.sum(b.negativity.delta[mask]
                               > b.negativity.bipartite[mask], axis=0)
        hits2 = hits2 + np.sum(b.discord.bipartite[mask]
                               > b.discord.total[mask], axis=0)
        total += int(np.sum(mask))
        peaks.append(np.minimum(np.max(b.populations[mask], axis=0), PEAK_CAP))
    feats = np.column_stack([hits1 / total, hits2 / total] + peaks)
    n = feats.shape[0]
    if n_groups > n:
        raise ValueError("more groups than sites")
    spread = np.max(np.abs(feats - feats[0]))
    if spread <= 1e-9:
        raise DegenerateGroupingError(
            "all per-site feature vectors coincide; grouping is arbitrary")
    z = linkage(feats, method="single")
    labels = fcluster(z, t=n_groups, criterion="maxclust")
    if len(set(labels)) != n_groups:
        raise DegenerateGroupingError(
            f"agglomeration produced {len(set(labels))} groups, not {n_groups}")
    order = {}
    for site, lab in zip(range(1, n + 1), labels):
        order.setdefault(lab, []).append(site)
    groups = tuple(sorted((tuple(g) for g in order.values()), key=lambda g: g[0]))
    return GroupReport(groups=groups, sites=tuple(range(1, n + 1)),
                       features=feats)


# ---------------------------------------------------------------------------
# File emission
# ---------------------------------------------------------------------------


def write_series_csv(cs: CorrelationSeries, site, path) -> None:
    """One site's monogamy components: t_ps, Q_total, Q_bipartite, Q_delta."""
    if site not in cs.sites:
        raise ValueError(f"site {site} not in series (sites: {cs.sites})")
    b = cs.sites.index(site)
    with open(path, "w") as fh:
        fh.write("t_ps,Q_total,Q_bipartite,Q_delta\n")
        for k in range(len(cs.t)):
            fh.write(f"{cs.t[k]:.12g},{cs.total[k, b]:.12g},"
                     f"{cs.bipartite[k, b]:.12g},{cs.delta[k, b]:.12g}\n")


def write_dominance_csv(t, values, report: RouteReport, path) -> None:
    """Collection values plus the dominant site per sample (0 = below floor)."""
    values = np.asarray(values)
    n = values.shape[1]
    peak = np.max(values, axis=1)
    dominant = np.where(peak >= report.floor, np.argmax(values, axis=1) + 1, 0)
    header = ["t_ps"] + [f"Q_{i}" for i in range(1, n + 1)] + ["dominant"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(len(t)):
            cells = [f"{t[k]:.12g}"] + [f"{v:.12g}" for v in values[k]]
            cells.append(str(int(dominant[k])))
            fh.write(",".join(cells) + "\n")
