"""Root location for the determinant functions.

Real roots are found by grid scan plus bracketed bisection-then-secant;
complex roots by Muller iteration (three-point quadratic interpolation,
derivative-free: the determinant is a black box and numerical derivatives
are noisy near coalescence).  Parameter continuation reuses each branch's
previous root as the next seed, halves the parameter step when a seed
fails, and converts a simultaneous failure of two nearby real branches
into a coalescence event seeding a complex-conjugate pair.

A root's residual is the normalized determinant magnitude at the root
scaled by its magnitude at the nearest probe points, so a well-converged
simple root has residual of order tol regardless of the determinant's
overall size.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (GridTooCoarseWarning, NoConvergenceError, Root,
                   SeedRejectedError, SpectralPoint, canonicalize_s)


@dataclass(frozen=True)
class ScanConfig:
    """Scan interval on the canonical half-plane plus refinement knobs."""

    s_min: float = 0.0
    s_max: float = 8.0
    step: float = 0.05
    tol: float = 1e-10
    max_iter: int = 80

    def __post_init__(self):
        if self.s_min < -0.5:
            raise ValueError("s_min must be >= -0.5 (canonical half-plane)")
        if self.step <= 0 or self.tol <= 0:
            raise ValueError("step and tol must be positive")


@dataclass
class CoalescenceEvent:
    """Two real branches merged at param and continued as a complex pair."""

    param: float
    s_merged: float
    branch_ids: tuple
    seed: complex


@dataclass
class Branch:
    """A root traced along a parameter sweep."""

    parameter: str
    index: int
    samples: list = field(default_factory=list)   # (param value, Root)
    events: list = field(default_factory=list)
    note: str = ""

    @property
    def last_root(self) -> Root:
        return self.samples[-1][1]


def _as_batch(F):
    def call(s):
        return np.asarray(F(np.atleast_1d(np.asarray(s, dtype=complex))))
    return call


def _refine_brackets(F, lo, hi, flo, tol, max_iter):
    """Batched bisection-then-secant on sign-change brackets.

    lo/hi/flo are 1D arrays; returns refined root positions.  Bisection
    narrows each bracket to ~1e-6, then secant polishes to tol with a
    midpoint fallback whenever it steps outside its bracket.
    """
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    flo = flo.astype(float).copy()
    coarse = max(tol, 1e-6)
    it = 0
    while np.any(hi - lo > coarse) and it < max_iter:
        mid = 0.5 * (lo + hi)
        fm = np.real(F(mid))
        left = flo * fm <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
        it += 1
    x0, x1 = lo.copy(), hi.copy()
    f0 = flo
    f1 = np.real(F(x1))
    for _ in range(max_iter):
        if np.all(np.abs(x1 - x0) < tol):
            break
        den = f1 - f0
        safe = np.abs(den) > 0
        x2 = np.where(safe, x1 - f1 * (x1 - x0) / np.where(safe, den, 1.0),
                      0.5 * (lo + hi))
        x2 = np.where((x2 < lo) | (x2 > hi), 0.5 * (lo + hi), x2)
        f2 = np.real(F(x2))
        left = flo * f2 <= 0
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x2)
        flo = np.where(left, flo, f2)
        x0, f0, x1, f1 = x1, f1, x2, f2
    return x1


def _dedupe(roots, spacing):
    """Collapse clusters closer than spacing, keeping the smallest residual."""
    if not roots:
        return roots
    roots = sorted(roots, key=lambda r: (r.s.real, r.s.imag))
    out = [roots[0]]
    for r in roots[1:]:
        if abs(r.s - out[-1].s) < spacing:
            if r.residual < out[-1].residual:
                out[-1] = r
        else:
            out.append(r)
    return out


def scan_real_roots(F, cfg: ScanConfig, source: str = "series") -> list:
    """Real roots of F on [s_min, s_max].

    F must be real-valued on the real axis (true for the determinant
    functions: all recurrence inputs are real for real s).  Sign changes
    on the grid are bracketed and refined; results are canonicalized,
    deduplicated, and carry a scaled residual.
    """
    F = _as_batch(F)
    grid = np.arange(cfg.s_min, cfg.s_max + 0.5 * cfg.step, cfg.step)
    vals = np.real(F(grid))
    roots = []
    on_grid = np.nonzero(vals == 0)[0]
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if idx.size:
        refined = _refine_brackets(F, grid[idx], grid[idx + 1], vals[idx],
                                   cfg.tol, cfg.max_iter)
        fvals = np.abs(F(refined))
        ref = np.maximum(np.abs(vals[idx]), np.abs(vals[idx + 1]))
        ref = np.where(ref == 0, 1.0, ref)
        for r, fv, rf in zip(refined, fvals, ref):
            roots.append(Root(SpectralPoint(canonicalize_s(r)),
                              float(fv / rf), "real", source))
    for i in on_grid:
        roots.append(Root(SpectralPoint(canonicalize_s(grid[i])),
                          0.0, "real", source))
    roots = _dedupe(roots, 10 * cfg.tol)
    positions = sorted(r.s.real for r in roots)
    if any(b - a < cfg.step for a, b in zip(positions, positions[1:])):
        warnings.warn("two roots closer than one scan step; decrease step",
                      GridTooCoarseWarning)
    return roots


def refine_complex(F, seed: complex, tol: float = 1e-10, max_iter: int = 60,
                   source: str = "series", probe: float = 0.05) -> Root:
    """Muller iteration from a complex seed until the update is below tol.

    The residual is |F| at the root scaled by its magnitude one probe
    distance away (matching the grid-neighbor scaling of the real scan).
    """
    F = _as_batch(F)
    h = max(1e-3, 10 * tol)
    xs = [seed - h, seed + h, complex(seed)]
    fs = [complex(F(x)[0]) for x in xs]
    best = min(zip(xs, fs), key=lambda t: abs(t[1]))
    converged = False
    extra = 0
    for _ in range(max_iter):
        x2, x1, x0 = xs
        f2, f1, f0 = fs
        if x1 == x2 or x0 == x1:
            break
        q = (x0 - x1) / (x1 - x2)
        a = q * f0 - q * (1 + q) * f1 + q * q * f2
        b = (2 * q + 1) * f0 - (1 + q) ** 2 * f1 + q * q * f2
        c = (1 + q) * f0
        disc = np.sqrt(complex(b * b - 4 * a * c))
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            break
        dx = -(x0 - x1) * 2 * c / den
        xn = x0 + dx
        fn = complex(F(xn)[0])
        xs = [x1, x0, xn]
        fs = [f1, f0, fn]
        if abs(fn) <= abs(best[1]):
            best = (xn, fn)
        if abs(dx) < tol:
            converged = True
        if converged:
            # polish: the step can drop below tol a little before |F|
            # bottoms out near an almost-degenerate pair
            extra += 1
            if extra > 2 or fn == 0:
                break
    if not converged:
        raise NoConvergenceError(
            f"Muller iteration did not converge from seed {seed}")
    xn, fn = best
    s = canonicalize_s(xn)
    kind = "complex-pair" if abs(s.imag) > max(100 * tol, 1e-9) else "real"
    ref = np.abs(F(np.array([xn + probe, xn - probe,
                             xn + 1j * probe]))).max() or 1.0
    return Root(SpectralPoint(s), abs(fn) / ref, kind, source)


def detect_coalescence(branch_a: Branch, branch_b: Branch, F, param: float,
                       step: float, tol: float = 1e-10, max_iter: int = 60,
                       source: str = "series") -> complex:
    """Seed and start the complex continuation of a merged real pair.

    branch_a and branch_b must hold their last real samples at the merge;
    the seed is the pair midpoint displaced by one grid step into the upper
    half-plane.  The refined complex-pair root at param is appended to both
    branches; the seed is returned.  SeedRejectedError is raised when the
    refinement falls back onto the real axis.
    """
    sa = branch_a.last_root.s.real
    sb = branch_b.last_root.s.real
    s_star = 0.5 * (sa + sb)
    seed = s_star + 1j * step
    root = refine_complex(F, seed, tol, max_iter, source=source, probe=step)
    if root.kind != "complex-pair":
        raise SeedRejectedError(
            f"complex seed {seed} refined back to the real axis at {root.s}")
    event = CoalescenceEvent(param, s_star, (branch_a.index, branch_b.index),
                             seed)
    for br in (branch_a, branch_b):
        br.events.append(event)
        br.samples.append((param, root))
    return seed


class _LiveBranch:
    __slots__ = ("branch", "status", "s", "ds", "dp", "partner", "retries")

    def __init__(self, branch, s):
        self.branch = branch
        self.status = "real"          # real | pending-merge | complex | dead
        self.s = s
        self.ds = 0.0                 # movement of the last committed step
        self.dp = 0.0                 # parameter delta of that step
        self.partner = None           # _LiveBranch sharing the merge/pair
        self.retries = 0              # pending-merge attempts left


def _advance_real(F, p, dp, members, cfg, source, neighbor_caps,
                  other_positions):
    """One continuation attempt for real branches; returns the failures.

    Each member gets a bracket around its predicted position (previous
    position plus its last movement scaled to the current parameter step).
    Half-widths cover four predicted movements but at least half a scan
    step, capped below half the gap to the nearest other live real branch
    so a fast branch cannot swallow its neighbor's root; a failed bracket
    is retried once at double width.  Two members refining onto the same
    root, or onto a root already held by another branch, are demoted to
    failures: that situation is the signature of an imminent coalescence
    and is resolved by the caller.
    """
    dup_tol = 100 * cfg.tol

    def predict(lb):
        if lb.dp == 0.0 or dp == 0.0:
            return 0.0
        return lb.ds * (dp / lb.dp)

    proposals = {}
    failed = list(members)
    for attempt in range(2):
        if not failed:
            break
        steps = np.array([predict(lb) for lb in failed])
        s_pred = np.array([lb.s for lb in failed]) + steps
        w = np.maximum(np.abs(steps) * 4, cfg.step / 2) * (2 ** attempt)
        caps = np.array([neighbor_caps.get(id(lb), np.inf) for lb in failed])
        w = np.maximum(np.minimum(w, caps), 10 * cfg.tol)
        lo = np.maximum(s_pred - w, -0.5)
        hi = s_pred + w
        flo = np.real(F(lo))
        fhi = np.real(F(hi))
        ok = flo * fhi < 0
        if np.any(ok):
            roots = _refine_brackets(F, lo[ok], hi[ok], flo[ok],
                                     cfg.tol, cfg.max_iter)
            fvals = np.abs(F(roots))
            ref = np.maximum(np.abs(flo[ok]), np.abs(fhi[ok]))
            ref = np.where(ref == 0, 1.0, ref)
            winners = [m for m, o in zip(failed, ok) if o]
            for lb, r, fv, rf in zip(winners, roots, fvals, ref):
                proposals[id(lb)] = (lb, float(r), float(fv / rf))
        failed = [m for m, o in zip(failed, ok) if not o]
    # demote duplicate captures
    taken = sorted(proposals.values(), key=lambda t: t[1])
    collided = set()
    for (la, ra, _), (lc, rc, _) in zip(taken, taken[1:]):
        if rc - ra < dup_tol:
            collided.update((id(la), id(lc)))
    for lb, r, _ in taken:
        if any(abs(r - o) < dup_tol for o in other_positions):
            collided.add(id(lb))
    for lb, r, resid in taken:
        if id(lb) in collided:
            failed.append(lb)
            continue
        lb.ds = r - lb.s
        lb.dp = dp
        lb.s = r
        lb.branch.samples.append(
            (p, Root(SpectralPoint(canonicalize_s(r)),
                     resid, "real", source)))
    return failed


def _neighbor_caps(live, cfg):
    """Bracket half-width cap per live real branch: 0.45 of the gap to the
    nearest other live real branch."""
    reals = sorted((lb for lb in live if lb.status == "real"),
                   key=lambda lb: lb.s)
    caps = {}
    for i, lb in enumerate(reals):
        gap = np.inf
        if i > 0:
            gap = min(gap, lb.s - reals[i - 1].s)
        if i + 1 < len(reals):
            gap = min(gap, reals[i + 1].s - lb.s)
        caps[id(lb)] = 0.45 * gap
    return caps


def _failure_clusters(failed, cfg):
    """Group failing branches into clusters of mutually approachable
    members; adjacent members belong together when their gap is under two
    scan steps plus a slope allowance of four recent movements each."""
    members = sorted(failed, key=lambda lb: lb.s)
    clusters = []
    for lb in members:
        radius = cfg.step + 4 * abs(lb.ds)
        if clusters:
            prev = clusters[-1][-1]
            if lb.s - prev.s < radius + cfg.step + 4 * abs(prev.ds):
                clusters[-1].append(lb)
                continue
        clusters.append([lb])
    return clusters


def trace_parameter(family, parameter: str, values, cfg: ScanConfig,
                    source: str = "series", initial_roots=None,
                    follow_complex: bool = True, rescan_every: int = 1,
                    max_halvings: int = 6) -> list:
    """Trace determinant roots along a parameter sweep.

    family(p) must return the vectorized determinant functional at
    parameter value p; values is the monotone sample sequence.  Real
    branches advance by local re-bracketing around their predicted
    position, with parameter step halving restricted to the members whose
    bracket failed.  When two nearby real branches fail together, the pair
    is recorded as a coalescence event and continued as a single complex
    pair, appended to both branches.  A full rescan every rescan_every
    steps (0 disables) picks up roots entering the scan window; branches
    that fail alone are terminated with a note and the sweep continues.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("parameter sweep needs at least two values")
    F0 = family(values[0])
    if initial_roots is None:
        initial_roots = scan_real_roots(F0, cfg, source=source)
    branches, live = [], []
    for r in initial_roots:
        br = Branch(parameter, len(branches), [(float(values[0]), r)])
        branches.append(br)
        lb = _LiveBranch(br, r.s.real if r.kind == "real" else r.s)
        if r.kind != "real":
            lb.status = "complex"
        live.append(lb)

    def merge_pair(la, lc, F, p):
        """Convert a merged real pair into a complex pair, or park it as
        pending when the conversion is premature (the seed refines back to
        the real axis just before the true merge parameter)."""
        if not follow_complex:
            la.status = lc.status = "dead"
            ev = CoalescenceEvent(p, 0.5 * (la.s + lc.s),
                                  (la.branch.index, lc.branch.index),
                                  complex(0))
            la.branch.events.append(ev)
            lc.branch.events.append(ev)
            return
        try:
            detect_coalescence(la.branch, lc.branch, F, p, cfg.step,
                               cfg.tol, cfg.max_iter, source=source)
        except (SeedRejectedError, NoConvergenceError):
            la.status = lc.status = "pending-merge"
            la.partner, lc.partner = lc, la
            la.retries = lc.retries = 3
            return
        la.status = lc.status = "complex"
        la.s = lc.s = la.branch.last_root.s
        la.partner, lc.partner = lc, la

    def handle_failures(failed, F, p):
        """Resolve branches whose local bracket kept failing at the finest
        parameter substep: re-scan their neighborhood at a tenth of the
        grid step, hand surviving real roots back to the nearest branches,
        and declare the leftover adjacent pairs coalesced.  A leftover
        without a partner ends its branch."""
        occupied = [lb.s for lb in live
                    if lb.status == "real" and lb not in failed]
        for cluster in _failure_clusters(failed, cfg):
            lo = min(lb.s for lb in cluster) - 2 * cfg.step
            hi = max(lb.s for lb in cluster) + 2 * cfg.step
            fine = ScanConfig(max(-0.5, lo), hi, cfg.step / 10,
                              cfg.tol, cfg.max_iter)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", GridTooCoarseWarning)
                found = scan_real_roots(F, fine, source=source)
            avail = [r for r in found
                     if all(abs(r.s.real - c) > cfg.step / 4
                            for c in occupied)]
            # nearest-first matching of surviving roots to branches
            lbs = list(cluster)
            cand = sorted(((abs(r.s.real - lb.s), lb, r)
                           for lb in lbs for r in avail),
                          key=lambda t: t[0])
            taken = set()
            for dist, lb, r in cand:
                if lb not in lbs or id(r) in taken:
                    continue
                if dist > 2 * cfg.step + 4 * abs(lb.ds):
                    continue
                lbs.remove(lb)
                taken.add(id(r))
                lb.ds = r.s.real - lb.s
                lb.s = r.s.real
                lb.branch.samples.append((p, r))
            lbs.sort(key=lambda lb: lb.s)
            while len(lbs) >= 2:
                la, lc = lbs.pop(0), lbs.pop(0)
                merge_pair(la, lc, F, p)
            for lb in lbs:
                lb.status = "dead"
                lb.branch.note = "no convergence"

    def retry_pending(F, p):
        """Re-attempt the complex continuation of parked merge pairs."""
        for lb in live:
            if lb.status != "pending-merge" or lb.partner is None:
                continue
            lc = lb.partner
            if lc.status != "pending-merge":
                continue
            try:
                detect_coalescence(lb.branch, lc.branch, F, p, cfg.step,
                                   cfg.tol, cfg.max_iter, source=source)
            except (SeedRejectedError, NoConvergenceError):
                lb.retries -= 1
                lc.retries -= 1
                if lb.retries <= 0:
                    lb.status = lc.status = "dead"
                    lb.branch.note = lc.branch.note = \
                        "coalescence seed rejected"
                continue
            lb.status = lc.status = "complex"
            lb.s = lc.s = lb.branch.last_root.s

    def advance_complex(F, p):
        done = set()
        for lb in live:
            if lb.status != "complex" or id(lb) in done:
                continue
            done.add(id(lb))
            if lb.partner is not None:
                done.add(id(lb.partner))
            try:
                root = refine_complex(F, lb.s, cfg.tol, cfg.max_iter,
                                      source=source, probe=cfg.step)
            except NoConvergenceError:
                lb.status = "dead"
                lb.branch.note = "complex continuation lost"
                continue
            if root.kind != "complex-pair":
                lb.status = "dead"
                lb.branch.note = "complex pair returned to real axis"
                continue
            lb.s = root.s
            lb.branch.samples.append((p, root))
            if lb.partner is not None and lb.partner.status == "complex":
                lb.partner.s = root.s
                lb.partner.branch.samples.append((p, root))

    match_dist = 2 * cfg.step
    p_prev = float(values[0])
    for step_count, p_target in enumerate(values[1:], start=1):
        p_target = float(p_target)
        # (p_from, p_to, depth, members): members None means all real ones
        queue = [(p_prev, p_target, 0, None)]
        while queue:
            p_from, p_to, depth, members = queue.pop(0)
            F = family(p_to)
            if members is None:
                members = [lb for lb in live if lb.status == "real"]
            else:
                members = [lb for lb in members if lb.status == "real"]
            caps = _neighbor_caps(live, cfg)
            others = [lb.s for lb in live
                      if lb.status == "real" and lb not in members]
            snapshot = {id(lb): (lb.s, lb.ds, lb.dp, len(lb.branch.samples))
                        for lb in members}
            failed = _advance_real(F, p_to, p_to - p_from, members, cfg,
                                   source, caps, others)
            if failed and depth < max_halvings and abs(p_to - p_from) > 1e-9:
                # retry the whole member set on finer substeps so that
                # co-approaching branches stay in the same resolution pass;
                # roll back the members that had already advanced
                for lb in members:
                    s, ds, dp, nsamp = snapshot[id(lb)]
                    lb.s, lb.ds, lb.dp = s, ds, dp
                    del lb.branch.samples[nsamp:]
                mid = 0.5 * (p_from + p_to)
                queue = [(p_from, mid, depth + 1, members),
                         (mid, p_to, depth + 1, members)] + queue
                continue
            if failed:
                handle_failures(failed, F, p_to)
        F_target = family(p_target)
        advance_complex(F_target, p_target)
        retry_pending(F_target, p_target)
        if rescan_every and step_count % rescan_every == 0:
            known = [lb.s for lb in live if lb.status == "real"]
            for r in scan_real_roots(F_target, cfg, source=source):
                if any(abs(r.s.real - s) < match_dist for s in known):
                    continue
                br = Branch(parameter, len(branches), [(p_target, r)])
                branches.append(br)
                live.append(_LiveBranch(br, r.s.real))
                known.append(r.s.real)
        p_prev = p_target
    return branches
