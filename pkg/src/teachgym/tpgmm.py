"""Task-parameterized Gaussian mixture learner.

Demonstrations are resampled to a common length with normalized time and
projected into each reference frame. A single EM fit shares priors and
responsibilities across frames (responsibilities use the product of the
per-frame likelihoods). For a new task instance, per-frame components are
mapped into the global frame and combined by a product of Gaussians, and
trajectories are generated by Gaussian mixture regression over time.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .tasks import Trajectory, gripper_marks

LOG_2PI = float(np.log(2.0 * np.pi))


class FitError(ValueError):
    """Raised when a model cannot be fit to the given demonstrations."""


class FuseError(RuntimeError):
    """Raised when a transformed component covariance cannot be inverted."""

    def __init__(self, message: str, component_index: int):
        super().__init__(message)
        self.component_index = component_index


@dataclass(frozen=True)
class Frame:
    """Affine task frame acting on the full state; time maps identically."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
            raise ValueError("frame needs square A and matching b")
        e0 = np.zeros(A.shape[0])
        e0[0] = 1.0
        if not (np.allclose(A[0], e0) and np.allclose(A[:, 0], e0) and b[0] == 0.0):
            raise ValueError("time row/column of a frame must be identity")
        if abs(np.linalg.det(A)) < 1e-12:
            raise ValueError("frame matrix must be invertible")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @staticmethod
    def translation(origin, state_dim: int) -> "Frame":
        """Pure translation frame whose spatial origin is `origin`."""
        origin = np.asarray(origin, dtype=float)
        b = np.zeros(state_dim)
        b[1:1 + len(origin)] = origin
        return Frame(np.eye(state_dim), b)


@dataclass(frozen=True)
class FrameInstance:
    """Concrete frame values for one task condition."""

    frames: tuple

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise ValueError("a frame instance needs at least one frame")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class GaussianComponent:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if cov.shape != (len(mean), len(mean)):
            raise ValueError("covariance shape mismatch")
        if np.max(np.abs(cov - cov.T)) > 1e-10:
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


@dataclass(frozen=True)
class TpGmmModel:
    """Per-frame mixture components with shared priors."""

    priors: np.ndarray            # (K,)
    components: tuple             # K tuples of F GaussianComponent
    state_dim: int
    regularization: float
    seed: int
    time_range: tuple = (0.0, 1.0)
    gripper_dim: int | None = None
    loglik_path: tuple = ()

    def __post_init__(self):
        priors = np.array(self.priors, dtype=float)
        if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-9:
            raise ValueError("priors must be nonnegative and sum to 1")
        priors.setflags(write=False)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "components", tuple(tuple(row) for row in self.components))

    @property
    def K(self) -> int:
        return len(self.priors)

    @property
    def F(self) -> int:
        return len(self.components[0])


@dataclass(frozen=True)
class GlobalMixture:
    """Mixture in the global frame, as produced by fuse()."""

    priors: np.ndarray
    components: list
    time_range: tuple
    gripper_dim: int | None = None


def demo_state_matrix(demo: Trajectory, resample_len: int) -> np.ndarray:
    """(T, D) state rows (t, position..., gripper?) on a normalized time grid."""
    r = demo.resampled(resample_len)
    cols = [r.t[:, None], r.pos]
    if demo.gripper is not None:
        g = np.interp(r.t, (demo.t - demo.t[0]) / (demo.t[-1] - demo.t[0]),
                      demo.gripper.astype(float))
        cols.append(g[:, None])
    return np.hstack(cols)


def _log_gauss(Y: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Row-wise log N(y | mean, cov) via Cholesky."""
    D = len(mean)
    L = np.linalg.cholesky(cov)
    diff = Y - mean
    sol = np.linalg.solve(L, diff.T)
    maha = np.sum(sol ** 2, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return -0.5 * (D * LOG_2PI + logdet + maha)


def _log_resp(Y: np.ndarray, priors, means, covs) -> np.ndarray:
    """(N, K) joint log-probability over components; Y is (N, F, D)."""
    N, F, _ = Y.shape
    K = len(priors)
    lp = np.tile(np.log(priors)[None, :], (N, 1))
    for k in range(K):
        for j in range(F):
            lp[:, k] += _log_gauss(Y[:, j, :], means[k][j], covs[k][j])
    return lp


def _logsumexp_rows(lp: np.ndarray) -> np.ndarray:
    m = lp.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(lp - m).sum(axis=1, keepdims=True)))[:, 0]


def fit(demos, frame_instances, K: int, regularization: float = 1e-6,
        seed: int = 0, resample_len: int = 100, max_iter: int = 200,
        tol: float = 1e-6) -> TpGmmModel:
    """EM fit of a task-parameterized mixture.

    Initialization is deterministic time-quantile binning (bin = floor(t*K)
    on the normalized grid), which makes refits exactly stable under
    duplication of the demonstration set. The log-likelihood path is recorded
    on the model; a decrease rolls the update back and stops.
    """
    if not demos:
        raise FitError("no demonstrations to fit")
    if len(frame_instances) != len(demos):
        raise FitError("one frame instance required per demonstration")
    if K < 1:
        raise FitError("K must be >= 1")
    if regularization <= 0:
        raise FitError("regularization must be positive")
    if K > resample_len:
        raise FitError(f"K={K} exceeds the {resample_len} samples available per demonstration")
    F = len(frame_instances[0])
    if any(len(inst) != F for inst in frame_instances):
        raise FitError("all frame instances must have the same frame count")

    has_gripper = demos[0].gripper is not None
    if any((d.gripper is not None) != has_gripper for d in demos):
        raise FitError("demonstrations disagree on the gripper channel")
    spatial_dim = demos[0].dim
    if any(d.dim != spatial_dim for d in demos):
        raise FitError("demonstrations disagree on dimensionality")
    D = 1 + spatial_dim + (1 if has_gripper else 0)

    # project each demo into each of its frames
    blocks = []
    for demo, inst in zip(demos, frame_instances):
        X = demo_state_matrix(demo, resample_len)        # (T, D)
        if X.shape[1] != D:
            raise FitError("state dimension mismatch")
        per_frame = []
        for fr in inst.frames:
            if fr.A.shape != (D, D):
                raise FitError("frame dimension does not match the state")
            per_frame.append(np.linalg.solve(fr.A, (X - fr.b).T).T)
        blocks.append(np.stack(per_frame, axis=1))        # (T, F, D)
    Y = np.concatenate(blocks, axis=0)                    # (N, F, D)
    N = Y.shape[0]
    tvals = Y[:, 0, 0]                                    # time is frame-invariant

    # the time dimension is uniformly sampled and never degenerate; floor only
    # the spatial/gripper block so the time regression stays unbiased
    regI = regularization * np.diag([0.0] + [1.0] * (D - 1))
    bins = np.minimum((tvals * K).astype(int), K - 1)
    means = [[None] * F for _ in range(K)]
    covs = [[None] * F for _ in range(K)]
    priors = np.zeros(K)
    for k in range(K):
        sel = bins == k
        if sel.sum() < 2:
            raise FitError(f"initial time bin {k} has fewer than 2 samples")
        priors[k] = sel.sum() / N
        for j in range(F):
            pts = Y[sel, j, :]
            mu = pts.mean(axis=0)
            diff = pts - mu
            means[k][j] = mu
            covs[k][j] = diff.T @ diff / len(pts) + regI

    lls = []
    prev_params = None
    for _ in range(max_iter + 1):
        lp = _log_resp(Y, priors, means, covs)
        lse = _logsumexp_rows(lp)
        ll = float(lse.sum())
        if lls and ll < lls[-1] - 1e-12:
            priors, means, covs = prev_params   # roll back the harmful update
            break
        lls.append(ll)
        # per-sample change, so convergence is invariant to duplicating demos
        if len(lls) > 1 and abs(lls[-1] - lls[-2]) / N < tol:
            break
        if len(lls) > max_iter:
            break
        # M-step
        resp = np.exp(lp - lse[:, None])                  # (N, K)
        nk = resp.sum(axis=0)
        prev_params = (priors, [row[:] for row in means], [row[:] for row in covs])
        priors = nk / N
        new_means = [[None] * F for _ in range(K)]
        new_covs = [[None] * F for _ in range(K)]
        for k in range(K):
            w = resp[:, k]
            for j in range(F):
                pts = Y[:, j, :]
                mu = w @ pts / nk[k]
                diff = pts - mu
                cov = (diff * w[:, None]).T @ diff / nk[k] + regI
                new_means[k][j] = mu
                new_covs[k][j] = 0.5 * (cov + cov.T)
        means, covs = new_means, new_covs

    components = tuple(
        tuple(GaussianComponent(means[k][j], covs[k][j]) for j in range(F))
        for k in range(K))
    return TpGmmModel(
        priors=priors / priors.sum(),
        components=components,
        state_dim=D,
        regularization=float(regularization),
        seed=int(seed),
        time_range=(0.0, 1.0),
        gripper_dim=(D - 1) if has_gripper else None,
        loglik_path=tuple(lls),
    )


def fuse(model: TpGmmModel, instance: FrameInstance) -> GlobalMixture:
    """Map per-frame components into the global frame and combine each
    component's F Gaussians by a precision-weighted product."""
    if len(instance) != model.F:
        raise ValueError(f"instance has {len(instance)} frames, model expects {model.F}")
    out = []
    for k in range(model.K):
        prec_sum = np.zeros((model.state_dim, model.state_dim))
        info_sum = np.zeros(model.state_dim)
        for j, fr in enumerate(instance.frames):
            comp = model.components[k][j]
            mean_g = fr.A @ comp.mean + fr.b
            cov_g = fr.A @ comp.cov @ fr.A.T
            try:
                prec = np.linalg.inv(cov_g)
            except np.linalg.LinAlgError as exc:
                raise FuseError(f"component {k}, frame {j}: singular covariance", k) from exc
            prec_sum += prec
            info_sum += prec @ mean_g
        try:
            cov = np.linalg.inv(prec_sum)
        except np.linalg.LinAlgError as exc:
            raise FuseError(f"component {k}: singular fused precision", k) from exc
        cov = 0.5 * (cov + cov.T)
        out.append(GaussianComponent(cov @ info_sum, cov))
    return GlobalMixture(model.priors, out, model.time_range, model.gripper_dim)


@dataclass(frozen=True)
class GmrResult:
    mean: np.ndarray            # (T, D-1)
    cov: np.ndarray             # (T, D-1, D-1)
    fallback: np.ndarray        # (T,) bool, True where densities underflowed


def gmr_batch(mixture: GlobalMixture, ts) -> GmrResult:
    """Gaussian mixture regression of the non-time dims conditioned on time."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if not np.all(np.isfinite(ts)):
        raise ValueError("query times must be finite")
    K = len(mixture.components)
    T = len(ts)
    D = len(mixture.components[0].mean)
    dout = D - 1

    mu_t = np.array([c.mean[0] for c in mixture.components])
    var_t = np.array([c.cov[0, 0] for c in mixture.components])
    mu_x = np.stack([c.mean[1:] for c in mixture.components])          # (K, dout)
    cov_xt = np.stack([c.cov[1:, 0] for c in mixture.components])      # (K, dout)
    cov_xx = np.stack([c.cov[1:, 1:] for c in mixture.components])     # (K, dout, dout)

    # log responsibilities from the time marginals
    dt = ts[:, None] - mu_t[None, :]                                   # (T, K)
    log_dens = -0.5 * (LOG_2PI + np.log(var_t)[None, :] + dt ** 2 / var_t[None, :])
    log_w = np.log(mixture.priors)[None, :] + log_dens
    fallback = log_w.max(axis=1) < -700.0
    m = log_w.max(axis=1, keepdims=True)
    w = np.exp(log_w - m)
    w /= w.sum(axis=1, keepdims=True)
    if np.any(fallback):
        idx = np.abs(dt[fallback]).argmin(axis=1)
        w[fallback] = 0.0
        w[np.flatnonzero(fallback), idx] = 1.0

    gain = cov_xt / var_t[:, None]                                     # (K, dout)
    cond_mean = mu_x[None, :, :] + gain[None, :, :] * dt[:, :, None]   # (T, K, dout)
    cond_cov = cov_xx - gain[:, :, None] * cov_xt[:, None, :]          # (K, dout, dout)

    mean = np.einsum("tk,tkd->td", w, cond_mean)
    centered = cond_mean - mean[:, None, :]
    cov = (np.einsum("tk,kde->tde", w, cond_cov)
           + np.einsum("tk,tkd,tke->tde", w, centered, centered))
    return GmrResult(mean, cov, fallback)


def gmr(mixture: GlobalMixture, t: float):
    """Conditional (mean, covariance) of the non-time dims at one time."""
    res = gmr_batch(mixture, [t])
    return res.mean[0], res.cov[0]


def realize(model: TpGmmModel, instance: FrameInstance, T: int = 100) -> Trajectory:
    """Generate a trajectory of T uniform samples over the model time range."""
    if T < 2:
        raise ValueError("T must be >= 2")
    mixture = fuse(model, instance)
    ts = np.linspace(model.time_range[0], model.time_range[1], T)
    res = gmr_batch(mixture, ts)
    if model.gripper_dim is not None:
        spatial = res.mean[:, :model.gripper_dim - 1]
        g = (res.mean[:, model.gripper_dim - 1] > 0.5).astype(int)
        marks = gripper_marks(g)
        return Trajectory(ts, spatial, g, marks)
    return Trajectory(ts, res.mean)


def model_to_dict(model: TpGmmModel) -> dict:
    return {
        "schema_version": 1,
        "K": model.K,
        "F": model.F,
        "state_dim": model.state_dim,
        "regularization": model.regularization,
        "seed": model.seed,
        "time_range": list(model.time_range),
        "gripper_dim": model.gripper_dim,
        "priors": [float(v) for v in model.priors],
        "components": [
            [{"mean": [float(v) for v in c.mean],
              "cov": [float(v) for v in c.cov.ravel()]}
             for c in row]
            for row in model.components],
    }


def model_from_dict(d: dict) -> TpGmmModel:
    D = int(d["state_dim"])
    comps = tuple(
        tuple(GaussianComponent(np.asarray(c["mean"]), np.asarray(c["cov"]).reshape(D, D))
              for c in row)
        for row in d["components"])
    return TpGmmModel(
        priors=np.asarray(d["priors"], dtype=float),
        components=comps,
        state_dim=D,
        regularization=float(d["regularization"]),
        seed=int(d["seed"]),
        time_range=tuple(d["time_range"]),
        gripper_dim=d.get("gripper_dim"),
    )


def model_json(model: TpGmmModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))


def model_hash(model: TpGmmModel) -> str:
    return hashlib.sha256(model_json(model).encode()).hexdigest()
