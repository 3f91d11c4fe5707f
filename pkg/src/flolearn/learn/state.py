"""Shadow-based tomography of Slater determinants and pure Gaussian states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import gsim
from ..matlin import SkewNormalForm, skew_normal_form, top_eigenvectors, vacuum_form
from ..shadows import DEFAULT_CHUNK, Source, collect_so_shadows, collect_un_shadows
from .box import Access


class AccessSource:
    """Source that prepares ``initial``, runs an access word and applies the shadow rotation.

    Shadow rotations must cover the whole register. When the underlying box
    is noiseless, :meth:`exact` hands back the prepared covariance instead
    (charged as ``N`` runs), so the tomography routines can evaluate their
    infinite-sample limit.
    """

    def __init__(self, access: Access, initial: Sequence[int], stage: str, prepare=None):
        self.access = access
        self.initial = list(initial)
        self.stage = stage
        self.prepare = prepare

    def __call__(self, rotations: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.access.run(
            self.initial, rng, shots=len(rotations), prepare=self.prepare, rotate=rotations, stage=self.stage
        )

    @property
    def noiseless(self) -> bool:
        return self.access.box.noiseless

    def exact(self, N: int) -> np.ndarray:
        spec = self.access.spec(self.initial, N, prepare=self.prepare, stage=self.stage)
        return self.access.box.exact_covariance(spec)


def access_source(access: Access, initial: Sequence[int], stage: str, prepare=None) -> AccessSource:
    return AccessSource(access, initial, stage, prepare)


def covariance_source(gamma: np.ndarray) -> Source:
    """Source drawing from a known pure Gaussian state; no black box involved."""
    gamma = np.asarray(gamma, dtype=float)

    def source(rotations: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        stack = rotations @ gamma @ np.swapaxes(rotations, 1, 2)
        return gsim.sample_fock_batch(stack, rng, check=False)

    return source


@dataclass(frozen=True)
class SlaterEstimate:
    projector: np.ndarray
    orbitals: np.ndarray
    mean: np.ndarray


def slater_tomo(
    source: Source,
    n: int,
    N: int,
    eta: int,
    rng: np.random.Generator,
    chunk: int = DEFAULT_CHUNK,
) -> SlaterEstimate:
    """Average ``N`` U(n)-shadows and round to the nearest rank-``eta`` projector."""
    if N < 1:
        raise ValueError("N must be positive")
    if not 0 <= eta <= n:
        raise ValueError("particle number out of range")
    if getattr(source, "noiseless", False):
        mean = gsim.rdm_from_covariance(source.exact(N))
    else:
        mean = collect_un_shadows(source, n, N, rng, chunk).mean()
    orbitals = top_eigenvectors(mean, eta)
    return SlaterEstimate(orbitals @ orbitals.conj().T, orbitals, mean)


@dataclass(frozen=True)
class CovarianceEstimate:
    """Empirical covariance, its normal form, and the rounded pure state."""

    mean: np.ndarray
    normal_form: SkewNormalForm
    state: gsim.GaussianState

    @property
    def gamma(self) -> np.ndarray:
        return self.state.gamma


def round_covariance(mean: np.ndarray) -> tuple[SkewNormalForm, np.ndarray]:
    nf = skew_normal_form(0.5 * (mean - mean.T))
    W = nf.W
    n = W.shape[0] // 2
    return nf, W @ vacuum_form(n) @ W.T


def gaussian_tomo(
    source: Source,
    n: int,
    N: int,
    rng: np.random.Generator,
    chunk: int = DEFAULT_CHUNK,
) -> CovarianceEstimate:
    """Average ``N`` SO(2n)-shadows and round to a pure covariance ``W J W^T``."""
    if N < 1:
        raise ValueError("N must be positive")
    if getattr(source, "noiseless", False):
        mean = source.exact(N)
    else:
        mean = collect_so_shadows(source, n, N, rng, chunk).mean()
    nf, gamma = round_covariance(mean)
    return CovarianceEstimate(mean, nf, gsim.GaussianState(n, 0.5 * (gamma - gamma.T)))
