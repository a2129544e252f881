"""Frequency-diverse code matrices and waveform adapters.

A waveform is described by an integer code matrix ``G`` (pulses x transmit
elements): element ``l`` transmits ``fc + df * G[p, l]`` in pulse ``p``. Each
pulse may be split into ``Q`` sub-bands, which turns ``G`` into the augmented
matrix ``G_Q`` with one row per (pulse, sub-band) pair.

Sample layout (used everywhere in the package): the echo samples form a
``(P*Q) x (L*R)`` data matrix whose row ``p*Q + q`` is a (pulse, sub-band)
pair and whose column ``l*R + r`` is a (transmit, receive) pair. Vectors are
the column-major flattening, so sample ``n = (l*R + r)*P*Q + p*Q + q``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._kernels import SPEED_OF_LIGHT

C = SPEED_OF_LIGHT

KINDS = ("rfd", "fda", "sf", "fdmimo", "stap")

# defaults shared by the adapters and presets
DEFAULT_FC = 10e9
DEFAULT_DF = 10e6
DEFAULT_PRI = 1e-4


def wavelength(fc: float = DEFAULT_FC) -> float:
    return C / fc


def stretched_sum(A, B) -> np.ndarray:
    """``A (x) 1^{size(B)} + 1^{size(A)} (x) B`` for integer arrays.

    1-D inputs are treated as column vectors.
    """
    A = _as_2d(A)
    B = _as_2d(B)
    return np.kron(A, np.ones(B.shape, dtype=A.dtype)) + np.kron(
        np.ones(A.shape, dtype=B.dtype), B)


def _as_2d(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim == 0:
        return a.reshape(1, 1)
    if a.ndim == 1:
        return a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected at most 2 dimensions, got shape {a.shape}")
    return a


def assign_linear(count: int, M: int) -> np.ndarray:
    """Cyclic code assignment ``i mod M``."""
    if count < 1 or M < 1:
        raise ValueError("count and M must be >= 1")
    return np.arange(count, dtype=np.int64) % M


def assign_random(count: int, M: int, seed: int, *, replace: bool = True) -> np.ndarray:
    """Random code assignment over ``{0, ..., M-1}``.

    With ``replace=True`` codes are i.i.d. uniform. With ``replace=False``
    every consecutive run of ``M`` entries is a random permutation of the code
    set, so codes never repeat inside such a run.
    """
    if count < 1 or M < 1:
        raise ValueError("count and M must be >= 1")
    rng = np.random.default_rng(seed)
    if replace:
        return rng.integers(0, M, size=count, dtype=np.int64)
    runs = -(-count // M)
    seq = np.concatenate([rng.permutation(M) for _ in range(runs)])
    return seq[:count].astype(np.int64)


def assign_codes(count: int, M: int, mode: str, seed: int | None = None, *,
                 replace: bool = True) -> np.ndarray:
    """Dispatch on the assignment mode name (``fixed``, ``linear``, ``random``)."""
    if mode == "fixed" or M == 1:
        return np.zeros(count, dtype=np.int64)
    if mode == "linear":
        return assign_linear(count, M)
    if mode == "random":
        if seed is None:
            raise ValueError("random assignment needs a seed")
        return assign_random(count, M, seed, replace=replace)
    raise ValueError(f"unknown assignment mode {mode!r}")


def assign_matrix(P: int, L: int, M: int, mode: str, seed: int | None = None, *,
                  axis: str = "entry", replace: bool = True) -> np.ndarray:
    """Build a ``P x L`` code matrix.

    ``axis`` picks what varies: ``pulse`` (one code per pulse, shared by all
    elements), ``element`` (one code per element, constant over pulses) or
    ``entry`` (every (pulse, element) pair, pulse-major order).
    """
    if axis == "pulse":
        return np.repeat(assign_codes(P, M, mode, seed, replace=replace)[:, None], L, axis=1)
    if axis == "element":
        return np.repeat(assign_codes(L, M, mode, seed, replace=replace)[None, :], P, axis=0)
    if axis == "entry":
        return assign_codes(P * L, M, mode, seed, replace=replace).reshape(P, L)
    raise ValueError(f"unknown axis {axis!r}")


@dataclass(frozen=True, eq=False)
class WaveformConfig:
    """Parameters of a random-frequency-diverse MIMO waveform.

    ``beta`` holds the complex modulation coefficients indexed ``(p, l, q)``;
    ``None`` means unit modulus everywhere. ``monostatic_fda`` selects the
    frequency-diverse-array receive convention in which every element only
    filters its own carrier: the receive channel is the transmitting element
    itself, so ``R`` is 1 and the two-way spatial path is ``2 * d_t * l``.
    """

    P: int
    Q: int
    L: int
    R: int
    G: np.ndarray
    fc: float = DEFAULT_FC
    df: float = DEFAULT_DF
    d_t: float = 0.0
    d_r: float = 0.0
    pri: float = DEFAULT_PRI
    beta: np.ndarray | None = None
    monostatic_fda: bool = False
    kind: str = "rfd"
    v_p: float | None = None

    def __post_init__(self):
        G = np.asarray(self.G)
        if not np.issubdtype(G.dtype, np.integer):
            if not np.all(np.equal(np.mod(G, 1), 0)):
                raise ValueError("code matrix entries must be integers")
            G = G.astype(np.int64)
        G = np.array(G, dtype=np.int64)
        G.setflags(write=False)
        object.__setattr__(self, "G", G)
        for name in ("P", "Q", "L", "R"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if G.shape != (self.P, self.L):
            raise ValueError(f"G has shape {G.shape}, expected ({self.P}, {self.L})")
        if self.df <= 0 or self.pri <= 0:
            raise ValueError("frequency increment and PRI must be positive")
        if self.d_t < 0 or self.d_r < 0:
            raise ValueError("element spacings must be non-negative")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.monostatic_fda and (self.R != 1 or self.d_t != self.d_r):
            raise ValueError("monostatic FDA needs R == 1 (own-carrier receive) and d_t == d_r")
        if self.kind == "stap" and (self.v_p is None or self.v_p <= 0):
            raise ValueError("STAP waveforms need a positive platform speed v_p")
        if self.beta is not None:
            beta = np.asarray(self.beta, dtype=np.complex128)
            if beta.shape != (self.P, self.L, self.Q):
                raise ValueError(f"beta has shape {beta.shape}, expected {(self.P, self.L, self.Q)}")
            beta = beta.copy()
            beta.setflags(write=False)
            object.__setattr__(self, "beta", beta)

    @property
    def dim(self) -> int:
        """Measurement dimension ``P*Q*L*R``."""
        return self.P * self.Q * self.L * self.R

    @cached_property
    def layout(self) -> "SampleLayout":
        return SampleLayout.of(self)

    @cached_property
    def afdcm(self) -> "AugmentedFdcm":
        return build_afdcm(self)

    def modulation(self) -> np.ndarray:
        """Per-sample modulation weights ``|beta_{p,l,q}|^2``."""
        lay = self.layout
        if self.beta is None:
            return np.ones(self.dim)
        return np.abs(self.beta[lay.p, lay.l, lay.q]) ** 2

    def unambiguous_velocity(self) -> tuple[float, float]:
        half = C / (4.0 * self.fc * self.pri)
        return -half, half

    def unambiguous_direction(self) -> tuple[float, float]:
        """Unambiguous direction-sine interval set by the finest spatial step."""
        if self.monostatic_fda:
            d = self.d_t
            half = C / (4.0 * d * self.fc) if d > 0 else np.inf
        elif self.R > 1 and self.d_r > 0:
            half = C / (2.0 * self.d_r * self.fc)
        elif self.d_t > 0:
            half = C / (2.0 * self.d_t * self.fc)
        else:
            half = np.inf
        half = min(half, 1.0)
        return -half, half

    def range_extent(self) -> float:
        return C / (2.0 * self.df)

    def to_dict(self) -> dict:
        d = {
            "P": self.P, "Q": self.Q, "L": self.L, "R": self.R,
            "G": self.G.tolist(), "fc": self.fc, "df": self.df,
            "d_t": self.d_t, "d_r": self.d_r, "pri": self.pri,
            "monostatic_fda": self.monostatic_fda, "kind": self.kind, "v_p": self.v_p,
        }
        if self.beta is not None:
            d["beta_re"] = self.beta.real.tolist()
            d["beta_im"] = self.beta.imag.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WaveformConfig":
        d = dict(d)
        beta = None
        if "beta_re" in d:
            beta = np.asarray(d.pop("beta_re")) + 1j * np.asarray(d.pop("beta_im"))
        return cls(G=np.asarray(d.pop("G"), dtype=np.int64), beta=beta, **d)


@dataclass(frozen=True, eq=False)
class SampleLayout:
    """Per-sample index arrays in the package-wide layout."""

    p: np.ndarray
    q: np.ndarray
    l: np.ndarray
    r: np.ndarray
    row: np.ndarray
    col: np.ndarray

    @classmethod
    def of(cls, cfg: WaveformConfig) -> "SampleLayout":
        n = np.arange(cfg.dim)
        PQ = cfg.P * cfg.Q
        row = n % PQ
        col = n // PQ
        return cls(p=row // cfg.Q, q=row % cfg.Q, l=col // cfg.R, r=col % cfg.R,
                   row=row, col=col)


@dataclass(frozen=True, eq=False)
class AugmentedFdcm:
    """Augmented code matrix with its receive expansion and unique codes."""

    G_Q: np.ndarray
    G_Q_rx: np.ndarray
    M_Q: np.ndarray

    @property
    def codes(self) -> np.ndarray:
        """Code of every sample in layout order (column-major ``G_Q_rx``)."""
        return self.G_Q_rx.ravel(order="F")

    def rows_of(self, m: int) -> np.ndarray:
        """Row indices of ``G_Q`` holding code ``m`` (one per occurrence)."""
        return np.nonzero(self.G_Q == m)[0]

    def cols_of(self, m: int) -> np.ndarray:
        """Column indices of ``G_Q`` holding code ``m`` (one per occurrence)."""
        return np.nonzero(self.G_Q == m)[1]


def build_afdcm(cfg: WaveformConfig) -> AugmentedFdcm:
    G_Q = stretched_sum(cfg.G, np.arange(cfg.Q))
    G_Q_rx = np.kron(G_Q, np.ones((1, cfg.R), dtype=G_Q.dtype))
    for a in (G_Q, G_Q_rx):
        a.setflags(write=False)
    return AugmentedFdcm(G_Q=G_Q, G_Q_rx=G_Q_rx, M_Q=np.unique(G_Q))


# --------------------------------------------------------------------------
# adapters
# --------------------------------------------------------------------------

def adapt_fda(L: int, Q: int, g, *, fc: float = DEFAULT_FC, df: float = DEFAULT_DF,
              d: float | None = None, pri: float = DEFAULT_PRI, beta=None) -> WaveformConfig:
    """Frequency diverse array: one pulse, each element on its own carrier.

    ``d`` defaults to a quarter wavelength, which makes the whole direction-sine
    interval ``[-1, 1]`` unambiguous for the two-way element path.
    """
    g = np.asarray(g, dtype=np.int64).ravel()
    if g.size != L:
        raise ValueError(f"FDA code vector needs {L} entries, got {g.size}")
    if d is None:
        d = wavelength(fc) / 4.0
    return WaveformConfig(P=1, Q=Q, L=L, R=1, G=g[None, :], fc=fc, df=df, d_t=d, d_r=d,
                          pri=pri, beta=beta, monostatic_fda=True, kind="fda")


def adapt_sf(P: int, Q: int, g, *, fc: float = DEFAULT_FC, df: float = DEFAULT_DF,
             pri: float = DEFAULT_PRI, beta=None) -> WaveformConfig:
    """Stepped-frequency pulse train on a single-element antenna."""
    g = np.asarray(g, dtype=np.int64).ravel()
    if g.size != P:
        raise ValueError(f"SF code vector needs {P} entries, got {g.size}")
    return WaveformConfig(P=P, Q=Q, L=1, R=1, G=g[:, None], fc=fc, df=df, d_t=0.0, d_r=0.0,
                          pri=pri, beta=beta, kind="sf")


def adapt_fdmimo(L: int, R: int, Q: int, g, *, fc: float = DEFAULT_FC, df: float = DEFAULT_DF,
                 d_r: float | None = None, d_t: float | None = None, pri: float = DEFAULT_PRI,
                 beta=None) -> WaveformConfig:
    """FD-MIMO beampattern mode: one pulse, ``L`` transmitters, ``R`` receivers.

    Defaults: half-wavelength receive spacing and ``d_t = R * d_r`` (filled
    virtual array).
    """
    g = np.asarray(g, dtype=np.int64).ravel()
    if g.size != L:
        raise ValueError(f"FD-MIMO code vector needs {L} entries, got {g.size}")
    if d_r is None:
        d_r = wavelength(fc) / 2.0
    if d_t is None:
        d_t = R * d_r
    return WaveformConfig(P=1, Q=Q, L=L, R=R, G=g[None, :], fc=fc, df=df, d_t=d_t, d_r=d_r,
                          pri=pri, beta=beta, kind="fdmimo")


def adapt_stap(L: int, R: int, P: int, g, v_p: float | None = None, *, Q: int = 1,
               fc: float = DEFAULT_FC, df: float = DEFAULT_DF, d_r: float | None = None,
               d_t: float | None = None, pri: float = DEFAULT_PRI, beta=None) -> WaveformConfig:
    """Side-looking airborne FD-MIMO; clutter velocity is slaved to ``alpha * v_p``.

    ``v_p`` defaults to the speed that moves the platform by half a receive
    spacing per pulse (``2 * v_p * T = d_r``).
    """
    g = np.asarray(g, dtype=np.int64).ravel()
    if g.size != L:
        raise ValueError(f"STAP code vector needs {L} entries, got {g.size}")
    if d_r is None:
        d_r = wavelength(fc) / 2.0
    if d_t is None:
        d_t = R * d_r
    if v_p is None:
        v_p = d_r / (2.0 * pri)
    if v_p <= 0:
        raise ValueError("platform speed must be positive")
    G = np.repeat(g[None, :], P, axis=0)
    return WaveformConfig(P=P, Q=Q, L=L, R=R, G=G, fc=fc, df=df, d_t=d_t, d_r=d_r, pri=pri,
                          beta=beta, kind="stap", v_p=v_p)
