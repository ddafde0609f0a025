"""Analytic decay widths and a random-matrix model of decay into a growing set of final states."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import curve_fit

# Fermi constant in GeV^-2; other inputs are standard particle-data values in GeV
PHYSICAL = {
    "G_F": 1.1663787e-5,
    "V_ud": 0.97373,
    "M_n": 0.93956542052,
    "M_p": 0.93827208816,
    "m_e": 0.51099895e-3,
    "g_V": 1.0,
    "g_A": 1.2754,
}
HBAR_GEV_S = 6.582119569e-25


# -- widths ----------------------------------------------------------------------------

def phase_space_fprime(y):
    """Phase-space factor of neutron decay for y = m_e / (M_n - M_p) in [0, 1]."""
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)) or np.any(~np.isfinite(y)):
        raise ValueError("phase_space_fprime needs 0 <= y <= 1")
    s = np.sqrt(1 - y * y)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(y > 0, y ** 4 * (np.log(np.where(y > 0, y, 1.0)) - np.log1p(s)), 0.0)
    out = s * (1 - 4.5 * y * y - 4 * y ** 4) - 7.5 * log_term
    return float(out) if out.ndim == 0 else out


def neutron_width(G_F: float, V_ud: float, M_n: float, M_p: float, m_e: float,
                  g_V: float, g_A: float) -> float:
    """Leading-order neutron width (GeV) from the V-A four-fermion interaction."""
    delta = M_n - M_p
    if not delta > m_e:
        raise ValueError("kinematically closed: need M_n > M_p + m_e")
    y = m_e / delta
    return (G_F ** 2 * abs(V_ud) ** 2 * delta ** 5 / (60 * math.pi ** 3)
            * (g_V ** 2 + 3 * g_A ** 2) * phase_space_fprime(y))


def delta_width_1p1(G: float, g_V: float, Q: float) -> float:
    """Leading-order width of the 1+1D baryon decay with massless leptons and energy release Q."""
    if not Q > 0:
        raise ValueError("energy release Q must be positive")
    return 3 * G ** 2 * g_V ** 2 * Q / (2 * math.pi)


# -- random-matrix persistence model ----------------------------------------------------

@dataclass
class EnsembleConfig:
    y_f: int = 400
    n_initial: int = 10
    initial_range: tuple = (0.0, 1.1)
    initial_rank: int = 5              # 1-based energy rank of the decaying state
    final_range: tuple = (0.0, 2.03)
    samples: int = 2000
    t_max: float = 40.0
    n_times: int = 401
    seed: int = 1
    coupling_scale: float = 1.0        # multiplies w_f; 0 decouples the sectors

    def __post_init__(self):
        self.initial_range = tuple(float(v) for v in self.initial_range)
        self.final_range = tuple(float(v) for v in self.final_range)
        if int(self.y_f) != self.y_f or self.y_f < 1:
            raise ValueError("y_f must be an integer >= 1")
        if self.n_initial < 1 or not 1 <= self.initial_rank <= self.n_initial:
            raise ValueError("initial_rank must lie in 1..n_initial")
        for name in ("initial_range", "final_range"):
            lo, hi = getattr(self, name)
            if not hi > lo:
                raise ValueError(f"{name} must be increasing")
        if self.samples < 1 or self.n_times < 2 or not self.t_max > 0:
            raise ValueError("need samples >= 1, n_times >= 2 and t_max > 0")
        if self.coupling_scale < 0:
            raise ValueError("coupling_scale must be non-negative")

    @property
    def w_f(self) -> float:
        """Half-width of the weak matrix elements; keeps G^2 rho_f fixed as y_f grows."""
        return self.coupling_scale / (2 * math.sqrt(self.y_f))

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_times)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EnsembleResult:
    times: np.ndarray
    persistence: np.ndarray
    stderr: np.ndarray
    plateau: float
    plateau_stderr: float
    config: EnsembleConfig
    extra: dict = field(default_factory=dict)


def _rng(cfg: EnsembleConfig) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, cfg.y_f])))


def sample_hamiltonian(cfg: EnsembleConfig, rng: np.random.Generator) -> np.ndarray:
    """Strong energies on the diagonal, weak couplings only between the two sectors."""
    ei = np.sort(rng.uniform(*cfg.initial_range, cfg.n_initial))
    ef = rng.uniform(*cfg.final_range, cfg.y_f)
    w = rng.uniform(-cfg.w_f, cfg.w_f, (cfg.n_initial, cfg.y_f))
    n = cfg.n_initial + cfg.y_f
    H = np.zeros((n, n))
    H[np.arange(n), np.arange(n)] = np.concatenate([ei, ef])
    H[: cfg.n_initial, cfg.n_initial:] = w
    H[cfg.n_initial:, : cfg.n_initial] = w.T
    return H


def ensemble_persistence(cfg: EnsembleConfig, times=None) -> EnsembleResult:
    """Sample-averaged |<i| exp(-iHt) |i>|^2 with its standard error.

    The plateau is the infinite-time average sum_k |<i|k>|^4, averaged over
    samples.
    """
    times = cfg.times() if times is None else np.asarray(times, dtype=float)
    rng = _rng(cfg)
    i0 = cfg.initial_rank - 1
    acc = np.zeros(len(times))
    acc2 = np.zeros(len(times))
    plat = []
    for _ in range(cfg.samples):
        H = sample_hamiltonian(cfg, rng)
        lam, V = np.linalg.eigh(H)
        w = V[i0, :] ** 2
        w /= w.sum()
        amp = np.exp(-1j * np.outer(times, lam)) @ w
        p = np.abs(amp) ** 2
        p[times == 0] = 1.0      # exp(-iH 0) is the identity; skip eigenvector rounding
        acc += p
        acc2 += p * p
        plat.append(float(np.sum(w * w)))
    n = cfg.samples
    mean = acc / n
    var = np.maximum(acc2 / n - mean ** 2, 0.0)
    stderr = np.sqrt(var / max(n - 1, 1))
    plat = np.array(plat)
    return EnsembleResult(times, mean, stderr, float(plat.mean()),
                          float(plat.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0, cfg)


EARLY_WINDOW = (0.01, 0.2)      # well inside 1 / (spectral width), where 1 - P ~ t^2


def early_times(n: int = 41) -> np.ndarray:
    return np.linspace(0.0, EARLY_WINDOW[1], n)


def early_time_exponent(times, persistence, t_lo: float, t_hi: float) -> float:
    """Slope of log(1 - P) against log t on [t_lo, t_hi]."""
    times, persistence = np.asarray(times), np.asarray(persistence)
    sel = (times >= t_lo) & (times <= t_hi) & (persistence < 1)
    if sel.sum() < 3:
        raise ValueError("need at least three points in the early-time window")
    slope, _ = np.polyfit(np.log(times[sel]), np.log(1 - persistence[sel]), 1)
    return float(slope)


def exponential_window(times, persistence, plateau: float, start_below: float = 0.95,
                       stop_factor: float = 1.5) -> tuple[float, float]:
    """Window from the first drop below ``start_below`` to the first value under ``stop_factor * plateau``."""
    times, persistence = np.asarray(times), np.asarray(persistence)
    below = np.nonzero(persistence < start_below)[0]
    if not len(below):
        raise ValueError("persistence never drops below the window start")
    i0 = below[0]
    stop = np.nonzero((persistence <= stop_factor * plateau) & (np.arange(len(times)) > i0))[0]
    i1 = stop[0] if len(stop) else len(times) - 1
    return float(times[i0]), float(times[i1])


def exponential_fit(times, persistence, window: tuple[float, float]) -> dict:
    """Least-squares fit of A exp(-rate t) on the window, with R^2 of the fit."""
    times, persistence = np.asarray(times), np.asarray(persistence)
    sel = (times >= window[0]) & (times <= window[1])
    if sel.sum() < 3:
        raise ValueError("need at least three points in the fit window")
    t, y = times[sel], persistence[sel]
    slope, icpt = np.polyfit(t, np.log(y), 1)
    (A, rate), _ = curve_fit(lambda tt, a, r: a * np.exp(-r * tt), t, y, p0=(math.exp(icpt), -slope))
    resid = y - A * np.exp(-rate * t)
    r2 = 1 - np.sum(resid ** 2) / np.sum((y - y.mean()) ** 2)
    return {"amplitude": float(A), "rate": float(rate), "r2": float(r2),
            "window": (float(window[0]), float(window[1])), "points": int(sel.sum())}


def golden_rule_rate(cfg: EnsembleConfig) -> float:
    """2 pi <|W|^2> rho_f for uniform couplings on [-w_f, w_f] and a flat final spectrum."""
    rho = cfg.y_f / (cfg.final_range[1] - cfg.final_range[0])
    return 2 * math.pi * cfg.w_f ** 2 / 3 * rho
