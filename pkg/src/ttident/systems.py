"""Benchmark dynamical systems: right-hand sides, closed-form coefficient
tensors, trajectory integration, and snapshot generation.

Three systems are provided:

* a three-state circuit with a piecewise-smooth nonlinearity ("chua"),
* a chain of oscillators with cubic nearest-neighbour forcing ("fpu",
  second-order; derivatives are accelerations),
* phase oscillators with mean-field coupling and external forcing
  ("kuramoto").

Each system has a canonical dictionary in which its right-hand side is an
exact linear combination of product features, and
:func:`exact_coefficients` returns those closed-form weights. Snapshot
derivatives are always exact right-hand-side evaluations at the sampled
states; nothing is differentiated numerically.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .coefficients import CoefficientModel
from .exceptions import ConfigError, StepFailure, UnsupportedLayout
from .features import (
    FUNCTION_MAJOR,
    Dictionary,
    absolute,
    cosine,
    monomial,
    sine,
)
from .tensor_train import (
    TensorTrain,
    orthonormalize_left,
    orthonormalize_right,
    tt_add,
    tt_from_full,
)

SYSTEMS = ("chua", "fpu", "kuramoto")


@dataclass(frozen=True)
class ChuaParams:
    alpha: float = 10.0
    beta: float = 14.87
    delta1: float = -8.0 / 7.0
    delta2: float = 4.0 / 63.0


@dataclass(frozen=True)
class FpuParams:
    d: int
    beta: float = 0.7

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("need at least one oscillator")


@dataclass(frozen=True)
class KuramotoParams:
    d: int
    coupling: float = 2.0
    forcing: float = 0.2
    omega: tuple[float, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("need at least one oscillator")
        if self.omega is None:
            # intrinsic frequencies equidistant in [-5, 5]
            object.__setattr__(
                self, "omega", tuple(np.linspace(-5.0, 5.0, self.d))
            )
        else:
            object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        if len(self.omega) != self.d:
            raise ValueError("omega must have one entry per oscillator")


def default_params(system: str, d: int | None = None):
    if system == "chua":
        return ChuaParams()
    if system == "fpu":
        if d is None:
            raise ConfigError("fpu needs a dimension")
        return FpuParams(d=d)
    if system == "kuramoto":
        if d is None:
            raise ConfigError("kuramoto needs a dimension")
        return KuramotoParams(d=d)
    raise ConfigError(f"unknown system {system!r}")


def params_from_dict(system: str, doc: dict):
    cls = {"chua": ChuaParams, "fpu": FpuParams, "kuramoto": KuramotoParams}.get(system)
    if cls is None:
        raise ConfigError(f"unknown system {system!r}")
    doc = dict(doc)
    if "omega" in doc and doc["omega"] is not None:
        doc["omega"] = tuple(doc["omega"])
    try:
        return cls(**doc)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {system}: {exc}") from exc


def _as_columns(state: np.ndarray, d: int):
    state = np.asarray(state, dtype=np.float64)
    single = state.ndim == 1
    x = state[:, None] if single else state
    if x.shape[0] != d:
        raise ValueError(f"state dimension {x.shape[0]} does not match d={d}")
    return x, single


def chua_rhs(params: ChuaParams, state: np.ndarray) -> np.ndarray:
    """First derivatives of the circuit state(s)."""
    x, single = _as_columns(state, 3)
    x1, x2, x3 = x
    g = params.delta1 * x1 + params.delta2 * x1 * np.abs(x1)
    out = np.stack([
        params.alpha * (x2 - x1 - g),
        x1 - x2 + x3,
        -params.beta * x2,
    ])
    return out[:, 0] if single else out


def fpu_rhs(params: FpuParams, state: np.ndarray) -> np.ndarray:
    """Second derivatives of the oscillator displacements (fixed ends)."""
    x, single = _as_columns(state, params.d)
    padded = np.zeros((params.d + 2, x.shape[1]))
    padded[1:-1] = x
    right = padded[2:] - padded[1:-1]
    left = padded[1:-1] - padded[:-2]
    out = (right - left) + params.beta * (right**3 - left**3)
    return out[:, 0] if single else out


def kuramoto_rhs(params: KuramotoParams, state: np.ndarray) -> np.ndarray:
    """Phase velocities under mean-field coupling plus external forcing."""
    x, single = _as_columns(state, params.d)
    sin_x = np.sin(x)
    cos_x = np.cos(x)
    coupling = (params.coupling / params.d) * (
        cos_x * sin_x.sum(axis=0) - sin_x * cos_x.sum(axis=0)
    )
    omega = np.asarray(params.omega)
    out = omega[:, None] + coupling + params.forcing * sin_x
    return out[:, 0] if single else out


def rhs_function(system: str, params):
    """First-order right-hand side ``f(x)`` suitable for integration.

    For the second-order oscillator chain this is the companion system on
    ``(x, v)`` of dimension ``2 d``.
    """
    if system == "chua":
        return lambda x: chua_rhs(params, x)
    if system == "kuramoto":
        return lambda x: kuramoto_rhs(params, x)
    if system == "fpu":
        d = params.d

        def companion(z):
            x, v = z[:d], z[d:]
            return np.concatenate([v, fpu_rhs(params, x)])

        return companion
    raise ConfigError(f"unknown system {system!r}")


# -- canonical dictionaries ----------------------------------------------


def chua_monomial_dictionary() -> Dictionary:
    """Coordinate-major monomials of order up to two per coordinate."""
    return Dictionary([monomial(k) for k in range(3)])


def chua_dictionary() -> Dictionary:
    """Function-major {x, |x|} with a prepended constant; spans the circuit
    nonlinearity through the x|x| cross terms."""
    return Dictionary([monomial(1), absolute()], layout=FUNCTION_MAJOR,
                      prepend_constant=True)


def fpu_dictionary() -> Dictionary:
    """Coordinate-major monomials {1, x, x^2, x^3}."""
    return Dictionary([monomial(k) for k in range(4)])


def kuramoto_dictionary() -> Dictionary:
    """Function-major {sin, cos} with a prepended constant."""
    return Dictionary([sine(), cosine()], layout=FUNCTION_MAJOR,
                      prepend_constant=True)


def canonical_dictionary(system: str) -> Dictionary:
    if system == "chua":
        return chua_dictionary()
    if system == "fpu":
        return fpu_dictionary()
    if system == "kuramoto":
        return kuramoto_dictionary()
    raise ConfigError(f"unknown system {system!r}")


# -- exact coefficient tensors -------------------------------------------


def _chua_exact(params: ChuaParams) -> np.ndarray:
    xi = np.zeros((4, 4, 3))
    xi[1, 0, 0] = -params.alpha * (1.0 + params.delta1)
    xi[2, 0, 0] = params.alpha
    xi[1, 1, 0] = -params.alpha * params.delta2
    xi[1, 0, 1] = 1.0
    xi[2, 0, 1] = -1.0
    xi[3, 0, 1] = 1.0
    xi[2, 0, 2] = -params.beta
    return xi


def _kuramoto_exact(params: KuramotoParams) -> np.ndarray:
    d = params.d
    k_over_d = params.coupling / d
    xi = np.zeros((d + 1, d + 1, d))
    for k in range(d):
        xi[0, 0, k] = params.omega[k]
        xi[k + 1, 0, k] = params.forcing
        for l in range(d):
            if l != k:
                xi[l + 1, k + 1, k] = k_over_d
                xi[k + 1, l + 1, k] = -k_over_d
    return xi


def _fpu_exact_tt(params: FpuParams) -> TensorTrain:
    """Structural tensor train of the cubic-chain coefficients.

    Each oscillator contributes one train that couples its monomial mode
    with the neighbouring modes; the trains are summed and recompressed.
    """
    d = params.d
    beta = params.beta
    w = np.zeros((4, 4))
    w[0] = [0.0, -2.0, 0.0, -2.0 * beta]  # -2 x - 2 beta x^3
    w[1] = [1.0, 0.0, 3.0 * beta, 0.0]    # 1 + 3 beta x^2
    w[2] = [0.0, -3.0 * beta, 0.0, 0.0]   # -3 beta x
    w[3] = [beta, 0.0, 0.0, 0.0]          # beta

    def unit_core(index, size=4):
        core = np.zeros((1, size, 1))
        core[0, index, 0] = 1.0
        return core

    def row_units():
        # (1, 4, 4): column j carries the j-th unit vector
        return np.eye(4).reshape(1, 4, 4)

    def col_units():
        # (4, 4, 1): row j carries the j-th unit vector
        return np.eye(4).reshape(4, 4, 1)

    def head_core():
        # (1, 4, 4): column j carries w[j]
        return w.T[None, :, :].copy()

    def tail_core():
        # (4, 4, 1): row j carries w[j]
        return w.reshape(4, 4, 1)

    if d == 1:
        cores = [w[0].reshape(1, 4, 1), np.ones((1, 1, 1))]
        return TensorTrain(cores, copy=False)

    def coupling_core():
        core = np.zeros((4, 4, 4))
        for j in range(4):
            core[0, :, j] = w[j]
            core[j, :, 0] = w[j]
        return core

    terms = []
    for k in range(d):
        cores: list[np.ndarray] = []
        if k == 0:
            cores.append(head_core())
            cores.append(col_units())
            cores.extend(unit_core(0) for _ in range(d - 2))
        elif k == d - 1:
            cores.extend(unit_core(0) for _ in range(d - 2))
            cores.append(row_units())
            cores.append(tail_core())
        else:
            cores.extend(unit_core(0) for _ in range(k - 1))
            cores.append(row_units())
            cores.append(coupling_core())
            cores.append(col_units())
            cores.extend(unit_core(0) for _ in range(d - k - 2))
        cores.append(unit_core(k, size=d))
        terms.append(TensorTrain(cores, copy=False))

    total = terms[0]
    for term in terms[1:]:
        total = tt_add(total, term)
    return orthonormalize_right(orthonormalize_left(total))


def exact_coefficients(system: str, params, dictionary: Dictionary | None = None) -> CoefficientModel:
    """Closed-form coefficient tensor of a benchmark system.

    The coefficients are expressed in the system's canonical dictionary;
    passing any other dictionary raises :class:`UnsupportedLayout`.
    """
    canonical = canonical_dictionary(system)
    if dictionary is not None and dictionary != canonical:
        raise UnsupportedLayout(
            f"the exact coefficients of {system!r} are defined over "
            f"{canonical.to_config()}"
        )
    if system == "chua":
        tt = tt_from_full(_chua_exact(params))
    elif system == "kuramoto":
        tt = tt_from_full(_kuramoto_exact(params))
    elif system == "fpu":
        tt = _fpu_exact_tt(params)
    else:
        raise ConfigError(f"unknown system {system!r}")
    return CoefficientModel(tt, canonical, meta={"exact": True, "system": system})


# -- integration and snapshots -------------------------------------------


def integrate(
    rhs,
    x0: np.ndarray,
    time_grid: np.ndarray,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    method: str = "RK45",
) -> np.ndarray:
    """Sample the autonomous flow of ``rhs`` on a time grid.

    Uses an adaptive explicit Runge-Kutta pair by default. Returns the
    states as columns, shape ``(dim, len(time_grid))``.

    Raises
    ------
    StepFailure
        If the solver reports failure or produces non-finite states.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    time_grid = np.asarray(time_grid, dtype=np.float64)
    if not np.all(np.isfinite(x0)):
        raise StepFailure("non-finite initial state")
    solution = solve_ivp(
        lambda _, x: rhs(x),
        (time_grid[0], time_grid[-1]),
        x0,
        t_eval=time_grid,
        method=method,
        rtol=rtol,
        atol=atol,
    )
    if not solution.success or solution.y.shape[1] != time_grid.size:
        raise StepFailure(f"integration failed: {solution.message}")
    if not np.all(np.isfinite(solution.y)):
        raise StepFailure("integration produced non-finite states")
    return solution.y


def uniform_grid(dt: float, t_end: float | None = None, m: int | None = None,
                 include_endpoint: bool = False) -> np.ndarray:
    """Uniform time grid starting at 0, specified by count or end time."""
    if dt <= 0:
        raise ConfigError("dt must be positive")
    if m is None:
        if t_end is None:
            raise ConfigError("need a sample count or an end time")
        m = int(round(t_end / dt)) + (1 if include_endpoint else 0)
    if m < 1:
        raise ConfigError("need at least one sample")
    return np.arange(m) * dt


@dataclass
class SnapshotSet:
    """Paired state and derivative samples of one system.

    ``states`` and ``derivatives`` are ``(d, m)`` matrices; derivatives are
    exact right-hand-side evaluations of the tagged order (1 for first
    derivatives, 2 for accelerations).
    """

    system: str
    states: np.ndarray
    derivatives: np.ndarray
    derivative_order: int
    params: dict
    seed: int | None
    grid: dict

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        self.derivatives = np.asarray(self.derivatives, dtype=np.float64)
        if self.states.shape != self.derivatives.shape:
            raise ValueError("states and derivatives must have equal shapes")

    @property
    def d(self) -> int:
        return self.states.shape[0]

    @property
    def m(self) -> int:
        return self.states.shape[1]

    def params_object(self):
        return params_from_dict(self.system, self.params)

    def save(self, csv_path) -> None:
        """Write an m-row CSV (x_1..x_d, y_1..y_d) plus a sibling metadata
        JSON under the same stem."""
        csv_path = Path(csv_path)
        d = self.d
        header = ",".join(
            [f"x_{i + 1}" for i in range(d)] + [f"y_{i + 1}" for i in range(d)]
        )
        table = np.hstack([self.states.T, self.derivatives.T])
        np.savetxt(csv_path, table, delimiter=",", header=header, comments="")
        meta = {
            "system": self.system,
            "params": self.params,
            "seed": self.seed,
            "derivative_order": self.derivative_order,
            "time_grid": self.grid,
            "d": d,
            "m": self.m,
        }
        with open(csv_path.with_suffix(".json"), "w", encoding="utf-8") as handle:
            json.dump(meta, handle, indent=2)

    @classmethod
    def load(cls, csv_path) -> "SnapshotSet":
        csv_path = Path(csv_path)
        meta_path = csv_path.with_suffix(".json")
        if not csv_path.exists() or not meta_path.exists():
            raise FileNotFoundError(f"missing snapshot files for {csv_path}")
        with open(meta_path, "r", encoding="utf-8") as handle:
            meta = json.load(handle)
        table = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        d = int(meta["d"])
        if table.shape[1] != 2 * d:
            raise ValueError(f"expected {2 * d} columns, found {table.shape[1]}")
        return cls(
            system=meta["system"],
            states=table[:, :d].T,
            derivatives=table[:, d:].T,
            derivative_order=int(meta["derivative_order"]),
            params=meta["params"],
            seed=meta["seed"],
            grid=meta["time_grid"],
        )


def generate_snapshots(
    system: str,
    params=None,
    *,
    m: int | None = None,
    dt: float | None = None,
    t_end: float | None = None,
    include_endpoint: bool = False,
    seed: int | None = None,
    x0: np.ndarray | None = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> SnapshotSet:
    """Deterministic snapshot generation for a benchmark system.

    The oscillator chain ("fpu") draws ``m`` i.i.d. uniform displacement
    vectors in [-0.1, 0.1] and evaluates the exact accelerations; no
    trajectory is integrated. The other systems sample one trajectory on a
    uniform grid (step ``dt``) and evaluate the exact first derivatives at
    the sampled states. Fixed seeds give identical snapshot sets.
    """
    if system not in SYSTEMS:
        raise ConfigError(f"unknown system {system!r}")
    rng = np.random.default_rng(seed)

    if system == "fpu":
        if params is None:
            raise ConfigError("fpu needs parameters with a dimension")
        if m is None:
            raise ConfigError("fpu sampling needs a sample count m")
        states = rng.uniform(-0.1, 0.1, size=(params.d, m))
        derivatives = fpu_rhs(params, states)
        grid = {"kind": "random_uniform", "low": -0.1, "high": 0.1, "m": m}
        return SnapshotSet(system, states, derivatives, 2, asdict(params), seed, grid)

    if system == "chua":
        params = params or ChuaParams()
        dt = 0.01 if dt is None else dt
        t_end = 20.0 if (t_end is None and m is None) else t_end
        start = np.array([-1.13, 0.004, 0.45]) if x0 is None else np.asarray(x0, float)
        rhs = lambda x: chua_rhs(params, x)
        order = 1
    else:  # kuramoto
        if params is None:
            raise ConfigError("kuramoto needs parameters with a dimension")
        dt = 0.1 if dt is None else dt
        # oscillators placed uniformly at random on the ring
        start = (
            rng.uniform(0.0, 2.0 * np.pi, size=params.d)
            if x0 is None
            else np.asarray(x0, float)
        )
        rhs = lambda x: kuramoto_rhs(params, x)
        order = 1

    time_grid = uniform_grid(dt, t_end=t_end, m=m, include_endpoint=include_endpoint)
    states = integrate(rhs, start, time_grid, rtol=rtol, atol=atol)
    derivatives = rhs(states)
    grid = {
        "kind": "uniform",
        "dt": dt,
        "t_start": 0.0,
        "m": int(time_grid.size),
        "include_endpoint": include_endpoint,
        "x0": [float(v) for v in start],
    }
    return SnapshotSet(system, states, derivatives, order, asdict(params), seed, grid)
