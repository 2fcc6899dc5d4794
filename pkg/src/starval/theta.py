"""Profile curves theta on [0, lambda_max] and their monotone decomposition.

A rotation-invariant radial valuation has the form
``V(K) = integral of theta(rho_K) dm``. Its positive part is governed by the
running maximum ``M(x) = max_{0 <= c <= x} theta(c)``:
``theta_plus = M - theta(0)`` and ``theta_minus = theta_plus - (theta - theta(0))``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, InvalidArgument
from .kernels import running_max_pl

FORMS = ("power", "sine", "polynomial", "piecewise_linear")


@dataclass(frozen=True, eq=False)
class ThetaCurve:
    """A continuous function on ``[0, domain_max]``.

    ``form`` selects the closed form:

    * ``power``: ``coef * x**k`` (``k > 0``)
    * ``sine``: ``amplitude * sin(frequency * x)``
    * ``polynomial``: ``sum coefficients[i] * x**i``
    * ``piecewise_linear``: linear interpolation through ``(x, y)`` nodes,
      with ``x[0] == 0`` and ``x[-1] == domain_max``.
    """

    form: str
    domain_max: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.form not in FORMS:
            raise InvalidArgument(f"unknown theta form {self.form!r}")
        p = dict(self.params)
        if self.form == "piecewise_linear":
            x = np.array(p.get("x", ()), dtype=np.float64)
            y = np.array(p.get("y", ()), dtype=np.float64)
            if x.ndim != 1 or x.shape != y.shape or x.size < 2:
                raise InvalidArgument("piecewise_linear needs matching x, y with >= 2 nodes")
            if x[0] != 0.0 or np.any(np.diff(x) <= 0):
                raise InvalidArgument("abscissae must start at 0 and increase strictly")
            if not np.all(np.isfinite(y)):
                raise InvalidArgument("ordinates must be finite")
            x.setflags(write=False)
            y.setflags(write=False)
            p["x"], p["y"] = x, y
            object.__setattr__(self, "domain_max", float(x[-1]))
        else:
            dm = float(self.domain_max)
            if not (dm > 0 and math.isfinite(dm)):
                raise InvalidArgument("domain_max must be positive and finite")
            object.__setattr__(self, "domain_max", dm)
        if self.form == "power":
            if not p.get("k", 0) > 0:
                raise InvalidArgument("power exponent must be > 0")
            p.setdefault("coef", 1.0)
        elif self.form == "sine":
            p.setdefault("frequency", 1.0)
            p.setdefault("amplitude", 1.0)
        elif self.form == "polynomial":
            c = [float(v) for v in p.get("coefficients", ())]
            if not c:
                raise InvalidArgument("polynomial needs at least one coefficient")
            p["coefficients"] = c
        object.__setattr__(self, "params", p)

    # constructors -----------------------------------------------------
    @classmethod
    def power(cls, k, domain_max, coef=1.0):
        return cls("power", domain_max, {"k": float(k), "coef": float(coef)})

    @classmethod
    def sine(cls, frequency, amplitude, domain_max):
        return cls("sine", domain_max, {"frequency": float(frequency), "amplitude": float(amplitude)})

    @classmethod
    def polynomial(cls, coefficients, domain_max):
        return cls("polynomial", domain_max, {"coefficients": list(coefficients)})

    @classmethod
    def piecewise_linear(cls, x, y):
        x = np.asarray(x, dtype=np.float64)
        return cls("piecewise_linear", float(x[-1]) if x.size else 0.0, {"x": x, "y": y})

    # evaluation -------------------------------------------------------
    def _raw(self, lam):
        p = self.params
        if self.form == "power":
            return p["coef"] * np.power(lam, p["k"])
        if self.form == "sine":
            return p["amplitude"] * np.sin(p["frequency"] * lam)
        if self.form == "polynomial":
            return np.polynomial.polynomial.polyval(lam, p["coefficients"])
        return np.interp(lam, p["x"], p["y"])

    def __call__(self, lam):
        return eval_theta(self, lam)

    @property
    def is_exact(self) -> bool:
        """Piecewise-linear curves are handled without sampling error."""
        return self.form == "piecewise_linear"

    def nodes(self):
        if self.form != "piecewise_linear":
            raise InvalidArgument("only piecewise_linear curves have nodes")
        return self.params["x"], self.params["y"]

    def sup_abs(self, lam=None) -> float:
        """Exact ``max |theta|`` over ``[0, lam]`` (default: the whole domain)."""
        lam = self.domain_max if lam is None else float(lam)
        if lam < 0 or lam > self.domain_max:
            raise DomainError(f"{lam} outside [0, {self.domain_max}]")
        p = self.params
        if self.form == "power":
            return abs(p["coef"]) * lam ** p["k"]
        if self.form == "sine":
            if abs(p["frequency"]) * lam >= math.pi / 2:
                return abs(p["amplitude"])
            return abs(p["amplitude"] * math.sin(p["frequency"] * lam))
        if self.form == "polynomial":
            pts = [0.0, lam] + _real_roots_in(np.polynomial.polynomial.polyder(p["coefficients"]), 0.0, lam)
            return float(np.max(np.abs(self._raw(np.array(pts)))))
        x, y = p["x"], p["y"]
        inside = np.abs(y[x <= lam])
        return float(max(inside.max(), abs(np.interp(lam, x, y))))

    def lipschitz(self) -> float:
        """Lipschitz constant on ``[0, domain_max]`` (``inf`` when unbounded)."""
        p, L = self.params, self.domain_max
        if self.form == "power":
            if p["coef"] == 0:
                return 0.0
            if p["k"] < 1:
                return math.inf
            return abs(p["coef"]) * p["k"] * L ** (p["k"] - 1)
        if self.form == "sine":
            return abs(p["amplitude"] * p["frequency"])
        if self.form == "polynomial":
            d1 = np.polynomial.polynomial.polyder(p["coefficients"])
            d2 = np.polynomial.polynomial.polyder(d1)
            pts = [0.0, L] + _real_roots_in(d2, 0.0, L)
            return float(np.max(np.abs(np.polynomial.polynomial.polyval(np.array(pts), d1))))
        x, y = p["x"], p["y"]
        return float(np.max(np.abs(np.diff(y) / np.diff(x))))

    # serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        params = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.params.items()}
        return {"form": self.form, "domain_max": self.domain_max, "params": params}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "ThetaCurve":
        return cls(d["form"], d.get("domain_max", 0.0), dict(d.get("params", {})))


def _real_roots_in(coeffs, lo, hi):
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if coeffs.size < 2:
        return []
    r = np.polynomial.polynomial.polyroots(coeffs)
    r = r[np.abs(r.imag) < 1e-12].real
    return [float(v) for v in r if lo <= v <= hi]


def eval_theta(curve: ThetaCurve, lam):
    """Evaluate ``curve`` at ``lam`` (scalar or array); no extrapolation."""
    arr = np.asarray(lam, dtype=np.float64)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > curve.domain_max):
        raise DomainError(f"argument outside [0, {curve.domain_max}]")
    out = curve._raw(arr)
    return float(out) if np.ndim(out) == 0 else out


def _refine_samples(curve: ThetaCurve, x: np.ndarray, y: np.ndarray):
    """Insert true local maxima near sampled record peaks, then exact crossings.

    After this pass the running max of the piecewise-linear interpolant
    agrees with the running max of ``curve`` up to interpolation error.
    """
    f = curve._raw
    span = curve.domain_max
    rec = np.maximum.accumulate(y)
    j = np.arange(1, x.size - 1)
    peak = (y[1:-1] > rec[:-2]) & (y[2:] < y[1:-1])
    add_x, add_y = [], []
    for i in j[peak]:
        res = minimize_scalar(lambda t: -f(t), bounds=(x[i - 1], x[i + 1]), method="bounded",
                              options={"xatol": 1e-15 * max(1.0, span)})
        xm = float(res.x)
        ym = float(f(xm))
        if x[i - 1] < xm < x[i + 1] and xm != x[i] and ym > y[i]:
            add_x.append(xm)
            add_y.append(ym)
    if add_x:
        order = np.argsort(np.concatenate([x, add_x]), kind="stable")
        x = np.concatenate([x, add_x])[order]
        y = np.concatenate([y, add_y])[order]
        rec = np.maximum.accumulate(y)

    level = rec[:-1]
    cross = np.nonzero((y[:-1] < level) & (y[1:] > level))[0]
    add_x, add_y = [], []
    for i in cross:
        c = level[i]
        try:
            xc = brentq(lambda t: f(t) - c, x[i], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        except ValueError:
            continue
        if x[i] < xc < x[i + 1]:
            add_x.append(xc)
            add_y.append(float(f(xc)))
    if add_x:
        order = np.argsort(np.concatenate([x, add_x]), kind="stable")
        x = np.concatenate([x, add_x])[order]
        y = np.concatenate([y, add_y])[order]
    return x, y


def _running_max_nodes(curve: ThetaCurve, resolution: int):
    if int(resolution) != resolution or resolution < 2:
        raise InvalidArgument("resolution must be an integer >= 2")
    if curve.is_exact:
        x, y = curve.nodes()
    else:
        x = np.linspace(0.0, curve.domain_max, int(resolution))
        y = curve._raw(x)
        x, y = _refine_samples(curve, x, y)
    return running_max_pl(np.ascontiguousarray(x), np.ascontiguousarray(y))


def running_max(curve: ThetaCurve, resolution: int = 100_001) -> ThetaCurve:
    """Running maximum ``M(x) = max theta on [0, x]`` as a piecewise-linear curve.

    Exact for piecewise-linear input. Closed forms are sampled at
    ``resolution`` equispaced points, refined around record peaks and
    record crossings, and the running max of that interpolant is returned.
    """
    xs, ms = _running_max_nodes(curve, resolution)
    return ThetaCurve.piecewise_linear(xs, ms)


def decompose_theta(curve: ThetaCurve, resolution: int = 100_001):
    """Split ``theta = theta_plus - theta_minus + offset``.

    Returns ``(theta_plus, theta_minus, offset)`` with ``offset = theta(0)``,
    ``theta_plus`` the running max of ``theta - offset`` (nondecreasing,
    zero at 0) and ``theta_minus = theta_plus - (theta - offset)`` (>= 0).
    Both parts share the same abscissae, except for power curves, which
    are monotone and split exactly into power curves.
    """
    if curve.form == "power" and curve.params["k"] > 0:
        k, c, top = curve.params["k"], curve.params["coef"], curve.domain_max
        return (ThetaCurve.power(k, top, max(c, 0.0)),
                ThetaCurve.power(k, top, max(-c, 0.0)),
                0.0)
    xs, ms = _running_max_nodes(curve, resolution)
    offset = float(curve._raw(0.0))
    plus = ms - offset
    minus = plus - (curve._raw(xs) - offset)
    return (ThetaCurve.piecewise_linear(xs, plus),
            ThetaCurve.piecewise_linear(xs, minus),
            offset)


def decomposition_table(curve: ThetaCurve, step: float, resolution: int = 100_001):
    """Rows ``(lam, theta, theta_plus, theta_minus)`` at ``lam = 0, step, 2 step, ...``."""
    if not step > 0:
        raise InvalidArgument("step must be positive")
    plus, minus, _ = decompose_theta(curve, resolution)
    count = int(math.floor(curve.domain_max / step + 1e-9))
    lam = np.minimum(np.arange(count + 1) * step, curve.domain_max)
    if lam[-1] < curve.domain_max:
        lam = np.append(lam, curve.domain_max)
    return np.column_stack([lam, eval_theta(curve, lam), eval_theta(plus, lam), eval_theta(minus, lam)])


def table_to_csv(rows, header=("lambda", "theta", "theta_plus", "theta_minus")) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()
