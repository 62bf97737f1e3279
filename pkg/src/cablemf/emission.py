"""Distance/current emission model, coefficient fitting, and shielding factor.

The magnetic flux density magnitude at distance r from the cable axis for
phase current I is approximated by

    B(I, r) = 10 ** ( k1*exp(k2*x) + k3*exp(k4*x) ),   x = log10(r),
    k_i     = alpha1_i * I**alpha2_i + alpha3_i,       i = 1..4,

with B in microtesla, r in meters and I in amperes RMS. Coefficients for
specific cable builds ship as JSON files next to this module; new sets are
fitted from simulated (I, r, B) grids by a deterministic two-stage
variable-projection least squares in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from .errors import FitDivergence, OutOfValidityRange, ParseError, ShapeMismatch

DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class EmissionFit:
    """Coefficient set of the fitted emission model.

    ``alpha1[i]``, ``alpha2[i]``, ``alpha3[i]`` parametrize k_{i+1}(I).
    Evaluation outside the validity envelope raises unless forced.
    """

    alpha1: tuple[float, float, float, float]
    alpha2: tuple[float, float, float, float]
    alpha3: tuple[float, float, float, float]
    r_range: tuple[float, float] = (0.15, 5.0)
    i_range: tuple[float, float] = (40.0, 890.0)
    label: str = "fit"

    def k_values(self, current: float) -> np.ndarray:
        """The four distance-profile coefficients at phase current ``current``."""
        a1 = np.asarray(self.alpha1)
        a2 = np.asarray(self.alpha2)
        a3 = np.asarray(self.alpha3)
        return a1 * current**a2 + a3


def eval_fit(fit: EmissionFit, current: float, r, force: bool = False):
    """Field magnitude B(I, r) in microtesla.

    ``r`` may be a scalar or array (meters). Raises OutOfValidityRange when
    (I, r) leaves the fitted envelope unless ``force`` is set.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("distances must be > 0")
    if not force:
        lo, hi = fit.r_range
        if np.any(r_arr < lo * (1 - 1e-9)) or np.any(r_arr > hi * (1 + 1e-9)):
            raise OutOfValidityRange(
                f"distance outside fitted range [{lo}, {hi}] m for '{fit.label}'"
            )
        ilo, ihi = fit.i_range
        if not ilo * (1 - 1e-9) <= current <= ihi * (1 + 1e-9):
            raise OutOfValidityRange(
                f"current {current} A outside fitted range [{ilo}, {ihi}] A "
                f"for '{fit.label}'"
            )
    k1, k2, k3, k4 = fit.k_values(current)
    x = np.log10(r_arr)
    exponent = k1 * np.exp(k2 * x) + k3 * np.exp(k4 * x)
    out = 10.0**exponent
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# profile sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MFProfileSet:
    """Scattered (current, distance, B) samples from any field solver."""

    currents: np.ndarray  # A, shape (n,)
    distances: np.ndarray  # m, shape (n,)
    values: np.ndarray  # microtesla, shape (n,)

    def __post_init__(self):
        c = np.asarray(self.currents, dtype=float)
        r = np.asarray(self.distances, dtype=float)
        b = np.asarray(self.values, dtype=float)
        if not (c.shape == r.shape == b.shape) or c.ndim != 1:
            raise ValueError("currents, distances, values must be equal-length 1-D")
        if np.any(r <= 0) or np.any(c <= 0) or np.any(b < 0):
            raise ValueError("profile samples need r > 0, I > 0, B >= 0")
        object.__setattr__(self, "currents", c)
        object.__setattr__(self, "distances", r)
        object.__setattr__(self, "values", b)

    def __len__(self) -> int:
        return self.currents.size

    def unique_currents(self) -> np.ndarray:
        return np.unique(self.currents)

    def at_current(self, current: float) -> tuple[np.ndarray, np.ndarray]:
        mask = self.currents == current
        order = np.argsort(self.distances[mask])
        return self.distances[mask][order], self.values[mask][order]


def profile_from_csv(path: str | Path) -> MFProfileSet:
    """Read an ``I_A,r_m,B_uT`` CSV."""
    path = Path(path)
    rows = []
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if [h.strip() for h in header[:3]] != ["I_A", "r_m", "B_uT"]:
            raise ParseError(f"{path.name}: expected header I_A,r_m,B_uT", line=1)
        for ln, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) < 3:
                raise ParseError(f"{path.name}: need 3 columns", line=ln)
            try:
                rows.append([float(parts[0]), float(parts[1]), float(parts[2])])
            except ValueError as exc:
                raise ParseError(f"{path.name}: {exc}", line=ln) from exc
    arr = np.array(rows, dtype=float)
    if arr.size == 0:
        raise ParseError(f"{path.name}: no samples")
    return MFProfileSet(arr[:, 0], arr[:, 1], arr[:, 2])


def profile_to_csv(profile: MFProfileSet, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("I_A,r_m,B_uT\n")
        for i, r, b in zip(profile.currents, profile.distances, profile.values):
            fh.write(f"{i:.10g},{r:.10g},{b:.10g}\n")


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def _fit_distance_profile(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Fit y = k1*exp(k2*x) + k3*exp(k4*x) for one current.

    Variable projection: scan the nonlinear pair (k2, k4) on a grid,
    solve the linear pair (k1, k3) by least squares, then polish all four
    with Levenberg-Marquardt. Deterministic by construction.
    """

    def linear_solve(k2: float, k4: float):
        basis = np.column_stack([np.exp(k2 * x), np.exp(k4 * x)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        resid = basis @ coef - y
        return coef, float(resid @ resid)

    best = None
    for k2 in np.linspace(0.2, 5.0, 25):
        for k4 in np.linspace(-3.0, -0.05, 25):
            (k1, k3), ss = linear_solve(k2, k4)
            if best is None or ss < best[1]:
                best = ((k1, k2, k3, k4), ss)
    p0 = np.array(best[0])

    def resid(p):
        return p[0] * np.exp(p[1] * x) + p[2] * np.exp(p[3] * x) - y

    sol = least_squares(resid, p0, method="lm", max_nfev=20000)
    return sol.x


def _fit_shifted_power(i_vals: np.ndarray, k_vals: np.ndarray) -> np.ndarray:
    """Fit k(I) = a * I**b + c by scanning b and polishing."""

    def linear_solve(b: float):
        basis = np.column_stack([i_vals**b, np.ones_like(i_vals)])
        coef, *_ = np.linalg.lstsq(basis, k_vals, rcond=None)
        resid = basis @ coef - k_vals
        return coef, float(resid @ resid)

    best = None
    for b in np.linspace(-1.5, 1.5, 301):
        if abs(b) < 1e-6:
            continue
        (a, c), ss = linear_solve(b)
        if best is None or ss < best[1]:
            best = ((a, b, c), ss)
    p0 = np.array(best[0])

    def resid(p):
        return p[0] * i_vals ** p[1] + p[2] - k_vals

    sol = least_squares(resid, p0, method="lm", max_nfev=20000)
    return sol.x


def fit_coefficients(
    profiles: MFProfileSet, label: str = "fit"
) -> tuple[EmissionFit, dict]:
    """Fit the 12 emission coefficients to a simulated (I, r, B) grid.

    Stage 1 fits (k1..k4) per current on log10(B) vs log10(r); stage 2
    fits the shifted power law k_i(I). Returns the fit and a quality
    report (see ``fit_quality``). Raises FitDivergence on degenerate
    grids or non-finite results.
    """
    currents = profiles.unique_currents()
    if currents.size < 3:
        raise FitDivergence(
            f"need at least 3 distinct currents, got {currents.size}", stage=1
        )
    k_samples = np.zeros((currents.size, 4))
    trace = []
    for row, current in enumerate(currents):
        r, b = profiles.at_current(current)
        if np.unique(r).size < 5:
            raise FitDivergence(
                f"need at least 5 distinct distances per current, got "
                f"{np.unique(r).size} at {current} A",
                stage=1,
            )
        if np.any(b <= 0):
            raise FitDivergence("log-space fit needs B > 0 everywhere", stage=1)
        k = _fit_distance_profile(np.log10(r), np.log10(b))
        if not np.all(np.isfinite(k)):
            raise FitDivergence(f"stage 1 diverged at {current} A", stage=1, residual_trace=trace)
        k_samples[row] = k
        trace.append((float(current), [float(v) for v in k]))

    alpha = np.zeros((3, 4))
    for i in range(4):
        a, b, c = _fit_shifted_power(currents, k_samples[:, i])
        if not (np.isfinite(a) and np.isfinite(b) and np.isfinite(c)):
            raise FitDivergence(f"stage 2 diverged on k{i + 1}", stage=2, residual_trace=trace)
        alpha[:, i] = (a, b, c)

    fit = EmissionFit(
        alpha1=tuple(alpha[0]),
        alpha2=tuple(alpha[1]),
        alpha3=tuple(alpha[2]),
        r_range=(float(profiles.distances.min()), float(profiles.distances.max())),
        i_range=(float(currents.min()), float(currents.max())),
        label=label,
    )
    return fit, fit_quality(fit, profiles)


def fit_quality(fit: EmissionFit, profiles: MFProfileSet) -> dict:
    """R^2 on log10(B), max |relative error|, and the per-point error table."""
    pred = np.array(
        [
            eval_fit(fit, i, r, force=True)
            for i, r in zip(profiles.currents, profiles.distances)
        ]
    )
    ref = profiles.values
    eps = (pred - ref) / ref
    logref = np.log10(ref)
    logpred = np.log10(pred)
    ss_res = float(np.sum((logpred - logref) ** 2))
    ss_tot = float(np.sum((logref - logref.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else -math.inf)
    table = [
        {
            "I_A": float(i),
            "r_m": float(r),
            "B_ref_uT": float(b),
            "B_fit_uT": float(p),
            "eps": float(e),
        }
        for i, r, b, p, e in zip(
            profiles.currents, profiles.distances, ref, pred, eps
        )
    ]
    return {"r_squared": r2, "max_abs_eps": float(np.max(np.abs(eps))), "points": table}


# ---------------------------------------------------------------------------
# shielding factor
# ---------------------------------------------------------------------------


def shielding_factor(reference, shielded):
    """Elementwise SF = B_unarmored / B_armored.

    Accepts scalars, arrays, or two MFProfileSet objects sampled at the
    same (I, r) locations.
    """
    if isinstance(reference, MFProfileSet) or isinstance(shielded, MFProfileSet):
        if not (isinstance(reference, MFProfileSet) and isinstance(shielded, MFProfileSet)):
            raise ShapeMismatch("mixing profile sets with bare arrays")
        if len(reference) != len(shielded):
            raise ShapeMismatch(
                f"profile lengths differ: {len(reference)} vs {len(shielded)}"
            )
        if not (
            np.allclose(reference.currents, shielded.currents)
            and np.allclose(reference.distances, shielded.distances)
        ):
            raise ShapeMismatch("profile sample locations differ")
        b0, b = reference.values, shielded.values
    else:
        b0 = np.asarray(reference, dtype=float)
        b = np.asarray(shielded, dtype=float)
        if b0.shape != b.shape:
            raise ShapeMismatch(f"shape mismatch: {b0.shape} vs {b.shape}")
    if np.any(b == 0):
        raise ZeroDivisionError("shielded field contains zeros")
    out = b0 / b
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# coefficient file I/O
# ---------------------------------------------------------------------------


def load_fit(path: str | Path) -> EmissionFit:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        return EmissionFit(
            alpha1=tuple(float(v) for v in raw["alpha1"]),
            alpha2=tuple(float(v) for v in raw["alpha2"]),
            alpha3=tuple(float(v) for v in raw["alpha3"]),
            r_range=tuple(float(v) for v in raw["validity"]["r_m"]),
            i_range=tuple(float(v) for v in raw["validity"]["I_A"]),
            label=raw.get("label", path.stem),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path.name}: invalid coefficient file: {exc}") from exc


def save_fit(fit: EmissionFit, path: str | Path) -> None:
    raw = {
        "label": fit.label,
        "validity": {"r_m": list(fit.r_range), "I_A": list(fit.i_range)},
        "alpha1": list(fit.alpha1),
        "alpha2": list(fit.alpha2),
        "alpha3": list(fit.alpha3),
    }
    Path(path).write_text(json.dumps(raw, indent=2) + "\n", encoding="utf-8")


def bundled_fit(name: str) -> EmissionFit:
    """Load one of the shipped coefficient sets.

    Known names: ``cable1-contralay``, ``cable1-unilay``.
    """
    fname = "emission_" + name.replace("-", "_") + ".json"
    path = DATA_DIR / fname
    if not path.exists():
        raise FileNotFoundError(f"no bundled coefficient set named '{name}'")
    return load_fit(path)


def bundled_profile(name: str) -> MFProfileSet:
    """Load a shipped (I, r, B) grid, e.g. ``cable1-contralay-usm``."""
    fname = "mf_profile_" + name.replace("-", "_") + ".csv"
    path = DATA_DIR / fname
    if not path.exists():
        raise FileNotFoundError(f"no bundled profile named '{name}'")
    return profile_from_csv(path)
