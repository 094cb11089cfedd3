"""
Comparison of predicted flip fractions with measured ones.

Statistics are computed on paired series ordered by current, in log space by
default so the exponential dependence on current does not dominate.
"""

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from scipy import stats
from scipy.optimize import minimize_scalar

from .atomkit import THETA_N_MEAN, AtomParams, ApparatusParams, potassium39
from .errors import DataError, DomainError, NumericError
from .flipmodel import induction_scale, predict
from .metrics import metrics_collector
from .models import FitReport, FlipModel

logger = structlog.get_logger(__name__)

HEADER = ("current_A", "flip_fraction")
DEFAULT_DATASET = Path(__file__).parent / "data" / "frisch_segre_1933_digitized.csv"
FIT_XATOL = 1e-6


@dataclass(frozen=True)
class Dataset:
    """Measured flip fractions, ordered by increasing current."""
    currents: Tuple[float, ...]
    fractions: Tuple[float, ...]
    provenance: str = ""

    def __post_init__(self):
        if len(self.currents) != len(self.fractions):
            raise DataError("currents and fractions differ in length")
        for index, (current, fraction) in enumerate(zip(self.currents, self.fractions)):
            if not current > 0.0:
                raise DataError("current must be positive", details={"row": index, "current": current})
            if not 0.0 < fraction < 1.0:
                raise DataError("flip fraction must lie in (0, 1)",
                                details={"row": index, "fraction": fraction})
        if any(b <= a for a, b in zip(self.currents, self.currents[1:])):
            raise DataError("currents must be strictly increasing")

    def __len__(self) -> int:
        return len(self.currents)

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.currents), np.asarray(self.fractions)


def _parse(lines, source_name: str) -> Dataset:
    provenance = []
    reader_lines = []
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not reader_lines and stripped.startswith("#"):
            provenance.append(stripped.lstrip("#").strip())
            continue
        if stripped:
            reader_lines.append((number, stripped))

    if not reader_lines:
        raise DataError("dataset is empty", details={"source": source_name})
    header_line, header = reader_lines[0]
    if tuple(cell.strip() for cell in next(csv.reader([header]))) != HEADER:
        raise DataError(f"header must be {','.join(HEADER)}", line=header_line)

    previous = 0.0
    currents, fractions = [], []
    for number, text in reader_lines[1:]:
        cells = next(csv.reader([text]))
        if len(cells) != 2:
            raise DataError("expected two comma-separated values", line=number)
        try:
            current, fraction = float(cells[0]), float(cells[1])
        except ValueError:
            raise DataError("values must be decimal numbers", line=number)
        if not (math.isfinite(current) and current > 0.0):
            raise DataError("current must be positive", line=number, details={"current": current})
        if current <= previous:
            raise DataError("currents must be strictly increasing", line=number)
        if not 0.0 < fraction < 1.0:
            raise DataError("flip fraction must lie in (0, 1)", line=number,
                            details={"fraction": fraction})
        previous = current
        currents.append(current)
        fractions.append(fraction)

    return Dataset(tuple(currents), tuple(fractions), " ".join(provenance) or source_name)


def load_dataset(source: Union[str, Path, io.TextIOBase, None] = None) -> Dataset:
    """
    Read a ``current_A,flip_fraction`` CSV.

    Leading ``#`` lines are kept as the provenance label. ``source`` may be a
    path or an open text stream; the shipped reconstruction is the default.

    Raises:
        DataError: naming the offending line
    """
    if source is None:
        source = DEFAULT_DATASET
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            with open(path, encoding="utf-8") as handle:
                dataset = _parse(handle.readlines(), path.name)
        except OSError as e:
            raise DataError(f"cannot read dataset: {e}", details={"path": str(path)})
    else:
        dataset = _parse(source.readlines(), "<stream>")
    logger.info("Dataset loaded", rows=len(dataset), provenance=dataset.provenance)
    return dataset


def write_dataset(dataset: Dataset, path: Union[str, Path]):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if dataset.provenance:
            handle.write(f"# {dataset.provenance}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for current, fraction in zip(dataset.currents, dataset.fractions):
            writer.writerow([format(current, ".12g"), format(fraction, ".12g")])


def _paired(pred: Sequence[float], obs: Sequence[float], log_space: bool) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=float)
    obs = np.asarray(obs, dtype=float)
    if pred.shape != obs.shape or pred.ndim != 1:
        raise DomainError("series must be 1-D and of equal length",
                          {"pred": pred.shape, "obs": obs.shape})
    if pred.size < 3:
        raise DomainError("at least three pairs are required", {"n": int(pred.size)})
    if log_space:
        if np.any(pred <= 0.0) or np.any(obs <= 0.0):
            raise DomainError("log-space statistics need strictly positive values")
        return np.log(pred), np.log(obs)
    return pred, obs


def r_squared(pred: Sequence[float], obs: Sequence[float], log_space: bool = True) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot; negative for poor models."""
    pred, obs = _paired(pred, obs, log_space)
    ss_tot = float(np.sum((obs - obs.mean()) ** 2))
    if ss_tot == 0.0:
        raise DomainError("observations have zero variance")
    ss_res = float(np.sum((obs - pred) ** 2))
    return 1.0 - ss_res / ss_tot


def pearson_r(pred: Sequence[float], obs: Sequence[float], log_space: bool = True) -> float:
    pred, obs = _paired(pred, obs, log_space)
    if np.ptp(pred) == 0.0 or np.ptp(obs) == 0.0:
        raise DomainError("correlation undefined for a constant series")
    return float(np.clip(np.corrcoef(pred, obs)[0, 1], -1.0, 1.0))


def p_value(pred: Sequence[float], obs: Sequence[float], log_space: bool = True) -> float:
    """
    Two-sided p-value of the Pearson correlation against zero correlation.

    Uses the Student-t statistic with n - 2 degrees of freedom; a perfect
    correlation returns 0.
    """
    r = pearson_r(pred, obs, log_space)
    n = len(pred)
    return p_value_from_r(r, n)


def p_value_from_r(r: float, n: int) -> float:
    if n < 3:
        raise DomainError("at least three pairs are required", {"n": n})
    if abs(r) >= 1.0:
        return 0.0
    t_stat = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(min(max(2.0 * stats.t.sf(abs(t_stat), n - 2), 0.0), 1.0))


def stats_for_model(dataset: Dataset, model: FlipModel = FlipModel.W4,
                    atom: Optional[AtomParams] = None,
                    apparatus: Optional[ApparatusParams] = None,
                    theta_n_mean: float = THETA_N_MEAN, k_i: float = 0.0) -> FitReport:
    """Goodness of fit of one flip model against the dataset."""
    model = FlipModel(model)
    currents, observed = dataset.as_arrays()
    predicted = np.array([predict(model, float(i), atom, apparatus, theta_n_mean, k_i)
                          for i in currents])
    report = FitReport(
        model=model.value,
        r_squared=r_squared(predicted, observed, log_space=True),
        r_squared_linear=r_squared(predicted, observed, log_space=False),
        p_value=p_value(predicted, observed, log_space=True),
        p_value_linear=p_value(predicted, observed, log_space=False),
        n=len(dataset),
        provenance=dataset.provenance,
    )
    logger.info("Model statistics computed", model=model.value, r_squared=report.r_squared,
                p_value=report.p_value, n=report.n)
    return report


def fit_ki(dataset: Dataset, atom: Optional[AtomParams] = None,
           apparatus: Optional[ApparatusParams] = None,
           theta_n_mean: float = THETA_N_MEAN, c_ri: Optional[float] = None) -> FitReport:
    """
    Fit the induction coefficient c_ri with all other coefficients predicted.

    Least squares on log W_cqd over c_ri >= 0; the induction factor follows as
    k_i = c_ri / scale and the collapse cycles as N_c = 1 / (2 pi k_i). Passing
    ``c_ri`` skips the fit and reports statistics at that value.

    Raises:
        DomainError: for fewer than four rows
        NumericError: if the bounded search does not converge
    """
    if len(dataset) < 4:
        raise DomainError("at least four rows are required to fit", {"n": len(dataset)})
    atom = atom or potassium39()
    apparatus = apparatus or ApparatusParams()
    currents, observed = dataset.as_arrays()
    log_w4 = np.log([predict(FlipModel.W4, float(i), atom, apparatus, theta_n_mean)
                     for i in currents])
    log_obs = np.log(observed)

    def sse(value: float) -> float:
        return float(np.sum((log_w4 - value * currents - log_obs) ** 2))

    if c_ri is None:
        # Bracket from the unconstrained normal equation
        guess = float(np.sum(currents * (log_w4 - log_obs)) / np.sum(currents ** 2))
        upper = max(10.0, 4.0 * abs(guess))
        result = minimize_scalar(sse, bounds=(0.0, upper), method="bounded",
                                 options={"xatol": FIT_XATOL})
        metrics_collector.record_fit(bool(result.success))
        if not result.success:
            logger.error("Induction fit failed", bracket=(0.0, upper), message=result.message)
            raise NumericError("induction coefficient fit did not converge",
                               {"lower": 0.0, "upper": upper, "message": str(result.message)})
        c_ri = float(result.x)
    elif c_ri < 0.0:
        raise DomainError("c_ri must be non-negative", {"c_ri": c_ri})

    k_i = c_ri / induction_scale(atom, apparatus)
    predicted = np.exp(log_w4 - c_ri * currents)
    report = FitReport(
        model=FlipModel.WCQD.value,
        r_squared=r_squared(predicted, observed, log_space=True),
        r_squared_linear=r_squared(predicted, observed, log_space=False),
        p_value=p_value(predicted, observed, log_space=True),
        p_value_linear=p_value(predicted, observed, log_space=False),
        n=len(dataset),
        c_ri_hat=c_ri,
        k_i_hat=k_i,
        n_c_hat=1.0 / (2.0 * math.pi * k_i) if k_i > 0.0 else None,
        provenance=dataset.provenance,
    )
    logger.info("Induction coefficient fitted", c_ri=c_ri, k_i=k_i, n_c=report.n_c_hat,
                r_squared=report.r_squared)
    return report
