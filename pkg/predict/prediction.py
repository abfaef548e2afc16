"""Sampled prediction curves for comparison against computed data."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from core.errors import ValidationError
from core.zeta import zeta, zeta_logderiv, zeta_logderiv_prime
from curves.ap_table import APTable
from curves.weierstrass import WeierstrassCurve
from predict.conrey_snaith import cs_density_averaged, cs_density_integrand, cs_paircorr_prediction
from predict.kernels import kernel_gue_pc, kernel_symplectic
from predict.local_factors import rank_ratio_prediction

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PredictionCurve:
    """Values of a prediction at ascending abscissae."""

    abscissae: np.ndarray
    values: np.ndarray
    label: str
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.abscissae, dtype=np.float64)
        y = np.asarray(self.values, dtype=np.float64)
        if x.shape != y.shape:
            raise ValidationError(f"{self.label}: {x.size} abscissae but {y.size} values")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise ValidationError(f"{self.label}: abscissae must be strictly ascending")
        if not np.all(np.isfinite(y)):
            raise ValidationError(f"{self.label}: non-finite prediction values")
        object.__setattr__(self, 'abscissae', x)
        object.__setattr__(self, 'values', y)

    def __len__(self) -> int:
        return int(self.abscissae.size)

    def rows(self) -> List[tuple]:
        return [(x, y, self.label) for x, y in zip(self.abscissae.tolist(), self.values.tolist())]


def sample(f, xs: Sequence[float], label: str, **metadata) -> PredictionCurve:
    xs = np.asarray(list(xs), dtype=np.float64)
    return PredictionCurve(xs, np.array([f(x) for x in xs.tolist()]), label, metadata)


def rank_ratio_curve(curve: WeierstrassCurve, r: int, ts: Iterable[float], corrected: bool = True,
                     table: Optional[APTable] = None) -> PredictionCurve:
    kind = "local/|zeta(1+it)|^r" if corrected else "1/|zeta(1+it)|^r"
    return sample(lambda t: rank_ratio_prediction(curve, r, t, corrected, table), ts,
                  f"{curve.name} {kind}", rank=r, corrected=corrected)


def density_curve(ts: Iterable[float], d: Optional[int] = None,
                  discriminants: Optional[Sequence[int]] = None,
                  lower_terms: bool = True) -> PredictionCurve:
    """Density prediction for one discriminant or averaged over a family."""
    if discriminants is not None:
        discriminants = list(discriminants)
        return sample(lambda t: cs_density_averaged(discriminants, t, lower_terms), ts,
                      "density (family average)", family_size=len(discriminants),
                      lower_terms=lower_terms)
    if d is None:
        raise ValidationError("density curve needs d or a discriminant family")
    return sample(lambda t: cs_density_integrand(d, t, lower_terms), ts, f"density chi_{d}",
                  d=d, lower_terms=lower_terms)


def paircorr_curve(T: float, edges: Sequence[float], lower_terms: bool = True) -> PredictionCurve:
    """Expected pair counts per bin, reported at bin centres."""
    edges = np.asarray(edges, dtype=np.float64)
    centres = 0.5 * (edges[:-1] + edges[1:])
    values = [cs_paircorr_prediction(T, (a, b), lower_terms)
              for a, b in zip(edges[:-1].tolist(), edges[1:].tolist())]
    return PredictionCurve(centres, np.array(values), "pair correlation", {"T": T, "lower_terms": lower_terms})


def kernel_curve(kind: str, xs: Iterable[float]) -> PredictionCurve:
    kernels = {"symplectic": kernel_symplectic, "gue": kernel_gue_pc}
    if kind not in kernels:
        raise ValidationError(f"unknown kernel {kind!r}; known: {', '.join(kernels)}")
    xs = np.asarray(list(xs), dtype=np.float64)
    return PredictionCurve(xs, kernels[kind](xs), f"kernel {kind}")


def one_line_curves(ts: Iterable[float]) -> Dict[str, PredictionCurve]:
    """|zeta(1+it)|, |zeta(1/2+it)|, |zeta'/zeta(1+it)|, |(zeta'/zeta)'(1+it)| and 1/|zeta(1+it)|."""
    ts = [t for t in ts if t != 0]
    functions = {
        "abs_zeta_1": lambda t: abs(zeta(complex(1, t)).value),
        "abs_zeta_half": lambda t: abs(zeta(complex(0.5, t)).value),
        "abs_logderiv_1": lambda t: abs(zeta_logderiv(complex(1, t)).value),
        "abs_logderiv_prime_1": lambda t: abs(zeta_logderiv_prime(complex(1, t)).value),
        "inverse_abs_zeta_1": lambda t: 1 / abs(zeta(complex(1, t)).value),
    }
    return {name: sample(f, ts, name) for name, f in functions.items()}
