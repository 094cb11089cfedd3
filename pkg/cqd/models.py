from pydantic import BaseModel, Field
from typing import Optional, Dict, Any, List
from enum import Enum


class KappaChoice(str, Enum):
    TOPHAT_TORQUE = "tophat-torque"
    GAUSSIAN_TORQUE = "gaussian-torque"
    TABULATED_TORQUE = "tabulated-torque"
    TOPHAT_SELF = "tophat-self"
    GAUSSIAN_SELF = "gaussian-self"
    TABULATED_SELF = "tabulated-self"


class DensityKind(str, Enum):
    GAUSSIAN = "gaussian"
    TABULATED = "tabulated"
    TOPHAT = "tophat"


class Physics(str, Enum):
    BLOCH = "bloch"
    LLG = "llg"
    CQD = "cqd"


class DistributionKind(str, Enum):
    ISOTROPIC = "isotropic"
    HEART = "heart"
    HEART_INVERTED = "heart_inverted"
    CUSTOM = "custom"


class FlipModel(str, Enum):
    WM = "wm"
    RABI = "rabi"
    W1 = "w1"
    W2 = "w2"
    W3 = "w3"
    W4 = "w4"
    WCQD = "wcqd"
    WR = "wr"
    DIRECT = "direct"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


class MCEstimate(BaseModel):
    """Monte Carlo estimate of a probability with its binomial standard error."""
    estimate: float
    stderr: float
    n: int
    analytic: Optional[float] = None

    def within(self, value: float, sigmas: float = 3.0) -> bool:
        # Zero stderr happens at exact 0/1 outcomes
        if self.stderr == 0.0:
            return abs(self.estimate - value) <= 1.0 / self.n
        return abs(self.estimate - value) <= sigmas * self.stderr


class FlipCurveRow(BaseModel):
    """One current of the flip-fraction scan."""
    current: float
    k_m: float
    k0: float
    k1: float
    f_r1: float
    W_m: float
    W_rabi: float
    W1: float
    W2: float
    W3: float
    W4: float
    W_cqd: float
    W_R: float
    W_direct: float


class FitReport(BaseModel):
    model_config = {"protected_namespaces": ()}

    model: str
    r_squared: float
    r_squared_linear: float
    p_value: float = Field(ge=0.0, le=1.0)
    p_value_linear: float = Field(ge=0.0, le=1.0)
    n: int
    c_ri_hat: Optional[float] = None
    k_i_hat: Optional[float] = None
    n_c_hat: Optional[float] = None
    provenance: str = ""


class MeasurementRecord(BaseModel):
    """Sequential z-then-x measurement moments in units of hbar/2."""
    theta_ez: float
    phi_ez: float
    s_y_exp: float
    delta_sz: float
    delta_sx: float = Field(ge=0.0, le=1.0)
    residual: float

    @property
    def inequality_holds(self) -> bool:
        return self.delta_sz * self.delta_sx >= abs(self.s_y_exp) - 1e-12


class TwoStageResult(BaseModel):
    alpha: float
    p_cqd: float
    p_qm: float
    ratio: float
    ratio_closed_form: float
    mc: Optional[MCEstimate] = None


class EntangleSummary(BaseModel):
    n: int
    correlated: bool = False
    p_branch1_plus: float
    stderr: float
    prediction_holds_fraction: float
    undetermined: int


class VerificationSummary(BaseModel):
    passed: bool
    checks: List[Dict[str, Any]]
