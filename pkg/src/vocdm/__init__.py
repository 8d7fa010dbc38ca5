"""Vector OCDM over doubly selective channels: modem, CE-BEM channel, ML
detection, diversity and PAPR analysis."""

from .channel import ChannelSpec, channel_matrix, effective_channel, sample_channel
from .detect import DetectionResult, ml_detect, mmse_detect
from .diversity import data_dependent_diversity, error_matrix, order_set, pep_upper_bound
from .errors import BudgetExceededError, ConfigError, NotHermitianError, ShapeError, VocdmError
from .fresnel import dfnt_matrix, idfnt_matrix
from .modem import BPSK, PAM4, QPSK, Constellation, Kind, ModulationParams, demodulate, modulate
from .papr import instantaneous_papr, overall_papr_exhaustive, theoretical_ccdf

__version__ = "0.1.0"

__all__ = [
    "BPSK", "PAM4", "QPSK", "BudgetExceededError", "ChannelSpec", "ConfigError", "Constellation",
    "DetectionResult", "Kind", "ModulationParams", "NotHermitianError", "ShapeError", "VocdmError",
    "channel_matrix", "data_dependent_diversity", "demodulate", "dfnt_matrix", "effective_channel",
    "error_matrix", "idfnt_matrix", "instantaneous_papr", "ml_detect", "mmse_detect", "modulate",
    "order_set", "overall_papr_exhaustive", "pep_upper_bound", "sample_channel", "theoretical_ccdf",
]
