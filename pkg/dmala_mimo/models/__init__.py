from dmala_mimo.models.Constellation import Constellation
from dmala_mimo.models.DetectionInstance import ChannelSpec, DetectionInstance
from dmala_mimo.models.ExperimentConfig import ExperimentConfig, ResultRecord
from dmala_mimo.models.OracleTables import PosteriorTable, StateSpace, TransitionMatrix
from dmala_mimo.models.SampleList import LlrVector, SampleList
from dmala_mimo.models.SamplerConfig import (
    BaselineConfig,
    ChainState,
    ChainTrace,
    Preconditioner,
    ProposalTable,
    SamplerConfig,
)

__all__ = [
    "Constellation",
    "ChannelSpec",
    "DetectionInstance",
    "ExperimentConfig",
    "ResultRecord",
    "PosteriorTable",
    "StateSpace",
    "TransitionMatrix",
    "LlrVector",
    "SampleList",
    "BaselineConfig",
    "ChainState",
    "ChainTrace",
    "Preconditioner",
    "ProposalTable",
    "SamplerConfig",
]
