from dmala_mimo.utils.ConfigUtils import ConfigUtils
from dmala_mimo.utils.RngUtils import RngUtils
from dmala_mimo.utils.PoolUtils import PoolUtils
from dmala_mimo.utils.OutputUtils import OutputUtils
from dmala_mimo.components.ConstellationUtils import ConstellationUtils
from dmala_mimo.components.ChannelUtils import ChannelUtils
from dmala_mimo.components.ProposalUtils import ProposalUtils
from dmala_mimo.components.DmalaUtils import DmalaUtils
from dmala_mimo.components.LlrUtils import LlrUtils
from dmala_mimo.components.BaselineUtils import BaselineUtils
from dmala_mimo.components.OracleUtils import OracleUtils
from dmala_mimo.controllers.ExperimentDriver import ExperimentDriver
from dmala_mimo.controllers.ExperimentRunner import ExperimentRunner
from dmala_mimo.exceptions.DmalaError import DmalaError
from dmala_mimo.models.DetectionInstance import ChannelSpec, DetectionInstance
from dmala_mimo.models.ExperimentConfig import ExperimentConfig
from dmala_mimo.models.SamplerConfig import BaselineConfig, SamplerConfig

__version__ = ConfigUtils.get_version()

__all__ = [
    "ConfigUtils",
    "RngUtils",
    "PoolUtils",
    "OutputUtils",
    "ConstellationUtils",
    "ChannelUtils",
    "ProposalUtils",
    "DmalaUtils",
    "LlrUtils",
    "BaselineUtils",
    "OracleUtils",
    "ExperimentDriver",
    "ExperimentRunner",
    "DmalaError",
    "ChannelSpec",
    "DetectionInstance",
    "ExperimentConfig",
    "BaselineConfig",
    "SamplerConfig",
]
