"""HTTP service exposing masked-LM and classifier models as black-box
energy and proposal experts over the two-endpoint wire protocol."""

from .app import create_app
from .config import ServedExpert, build_registry, load_server_config
from .experts import DiscriminatorEnergy, EchoExpert, MaskedConditional, MaskedLMEnergy
from .tinybert import build_demo

__version__ = "0.1.0"
