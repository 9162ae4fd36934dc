"""Online models that learn market views from streaming inputs."""

from .base import OnlineViewModel
from .denfis import DenfisModel
from .lstm import LstmViewModel, lstm_cell_step
from .online import (
    AllocConfig,
    LearnerConfig,
    MarketContext,
    OnlineStep,
    hindsight_views,
    make_model,
    market_context,
    online_loop,
)
from .trader import NeuralTrader, nt_predict, softmax

__all__ = [
    "AllocConfig", "DenfisModel", "LearnerConfig", "LstmViewModel", "MarketContext",
    "NeuralTrader", "OnlineStep", "OnlineViewModel", "hindsight_views", "lstm_cell_step",
    "make_model", "market_context", "nt_predict", "online_loop", "softmax",
]
