"""Synthetic and hybrid AML transaction data with a from-scratch RGCN"""

__version__ = "0.1.0"

from .datagen import GenConfig as GenConfig
from .datagen import generate_accounts as generate_accounts
from .datagen import generate_transactions as generate_transactions
from .enrich import load_country_indicators as load_country_indicators
from .enrich import normalize_indicators as normalize_indicators
from .exceptions import HybridAMLError as HybridAMLError
from .graph import FeatureMode as FeatureMode
from .graph import RelGraph as RelGraph
from .graph import build_graph as build_graph
from .metrics import MetricsReport as MetricsReport
from .metrics import evaluate_predictions as evaluate_predictions
from .rgcn import ModelConfig as ModelConfig
from .rgcn import predict as predict
from .rgcn import train as train
