from .models import ComparisonReport as ComparisonReport
from .models import ExperimentConfig as ExperimentConfig
from .models import ExperimentMode as ExperimentMode
from .models import RunReport as RunReport
from .runner import check_delta as check_delta
from .runner import evaluate_checkpoint as evaluate_checkpoint
from .runner import load_config as load_config
from .runner import run_compare as run_compare
from .runner import run_single as run_single
from .runner import seed_streams as seed_streams
from .table import emit_table as emit_table
from .table import parse_table as parse_table
