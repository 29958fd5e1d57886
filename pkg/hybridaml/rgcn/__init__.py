from .checkpoint import CHECKPOINT_FILE as CHECKPOINT_FILE
from .checkpoint import load_checkpoint as load_checkpoint
from .checkpoint import restore_indicators as restore_indicators
from .checkpoint import save_checkpoint as save_checkpoint
from .gradcheck import gradient_check as gradient_check
from .gradcheck import numeric_gradients as numeric_gradients
from .models import AdamState as AdamState
from .models import EpochRecord as EpochRecord
from .models import ForwardCache as ForwardCache
from .models import GradientCheckReport as GradientCheckReport
from .models import LayerParams as LayerParams
from .models import ModelCheckpoint as ModelCheckpoint
from .models import ModelConfig as ModelConfig
from .models import TrainingHistory as TrainingHistory
from .optim import adam_step as adam_step
from .training import train as train
from .utils import backward as backward
from .utils import class_weights as class_weights
from .utils import forward as forward
from .utils import glorot_bound as glorot_bound
from .utils import init_params as init_params
from .utils import loss as loss
from .utils import predict as predict
