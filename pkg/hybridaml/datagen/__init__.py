from .models import AccountRecord as AccountRecord
from .models import AccountTable as AccountTable
from .models import DatasetSummary as DatasetSummary
from .models import GenConfig as GenConfig
from .models import RiskCoefficients as RiskCoefficients
from .models import TransactionRecord as TransactionRecord
from .models import TransactionTable as TransactionTable
from .utils import calibrate_intercept as calibrate_intercept
from .utils import generate_accounts as generate_accounts
from .utils import generate_transactions as generate_transactions
from .utils import lognormal_parameters as lognormal_parameters
from .utils import read_dataset as read_dataset
from .utils import summarize_dataset as summarize_dataset
from .utils import validate_gen_config as validate_gen_config
from .utils import write_dataset as write_dataset
