from .models import INDICATOR_COLUMNS as INDICATOR_COLUMNS
from .models import CountryFeatures as CountryFeatures
from .models import CountryIndicatorRow as CountryIndicatorRow
from .models import JoinPolicy as JoinPolicy
from .models import NormalizationConfig as NormalizationConfig
from .models import NormalizationMethod as NormalizationMethod
from .models import NormalizedIndicators as NormalizedIndicators
from .utils import DEFAULT_INDICATORS_PATH as DEFAULT_INDICATORS_PATH
from .utils import attach_country_features as attach_country_features
from .utils import load_country_indicators as load_country_indicators
from .utils import normalize_indicators as normalize_indicators
from .utils import standardize_columns as standardize_columns
