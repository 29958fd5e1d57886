from .models import RELATIONS as RELATIONS
from .models import REVERSE as REVERSE
from .models import Aggregation as Aggregation
from .models import FeatureMode as FeatureMode
from .models import GraphSummary as GraphSummary
from .models import RelGraph as RelGraph
from .models import SplitConfig as SplitConfig
from .models import SplitMasks as SplitMasks
from .models import csr_from_edges as csr_from_edges
from .utils import build_graph as build_graph
from .utils import degree_table as degree_table
from .utils import graph_summary as graph_summary
from .utils import stratified_split as stratified_split
from .utils import write_graph_summary as write_graph_summary
