import logging

logger = logging.getLogger("hybridaml")
