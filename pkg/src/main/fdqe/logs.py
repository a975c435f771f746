"""
Logs

Logger setup shared by the command line and the test suite. Results go to stdout; everything logged here goes to
stderr and, optionally, to log files.
"""

import os
import sys
import logging as log

from fdqe.constants import *

VERBOSITY_LEVELS = [log.WARNING, log.INFO, log.DEBUG, TRACE]


def init_logger(verbosity: int = 0, log_dir: str = LOGS_DIRECTORY):
    """
    Configures the root logger.

    #### Parameters
    ##### Optional
    - `verbosity`: Number of -v flags given; 0 shows warnings only, 3 or more shows TRACE messages.
    - `log_dir`: Directory for the primary (INFO) and debug (TRACE) log files. Empty disables file logging.
    """
    log.addLevelName(TRACE, "TRACE") # TRACE logging level for per-restart optimizer messages

    console_log_handler = log.StreamHandler(sys.stderr)
    console_log_handler.setLevel(VERBOSITY_LEVELS[min(max(verbosity, 0), len(VERBOSITY_LEVELS) - 1)])
    handlers = [console_log_handler]

    if log_dir:
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)
        primary_log_handler = log.FileHandler(os.path.join(log_dir, PRIMARY_LOG_FILENAME), mode = "w")
        debug_log_handler = log.FileHandler(os.path.join(log_dir, DEBUG_LOG_FILENAME), mode = "w")
        primary_log_handler.setLevel(log.INFO)
        debug_log_handler.setLevel(TRACE)
        handlers += [primary_log_handler, debug_log_handler]

    # force = True so repeated CLI invocations in one process (tests) replace the old handlers
    log.basicConfig(format = LOG_FORMAT,
                    datefmt = LOG_DATE_FORMAT,
                    level = min(h.level for h in handlers),
                    handlers = handlers,
                    force = True)
