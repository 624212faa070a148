# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Logging tools for dvsim."""

import logging


def get_logger() -> logging.Logger:
    """Return the logger for dvsim.

    Library code only emits records; handlers are configured by the
    command line front end or by the application embedding dvsim.

    Returns
    -------
    :
        The requested logger.
    """
    return logging.getLogger('dvsim')
