# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors

"""Tests of package integrity."""

import dvsim as pkg
from dvsim.types import NumQubits


def test_has_version():
    assert hasattr(pkg, '__version__')


def test_providers_build_a_pipeline():
    workflow = pkg.DistributedRunWorkflow()
    workflow[NumQubits] = 3
    assert workflow.get(pkg.io.RunReport) is not None
    assert set(pkg.providers) == set(pkg.workflow.providers)


# Run by CI package checks without pytest installed.
if __name__ == '__main__':
    test_has_version()
