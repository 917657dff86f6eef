import os
import shutil

import pytest


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("QPUR_CLI") or shutil.which("qpur")
    if not path:
        pytest.skip("qpur executable not found (set QPUR_CLI)")
    return path
