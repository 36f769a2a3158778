from pathlib import Path

import pytest

from semadkit import extract_truth
from semadkit.nets import load_net

DATA = Path(__file__).parent / "data"

# activity letters of the motivating loan example
LOAN = {
    "A": "receive loan application",
    "B": "check credit history",
    "C": "approve application",
    "D": "reject application",
    "E": "send approval",
    "F": "send rejection",
    "G": "disburse funds",
    "H": "archive case",
}


@pytest.fixture(scope="session")
def loan_net():
    return load_net(DATA / "loan.net.json")


@pytest.fixture(scope="session")
def loan_truth(loan_net):
    return extract_truth(loan_net)
