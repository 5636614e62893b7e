import pytest

from hindicapt.analysis import Analyzer
from hindicapt.feedback import load_knowledge_base
from hindicapt.inventory import load_inventory

SUBJECTS = ["लड़का", "लड़की", "बच्चा", "आदमी", "माँ", "राजा", "रानी", "भालू", "डाकिया", "अध्यापक"]
OBJECTS = ["पानी", "खाना", "किताब", "कपड़ा", "फल", "दूध", "सेब", "चावल", "काग़ज़", "ख़त"]
VERBS = ["लाता है।", "देखता है।", "खाता है।", "पीता है।", "पढ़ता है।",
         "रखता है।", "लिखता है।", "माँगता है।", "ढूँढता है।", "बेचता है।"]


def sentence_bank(n: int = 100) -> list[str]:
    """Deterministic bank of simple sentences for corpus-scale tests."""
    out = []
    for i in range(n):
        s, o = SUBJECTS[i % 10], OBJECTS[(i // 10) % 10]
        v = VERBS[(i * 7 + i // 10) % 10]
        out.append(f"{s} {o} {v}")
    return out


@pytest.fixture(scope="session")
def inventory():
    return load_inventory()


@pytest.fixture(scope="session")
def kb(inventory):
    return load_knowledge_base(inventory=inventory)


@pytest.fixture(scope="session")
def analyzer(inventory, kb):
    return Analyzer(inventory=inventory, kb=kb)
