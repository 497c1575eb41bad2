import pytest

from ranlat.core import tdd_config
from ranlat.profile import ProfileDraw


@pytest.fixture
def e1():
    """T=5, d=3 (DDDUU), 0.5 ms slots, SR in every slot."""
    return tdd_config(0.5, 5, 3, 1, 0, advance_slots=1)


@pytest.fixture
def e1_gf():
    return tdd_config(0.5, 5, 3, 1, 0, advance_slots=1, access="grant-free")


@pytest.fixture
def draw():
    return ProfileDraw(l1=0.2, l2=0.2, l2p=0.3, l3=0.3, p1=0.1, p2=0.1, p3=0.01,
                       p4=0.4, p5=0.2, r1=0.45)


E1_YAML = """\
slot_duration: 0.5
dl_ul_tx_period: 5
nof_dl_slots: 3
sr_period: 1
sr_offset: 0
pucch_st_sym: 13
in_advance_submission: 1
radio_preparation_time: 0.45
"""


@pytest.fixture
def e1_file(tmp_path):
    path = tmp_path / "e1.yaml"
    path.write_text(E1_YAML)
    return path
