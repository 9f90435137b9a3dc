import numpy as np
import pytest
from hypothesis import strategies as st

from bmtm.suites import random_tree

FIG_NEWICK = "((1:9.0,2:0.0):4.0,(3:0.0,4:16.0):16.0)0:0.0;"
FIG_X = (-5.0, -2.0, 4.0, 8.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def trees(draw, min_d=1, max_d=7):
    d = draw(st.integers(min_d, max_d))
    seed = draw(st.integers(0, 2**32 - 1))
    p = draw(st.sampled_from([0.0, 0.5]))
    return random_tree(d, np.random.default_rng(seed), p_multi=p)


@st.composite
def tree_and_data(draw, min_d=1, max_d=7):
    tree = draw(trees(min_d, max_d))
    seed = draw(st.integers(0, 2**32 - 1))
    x = np.random.default_rng(seed).standard_normal(tree.d)
    return tree, x
