"""Shared hypothesis strategies for small real-amplitude number states."""

import numpy as np
from hypothesis import strategies as st

from macrocert.number_states import MixtureEnsemble, NumberState

_amp = st.floats(-1.0, 1.0, allow_nan=False).filter(lambda x: abs(x) > 1e-3)


@st.composite
def number_states(draw, max_offset=6, max_width=8):
    offset = draw(st.integers(0, max_offset))
    amps = draw(st.lists(_amp, min_size=1, max_size=max_width))
    return NumberState.from_unnormalized(offset, np.array(amps))


@st.composite
def mixtures(draw, max_parts=3):
    k = draw(st.integers(1, max_parts))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k))
    total = sum(raw)
    states = [draw(number_states()) for _ in range(k)]
    return MixtureEnsemble(tuple((w / total, s) for w, s in zip(raw, states)))
