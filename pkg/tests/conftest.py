import numpy as np
import pytest

from relayalloc.rate_model import LinkCapacityMatrix


def symmetric_exponential_caps(rng, n_relays, scale=1.0):
    """One LinkCapacityMatrix with i.i.d. exponential capacities per pair."""
    n = n_relays + 2
    iu, ju = np.triu_indices(n, 1)
    caps = np.zeros((n, n))
    v = rng.exponential(scale=scale, size=iu.size)
    caps[iu, ju] = v
    caps[ju, iu] = v
    mask = ~np.eye(n, dtype=bool)
    return LinkCapacityMatrix(n_relays=n_relays, caps=caps * mask, link_mask=mask)


def exponential_caps_batch(rng, n_relays, n_draws, scale=1.0):
    """(T, n, n) stack of symmetric i.i.d. exponential capacity matrices."""
    n = n_relays + 2
    iu, ju = np.triu_indices(n, 1)
    caps = np.zeros((n_draws, n, n))
    v = rng.exponential(scale=scale, size=(n_draws, iu.size))
    caps[:, iu, ju] = v
    caps[:, ju, iu] = v
    return caps


def caps_from_links(n_relays, links):
    """LinkCapacityMatrix from {(i, j): capacity}; unlisted links are absent."""
    n = n_relays + 2
    caps = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    for (i, j), value in links.items():
        caps[i, j] = caps[j, i] = value
        mask[i, j] = mask[j, i] = True
    return LinkCapacityMatrix(n_relays=n_relays, caps=caps, link_mask=mask)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
