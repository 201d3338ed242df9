"""Tests for particle-labelled configurations."""

import pytest

from arw_fixation.core.errors import OddCycleError
from arw_fixation.core.schema import SLEEPY, Active, Configuration
from arw_fixation.schemes.supercritical.labels import init_labels


def test_expands_site_counts_into_records():
    """Active(3) at a site becomes three active records there."""
    labels = init_labels(Configuration.from_counts([0, 3, 0, 0]))
    assert labels.position == [1, 1, 1]
    assert labels.at[1] == [0, 1, 2]
    assert not any(labels.asleep)
    assert labels.particle_count == 3


def test_projection_round_trips():
    """Projecting the records gives back the original configuration."""
    config = Configuration.from_sites([Active(3), SLEEPY, Active(0), Active(1)])
    labels = init_labels(config)
    assert labels.particle_count == config.particle_total == 5
    assert labels.project() == config
    assert labels.site_view == config


def test_non_pole_particles_start_as_x():
    """Initial labels follow the Step A convention."""
    labels = init_labels(Configuration.from_counts([2, 1, 1, 1]))
    assert labels.poles == (0, 2)
    assert labels.is_x == [False, False, True, False, True]


def test_relabel_by_site():
    """Only particles on the given sites become X."""
    labels = init_labels(Configuration.from_counts([2, 1, 1, 1]))
    labels.relabel([0])
    assert labels.is_x == [True, True, False, False, False]


def test_rejects_odd_cycle():
    """Antipodal poles need an even cycle."""
    with pytest.raises(OddCycleError, match="even cycle"):
        init_labels(Configuration.from_counts([1, 0, 0]))


def test_site_view_is_a_copy():
    """Mutating the labelled state leaves the input untouched."""
    config = Configuration.from_counts([1, 1, 0, 0])
    labels = init_labels(config)
    labels.site_view.active[0] = 5
    assert config.active[0] == 1
