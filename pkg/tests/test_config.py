import numpy as np
import pytest

from oddr.config import (
    DefenseConfig,
    RngStream,
    derive_stream,
    parse_config_text,
    validate_config,
)
from oddr.errors import ConfigError


def test_paper_operating_point_is_valid():
    cfg = DefenseConfig(
        kernel_size=20,
        stride=10,
        confidence=0.8,
        info_fraction=0.8,
        trees=100,
        subsample_frac=0.3,
        min_pts=20,
        mask_size=50,
        seed=1,
    )
    assert validate_config(cfg) == cfg


def test_defaults_match_operating_point():
    cfg = DefenseConfig()
    assert (cfg.kernel_size, cfg.stride) == (20, 10)
    assert (cfg.confidence, cfg.mask_size, cfg.info_fraction) == (0.8, 50, 0.8)
    assert (cfg.trees, cfg.subsample_frac, cfg.min_pts) == (100, 0.3, 20)


def test_confidence_boundary_excluded():
    with pytest.raises(ConfigError) as err:
        validate_config(DefenseConfig(confidence=0.0))
    assert [v.field for v in err.value.violations] == ["c"]


def test_stride_exceeding_kernel_rejected():
    with pytest.raises(ConfigError) as err:
        validate_config(DefenseConfig(stride=25, kernel_size=20))
    assert [v.field for v in err.value.violations] == ["str"]


def test_all_violations_reported_at_once():
    with pytest.raises(ConfigError) as err:
        validate_config(DefenseConfig(confidence=1.5, info_fraction=0.0, trees=0, min_pts=0))
    fields = {v.field for v in err.value.violations}
    assert fields == {"c", "inf", "trees", "min_pts"}


def test_validation_is_idempotent():
    cfg = DefenseConfig(seed=42)
    assert validate_config(validate_config(cfg)) == validate_config(cfg)


def test_parse_applies_defaults_and_comments():
    cfg = parse_config_text(
        """
        # operating point
        k = 20
        str = 10   # stride
        c = 0.85
        """
    )
    assert cfg.kernel_size == 20
    assert cfg.confidence == 0.85
    assert cfg.trees == 100  # default fills the gap


def test_parse_all_keys():
    cfg = parse_config_text(
        "k=24\nstr=12\nc=0.9\nd=40\ninf=0.75\ntrees=500\nsubsample_frac=0.25\nmin_pts=25\nseed=9\n"
    )
    assert cfg == DefenseConfig(24, 12, 0.9, 40, 0.75, 500, 0.25, 25, 9)


def test_parse_rejects_unknown_key():
    with pytest.raises(ConfigError) as err:
        parse_config_text("kernel = 20\n")
    assert err.value.violations[0].field == "kernel"


def test_parse_rejects_bad_value_and_missing_equals():
    with pytest.raises(ConfigError):
        parse_config_text("k = twenty\n")
    with pytest.raises(ConfigError):
        parse_config_text("k 20\n")


def test_parse_rejects_out_of_range_value():
    with pytest.raises(ConfigError):
        parse_config_text("c = 1.5\n")


def test_derive_stream_is_deterministic():
    a = derive_stream(1, 0).generator().random(16)
    b = derive_stream(1, 0).generator().random(16)
    assert np.array_equal(a, b)


def test_derive_stream_distinct_indices_differ():
    a = derive_stream(1, 0).generator().random(16)
    b = derive_stream(1, 1).generator().random(16)
    assert not np.array_equal(a, b)


def test_derive_stream_distinct_seeds_differ():
    a = derive_stream(1, 0).generator().random(16)
    b = derive_stream(2, 0).generator().random(16)
    assert not np.array_equal(a, b)


def test_child_streams_are_nested_and_reproducible():
    root = RngStream(5)
    first = root.child(3).generator().random(8)
    again = RngStream(5).child(3).generator().random(8)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, root.child(4).generator().random(8))
