"""Run-configuration parsing tests."""

import pytest

from hbckit.model import CAPACITIVE_RETURN, COMMON_GROUND, DIFFERENTIAL
from hbckit.runconfig import ConfigError, parse_config


class TestDefaults:
    def test_empty_config_is_probe_10x_default_band(self):
        run = parse_config("")
        assert run.channel.ground_regime == CAPACITIVE_RETURN
        assert run.channel.load.name == "probe-10x"
        assert run.frequencies[0] == pytest.approx(10e3)
        assert run.frequencies[-1] == pytest.approx(1e6)
        assert len(run.frequencies) == 101
        assert run.chain is None and run.tol_db is None


class TestChannelSection:
    def test_full_channel(self):
        run = parse_config(
            """
            [channel]
            regime = common-ground
            excitation = differential
            termination = differential
            load = probe-1x
            """
        )
        assert run.channel.ground_regime == COMMON_GROUND
        assert run.channel.excitation == DIFFERENTIAL
        assert run.channel.load.name == "probe-1x"
        assert run.channel.params.c_l == 79e-12

    def test_disallowed_combo_is_config_error(self):
        with pytest.raises(ConfigError):
            parse_config("[channel]\nregime = capacitive-return\nexcitation = differential\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("[channel]\nmode = fast\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="section"):
            parse_config("[channels]\nregime = common-ground\n")

    def test_unknown_preset_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[channel]\nload = probe-100x\n")


class TestLoadSection:
    def test_custom_load(self):
        run = parse_config(
            """
            [channel]
            load = custom
            [load]
            r_l = 1MΩ
            c_l = 47pF
            """
        )
        assert run.channel.load.r_l == 1e6
        assert run.channel.load.c_l == 47e-12
        assert run.channel.params.c_l == 47e-12

    def test_preset_override_becomes_custom(self):
        run = parse_config("[load]\nc_l = 20pF\n")
        assert run.channel.load.name == "custom"
        assert run.channel.load.c_l == 20e-12
        assert run.channel.load.r_l == 10e6  # inherited from probe-10x

    def test_custom_requires_both_values(self):
        with pytest.raises(ConfigError, match="custom"):
            parse_config("[channel]\nload = custom\n[load]\nr_l = 1Mohm\n")

    def test_bad_unit_names_key(self):
        with pytest.raises(ConfigError, match=r"c_l"):
            parse_config("[load]\nc_l = 13qF\n")

    def test_wrong_unit_dimension(self):
        with pytest.raises(ConfigError):
            parse_config("[load]\nr_l = 10MHz\n")


class TestModelSection:
    def test_parameter_override(self):
        run = parse_config("[model]\nr_s = 10kohm\nc_ret_rx = 3pF\n")
        assert run.channel.params.r_s == 10e3
        assert run.channel.params.c_ret_rx == 3e-12

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError, match="c_xyz"):
            parse_config("[model]\nc_xyz = 1pF\n")

    def test_nonpositive_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[model]\nr_skin = 0\n")


class TestSweepSection:
    def test_grid(self):
        run = parse_config("[sweep]\nf_start = 1kHz\nf_stop = 100kHz\npoints_per_decade = 10\n")
        assert run.frequencies[0] == pytest.approx(1e3)
        assert run.frequencies[-1] == pytest.approx(100e3)
        assert len(run.frequencies) == 21

    def test_inverted_band(self):
        with pytest.raises(ConfigError):
            parse_config("[sweep]\nf_start = 1MHz\nf_stop = 10kHz\n")


class TestChainSection:
    def test_stages_in_order(self):
        run = parse_config("[chain]\nstage1 = gain 12\nstage2 = highpass 5kHz\n")
        assert len(run.chain.stages) == 2
        assert run.chain.stages[0].gain == 12.0
        assert run.chain.stages[1].corner == 5e3

    def test_verbose_kind_names(self):
        run = parse_config(
            "[chain]\nstage1 = flat-gain 2\nstage2 = single-pole-highpass 1kHz\n"
        )
        assert run.chain.stages[1].corner == 1e3

    def test_unknown_stage_kind(self):
        with pytest.raises(ConfigError, match="stage1"):
            parse_config("[chain]\nstage1 = notch 1kHz\n")

    def test_empty_chain_section(self):
        with pytest.raises(ConfigError):
            parse_config("[chain]\n")


class TestCompareSection:
    def test_tolerance(self):
        assert parse_config("[compare]\ntol_db = 3\n").tol_db == 3.0

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_config("[compare]\ntolerance = 3\n")


class TestSyntax:
    def test_syntax_error_reported(self):
        with pytest.raises(ConfigError, match="syntax"):
            parse_config("not an ini file at all\n")
