import math

import pytest

from plasmadce.config import ConfigError, load, parse_texts, preset_text


def parse(text, overrides=()):
    return parse_texts([("test.ini", text)], overrides)


def test_defaults():
    cfg = parse("")
    assert cfg.get("drive", "steps_per_period") == 200
    assert cfg.get("loss", "q") == math.inf
    assert cfg.get("drive", "formulations") == ("canonical", "instantaneous")


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match=r"test\.ini:3: unknown key 'omega_0'"):
        parse("[drive]\nn_pulses = 3\nomega_0 = 1.0\n")


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse("[drvie]\nn_pulses = 3\n")


def test_bad_value_reports_line():
    with pytest.raises(ConfigError, match=r"test\.ini:2"):
        parse("[drive]\nn_pulses = many\n")


@pytest.mark.parametrize(
    "text",
    [
        "[drive]\nsteps_per_period = 20\n",
        "[drive]\nrows_per_period = 7\n",
        "[drive]\nwaveform = table\n",
        "[loss]\nq = 0\n",
        "[atoms]\ndipole = 1e-26\n",
        "[output]\nplot = cubic\n",
    ],
)
def test_invalid_scenarios(text):
    with pytest.raises(ConfigError):
        parse(text)


def test_overrides():
    cfg = parse("[drive]\nn_pulses = 3\n", ["drive.n_pulses=7", "loss.q = 1e4"])
    assert cfg.get("drive", "n_pulses") == 7
    assert cfg.get("loss", "q") == 1e4


@pytest.mark.parametrize("item", ["drive.n_pulses", "nosection=1", "drive.bogus=1", "nope.key=1"])
def test_bad_overrides(item):
    with pytest.raises(ConfigError):
        parse("", [item])


def test_layers_later_wins():
    cfg = parse_texts([("a", "[drive]\nn_pulses = 3\n"), ("b", "[drive]\nn_pulses = 5\n")])
    assert cfg.get("drive", "n_pulses") == 5


def test_echo_round_trip():
    cfg = load(preset="paper-nominal", overrides=["drive.detuning=0.0,0.01"])
    again = parse(cfg.echo())
    assert again == cfg
    assert again.digest() == cfg.digest()


def test_digest_ignores_ordering_and_comments():
    a = parse("[drive]\nn_pulses = 3\ntwo_g = 0.01j\n[loss]\nq = 100\n")
    b = parse("# comment\n[loss]\nq = 1e2\n[drive]\ntwo_g = 0.01j ; inline\nn_pulses = 3\n")
    assert a.digest() == b.digest()
    assert a.digest() != parse("[drive]\nn_pulses = 4\n").digest()


def test_sweep_axes():
    cfg = parse(
        "[sweep:drive.detuning]\nstart = -0.01\nstop = 0.01\ncount = 3\n"
        "[sweep:loss.q]\nvalues = 1e3, 1e6\nscale = log\n"
    )
    axes = {a.parameter: a.values for a in cfg.sweeps}
    assert axes["drive.detuning"] == (-0.01, 0.0, 0.01)
    assert axes["loss.q"] == (1e3, 1e6)


def test_sweep_log_spacing():
    cfg = parse("[sweep:loss.q]\nstart = 1e2\nstop = 1e4\ncount = 3\nscale = log\n")
    assert cfg.sweeps[0].values == (100.0, 1000.0, 10000.0)


@pytest.mark.parametrize(
    "text",
    [
        "[sweep:drive.bogus]\nvalues = 1\n",
        "[sweep:drive.n_pulses]\ncount = 3\n",
        "[sweep:drive.detuning]\nstart = 0\nstop = 1\ncount = 0\n",
        "[sweep:drive.detuning]\nvalues = 1\nextra = 2\n",
    ],
)
def test_bad_sweeps(text):
    with pytest.raises(ConfigError):
        parse(text)


@pytest.mark.parametrize("name", ["fig1", "fig2", "paper-nominal"])
def test_presets_parse(name):
    assert "Provenance" in preset_text(name)
    load(preset=name)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load(preset="fig3")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load(config=str(tmp_path / "missing.ini"))
