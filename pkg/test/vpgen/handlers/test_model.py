import json

import pytest
from pytest import mark, param

from test.base import BaseTest
from vpgen.handlers.model import (
    DEFAULT_WIDTHS,
    ColdDatumConfig,
    ConfigError,
    ExperimentConfig,
    ExperimentKind,
    ShellDatumConfig,
    load_config,
    parse_config,
    save_config,
)
from vpgen.scales.model import ColdDatum, ShellDatum


class ParseConfigTests(BaseTest):
    def test__parse_config__materializes_defaults(self):
        config = parse_config({"kind": "sweep"})

        self.assertEqual(config.kind, ExperimentKind.SWEEP)
        self.assertIsInstance(config.datum, ColdDatumConfig)
        self.assertEqual(config.widths, DEFAULT_WIDTHS)
        self.assertEqual(config.t_star, pytest.approx(0.75 * config.T))

    def test__parse_config__explicit_t_star_is_kept(self):
        self.assertEqual(parse_config({"kind": "sweep", "T": 1.0, "t_star": 0.5}).t_star, 0.5)

    def test__parse_config__shell_datum_by_variant(self):
        config = parse_config(
            {
                "kind": "limit",
                "datum": {"variant": "shell", "shells": [{"radius": 1.0, "mass": 0.5}]},
            }
        )

        self.assertIsInstance(config.datum, ShellDatumConfig)
        datum = config.to_datum()
        self.assertIsInstance(datum, ShellDatum)
        self.assertEqual(datum.shells[0].radius, 1.0)

    def test__to_sweep_spec__carries_run_parameters(self):
        config = parse_config(
            {"kind": "sweep", "widths": [0.5, 0.25], "n0": 300, "seed": 7, "gamma": -1}
        )

        spec = config.to_sweep_spec()

        self.assertEqual(spec.widths, (0.5, 0.25))
        self.assertEqual(spec.reference_width, 0.5)
        self.assertEqual(spec.n0, 300)
        self.assertEqual(spec.seed, 7)
        self.assertIsInstance(spec.datum, ColdDatum)
        self.assertEqual(spec.datum.gamma, -1)

    def test__to_sweep_spec__width_override_keeps_reference(self):
        config = parse_config({"kind": "run", "widths": [0.5, 0.25]})

        spec = config.to_sweep_spec(widths=[0.25])

        self.assertEqual(spec.widths, (0.25,))
        self.assertEqual(spec.reference_width, 0.5)


@mark.parametrize(
    "payload, fragment",
    [
        param({"kind": "sweep", "bogus": 1}, "unknown keys: bogus", id="unknown top level key"),
        param(
            {"kind": "sweep", "grid": {"cells": 3}}, "unknown keys: grid.cells", id="nested key"
        ),
        param({}, "missing keys: kind", id="missing kind"),
        param({"kind": "teleport"}, "invalid values: kind", id="unknown kind"),
        param({"kind": "sweep", "widths": [0.25, 0.5]}, "strictly decreasing", id="increasing"),
        param({"kind": "sweep", "widths": [1.5]}, "(0, 1]", id="width above one"),
        param({"kind": "sweep", "widths": []}, "invalid values: widths", id="no widths"),
        param({"kind": "sweep", "T": 1.0, "t_star": 2.0}, "t_star", id="t_star past T"),
        param({"kind": "sweep", "gamma": 2}, "invalid values: gamma", id="gamma out of range"),
        param(
            {"kind": "limit", "limit": {"observables": ["r42"]}},
            "unknown observables",
            id="unknown observable",
        ),
        param(
            {"kind": "limit", "datum": {"variant": "shell", "shells": []}},
            "datum.shell.shells",
            id="no shells",
        ),
    ],
)
def test__parse_config__rejects_invalid_payloads(payload, fragment):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(payload)

    assert fragment in str(excinfo.value)


def test__ConfigError__is_a_value_error():
    assert issubclass(ConfigError, ValueError)


class LoadConfigTests(BaseTest):
    def test__load_config__missing_file_raises(self):
        with self.assertRaises(ConfigError):
            load_config(self.tmp_path() / "absent.json")

    def test__load_config__malformed_json_raises(self):
        path = self.tmp_path() / "broken.json"
        path.write_text("{not json")

        with self.assertRaises(ConfigError):
            load_config(path)

    def test__load_config__non_object_raises(self):
        path = self.tmp_path() / "list.json"
        path.write_text("[1, 2]")

        with self.assertRaises(ConfigError):
            load_config(path)

    def test__save_config__reloads_equal_config(self):
        config = parse_config({"kind": "stability", "widths": [0.5, 0.25], "seed": 3})
        path = save_config(config, self.tmp_path() / "config.json")

        self.assertEqual(load_config(path), config)
        self.assertEqual(json.loads(path.read_text())["t_star"], config.t_star)

    def test__save_config__materialized_form_is_stable(self):
        root = self.tmp_path()
        config = ExperimentConfig(kind=ExperimentKind.RUN)
        first = save_config(config, root / "a.json").read_text()
        second = save_config(load_config(root / "a.json"), root / "b.json")

        self.assertEqual(first, second.read_text())
