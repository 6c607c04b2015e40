#!/usr/bin/env python3

import os.path as os_path

from prequant import EXAMPLE_CONFIG_PATH
from prequant.pq_exceptions import ConfigError
from prequant.pq_settings.pq_settings import Pq_Settings, coerce, format_value
from prequant.pq_settings.pq_settings_default import settings_default

from .base_tmpl import BaseTmpl


class TestSettings(BaseTmpl):
    def setUp(self):
        super().setUp()
        self.settings = Pq_Settings()

    def test_defaults(self):
        self.assertEqual(self.settings["run.seed"], 0)
        self.assertEqual(self.settings.value("bs.grid_step"), 0.01)
        self.assertEqual(self.settings.all_keys(), list(settings_default))
        self.assertTrue(self.settings.contains("moser.steps"))
        self.assertFalse(self.settings.contains("moser.nonexistent"))
        self.assertRaises(ConfigError, self.settings.value, "moser.nonexistent")

    def test_section(self):
        darboux = self.settings.section("darboux")
        self.assertEqual(darboux["center"], (0.0, 0.0))
        self.assertEqual(darboux["radius"], 0.3)
        self.assertNotIn("darboux.center", darboux)
        self.assertEqual(self.settings.section("nothing"), {})

    def test_set_value_coerces(self):
        self.settings.set_value("moser.steps", "300")
        self.assertEqual(self.settings["moser.steps"], 300)
        self.settings.set_value("run.seed", "7.0")
        self.assertEqual(self.settings["run.seed"], 7)
        self.settings.set_value("bs.k_values", "2, 4")
        self.assertEqual(self.settings["bs.k_values"], (2, 4))
        self.settings.set_value("darboux.center", [0, 1])
        self.assertEqual(self.settings["darboux.center"], (0.0, 1.0))
        self.assertEqual(self.settings.sources["darboux.center"], "set")

    def test_set_value_rejects(self):
        self.assertRaises(ConfigError, self.settings.set_value, "moser.stepz", 1)
        self.assertRaises(ConfigError, self.settings.set_value, "moser.steps", "2.5")
        self.assertRaises(ConfigError, self.settings.set_value, "moser.epsilon", "small")
        self.assertRaises(ConfigError, self.settings.set_value, "tolerance.gauge", 0)
        self.assertRaises(ConfigError, self.settings.set_value, "tolerance.gauge", "-1e-3")
        # a ConfigError is a ValueError as well
        self.assertRaises(ValueError, self.settings.set_value, "bs.k_values", "1, x")

    def test_overrides_and_reset(self):
        settings = Pq_Settings({"gauge.k": 3})
        self.assertEqual(settings["gauge.k"], 3)
        self.assertEqual(settings.sources["gauge.k"], "overrides")
        settings.reset()
        self.assertEqual(settings["gauge.k"], settings_default["gauge.k"])
        self.assertEqual(settings.sources, {})

    def test_load_text(self):
        text = "# comment\n\nmoser.epsilon = 0.1  # inline\ntorus.c_values = 0.5,1.5\n"
        self.settings.load_text(text, source="inline")
        self.assertEqual(self.settings["moser.epsilon"], 0.1)
        self.assertEqual(self.settings["torus.c_values"], (0.5, 1.5))
        self.assertEqual(self.settings.sources["moser.epsilon"], "inline:3")
        with self.assertRaisesRegex(ConfigError, "inline:2"):
            self.settings.load_text("run.seed = 1\nrun.samples 10\n", source="inline")

    def test_load_file(self):
        tmpdir = self.make_tmpdir()
        path = os_path.join(tmpdir, "run.conf")
        with open(path, "w", encoding="utf-8") as f:
            f.write("run.samples = 50\nbs.grid_step = 0.02\n")
        self.settings.load_file(path)
        self.assertEqual(self.settings["run.samples"], 50)
        self.assertEqual(self.settings["bs.grid_step"], 0.02)
        self.assertRaises(ConfigError, self.settings.load_file, os_path.join(tmpdir, "missing.conf"))

    def test_bundled_example_config(self):
        self.settings.load_file(str(EXAMPLE_CONFIG_PATH))
        self.assertEqual(self.settings["moser.refined_steps"], 400)
        self.assertEqual(self.settings["moser.convergence_steps"], (1, 2, 4))

    def test_load_assignments(self):
        self.settings.load_assignments(["gauge.amplitude=0.5", " weinstein.elements = 1,2 "])
        self.assertEqual(self.settings["gauge.amplitude"], 0.5)
        self.assertEqual(self.settings["weinstein.elements"], (1.0, 2.0))
        self.assertEqual(self.settings.sources["gauge.amplitude"], "--set")
        self.assertRaises(ConfigError, self.settings.load_assignments, ["gauge.amplitude"])

    def test_format_value(self):
        self.assertEqual(format_value(0.1), "0.1")
        self.assertEqual(format_value((1, 2, 3)), "1,2,3")
        self.assertEqual(format_value((0.5, 1e-7)), "0.5,1e-07")
        for key, value in settings_default.items():
            self.assertEqual(coerce(key, format_value(value)), value)
        self.assertEqual(self.settings.to_strings()["weinstein.elements"], "0.7,1.9,3.1,4.4")
