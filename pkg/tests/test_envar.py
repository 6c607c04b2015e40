#!/usr/bin/env python3

import os
from unittest import mock

from prequant.pq_envar import DEFAULT_OUTPUT_ROOT, OUTPUT_DIR_ENVAR, get_dir_frm_env, get_output_root

from .base_tmpl import BaseTmpl


class TestUtilEnv(BaseTmpl):
    def test_getenv(self):
        # returns None for non-existent envar key
        self.assertIsNone(get_dir_frm_env("PREQUANT_NON_EXISTING_VAR"))
        with mock.patch.dict(os.environ, {"PREQUANT_TEST_DIR": "non_existing_directory"}):
            # returns None if the envar exists but its value is not an existent dir
            self.assertIsNone(get_dir_frm_env("PREQUANT_TEST_DIR"))
        with mock.patch.dict(os.environ, {"PREQUANT_TEST_DIR": os.path.expanduser("~")}):
            self.assertIsNotNone(get_dir_frm_env("PREQUANT_TEST_DIR"))

    def test_output_root(self):
        with mock.patch.dict(os.environ, clear=False):
            os.environ.pop(OUTPUT_DIR_ENVAR, None)
            self.assertEqual(get_output_root(), DEFAULT_OUTPUT_ROOT)
        tmpdir = self.make_tmpdir()
        with mock.patch.dict(os.environ, {OUTPUT_DIR_ENVAR: tmpdir}):
            self.assertEqual(get_output_root(), tmpdir)
        later = os.path.join(tmpdir, "not_yet")
        with mock.patch.dict(os.environ, {OUTPUT_DIR_ENVAR: later}):
            self.assertEqual(get_output_root(), later)
