""" Scenario-file grammar and sweep output files. """

import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd
import xarray as xr

from .. io import (read_keyvalue, format_keyvalue, parse_value,
                   write_sweep_csv, save_sweep_netcdf, load_sweep_netcdf)
from .. sim import SweepResult


def _toy_result():
    dims = ('axis_value', 'scheme', 'trial')
    sum_rate = np.array([[[1., 2., 3.], [4., 4., 4.]],
                         [[2., np.nan, np.nan], [5., 6., 7.]]])
    i_over_n = np.array([[[10., 20., 30.], [-120., -120., -120.]],
                         [[3., np.nan, np.nan], [-120., -120., -120.]]])
    resamples = np.zeros((2, 2, 3), dtype=int)
    resamples[1, 1, 2] = 2
    ds = xr.Dataset({'sum_rate': (dims, sum_rate),
                     'i_over_n_db': (dims, i_over_n),
                     'n_resamples': (dims, resamples)},
                    coords={'axis_value': [0., 10.],
                            'scheme': ['fpj', 'no_jammer'],
                            'trial': np.arange(3)},
                    attrs={'axis_name': 'power', 'master_seed': 1})
    return SweepResult(ds)


class TestKeyValue(unittest.TestCase):

    def test_parse(self):
        text = "\n".join([
            "# scenario",
            "system.k_users = 4      # users",
            "",
            "geometry.ap_position = (0, 0, 1.5)",
            "system.power_allocation = equal",
            "experiment.note = 'tag #1'",
            "system.irs_enabled = False",
            "system.k_users = 3",
        ])
        items = read_keyvalue(text)
        self.assertEqual(list(items), ['system.k_users',
                                       'geometry.ap_position',
                                       'system.power_allocation',
                                       'experiment.note',
                                       'system.irs_enabled'])
        self.assertEqual(items['system.k_users'], 3)
        self.assertEqual(items['geometry.ap_position'], (0, 0, 1.5))
        self.assertEqual(items['system.power_allocation'], 'equal')
        self.assertEqual(items['experiment.note'], 'tag #1')
        self.assertIs(items['system.irs_enabled'], False)

    def test_malformed(self):
        with self.assertRaisesRegex(ValueError, "line 2"):
            read_keyvalue("system.k_users = 4\nnot a key value line")
        with self.assertRaisesRegex(ValueError, "malformed key"):
            read_keyvalue("k_users = 4")

    def test_format_round_trip(self):
        items = {'a.x': 1.25, 'a.y': (1, 2), 'b.z': 'name', 'b.w': None,
                 'c.v': ((8, 8), (16, 16)), 'c.u': -1e-7}
        text = format_keyvalue(items, header="two\nlines")
        self.assertTrue(text.startswith("# two\n# lines\n"))
        self.assertEqual(dict(read_keyvalue(text)), items)

    def test_parse_value(self):
        self.assertEqual(parse_value(" 12 "), 12)
        self.assertEqual(parse_value("fpj,no_jammer"), "fpj,no_jammer")
        self.assertEqual(parse_value("[1, 2]"), [1, 2])


class TestSweepFiles(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_csv_contract(self):
        path = os.path.join(self.tmp, "sweep_power.csv")
        write_sweep_csv(_toy_result(), path)
        with open(path) as f:
            lines = f.read().split("\n")
        self.assertEqual(lines[0], "axis_name,axis_value,scheme,"
                         "mean_sum_rate_bps_hz,stderr_sum_rate,"
                         "mean_i_over_n_db,stderr_i_over_n_db,"
                         "n_trials,n_resamples")
        self.assertEqual(lines[1],
                         "power,0,fpj,2,0.577350269,20,5.77350269,3,0")
        self.assertEqual(lines[2], "power,0,no_jammer,4,0,-120,0,3,0")
        self.assertEqual(lines[3], "power,10,fpj,2,nan,3,nan,1,0")
        self.assertEqual(lines[4], "power,10,no_jammer,6,0.577350269,"
                         "-120,0,3,2")
        self.assertEqual(lines[5], "")

    def test_netcdf_round_trip(self):
        path = os.path.join(self.tmp, "sweep_power.nc")
        result = _toy_result()
        save_sweep_netcdf(result, path)
        loaded = load_sweep_netcdf(path)
        self.assertEqual(loaded.axis_name, 'power')
        self.assertEqual(loaded.schemes, ['fpj', 'no_jammer'])
        pd.testing.assert_frame_equal(loaded.to_frame(), result.to_frame(),
                                      check_dtype=False)


if __name__ == "__main__":
    unittest.main()
