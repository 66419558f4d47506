""" Command-line front end.

    irsjam [-d] sweep {power,bits,elements} [options]
    irsjam [-d] trial {no_jammer,aj,aj_<r>dB,csi_pj,fpj} [options]
    irsjam [-d] echo-config [options]

Scenario keys are grouped in sections (`arrays`, `geometry`, `fading`,
`system`, `sweep`, `experiment`, `rcg`); `irsjam echo-config` prints
every key with its resolved value. Precedence, lowest first: built-in
defaults, the `--config` file, `--set` overrides, dedicated flags
(`--seed`, `--trials`, `--schemes`).

Exit status is 0 when every trial completed, 1 when any trial aborted
(its CSV is written with a `.partial.csv` suffix), 2 for configuration
errors and 3 for I/O failures.

"""

import logging
logger = logging.getLogger(__name__)

import os
import sys
from argparse import ArgumentParser
from collections import OrderedDict, namedtuple

import numpy as np

from . channel import ArraySpec, FadingSpec
from . io import (read_keyvalue, format_keyvalue, parse_value,
                  write_sweep_csv, save_sweep_netcdf)
from . pj_opt import RcgOptions
from . scripting import BasicParser, add_run_arguments
from . sim import (default_config, sweep, run_point_trial, scheme_labels,
                   axis_points, csi_pj_n_irs, SCHEMES, AXES, POINT_CODE)
from . utilities import get_timestamp

try:
    from . version import version as __version__
except ImportError:
    __version__ = "unknown"

__all__ = ['ConfigError', 'RunManifest', 'parse_config', 'emit_config',
           'config_to_flat', 'config_from_flat', 'make_manifest', 'run',
           'main']

EXIT_OK, EXIT_ABORTED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

MANIFEST_FN = "manifest.txt"


class ConfigError(ValueError):
    """ Invalid scenario configuration; the message begins with the
    offending dotted key. """
    pass


#####################################################################
## VALUE CONVERTERS

def _bool(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if v in (0, 1):
        return bool(v)
    raise ValueError("expected True or False")

def _int(v):
    if isinstance(v, bool) or int(v) != v:
        raise ValueError("expected an integer")
    return int(v)

def _float(v):
    if isinstance(v, bool):
        raise ValueError("expected a number")
    return float(v)

def _str(v):
    if not isinstance(v, str):
        raise ValueError("expected a string")
    return v

def _floats(n=None):
    def convert(v):
        if np.isscalar(v):
            v = (v, )
        out = tuple(_float(x) for x in v)
        if n is not None and len(out) != n:
            raise ValueError("expected %d numbers" % n)
        return out
    return convert

def _ints(v):
    if np.isscalar(v):
        v = (v, )
    return tuple(_int(x) for x in v)

def _int_pair(v):
    out = _ints(v)
    if len(out) != 2:
        raise ValueError("expected a pair (n_y, n_z)")
    return out

def _int_pairs(v):
    return tuple(_int_pair(p) for p in v)

def _optional_int_pair(v):
    return None if v is None else _int_pair(v)

def _names(v):
    if isinstance(v, str):
        v = [s for s in v.replace(' ', '').split(',') if s]
    return tuple(_str(s) for s in v)


# Dotted key -> (attribute path in ScenarioConfig, converter)
_SCHEMA = OrderedDict([
    ('arrays.n_ap', (('arrays', 'n_ap'), _int)),
    ('arrays.n_irs_y', (('arrays', 'n_irs_y'), _int)),
    ('arrays.n_irs_z', (('arrays', 'n_irs_z'), _int)),
    ('arrays.element_spacing', (('arrays', 'element_spacing'), _float)),
    ('geometry.ap_position', (('ap_position', ), _floats(3))),
    ('geometry.irs_position', (('irs_position', ), _floats(3))),
    ('geometry.cluster_center', (('cluster_center', ), _floats(3))),
    ('geometry.cluster_radius', (('cluster_radius', ), _float)),
    ('fading.kappa_g', (('fading', 'kappa_g'), _float)),
    ('fading.kappa_i', (('fading', 'kappa_i'), _float)),
    ('fading.pathloss_direct', (('fading', 'pathloss_direct'), _floats(2))),
    ('fading.pathloss_ap_irs', (('fading', 'pathloss_ap_irs'), _floats(2))),
    ('fading.pathloss_irs_lu', (('fading', 'pathloss_irs_lu'), _floats(2))),
    ('system.k_users', (('k_users', ), _int)),
    ('system.p0_dbm', (('p0_dbm', ), _float)),
    ('system.bandwidth_hz', (('bandwidth_hz', ), _float)),
    ('system.quant_bits', (('quant_bits', ), _int)),
    ('system.power_allocation', (('power_allocation', ), _str)),
    ('system.zf_normalization', (('zf_normalization', ), _str)),
    ('system.irs_enabled', (('irs_enabled', ), _bool)),
    ('sweep.p0_dbm', (('p0_dbm_sweep', ), _floats())),
    ('sweep.quant_bits', (('quant_bits_sweep', ), _ints)),
    ('sweep.n_elements', (('n_elements_sweep', ), _int_pairs)),
    ('sweep.aj_over_n_db', (('aj_over_n_db', ), _floats())),
    ('experiment.n_trials', (('n_trials', ), _int)),
    ('experiment.master_seed', (('master_seed', ), _int)),
    ('experiment.schemes', (('schemes', ), _names)),
    ('experiment.max_resamples', (('max_resamples', ), _int)),
    ('experiment.csi_pj_irs', (('csi_pj_irs', ), _optional_int_pair)),
    ('rcg.max_iters', (('rcg', 'max_iters'), _int)),
    ('rcg.grad_tol', (('rcg', 'grad_tol'), _float)),
    ('rcg.initial_step', (('rcg', 'initial_step'), _float)),
    ('rcg.shrink', (('rcg', 'shrink'), _float)),
    ('rcg.slope', (('rcg', 'slope'), _float)),
    ('rcg.max_backtracks', (('rcg', 'max_backtracks'), _int)),
    ('rcg.restart_period', (('rcg', 'restart_period'), _int)),
    ('rcg.n_starts', (('rcg', 'n_starts'), _int)),
    ('rcg.local_search', (('rcg', 'local_search'), _bool)),
])

# Nested records rebuilt from their section keys
_NESTED = [('arrays', ArraySpec), ('fading', FadingSpec), ('rcg', RcgOptions)]

#: Keys written by `run` that a scenario file may carry
MANIFEST_SECTION = "manifest."

#####################################################################
## CONFIGURATION

def config_to_flat(cfg):
    """ Flatten a ScenarioConfig into an OrderedDict of dotted keys. """
    flat = OrderedDict()
    for key, (path, _) in _SCHEMA.items():
        value = cfg
        for attr in path:
            value = getattr(value, attr)
        flat[key] = value
    return flat


def config_from_flat(items, base=None):
    """ Build a validated ScenarioConfig from dotted keys layered over
    `base` (the default scenario when omitted).

    Raises
    ------
    ConfigError

    """
    base = default_config() if base is None else base
    flat = config_to_flat(base)
    for key, value in items.items():
        if key.startswith(MANIFEST_SECTION):
            continue
        if key not in _SCHEMA:
            raise ConfigError("%s: unknown key" % key)
        try:
            flat[key] = _SCHEMA[key][1](value)
        except (TypeError, ValueError) as err:
            raise ConfigError("%s: invalid value %r (%s)" % (key, value, err))

    fields, nested = {}, {name: {} for name, _ in _NESTED}
    for key, (path, _) in _SCHEMA.items():
        if len(path) == 2:
            nested[path[0]][path[1]] = flat[key]
        else:
            fields[path[0]] = flat[key]
    for name, cls in _NESTED:
        try:
            fields[name] = cls(**nested[name])
        except (TypeError, ValueError) as err:
            raise ConfigError("%s: %s" % (name, err))

    cfg = base._replace(**fields)
    try:
        return cfg.validate()
    except ValueError as err:
        raise ConfigError(str(err))


def _split_override(text):
    if '=' not in text:
        raise ConfigError("%s: overrides take the form key=value" % text)
    key, value = text.split('=', 1)
    return key.strip(), parse_value(value)


def parse_config(path=None, overrides=()):
    """ Resolve a ScenarioConfig from a scenario file and overrides.

    Parameters
    ----------
    path : str, optional
        Scenario file; omitted means defaults only
    overrides : sequence of str or (key, value)
        Applied in order after the file; strings are 'key=value'

    Returns
    -------
    ScenarioConfig

    Raises
    ------
    ConfigError
        Unknown key, malformed line or value, out-of-range value
    OSError
        If the file cannot be read

    """
    items = OrderedDict()
    if path is not None:
        with open(path) as f:
            text = f.read()
        try:
            items.update(read_keyvalue(text))
        except ValueError as err:
            raise ConfigError("%s: %s" % (path, err))
    for override in overrides:
        if isinstance(override, str):
            override = _split_override(override)
        key, value = override
        items[key] = value
    return config_from_flat(items)


def emit_config(cfg, header=None):
    """ Render `cfg` as a scenario file; `parse_config` of the text gives
    back an equal config. """
    return format_keyvalue(config_to_flat(cfg), header=header)

#####################################################################
## RUNS

class RunManifest(namedtuple('RunManifest', ['config', 'command', 'version',
                                             'master_seed', 'timestamp',
                                             'out_dir', 'outputs',
                                             'csi_pj_n_irs'])):
    """ Everything needed to repeat a run.

    `command` is e.g. ('sweep', 'power') or ('trial', 'fpj'). The
    rendered manifest is itself a valid scenario file; re-running its
    command on it reproduces every output byte. The timestamp is
    informational only. `csi_pj_n_irs` lists the element count the
    CSI-based jammer drives at each point when `experiment.csi_pj_irs`
    caps it, and is empty otherwise.

    """
    __slots__ = ()

    def render(self):
        extra = OrderedDict([
            ('manifest.command', " ".join(self.command)),
            ('manifest.version', self.version),
            ('manifest.timestamp', self.timestamp),
            ('manifest.outputs', tuple(self.outputs)),
        ])
        if self.csi_pj_n_irs:
            extra['manifest.csi_pj_n_irs'] = tuple(self.csi_pj_n_irs)
        return emit_config(self.config, header="irsjam run manifest") \
            + format_keyvalue(extra)


def _output_names(command):
    if command[0] == 'sweep':
        return ("sweep_%s.csv" % command[1], )
    return ()


def _capped_n_irs(cfg, command):
    if cfg.csi_pj_irs is None or command[1] not in ('csi_pj', ) + AXES:
        return ()
    if command[0] == 'trial':
        return (csi_pj_n_irs(cfg), )
    if 'csi_pj' not in cfg.schemes:
        return ()
    return tuple(csi_pj_n_irs(c) for _, c in axis_points(cfg, command[1]))


def make_manifest(cfg, command, out_dir="."):
    """ Freeze a resolved config and command into a RunManifest. """
    return RunManifest(cfg, tuple(command), __version__, cfg.master_seed,
                       get_timestamp(), out_dir, _output_names(command),
                       _capped_n_irs(cfg, command))


def _print_summary(df):
    text = df.to_string(index=False, float_format=lambda x: "%.4g" % x)
    print(text)


def _run_sweep(manifest, parallel, netcdf):
    axis = manifest.command[1]
    result = sweep(manifest.config, axis, parallel=parallel)

    csv_fn = manifest.outputs[0]
    status = EXIT_OK
    if result.n_aborted:
        csv_fn = csv_fn.replace(".csv", ".partial.csv")
        logger.error("%d trial(s) aborted; writing %s", result.n_aborted,
                     csv_fn)
        status = EXIT_ABORTED
    outputs = [csv_fn]
    write_sweep_csv(result, os.path.join(manifest.out_dir, csv_fn))
    if netcdf:
        nc_fn = "sweep_%s.nc" % axis
        save_sweep_netcdf(result, os.path.join(manifest.out_dir, nc_fn))
        outputs.append(nc_fn)

    _print_summary(result.to_frame())
    return status, outputs


def _run_trial(manifest):
    cfg = manifest.config
    scheme = manifest.command[1]
    labels = scheme_labels(cfg, ['aj']) if scheme == 'aj' else [scheme]
    results, errors = run_point_trial(cfg, POINT_CODE, 0., 0, labels)
    for err in errors:
        logger.error("trial aborted, %s", err)

    for label in labels:
        metrics = results[label]
        if metrics is None:
            continue
        print("%s (channel %s, %d redraws)" % (label,
              metrics.channel_digest[:12], metrics.n_resamples))
        for k, (sinr, rate) in enumerate(zip(metrics.sinr, metrics.rates)):
            print("  user %d: SINR %.4g, rate %.4f bit/s/Hz"
                  % (k, sinr, rate))
        print("  sum rate %.4f bit/s/Hz, I/N %.2f dB"
              % (metrics.sum_rate, metrics.i_over_n_db))
    return (EXIT_ABORTED if errors else EXIT_OK), []


def run(manifest, parallel=1, netcdf=False):
    """ Execute a manifest's command and write its outputs.

    Sweeps write `sweep_<axis>.csv` (or `.partial.csv` after aborts) and
    `manifest.txt` into `manifest.out_dir` and print a summary table.
    Trials print per-user metrics.

    Returns
    -------
    int exit status

    """
    try:
        os.makedirs(manifest.out_dir, exist_ok=True)
        if manifest.command[0] == 'sweep':
            status, outputs = _run_sweep(manifest, parallel, netcdf)
        else:
            status, outputs = _run_trial(manifest)
        if outputs:
            manifest = manifest._replace(outputs=tuple(outputs))
            with open(os.path.join(manifest.out_dir, MANIFEST_FN), 'w') as f:
                f.write(manifest.render())
    except OSError as err:
        logger.error("I/O failure: %s", err)
        return EXIT_IO
    return status

#####################################################################
## ENTRY POINT

def _trial_scheme(text):
    if text in SCHEMES:
        return text
    if text.startswith('aj_') and text.endswith('dB'):
        float(text[3:-2])
        return text
    raise ValueError(text)


def build_parser():
    parser = BasicParser(description=__doc__)
    # Plain parsers below, so -d on the top level is not reset
    sub = parser.add_subparsers(dest='command', parser_class=ArgumentParser)
    sub.required = True

    p = sub.add_parser('sweep', help="Run a parameter sweep")
    p.add_argument('axis', choices=AXES)
    add_run_arguments(p)

    p = sub.add_parser('trial', help="Run one trial at the operating point")
    p.add_argument('scheme', type=_trial_scheme,
                   help="One of %s, or aj_<r>dB" % ", ".join(SCHEMES))
    add_run_arguments(p)

    p = sub.add_parser('echo-config', help="Print the resolved scenario")
    add_run_arguments(p)
    return parser


def _overrides_from_args(args):
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(('experiment.master_seed', args.seed))
    if args.trials is not None:
        overrides.append(('experiment.n_trials', args.trials))
    if args.schemes is not None:
        overrides.append(('experiment.schemes', args.schemes))
    return overrides


def main(argv=None):
    args = build_parser().parse_args(argv)

    try:
        cfg = parse_config(args.config, _overrides_from_args(args))
    except ConfigError as err:
        logger.error("configuration error: %s", err)
        return EXIT_CONFIG
    except OSError as err:
        logger.error("cannot read configuration: %s", err)
        return EXIT_IO

    if args.command == 'echo-config':
        sys.stdout.write(emit_config(cfg))
        return EXIT_OK

    if args.command == 'trial':
        label = args.scheme
        if label.startswith('aj_'):
            ratio = float(label[3:-2])
            cfg = cfg._replace(aj_over_n_db=(ratio, ))
            label = scheme_labels(cfg, ['aj'])[0]
        command = ('trial', label)
    else:
        command = ('sweep', args.axis)

    manifest = make_manifest(cfg, command, out_dir=args.out)
    return run(manifest, parallel=args.parallel, netcdf=args.netcdf)


if __name__ == "__main__":
    sys.exit(main())
