from pathlib import Path
from types import SimpleNamespace
import copy
import json
import logging
import re

from .errors import ParseError
from .evolution import SPLITTINGS, IntegratorConfig, ModelParams
from .state import BasisLabel
from .synapse import SynapseParams
from .trajectories import TrajectoryConfig
from .utils import ConfigDecoder


LOGGER = logging.getLogger(__name__)
PRESET_PATH = Path(__file__).resolve().parent.parent / 'cfg' / 'presets.json'
MODES = ('evolve', 'sweep-rmin', 'trajectory', 'ensemble', 'classical-synapse')
BASIS_LABELS = ('00', '01', '10', '11')
SPIKE_PROCESSES = ('periodic', 'poisson')
PRESET_ALIASES = {
    'fig3-right-tau100': 'asymmetric-tau100',
    'fig5-tau10': 'measured-tau10',
}


class ExperimentConfig:
    def __init__(self, mode, model, integrator,
                 trajectory=None,
                 sweep=None,
                 spikes=None,
                 initial_state=BasisLabel.GE,
                 r0=1.,
                 neg_threshold=0.01,
                 output_path=None):
        """Everything needed to run one experiment from the command line.

        Parameters
        ----------
        mode : {'evolve', 'sweep-rmin', 'trajectory', 'ensemble', 'classical-synapse'}
            What to run.
        model : ModelParams
            Hamiltonian and synapse constants.
        integrator : IntegratorConfig
            Step size, horizon and decimation.
        trajectory : TrajectoryConfig, optional
            Measurement protocol settings, required for 'trajectory' and 'ensemble'.
        sweep : SimpleNamespace, optional
            `omega_values`, `tau_values`, `transient_window` and `workers`,
            required for 'sweep-rmin'.
        spikes : SimpleNamespace, optional
            `rate`, `process` and `seed` of the presynaptic spike train,
            required for 'classical-synapse'.
        initial_state : BasisLabel, optional
            Initial product state.
        r0 : float, optional
            Initial synapse value.
        neg_threshold : float, optional
            Negativity above which the pair counts as entangled.
        output_path : Path, optional
            CSV destination.
        """
        assert mode in MODES
        self.mode = mode
        self.model = model
        self.integrator = integrator
        assert mode not in ('trajectory', 'ensemble') or trajectory is not None
        self.trajectory = trajectory
        assert mode != 'sweep-rmin' or sweep is not None
        self.sweep = sweep
        assert mode != 'classical-synapse' or spikes is not None
        self.spikes = spikes
        self.initial_state = initial_state
        assert 0 < r0 <= 1
        self.r0 = r0
        assert neg_threshold >= 0
        self.neg_threshold = neg_threshold
        self.output_path = None if output_path is None else Path(output_path)


def load_presets(path=PRESET_PATH):
    """Loads the named experiment presets.

    Returns
    -------
    Dict[str, dict]
        Partial experiment documents keyed by preset name.
    """
    with open(path) as preset_file:
        return json.load(preset_file, cls=ConfigDecoder)


def parse_config(text='', preset=None, overrides=None, presets=None):
    """Builds a validated `ExperimentConfig`.
    Sources are merged with increasing precedence: preset, document, overrides.

    Parameters
    ----------
    text : str, optional
        JSON experiment document.
    preset : str, optional
        Name of a preset, or of an alias in `PRESET_ALIASES`, to start from.
    overrides : dict, optional
        Nested document with the highest precedence (command-line flags).
    presets : Dict[str, dict], optional
        Preset table, defaults to `load_presets()`.

    Returns
    -------
    ExperimentConfig
        The validated configuration.

    Raises
    ------
    ParseError
        Listing every syntax, unknown-key, type, range and missing-field problem.
    """
    doc = {}
    if preset is not None:
        if presets is None:
            presets = load_presets()
        preset = PRESET_ALIASES.get(preset, preset)
        if preset not in presets:
            known = ', '.join(sorted([*presets, *PRESET_ALIASES]))
            raise ParseError([('preset', f'unknown preset {preset!r} (known: {known})', None)])
        doc = copy.deepcopy(presets[preset])
    if text is not None and text.strip():
        doc = _merge(doc, _decode(text))
    if overrides:
        doc = _merge(doc, overrides)

    errors = []
    _check_keys(doc, _SCHEMA, '', errors)
    _check_required(doc, errors)
    _check_consistency(doc, errors)
    if errors:
        raise ParseError([(field, message, _locate(text, field)) for field, message in errors])
    return _build(doc)


def _decode(text):
    try:
        doc = json.loads(text, cls=ConfigDecoder)
    except json.JSONDecodeError as err:
        raise ParseError([('<document>', err.msg, err.lineno)]) from err
    except ValueError as err:
        raise ParseError([('<document>', str(err), None)]) from err
    if not isinstance(doc, dict):
        raise ParseError([('<document>', 'top level must be an object', 1)])
    return doc


def _merge(base, update):
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _locate(text, field):
    if not text or field.startswith('<'):
        return None
    key = field.rsplit('.', 1)[-1]
    match = re.search(r'"%s"\s*:' % re.escape(key), text)
    if match is None:
        return None
    return text.count('\n', 0, match.start()) + 1


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _number(lo=None, hi=None, lo_open=False, nullable=False):
    def check(value):
        if value is None and nullable:
            return None
        if not _is_number(value):
            return f'expected a number, got {value!r}'
        if lo is not None and (value < lo or lo_open and value == lo):
            return f'must be {">" if lo_open else ">="} {lo}, got {value!r}'
        if hi is not None and value > hi:
            return f'must be <= {hi}, got {value!r}'
        return None
    return check


def _integer(lo=None, nullable=False):
    def check(value):
        if value is None and nullable:
            return None
        if not isinstance(value, int) or isinstance(value, bool):
            return f'expected an integer, got {value!r}'
        if lo is not None and value < lo:
            return f'must be >= {lo}, got {value!r}'
        return None
    return check


def _choice(options):
    def check(value):
        if value not in options or isinstance(value, bool):
            return f'must be one of {", ".join(map(str, options))}, got {value!r}'
        return None
    return check


def _numbers(lo=None, lo_open=False):
    item_check = _number(lo, lo_open=lo_open)

    def check(value):
        if not isinstance(value, (tuple, list)) or len(value) == 0:
            return f'expected a non-empty list of numbers, got {value!r}'
        for item in value:
            message = item_check(item)
            if message is not None:
                return f'item {item!r}: {message}'
        return None
    return check


def _string(value):
    if not isinstance(value, (str, Path)):
        return f'expected a string, got {value!r}'
    return None


_SCHEMA = {
    'mode': _choice(MODES),
    'model': {
        'eps1': _number(),
        'eps2': _number(),
        'omega': _number(lo=0),
        'driver': _choice((1, 2)),
        'splitting': _choice(tuple(SPLITTINGS)),
        'synapse': {
            'U': _number(lo=0, hi=1, lo_open=True),
            'tau': _number(lo=0, lo_open=True),
        },
    },
    'integrator': {
        'dt': _number(lo=0, lo_open=True),
        't_end': _number(lo=0, lo_open=True),
        'sample_every': _integer(lo=1),
    },
    'trajectory': {
        't_m': _number(lo=0, lo_open=True),
        'n_traj': _integer(lo=1),
        'master_seed': _integer(lo=0),
        'workers': _integer(lo=1, nullable=True),
    },
    'sweep': {
        'omega_values': _numbers(lo=0),
        'tau_values': _numbers(lo=0, lo_open=True),
        'transient_window': _number(lo=0, nullable=True),
        'workers': _integer(lo=1, nullable=True),
    },
    'spikes': {
        'rate': _number(lo=0, lo_open=True),
        'process': _choice(SPIKE_PROCESSES),
        'seed': _integer(lo=0),
    },
    'initial_state': _choice(BASIS_LABELS),
    'r0': _number(lo=0, hi=1, lo_open=True),
    'neg_threshold': _number(lo=0),
    'out': _string,
}


_ALWAYS_REQUIRED = ('mode', 'integrator.dt', 'integrator.t_end',
                    'model.synapse.U', 'model.synapse.tau')
_MODE_REQUIRED = {
    'evolve': ('model.eps1', 'model.eps2', 'model.omega'),
    'sweep-rmin': ('model.eps1', 'model.eps2', 'model.omega',
                   'sweep.omega_values', 'sweep.tau_values'),
    'trajectory': ('model.eps1', 'model.eps2', 'model.omega', 'trajectory.t_m'),
    'ensemble': ('model.eps1', 'model.eps2', 'model.omega',
                 'trajectory.t_m', 'trajectory.n_traj'),
    'classical-synapse': ('spikes.rate',),
}


def _check_keys(doc, schema, prefix, errors):
    for key, value in doc.items():
        field = prefix + key
        if key not in schema:
            errors.append((field, 'unknown key'))
        elif isinstance(schema[key], dict):
            if not isinstance(value, dict):
                errors.append((field, f'expected an object, got {value!r}'))
            else:
                _check_keys(value, schema[key], field + '.', errors)
        else:
            message = schema[key](value)
            if message is not None:
                errors.append((field, message))


def _lookup(doc, field):
    node = doc
    for key in field.split('.'):
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def _check_required(doc, errors):
    required = list(_ALWAYS_REQUIRED)
    required.extend(_MODE_REQUIRED.get(doc.get('mode'), ()))
    for field in required:
        if _lookup(doc, field) is None:
            errors.append((field, 'required field is missing'))


def _check_consistency(doc, errors):
    dt, t_end = _lookup(doc, 'integrator.dt'), _lookup(doc, 'integrator.t_end')
    if _is_number(dt) and _is_number(t_end) and dt > 0 and t_end < dt:
        errors.append(('integrator.t_end', f'must be >= dt ({dt!r}), got {t_end!r}'))
    t_m = _lookup(doc, 'trajectory.t_m')
    if doc.get('mode') in ('trajectory', 'ensemble') and _is_number(t_m) and _is_number(dt) \
            and dt > 0 and t_m > 0:
        steps = round(t_m / dt)
        if steps < 1 or abs(steps * dt - t_m) > 1e-9 * t_m:
            errors.append(('trajectory.t_m', f'must be a whole number of steps of dt={dt!r}'))
    omega_values = _lookup(doc, 'sweep.omega_values')
    if doc.get('mode') == 'sweep-rmin' and isinstance(omega_values, (tuple, list)) \
            and all(_is_number(omega) for omega in omega_values) and 0 not in omega_values:
        errors.append(('sweep.omega_values', 'must include 0 to normalize r_min'))
    driver = _lookup(doc, 'model.driver')
    if doc.get('mode') in ('trajectory', 'ensemble') and driver not in (None, 1):
        errors.append(('model.driver', 'the measurement protocol is driven by qubit 1'))


def _build(doc):
    mode = doc['mode']
    model_doc = doc.get('model', {})
    synapse_doc = model_doc['synapse']
    model = ModelParams(eps1=model_doc.get('eps1', 0.),
                        eps2=model_doc.get('eps2', 0.),
                        omega=model_doc.get('omega', 0.),
                        synapse=SynapseParams(synapse_doc['U'], synapse_doc['tau']),
                        driver=model_doc.get('driver', 1),
                        splitting=model_doc.get('splitting', 'literal'))
    integrator_doc = doc['integrator']
    integrator = IntegratorConfig(integrator_doc['dt'], integrator_doc['t_end'],
                                  integrator_doc.get('sample_every', 100))

    trajectory = None
    if mode in ('trajectory', 'ensemble'):
        trajectory_doc = doc['trajectory']
        trajectory = TrajectoryConfig(t_m=trajectory_doc['t_m'],
                                      n_traj=trajectory_doc.get('n_traj', 1),
                                      master_seed=trajectory_doc.get('master_seed', 0),
                                      dt=integrator.dt,
                                      t_end=integrator.t_end,
                                      sample_every=integrator.sample_every,
                                      workers=trajectory_doc.get('workers'))
    sweep = None
    if mode == 'sweep-rmin':
        sweep_doc = doc['sweep']
        sweep = SimpleNamespace(omega_values=tuple(sweep_doc['omega_values']),
                                tau_values=tuple(sweep_doc['tau_values']),
                                transient_window=sweep_doc.get('transient_window'),
                                workers=sweep_doc.get('workers'))
    spikes = None
    if mode == 'classical-synapse':
        spikes_doc = doc['spikes']
        spikes = SimpleNamespace(rate=spikes_doc['rate'],
                                 process=spikes_doc.get('process', 'poisson'),
                                 seed=spikes_doc.get('seed', 0))

    default_label = '10' if mode == 'sweep-rmin' else '01'
    return ExperimentConfig(mode, model, integrator,
                            trajectory=trajectory,
                            sweep=sweep,
                            spikes=spikes,
                            initial_state=BasisLabel.parse(doc.get('initial_state', default_label)),
                            r0=doc.get('r0', 1.),
                            neg_threshold=doc.get('neg_threshold', 0.01),
                            output_path=doc.get('out'))
