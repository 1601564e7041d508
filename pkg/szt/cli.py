import asyncio
import dataclasses
import functools
import json
import os
import pathlib
import time
import traceback

import numpy as np
import pandas as pd

import szt.analysis
import szt.config
import szt.core
import szt.manifest
import szt.prior
import szt.quantizer
import szt.sim
import szt.status
import szt.table
import szt.train
import szt.verify
from szt.grad import SteKind
from szt.typing import (
    Any,
    Callable,
    Coroutine,
    Dict,
    List,
    Optional,
    PathLike,
    Sequence,
    Type,
)


COMMANDS: List[str] = ['calibrate', 'quantize', 'inspect', 'verify', 'analyze', 'simulate', 'train', 'report', 'replay']
"""
The commands of the command-line interface.
"""


class ReportInputError(szt.core.SztError, ValueError):
    """
    Raised when an input of the ``report`` command is missing or cannot be parsed.
    """

    def __init__(self, message: str, path: PathLike):
        super().__init__(message)

        self.path = str(path)
        """
        The offending input.
        """


def format_hms(seconds):
    """
    Format a duration in seconds as hours, minutes, and seconds.
    """
    seconds = round(seconds)
    h, m, s = seconds // 3600, (seconds % 3600) // 60, (seconds % 60)
    ms = f'{m:02d}:{s:02d}'
    return ms if h == 0 else f'{h:d}:{ms}'


class StatusReaderConsoleAdapter(szt.status.StatusReader):
    """
    Writes formatted status updates to stdout.

    Nested updates (e.g., the checks of a verification suite) are indented by their level, and an empty line is
    printed when the indentation changes. Intermediate updates can be muted by setting the environment variable
    ``SZT_CLI_INTERMEDIATE`` to ``0`` (this affects the console only, never the results).

    Arguments:
        *args: Passed through to the base class.
        indent: Indentation of each nesting level.
        **kwargs: Passed through to the base class.
    """

    progress_bar_length = 20
    """
    Length of the progress bar displayed for :func:`szt.status.progress` updates.
    """

    indent: int

    margin: Optional[str]
    """
    Last margin used for an update. `None` if nothing has been printed yet.
    """

    def __init__(self, *args, indent: int = 2, **kwargs):
        self.indent = indent
        self._intermediate_line_length = 0
        self.margin = None
        self.progress_t0 = time.time()
        super().__init__(*args, **kwargs)

    def clear_line(self, line: str) -> str:
        """
        Pad the `line` with spaces, so that it overwrites the previously printed intermediate line.
        """
        line = line.replace('\n', ' ')
        return line + ' ' * max((0, self._intermediate_line_length - len(line)))

    def handle_new_status(
            self,
            positions: List[int],
            status: Optional[szt.status.StatusRecord],
            intermediate: bool,
        ) -> None:
        if intermediate:
            if bool(json.loads(os.environ.get('SZT_CLI_INTERMEDIATE', '1'))):
                if status is None:
                    text = self.clear_line('')
                else:
                    text = self.full_format(positions, status, intermediate = True)
                lines = text.split('\n')
                if len(lines) > 1:
                    print('\n'.join(lines[:-1]))
                print(lines[-1], end = '\r')
                self._intermediate_line_length = len(lines[-1])

        else:
            print(self.full_format(positions, status, intermediate = False))
            self._intermediate_line_length = 0

    def full_format(
            self,
            positions: List[int],
            status: szt.status.StatusRecord,
            intermediate: bool,
        ) -> str:
        """
        Format an update, including the indentation and the empty lines between blocks of different indentation.
        """
        text = str(self.format(positions, status, intermediate))

        margin = ' ' * self.indent * (len(positions) - 1)
        if self.margin is not None and margin != self.margin and text.split('\n')[0].strip() != '':
            text = '\n' + text
        self.margin = margin

        lines = [margin + line for line in text.split('\n')]
        lines[0] = self.clear_line(lines[0])
        return '\n'.join(lines)

    def format_progress(self, status: dict) -> str:
        step, max_steps = status.get('step'), status.get('max_steps')
        if step == 0:
            self.progress_t0 = time.time()
            eta = ''
        else:
            speed = (time.time() - self.progress_t0) / step
            eta = ', ETA: ' + format_hms(speed * (max_steps - step))
        text = f'{100 * step / max_steps:.1f}% ({step} / {max_steps}{eta})'
        progress_bar = ((self.progress_bar_length * step) // max_steps) * '='
        progress_bar = progress_bar + (self.progress_bar_length - len(progress_bar)) * ' '
        text = f'[{progress_bar}] {text}'
        if details := status.get('details'):
            text = f'{details} {text}'
        return text

    def format(
            self,
            positions: List[int],
            status: szt.status.StatusRecord,
            intermediate: bool,
        ) -> str:
        """
        Format an update as a string. Dictionaries of unknown kinds are printed verbatim.
        """
        if not isinstance(status, dict):
            return status

        info = status.get('info')
        text = None

        if info == 'command':
            text = f'Running: {status["command"]}'

        if info == 'suite':
            text = f'\nSuite: {status["suite"]} ({status["checks"]} checks)'

        if info == 'check':
            counts = ', '.join(
                f'{status[outcome]} {outcome}' for outcome in (szt.verify.PASS, szt.verify.FAIL, szt.verify.FLAG)
                if status.get(outcome)
            )
            marker = '🔴' if status.get(szt.verify.FAIL) else '✅'
            text = f'{marker} {status["check"]}: {counts or "no rows"}'

        if info == 'epoch':
            text = f'Epoch {status["epoch"] + 1}: loss {status["loss"]:.6g}'

        if info == 'simulate':
            text = f'Simulating ({status["mode"]}): {status["paths"]} paths'

        if info == 'analyze':
            text = f'Tabulating: {status["quantity"]}'

        if info == 'written':
            text = f'Written: {status["path"]}'

        if info == 'error':
            text = '\n🔴 An error occurred while running the command ' f'"{status["command"]}":\n' + \
                '-' * 80 + '\n' + \
                status['traceback'] + \
                '-' * 80

        if info == 'progress':
            text = self.format_progress(status)

        return text if text else status


@dataclasses.dataclass
class CommandResult:
    """
    What a command has read and written.
    """

    outputs: List[pathlib.Path] = dataclasses.field(default_factory = list)

    inputs: List[pathlib.Path] = dataclasses.field(default_factory = list)

    success: bool = True
    """
    `False` if the command completed, but the results indicate a failure (e.g., a verification check failed).
    """


Command = Callable[[Dict[str, Any], szt.config.Config, pathlib.Path, Optional[szt.status.Status]], CommandResult]


def _write(status: Optional[szt.status.Status], path: pathlib.Path) -> pathlib.Path:
    szt.status.update(status, info = 'written', path = str(path))
    return path


def _layer_config(section: szt.config.Config) -> szt.quantizer.LayerQuantConfig:
    if section.get('granularity', 'layer') == 'channel':
        granularity = szt.core.PerChannel(int(section.get('axis', 0)))
    else:
        granularity = szt.core.PerLayer()
    rules = {
        'sigma': lambda: szt.quantizer.SigmaRule(),
        'fixed-k': lambda: szt.quantizer.FixedK(float(section['k'])),
        # The prior of each channel is fitted separately (see `_calibrate`)
        'prior-optimal': lambda: szt.quantizer.SigmaRule(),
    }
    rule = section.get('rule', 'sigma')
    if rule not in rules:
        raise szt.core.InvalidInputError(f'Unknown threshold rule: "{rule}"')
    return szt.quantizer.LayerQuantConfig(
        granularity = granularity,
        threshold_rule = rules[rule](),
        scale_rule = szt.quantizer.ScaleRule(section.get('scale', 'threshold')),
    )


def _calibrate(
        weights: np.ndarray,
        section: szt.config.Config,
        config: szt.quantizer.LayerQuantConfig,
    ) -> List[szt.quantizer.CalibrationResult]:
    if section['rule'] != 'prior-optimal':
        return szt.quantizer.calibrate_tensor(weights, config)
    kind = section['prior']
    return [
        szt.quantizer.calibrate(None, szt.quantizer.PriorOptimal(szt.prior.fit_prior(kind, channel)))
        for channel in szt.quantizer.channel_slices(weights, config.granularity)
    ]


def _calibration_json(
        weights_path: pathlib.Path,
        config: szt.quantizer.LayerQuantConfig,
        section: szt.config.Config,
        results: Sequence[szt.quantizer.CalibrationResult],
    ) -> Dict[str, Any]:
    return dict(
        weights = weights_path.name,
        rule = section['rule'],
        prior = section['prior'] if section['rule'] == 'prior-optimal' else None,
        granularity = section['granularity'],
        axis = config.granularity.axis if isinstance(config.granularity, szt.core.PerChannel) else None,
        channels = [result.to_dict() for result in results],
    )


def cmd_calibrate(flags, config, out_dir, status) -> CommandResult:
    """
    Calibrate the thresholds of dense weights, and write them to ``calibration.json``.
    """
    weights_path = pathlib.Path(flags['weights'])
    section = config['calibrate']
    layer_config = _layer_config(section)
    weights = szt.quantizer.read_dense(weights_path)
    results = _calibrate(weights, section, layer_config)
    output = szt.table.dump_json(
        _calibration_json(weights_path, layer_config, section, results),
        out_dir / 'calibration.json',
    )
    return CommandResult(outputs = [_write(status, output)], inputs = [weights_path])


def cmd_quantize(flags, config, out_dir, status) -> CommandResult:
    """
    Quantize dense weights to a ``.szt`` file, and write the calibration to ``calibration.json``.
    """
    weights_path = pathlib.Path(flags['weights'])
    section = config['quantize']
    layer_config = _layer_config(section)
    weights = szt.quantizer.read_dense(weights_path)
    results = _calibrate(weights, section, layer_config)
    tensor = szt.quantizer.quantize_tensor(weights, layer_config, results)
    output_name = section.get('output', weights_path.stem + '.szt')
    outputs = [
        szt.core.write_szt(tensor, out_dir / output_name),
        szt.table.dump_json(
            _calibration_json(weights_path, layer_config, section, results),
            out_dir / 'calibration.json',
        ),
    ]
    return CommandResult(outputs = [_write(status, output) for output in outputs], inputs = [weights_path])


def inspect_tensor(tensor: szt.core.PackedTernaryTensor) -> Dict[str, Any]:
    """
    Summarize a packed tensor: its dimensions, granularity, thresholds and scales, the number of elements per code
    word, the fraction of zeros (the estimate of the dead-zone mass), and the SHA-256 digest of the serialized tensor.
    """
    codes = tensor.codes.ravel()
    histogram = {str(code): int(np.count_nonzero(codes == code.value)) for code in szt.core.TernaryCode}
    zeros = histogram[str(szt.core.TernaryCode.ZERO_PLUS)] + histogram[str(szt.core.TernaryCode.ZERO_MINUS)]
    granularity = tensor.granularity
    return dict(
        dims = list(tensor.dims),
        granularity = 'channel' if isinstance(granularity, szt.core.PerChannel) else 'layer',
        axis = granularity.axis if isinstance(granularity, szt.core.PerChannel) else None,
        thresholds = list(tensor.thresholds),
        scales = list(tensor.scales),
        histogram = histogram,
        p0 = zeros / codes.size if codes.size > 0 else float('nan'),
        sha256 = tensor.digest(),
    )


def cmd_inspect(flags, config, out_dir, status) -> CommandResult:
    """
    Print the summary of a ``.szt`` file (see :func:`inspect_tensor`), and write it to ``inspect.json``.
    """
    path = pathlib.Path(flags['path'])
    summary = inspect_tensor(szt.core.read_szt(path))
    print(szt.table.render_json(summary))
    output = szt.table.dump_json(summary, out_dir / 'inspect.json')
    return CommandResult(outputs = [_write(status, output)], inputs = [path])


def cmd_verify(flags, config, out_dir, status) -> CommandResult:
    """
    Run a verification suite, and write its rows to ``verify-<suite>.csv`` and ``verify-<suite>.json``.

    The command fails if any row has the outcome ``FAIL``.
    """
    suite = flags['suite']
    table = szt.verify.run_suite(suite, config, status)
    outputs = [
        table.save(out_dir / f'verify-{suite}.csv'),
        szt.table.dump_json(
            dict(suite = suite, summary = szt.verify.summarize(table), rows = table.rows),
            out_dir / f'verify-{suite}.json',
        ),
    ]
    return CommandResult(
        outputs = [_write(status, output) for output in outputs],
        success = not szt.verify.failed(table),
    )


def cmd_analyze(flags, config, out_dir, status) -> CommandResult:
    """
    Tabulate a quantity (or ``all`` quantities) to ``analyze-<quantity>.csv``.
    """
    quantity = flags['quantity']
    quantities = szt.analysis.ANALYZE_QUANTITIES if quantity == 'all' else [quantity]
    outputs = list()
    for name in quantities:
        table = szt.analysis.tabulate(name, config['analyze'], seed = config['seed'], status = status)
        outputs.append(_write(status, table.save(out_dir / f'analyze-{name}.csv')))
    return CommandResult(outputs = outputs)


def cmd_simulate(flags, config, out_dir, status) -> CommandResult:
    """
    Simulate the escape from the dead zone (``ou`` mode), or the waiting times until the first transitions
    (``renewal`` mode), and write the estimate to ``simulate-<mode>.csv``.
    """
    section = config['simulate']
    mode = section['mode']
    seed, threads = config['seed'], config['threads']
    if mode == 'ou':
        params = szt.sim.OuParams(
            kappa = float(section['kappa']),
            sigma = float(section['sigma']),
            delta = float(section['delta']),
            dt = float(section['dt']),
            trials = int(section['trials']),
            seed = seed,
        )
        estimate = szt.sim.ou_mfpt_mc(params, threads = threads, status = status)
        row = dict(
            kappa = params.kappa,
            sigma = params.sigma,
            delta = params.delta,
            dt = params.dt,
            lam = params.lam,
            **estimate.to_dict(),
            bvp = szt.sim.ou_mfpt_bvp(params.kappa, params.sigma, params.delta),
        )
    elif mode == 'renewal':
        delta = float(section['delta'])
        step = szt.analysis.create_step(section['step'], float(section['step_mean']), delta)
        prior = szt.prior.LaplacePrior(float(section['prior_scale']))
        estimate = szt.sim.renewal_mc(step, prior, delta, int(section['trials']), seed, threads, status)
        row = dict(
            step = section['step'],
            step_mean = float(section['step_mean']),
            prior_scale = prior.b,
            delta = delta,
            **estimate.to_dict(),
        )
    else:
        raise szt.core.InvalidInputError(f'Unknown simulation mode: "{mode}"')
    output = szt.table.Table([row]).save(out_dir / f'simulate-{mode}.csv')
    return CommandResult(outputs = [_write(status, output)])


def cmd_train(flags, config, out_dir, status) -> CommandResult:
    """
    Train the toy network, and write the report (JSON), the quantized layers, and the latent checkpoint.
    """
    section = config['train']
    lr = section['lr']
    train_config = szt.train.TrainConfig(
        ste = SteKind(section['ste']),
        epochs = int(section['epochs']),
        batch = int(section['batch']),
        lr_schedule = tuple(float(value) for value in lr) if isinstance(lr, list) else (float(lr),),
        beta = float(section['beta']),
        seed = config['seed'],
        noise_seed = section.get('noise_seed', None),
        delta_refresh = szt.train.DeltaRefresh(section['delta_refresh']),
        hidden = int(section['hidden']),
        k = float(section['k']),
        threads = config['threads'],
    )
    dataset = szt.train.synth_dataset(
        section['task'],
        int(section['samples']),
        seed = config['seed'],
        inputs = int(section['inputs']),
    )
    report = szt.train.train(train_config, dataset, status = status)
    outputs = szt.train.save_checkpoint(report, train_config.ste, out_dir)
    outputs.append(
        szt.table.dump_json(
            dict(report.to_dict(), ste = train_config.ste.value, task = dataset.kind),
            out_dir / section.get('out', 'report.json'),
        )
    )
    return CommandResult(outputs = [_write(status, output) for output in outputs])


def _find_tables(root: pathlib.Path) -> List[pathlib.Path]:
    if root.is_file():
        return [root] if root.suffix == '.csv' else []
    return sorted(path for path in root.rglob('*.csv') if path.name != 'summary.csv')


def _label(path: pathlib.Path, root: pathlib.Path) -> str:
    return path.name if root.is_file() else str(path.relative_to(root))


def cmd_report(flags, config, out_dir, status) -> CommandResult:
    """
    Consolidate the tables and manifests of previous runs into ``summary.csv`` (all rows, labeled by their table)
    and ``summary.json`` (the outcomes per anchor, and the manifests without their wall-times).

    Raises:
        ReportInputError: If an input does not exist, or a table or manifest cannot be parsed.
    """
    tables, labels, manifests, inputs = list(), list(), list(), list()
    for root in (pathlib.Path(path) for path in flags.get('inputs', list())):
        if not root.exists():
            raise ReportInputError(f'Input does not exist: {root}', root)
        for path in _find_tables(root):
            try:
                tables.append(szt.table.Table.load(path))
            except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as error:
                raise ReportInputError(f'Cannot parse table {path}: {error}', path)
            labels.append(_label(path, root))
            inputs.append(path)
        for path in szt.manifest.find_manifests(root):
            try:
                manifests.append((_label(path, root), szt.manifest.RunManifest.load(path)))
            except (ValueError, TypeError) as error:
                raise ReportInputError(f'Cannot parse manifest {path}: {error}', path)
            inputs.append(path)

    summary = szt.table.Table.concat(tables, labels)
    outputs = [
        summary.save(out_dir / 'summary.csv'),
        szt.table.dump_json(
            dict(
                anchors = szt.verify.summarize(summary),
                rows = len(summary),
                tables = labels,
                manifests = {label: manifest.without_wall_time() for label, manifest in manifests},
            ),
            out_dir / 'summary.json',
        ),
    ]
    return CommandResult(outputs = [_write(status, output) for output in outputs], inputs = inputs)


def cmd_replay(flags, config, out_dir, status) -> CommandResult:
    """
    Re-run the command recorded by a manifest, with the recorded flags and configuration.
    """
    path = pathlib.Path(flags['manifest'])
    manifest = szt.manifest.RunManifest.load(path)
    if manifest.command == 'replay':
        raise szt.core.InvalidInputError('Cannot replay a replay')
    if changed := manifest.changed_inputs():
        szt.status.update(status, f'Inputs have changed since the recorded run: {", ".join(changed)}')
    recorded = szt.config.Config(manifest.config)
    result = run_command(manifest.command, manifest.flags, recorded, out_dir, szt.status.derive(status))
    return dataclasses.replace(result, inputs = [path] + result.inputs)


COMMAND_FUNCTIONS: Dict[str, Command] = dict(
    calibrate = cmd_calibrate,
    quantize = cmd_quantize,
    inspect = cmd_inspect,
    verify = cmd_verify,
    analyze = cmd_analyze,
    simulate = cmd_simulate,
    train = cmd_train,
    report = cmd_report,
    replay = cmd_replay,
)


def run_command(
        command: str,
        flags: Dict[str, Any],
        config: szt.config.Config,
        out_dir: PathLike,
        status: Optional[szt.status.Status] = None,
    ) -> CommandResult:
    """
    Run a command, and write its manifest (``<command>.manifest.json``) to the `out_dir`.

    Arguments:
        command: One of :data:`COMMANDS`.
        flags: The explicit command-line flags (recorded in the manifest).
        config: The effective configuration.
        out_dir: The output directory (created if it does not exist).
        status: Receives the status updates.
    """
    assert command in COMMAND_FUNCTIONS, f'Unknown command: {command}'
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents = True, exist_ok = True)
    szt.status.update(status, info = 'command', command = command)

    t0 = time.perf_counter()
    result = COMMAND_FUNCTIONS[command](flags, config, out_dir, status)
    manifest = szt.manifest.RunManifest.create(
        command = command,
        flags = flags,
        config = config.entries,
        seed = config.get('seed', 0),
        inputs = result.inputs,
        outputs = [pathlib.Path(output).resolve().relative_to(out_dir.resolve()) for output in result.outputs],
        wall_time = time.perf_counter() - t0,
    )
    _write(status, manifest.save(out_dir))
    return result


def run_cli_ex(*args, **kwargs) -> bool:
    """
    Run a command of the command-line interface, with options given explicitly.

    Arguments:
        *args: Passed through to :func:`main`.
        **kwargs: Passed through to :func:`main`.

    Returns:
        `True` if the command was successful, `False` if an error occurred or a verification check failed.
    """
    _main = main(*args, **kwargs)
    return asyncio.run(_main())


def _add_quantization_arguments(parser, section: str) -> None:
    parser.add_argument('weights', help = 'Dense weights (little-endian float32, with a JSON sidecar).')
    parser.add_argument('--rule', dest = f'{section}/rule', choices = ['sigma', 'fixed-k', 'prior-optimal'])
    parser.add_argument('--k', dest = f'{section}/k', type = float, help = 'Threshold ratio of the fixed-k rule.')
    parser.add_argument(
        '--prior', dest = f'{section}/prior', choices = ['laplace', 'gaussian', 'half-laplace', 'half-gaussian'],
    )
    parser.add_argument('--granularity', dest = f'{section}/granularity', choices = ['layer', 'channel'])
    parser.add_argument('--axis', dest = f'{section}/axis', type = int, help = 'Channel axis.')


def create_parser():
    """
    Create the argument parser. The destinations of options which override configuration entries are the
    slash-separated configuration keys.
    """
    import argparse
    parser = argparse.ArgumentParser(prog = 'szt')

    parser.add_argument('--seed', dest = 'seed', type = int, help = 'Root seed of all random streams.')
    parser.add_argument('--threads', dest = 'threads', type = int, help = 'Number of worker threads.')
    parser.add_argument('--out-dir', default = '.', help = 'Output directory.')
    parser.add_argument('--config', default = None, help = 'Configuration file (JSON or YAML).')
    commands = parser.add_subparsers(dest = 'command', required = True)

    calibrate = commands.add_parser('calibrate', help = 'Calibrate the thresholds of dense weights.')
    _add_quantization_arguments(calibrate, 'calibrate')

    quantize = commands.add_parser('quantize', help = 'Quantize dense weights to a .szt file.')
    _add_quantization_arguments(quantize, 'quantize')
    quantize.add_argument('--scale', dest = 'quantize/scale', choices = ['threshold', 'unit'])
    quantize.add_argument('--output', dest = 'quantize/output', help = 'Name of the .szt file.')

    inspect = commands.add_parser('inspect', help = 'Summarize a .szt file.')
    inspect.add_argument('path')

    verify = commands.add_parser('verify', help = 'Run a verification suite.')
    verify.add_argument('suite', choices = szt.verify.SUITES + ['all'])

    analyze = commands.add_parser('analyze', help = 'Tabulate closed forms against their oracles.')
    analyze.add_argument('quantity', choices = szt.analysis.ANALYZE_QUANTITIES + ['all'])

    simulate = commands.add_parser('simulate', help = 'Simulate dead-zone escape or transition waiting times.')
    simulate.add_argument('--mode', dest = 'simulate/mode', choices = ['ou', 'renewal'])
    for name in ('kappa', 'sigma', 'delta', 'dt'):
        simulate.add_argument(f'--{name}', dest = f'simulate/{name}', type = float)
    simulate.add_argument('--trials', dest = 'simulate/trials', type = int)
    simulate.add_argument('--step', dest = 'simulate/step', choices = ['deterministic', 'exponential'])
    simulate.add_argument('--step-mean', dest = 'simulate/step_mean', type = float)
    simulate.add_argument('--prior-scale', dest = 'simulate/prior_scale', type = float)

    train = commands.add_parser('train', help = 'Train the toy network.')
    train.add_argument('--ste', dest = 'train/ste', choices = [kind.value for kind in SteKind])
    train.add_argument('--epochs', dest = 'train/epochs', type = int)
    train.add_argument('--lr', dest = 'train/lr', type = float)
    train.add_argument('--beta', dest = 'train/beta', type = float)
    train.add_argument('--noise-seed', dest = 'train/noise_seed', type = int)
    train.add_argument('--task', dest = 'train/task', choices = ['regression', 'parity'])
    train.add_argument('--batch', dest = 'train/batch', type = int)
    train.add_argument('--hidden', dest = 'train/hidden', type = int)
    train.add_argument('--delta-refresh', dest = 'train/delta_refresh', choices = ['never', 'per-epoch'])
    train.add_argument('--out', dest = 'train/out', help = 'Name of the report file.')

    report = commands.add_parser('report', help = 'Consolidate the outputs of previous runs.')
    report.add_argument('inputs', nargs = '*', help = 'Output files or directories.')

    replay = commands.add_parser('replay', help = 'Re-run the command recorded by a manifest.')
    replay.add_argument('manifest')

    return parser


def run_cli(
        argv: Optional[Sequence[str]] = None,
        status_reader_cls: Type[szt.status.StatusReader] = StatusReaderConsoleAdapter,
    ) -> bool:
    """
    Run the command-line interface, parsing the options from the command line.

    Returns:
        `True` if the command was successful, `False` if an error occurred or a verification check failed.
    """
    args = vars(create_parser().parse_args(argv))
    command = args.pop('command')
    out_dir = args.pop('out_dir')
    config_path = args.pop('config')
    flags = {key: value for key, value in args.items() if value is not None}
    return szt.cli.run_cli_ex(command, flags, out_dir, config_path, status_reader_cls)


def main(
        command: str,
        flags: Dict[str, Any],
        out_dir: PathLike = '.',
        config_path: Optional[PathLike] = None,
        status_reader_cls: Type[szt.status.StatusReader] = StatusReaderConsoleAdapter,
    ) -> Coroutine[Any, Any, bool]:
    """
    Create a co-routine for running a command of the command-line interface.

    The effective configuration is resolved from the defaults, the configuration file at `config_path`, and the
    `flags` whose keys are configuration keys (``seed``, ``threads``, and slash-separated keys like
    ``train/epochs``). The remaining flags are the positional arguments of the command.

    Arguments:
        command: One of :data:`COMMANDS`.
        flags: The explicit command-line flags.
        out_dir: The output directory.
        config_path: Configuration file (JSON or YAML).
        status_reader_cls: The status reader implementation used for displaying status updates.

    Returns:
        Co-routine which runs the command in a worker thread. The co-routine returns `True` upon success, `False` if
        an error occurred or a verification check failed.
    """
    assert command in COMMANDS, f'Unknown command: {command}'
    overrides = szt.config.nested(
        {key: value for key, value in flags.items() if key in ('seed', 'threads') or '/' in key}
    )

    async def _main():
        with szt.status.create() as status:
            async with status_reader_cls(status.filepath):
                try:
                    config = szt.config.load_config(config_path, overrides)
                    loop = asyncio.get_running_loop()
                    result = await loop.run_in_executor(
                        None,
                        functools.partial(run_command, command, dict(flags), config, out_dir, status),
                    )
                    return result.success

                except (szt.core.SztError, OSError) as error:
                    szt.status.update(
                        status,
                        info = 'error',
                        command = command,
                        error = type(error).__name__,
                        traceback = traceback.format_exc(),
                    )
                    return False

    return _main
