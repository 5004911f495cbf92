"""Command line front end: model time series and the randomized inequality sweep."""

import argparse
import concurrent.futures
import json
import logging
import os
import pathlib
import sys
from collections.abc import Mapping, Sequence
from typing import TYPE_CHECKING, Any, Callable, NamedTuple, NoReturn, Optional

import numpy as np
import pandas as pd

from qbattery.closed import (
    BoundReport,
    evolution,
    power_bounds,
    power_combined_bound,
    work,
    work_bounds,
)
from qbattery.coherence import basis_of
from qbattery.errors import InvalidParamsError, QBatteryError
from qbattery.ineq import (
    InequalityCheck,
    check_propositions,
    frobenius_trace_ineq,
    holder_rank_trace_ineq,
    holds,
    lemma1,
    lemma1_prime,
    lemma1_unitary_corollary,
    lemma2,
    lemma2b,
    von_neumann_work_bounds,
)
from qbattery.models.spin_boson import (
    SpinBosonParams,
    spin_boson_bound_series,
    spin_boson_build,
    spin_boson_state,
)
from qbattery.models.two_spin import (
    TwoSpinParams,
    two_spin_build,
    two_spin_power,
    two_spin_work,
)
from qbattery.models.xy import (
    XYChainParams,
    xy_power,
    xy_work,
    xy_work_bound_a,
)
from qbattery.open import kraus_bounds, lindblad_evolve
from qbattery.sampling import (
    random_battery,
    random_complex,
    random_density_matrix,
    random_hermitian,
    random_hermitian_kraus_channel,
    random_normal,
    random_projectors,
    random_unitary,
)

if TYPE_CHECKING:
    from qbattery.linalg import ComplexMatrix

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VIOLATION = 2

# bound column -> the quantity column it has to dominate, row by row
BOUND_COLUMNS = {
    'two-spin': {
        'W_bound_A': 'W',
        'W_bound_B': 'W',
        'W_bound_C': 'W',
        'P_bound_A': 'P',
        'P_bound_B': 'P',
        'P_bound_C': 'P',
    },
    'xy': {'W_bound_A': 'W'},
    'spin-boson': {'bound_rhs': 'dE_abs'},
}


class RunConfig(NamedTuple):
    subcommand: str
    model: dict[str, Any]
    t_end: float
    steps: int
    dt: Optional[float]
    dims: tuple[int, ...]
    samples: int
    seed: int
    output_path: str
    params_out: Optional[str] = None
    output_format: str = 'csv'

    def validate(self) -> 'RunConfig':
        if self.subcommand != 'verify':
            if self.steps < 2:
                raise InvalidParamsError(f'steps must be >= 2, got {self.steps}')
            if not self.t_end > 0:
                raise InvalidParamsError(f't_end must be > 0, got {self.t_end}')
        elif self.samples < 1 or not self.dims or min(self.dims) < 1:
            raise InvalidParamsError('verify needs samples >= 1 and positive dims')
        if self.seed < 0:
            raise InvalidParamsError(f'seed must be unsigned, got {self.seed}')
        return self

    @property
    def times(self) -> 'np.ndarray':
        return np.linspace(0.0, self.t_end, self.steps + 1)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise InvalidParamsError(message)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(','))
    except ValueError as exc:
        message = f'expected comma separated numbers: {text}'
        raise argparse.ArgumentTypeError(message) from exc


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(','))
    except ValueError as exc:
        message = f'expected comma separated integers: {text}'
        raise argparse.ArgumentTypeError(message) from exc


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--out', required=True, help='CSV file to write')
    common.add_argument('--params-out', help='Write the resolved config as JSON')
    common.add_argument('--seed', type=int, default=0, help='Master seed')
    common.add_argument('-v', '--verbose', action='store_true', help='Debug logging')

    timed = _Parser(add_help=False)
    timed.add_argument('--t-end', type=float, default=10.0, help='Final time')
    timed.add_argument('--steps', type=int, default=200, help='Number of time steps')

    parser = _Parser(
        prog='qbattery',
        description='Coherence bounds on work and power of quantum batteries.',
    )
    sub = parser.add_subparsers(dest='subcommand', required=True)

    two_spin = sub.add_parser('two-spin', parents=[common, timed], help='Two qubits')
    two_spin.add_argument('--j', type=float, default=1.0, help='Coupling J')
    two_spin.add_argument('--b', type=float, default=1.0, help='Field B')
    two_spin.add_argument(
        '--eps',
        type=_floats,
        default=(0.1, 0.2, 0.05),
        help='Bloch parameters x,y,z of the initial state',
    )

    xy = sub.add_parser('xy', parents=[common, timed], help='XY chain quench')
    xy.add_argument('--n', type=int, default=1000, help='Number of spins (even)')
    xy.add_argument('--eta', type=float, default=0.5, help='Anisotropy')
    xy.add_argument('--h1', type=float, default=0.0, help='Initial field')
    xy.add_argument('--h2', type=float, default=1.0, help='Quench field')

    boson = sub.add_parser('spin-boson', parents=[common, timed], help='Spin-boson')
    boson.add_argument('--omega0', type=float, default=0.1, help='Level spacing')
    boson.add_argument('--delta0', type=float, default=1.0, help='Tunnelling')
    boson.add_argument('--gamma', type=float, default=10.0, help='Dephasing rate')
    boson.add_argument('--rho12', type=float, default=0.3, help='Initial coherence')
    boson.add_argument('--dt', type=float, default=1e-3, help='Integrator step')
    boson.set_defaults(t_end=1.0, steps=100)

    verify = sub.add_parser('verify', parents=[common], help='Randomized sweep')
    verify.add_argument('--dims', type=_ints, default=(2, 3, 4, 6, 8), help='2,3,...')
    verify.add_argument('--samples', type=int, default=100, help='Per dimension')
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    model: dict[str, Any] = {}
    if args.subcommand == 'two-spin':
        model = {'J': args.j, 'B': args.b, 'eps': list(args.eps)}
    elif args.subcommand == 'xy':
        model = {'N': args.n, 'eta': args.eta, 'h1': args.h1, 'h2': args.h2}
    elif args.subcommand == 'spin-boson':
        model = {
            'omega0': args.omega0,
            'delta0': args.delta0,
            'gamma': args.gamma,
            'rho12': args.rho12,
        }
    return RunConfig(
        subcommand=args.subcommand,
        model=model,
        t_end=getattr(args, 't_end', 0.0),
        steps=getattr(args, 'steps', 0),
        dt=getattr(args, 'dt', None),
        dims=tuple(getattr(args, 'dims', ())),
        samples=getattr(args, 'samples', 0),
        seed=args.seed,
        output_path=args.out,
        params_out=args.params_out,
    ).validate()


def _two_spin_frame(config: RunConfig) -> pd.DataFrame:
    p = TwoSpinParams.create(**config.model)
    battery = two_spin_build(p, 2)
    rows = []
    for t in config.times:
        w, pw = work_bounds(battery, t), power_bounds(battery, t)
        rows.append(
            {
                't': t,
                'W': two_spin_work(p, t),
                'P': two_spin_power(p, t),
                'W_bound_A': w.bound_a,
                'W_bound_B': w.bound_b,
                'W_bound_C': w.bound_c,
                'P_bound_A': pw.bound_a,
                'P_bound_B': pw.bound_b,
                'P_bound_C': pw.bound_c,
            },
        )
    return pd.DataFrame(rows)


def _xy_frame(config: RunConfig) -> pd.DataFrame:
    p = XYChainParams.create(**config.model)
    times = config.times
    return pd.DataFrame(
        {
            't': times,
            'W': [xy_work(p, t) for t in times],
            'P': [xy_power(p, t) for t in times],
            'W_bound_A': xy_work_bound_a(p),
        },
    )


def _spin_boson_frame(config: RunConfig) -> pd.DataFrame:
    model = dict(config.model)
    p = SpinBosonParams.create(rho0=spin_boson_state(model.pop('rho12')), **model)
    assert config.dt is not None
    traj = lindblad_evolve(spin_boson_build(p), p.rho0, config.t_end, config.dt)
    series = spin_boson_bound_series(p, traj)
    logger.debug('spin-boson bound path: %s', series.path)
    index = [traj.index_at(t) for t in config.times]
    return pd.DataFrame(
        {
            't': series.times[index],
            'E': series.energies[index],
            'dE_abs': series.quantity[index],
            'bound_rhs': series.bound[index],
            'WA': series.W_A[index],
            'WB': series.W_B[index],
            're_rho12': series.rho12[index].real,
            'im_rho12': series.rho12[index].imag,
        },
    )


def _report_checks(prefix: str, report: BoundReport) -> list[InequalityCheck]:
    bounds = {'a': report.bound_a, 'b': report.bound_b, 'c': report.bound_c}
    return [
        InequalityCheck.of(f'{prefix}_bound_{key}', abs(report.quantity), bound)
        for key, bound in bounds.items()
        if bound is not None
    ]


def _degenerate_hermitian(rng: np.random.Generator, n: int) -> 'ComplexMatrix':
    parts = int(rng.integers(1, n + 1))
    projectors = random_projectors(rng, n, parts)
    return sum(
        ((j + 1) * proj for j, proj in enumerate(projectors)),
        np.zeros((n, n), dtype=np.complex128),
    )


def verify_instance(rng: np.random.Generator, n: int) -> list[InequalityCheck]:
    """Every inequality of the library on one random instance of dimension n."""
    A = random_complex(rng, n)
    B = random_hermitian(rng, n)
    normal = random_normal(rng, n)
    U = random_unitary(rng, n)
    checks = [
        frobenius_trace_ineq(A, B),
        holder_rank_trace_ineq(A, B),
        lemma1(normal, B),
        lemma1_unitary_corollary(U, B),
        lemma1_prime(U, B),
        lemma2(normal, B),
        lemma2b(random_hermitian(rng, n), B),
    ]
    checks += check_propositions(basis_of(_degenerate_hermitian(rng, n)), A, B)

    battery = random_battery(rng, n)
    t = float(rng.uniform(0.0, 5.0))
    checks += _report_checks('work', work_bounds(battery, t))
    checks += _report_checks('power', power_bounds(battery, t))
    checks.append(power_combined_bound(battery, t))
    vn = von_neumann_work_bounds(battery.rho0, battery.H0, evolution(battery, t))
    w = abs(work(battery, t))
    checks += [
        InequalityCheck.of('von_neumann_lower', vn.lower, w),
        InequalityCheck.of('von_neumann_upper', w, vn.upper),
        InequalityCheck.of('von_neumann_weyl', vn.upper, vn.weyl_upper),
    ]

    kind = 'measurement' if rng.random() < 0.5 else 'reflection'
    channel = random_hermitian_kraus_channel(rng, n, int(rng.integers(1, 4)), kind)
    rho = random_density_matrix(rng, n)
    report = kraus_bounds(channel, rho, random_hermitian(rng, n))
    checks += _report_checks('kraus', report)
    return checks


def verify_cell(cell: tuple[int, int, int]) -> list[dict[str, Any]]:
    """Rows for one (seed, dim, sample) cell, seeded from the cell alone."""
    seed, n, sample = cell
    rng = np.random.default_rng([seed, n, sample])
    return [
        {
            'name': check.name,
            'dim': n,
            'seed': seed,
            'lhs': check.lhs,
            'rhs': check.rhs,
            'slack_ratio': check.slack_ratio,
            'holds': check.holds,
        }
        for check in verify_instance(rng, n)
    ]


def _verify_frame(config: RunConfig) -> pd.DataFrame:
    cells = [
        (config.seed, n, sample)
        for n in config.dims
        for sample in range(config.samples)
    ]
    chunksize = max(1, len(cells) // (4 * (os.cpu_count() or 1)))
    # map keeps the cell order, so the rows do not depend on scheduling
    with concurrent.futures.ProcessPoolExecutor() as pool:
        rows = [
            row
            for chunk in pool.map(verify_cell, cells, chunksize=chunksize)
            for row in chunk
        ]
    logger.info('verify: %d cells over dims %s', len(cells), config.dims)
    return pd.DataFrame(rows)


STUDIES: dict[str, Callable[[RunConfig], pd.DataFrame]] = {
    'two-spin': _two_spin_frame,
    'xy': _xy_frame,
    'spin-boson': _spin_boson_frame,
    'verify': _verify_frame,
}


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ','.join(map(str, value))
    return str(value)


def _comment(config: RunConfig) -> str:
    params: dict[str, Any] = {'subcommand': config.subcommand, **config.model}
    if config.subcommand == 'verify':
        params.update(dims=config.dims, samples=config.samples, seed=config.seed)
    else:
        params.update(t_end=config.t_end, steps=config.steps)
        if config.dt is not None:
            params['dt'] = config.dt
    return ' '.join(f'{key}={_format_value(value)}' for key, value in params.items())


def emit_csv(frame: pd.DataFrame, path: str, comment: str = '') -> None:
    if frame.empty:
        raise InvalidParamsError('nothing to write')
    with pathlib.Path(path).open('w', newline='') as stream:
        stream.write(f'# {comment}\n')
        frame.to_csv(stream, index=False, float_format='%.17g', lineterminator='\n')


def find_violations(subcommand: str, frame: pd.DataFrame) -> pd.DataFrame:
    """Rows where some bound column fails to dominate its quantity."""
    if subcommand == 'verify':
        return frame[~frame['holds']]
    failing = np.zeros(len(frame), dtype=bool)
    for bound, quantity in BOUND_COLUMNS[subcommand].items():
        lhs = frame[quantity].abs().to_numpy()
        rhs = frame[bound].to_numpy()
        failing |= [not holds(q, b) for q, b in zip(lhs, rhs)]
    return frame[failing]


def _write_json(path: str, payload: Mapping[str, Any]) -> None:
    with pathlib.Path(path).open('w') as stream:
        json.dump(payload, stream, indent=2, sort_keys=True)
        stream.write('\n')


def run(config: RunConfig) -> int:
    frame = STUDIES[config.subcommand](config)
    emit_csv(frame, config.output_path, _comment(config))
    violations = find_violations(config.subcommand, frame)
    if violations.empty:
        return EXIT_OK
    logger.warning('%d rows violate a bound', len(violations))
    _write_json(
        f'{config.output_path}.violation',
        {
            'config': config._asdict(),
            'violations': json.loads(violations.to_json(orient='records')),
        },
    )
    return EXIT_VIOLATION


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format='%(levelname)s %(name)s: %(message)s',
        )
        config = config_from_args(args)
        if config.params_out:
            _write_json(config.params_out, config._asdict())
        return run(config)
    except (QBatteryError, ValueError, OSError) as exc:
        sys.stderr.write(f'qbattery: {exc}\n')
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
