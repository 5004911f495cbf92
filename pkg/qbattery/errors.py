from typing import Any


class QBatteryError(Exception):
    """Base of the package errors; rebuilds from the constructor arguments."""

    init_args: tuple[Any, ...]

    def __new__(cls, *args: Any) -> 'QBatteryError':
        self = super().__new__(cls, *args)
        self.init_args = args
        return self

    def __reduce__(self) -> tuple[Any, ...]:
        return type(self), self.init_args


class DimensionMismatchError(QBatteryError, ValueError):
    def __init__(self, *shapes: tuple[int, ...]) -> None:
        super().__init__(f'operand shapes do not match: {", ".join(map(str, shapes))}')


class NotNormalError(QBatteryError, ValueError):
    def __init__(self, residual: float, kind: str = 'normal') -> None:
        self.residual = residual
        super().__init__(f'operator is not {kind} (residual {residual:.3g})')


class NotHermitianError(NotNormalError):
    def __init__(self, residual: float) -> None:
        super().__init__(residual, 'hermitian')


class NotUnitaryError(NotNormalError):
    def __init__(self, residual: float) -> None:
        super().__init__(residual, 'unitary')


class NotDensityMatrixError(QBatteryError, ValueError):
    def __init__(self, reason: str) -> None:
        super().__init__(f'not a density matrix: {reason}')


class DegenerateClusteringError(QBatteryError, ArithmeticError):
    def __init__(self, span: float, cluster_tol: float) -> None:
        super().__init__(
            f'eigenvalue cluster spans {span:.3g},'
            f' more than 10 x cluster_tol={cluster_tol:.3g}',
        )


class ZeroNormError(QBatteryError, ArithmeticError):
    def __init__(self, name: str, norm: float) -> None:
        super().__init__(f'operator norm of {name} vanishes ({norm:.3g})')


class IncompleteChannelError(QBatteryError, ValueError):
    def __init__(self, residual: float, tol: float) -> None:
        super().__init__(
            f'kraus operators are not complete:'
            f' |sum A^dag A - I| = {residual:.3g} > {tol:.3g}',
        )


class NonHermitianKrausError(QBatteryError, ValueError):
    def __init__(self, index: int) -> None:
        super().__init__(f'kraus operator #{index} is not hermitian')


class NonHermitianLindbladError(QBatteryError, ValueError):
    def __init__(self, index: int) -> None:
        super().__init__(f'lindblad operator #{index} is not hermitian')


class StepTooLargeWarning(RuntimeWarning):
    def __init__(self, dt: float, stiffness: float) -> None:
        super().__init__(
            f'dt={dt:.3g} gives dt*(|H| + sum gamma |L|^2)'
            f' = {dt * stiffness:.3g} > 0.1',
        )


class StepTooLargeError(QBatteryError, ValueError):
    def __init__(self, dt: float, stiffness: float) -> None:
        super().__init__(str(StepTooLargeWarning(dt, stiffness)))


class TOutsideTrajectoryError(QBatteryError, ValueError):
    def __init__(self, t: float, t_end: float) -> None:
        super().__init__(f't={t} lies outside the trajectory range [0, {t_end}]')


class TooLargeError(QBatteryError, ValueError):
    def __init__(self, what: str, size: int, limit: int) -> None:
        super().__init__(f'{what}={size} exceeds the supported maximum {limit}')


class InvalidParamsError(QBatteryError, ValueError):
    def __init__(self, reason: str) -> None:
        super().__init__(f'invalid parameters: {reason}')
