"""Lỗi dùng chung cho toàn bộ simulator.

Mỗi lỗi mang theo ``exit_code`` để lệnh ``manage.py thz`` trả về đúng mã thoát.
"""


class SimulationError(Exception):
    """Base class for every error raised by the simulator"""

    exit_code = 1


class DomainError(SimulationError, ValueError):
    """Input outside the physical domain of an operation"""

    exit_code = 2


class ConfigError(SimulationError):
    """Invalid simulation config (unknown key, bad value, missing scenario)"""

    exit_code = 2

    def __init__(self, message: str, field: str = ''):
        self.field = field
        super().__init__(f'{field}: {message}' if field else message)


class NoFeasibleBand(SimulationError):
    """No transmission window is wide enough for the requested bandwidth"""

    exit_code = 3

    def __init__(self, required_bandwidth: float, widest_bandwidth: float):
        self.required_bandwidth = required_bandwidth
        self.widest_bandwidth = widest_bandwidth
        super().__init__(
            f'no feasible band: need {required_bandwidth / 1e9:.3f} GHz, '
            f'widest window is {widest_bandwidth / 1e9:.3f} GHz'
        )


class LinkInfeasible(SimulationError):
    """Required rate cannot be met even at the shortest hop"""

    exit_code = 3
