import logging

from celery import shared_task

from .config import parse_config
from .exceptions import SimulationError
from .runner import run

logger = logging.getLogger(__name__)


@shared_task
def run_simulation(config_text, overrides=None, scenario=None):
    """
    Chạy một kịch bản mô phỏng trong worker Celery.
    Trả về dict kết quả; lỗi được ghi vào SimulationRun và trả về trong 'error'.
    """
    try:
        config = parse_config(config_text, overrides or (), scenario=scenario)
        result = run(config)
        return {
            'success': True,
            'scenario': result.scenario,
            'summary': result.summary,
            'files': [str(f) for f in result.files],
        }
    except SimulationError as e:
        return {'success': False, 'exit_code': e.exit_code, 'error': str(e)}
    except Exception as e:
        logger.error(f'Celery task failed for scenario {scenario}: {e}')
        return {'success': False, 'exit_code': 1, 'error': str(e)}
