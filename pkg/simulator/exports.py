"""CSV writers: header row, ``.`` decimals, ``\\n`` line endings"""
import logging
from pathlib import Path
from typing import Union

import pandas as pd

logger = logging.getLogger(__name__)


def write_csv(df: pd.DataFrame, directory: Union[str, Path], filename: str) -> Path:
    path = Path(directory) / filename
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')
    logger.debug(f'Wrote {len(df)} rows to {path}')
    return path


def distance_tag(value: float) -> str:
    """Compact number for file names: 1.0 -> '1', 2.5 -> '2.5'"""
    return f'{value:g}'
