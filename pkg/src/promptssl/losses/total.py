"""
Unweighted sum of the enabled objectives.
"""
import math
from typing import Dict, Optional, Union

import torch
from torch import Tensor

from promptssl.common import ConfigError
from promptssl.config import LossConfig
from promptssl.losses.common import LossReport, NonFiniteLossError

Term = Union[Tensor, float, None]

# Named loss-term combinations, one per ablation row.
LOSS_PRESETS: Dict[str, Dict[str, bool]] = {
    "ce": dict(enable_ce=True, enable_con=False, enable_sem=False,
               sem_use_x1=True, sem_use_x2=True),
    "ce+con": dict(enable_ce=True, enable_con=True, enable_sem=False,
                   sem_use_x1=True, sem_use_x2=True),
    "ce+sem(x1)": dict(enable_ce=True, enable_con=False, enable_sem=True,
                       sem_use_x1=True, sem_use_x2=False),
    "ce+sem(x2)": dict(enable_ce=True, enable_con=False, enable_sem=True,
                       sem_use_x1=False, sem_use_x2=True),
    "ce+sem(x1+x2)": dict(enable_ce=True, enable_con=False,
                          enable_sem=True, sem_use_x1=True,
                          sem_use_x2=True),
    "ce+sem+con": dict(enable_ce=True, enable_con=True, enable_sem=True,
                       sem_use_x1=True, sem_use_x2=True),
}


def _value(term: Term) -> float:
    if term is None:
        return 0.0
    if isinstance(term, Tensor):
        return float(term.detach())
    return float(term)


def total_loss(
    l_con: Term,
    l_ce: Term,
    l_sem: Term,
    config: Optional[LossConfig] = None,
    batch_size: int = 0,
    temperature: float = 0.0,
) -> LossReport:
    """
    Sum the enabled loss terms with unit weights.

    Args:
        l_con: Contrastive term
        l_ce: Cross-entropy term
        l_sem: Prompt-consistency term
        config: Term toggles; all terms enabled when None
        batch_size: Recorded in the report
        temperature: Recorded in the report

    Returns:
        LossReport; ``total`` carries the graph when tensors were given

    Raises:
        ConfigError: If every term is disabled
        NonFiniteLossError: If an enabled term is NaN or infinite
    """
    config = config or LossConfig()
    enabled = {
        "l_con": (config.enable_con, l_con),
        "l_ce": (config.enable_ce, l_ce),
        "l_sem": (config.enable_sem, l_sem),
    }
    if not any(flag for flag, _ in enabled.values()):
        raise ConfigError("All loss terms are disabled.")

    values = {}
    total: Union[Tensor, float] = 0.0
    for name, (flag, term) in enabled.items():
        if not flag:
            values[name] = 0.0
            continue
        if term is None:
            raise ConfigError(f"Loss term {name} is enabled but missing.")
        values[name] = _value(term)
        total = total + term

    if not all(math.isfinite(v) for v in values.values()):
        raise NonFiniteLossError(
            "Non-finite loss: " + ", ".join(
                f"{k}={v}" for k, v in values.items()), values)

    total_tensor = total if isinstance(total, Tensor) else torch.tensor(
        total)
    return LossReport(
        l_con=values["l_con"],
        l_ce=values["l_ce"],
        l_sem=values["l_sem"],
        l_total=_value(total),
        enable_con=config.enable_con,
        enable_ce=config.enable_ce,
        enable_sem=config.enable_sem,
        batch_size=batch_size,
        temperature=temperature,
        total=total_tensor,
    )
