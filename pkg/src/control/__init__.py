"""Joint-level control: action mapping and PD tracking."""

from src.control.actuation import ActionCommand, PdGains, action_to_target, pd_torque

__all__ = ['ActionCommand', 'PdGains', 'action_to_target', 'pd_torque']
