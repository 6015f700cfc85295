from .calls import Call
from .contract import (ContractParams, DisputeRecord, Err, LedgerEvent, ParticipantRecord, Phase,
                       Receipt, Revert, Status, ZkDkgContract, abort_bound_for, threshold_for)
from .gas import GasMeter, GasModel

__all__ = [
    "Call", "ContractParams", "DisputeRecord", "Err", "GasMeter", "GasModel", "LedgerEvent",
    "ParticipantRecord", "Phase", "Receipt", "Revert", "Status", "ZkDkgContract",
    "abort_bound_for", "threshold_for",
]
