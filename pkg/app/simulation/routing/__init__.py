from typing import Dict, Type

from app.models.scenario import ProtocolName
from app.simulation.routing.aodv import AodvProtocol
from app.simulation.routing.base import RouteRow, RoutingProtocol
from app.simulation.routing.dsdv import DsdvProtocol
from app.simulation.routing.dsr import DsrProtocol
from app.simulation.routing.tora import ToraProtocol

PROTOCOLS: Dict[ProtocolName, Type[RoutingProtocol]] = {
    ProtocolName.AODV: AodvProtocol,
    ProtocolName.DSR: DsrProtocol,
    ProtocolName.DSDV: DsdvProtocol,
    ProtocolName.TORA: ToraProtocol,
}

__all__ = [
    "PROTOCOLS",
    "AodvProtocol",
    "DsdvProtocol",
    "DsrProtocol",
    "RouteRow",
    "RoutingProtocol",
    "ToraProtocol",
]
