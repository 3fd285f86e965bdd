from .messages import COMMANDS, EVENT_KINDS, AckMessage, CommandMessage, EventMessage, HeadDetail, decode, encode

__all__ = ["COMMANDS", "EVENT_KINDS", "AckMessage", "CommandMessage", "EventMessage", "HeadDetail", "decode", "encode"]
