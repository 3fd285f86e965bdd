"""Base command service interface: every client surface calls the engine through this."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from pydantic import BaseModel

from ..errors import EarSimError


class ServiceResponse(BaseModel):
    """Standard service response structure."""

    result: Any = None
    error: Optional[str] = None
    error_code: Optional[str] = None
    success: bool = True


class BaseCommandService(ABC):
    """Abstract base class for command services."""

    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def call(
        self,
        cmd: str,
        args: Optional[Dict[str, Any]] = None,
        client: str = "local",
        seq: Optional[int] = None,
    ) -> ServiceResponse:
        """Execute one command. Never raises: failures come back as error responses."""

    def _success(self, result: Any = None) -> ServiceResponse:
        return ServiceResponse(result=result, success=True)

    def _error(self, message: str, code: str = "error") -> ServiceResponse:
        return ServiceResponse(error=message, error_code=code, success=False)

    def _failure(self, exc: EarSimError) -> ServiceResponse:
        return self._error(exc.message, exc.code)
