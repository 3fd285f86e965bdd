"""Socket server: newline-delimited JSON between the engine and cognition clients.

Every connection is an independent client with its own seq space and
subscription. Lines go into the engine inbox; acks and events come back through
a per-client queue so a slow reader never stalls the engine.
"""

import asyncio
import itertools
import logging
from typing import Optional, Tuple

import uvicorn

from ..errors import ConfigError
from .control_panel import create_app
from .messages import encode

logger = logging.getLogger(__name__)


def parse_address(address: str, default_port: int = 7411) -> Tuple[str, int]:
    """``host:port`` (or bare ``host``) to a tuple."""
    host, _, port = address.rpartition(":")
    if not host:
        return address or "127.0.0.1", default_port
    try:
        return host, int(port)
    except ValueError:
        raise ConfigError(f"bad port in {address!r}")


class EarServer:
    """Serves one engine to any number of clients."""

    def __init__(self, engine, address: str = "127.0.0.1:7411"):
        self.engine = engine
        self.host, self.port = parse_address(address)
        self._ids = itertools.count(1)
        self._server: Optional[asyncio.AbstractServer] = None
        self._writers = {}

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle_client, self.host, self.port)
        sock = self._server.sockets[0].getsockname()
        self.port = sock[1]
        logger.info("[Server] listening on %s:%s", self.host, self.port)

    async def _handle_client(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        client_id = f"c{next(self._ids)}"
        queue: asyncio.Queue = asyncio.Queue()
        self.engine.connect(client_id, sink=queue.put_nowait)
        pump = asyncio.create_task(self._pump(queue, writer))
        self._writers[client_id] = (queue, pump)
        logger.info("[Server] %s connected", client_id)
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                if line.strip():
                    self.engine.submit(client_id, line)
        except (ConnectionError, asyncio.IncompleteReadError) as e:
            logger.info("[Server] %s dropped: %s", client_id, e)
        finally:
            self.engine.disconnect(client_id)
            await queue.put(None)
            await pump
            self._writers.pop(client_id, None)
            writer.close()

    async def _pump(self, queue: asyncio.Queue, writer: asyncio.StreamWriter) -> None:
        while True:
            message = await queue.get()
            if message is None:
                return
            try:
                writer.write(encode(message).encode("utf-8"))
                await writer.drain()
            except ConnectionError:
                return

    async def run_engine(self, realtime: bool = True, idle_s: float = 0.05) -> None:
        """Step the engine, then keep answering commands once the scene has ended."""
        while not self.engine.finished:
            self.engine.step()
            await asyncio.sleep(self.engine.window_s if realtime else 0)
        while True:
            self.engine.drain_inbox()
            await asyncio.sleep(idle_s)

    async def stop(self) -> None:
        """Flush pending acks, then close every connection."""
        self.engine.drain_inbox()
        for queue, pump in list(self._writers.values()):
            await queue.put(None)
            await pump
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()


async def serve_async(engine, address: str, http: Optional[str] = None, realtime: bool = True) -> None:
    """Run the socket server (and optionally the HTTP control panel) until cancelled."""
    server = EarServer(engine, address)
    await server.start()
    tasks = [asyncio.create_task(server.run_engine(realtime))]
    if http:
        host, port = parse_address(http, 8000)
        panel = uvicorn.Server(uvicorn.Config(create_app(engine), host=host, port=port, log_level="warning"))
        tasks.append(asyncio.create_task(panel.serve()))
    try:
        await asyncio.gather(*tasks)
    finally:
        for task in tasks:
            task.cancel()
        await server.stop()


def serve(engine, address: str, http: Optional[str] = None, realtime: bool = True) -> None:
    asyncio.run(serve_async(engine, address, http, realtime))
