"""
Verifier-side PoX algorithms: XRequest issues a fresh challenge and opens a
session, XVerify recomputes the expected MAC with EXEC=1 and closes it.
"""

import logging
import random
import secrets
import threading
import time
from enum import Enum
from typing import Callable, Dict, Optional, Set, Tuple, Union

from pydantic import BaseModel, Field

from mcu_machine.layout import DEFAULT_LAYOUT, MemoryLayout
from mcu_machine.isa import INSTRUCTION_SIZE

from pox_monitor.metadata import MetadataRegisters
from pox_protocol.errors import RequestRefused
from pox_protocol.wire import CHAL_SIZE, OR_BOTTOM, Request, Response
from sw_att.attest import serialize_fields
from sw_att.crypto import KEY_SIZE, derive_key, hmac_sha256, mac_equal

logger = logging.getLogger(__name__)

DEFAULT_SESSION_TIMEOUT = 10_000_000

Bounds = Tuple[int, int]


class SessionState(str, Enum):
    OUTSTANDING = "outstanding"
    CLOSED = "closed"


class VerifierSession(BaseModel):
    """One outstanding or closed XRequest."""

    chal: bytes = Field(..., description="Challenge sent with the request")
    expected_s: bytes = Field(..., description="Code the verifier expects in ER")
    er_min: int
    er_max: int
    or_min: int = OR_BOTTOM
    or_max: int = OR_BOTTOM
    t_req: int = Field(..., description="Verifier clock when the request was issued")
    t_verif: Optional[int] = Field(None, description="Verifier clock when the session closed")
    state: SessionState = SessionState.OUTSTANDING
    accepted: bool = False

    def expected_metadata(self) -> MetadataRegisters:
        return MetadataRegisters(
            er_min=self.er_min, er_max=self.er_max, or_min=self.or_min, or_max=self.or_max, exec=1, chal=self.chal
        )

    @property
    def expected_o_len(self) -> int:
        bounds = self.expected_metadata().or_range()
        return 0 if bounds is None else bounds[1] - bounds[0] + 1


class Verifier:
    """Holds K and the session table; safe to share between threads."""

    def __init__(
        self,
        key: bytes,
        layout: MemoryLayout = DEFAULT_LAYOUT,
        clock: Optional[Callable[[], int]] = None,
        timeout: int = DEFAULT_SESSION_TIMEOUT,
        rng: Optional[random.Random] = None,
    ):
        if len(key) != KEY_SIZE:
            raise ValueError(f"verifier key must be {KEY_SIZE} bytes")
        self._key = key
        self.layout = layout
        self.clock = clock or time.monotonic_ns
        self.timeout = timeout
        self.rng = rng
        self.sessions: Dict[bytes, VerifierSession] = {}
        self.accepted: Set[bytes] = set()
        self._lock = threading.Lock()

    def _fresh_chal(self) -> bytes:
        if self.rng is not None:
            return self.rng.randbytes(CHAL_SIZE)
        return secrets.token_bytes(CHAL_SIZE)

    def _check_regions(self, er: Bounds, or_: Optional[Bounds]) -> None:
        er_min, er_max = er
        if er_min > er_max or not self.layout.prog.covers(er_min, er_max):
            raise RequestRefused(f"ER [0x{er_min:04X},0x{er_max:04X}] is not inside prog {self.layout.prog}")
        if (er_max - er_min + 1) % INSTRUCTION_SIZE:
            raise RequestRefused(f"ER size must be a multiple of {INSTRUCTION_SIZE} bytes")
        if or_ is not None:
            or_min, or_max = or_
            if or_min > or_max or not self.layout.data.covers(or_min, or_max):
                raise RequestRefused(f"OR [0x{or_min:04X},0x{or_max:04X}] is not inside data {self.layout.data}")

    def xrequest(
        self,
        s: Optional[bytes],
        er: Bounds,
        or_: Optional[Bounds] = None,
        expected_s: Optional[bytes] = None,
    ) -> Request:
        """Open a session for executing s (or the pre-installed expected_s) in er."""
        self._check_regions(er, or_)
        er_size = er[1] - er[0] + 1
        if s is not None and len(s) != er_size:
            raise RequestRefused(f"s is {len(s)} bytes but ER spans {er_size}")
        expected = s if s is not None else expected_s
        if expected is None:
            raise RequestRefused("s is omitted, so the pre-installed code must be supplied as expected_s")
        if len(expected) != er_size:
            raise RequestRefused(f"expected_s is {len(expected)} bytes but ER spans {er_size}")
        or_min, or_max = or_ if or_ is not None else (OR_BOTTOM, OR_BOTTOM)

        with self._lock:
            chal = self._fresh_chal()
            while chal in self.sessions:
                chal = self._fresh_chal()
            self.sessions[chal] = VerifierSession(
                chal=chal,
                expected_s=expected,
                er_min=er[0],
                er_max=er[1],
                or_min=or_min,
                or_max=or_max,
                t_req=self.clock(),
            )
        logger.info("request issued for ER [0x%04X,0x%04X]", er[0], er[1])
        return Request(chal=chal, er_min=er[0], er_max=er[1], or_min=or_min, or_max=or_max, s=s or b"")

    def expected_h(self, session: VerifierSession, o: bytes) -> bytes:
        md = session.expected_metadata()
        return hmac_sha256(derive_key(self._key, session.chal), serialize_fields(session.expected_s, o, md))

    def xverify(self, resp: Response, session: Union[bytes, VerifierSession]) -> int:
        """1 iff resp proves an untampered execution for an outstanding session."""
        chal = session.chal if isinstance(session, VerifierSession) else bytes(session)
        with self._lock:
            current = self.sessions.get(chal)
            now = self.clock()
            if current is None or current.state is SessionState.CLOSED:
                logger.warning("response for an unknown or closed session rejected")
                return 0
            current.state = SessionState.CLOSED
            current.t_verif = now
            if now - current.t_req > self.timeout:
                logger.warning("session expired after %d clock units", now - current.t_req)
                return 0
            if chal in self.accepted or len(resp.o) != current.expected_o_len:
                return 0
            ok = mac_equal(resp.h, self.expected_h(current, resp.o))
            if ok:
                current.accepted = True
                self.accepted.add(chal)
        logger.info("xverify=%d", int(ok))
        return int(ok)

    def expire(self) -> int:
        """Close every session older than the timeout; returns how many closed."""
        now = self.clock()
        closed = 0
        with self._lock:
            for session in self.sessions.values():
                if session.state is SessionState.OUTSTANDING and now - session.t_req > self.timeout:
                    session.state = SessionState.CLOSED
                    session.t_verif = now
                    closed += 1
        if closed:
            logger.warning("%d sessions expired", closed)
        return closed

    def outstanding(self) -> int:
        with self._lock:
            return sum(1 for s in self.sessions.values() if s.state is SessionState.OUTSTANDING)
