"""
One complete PoX round in-process, with both messages passing through the
wire codec.
"""

import logging
from typing import NamedTuple, Optional

from pox_protocol.prover import Prover
from pox_protocol.verifier import Bounds, Verifier
from pox_protocol.wire import Request, Response

logger = logging.getLogger(__name__)


class RoundResult(NamedTuple):
    request: Request
    response: Response
    verdict: int


def run_round(
    verifier: Verifier,
    prover: Prover,
    s: Optional[bytes],
    er: Bounds,
    or_: Optional[Bounds] = None,
    expected_s: Optional[bytes] = None,
) -> RoundResult:
    """XRequest, honest prover handling, XVerify."""
    request = verifier.xrequest(s, er, or_, expected_s=expected_s)
    response = Response.decode(prover.serve_frame(request.encode()))
    verdict = verifier.xverify(response, request.chal)
    logger.info("round for ER [0x%04X,0x%04X]: verdict %d", er[0], er[1], verdict)
    return RoundResult(request, response, verdict)
