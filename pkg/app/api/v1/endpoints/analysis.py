from typing import Optional

from fastapi import APIRouter, File, Query, UploadFile

from app.core.exceptions import TraceParseError
from app.core.logging_config import get_logger
from app.harness.trace_io import analyze_trace_lines
from app.models.metrics import MetricsReport

logger = get_logger(__name__)
router = APIRouter()


@router.post("/trace", response_model=MetricsReport)
async def analyze_uploaded_trace(
    file: UploadFile = File(...),
    duration: Optional[float] = Query(None, gt=0),
):
    """Recompute all metrics from an uploaded trace file."""
    content = await file.read()
    try:
        text = content.decode("utf-8")
    except UnicodeDecodeError:
        raise TraceParseError("Trace file is not UTF-8 text", error_code="TRACE_ENCODING")
    report = analyze_trace_lines(text.splitlines(), duration)
    logger.info(f"Analyzed uploaded trace {file.filename}: {report.pkt_sent} sent, {report.pkt_received} received")
    return report
