"""
Tracing helpers.

Solves, ADMM iterations and agent sessions open spans through ``span``. When
``init_telemetry`` was never called the global no-op provider is used, so
library code can trace unconditionally.
"""

import os
from contextlib import contextmanager
from typing import Any, Iterator, Optional, Sequence

from opentelemetry import trace
from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor

SERVICE_NAME = "mwen"
# checked in order; the first one set wins
ENDPOINT_VARIABLES = ("MWEN_OTLP_ENDPOINT", "OTLP_ENDPOINT")

_provider: Optional[TracerProvider] = None


def otlp_endpoint_from_env() -> Optional[str]:
    for variable in ENDPOINT_VARIABLES:
        value = os.getenv(variable, "").strip()
        if value:
            return value
    return None


def init_telemetry(otlp_endpoint: Optional[str] = None, role: Optional[str] = None) -> TracerProvider:
    """
    Install the mwen tracer provider once per process

    Spans are exported over OTLP/HTTP only when an endpoint is given or found
    in the environment. ``role`` tags the resource so the two agents of a
    networked run show up as separate services.
    """
    global _provider
    if _provider is not None:
        return _provider

    from mwen import __version__

    attributes = {"service.name": SERVICE_NAME, "service.version": __version__}
    if role:
        attributes["service.name"] = f"{SERVICE_NAME}-{role}"
        attributes["mwen.role"] = role
    provider = TracerProvider(resource=Resource.create(attributes))
    endpoint = otlp_endpoint or otlp_endpoint_from_env()
    if endpoint:
        provider.add_span_processor(BatchSpanProcessor(OTLPSpanExporter(endpoint=endpoint)))
    trace.set_tracer_provider(provider)
    _provider = provider
    return provider


def shutdown_telemetry() -> None:
    """Flush pending spans; safe to call when telemetry was never initialised."""
    global _provider
    if _provider is not None:
        _provider.shutdown()
        _provider = None


def attribute_value(value: Any) -> Any:
    """Coerce to a type span attributes accept"""
    if isinstance(value, (str, bool, int, float)):
        return value
    if isinstance(value, Sequence) and value and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return tuple(float(v) for v in value)
    return str(value)


@contextmanager
def span(name: str, **attributes: Any) -> Iterator[Any]:
    """Open a span named ``name`` with the given attributes."""
    with trace.get_tracer(SERVICE_NAME).start_as_current_span(name) as current:
        for key, value in attributes.items():
            if value is not None:
                current.set_attribute(key, attribute_value(value))
        yield current
