import functools

from hypothesis import HealthCheck, settings

from stablecy.exactlin import Field
from stablecy.families import construct_family, parse_type

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def bundle(shorthand: str, p: int = 2):
    """Family bundles are cached across tests; treat them as read-only."""
    return construct_family(parse_type(shorthand), Field(p))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
