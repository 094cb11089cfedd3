from prometheus_client import Counter, Histogram, Info, REGISTRY, write_to_textfile
import time
from functools import wraps

# Integration metrics (spin trajectories, two-level amplitudes, quadratures)
integrations_total = Counter(
    'cqd_integrations_total',
    'Total number of numerical integrations',
    ['kind', 'status']  # status: ok/failed
)

integration_duration = Histogram(
    'cqd_integration_duration_seconds',
    'Time spent in numerical integrations',
    ['kind']
)

integration_steps = Histogram(
    'cqd_integration_steps',
    'Accepted steps per integration',
    ['kind'],
    buckets=(10, 100, 1_000, 10_000, 100_000, 1_000_000)
)

# Monte Carlo metrics
mc_samples_total = Counter(
    'cqd_mc_samples_total',
    'Total number of Monte Carlo samples drawn',
    ['experiment']
)

# Verification metrics
checks_total = Counter(
    'cqd_checks_total',
    'Total number of verification checks performed',
    ['check', 'result']  # result: passed/failed
)

check_duration = Histogram(
    'cqd_check_duration_seconds',
    'Time spent on verification checks',
    ['check']
)

# Fit metrics
fits_total = Counter(
    'cqd_fits_total',
    'Total number of induction-coefficient fits',
    ['status']
)

build_info = Info(
    'cqd_build',
    'Information about the CQD toolkit'
)


class MetricsCollector:
    def __init__(self):
        self.start_time = time.time()

    def record_integration(self, kind: str, duration: float, steps: int = 0, ok: bool = True):
        """Record one numerical integration"""
        integrations_total.labels(kind=kind, status="ok" if ok else "failed").inc()
        integration_duration.labels(kind=kind).observe(duration)
        if steps:
            integration_steps.labels(kind=kind).observe(steps)

    def record_mc_samples(self, experiment: str, count: int):
        """Record Monte Carlo draws"""
        mc_samples_total.labels(experiment=experiment).inc(count)

    def record_check(self, check: str, passed: bool, duration: float):
        """Record a verification check"""
        checks_total.labels(check=check, result="passed" if passed else "failed").inc()
        check_duration.labels(check=check).observe(duration)

    def record_fit(self, converged: bool):
        """Record an induction-coefficient fit"""
        fits_total.labels(status="converged" if converged else "failed").inc()

    def set_build_info(self, version: str, command: str):
        build_info.info({"version": version, "command": command})

    def uptime(self) -> float:
        return time.time() - self.start_time


# Global metrics collector instance
metrics_collector = MetricsCollector()


def track_duration(kind: str):
    """Decorator recording duration and outcome of an integration routine"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.time()
            ok = True
            try:
                return func(*args, **kwargs)
            except Exception:
                ok = False
                raise
            finally:
                metrics_collector.record_integration(kind, time.time() - start_time, ok=ok)
        return wrapper
    return decorator


def write_metrics(path: str):
    """Write the default registry in node-exporter textfile format."""
    write_to_textfile(path, REGISTRY)
