import os
import time
from typing import Any, Callable, Dict

import psutil


class RuntimeProfiler:
    """Wall time, CPU time and resident memory of a single call in this process."""

    def __init__(self):
        self.process = psutil.Process(os.getpid())
        self.metrics: Dict = {}

    def _snapshot(self) -> Dict:
        cpu = self.process.cpu_times()
        return {
            "user": cpu.user,
            "system": cpu.system,
            "rss": self.process.memory_info().rss,
            "wall": time.perf_counter(),
        }

    def profile(self, func: Callable[..., Any], *args, **kwargs) -> Any:
        """Run func, leaving its metrics in self.metrics even when it raises."""
        metrics = {"success": False}
        before = self._snapshot()
        try:
            result = func(*args, **kwargs)
            metrics["success"] = True
            return result
        except Exception as e:
            metrics["error"] = str(e)
            raise
        finally:
            after = self._snapshot()
            metrics["wall_time_sec"] = round(after["wall"] - before["wall"], 6)
            metrics["user_cpu_sec"] = round(after["user"] - before["user"], 6)
            metrics["system_cpu_sec"] = round(after["system"] - before["system"], 6)
            metrics["rss_mb"] = round(after["rss"] / 2 ** 20, 3)
            metrics["rss_delta_mb"] = round((after["rss"] - before["rss"]) / 2 ** 20, 3)
            metrics["threads"] = self.process.num_threads()
            self.metrics = metrics


if __name__ == "__main__":
    import json

    from evaluators.quadrature import amplitude_series
    from model.kinematics import Kinematics
    from model.mdd import make_toy_mdd

    profiler = RuntimeProfiler()
    profiler.profile(amplitude_series, make_toy_mdd(1.0, 1.0), Kinematics(2.0, 1.0),
                     [1.0, 10.0, 100.0, 200.0])
    print(json.dumps(profiler.metrics, indent=4))
