from collections import Counter
import threading
import time


class Profiler:
    """Context manager that accumulates wall-clock time per named section.
    Counters are shared by all instances and guarded by a lock so that
    sweep cells and trajectories timed from worker threads add up correctly.
    """
    __lock = threading.Lock()
    __call_count = Counter()
    __time_elapsed = Counter()

    def __init__(self, name):
        self.name = name
        self.duration = 0.
        with Profiler.__lock:
            Profiler.__call_count[self.name] += 1

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, type, value, traceback):
        self.end = time.perf_counter()
        self.duration = self.end - self.start
        with Profiler.__lock:
            Profiler.__time_elapsed[self.name] += self.duration

    @classmethod
    def reset(cls):
        with cls.__lock:
            cls.__call_count.clear()
            cls.__time_elapsed.clear()

    @classmethod
    def names(cls):
        with cls.__lock:
            return sorted(cls.__time_elapsed)

    @classmethod
    def get_call_count(cls, name):
        with cls.__lock:
            return cls.__call_count[name]

    @classmethod
    def get_avg_millis(cls, name):
        with cls.__lock:
            call_count = cls.__call_count[name]
            if call_count == 0:
                return 0.
            return cls.__time_elapsed[name] * 1000 / call_count
