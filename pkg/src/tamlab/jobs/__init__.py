"""Init jobs package"""
from .job import Job
from .task import Task, CallableTask
from .benchmark import BenchmarkJob
from .training import TrainingJob
from .evaluation import EvaluationJob
from .projection import ProjectionJob
