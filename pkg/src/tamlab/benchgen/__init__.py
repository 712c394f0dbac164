"""Init benchgen package"""
from .config import GenConfig
from .grid import Grid, rasterize, unrasterize, shortest_path,\
                  gen_pathfinding_example
from .tasks import TaskSpec, TaskData, Example, Rejection,\
                   PrimitiveInventory, build_classification_task,\
                   build_transduction_task, build_pathfinding_task,\
                   eval_classification_pipeline, eval_transduction_pipeline,\
                   dedup_tasks
from .transforms import ElementwiseTransform, FilterTransform,\
                        LabelerTransform, SubstitutionTransform,\
                        RearrangeTransform, apply_elementwise, apply_filter,\
                        apply_labeler
from .split import BenchmarkSplit, CompositionalSplit, build_split
from .io import serialize_split, load_split, SPLIT_FILE
