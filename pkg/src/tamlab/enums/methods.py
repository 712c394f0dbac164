"""Training algorithms and test-time adaptation methods."""
from enum import Enum


class TrainMethod(Enum):
    """
    The TrainMethod enumeration is the training algorithms currently
    supported by tamlab.

    - tam: alternating minimization over task embedding and shared weights.
    - comp_tam: tam inferring one unknown primitive embedding per task.
    - multitask: one learned embedding per training task, plain backprop.
    - task_agnostic: no task information at all.
    """
    tam = 'tam'
    comp_tam = 'comp-tam'
    multitask = 'multitask'
    task_agnostic = 'task-agnostic'


class AdaptMethod(Enum):
    """How a trained model is adapted to the k examples of a test task."""
    tam_z = 'tam-z'
    comp_slot = 'comp-slot'
    finetune_full = 'finetune-full'
