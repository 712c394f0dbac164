"""Training algorithms, test-time adaptation and evaluation."""
from .config import TamConfig
from .adaptation import AdaptationResult, AdaptedState, GradientBuffer,\
                        adapt_primitive_slot, adapt_task_embedding,\
                        adapt_test_task, finetune_full, unadapted_state
from .evaluation import METRIC_COLUMNS, evaluate, run_kshot, summarize,\
                        summarize_trials, write_metrics_csv
from .training import TrainingLog, TrainingResult, comp_tam_train,\
                      default_adapt_method, model_config_for,\
                      multitask_train, tam_train, task_agnostic_train, train
from .pca import Projection, pca_project
