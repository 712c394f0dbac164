"""Init model package"""
from .config import ModelConfig
from .params import ModelParams, parameter_shapes, zero_task_embedding,\
                    save_checkpoint, load_checkpoint
from .transformer import forward_classify, forward_transduce, nll_loss,\
                         token_nll, primitive_block
from .batching import Batch, collate
