"""Init numerics package"""
from .tensor import Tensor, Tape, as_tensor, backward, current_tape,\
                    no_grad, recording
from .optim import Adam, AdamState, adam_step
from .gradcheck import GradCheckReport, finite_difference_check
from . import ops
